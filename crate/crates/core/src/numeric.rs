//! Root finding and quadrature used throughout the solver.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 400;
const MAX_SIMPSON_DEPTH: u32 = 48;

/// Bisection on `[lo, hi]` until the bracket is narrower than `width`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (a zero at either end is
/// returned directly). A midpoint with `f == 0` moves the upper end, so for
/// functions that vanish identically past their root the first crossing is
/// found.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, width: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = f(a);
    let fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::NoRoot {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    let lower_positive = fa > 0.0;
    let straddles = if lower_positive { fb <= 0.0 } else { fb >= 0.0 };
    if !straddles {
        return Err(Error::NoRoot {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    for _ in 0..MAX_BISECTIONS {
        if b - a <= width {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm.is_nan() {
            return Err(Error::NoRoot {
                lo: a,
                hi: b,
                f_lo: fa,
                f_hi: fm,
            });
        }
        let same_side_as_lower = if lower_positive { fm > 0.0 } else { fm < 0.0 };
        if same_side_as_lower {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    // Seed with a fixed partition so narrow features are not stepped over.
    const SEED_PANELS: usize = 16;
    let h = (b - a) / SEED_PANELS as f64;
    let panel_tol = tol / SEED_PANELS as f64;
    let mut total = 0.0;
    for i in 0..SEED_PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == SEED_PANELS { b } else { lo + h };
        let flo = f(lo);
        let fhi = f(hi);
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson_step(
            &f,
            lo,
            hi,
            flo,
            fmid,
            fhi,
            whole,
            panel_tol,
            MAX_SIMPSON_DEPTH,
        )
        .ok_or(Error::Integration { a, b })?;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Integration { a, b })
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}

/// Composite Simpson rule with `panels` panels (rounded up to even).
pub fn composite_simpson<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        sum += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    sum * h / 3.0
}

/// Clamp `x` into `[lo, hi]`.
#[inline]
pub fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    lo.max(x.min(hi))
}
