//! Reinsurers' first-order conditions and reaction curves for an arbitrary
//! claim law.
//!
//! Write `k_I = γ_I A_I`, `k_1 = γ_R1 A_R1`, `k_2 = γ_R2 A_R2`. With `(q, d)`
//! the insurer's response, reinsurer 1's condition is
//!
//! ```text
//! Λ_R1 = [2q (k_1/k_I + 1) - 1] ∫_0^d y² dF + d² (k_1/ξ1 - 1) S(d)
//! ```
//!
//! and reinsurer 2's is
//!
//! ```text
//! Λ_R2 = [1 + k_2/k_I + k_2/(2ξ1)] ∫_d^∞ (y - d) dF - d S(d).
//! ```
//!
//! The intensity `λ` cancels from both.

use crate::error::{Error, Result};
use crate::market::{
    admissible_box, ClaimDistribution, MarketParams, Party, PremiumPoint, QUAD_TOL,
};
use crate::numeric::{adaptive_simpson, bisect};
use crate::response::response;

const ROOT_WIDTH: f64 = 1e-12;
const BRACKET_WIDEN: f64 = 0.1;
/// Outward doublings tried for generic laws when the default bracket fails.
const MAX_EXPANSIONS: usize = 40;

/// Partial moments of the claim law split at a deductible `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedMoments {
    /// `∫_0^d y dF`
    pub m1_below: f64,
    /// `∫_0^d y² dF`
    pub m2_below: f64,
    /// `∫_d^∞ (y - d) dF`
    pub excess_mean: f64,
    /// `∫_d^∞ (y - d)² dF`
    pub excess_sq: f64,
    /// `S(d) = 1 - F(d)`
    pub survival: f64,
    pub d: f64,
}

/// Partial moments at deductible `d ≥ 0`; `d = ∞` is allowed.
pub fn truncated_moments(dist: &ClaimDistribution, d: f64) -> Result<TruncatedMoments> {
    if !(d >= 0.0) {
        return Err(Error::Domain(format!(
            "deductible must be nonnegative, got {d}"
        )));
    }
    if d == f64::INFINITY {
        return Ok(TruncatedMoments {
            m1_below: dist.mean(),
            m2_below: dist.second_moment(),
            excess_mean: 0.0,
            excess_sq: 0.0,
            survival: 0.0,
            d,
        });
    }
    match dist {
        ClaimDistribution::Exponential { rate } => {
            let b = *rate;
            let x = b * d;
            let s = (-x).exp();
            Ok(TruncatedMoments {
                m1_below: ((-(-x).exp_m1()) - x * s) / b,
                m2_below: (2.0 / (b * b) - s * (d * d + 2.0 * d / b + 2.0 / (b * b))).max(0.0),
                excess_mean: s / b,
                excess_sq: 2.0 * s / (b * b),
                survival: s,
                d,
            })
        }
        ClaimDistribution::Generic(g) => {
            let upper = g.upper();
            let surv = |y: f64| 1.0 - g.cdf(y);
            let cut = d.min(upper);
            let s = if d >= upper { 0.0 } else { surv(d) };
            let i0 = adaptive_simpson(surv, 0.0, cut, QUAD_TOL)?;
            let i1 = adaptive_simpson(|y| 2.0 * y * surv(y), 0.0, cut, QUAD_TOL)?;
            let (e1, e2) = if d >= upper {
                (0.0, 0.0)
            } else {
                (
                    adaptive_simpson(surv, d, upper, QUAD_TOL)?,
                    adaptive_simpson(|y| 2.0 * (y - d) * surv(y), d, upper, QUAD_TOL)?,
                )
            };
            Ok(TruncatedMoments {
                m1_below: (i0 - d * s).max(0.0),
                m2_below: (i1 - d * d * s).max(0.0),
                excess_mean: e1.max(0.0),
                excess_sq: e2.max(0.0),
                survival: s,
                d,
            })
        }
    }
}

/// Dimensionless ratios entering the first-order conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocRatios {
    /// `γ_R1 A_R1 / (γ_I A_I)`
    pub c_r1: f64,
    /// `γ_R2 A_R2 / (γ_I A_I)`
    pub c_r2: f64,
    /// `γ_R1 A_R1 / ξ1`
    pub b_r1_ratio: f64,
}

impl FocRatios {
    pub fn at(point: &PremiumPoint, params: &MarketParams) -> Result<Self> {
        if !(point.xi1 > 0.0) {
            return Err(Error::DegeneratePremium { xi1: point.xi1 });
        }
        let k = scaled_aversions(params, point.t)?;
        Ok(Self {
            c_r1: k[1] / k[0],
            c_r2: k[2] / k[0],
            b_r1_ratio: k[1] / point.xi1,
        })
    }
}

/// `[γ_I A_I, γ_R1 A_R1, γ_R2 A_R2]` at time `t`.
pub(crate) fn scaled_aversions(params: &MarketParams, t: f64) -> Result<[f64; 3]> {
    let mut k = [0.0; 3];
    for (slot, p) in k.iter_mut().zip(Party::ALL) {
        *slot = params.risk_aversion[p] * params.accumulation(p, t)?;
    }
    Ok(k)
}

/// Reinsurer 1's first-order residual `Λ_R1` at `point`.
pub fn foc_residual_r1(point: &PremiumPoint, params: &MarketParams) -> Result<f64> {
    let r = response(point, params)?;
    let k = scaled_aversions(params, point.t)?;
    let tm = truncated_moments(&params.claims, r.d)?;
    let mut value = (2.0 * r.q * (k[1] / k[0] + 1.0) - 1.0) * tm.m2_below;
    if tm.survival > 0.0 {
        value += r.d * r.d * (k[1] / point.xi1 - 1.0) * tm.survival;
    }
    Ok(value)
}

/// Reinsurer 2's first-order residual `Λ_R2` at `point`.
pub fn foc_residual_r2(point: &PremiumPoint, params: &MarketParams) -> Result<f64> {
    let r = response(point, params)?;
    let k = scaled_aversions(params, point.t)?;
    let tm = truncated_moments(&params.claims, r.d)?;
    let lead = 1.0 + k[2] / k[0] + k[2] / (2.0 * point.xi1);
    let mut value = lead * tm.excess_mean;
    if tm.survival > 0.0 {
        value -= r.d * tm.survival;
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reinsurer {
    R1,
    R2,
}

/// Instantaneous reward rate maximized by a reinsurer, without the outer accumulation factor.
///
/// `r1 = λ (ξ1 - k_1/2) E[l1²]` and `r2 = λ (ξ2 E[l2] - (k_2/2) E[l2²])`.
pub fn instantaneous_reward(
    point: &PremiumPoint,
    params: &MarketParams,
    which: Reinsurer,
) -> Result<f64> {
    let r = response(point, params)?;
    let m = r.moments(&params.claims)?;
    let k = scaled_aversions(params, point.t)?;
    let lambda = params.intensity;
    Ok(match which {
        Reinsurer::R1 => lambda * (point.xi1 - 0.5 * k[1]) * m.l1_sq,
        Reinsurer::R2 => lambda * (point.xi2 * m.l2_mean - 0.5 * k[2] * m.l2_sq),
    })
}

/// Default `ξ1` search bracket: the interval on which the exponential FOC
/// ratio is feasible, widened by 10% on each side.
pub fn xi1_bracket(params: &MarketParams, t: f64) -> Result<(f64, f64)> {
    let k = scaled_aversions(params, t)?;
    let c = k[1] / k[0];
    let lo = 2.0 * k[1] / (((2.0 * c - 1.0).powi(2) + 8.0 * c).sqrt() - (2.0 * c - 1.0));
    let hi = k[1] * (2.0 * c + 1.0) / (2.0 * c);
    Ok((lo * (1.0 - BRACKET_WIDEN), hi * (1.0 + BRACKET_WIDEN)))
}

/// Default `ξ2` search bracket `[1e-8, 10 k_I (1 + C_R2) / β_eff]`.
pub fn xi2_bracket(params: &MarketParams, t: f64) -> Result<(f64, f64)> {
    let k = scaled_aversions(params, t)?;
    let hi = 10.0 * k[0] * (1.0 + k[2] / k[0]) / params.claims.effective_rate();
    Ok((1e-8, hi))
}

fn solve_in_bracket<F>(mut f: F, bracket: (f64, f64), expand: bool) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure = None;
    let mut g = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let (mut lo, mut hi) = bracket;
    let mut result = bisect(&mut g, lo, hi, ROOT_WIDTH);
    if expand {
        for _ in 0..MAX_EXPANSIONS {
            if !matches!(result, Err(Error::NoRoot { f_lo, f_hi, .. }) if !f_lo.is_nan() && !f_hi.is_nan())
            {
                break;
            }
            lo *= 0.5;
            hi *= 2.0;
            result = bisect(&mut g, lo, hi, ROOT_WIDTH);
        }
    }
    match (result, failure) {
        (Ok(x), _) => Ok(x),
        (Err(_), Some(e)) => Err(e),
        (Err(e), None) => Err(e),
    }
}

/// Reinsurer 1's best response to `ξ2`: the root of `Λ_R1(·, ξ2)`.
///
/// For exponential claims the default bracket is used as is; for generic
/// laws it is expanded outward if it fails to straddle a root.
pub fn reaction_xi1(xi2: f64, params: &MarketParams, t: f64, enforce_box: bool) -> Result<f64> {
    if !(xi2 > 0.0 && xi2.is_finite()) {
        return Err(Error::Domain(format!(
            "reaction_xi1 needs xi2 > 0, got {xi2}"
        )));
    }
    let bracket = xi1_bracket(params, t)?;
    let generic = params.claims.exponential_rate().is_none();
    let root = solve_in_bracket(
        |xi1| foc_residual_r1(&PremiumPoint::new(xi1, xi2, t), params),
        bracket,
        generic,
    )?;
    Ok(if enforce_box {
        admissible_box(params).clamp_xi1(root)
    } else {
        root
    })
}

/// Reinsurer 2's best response to `ξ1`: the root of `Λ_R2(ξ1, ·)`.
pub fn reaction_xi2(xi1: f64, params: &MarketParams, t: f64, enforce_box: bool) -> Result<f64> {
    if !(xi1 > 0.0 && xi1.is_finite()) {
        return Err(Error::DegeneratePremium { xi1 });
    }
    let bracket = xi2_bracket(params, t)?;
    let generic = params.claims.exponential_rate().is_none();
    let root = solve_in_bracket(
        |xi2| foc_residual_r2(&PremiumPoint::new(xi1, xi2, t), params),
        bracket,
        generic,
    )?;
    Ok(if enforce_box {
        admissible_box(params).clamp_xi2(root)
    } else {
        root
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralOptions {
    pub max_iter: usize,
    /// Weight kept on the previous iterate.
    pub damping: f64,
    /// Step size below which the iteration stops.
    pub tol: f64,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            damping: 0.5,
            tol: 1e-12,
        }
    }
}

/// A candidate fixed point of the two reaction curves.
///
/// Uniqueness is not established for non-exponential laws, so this is only
/// the point the damped iteration settled on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralEquilibrium {
    pub point: PremiumPoint,
    /// `(Λ_R1, Λ_R2)` at the returned point.
    pub residuals: (f64, f64),
    pub iterations: usize,
}

const RESIDUAL_TOL: f64 = 1e-8;

/// Damped best-response iteration `ξ1 ← w ξ1 + (1 - w) R1(R2(ξ1))`, no box.
pub fn general_equilibrium(
    params: &MarketParams,
    t: f64,
    opts: GeneralOptions,
) -> Result<GeneralEquilibrium> {
    if !(0.0..1.0).contains(&opts.damping) {
        return Err(Error::InvalidParameter {
            name: "damping",
            reason: format!("must lie in [0, 1), got {}", opts.damping),
        });
    }
    let (lo, hi) = xi1_bracket(params, t)?;
    let mut xi1 = 0.5 * (lo + hi);
    let mut last_residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let xi2 = reaction_xi2(xi1, params, t, false)?;
        let target = reaction_xi1(xi2, params, t, false)?;
        let next = opts.damping * xi1 + (1.0 - opts.damping) * target;
        let step = (next - xi1).abs();
        xi1 = next;
        if step <= opts.tol * xi1.max(1.0) {
            let xi2 = reaction_xi2(xi1, params, t, false)?;
            let point = PremiumPoint::new(xi1, xi2, t);
            let residuals = (
                foc_residual_r1(&point, params)?,
                foc_residual_r2(&point, params)?,
            );
            last_residual = residuals.0.abs().max(residuals.1.abs());
            if last_residual <= RESIDUAL_TOL {
                return Ok(GeneralEquilibrium {
                    point,
                    residuals,
                    iterations: iter,
                });
            }
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::GenericClaims;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const XI1: f64 = 0.2826915284046374;
    const XI2: f64 = 0.3822474305412875;

    fn uniform02() -> MarketParams {
        MarketParams::baseline().with_claims(ClaimDistribution::Generic(
            GenericClaims::uniform(0.0, 2.0).unwrap(),
        ))
    }

    #[test]
    fn exponential_truncated_moments_example() {
        let e = ClaimDistribution::exponential(1.0).unwrap();
        let tm = truncated_moments(&e, 2.3936).unwrap();
        // high-precision oracle values
        assert_abs_diff_eq!(tm.m2_below, 0.857236503777027, epsilon = 1e-12);
        assert_abs_diff_eq!(tm.excess_mean, 0.0913004100640257, epsilon = 1e-12);
        assert_abs_diff_eq!(tm.survival, 0.0913004100640257, epsilon = 1e-12);
        assert_abs_diff_eq!(tm.excess_mean, 0.09129, epsilon = 2e-5);
    }

    #[test]
    fn exponential_closed_forms_agree_with_quadrature() {
        let b = 1.7;
        let closed = truncated_moments(&ClaimDistribution::exponential(b).unwrap(), 0.8).unwrap();
        let generic = ClaimDistribution::Generic(
            GenericClaims::new("expo", move |y: f64| -(-b * y).exp_m1()).unwrap(),
        );
        let quad = truncated_moments(&generic, 0.8).unwrap();
        assert_abs_diff_eq!(closed.m1_below, quad.m1_below, epsilon = 1e-9);
        assert_abs_diff_eq!(closed.m2_below, quad.m2_below, epsilon = 1e-9);
        assert_abs_diff_eq!(closed.excess_mean, quad.excess_mean, epsilon = 1e-9);
        assert_abs_diff_eq!(closed.excess_sq, quad.excess_sq, epsilon = 1e-9);
        assert_abs_diff_eq!(closed.survival, quad.survival, epsilon = 1e-12);
    }

    #[test]
    fn truncation_extremes() {
        for dist in [
            ClaimDistribution::exponential(1.3).unwrap(),
            uniform02().claims,
        ] {
            let zero = truncated_moments(&dist, 0.0).unwrap();
            assert_abs_diff_eq!(zero.m2_below, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(zero.excess_mean, dist.mean(), epsilon = 1e-9);
            assert_abs_diff_eq!(zero.survival, 1.0, epsilon = 1e-12);
            let inf = truncated_moments(&dist, f64::INFINITY).unwrap();
            assert_eq!(
                (inf.m2_below, inf.excess_mean, inf.survival),
                (dist.second_moment(), 0.0, 0.0)
            );
            let far = truncated_moments(&dist, 60.0).unwrap();
            assert_abs_diff_eq!(far.m2_below, dist.second_moment(), epsilon = 1e-9);
            assert_abs_diff_eq!(far.excess_mean, 0.0, epsilon = 1e-12);
        }
        assert!(truncated_moments(&ClaimDistribution::exponential(1.0).unwrap(), -0.1).is_err());
    }

    #[test]
    fn uniform_truncated_moments_analytic() {
        let tm = truncated_moments(&uniform02().claims, 0.5).unwrap();
        assert_abs_diff_eq!(tm.m1_below, 0.0625, epsilon = 1e-9);
        assert_abs_diff_eq!(tm.m2_below, 0.125 / 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tm.excess_mean, 1.5 * 1.5 / 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tm.excess_sq, 1.5f64.powi(3) / 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tm.survival, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn residuals_vanish_at_baseline_equilibrium() {
        let p = MarketParams::baseline();
        let pt = PremiumPoint::new(XI1, XI2, 0.0);
        assert!(foc_residual_r1(&pt, &p).unwrap().abs() < 1e-8);
        assert!(foc_residual_r2(&pt, &p).unwrap().abs() < 1e-8);
        let pt = PremiumPoint::new(0.28269, 0.38225, 0.0);
        assert!(foc_residual_r1(&pt, &p).unwrap().abs() < 1e-4);
        assert!(foc_residual_r2(&pt, &p).unwrap().abs() < 1e-4);
    }

    #[test]
    fn residual_signs_at_bracket_ends() {
        let p = MarketParams::baseline();
        let (lo, hi) = xi1_bracket(&p, 0.0).unwrap();
        assert_abs_diff_eq!(lo / 0.9, 0.22255, epsilon = 5e-6);
        assert_abs_diff_eq!(hi / 1.1, 0.33383, epsilon = 5e-6);
        assert!(foc_residual_r1(&PremiumPoint::new(lo, XI2, 0.0), &p).unwrap() > 0.0);
        assert!(foc_residual_r1(&PremiumPoint::new(hi, XI2, 0.0), &p).unwrap() < 0.0);
    }

    #[test]
    fn zero_excess_loading_reductions() {
        let p = MarketParams::baseline();
        let k = 0.1 * 0.8f64.exp();
        let xi1 = 0.3;
        let r1 = foc_residual_r1(&PremiumPoint::new(xi1, 0.0, 0.0), &p).unwrap();
        assert_eq!(r1, 0.0);
        let r2 = foc_residual_r2(&PremiumPoint::new(xi1, 0.0, 0.0), &p).unwrap();
        assert_abs_diff_eq!(r2, 1.0 + 1.0 + k / (2.0 * xi1), epsilon = 1e-12);
        let err = foc_residual_r1(&PremiumPoint::new(0.0, 0.3, 0.0), &p).unwrap_err();
        assert_eq!(err, Error::DegeneratePremium { xi1: 0.0 });
    }

    #[test]
    fn foc_ratios_at_baseline() {
        let p = MarketParams::baseline();
        let r = FocRatios::at(&PremiumPoint::new(XI1, XI2, 0.0), &p).unwrap();
        assert_abs_diff_eq!(r.c_r1, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.c_r2, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.b_r1_ratio, 0.787268349020663, epsilon = 1e-12);
    }

    #[test]
    fn rewards_trivial_cases() {
        let mut p = MarketParams::baseline();
        // ξ2 = 0 makes the excess layer free, so everything is ceded to reinsurer 2
        let pt = PremiumPoint::new(XI1, 0.0, 0.0);
        let k2 = 0.1 * 0.8f64.exp();
        assert_abs_diff_eq!(
            instantaneous_reward(&pt, &p, Reinsurer::R2).unwrap(),
            -k2,
            epsilon = 1e-15
        );
        p.intensity = 0.0;
        let pt = PremiumPoint::new(XI1, XI2, 0.0);
        assert_eq!(instantaneous_reward(&pt, &p, Reinsurer::R1).unwrap(), 0.0);
        assert_eq!(instantaneous_reward(&pt, &p, Reinsurer::R2).unwrap(), 0.0);
    }

    #[test]
    fn reactions_reproduce_baseline_equilibrium() {
        let p = MarketParams::baseline();
        assert_abs_diff_eq!(
            reaction_xi1(0.38225, &p, 0.0, true).unwrap(),
            0.28269,
            epsilon = 5e-6
        );
        assert_abs_diff_eq!(
            reaction_xi2(0.28269, &p, 0.0, true).unwrap(),
            0.38225,
            epsilon = 5e-6
        );
        assert_abs_diff_eq!(
            reaction_xi1(XI2, &p, 0.0, false).unwrap(),
            XI1,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            reaction_xi2(XI1, &p, 0.0, false).unwrap(),
            XI2,
            epsilon = 1e-10
        );
    }

    #[test]
    fn reaction_xi2_large_xi1_limit() {
        let p = MarketParams::baseline();
        let k = 0.1 * 0.8f64.exp();
        let r = reaction_xi2(1e7, &p, 0.0, false).unwrap();
        assert_abs_diff_eq!(r, k * 2.0, epsilon = 1e-7);
    }

    #[test]
    fn reaction_xi1_nondecreasing_in_xi2() {
        let p = MarketParams::baseline();
        let mut prev = 0.0;
        for i in 1..=40 {
            let xi2 = 0.02 * i as f64;
            let r = reaction_xi1(xi2, &p, 0.0, false).unwrap();
            assert!(r >= prev - 1e-12, "xi2 = {xi2}: {r} < {prev}");
            prev = r;
        }
    }

    #[test]
    fn reward_grid_argmax_matches_roots() {
        let p = MarketParams::baseline();
        let bx = admissible_box(&p);
        let argmax = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            let n = ((hi - lo) / 1e-4).round() as usize;
            (0..=n)
                .map(|i| lo + 1e-4 * i as f64)
                .max_by(|a, b| f(*a).total_cmp(&f(*b)))
                .unwrap()
        };
        let r1 = |x: f64| {
            instantaneous_reward(&PremiumPoint::new(x, XI2, 0.0), &p, Reinsurer::R1).unwrap()
        };
        let r2 = |x: f64| {
            instantaneous_reward(&PremiumPoint::new(XI1, x, 0.0), &p, Reinsurer::R2).unwrap()
        };
        assert!((argmax(&r1, bx.xi1.0, bx.xi1.1) - XI1).abs() <= 1e-4);
        assert!((argmax(&r2, bx.xi2.0, bx.xi2.1) - XI2).abs() <= 1e-4);
    }

    #[test]
    fn general_equilibrium_matches_exponential_values() {
        let p = MarketParams::baseline();
        let g = general_equilibrium(&p, 0.0, GeneralOptions::default()).unwrap();
        assert_abs_diff_eq!(g.point.xi1, XI1, epsilon = 1e-8);
        assert_abs_diff_eq!(g.point.xi2, XI2, epsilon = 1e-8);
    }

    #[test]
    fn general_equilibrium_uniform_claims() {
        let p = uniform02();
        let g = general_equilibrium(&p, 0.0, GeneralOptions::default()).unwrap();
        assert!(g.residuals.0.abs() < 1e-8 && g.residuals.1.abs() < 1e-8);
        let mut p5 = p.clone();
        p5.intensity = 5.0;
        let g5 = general_equilibrium(&p5, 0.0, GeneralOptions::default()).unwrap();
        assert_eq!(g.point, g5.point);
    }

    #[test]
    fn general_equilibrium_reports_non_convergence() {
        let p = MarketParams::baseline();
        let opts = GeneralOptions {
            max_iter: 1,
            ..GeneralOptions::default()
        };
        assert!(matches!(
            general_equilibrium(&p, 0.0, opts),
            Err(Error::Convergence { iterations: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn truncated_moments_monotone_in_d(d in 0.0f64..10.0, dd in 1e-6f64..2.0, b in 0.2f64..3.0) {
            let dist = ClaimDistribution::exponential(b).unwrap();
            let a = truncated_moments(&dist, d).unwrap();
            let c = truncated_moments(&dist, d + dd).unwrap();
            prop_assert!(c.m2_below >= a.m2_below);
            prop_assert!(c.excess_mean <= a.excess_mean);
            prop_assert!(c.survival <= a.survival);
            prop_assert!(a.m2_below <= dist.second_moment() && a.excess_mean <= dist.mean());
            prop_assert!((0.0..=1.0).contains(&a.survival));
        }

        #[test]
        fn residuals_invariant_under_intensity(
            xi1 in 0.05f64..1.0,
            xi2 in 0.01f64..1.0,
            lambda in 0.1f64..10.0,
        ) {
            let p = MarketParams::baseline();
            let mut q = p.clone();
            q.intensity = lambda;
            let pt = PremiumPoint::new(xi1, xi2, 0.0);
            prop_assert_eq!(foc_residual_r1(&pt, &p).unwrap(), foc_residual_r1(&pt, &q).unwrap());
            prop_assert_eq!(foc_residual_r2(&pt, &p).unwrap(), foc_residual_r2(&pt, &q).unwrap());
        }

        #[test]
        fn residuals_locally_lipschitz(
            xi1 in 0.05f64..1.0,
            xi2 in 0.01f64..1.0,
            h in -1e-7f64..1e-7,
        ) {
            let p = MarketParams::baseline();
            let a = PremiumPoint::new(xi1, xi2, 0.0);
            let b = PremiumPoint::new(xi1 + h, xi2 - h, 0.0);
            let l = 1e3;
            prop_assert!((foc_residual_r1(&a, &p).unwrap() - foc_residual_r1(&b, &p).unwrap()).abs() <= l * h.abs() + 1e-14);
            prop_assert!((foc_residual_r2(&a, &p).unwrap() - foc_residual_r2(&b, &p).unwrap()).abs() <= l * h.abs() + 1e-14);
        }
    }
}
