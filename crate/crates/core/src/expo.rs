//! Closed-form equilibrium for exponential claims.
//!
//! With `Y ~ Exp(β)` reinsurer 1's first-order condition reduces to a quadratic
//! in `B = γ_R1 A_R1 / ξ1` whose positive root is `B = G(βd)`, and reinsurer
//! 2's condition gives `ξ2` explicitly. The two reaction curves `h1`, `h2`
//! cross exactly once; the box-constrained equilibrium is obtained from that
//! crossing by clamping.

use std::fmt;

use crate::error::{Error, Result};
use crate::market::{admissible_box, AdmissibleBox, BoundConvention, MarketParams, PremiumPoint};
use crate::numeric::{bisect, clamp};
use crate::reaction::scaled_aversions;
use crate::response::{response, ResponseStrategy};

/// Below this the series form of `e` is used.
const E_SERIES_SWITCH: f64 = 0.5;
/// `e(x)` overflows shortly after this; it is reported as `+∞`.
const E_OVERFLOW: f64 = 700.0;
/// Upper end of the `βd` search interval.
const X_MAX: f64 = 800.0;
const ROOT_WIDTH: f64 = 1e-12;

/// `e(x) = (2/x²) eˣ - (1 + 2/x + 2/x²)` for `x > 0`.
pub fn e_fun(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("e(x) needs x > 0, got {x}")));
    }
    Ok(e_unchecked(x))
}

fn e_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x > E_OVERFLOW {
        return f64::INFINITY;
    }
    if x < E_SERIES_SWITCH {
        // Σ_{n≥1} 2xⁿ/(n+2)!
        let mut term = 2.0 * x / 6.0;
        let mut sum = term;
        let mut n = 1.0;
        while term > 1e-18 * sum {
            n += 1.0;
            term *= x / (n + 2.0);
            sum += term;
        }
        return sum;
    }
    2.0 / (x * x) * x.exp() - (1.0 + 2.0 / x + 2.0 / (x * x))
}

/// Positive root of `B² + [2C-1 + x(2C+1)] B - 2C(x+1) = 0`.
pub fn g_fun(x: f64, c_r1: f64) -> f64 {
    let c = c_r1;
    if x == f64::INFINITY {
        return 2.0 * c / (2.0 * c + 1.0);
    }
    let b = 2.0 * c - 1.0 + x * (2.0 * c + 1.0);
    if b > 0.0 {
        // rationalized; avoids cancellation and overflow for large x
        let r = (x + 1.0) / b;
        4.0 * c * r / (1.0 + (1.0 + 8.0 * c * r / b).sqrt())
    } else {
        0.5 * (-b + (b * b + 8.0 * c * (x + 1.0)).sqrt())
    }
}

/// `G(x) = g(e(x))`, strictly decreasing from `g(0)` to `2C/(2C+1)`.
pub fn big_g(x: f64, c_r1: f64) -> Result<f64> {
    Ok(g_fun(e_fun(x)?, c_r1))
}

/// Open range of `G` for ratio `C_R1`.
pub fn g_range(c_r1: f64) -> (f64, f64) {
    (2.0 * c_r1 / (2.0 * c_r1 + 1.0), g_fun(0.0, c_r1))
}

/// Inverse of `G` by bisection in `x`.
pub fn g_inv(y: f64, c_r1: f64) -> Result<f64> {
    let (lo, hi) = g_range(c_r1);
    if !(y > lo && y < hi) {
        return Err(Error::Range { value: y, lo, hi });
    }
    bisect(|x| g_fun(e_unchecked(x), c_r1) - y, 0.0, X_MAX, ROOT_WIDTH)
}

/// Which part of the admissible box binds at the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Interior,
    /// `ξ1` above the box, `ξ2` at its cap.
    UpperRight,
    /// Only `ξ2` is capped.
    Xi2CapOnly,
    /// Only `ξ1` is floored.
    Xi1FloorOnly,
    /// Both loadings at their floors.
    LowerLeft,
    OtherBoundary,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Interior => "Interior",
            Regime::UpperRight => "UpperRight",
            Regime::Xi2CapOnly => "Xi2CapOnly",
            Regime::Xi1FloorOnly => "Xi1FloorOnly",
            Regime::LowerLeft => "LowerLeft",
            Regime::OtherBoundary => "OtherBoundary",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            Regime::Interior,
            Regime::UpperRight,
            Regime::Xi2CapOnly,
            Regime::Xi1FloorOnly,
            Regime::LowerLeft,
            Regime::OtherBoundary,
        ]
        .into_iter()
        .find(|r| r.label() == s)
        .ok_or_else(|| Error::Domain(format!("unknown regime `{s}`")))
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumResult {
    pub xi1: f64,
    pub xi2: f64,
    pub t: f64,
    pub response: ResponseStrategy,
    pub regime: Regime,
    /// Crossing of the unconstrained reaction curves.
    pub unconstrained: (f64, f64),
    /// Largest distance between a loading and the boxed best response to the other.
    pub best_response_gap: f64,
}

impl EquilibriumResult {
    pub fn point(&self) -> PremiumPoint {
        PremiumPoint::new(self.xi1, self.xi2, self.t)
    }
}

/// Reaction curves of the exponential game at a fixed time.
#[derive(Debug, Clone, Copy)]
pub struct ExpoGame {
    pub beta: f64,
    /// `γ_I A_I(t)`
    pub k_i: f64,
    /// `γ_R1 A_R1(t)`
    pub k_1: f64,
    /// `γ_R2 A_R2(t)`
    pub k_2: f64,
    pub t: f64,
    pub bounds: AdmissibleBox,
}

impl ExpoGame {
    pub fn at(params: &MarketParams, t: f64) -> Result<Self> {
        let beta = params.claims.exponential_rate().ok_or_else(|| {
            Error::Config(format!(
                "closed-form equilibrium needs exponential claims, got {}",
                params.claims.describe()
            ))
        })?;
        if params.bounds != BoundConvention::Section4 {
            return Err(Error::Config(
                "closed-form equilibrium uses the section4 bound convention; definition21 is not supported".into(),
            ));
        }
        let [k_i, k_1, k_2] = scaled_aversions(params, t)?;
        Ok(Self {
            beta,
            k_i,
            k_1,
            k_2,
            t,
            bounds: admissible_box(params),
        })
    }

    pub fn c_r1(&self) -> f64 {
        self.k_1 / self.k_i
    }

    pub fn c_r2(&self) -> f64 {
        self.k_2 / self.k_i
    }

    /// Open interval of `ξ1` on which `h1` is defined.
    pub fn h1_domain(&self) -> (f64, f64) {
        let (lo, hi) = g_range(self.c_r1());
        (self.k_1 / hi, self.k_1 / lo)
    }

    /// Reinsurer 2's loading that makes `ξ1` reinsurer 1's best response.
    pub fn h1(&self, xi1: f64) -> Result<f64> {
        let x = g_inv(self.k_1 / xi1, self.c_r1())?;
        Ok(self.h1_from_x(x, xi1))
    }

    fn h1_from_x(&self, x: f64, xi1: f64) -> f64 {
        self.k_i * x / (self.beta * (self.k_i / (2.0 * xi1) + 1.0))
    }

    /// `ξ1` on the reaction curve of reinsurer 1 when `βd = x`.
    fn xi1_from_x(&self, x: f64) -> f64 {
        self.k_1 / g_fun(e_unchecked(x), self.c_r1())
    }

    /// Reinsurer 2's best response to `ξ1`.
    pub fn h2(&self, xi1: f64) -> f64 {
        (self.k_i / self.beta) * (1.0 + self.c_r2() - self.k_i / (self.k_i + 2.0 * xi1))
    }

    /// Inverse of `h1`, solved along `x = βd`.
    pub fn h1_inv(&self, xi2: f64) -> Result<f64> {
        let curve = |x: f64| {
            let xi1 = self.xi1_from_x(x);
            self.h1_from_x(x, xi1)
        };
        let top = curve(E_OVERFLOW);
        if !(xi2 > 0.0 && xi2 < top) {
            return Err(Error::Range {
                value: xi2,
                lo: 0.0,
                hi: top,
            });
        }
        let x = bisect(|x| curve(x) - xi2, 0.0, E_OVERFLOW, ROOT_WIDTH)?;
        Ok(self.xi1_from_x(x))
    }

    /// `h1_inv`, with arguments beyond its range sent to the matching end of the domain.
    fn h1_inv_or_edge(&self, xi2: f64) -> f64 {
        match self.h1_inv(xi2) {
            Ok(v) => v,
            Err(_) => {
                let (lo, hi) = self.h1_domain();
                if xi2 > 0.0 {
                    hi
                } else {
                    lo
                }
            }
        }
    }

    /// Crossing of `h1` and `h2`.
    pub fn unconstrained_fixed_point(&self) -> Result<(f64, f64)> {
        let gap = |x: f64| {
            let xi1 = self.xi1_from_x(x);
            self.h1_from_x(x, xi1) - self.h2(xi1)
        };
        let x = bisect(gap, 0.0, E_OVERFLOW, ROOT_WIDTH)
            .map_err(|e| Error::Internal(format!("reaction curves do not cross: {e}")))?;
        let xi1 = self.xi1_from_x(x);
        Ok((xi1, self.h2(xi1)))
    }

    /// Equilibrium on the admissible box.
    pub fn constrained(&self, params: &MarketParams) -> Result<EquilibriumResult> {
        let (u1, u2) = self.unconstrained_fixed_point()?;
        let (lo1, hi1) = self.bounds.xi1;
        let (lo2, hi2) = self.bounds.xi2;
        let (xi2, regime) = if u1 < lo1 {
            let s = self.h2(lo1);
            let regime = if s < lo2 {
                Regime::LowerLeft
            } else if s > hi2 {
                Regime::OtherBoundary
            } else {
                Regime::Xi1FloorOnly
            };
            (clamp(s, lo2, hi2), regime)
        } else if u1 > hi1 {
            let s = self.h2(hi1);
            let regime = if s >= hi2 {
                Regime::UpperRight
            } else {
                Regime::OtherBoundary
            };
            (clamp(s, lo2, hi2), regime)
        } else {
            let regime = if u2 > hi2 {
                Regime::Xi2CapOnly
            } else if u2 < lo2 {
                Regime::OtherBoundary
            } else {
                Regime::Interior
            };
            (clamp(u2, lo2, hi2), regime)
        };
        let xi1 = clamp(self.h1_inv_or_edge(xi2), lo1, hi1);
        let (xi1, xi2) = if regime == Regime::Interior {
            (u1, u2)
        } else {
            (xi1, xi2)
        };
        let best_response_gap = (xi1 - clamp(self.h1_inv_or_edge(xi2), lo1, hi1))
            .abs()
            .max((xi2 - clamp(self.h2(xi1), lo2, hi2)).abs());
        let point = PremiumPoint::new(xi1, xi2, self.t);
        Ok(EquilibriumResult {
            xi1,
            xi2,
            t: self.t,
            response: response(&point, params)?,
            regime,
            unconstrained: (u1, u2),
            best_response_gap,
        })
    }
}

/// `(ξ̄1, ξ̄2)` at time `t`.
pub fn unconstrained_fixed_point(params: &MarketParams, t: f64) -> Result<(f64, f64)> {
    ExpoGame::at(params, t)?.unconstrained_fixed_point()
}

/// Box-constrained equilibrium loadings at time `t`.
pub fn constrained_equilibrium(params: &MarketParams, t: f64) -> Result<EquilibriumResult> {
    ExpoGame::at(params, t)?.constrained(params)
}

/// A change of regime along the claim rate `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeChange {
    pub beta: f64,
    pub below: Regime,
    pub above: Regime,
}

/// Locate regime changes for `β` in `[lo, hi]`: scan `scan` equal steps in
/// `ln β`, then bisect each change to a relative width of 1e-12.
pub fn regime_changes_in_beta(
    params: &MarketParams,
    t: f64,
    lo: f64,
    hi: f64,
    scan: usize,
) -> Result<Vec<RegimeChange>> {
    if !(lo > 0.0 && hi > lo && scan >= 1) {
        return Err(Error::Domain(format!(
            "need 0 < lo < hi and scan >= 1, got [{lo}, {hi}], {scan}"
        )));
    }
    let regime_at = |beta: f64| -> Result<Regime> {
        let p = params.with_claims(crate::market::ClaimDistribution::exponential(beta)?);
        Ok(constrained_equilibrium(&p, t)?.regime)
    };
    let ratio = (hi / lo).ln() / scan as f64;
    let mut changes = Vec::new();
    let mut prev_beta = lo;
    let mut prev = regime_at(lo)?;
    for i in 1..=scan {
        let beta = if i == scan {
            hi
        } else {
            lo * (ratio * i as f64).exp()
        };
        let here = regime_at(beta)?;
        if here != prev {
            let (mut a, mut b) = (prev_beta, beta);
            while b - a > 1e-12 * b {
                let m = 0.5 * (a + b);
                if regime_at(m)? == prev {
                    a = m;
                } else {
                    b = m;
                }
            }
            changes.push(RegimeChange {
                beta: 0.5 * (a + b),
                below: prev,
                above: regime_at(b)?,
            });
        }
        prev = here;
        prev_beta = beta;
    }
    Ok(changes)
}
