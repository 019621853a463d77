//! The insurer's equilibrium response to a pair of reinsurance loadings.
//!
//! Given `(ξ1, ξ2)` the insurer cedes a proportion `q` of every claim up to
//! the deductible `d` to reinsurer 1, capped at `ξ2 / (2ξ1)`, and the excess
//! `(y - d)⁺` to reinsurer 2. Its own retention never exceeds
//! `ξ2 / (γ_I A_I)`.

use crate::error::{Error, Result};
use crate::market::{ClaimDistribution, MarketParams, Party, PremiumPoint};
use crate::reaction::truncated_moments;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseStrategy {
    /// Proportion of small claims ceded to reinsurer 1.
    pub q: f64,
    /// Deductible of the excess-of-loss layer.
    pub d: f64,
    /// Amount ceded to reinsurer 1 on claims above `d`.
    pub cap: f64,
    /// Insurer's retention on claims above `d`.
    pub retention_limit: f64,
    pub t: f64,
}

/// Split of one claim among the three parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indemnity {
    pub ceded_r1: f64,
    pub ceded_r2: f64,
    pub retained: f64,
}

/// First two moments of each party's share of a single claim.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IndemnityMoments {
    pub l1_mean: f64,
    pub l1_sq: f64,
    pub l2_mean: f64,
    pub l2_sq: f64,
    pub retained_mean: f64,
    pub retained_sq: f64,
}

impl ResponseStrategy {
    /// The empty contract: everything retained.
    pub fn none(t: f64) -> Self {
        Self {
            q: 0.0,
            d: f64::INFINITY,
            cap: 0.0,
            retention_limit: f64::INFINITY,
            t,
        }
    }

    pub fn indemnity(&self, y: f64) -> Result<Indemnity> {
        indemnity(y, self)
    }

    /// Moments of `(l1, l2, retained)` under the claim law.
    pub fn moments(&self, dist: &ClaimDistribution) -> Result<IndemnityMoments> {
        let tm = truncated_moments(dist, self.d)?;
        // Terms carrying S(d) vanish when the layer above d is never reached.
        let above = |a: f64| {
            if tm.survival > 0.0 {
                a * tm.survival
            } else {
                0.0
            }
        };
        let keep = 1.0 - self.q;
        Ok(IndemnityMoments {
            l1_mean: self.q * tm.m1_below + above(self.cap),
            l1_sq: self.q * self.q * tm.m2_below + above(self.cap * self.cap),
            l2_mean: tm.excess_mean,
            l2_sq: tm.excess_sq,
            retained_mean: keep * tm.m1_below + above(self.retention_limit),
            retained_sq: keep * keep * tm.m2_below
                + above(self.retention_limit * self.retention_limit),
        })
    }
}

/// The insurer's best response to `point`.
pub fn response(point: &PremiumPoint, params: &MarketParams) -> Result<ResponseStrategy> {
    let PremiumPoint { xi1, xi2, t } = *point;
    if !(xi1 > 0.0 && xi1.is_finite()) {
        return Err(Error::DegeneratePremium { xi1 });
    }
    if !(xi2 >= 0.0 && xi2.is_finite()) {
        return Err(Error::Domain(format!("xi2 must be nonnegative, got {xi2}")));
    }
    let k = params.risk_aversion.insurer * params.accumulation(Party::Insurer, t)?;
    let cap = xi2 / (2.0 * xi1);
    let retention_limit = xi2 / k;
    Ok(ResponseStrategy {
        q: k / (2.0 * xi1 + k),
        d: retention_limit + cap,
        cap,
        retention_limit,
        t,
    })
}

/// Split claim `y` according to `response`. Claims equal to `d` fall in the lower branch.
pub fn indemnity(y: f64, response: &ResponseStrategy) -> Result<Indemnity> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!(
            "claim size must be nonnegative, got {y}"
        )));
    }
    let (ceded_r1, ceded_r2) = if y <= response.d {
        (response.q * y, 0.0)
    } else {
        (response.cap, y - response.d)
    };
    Ok(Indemnity {
        ceded_r1,
        ceded_r2,
        retained: y - ceded_r1 - ceded_r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{GenericClaims, RateCurve};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn base_response() -> ResponseStrategy {
        let p = MarketParams::baseline();
        response(&PremiumPoint::new(0.28269, 0.38225, 0.0), &p).unwrap()
    }

    #[test]
    fn baseline_layers() {
        let r = base_response();
        assert_abs_diff_eq!(r.q, 0.2825, epsilon = 5e-5);
        assert_abs_diff_eq!(r.d, 2.3936, epsilon = 5e-4);
        assert_abs_diff_eq!(r.cap, 0.6761, epsilon = 5e-4);
        assert_abs_diff_eq!(r.retention_limit, 1.7175, epsilon = 5e-4);
        let p = MarketParams::baseline();
        let exact = response(
            &PremiumPoint::new(0.2826915284046374, 0.3822474305412875, 0.0),
            &p,
        )
        .unwrap();
        assert_abs_diff_eq!(exact.q, 0.282451579984137, epsilon = 1e-12);
        assert_abs_diff_eq!(exact.d, 2.3936341745103316, epsilon = 1e-12);
        assert_abs_diff_eq!(exact.cap, 0.6760857544944686, epsilon = 1e-12);
        assert_abs_diff_eq!(exact.retention_limit, 1.717548420015863, epsilon = 1e-12);
        assert_abs_diff_eq!(r.d, r.cap + r.retention_limit, epsilon = 1e-15);
    }

    #[test]
    fn zero_excess_loading_gives_pure_proportional() {
        let p = MarketParams::baseline();
        let r = response(&PremiumPoint::new(0.4, 0.0, 0.0), &p).unwrap();
        assert_eq!(r.d, 0.0);
        assert_eq!(r.cap, 0.0);
    }

    #[test]
    fn terminal_time_arithmetic() {
        let mut p = MarketParams::baseline();
        p.risk_aversion.insurer = 0.1;
        let r = response(&PremiumPoint::new(0.45, 0.2, 8.0), &p).unwrap();
        assert_abs_diff_eq!(r.q, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.d, 0.2 / 0.1 + 0.2 / 0.9, epsilon = 1e-14);
        assert_abs_diff_eq!(r.d, 2.2222, epsilon = 1e-4);
    }

    #[test]
    fn degenerate_premium_is_an_error() {
        let p = MarketParams::baseline();
        let err = response(&PremiumPoint::new(0.0, 0.3, 0.0), &p).unwrap_err();
        assert_eq!(err, Error::DegeneratePremium { xi1: 0.0 });
        assert!(response(&PremiumPoint::new(0.3, -0.1, 0.0), &p).is_err());
    }

    #[test]
    fn indemnity_examples() {
        let r = base_response();
        let small = indemnity(1.0, &r).unwrap();
        assert_abs_diff_eq!(small.ceded_r1, 0.2825, epsilon = 1e-4);
        assert_eq!(small.ceded_r2, 0.0);
        assert_abs_diff_eq!(small.retained, 0.7175, epsilon = 1e-4);

        let large = indemnity(3.0, &r).unwrap();
        assert_abs_diff_eq!(large.ceded_r1, 0.6761, epsilon = 1e-4);
        assert_abs_diff_eq!(large.ceded_r2, 3.0 - r.d, epsilon = 1e-15);
        assert_abs_diff_eq!(large.ceded_r2, 0.6064, epsilon = 1e-4);
        assert_abs_diff_eq!(large.retained, 1.7175, epsilon = 1e-4);

        let zero = indemnity(0.0, &r).unwrap();
        assert_eq!(
            (zero.ceded_r1, zero.ceded_r2, zero.retained),
            (0.0, 0.0, 0.0)
        );
        assert!(indemnity(-1.0, &r).is_err());
    }

    #[test]
    fn insurer_first_order_conditions_hold_above_deductible() {
        let p = MarketParams::baseline();
        let (xi1, xi2) = (0.28269, 0.38225);
        let r = response(&PremiumPoint::new(xi1, xi2, 0.0), &p).unwrap();
        let k = 0.1 * 0.8f64.exp();
        for y in [2.5, 3.0, 7.0] {
            let s = indemnity(y, &r).unwrap();
            assert_abs_diff_eq!(
                -2.0 * xi1 * s.ceded_r1 + k * s.retained,
                0.0,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(-xi2 + k * s.retained, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn no_reinsurance_moments() {
        let p = MarketParams::baseline();
        let m = ResponseStrategy::none(0.0).moments(&p.claims).unwrap();
        assert_eq!(
            (m.l1_mean, m.l1_sq, m.l2_mean, m.l2_sq),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_abs_diff_eq!(m.retained_mean, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.retained_sq, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn moments_match_quadrature_for_uniform_claims() {
        let mut p = MarketParams::baseline();
        p.claims =
            crate::market::ClaimDistribution::Generic(GenericClaims::uniform(0.0, 2.0).unwrap());
        p.rates = crate::market::PerParty::new(
            RateCurve::constant(0.1, 8.0).unwrap(),
            RateCurve::constant(0.1, 8.0).unwrap(),
            RateCurve::constant(0.1, 8.0).unwrap(),
        );
        let r = response(&PremiumPoint::new(0.3, 0.2, 0.0), &p).unwrap();
        let m = r.moments(&p.claims).unwrap();
        // midpoint-rule oracle on the density 1/2
        let n = 200_000;
        let h = 2.0 / n as f64;
        let (mut l1, mut l1s, mut l2, mut l2s, mut re, mut res) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let y = (i as f64 + 0.5) * h;
            let s = indemnity(y, &r).unwrap();
            let w = 0.5 * h;
            l1 += w * s.ceded_r1;
            l1s += w * s.ceded_r1 * s.ceded_r1;
            l2 += w * s.ceded_r2;
            l2s += w * s.ceded_r2 * s.ceded_r2;
            re += w * s.retained;
            res += w * s.retained * s.retained;
        }
        for (a, b) in [
            (m.l1_mean, l1),
            (m.l1_sq, l1s),
            (m.l2_mean, l2),
            (m.l2_sq, l2s),
            (m.retained_mean, re),
            (m.retained_sq, res),
        ] {
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    proptest! {
        #[test]
        fn mass_balance_and_bounds(
            xi1 in 0.01f64..2.0,
            xi2 in 0.0f64..2.0,
            t in 0.0f64..8.0,
            y in 0.0f64..20.0,
        ) {
            let p = MarketParams::baseline();
            let r = response(&PremiumPoint::new(xi1, xi2, t), &p).unwrap();
            let s = indemnity(y, &r).unwrap();
            prop_assert!(s.ceded_r1 >= 0.0 && s.ceded_r2 >= 0.0);
            prop_assert!(s.ceded_r1 + s.ceded_r2 <= y * (1.0 + 1e-15) + 1e-15);
            prop_assert!((s.ceded_r1 + s.ceded_r2 + s.retained - y).abs() <= 1e-12 * y.max(1.0));
            prop_assert!(r.q > 0.0 && r.q < 1.0);
        }

        #[test]
        fn indemnity_continuous_at_deductible(
            xi1 in 0.01f64..2.0,
            xi2 in 0.01f64..2.0,
            t in 0.0f64..8.0,
        ) {
            let p = MarketParams::baseline();
            let r = response(&PremiumPoint::new(xi1, xi2, t), &p).unwrap();
            // q·d = cap and (1 - q)·d = retention_limit
            prop_assert!((r.q * r.d - r.cap).abs() < 1e-12 * r.d.max(1.0));
            prop_assert!(((1.0 - r.q) * r.d - r.retention_limit).abs() < 1e-12 * r.d.max(1.0));
            let left = indemnity(r.d, &r).unwrap();
            let right = indemnity(r.d * (1.0 + 1e-15) + 1e-300, &r).unwrap();
            prop_assert!((left.ceded_r1 - right.ceded_r1).abs() < 1e-12);
            prop_assert!((left.ceded_r2 - right.ceded_r2).abs() < 1e-12);
            prop_assert!((left.retained - right.retained).abs() < 1e-12);
        }

        #[test]
        fn comparative_statics(
            xi1 in 0.05f64..1.5,
            xi2 in 0.05f64..1.5,
            gamma in 0.02f64..0.5,
        ) {
            let mut p = MarketParams::baseline();
            p.risk_aversion.insurer = gamma;
            let h = 1e-6;
            let at = |p: &MarketParams, a: f64, b: f64| response(&PremiumPoint::new(a, b, 0.0), p).unwrap();
            let base = at(&p, xi1, xi2);
            prop_assert!(at(&p, xi1 + h, xi2).q < base.q);
            prop_assert!(at(&p, xi1, xi2 + h).d > base.d);
            prop_assert!(at(&p, xi1 + h, xi2).d < base.d);
            let mut pg = p.clone();
            pg.risk_aversion.insurer = gamma + h;
            prop_assert!(at(&pg, xi1, xi2).q > base.q);
        }
    }
}
