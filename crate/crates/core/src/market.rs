//! Exogenous market data: horizon, interest-rate curves, claim law, safety
//! loadings, risk aversions and the admissibility box for premium strategies.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, bisect};
use crate::response::ResponseStrategy;

/// Tail mass below which a generic claim law is truncated for quadrature.
pub const TAIL_MASS: f64 = 1e-12;
/// Absolute tolerance for quadrature against a generic claim law.
pub const QUAD_TOL: f64 = 1e-10;

const QUANTILE_NODES: usize = 4096;

/// The three market participants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Insurer,
    Reinsurer1,
    Reinsurer2,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::Insurer, Party::Reinsurer1, Party::Reinsurer2];

    pub fn label(self) -> &'static str {
        match self {
            Party::Insurer => "I",
            Party::Reinsurer1 => "R1",
            Party::Reinsurer2 => "R2",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One value per participant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerParty<T> {
    pub insurer: T,
    pub reinsurer1: T,
    pub reinsurer2: T,
}

impl<T> PerParty<T> {
    pub fn new(insurer: T, reinsurer1: T, reinsurer2: T) -> Self {
        Self {
            insurer,
            reinsurer1,
            reinsurer2,
        }
    }

    pub fn map<U, F: FnMut(Party, &T) -> U>(&self, mut f: F) -> PerParty<U> {
        PerParty {
            insurer: f(Party::Insurer, &self.insurer),
            reinsurer1: f(Party::Reinsurer1, &self.reinsurer1),
            reinsurer2: f(Party::Reinsurer2, &self.reinsurer2),
        }
    }

    pub fn try_map<U, F: FnMut(Party, &T) -> Result<U>>(&self, mut f: F) -> Result<PerParty<U>> {
        Ok(PerParty {
            insurer: f(Party::Insurer, &self.insurer)?,
            reinsurer1: f(Party::Reinsurer1, &self.reinsurer1)?,
            reinsurer2: f(Party::Reinsurer2, &self.reinsurer2)?,
        })
    }
}

impl<T> Index<Party> for PerParty<T> {
    type Output = T;
    fn index(&self, p: Party) -> &T {
        match p {
            Party::Insurer => &self.insurer,
            Party::Reinsurer1 => &self.reinsurer1,
            Party::Reinsurer2 => &self.reinsurer2,
        }
    }
}

impl<T> IndexMut<Party> for PerParty<T> {
    fn index_mut(&mut self, p: Party) -> &mut T {
        match p {
            Party::Insurer => &mut self.insurer,
            Party::Reinsurer1 => &mut self.reinsurer1,
            Party::Reinsurer2 => &mut self.reinsurer2,
        }
    }
}

/// Piecewise-constant deterministic interest-rate curve on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    /// `(start, rate)` pairs; segment `i` covers `[start_i, start_{i+1})`.
    segments: Vec<(f64, f64)>,
    horizon: f64,
}

impl RateCurve {
    pub fn constant(rate: f64, horizon: f64) -> Result<Self> {
        Self::piecewise(vec![(0.0, rate)], horizon)
    }

    pub fn piecewise(segments: Vec<(f64, f64)>, horizon: f64) -> Result<Self> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "rate curve",
            reason,
        };
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(bad(format!("horizon must be positive, got {horizon}")));
        }
        match segments.first() {
            None => return Err(bad("no segments".into())),
            Some(&(s, _)) if s != 0.0 => {
                return Err(bad(format!("first segment must start at 0, got {s}")))
            }
            _ => {}
        }
        for w in segments.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(bad(format!(
                    "segment starts not increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(s, r) in &segments {
            if s >= horizon {
                return Err(bad(format!(
                    "segment start {s} not below horizon {horizon}"
                )));
            }
            if !(r.is_finite() && r >= 0.0) {
                return Err(bad(format!("rate must be finite and nonnegative, got {r}")));
            }
        }
        Ok(Self { segments, horizon })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    /// Rate in force at time `t` (right-continuous).
    pub fn rate_at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|&(s, _)| s <= t);
        self.segments[idx.saturating_sub(1)].1
    }

    /// Exact `∫_a^b ρ(s) ds` for `a ≤ b`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for (i, &(start, rate)) in self.segments.iter().enumerate() {
            let end = self.segments.get(i + 1).map_or(self.horizon, |s| s.0);
            let lo = a.max(start);
            let hi = b.min(end);
            if hi > lo {
                total += rate * (hi - lo);
            }
        }
        total
    }

    /// Accumulation factor `exp(∫_t^T ρ(s) ds)`.
    pub fn accumulation(&self, t: f64, maturity: f64) -> Result<f64> {
        let slack = 1e-12 * self.horizon.max(1.0);
        if !(t.is_finite() && maturity.is_finite())
            || t < -slack
            || maturity > self.horizon + slack
            || t > maturity + slack
        {
            return Err(Error::Domain(format!(
                "accumulation needs 0 <= t <= T <= {}, got t = {t}, T = {maturity}",
                self.horizon
            )));
        }
        let a = t.clamp(0.0, self.horizon);
        let b = maturity.clamp(a, self.horizon);
        Ok(self.integral(a, b).exp())
    }
}

/// `exp(∫_t^T ρ(s) ds)` for a rate curve.
pub fn accumulation(curve: &RateCurve, t: f64, maturity: f64) -> Result<f64> {
    curve.accumulation(t, maturity)
}

/// A claim-size law supplied only through its CDF.
///
/// Moments and truncated moments are obtained from the survival function by
/// integration by parts, so no density is needed.
#[derive(Clone)]
pub struct GenericClaims {
    label: String,
    cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    upper: f64,
    mean: f64,
    second_moment: f64,
    quantiles: Arc<OnceLock<Vec<f64>>>,
}

impl GenericClaims {
    pub fn new<F>(label: impl Into<String>, cdf: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let f0 = cdf(0.0);
        if !(0.0..=TAIL_MASS).contains(&f0) {
            return Err(Error::InvalidParameter {
                name: "claims",
                reason: format!("{label}: support must lie in (0, inf), F(0) = {f0}"),
            });
        }
        let mut upper = 1.0_f64;
        while 1.0 - cdf(upper) >= TAIL_MASS {
            upper *= 2.0;
            if upper > 1e12 {
                return Err(Error::InvalidParameter {
                    name: "claims",
                    reason: format!("{label}: tail too heavy to truncate at mass {TAIL_MASS}"),
                });
            }
        }
        let survival = |y: f64| (1.0 - cdf(y)).max(0.0);
        let mean = adaptive_simpson(survival, 0.0, upper, QUAD_TOL)?;
        let second_moment = adaptive_simpson(|y| 2.0 * y * survival(y), 0.0, upper, QUAD_TOL)?;
        if !(mean > 0.0 && second_moment > 0.0) {
            return Err(Error::InvalidParameter {
                name: "claims",
                reason: format!("{label}: degenerate moments ({mean}, {second_moment})"),
            });
        }
        Ok(Self {
            label,
            cdf: Arc::new(cdf),
            upper,
            mean,
            second_moment,
            quantiles: Arc::new(OnceLock::new()),
        })
    }

    /// Uniform law on `(lo, hi)` with `0 <= lo < hi`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "claims",
                reason: format!("uniform needs 0 <= lo < hi, got ({lo}, {hi})"),
            });
        }
        Self::new(format!("uniform({lo}, {hi})"), move |y| {
            ((y - lo) / (hi - lo)).clamp(0.0, 1.0)
        })
    }

    /// Erlang law with integer shape `k` and rate `rate`.
    pub fn erlang(k: u32, rate: f64) -> Result<Self> {
        if k == 0 || !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "claims",
                reason: format!("erlang needs k >= 1 and rate > 0, got ({k}, {rate})"),
            });
        }
        Self::new(format!("erlang({k}, {rate})"), move |y| {
            if y <= 0.0 {
                return 0.0;
            }
            let x = rate * y;
            let mut term = 1.0;
            let mut sum = 1.0;
            for n in 1..k {
                term *= x / n as f64;
                sum += term;
            }
            (1.0 - (-x).exp() * sum).clamp(0.0, 1.0)
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            (self.cdf)(y).clamp(0.0, 1.0)
        }
    }

    /// Truncation point used for quadrature; the tail beyond it has mass below [`TAIL_MASS`].
    pub fn upper(&self) -> f64 {
        self.upper
    }

    fn quantile_table(&self) -> &[f64] {
        self.quantiles.get_or_init(|| {
            let mut nodes = Vec::with_capacity(QUANTILE_NODES + 1);
            nodes.push(0.0);
            let mut lo = 0.0;
            for j in 1..QUANTILE_NODES {
                let u = j as f64 / QUANTILE_NODES as f64;
                let y = bisect(
                    |y| self.cdf(y) - u,
                    lo,
                    self.upper,
                    1e-12 * self.upper.max(1.0),
                )
                .unwrap_or(lo);
                nodes.push(y);
                lo = y;
            }
            nodes.push(self.upper);
            nodes
        })
    }

    /// Inverse CDF by monotone piecewise-linear interpolation of a cached table.
    pub fn quantile(&self, u: f64) -> f64 {
        let table = self.quantile_table();
        let pos = u.clamp(0.0, 1.0) * QUANTILE_NODES as f64;
        let j = (pos.floor() as usize).min(QUANTILE_NODES - 1);
        let frac = pos - j as f64;
        table[j] + frac * (table[j + 1] - table[j])
    }
}

impl fmt::Debug for GenericClaims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericClaims")
            .field("label", &self.label)
            .field("mean", &self.mean)
            .field("second_moment", &self.second_moment)
            .field("upper", &self.upper)
            .finish()
    }
}

/// Claim-size law.
#[derive(Debug, Clone)]
pub enum ClaimDistribution {
    Exponential { rate: f64 },
    Generic(GenericClaims),
}

impl ClaimDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("exponential rate must be positive, got {rate}"),
            });
        }
        Ok(Self::Exponential { rate })
    }

    /// Rate `β` when the law is exponential.
    pub fn exponential_rate(&self) -> Option<f64> {
        match self {
            Self::Exponential { rate } => Some(*rate),
            Self::Generic(_) => None,
        }
    }

    /// `2 a_Y / σ_Y²`, equal to `β` for the exponential law.
    pub fn effective_rate(&self) -> f64 {
        2.0 * self.mean() / self.second_moment()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            Self::Exponential { rate } => {
                if y <= 0.0 {
                    0.0
                } else {
                    -(-rate * y).exp_m1()
                }
            }
            Self::Generic(g) => g.cdf(y),
        }
    }

    pub fn survival(&self, y: f64) -> f64 {
        match self {
            Self::Exponential { rate } => {
                if y <= 0.0 {
                    1.0
                } else {
                    (-rate * y).exp()
                }
            }
            Self::Generic(g) => 1.0 - g.cdf(y),
        }
    }

    /// `a_Y = E[Y]`.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Generic(g) => g.mean,
        }
    }

    /// `σ_Y² = E[Y²]` (second raw moment).
    pub fn second_moment(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 2.0 / (rate * rate),
            Self::Generic(g) => g.second_moment,
        }
    }

    /// Inverse CDF at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Generic(g) => g.quantile(u),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Exponential { rate } => format!("exponential({rate})"),
            Self::Generic(g) => g.label.clone(),
        }
    }
}

/// `(a_Y, σ_Y²)` with `σ_Y²` the second raw moment.
pub fn claim_moments(dist: &ClaimDistribution) -> Result<(f64, f64)> {
    let (a, s) = (dist.mean(), dist.second_moment());
    if a.is_finite() && s.is_finite() {
        Ok((a, s))
    } else {
        Err(Error::Integration {
            a: 0.0,
            b: f64::INFINITY,
        })
    }
}

/// Which bound applies to the mean-variance loading `ξ1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundConvention {
    /// `ξ1 ∈ [θβ, ηβ]`; used by the exponential-claim equilibrium.
    #[default]
    Section4,
    /// `ξ1 ∈ [θ a_Y/σ_Y², η a_Y/σ_Y²]`.
    Definition21,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleBox {
    pub xi1: (f64, f64),
    pub xi2: (f64, f64),
}

impl AdmissibleBox {
    pub fn contains(&self, xi1: f64, xi2: f64) -> bool {
        (self.xi1.0..=self.xi1.1).contains(&xi1) && (self.xi2.0..=self.xi2.1).contains(&xi2)
    }

    pub fn clamp_xi1(&self, xi1: f64) -> f64 {
        crate::numeric::clamp(xi1, self.xi1.0, self.xi1.1)
    }

    pub fn clamp_xi2(&self, xi2: f64) -> f64 {
        crate::numeric::clamp(xi2, self.xi2.0, self.xi2.1)
    }
}

/// The reinsurers' safety loadings at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremiumPoint {
    /// Mean-variance loading; multiplies the second moment of the ceded layer.
    pub xi1: f64,
    /// Expected-value loading.
    pub xi2: f64,
    pub t: f64,
}

impl PremiumPoint {
    pub fn new(xi1: f64, xi2: f64, t: f64) -> Self {
        Self { xi1, xi2, t }
    }
}

/// All exogenous constants of the market.
#[derive(Debug, Clone)]
pub struct MarketParams {
    pub horizon: f64,
    /// Poisson claim intensity `λ`.
    pub intensity: f64,
    /// Insurer's own expected-value loading `θ`.
    pub insurer_loading: f64,
    /// Upper loading bound `η`.
    pub loading_cap: f64,
    pub risk_aversion: PerParty<f64>,
    pub rates: PerParty<RateCurve>,
    pub claims: ClaimDistribution,
    pub initial_surplus: PerParty<f64>,
    pub bounds: BoundConvention,
}

impl MarketParams {
    /// The reference parameter set: `T = 8`, `θ = 0.1`, `η = 0.9`, `λ = 1`,
    /// `β = 1`, all rates `0.1`, all risk aversions `0.1`, surpluses `(1, 10, 10)`.
    pub fn baseline() -> Self {
        let horizon = 8.0;
        let rate = RateCurve::constant(0.1, horizon).expect("valid constant curve");
        Self {
            horizon,
            intensity: 1.0,
            insurer_loading: 0.1,
            loading_cap: 0.9,
            risk_aversion: PerParty::new(0.1, 0.1, 0.1),
            rates: PerParty::new(rate.clone(), rate.clone(), rate),
            claims: ClaimDistribution::Exponential { rate: 1.0 },
            initial_surplus: PerParty::new(1.0, 10.0, 10.0),
            bounds: BoundConvention::Section4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad =
            |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("T", format!("must be positive, got {}", self.horizon));
        }
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return bad(
                "lambda",
                format!("must be nonnegative, got {}", self.intensity),
            );
        }
        if !(self.insurer_loading > 0.0 && self.insurer_loading < self.loading_cap) {
            return bad(
                "theta",
                format!(
                    "need 0 < theta < eta, got theta = {}, eta = {}",
                    self.insurer_loading, self.loading_cap
                ),
            );
        }
        if !self.loading_cap.is_finite() {
            return bad("eta", "must be finite".into());
        }
        let names = ["gamma_I", "gamma_R1", "gamma_R2"];
        for (p, name) in Party::ALL.into_iter().zip(names) {
            let g = self.risk_aversion[p];
            if !(g.is_finite() && g > 0.0) {
                return bad(name, format!("risk aversion must be positive, got {g}"));
            }
        }
        let names = ["rho_I", "rho_R1", "rho_R2"];
        for (p, name) in Party::ALL.into_iter().zip(names) {
            let h = self.rates[p].horizon();
            if (h - self.horizon).abs() > 1e-12 * self.horizon {
                return bad(
                    name,
                    format!("curve horizon {h} differs from T = {}", self.horizon),
                );
            }
        }
        for p in Party::ALL {
            if !self.initial_surplus[p].is_finite() {
                return bad("x0", format!("initial surplus of {p} is not finite"));
            }
        }
        claim_moments(&self.claims)?;
        Ok(())
    }

    /// `A_k(t) = exp(∫_t^T ρ_k(s) ds)`.
    pub fn accumulation(&self, party: Party, t: f64) -> Result<f64> {
        self.rates[party].accumulation(t, self.horizon)
    }

    /// Insurer's premium income rate `c = (1 + θ) λ a_Y`.
    pub fn insurer_premium_rate(&self) -> f64 {
        (1.0 + self.insurer_loading) * self.intensity * self.claims.mean()
    }

    pub fn with_claims(&self, claims: ClaimDistribution) -> Self {
        Self {
            claims,
            ..self.clone()
        }
    }
}

/// Admissible ranges `(ξ1_range, ξ2_range)` under the configured convention.
pub fn admissible_box(params: &MarketParams) -> AdmissibleBox {
    let (theta, eta) = (params.insurer_loading, params.loading_cap);
    let scale = match params.bounds {
        BoundConvention::Section4 => params.claims.effective_rate(),
        BoundConvention::Definition21 => params.claims.mean() / params.claims.second_moment(),
    };
    AdmissibleBox {
        xi1: (theta * scale, eta * scale),
        xi2: (theta, eta),
    }
}

/// Instantaneous premium rates `(p1, p2)` charged for the layers of `response`.
///
/// `p1 = λ (E l1 + ξ1 E l1²)` and `p2 = (1 + ξ2) λ E l2`.
pub fn premium_rates(
    point: &PremiumPoint,
    response: &ResponseStrategy,
    params: &MarketParams,
) -> Result<(f64, f64)> {
    let m = response.moments(&params.claims)?;
    let lambda = params.intensity;
    let p1 = lambda * (m.l1_mean + point.xi1 * m.l1_sq);
    let p2 = (1.0 + point.xi2) * lambda * m.l2_mean;
    Ok((p1, p2))
}
