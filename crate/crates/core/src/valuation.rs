//! Mean-variance objectives under deterministic strategies and the
//! equilibrium value intercepts `B_k(t)` in `V_k(t, x) = A_k(t) x + B_k(t)`.
//!
//! With `A_k(s) = exp(∫_s^T ρ_k)` the terminal surplus is
//! `A_k(t) x + ∫_t^T A_k(s) (premium flow) ds - Σ A_k(T_i) (jump at T_i)`,
//! so the mean and variance follow from the compound-Poisson isometry.

use crate::error::{Error, Result};
use crate::market::{MarketParams, Party, PerParty};
use crate::numeric::composite_simpson;
use crate::strategy::{InstantState, PremiumPath};

/// Panels for time quadrature over `[t, T]`.
pub const TIME_PANELS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub party: Party,
    pub mean: f64,
    pub variance: f64,
    /// `mean - (γ/2) variance`
    pub objective: f64,
}

/// Expected net drift and claim variance rate of `party` at one instant.
pub(crate) fn drift_and_variance_rate(
    party: Party,
    state: &InstantState,
    params: &MarketParams,
) -> (f64, f64) {
    let lambda = params.intensity;
    let m = &state.moments;
    match party {
        Party::Insurer => (
            params.insurer_premium_rate() - state.p1 - state.p2 - lambda * m.retained_mean,
            lambda * m.retained_sq,
        ),
        Party::Reinsurer1 => (state.p1 - lambda * m.l1_mean, lambda * m.l1_sq),
        Party::Reinsurer2 => (state.p2 - lambda * m.l2_mean, lambda * m.l2_sq),
    }
}

fn check_time(params: &MarketParams, t: f64) -> Result<()> {
    if !(0.0..=params.horizon).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, {}]",
            params.horizon
        )));
    }
    Ok(())
}

/// Closed-form objectives of all three parties from `(t, x)` under `path`.
pub fn closed_form_objectives(
    path: &PremiumPath,
    params: &MarketParams,
    t: f64,
    x: PerParty<f64>,
) -> Result<PerParty<ObjectiveValue>> {
    check_time(params, t)?;
    let n = TIME_PANELS;
    let h = (params.horizon - t) / n as f64;
    let nodes: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                params.horizon
            } else {
                t + h * i as f64
            }
        })
        .collect();
    let states: Vec<InstantState> = nodes
        .iter()
        .map(|&s| InstantState::at(path, params, s))
        .collect::<Result<_>>()?;
    params.risk_aversion.try_map(|party, &gamma| {
        let mut drift = Vec::with_capacity(n + 1);
        let mut var = Vec::with_capacity(n + 1);
        for (s, st) in nodes.iter().zip(&states) {
            let a = params.accumulation(party, *s)?;
            let (mu, v) = drift_and_variance_rate(party, st, params);
            drift.push(a * mu);
            var.push(a * a * v);
        }
        let mean = params.accumulation(party, t)? * x[party] + simpson_nodes(&drift, h);
        let variance = simpson_nodes(&var, h).max(0.0);
        Ok(ObjectiveValue {
            party,
            mean,
            variance,
            objective: mean - 0.5 * gamma * variance,
        })
    })
}

/// Closed-form objective of one party from `(t, x)` under `path`.
pub fn closed_form_objective(
    party: Party,
    path: &PremiumPath,
    params: &MarketParams,
    t: f64,
    x: f64,
) -> Result<ObjectiveValue> {
    check_time(params, t)?;
    let gamma = params.risk_aversion[party];
    let integrand = |which: usize| {
        move |s: f64| -> f64 {
            let value = (|| {
                let st = InstantState::at(path, params, s)?;
                let a = params.accumulation(party, s)?;
                let (mu, v) = drift_and_variance_rate(party, &st, params);
                Ok::<f64, Error>(if which == 0 { a * mu } else { a * a * v })
            })();
            value.unwrap_or(f64::NAN)
        }
    };
    let mean = params.accumulation(party, t)? * x
        + composite_simpson(integrand(0), t, params.horizon, TIME_PANELS);
    let variance = composite_simpson(integrand(1), t, params.horizon, TIME_PANELS);
    if !(mean.is_finite() && variance.is_finite()) {
        return Err(Error::Integration {
            a: t,
            b: params.horizon,
        });
    }
    let variance = variance.max(0.0);
    Ok(ObjectiveValue {
        party,
        mean,
        variance,
        objective: mean - 0.5 * gamma * variance,
    })
}

/// Composite Simpson over equally spaced samples (even panel count).
fn simpson_nodes(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let mut sum = f[0] + f[n];
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    sum * h / 3.0
}

/// `B_k` on a time grid; `V_k(t, x) = A_k(t) x + B_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueIntercept {
    pub party: Party,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ValueIntercept {
    /// `B_k(t)` by linear interpolation between quadrature nodes.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.times.len();
        let j = self.times.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.values[j - 1] + w * (self.values[j] - self.values[j - 1])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Reward rate `r_k` whose accumulated integral is `B_k`.
pub(crate) fn reward_rate(
    party: Party,
    state: &InstantState,
    params: &MarketParams,
) -> Result<f64> {
    let lambda = params.intensity;
    let m = &state.moments;
    let a = params.accumulation(party, state.t)?;
    let gamma = params.risk_aversion[party];
    let (xi1, xi2) = state.loadings;
    Ok(match party {
        Party::Insurer => {
            lambda
                * (params.insurer_loading * params.claims.mean()
                    - xi1 * m.l1_sq
                    - xi2 * m.l2_mean
                    - 0.5 * gamma * a * m.retained_sq)
        }
        Party::Reinsurer1 => lambda * (xi1 - 0.5 * gamma * a) * m.l1_sq,
        Party::Reinsurer2 => lambda * (xi2 * m.l2_mean - 0.5 * gamma * a * m.l2_sq),
    })
}

/// `B_k(t) = ∫_t^T A_k(s) r_k(s) ds` on `[0, T]`, for each party.
pub fn value_intercepts(
    params: &MarketParams,
    path: &PremiumPath,
) -> Result<PerParty<ValueIntercept>> {
    let n = TIME_PANELS;
    let h = params.horizon / n as f64;
    let times: Vec<f64> = (0..=n)
        .map(|i| if i == n { params.horizon } else { h * i as f64 })
        .collect();
    let states: Vec<InstantState> = times
        .iter()
        .map(|&s| InstantState::at(path, params, s))
        .collect::<Result<_>>()?;
    params.risk_aversion.try_map(|party, _| {
        let f: Vec<f64> = times
            .iter()
            .zip(&states)
            .map(|(&s, st)| Ok(params.accumulation(party, s)? * reward_rate(party, st, params)?))
            .collect::<Result<_>>()?;
        Ok(ValueIntercept {
            party,
            times: times.clone(),
            values: backward_cumulative(&f, h),
        })
    })
}

/// `B_k` for a single party.
pub fn value_intercept(
    party: Party,
    params: &MarketParams,
    path: &PremiumPath,
) -> Result<ValueIntercept> {
    let all = value_intercepts(params, path)?;
    Ok(match party {
        Party::Insurer => all.insurer,
        Party::Reinsurer1 => all.reinsurer1,
        Party::Reinsurer2 => all.reinsurer2,
    })
}

/// `∫_{x_i}^{x_n} f` at every node, fourth order at even offsets from the end.
fn backward_cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len() - 1;
    let mut out = vec![0.0; n + 1];
    let mut i = n;
    while i >= 2 {
        out[i - 2] = out[i] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        // node i-1 from the parabola through the three samples
        out[i - 1] = out[i] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        i -= 2;
    }
    if i == 1 {
        out[0] = out[1] + 0.5 * h * (f[0] + f[1]);
    }
    out
}
