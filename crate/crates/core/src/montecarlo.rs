//! Exact-event simulation of the three surplus processes.
//!
//! Between claims each surplus follows `dX = ρ X dt + (premium flow) dt`,
//! solved as `X(b) = X(a) A(a)/A(b) + (F(b) - F(a))/A(b)` with
//! `F(s) = ∫_0^s A(u) flow(u) du` tabulated once per run. At a claim the
//! amount is split by the insurer's response in force at that instant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::{MarketParams, Party, PerParty};
use crate::response::indemnity;
use crate::strategy::{InstantState, PremiumPath};
use crate::valuation::ObjectiveValue;

/// Default premium-flow quadrature step is `T / DEFAULT_STEPS`.
pub const DEFAULT_STEPS: usize = 8000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub seed: u64,
    /// Step of the premium-flow table; `None` means `T / 8000`.
    pub step: Option<f64>,
}

impl SimConfig {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self {
            paths,
            seed,
            step: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidParameter {
                name: "paths",
                reason: "need at least one path".into(),
            });
        }
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "step",
                    reason: format!("must be positive, got {h}"),
                });
            }
        }
        Ok(())
    }
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRecord {
    pub terminal: PerParty<f64>,
    pub claim_count: usize,
    pub claim_total: f64,
    /// Undiscounted jump totals borne by each party.
    pub jumps: PerParty<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSamples {
    pub records: Vec<PathRecord>,
}

impl TerminalSamples {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn terminal(&self, party: Party) -> Vec<f64> {
        self.records.iter().map(|r| r.terminal[party]).collect()
    }
}

/// Cumulative `∫_0^s A(u) flow(u) du` on a uniform grid, trapezoid rule.
struct FlowTable {
    step: f64,
    cumulative: PerParty<Vec<f64>>,
}

impl FlowTable {
    fn build(path: &PremiumPath, params: &MarketParams, step: f64) -> Result<Self> {
        let n = (params.horizon / step).ceil().max(1.0) as usize;
        let h = params.horizon / n as f64;
        let states: Vec<InstantState> = (0..=n)
            .into_par_iter()
            .map(|i| {
                InstantState::at(
                    path,
                    params,
                    if i == n { params.horizon } else { h * i as f64 },
                )
            })
            .collect::<Result<_>>()?;
        let c = params.insurer_premium_rate();
        let cumulative = PerParty::new((), (), ()).try_map(|party, _| {
            let mut acc = Vec::with_capacity(n + 1);
            let mut total = 0.0;
            let mut prev = None;
            for st in &states {
                let flow = match party {
                    Party::Insurer => c - st.p1 - st.p2,
                    Party::Reinsurer1 => st.p1,
                    Party::Reinsurer2 => st.p2,
                };
                let v = params.accumulation(party, st.t)? * flow;
                if let Some(p) = prev {
                    total += 0.5 * h * (p + v);
                }
                acc.push(total);
                prev = Some(v);
            }
            Ok(acc)
        })?;
        Ok(Self {
            step: h,
            cumulative,
        })
    }

    fn at(&self, party: Party, s: f64) -> f64 {
        let table = &self.cumulative[party];
        let n = table.len() - 1;
        let pos = (s / self.step).max(0.0);
        let j = (pos.floor() as usize).min(n - 1);
        let w = (pos - j as f64).clamp(0.0, 1.0);
        table[j] + w * (table[j + 1] - table[j])
    }
}

/// Simulate terminal surpluses under `path`; identical inputs give identical output.
pub fn simulate(
    path: &PremiumPath,
    params: &MarketParams,
    config: &SimConfig,
) -> Result<TerminalSamples> {
    config.validate()?;
    params.validate()?;
    let horizon = params.horizon;
    let step = config.step.unwrap_or(horizon / DEFAULT_STEPS as f64);
    let flows = FlowTable::build(path, params, step)?;
    let a0 = params
        .rates
        .try_map(|_, curve| curve.accumulation(0.0, horizon))?;
    let f_end = PerParty::new(
        flows.at(Party::Insurer, horizon),
        flows.at(Party::Reinsurer1, horizon),
        flows.at(Party::Reinsurer2, horizon),
    );
    let lambda = params.intensity;

    let run_path = |index: usize| -> Result<PathRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(index as u64);
        // X(T) = A(0) x0 + F(T) - Σ A(T_i) J_i
        let mut discounted_jumps = PerParty::new(0.0, 0.0, 0.0);
        let mut jumps = PerParty::new(0.0, 0.0, 0.0);
        let mut claim_count = 0;
        let mut claim_total = 0.0;
        let mut t = 0.0;
        if lambda > 0.0 {
            loop {
                let u: f64 = rng.gen();
                t += -(-u).ln_1p() / lambda;
                if t > horizon {
                    break;
                }
                let y = params.claims.quantile(rng.gen::<f64>());
                let split = indemnity(y, &path.response_at(params, t)?)?;
                let amounts = PerParty::new(split.retained, split.ceded_r1, split.ceded_r2);
                for party in Party::ALL {
                    jumps[party] += amounts[party];
                    discounted_jumps[party] += params.accumulation(party, t)? * amounts[party];
                }
                claim_count += 1;
                claim_total += y;
            }
        }
        let terminal = PerParty::new(
            a0.insurer * params.initial_surplus.insurer + f_end.insurer - discounted_jumps.insurer,
            a0.reinsurer1 * params.initial_surplus.reinsurer1 + f_end.reinsurer1
                - discounted_jumps.reinsurer1,
            a0.reinsurer2 * params.initial_surplus.reinsurer2 + f_end.reinsurer2
                - discounted_jumps.reinsurer2,
        );
        Ok(PathRecord {
            terminal,
            claim_count,
            claim_total,
            jumps,
        })
    };

    let records = (0..config.paths)
        .into_par_iter()
        .map(run_path)
        .collect::<Result<Vec<_>>>()?;
    Ok(TerminalSamples { records })
}

/// Sample objective of one party with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveEstimate {
    pub value: ObjectiveValue,
    pub se_mean: f64,
    pub se_variance: f64,
    pub se_objective: f64,
    pub paths: usize,
}

fn estimate(values: &[f64], party: Party, gamma: f64) -> ObjectiveEstimate {
    let n = values.len() as f64;
    // shifting by the first sample keeps constant samples exact
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in values {
        let d2 = (v - mean).powi(2);
        m2 += d2;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    m4 /= n;
    let se_mean = (variance / n).sqrt();
    let se_variance = ((m4 - (n - 3.0) / (n - 1.0) * variance * variance) / n)
        .max(0.0)
        .sqrt();
    // influence function of mean - (γ/2) variance
    let infl: Vec<f64> = values
        .iter()
        .map(|v| v - 0.5 * gamma * (v - mean).powi(2))
        .collect();
    let im = infl.iter().sum::<f64>() / n;
    let iv = infl.iter().map(|v| (v - im).powi(2)).sum::<f64>() / (n - 1.0);
    ObjectiveEstimate {
        value: ObjectiveValue {
            party,
            mean,
            variance,
            objective: mean - 0.5 * gamma * variance,
        },
        se_mean,
        se_variance,
        se_objective: (iv / n).sqrt(),
        paths: values.len(),
    }
}

/// Sample mean, unbiased variance and objective of each party's terminal surplus.
pub fn estimate_objectives(
    samples: &TerminalSamples,
    params: &MarketParams,
) -> Result<PerParty<ObjectiveEstimate>> {
    if samples.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 paths, got {}",
            samples.len()
        )));
    }
    Ok(params
        .risk_aversion
        .map(|party, &gamma| estimate(&samples.terminal(party), party, gamma)))
}
