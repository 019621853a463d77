//! Deterministic premium-loading paths `t ↦ (ξ1(t), ξ2(t))` and the state of
//! the market they induce at each instant.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expo::constrained_equilibrium;
use crate::market::{premium_rates, BoundConvention, MarketParams, PremiumPoint};
use crate::reaction::{general_equilibrium, GeneralOptions};
use crate::response::{response, IndemnityMoments, ResponseStrategy};

/// Default number of time nodes for a precomputed equilibrium path.
pub const DEFAULT_PATH_NODES: usize = 801;

/// Loadings offered by the two reinsurers over `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PremiumPath {
    /// No reinsurance is bought at all.
    NoReinsurance,
    Constant {
        xi1: f64,
        xi2: f64,
    },
    /// Loadings on a time grid, linearly interpolated.
    Grid {
        times: Vec<f64>,
        xi1: Vec<f64>,
        xi2: Vec<f64>,
    },
}

impl PremiumPath {
    pub fn grid(times: Vec<f64>, xi1: Vec<f64>, xi2: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || xi1.len() != times.len() || xi2.len() != times.len() {
            return Err(Error::Domain(format!(
                "grid needs at least two nodes and matching lengths, got {}, {}, {}",
                times.len(),
                xi1.len(),
                xi2.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "grid times must be strictly increasing".into(),
            ));
        }
        Ok(Self::Grid { times, xi1, xi2 })
    }

    /// Equilibrium loadings on `nodes` equally spaced times in `[0, T]`.
    ///
    /// Exponential claims under the section4 box use the box-constrained closed
    /// form; anything else uses the candidate from the damped best-response
    /// iteration.
    pub fn equilibrium(params: &MarketParams, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::Domain(format!("need at least 2 nodes, got {nodes}")));
        }
        let horizon = params.horizon;
        let times: Vec<f64> = (0..nodes)
            .map(|i| {
                if i + 1 == nodes {
                    horizon
                } else {
                    horizon * i as f64 / (nodes - 1) as f64
                }
            })
            .collect();
        let closed_form = params.claims.exponential_rate().is_some()
            && params.bounds == BoundConvention::Section4;
        let points: Vec<(f64, f64)> = times
            .par_iter()
            .map(|&t| {
                if closed_form {
                    constrained_equilibrium(params, t).map(|e| (e.xi1, e.xi2))
                } else {
                    general_equilibrium(params, t, GeneralOptions::default())
                        .map(|g| (g.point.xi1, g.point.xi2))
                }
            })
            .collect::<Result<_>>()?;
        let (xi1, xi2) = points.into_iter().unzip();
        Ok(Self::Grid { times, xi1, xi2 })
    }

    /// Loadings at `t`; `None` when no reinsurance is offered.
    pub fn at(&self, t: f64) -> Option<(f64, f64)> {
        match self {
            Self::NoReinsurance => None,
            Self::Constant { xi1, xi2 } => Some((*xi1, *xi2)),
            Self::Grid { times, xi1, xi2 } => {
                let n = times.len();
                let j = times.partition_point(|&s| s <= t).clamp(1, n - 1);
                let (t0, t1) = (times[j - 1], times[j]);
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                Some((
                    xi1[j - 1] + w * (xi1[j] - xi1[j - 1]),
                    xi2[j - 1] + w * (xi2[j] - xi2[j - 1]),
                ))
            }
        }
    }

    /// Insurer's response to the loadings in force at `t`.
    pub fn response_at(&self, params: &MarketParams, t: f64) -> Result<ResponseStrategy> {
        match self.at(t) {
            None => Ok(ResponseStrategy::none(t)),
            Some((xi1, xi2)) => response(&PremiumPoint::new(xi1, xi2, t), params),
        }
    }
}

/// Everything the market needs at one instant under a premium path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantState {
    pub t: f64,
    /// `(ξ1, ξ2)`, zero when no reinsurance is offered.
    pub loadings: (f64, f64),
    pub response: ResponseStrategy,
    pub moments: IndemnityMoments,
    /// Premium rate paid to reinsurer 1.
    pub p1: f64,
    /// Premium rate paid to reinsurer 2.
    pub p2: f64,
}

impl InstantState {
    pub fn at(path: &PremiumPath, params: &MarketParams, t: f64) -> Result<Self> {
        let response = path.response_at(params, t)?;
        let moments = response.moments(&params.claims)?;
        let (loadings, (p1, p2)) = match path.at(t) {
            None => ((0.0, 0.0), (0.0, 0.0)),
            Some((xi1, xi2)) => {
                let point = PremiumPoint::new(xi1, xi2, t);
                ((xi1, xi2), premium_rates(&point, &response, params)?)
            }
        };
        Ok(Self {
            t,
            loadings,
            response,
            moments,
            p1,
            p2,
        })
    }
}
