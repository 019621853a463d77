//! The table-producing commands.

use rayon::prelude::*;
use reins_core::{
    closed_form_objectives, constrained_equilibrium, estimate_objectives, foc_residual_r1,
    foc_residual_r2, general_equilibrium, premium_rates, response, simulate, value_intercepts,
    BoundConvention, ClaimDistribution, GeneralOptions, MarketParams, Party, PremiumPath,
    RateCurve, ResponseStrategy, SimConfig, TerminalSamples, DEFAULT_PATH_NODES,
};

use crate::config::RunParams;
use crate::output::{fmt_g9, Cell, Table};
use crate::CliError;

/// Regime tag for points that come from the unboxed best-response iteration.
pub const CANDIDATE: &str = "Candidate";

/// An equilibrium (or candidate) at one time with everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub t: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub response: ResponseStrategy,
    pub regime: String,
    pub foc: (f64, f64),
    pub p1: f64,
    pub p2: f64,
}

/// Whether the closed-form, box-constrained solver applies.
pub fn closed_form_applies(params: &MarketParams) -> bool {
    params.claims.exponential_rate().is_some() && params.bounds == BoundConvention::Section4
}

pub fn solve_point(params: &MarketParams, t: f64) -> reins_core::Result<PointReport> {
    let (point, regime) = if closed_form_applies(params) {
        let eq = constrained_equilibrium(params, t)?;
        (eq.point(), eq.regime.label().to_string())
    } else {
        let g = general_equilibrium(params, t, GeneralOptions::default())?;
        (g.point, CANDIDATE.to_string())
    };
    let resp = response(&point, params)?;
    let foc = (
        foc_residual_r1(&point, params)?,
        foc_residual_r2(&point, params)?,
    );
    let (p1, p2) = premium_rates(&point, &resp, params)?;
    Ok(PointReport {
        t,
        xi1: point.xi1,
        xi2: point.xi2,
        response: resp,
        regime,
        foc,
        p1,
        p2,
    })
}

/// `start:stop:n`, `n` evenly spaced values with both ends included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("grid must look like start:stop:n, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn check_times(times: &[f64], horizon: f64) -> Result<(), CliError> {
    match times.iter().find(|t| !(0.0..=horizon).contains(*t)) {
        Some(t) => Err(CliError::Usage(format!(
            "time {t} lies outside [0, {horizon}]"
        ))),
        None => Ok(()),
    }
}

const POINT_COLUMNS: [&str; 11] = [
    "xi1",
    "xi2",
    "q",
    "d",
    "cap",
    "retention_limit",
    "regime",
    "foc_r1",
    "foc_r2",
    "p1",
    "p2",
];

fn point_cells(r: &PointReport) -> Vec<Cell> {
    vec![
        r.xi1.into(),
        r.xi2.into(),
        r.response.q.into(),
        r.response.d.into(),
        r.response.cap.into(),
        r.response.retention_limit.into(),
        r.regime.clone().into(),
        r.foc.0.into(),
        r.foc.1.into(),
        r.p1.into(),
        r.p2.into(),
    ]
}

/// One row per requested time (the config's `t` unless a grid is given).
pub fn equilibrium(run: &RunParams, grid: Option<&[f64]>) -> Result<Table, CliError> {
    let times = grid.map_or_else(|| vec![run.t], <[f64]>::to_vec);
    check_times(&times, run.params.horizon)?;
    let reports = times
        .par_iter()
        .map(|&t| solve_point(&run.params, t))
        .collect::<reins_core::Result<Vec<_>>>()
        .map_err(CliError::from_core)?;
    let mut table = Table::new(std::iter::once("t").chain(POINT_COLUMNS));
    for r in &reports {
        let mut row = vec![r.t.into()];
        row.extend(point_cells(r));
        table.push(row);
    }
    Ok(table)
}

/// Equilibrium loadings, prices and value-function intercepts over time.
pub fn trajectory(run: &RunParams, grid: Option<&[f64]>) -> Result<Table, CliError> {
    let p = &run.params;
    let times = match grid {
        Some(g) => g.to_vec(),
        None => parse_grid(&format!("0:{}:81", p.horizon))?,
    };
    check_times(&times, p.horizon)?;
    // the iterative solver is much slower than the closed form
    let nodes = if closed_form_applies(p) {
        DEFAULT_PATH_NODES
    } else {
        101
    };
    let path = PremiumPath::equilibrium(p, nodes).map_err(CliError::from_core)?;
    let b = value_intercepts(p, &path).map_err(CliError::from_core)?;
    let reports = times
        .par_iter()
        .map(|&t| solve_point(p, t))
        .collect::<reins_core::Result<Vec<_>>>()
        .map_err(CliError::from_core)?;
    let mut table = Table::new([
        "t", "xi1", "xi2", "q", "d", "cap", "p1", "p2", "B_I", "B_R1", "B_R2",
    ]);
    for r in &reports {
        table.push(vec![
            r.t.into(),
            r.xi1.into(),
            r.xi2.into(),
            r.response.q.into(),
            r.response.d.into(),
            r.response.cap.into(),
            r.p1.into(),
            r.p2.into(),
            b.insurer.at(r.t).into(),
            b.reinsurer1.at(r.t).into(),
            b.reinsurer2.at(r.t).into(),
        ]);
    }
    Ok(table)
}

pub const SWEEP_PARAMS: [&str; 8] = [
    "beta", "mu", "gamma_I", "gamma_R1", "gamma_R2", "rho_I", "rho_R1", "rho_R2",
];

/// `params` with one sweepable parameter set to `value`.
pub fn with_param(params: &MarketParams, name: &str, value: f64) -> Result<MarketParams, CliError> {
    let mut p = params.clone();
    let invalid = |e: reins_core::Error| CliError::Params(e);
    match name {
        "beta" | "mu" => {
            let rate = if name == "mu" { 1.0 / value } else { value };
            p.claims = ClaimDistribution::exponential(rate).map_err(invalid)?;
        }
        "gamma_I" => p.risk_aversion.insurer = value,
        "gamma_R1" => p.risk_aversion.reinsurer1 = value,
        "gamma_R2" => p.risk_aversion.reinsurer2 = value,
        "rho_I" | "rho_R1" | "rho_R2" => {
            let party = match name {
                "rho_I" => Party::Insurer,
                "rho_R1" => Party::Reinsurer1,
                _ => Party::Reinsurer2,
            };
            p.rates[party] = RateCurve::constant(value, p.horizon).map_err(invalid)?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown sweep parameter `{other}` (expected one of {})",
                SWEEP_PARAMS.join(", ")
            )))
        }
    }
    p.validate().map_err(invalid)?;
    Ok(p)
}

/// Equilibrium at the config's `t` for each value of one parameter.
pub fn sweep(run: &RunParams, param: &str, grid: &[f64]) -> Result<Table, CliError> {
    let markets = grid
        .iter()
        .map(|&v| with_param(&run.params, param, v))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = markets
        .par_iter()
        .map(|p| solve_point(p, run.t))
        .collect::<reins_core::Result<Vec<_>>>()
        .map_err(CliError::from_core)?;
    let mut table = Table::new(std::iter::once(param).chain(POINT_COLUMNS));
    for (v, r) in grid.iter().zip(&reports) {
        let mut row = vec![(*v).into()];
        row.extend(point_cells(r));
        table.push(row);
    }
    Ok(table)
}

/// Monte Carlo objectives at the equilibrium path next to the closed forms.
pub fn simulate_summary(
    run: &RunParams,
    cfg: &SimConfig,
) -> Result<(Table, TerminalSamples), CliError> {
    let p = &run.params;
    let nodes = if closed_form_applies(p) {
        DEFAULT_PATH_NODES
    } else {
        101
    };
    let path = PremiumPath::equilibrium(p, nodes).map_err(CliError::from_core)?;
    let samples = simulate(&path, p, cfg).map_err(CliError::from_core)?;
    let est = estimate_objectives(&samples, p).map_err(CliError::from_core)?;
    let closed =
        closed_form_objectives(&path, p, 0.0, p.initial_surplus).map_err(CliError::from_core)?;
    let mut table = Table::new([
        "party",
        "paths",
        "mean",
        "variance",
        "objective",
        "se_mean",
        "se_variance",
        "se_objective",
        "closed_mean",
        "closed_variance",
        "closed_objective",
        "z_objective",
    ]);
    for party in Party::ALL {
        let (e, c) = (est[party], closed[party]);
        let z = if e.se_objective > 0.0 {
            (e.value.objective - c.objective) / e.se_objective
        } else {
            f64::NAN
        };
        table.push(vec![
            party.label().into(),
            (e.paths as u64).into(),
            e.value.mean.into(),
            e.value.variance.into(),
            e.value.objective.into(),
            e.se_mean.into(),
            e.se_variance.into(),
            e.se_objective.into(),
            c.mean.into(),
            c.variance.into(),
            c.objective.into(),
            z.into(),
        ]);
    }
    Ok((table, samples))
}

/// Raw terminal surpluses, one line per path.
pub fn samples_csv(samples: &TerminalSamples) -> String {
    let mut out = String::from("path,x_I,x_R1,x_R2\n");
    for (i, r) in samples.records.iter().enumerate() {
        let t = &r.terminal;
        out.push_str(&format!(
            "{i},{},{},{}\n",
            fmt_g9(t.insurer),
            fmt_g9(t.reinsurer1),
            fmt_g9(t.reinsurer2)
        ));
    }
    out
}
