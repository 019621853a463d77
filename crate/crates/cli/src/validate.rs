//! The invariant suite behind `--command validate`.
//!
//! Structural checks run for any configuration. Checks that need the
//! exponential closed forms are skipped for other claim laws, and the checks
//! against published reference numbers only run for the base market.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use reins_core::{
    admissible_box, big_g, closed_form_objectives, constrained_equilibrium, e_fun,
    estimate_objectives, g_fun, indemnity, instantaneous_reward, reaction_xi1, reaction_xi2,
    regime_changes_in_beta, response, simulate, ClaimDistribution, ExpoGame, MarketParams, Party,
    PremiumPath, PremiumPoint, Regime, Reinsurer, SimConfig,
};

use crate::commands::{closed_form_applies, solve_point};
use crate::config::{is_reference, RunParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    /// Worst observed deviation (or violation count).
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn skip(name: &'static str, why: impl Into<String>) -> Self {
        Self {
            name,
            status: Status::Skip,
            metric: f64::NAN,
            tolerance: f64::NAN,
            detail: why.into(),
        }
    }

    fn failed(name: &'static str, e: impl std::fmt::Display) -> Self {
        Self {
            name,
            status: Status::Fail,
            metric: f64::NAN,
            tolerance: f64::NAN,
            detail: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Multiplies every numeric tolerance.
    pub scale: f64,
    pub paths: usize,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            scale: 1.0,
            paths: 20_000,
            seed: 0,
        }
    }
}

type Outcome = reins_core::Result<(f64, String)>;

struct Suite {
    scale: f64,
    checks: Vec<Check>,
}

impl Suite {
    /// Passes when the returned metric is at most `tol` (scaled).
    fn le(&mut self, name: &'static str, tol: f64, f: impl FnOnce() -> Outcome) {
        let tolerance = tol * self.scale;
        let check = match f() {
            Ok((metric, detail)) => {
                let status = if metric <= tolerance {
                    Status::Pass
                } else {
                    Status::Fail
                };
                Check {
                    name,
                    status,
                    metric,
                    tolerance,
                    detail,
                }
            }
            Err(e) => Check::failed(name, e),
        };
        self.checks.push(check);
    }

    /// Passes when no violations are counted; not affected by the scale.
    fn count(&mut self, name: &'static str, f: impl FnOnce() -> Outcome) {
        let check = match f() {
            Ok((metric, detail)) => {
                let status = if metric == 0.0 {
                    Status::Pass
                } else {
                    Status::Fail
                };
                Check {
                    name,
                    status,
                    metric,
                    tolerance: 0.0,
                    detail,
                }
            }
            Err(e) => Check::failed(name, e),
        };
        self.checks.push(check);
    }
}

pub fn run_validate(run: &RunParams, opts: &ValidateOptions) -> Vec<Check> {
    let mut s = Suite {
        scale: opts.scale,
        checks: Vec::new(),
    };
    structural(&mut s, run, opts);
    if closed_form_applies(&run.params) {
        closed_form(&mut s, run);
    } else {
        for name in CLOSED_FORM_CHECKS {
            s.checks.push(Check::skip(
                name,
                "needs exponential claims and section4 bounds",
            ));
        }
    }
    if is_reference(run) {
        reference(&mut s, &run.params);
    } else {
        for name in REFERENCE_CHECKS {
            s.checks.push(Check::skip(name, "only for the base market"));
        }
    }
    s.checks
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.status != Status::Fail)
}

pub fn report_json(checks: &[Check], scale: f64) -> String {
    let num = |x: f64| if x.is_finite() { json!(x) } else { Value::Null };
    let failures: Vec<&str> = checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| c.name)
        .collect();
    let list: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "status": c.status.label(),
                "metric": num(c.metric),
                "tolerance": num(c.tolerance),
                "detail": c.detail,
            })
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&json!({
        "passed": failures.is_empty(),
        "tolerance_scale": scale,
        "failures": failures,
        "checks": list,
    }))
    .expect("report serializes");
    out.push('\n');
    out
}

const CLOSED_FORM_CHECKS: [&str; 8] = [
    "e_g_G_monotone",
    "h1_h2_monotone",
    "h1_h2_unique_crossing",
    "boxed_mutual_best_response",
    "general_vs_closed_form_reactions",
    "reward_argmax",
    "chain_identity",
    "beta_invariance",
];

const REFERENCE_CHECKS: [&str; 4] = [
    "reference_equilibrium",
    "reference_price_trajectory",
    "reference_regime_thresholds",
    "reference_sensitivity_signs",
];

fn structural(s: &mut Suite, run: &RunParams, opts: &ValidateOptions) {
    let p = &run.params;
    let bx = admissible_box(p);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let samples: Vec<(f64, f64, f64, f64)> = (0..2000)
        .map(|_| {
            let xi1 = rng.gen_range(bx.xi1.0..=bx.xi1.1);
            let xi2 = rng.gen_range(bx.xi2.0..=bx.xi2.1);
            let t = rng.gen_range(0.0..=p.horizon);
            let y = p.claims.quantile(rng.gen_range(0.0..0.9999)) * 2.0;
            (xi1, xi2, t, y)
        })
        .collect();

    s.le("indemnity_mass_balance", 1e-12, || {
        let mut worst = 0.0f64;
        let mut bad = 0;
        for &(xi1, xi2, t, y) in &samples {
            let r = response(&PremiumPoint::new(xi1, xi2, t), p)?;
            let l = indemnity(y, &r)?;
            worst = worst.max((l.ceded_r1 + l.ceded_r2 + l.retained - y).abs() / y.max(1.0));
            if l.ceded_r1 < 0.0 || l.ceded_r2 < 0.0 || l.ceded_r1 + l.ceded_r2 > y * (1.0 + 1e-15) {
                bad += 1;
            }
        }
        let metric = if bad > 0 { f64::INFINITY } else { worst };
        Ok((
            metric,
            format!(
                "{} random points, {bad} outside 0 <= l1, l2 and l1 + l2 <= y",
                samples.len()
            ),
        ))
    });

    s.le("indemnity_continuity", 1e-12, || {
        let mut worst = 0.0f64;
        for &(xi1, xi2, t, _) in &samples {
            let r = response(&PremiumPoint::new(xi1, xi2, t), p)?;
            let at = indemnity(r.d, &r)?;
            let after = indemnity(f64::from_bits(r.d.to_bits() + 1), &r)?;
            let gap = (at.ceded_r1 - after.ceded_r1).abs()
                + (at.ceded_r2 - after.ceded_r2).abs()
                + (at.retained - after.retained).abs();
            worst = worst.max(gap / r.d.max(1.0));
        }
        Ok((worst, "jump of (l1, l2, retained) across y = d".into()))
    });

    s.le("equilibrium_residuals", 1e-8, || {
        let r = solve_point(p, run.t)?;
        if closed_form_applies(p) {
            let eq = constrained_equilibrium(p, run.t)?;
            if eq.regime == Regime::Interior {
                Ok((
                    r.foc.0.abs().max(r.foc.1.abs()),
                    "interior: both first-order residuals".into(),
                ))
            } else {
                Ok((
                    eq.best_response_gap,
                    format!("{}: boxed best-response gap", eq.regime),
                ))
            }
        } else {
            Ok((
                r.foc.0.abs().max(r.foc.1.abs()),
                "candidate: both first-order residuals".into(),
            ))
        }
    });

    let nodes = if closed_form_applies(p) { 801 } else { 101 };
    let cfg = SimConfig::new(opts.paths, opts.seed);
    s.le("monte_carlo_vs_closed_form", 3.0, || {
        let path = PremiumPath::equilibrium(p, nodes)?;
        mc_sigmas(&path, p, &cfg)
    });
    s.le("monte_carlo_no_reinsurance", 3.0, || {
        mc_sigmas(&PremiumPath::NoReinsurance, p, &cfg)
    });

    s.le("zero_intensity_deterministic", 1e-9, || {
        let mut q = p.clone();
        q.intensity = 0.0;
        let path = PremiumPath::equilibrium(&q, nodes)?;
        let closed = closed_form_objectives(&path, &q, 0.0, q.initial_surplus)?;
        let est = estimate_objectives(&simulate(&path, &q, &SimConfig::new(4, opts.seed))?, &q)?;
        let worst = Party::ALL
            .into_iter()
            .map(|k| (est[k].value.mean - closed[k].mean).abs() + est[k].value.variance.abs())
            .fold(0.0, f64::max);
        Ok((
            worst,
            "no claims: simulated mean equals the closed form, zero variance".into(),
        ))
    });
}

/// Largest |J_mc - J_closed| / SE over the three parties.
fn mc_sigmas(path: &PremiumPath, p: &MarketParams, cfg: &SimConfig) -> Outcome {
    let closed = closed_form_objectives(path, p, 0.0, p.initial_surplus)?;
    let est = estimate_objectives(&simulate(path, p, cfg)?, p)?;
    let mut worst = 0.0f64;
    for k in Party::ALL {
        let e = est[k];
        let z = (e.value.objective - closed[k].objective).abs() / e.se_objective;
        worst = worst.max(if z.is_nan() { 0.0 } else { z });
    }
    Ok((
        worst,
        format!(
            "{} paths, seed {}, largest |z| over the objectives",
            cfg.paths, cfg.seed
        ),
    ))
}

fn closed_form(s: &mut Suite, run: &RunParams) {
    let p = &run.params;
    let t = run.t;

    s.count("e_g_G_monotone", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe9);
        let mut bad = 0;
        for _ in 0..20 {
            let c = rng.gen_range(0.05..20.0);
            let mut xs: Vec<f64> = (0..200).map(|_| rng.gen_range(1e-6..50.0)).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            for w in xs.windows(2) {
                let (a, b) = (w[0], w[1]);
                if !(e_fun(b)? > e_fun(a)?) || !(g_fun(b, c) < g_fun(a, c)) {
                    bad += 1;
                }
                if big_g(b, c)? > big_g(a, c)? * (1.0 + 4.0 * f64::EPSILON) {
                    bad += 1;
                }
            }
        }
        Ok((
            bad as f64,
            "e increasing, g and G decreasing on 20 random grids".into(),
        ))
    });

    s.count("h1_h2_monotone", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x41);
        let mut bad = 0;
        for tt in [0.0, 0.5 * p.horizon, t] {
            let game = ExpoGame::at(p, tt)?;
            let (lo, hi) = game.h1_domain();
            let mut xs: Vec<f64> = (0..400)
                .map(|_| lo + (hi - lo) * rng.gen_range(0.001..0.999))
                .collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            for w in xs.windows(2) {
                if !(game.h1(w[1])? > game.h1(w[0])?) || !(game.h2(w[1]) > game.h2(w[0])) {
                    bad += 1;
                }
            }
        }
        Ok((
            bad as f64,
            "h1 and h2 strictly increasing on random grids".into(),
        ))
    });

    s.count("h1_h2_unique_crossing", || {
        let mut off = 0;
        for tt in [0.0, 0.5 * p.horizon, t] {
            let game = ExpoGame::at(p, tt)?;
            let (lo, hi) = game.h1_domain();
            // end signs from the limits h1 -> 0 at lo and h1 -> inf at hi
            let mut signs = vec![false];
            for i in 1..400 {
                let x = lo + (hi - lo) * i as f64 / 400.0;
                signs.push(game.h1(x)? > game.h2(x));
            }
            signs.push(true);
            let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            off += (changes as i32 - 1).abs();
        }
        Ok((
            off as f64,
            "sign changes of h1 - h2 on the bracket, minus one".into(),
        ))
    });

    s.le("boxed_mutual_best_response", 1e-8, || {
        let mut worst = 0.0f64;
        let betas: Vec<f64> = (0..=60)
            .map(|i| 0.1 * 50f64.powf(i as f64 / 60.0))
            .collect();
        let base_beta = p.claims.exponential_rate().unwrap_or(1.0);
        for beta in betas.into_iter().chain([base_beta]) {
            let q = p.with_claims(ClaimDistribution::exponential(beta)?);
            let bx = admissible_box(&q);
            let eq = constrained_equilibrium(&q, t)?;
            let r1 = bx.clamp_xi1(reaction_xi1(eq.xi2, &q, t, false)?);
            let r2 = bx.clamp_xi2(reaction_xi2(eq.xi1, &q, t, false)?);
            worst = worst.max((eq.xi1 - r1).abs()).max((eq.xi2 - r2).abs());
        }
        Ok((
            worst,
            "62 values of beta; distance to the clamped reactions".into(),
        ))
    });

    s.le("general_vs_closed_form_reactions", 1e-6, || {
        let game = ExpoGame::at(p, t)?;
        let (lo, hi) = game.h1_domain();
        let mut worst = 0.0f64;
        for i in 1..=50 {
            let xi1 = lo + (hi - lo) * i as f64 / 51.0;
            worst = worst.max((reaction_xi2(xi1, p, t, false)? - game.h2(xi1)).abs());
            let xi2 = game.h1(xi1)?;
            worst = worst.max((reaction_xi1(xi2, p, t, false)? - xi1).abs());
        }
        Ok((worst, "50 grid points against h1 and h2".into()))
    });

    s.le("reward_argmax", 1e-4, || {
        let eq = constrained_equilibrium(p, t)?;
        let bx = admissible_box(p);
        let r1 = bx.clamp_xi1(reaction_xi1(eq.xi2, p, t, false)?);
        let r2 = bx.clamp_xi2(reaction_xi2(eq.xi1, p, t, false)?);
        let a1 = grid_argmax(bx.xi1, |x| {
            instantaneous_reward(&PremiumPoint::new(x, eq.xi2, t), p, Reinsurer::R1)
        })?;
        let a2 = grid_argmax(bx.xi2, |x| {
            instantaneous_reward(&PremiumPoint::new(eq.xi1, x, t), p, Reinsurer::R2)
        })?;
        // one grid step, with room for the grid's own rounding
        let worst = (a1 - r1).abs().max((a2 - r2).abs()) - 1e-12;
        Ok((
            worst.max(0.0),
            format!("argmax on a 1e-4 grid: ({a1}, {a2}) vs ({r1}, {r2})"),
        ))
    });

    let eq = constrained_equilibrium(p, t);
    match eq {
        Ok(eq) if eq.regime == Regime::Interior => s.le("chain_identity", 1e-6, || {
            let game = ExpoGame::at(p, t)?;
            let lhs = game.k_1 / eq.xi1;
            let rhs = big_g(game.beta * eq.response.d, game.c_r1())?;
            Ok((
                (lhs - rhs).abs(),
                format!("k1 / xi1 = {lhs}, G(beta d) = {rhs}"),
            ))
        }),
        Ok(eq) => s.checks.push(Check::skip(
            "chain_identity",
            format!("regime is {}", eq.regime),
        )),
        Err(e) => s.checks.push(Check::failed("chain_identity", e)),
    }

    s.le("beta_invariance", 1e-9, || {
        let base_beta = p.claims.exponential_rate().unwrap_or(1.0);
        let mut xi1s = Vec::new();
        for f in [0.5, 1.0, 2.0] {
            let eq = constrained_equilibrium(
                &p.with_claims(ClaimDistribution::exponential(base_beta * f)?),
                t,
            )?;
            if eq.regime == Regime::Interior {
                xi1s.push(eq.xi1);
            }
        }
        let spread = xi1s.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - xi1s.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        Ok((
            if xi1s.len() < 2 { 0.0 } else { spread },
            format!("{} interior points among beta x 0.5, 1, 2", xi1s.len()),
        ))
    });
}

fn grid_argmax(
    range: (f64, f64),
    f: impl Fn(f64) -> reins_core::Result<f64>,
) -> reins_core::Result<f64> {
    let n = ((range.1 - range.0) / 1e-4).round() as usize;
    let mut best = (range.0, f64::NEG_INFINITY);
    for i in 0..=n {
        let x = (range.0 + 1e-4 * i as f64).min(range.1);
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best.0)
}

mod reference_values {
    pub const XI1: f64 = 0.28269;
    pub const XI2: f64 = 0.38225;
    pub const Q: f64 = 0.2825;
    pub const D: f64 = 2.3936;
    pub const CAP: f64 = 0.6761;
    pub const RETENTION: f64 = 1.7175;
    pub const P2_START: f64 = 0.1262;
    pub const P2_END: f64 = 0.1070;
    pub const MU_THRESHOLDS: [f64; 4] = [0.2525, 0.3537, 2.3546, 3.1837];
}

fn reference(s: &mut Suite, p: &MarketParams) {
    use reference_values as rv;

    s.le("reference_equilibrium", 1.0, || {
        let eq = constrained_equilibrium(p, 0.0)?;
        let r = eq.response;
        let err = [
            (eq.xi1 - rv::XI1).abs() / 5e-5,
            (eq.xi2 - rv::XI2).abs() / 5e-5,
            (r.q - rv::Q).abs() / 5e-4,
            (r.d - rv::D).abs() / 5e-4,
            (r.cap - rv::CAP).abs() / 5e-4,
            (r.retention_limit - rv::RETENTION).abs() / 5e-4,
        ];
        let worst = err.into_iter().fold(0.0, f64::max);
        Ok((
            worst,
            "largest deviation as a fraction of its allowance (5e-5 loadings, 5e-4 contract)"
                .into(),
        ))
    });

    s.le("reference_price_trajectory", 1.5e-3, || {
        let times: Vec<f64> = (0..=80).map(|i| p.horizon * i as f64 / 80.0).collect();
        let rows = times
            .iter()
            .map(|&t| solve_point(p, t))
            .collect::<reins_core::Result<Vec<_>>>()?;
        let first = &rows[0];
        let last = &rows[rows.len() - 1];
        let gap = (first.p2 - rv::P2_START)
            .abs()
            .max((last.p2 - rv::P2_END).abs());
        let mut shape = 0;
        for w in rows.windows(2) {
            if w[1].xi1 > w[0].xi1 || w[1].xi2 > w[0].xi2 || !(w[1].p1 < w[0].p1) {
                shape += 1;
            }
        }
        shape += rows
            .iter()
            .filter(|r| !(0.2..=0.35).contains(&r.p1))
            .count();
        let metric = if shape > 0 { f64::INFINITY } else { gap };
        Ok((
            metric,
            format!("p2 {} -> {}, {shape} shape violations", first.p2, last.p2),
        ))
    });

    s.le("reference_regime_thresholds", 2e-3, || {
        let changes = regime_changes_in_beta(p, 0.0, 0.1, 6.0, 200)?;
        let mut mus: Vec<f64> = changes.iter().map(|c| 1.0 / c.beta).collect();
        mus.sort_by(f64::total_cmp);
        if mus.len() != rv::MU_THRESHOLDS.len() {
            return Ok((
                f64::INFINITY,
                format!("found {} regime changes: {mus:?}", mus.len()),
            ));
        }
        let worst = mus
            .iter()
            .zip(rv::MU_THRESHOLDS)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((worst, format!("mu thresholds {mus:?}")))
    });

    s.count("reference_sensitivity_signs", || {
        let base = constrained_equilibrium(p, 0.0)?;
        let h = 1e-5;
        // signs of (xi1, xi2, q, d) under a bump of the party's aversion or rate
        let expected = [
            [1.0, 1.0, 1.0, -1.0],
            [1.0, 1.0, -1.0, -1.0],
            [1.0, 1.0, -1.0, 1.0],
        ];
        let mut bad = 0;
        for (party, signs) in Party::ALL.into_iter().zip(expected) {
            for bump_rate in [false, true] {
                let mut q = p.clone();
                if bump_rate {
                    q.rates[party] = reins_core::RateCurve::constant(
                        q.rates[party].rate_at(0.0) + h,
                        q.horizon,
                    )?;
                } else {
                    q.risk_aversion[party] += h;
                }
                let eq = constrained_equilibrium(&q, 0.0)?;
                let diffs = [
                    eq.xi1 - base.xi1,
                    eq.xi2 - base.xi2,
                    eq.response.q - base.response.q,
                    eq.response.d - base.response.d,
                ];
                bad += diffs
                    .iter()
                    .zip(signs)
                    .filter(|(d, s)| !(**d * s > 0.0))
                    .count();
            }
        }
        Ok((
            bad as f64,
            "finite-difference signs for gamma and rho of each party".into(),
        ))
    });
}
