//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use reins_cli::commands::solve_point;
use reins_core::{
    admissible_box, big_g, closed_form_objectives, constrained_equilibrium, estimate_objectives,
    foc_residual_r1, foc_residual_r2, instantaneous_reward, reaction_xi1, reaction_xi2,
    regime_changes_in_beta, simulate, ClaimDistribution, ExpoGame, MarketParams, Party,
    PremiumPath, PremiumPoint, RateCurve, Regime, Reinsurer, SimConfig,
};

type Outcome = Result<String, String>;
type Criterion = (
    &'static str,
    &'static str,
    Option<Duration>,
    fn() -> Outcome,
);

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<String, String> {
    let msg = format!("{name} = {got:.7} (want {want} ± {tol:e})");
    if (got - want).abs() <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn all(parts: Vec<Result<String, String>>) -> Outcome {
    let ok = parts.iter().all(Result::is_ok);
    let text = parts
        .into_iter()
        .map(|r| match r {
            Ok(s) => s,
            Err(s) => format!("[x] {s}"),
        })
        .collect::<Vec<_>>()
        .join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ac1() -> Outcome {
    let p = MarketParams::baseline();
    let eq = constrained_equilibrium(&p, 0.0).map_err(err)?;
    let r = eq.response;
    all(vec![
        within("xi1", eq.xi1, 0.28269, 5e-5),
        within("xi2", eq.xi2, 0.38225, 5e-5),
        within("q", r.q, 0.2825, 5e-4),
        within("d", r.d, 2.3936, 5e-4),
        within("cap", r.cap, 0.6761, 5e-4),
        within("retention", r.retention_limit, 1.7175, 5e-4),
    ])
}

fn ac2() -> Outcome {
    let p = MarketParams::baseline();
    let eq = constrained_equilibrium(&p, 0.0).map_err(err)?;
    let game = ExpoGame::at(&p, 0.0).map_err(err)?;
    let lhs = 0.1 * 0.8f64.exp() / eq.xi1;
    let rhs = big_g(game.beta * eq.response.d, game.c_r1()).map_err(err)?;
    let pt = eq.point();
    let l1 = foc_residual_r1(&pt, &p).map_err(err)?;
    let l2 = foc_residual_r2(&pt, &p).map_err(err)?;
    all(vec![
        within("gamma_R1 e^0.8 / xi1 - G(beta d)", lhs - rhs, 0.0, 1e-6),
        within("|Lambda_R1|", l1.abs(), 0.0, 1e-8),
        within("|Lambda_R2|", l2.abs(), 0.0, 1e-8),
    ])
}

fn ac3() -> Outcome {
    let p = MarketParams::baseline();
    let rows = (0..=80)
        .map(|i| solve_point(&p, 0.1 * i as f64))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let (first, last) = (&rows[0], &rows[80]);
    let xi_up = rows
        .windows(2)
        .filter(|w| w[1].xi1 > w[0].xi1 || w[1].xi2 > w[0].xi2)
        .count();
    let p1_not_down = rows.windows(2).filter(|w| !(w[1].p1 < w[0].p1)).count();
    let p1_out = rows
        .iter()
        .filter(|r| !(0.2..=0.35).contains(&r.p1))
        .count();
    let count = |name: &str, n: usize| {
        let msg = format!("{name}: {n}");
        if n == 0 {
            Ok(msg)
        } else {
            Err(msg)
        }
    };
    all(vec![
        within("p2(0)", first.p2, 0.1262, 1.5e-3),
        within("p2(8)", last.p2, 0.1070, 1.5e-3),
        count("xi increases", xi_up),
        count("p1 non-decreases", p1_not_down),
        count("p1 outside [0.2, 0.35]", p1_out),
    ])
}

fn ac4() -> Outcome {
    let p = MarketParams::baseline();
    let changes = regime_changes_in_beta(&p, 0.0, 0.1, 6.0, 200).map_err(err)?;
    let mut betas: Vec<f64> = changes.iter().map(|c| c.beta).collect();
    betas.sort_by(f64::total_cmp);
    let beta_ref = [0.3141, 0.4247, 2.8269, 3.9610];
    let mu_ref = [3.1837, 2.3546, 0.3537, 0.2525];
    if betas.len() != 4 {
        return Err(format!("expected 4 regime changes, found {betas:?}"));
    }
    // gate in mu; beta deviations are reported alongside
    let mut parts: Vec<Result<String, String>> = betas
        .iter()
        .zip(mu_ref)
        .map(|(b, m)| within("mu", 1.0 / b, m, 2e-3))
        .collect();
    let devs: Vec<String> = betas
        .iter()
        .zip(beta_ref)
        .map(|(b, r)| format!("{b:.6} ({:+.1e})", b - r))
        .collect();
    parts.push(Ok(format!("beta thresholds {}", devs.join(", "))));
    all(parts)
}

fn ac5() -> Outcome {
    let mut xi1 = Vec::new();
    for beta in [0.5, 1.0, 2.0] {
        let p = MarketParams::baseline()
            .with_claims(ClaimDistribution::exponential(beta).map_err(err)?);
        let eq = constrained_equilibrium(&p, 0.0).map_err(err)?;
        if eq.regime != Regime::Interior {
            return Err(format!("beta = {beta} is {}", eq.regime));
        }
        xi1.push(eq.xi1);
    }
    let spread =
        xi1.iter().cloned().fold(f64::MIN, f64::max) - xi1.iter().cloned().fold(f64::MAX, f64::min);
    within("xi1 spread over beta", spread, 0.0, 1e-9)
}

fn grid_argmax(range: (f64, f64), f: impl Fn(f64) -> f64) -> f64 {
    let n = ((range.1 - range.0) / 1e-4).round() as usize;
    (0..=n)
        .map(|i| range.0 + 1e-4 * i as f64)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("non-empty grid")
}

fn ac6() -> Outcome {
    let p = MarketParams::baseline();
    let game = ExpoGame::at(&p, 0.0).map_err(err)?;
    let (lo, hi) = game.h1_domain();
    let mut curve = 0.0f64;
    for i in 1..=50 {
        let xi1 = lo + (hi - lo) * i as f64 / 51.0;
        curve = curve.max((reaction_xi2(xi1, &p, 0.0, false).map_err(err)? - game.h2(xi1)).abs());
        let xi2 = game.h1(xi1).map_err(err)?;
        curve = curve.max((reaction_xi1(xi2, &p, 0.0, false).map_err(err)? - xi1).abs());
    }
    let bx = admissible_box(&p);
    let mut argmax = 0.0f64;
    for other in [0.2, 0.38225, 0.6] {
        let root = reaction_xi1(other, &p, 0.0, false).map_err(err)?;
        let best = grid_argmax(bx.xi1, |x| {
            instantaneous_reward(&PremiumPoint::new(x, other, 0.0), &p, Reinsurer::R1).unwrap()
        });
        argmax = argmax.max((best - root).abs());
        let root = reaction_xi2(other, &p, 0.0, false).map_err(err)?;
        let best = grid_argmax(bx.xi2, |x| {
            instantaneous_reward(&PremiumPoint::new(other, x, 0.0), &p, Reinsurer::R2).unwrap()
        });
        argmax = argmax.max((best - root).abs());
    }
    all(vec![
        within("max reaction-curve gap (50 points)", curve, 0.0, 1e-6),
        within("max reward argmax gap", argmax, 0.0, 1e-4),
    ])
}

fn ac7() -> Outcome {
    let p = MarketParams::baseline();
    let mut parts = Vec::new();
    let sigmas = |path: &PremiumPath, q: &MarketParams, paths: usize, label: &str| -> Outcome {
        let closed = closed_form_objectives(path, q, 0.0, q.initial_surplus).map_err(err)?;
        let est = estimate_objectives(
            &simulate(path, q, &SimConfig::new(paths, 20240601)).map_err(err)?,
            q,
        )
        .map_err(err)?;
        let z: Vec<f64> = Party::ALL
            .into_iter()
            .map(|k| {
                let diff = est[k].value.objective - closed[k].objective;
                // deterministic surplus: no spread to scale by
                if est[k].se_objective == 0.0 && diff.abs() <= 1e-9 {
                    0.0
                } else {
                    diff / est[k].se_objective
                }
            })
            .collect();
        let msg = format!(
            "{label} z(J_I, J_R1, J_R2) = ({:.2}, {:.2}, {:.2})",
            z[0], z[1], z[2]
        );
        if z.iter().all(|z| z.abs() <= 3.0) {
            Ok(msg)
        } else {
            Err(msg)
        }
    };
    let eq_path = PremiumPath::equilibrium(&p, 801).map_err(err)?;
    parts.push(sigmas(&eq_path, &p, 100_000, "equilibrium"));
    parts.push(sigmas(
        &PremiumPath::NoReinsurance,
        &p,
        100_000,
        "no reinsurance",
    ));
    let mut q = p.clone();
    q.intensity = 0.0;
    let closed = closed_form_objectives(&eq_path, &q, 0.0, q.initial_surplus).map_err(err)?;
    let est = estimate_objectives(
        &simulate(&eq_path, &q, &SimConfig::new(8, 1)).map_err(err)?,
        &q,
    )
    .map_err(err)?;
    let gap = Party::ALL
        .into_iter()
        .map(|k| (est[k].value.objective - closed[k].objective).abs())
        .fold(0.0, f64::max);
    parts.push(within("lambda = 0 max |J_mc - J|", gap, 0.0, 1e-9));
    all(parts)
}

fn ac8() -> Outcome {
    let base = MarketParams::baseline();
    let eq0 = constrained_equilibrium(&base, 0.0).map_err(err)?;
    let h = 1e-5;
    let expected = [
        [1.0, 1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0, 1.0],
    ];
    let mut wrong = Vec::new();
    for (party, signs) in Party::ALL.into_iter().zip(expected) {
        for (kind, bump_rate) in [("gamma", false), ("rho", true)] {
            let mut p = base.clone();
            if bump_rate {
                p.rates[party] = RateCurve::constant(0.1 + h, 8.0).map_err(err)?;
            } else {
                p.risk_aversion[party] += h;
            }
            let eq = constrained_equilibrium(&p, 0.0).map_err(err)?;
            let diffs = [
                eq.xi1 - eq0.xi1,
                eq.xi2 - eq0.xi2,
                eq.response.q - eq0.response.q,
                eq.response.d - eq0.response.d,
            ];
            for ((out, dv), s) in ["xi1", "xi2", "q", "d"].iter().zip(diffs).zip(signs) {
                if !(dv * s > 0.0) {
                    wrong.push(format!("d{out}/d{kind}_{} = {dv:e}", party.label()));
                }
            }
        }
    }
    if wrong.is_empty() {
        Ok("24 finite-difference signs hold".into())
    } else {
        Err(wrong.join(", "))
    }
}

fn ac9() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_reins"))
        .args(["--command", "validate"])
        .env_remove("REINS_TOL")
        .output()
        .map_err(err)?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(err)?;
    let checks = report["checks"].as_array().cloned().unwrap_or_default();
    let passed = checks.iter().filter(|c| c["status"] == "pass").count();
    let msg = format!(
        "validate exit {:?}, {passed}/{} checks pass, failures {}",
        out.status.code(),
        checks.len(),
        report["failures"]
    );
    if out.status.code() == Some(0) && passed == checks.len() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "AC1",
            "equilibrium reproduction",
            Some(Duration::from_secs(1)),
            ac1,
        ),
        (
            "AC2",
            "consistency chain and FOC residuals",
            Some(Duration::from_secs(1)),
            ac2,
        ),
        ("AC3", "price trajectory", None, ac3),
        (
            "AC4",
            "regime thresholds",
            Some(Duration::from_secs(10)),
            ac4,
        ),
        ("AC5", "beta invariance", None, ac5),
        ("AC6", "cross-module oracle", None, ac6),
        (
            "AC7",
            "Monte Carlo vs closed form",
            Some(Duration::from_secs(60)),
            ac7,
        ),
        ("AC8", "sensitivity signs", None, ac8),
        ("AC9", "property suite via validate", None, ac9),
    ];
    let mut failed = 0;
    for (id, title, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let slow = limit.is_some_and(|l| elapsed > l);
        let (ok, detail) = match result {
            Ok(d) => (!slow, d),
            Err(d) => (false, d),
        };
        let budget = limit.map_or(String::new(), |l| format!(" < {}s", l.as_secs()));
        let timing = format!(
            "{:.3}s{budget}{}",
            elapsed.as_secs_f64(),
            if slow { " EXCEEDED" } else { "" }
        );
        println!(
            "{} {id} {title} [{timing}]: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("all 9 acceptance criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
