//! `name = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Unknown or repeated keys are
//! errors that name the line. Keys left out take the base values.

use std::collections::HashMap;
use std::fmt;

use reins_core::{
    BoundConvention, ClaimDistribution, GenericClaims, MarketParams, Party, PerParty, RateCurve,
};

/// The base parameter set, shipped with the binary.
pub const DEFAULT_CONFIG: &str = "\
# base market
T = 8
t = 0
lambda = 1
theta = 0.1
eta = 0.9
beta = 1
gamma_I = 0.1
gamma_R1 = 0.1
gamma_R2 = 0.1
rho_I = 0.1
rho_R1 = 0.1
rho_R2 = 0.1
x0_I = 1
x0_R1 = 10
x0_R2 = 10
bounds = section4
";

const KEYS: &[&str] = &[
    "T", "t", "lambda", "theta", "eta", "beta", "mu", "claims", "gamma_I", "gamma_R1", "gamma_R2",
    "rho_I", "rho_R1", "rho_R2", "x0_I", "x0_R1", "x0_R2", "bounds", "alpha", "sigma",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration: market data and the evaluation time.
#[derive(Debug, Clone)]
pub struct RunParams {
    pub params: MarketParams,
    pub t: f64,
}

#[derive(Debug)]
enum RateSpec {
    Constant(f64),
    Steps(Vec<(f64, f64)>),
}

pub fn parse_config(text: &str) -> Result<RunParams, ConfigError> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| {
            ConfigError::at(line, format!("expected `name = value`, got `{body}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::at(line, format!("unknown key `{key}`")));
        };
        if value.is_empty() {
            return Err(ConfigError::at(line, format!("missing value for `{key}`")));
        }
        if let Some((first, _)) = entries.insert(known, (line, value)) {
            return Err(ConfigError::at(
                line,
                format!("duplicate key `{key}` (first set on line {first})"),
            ));
        }
    }

    let number = |key: &str, default: f64| -> Result<f64, ConfigError> {
        match entries.get(key) {
            None => Ok(default),
            Some(&(line, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    ConfigError::at(line, format!("`{key}` must be a finite number, got `{v}`"))
                }),
        }
    };

    let base = MarketParams::baseline();
    let horizon = number("T", base.horizon)?;
    if !(horizon > 0.0) {
        return Err(ConfigError::at(
            entries["T"].0,
            format!("`T` must be positive, got {horizon}"),
        ));
    }
    let t = number("t", 0.0)?;
    if !(0.0..=horizon).contains(&t) {
        let line = entries.get("t").map(|e| e.0);
        return Err(ConfigError {
            line,
            message: format!("`t` must lie in [0, {horizon}], got {t}"),
        });
    }

    let claims = claims_from(&entries)?;
    let mut rates = Vec::with_capacity(3);
    for key in ["rho_I", "rho_R1", "rho_R2"] {
        let curve = match entries.get(key) {
            None => RateCurve::constant(0.1, horizon).map_err(|e| ConfigError {
                line: None,
                message: e.to_string(),
            }),
            Some(&(line, v)) => {
                let spec =
                    parse_rate(v).map_err(|m| ConfigError::at(line, format!("`{key}`: {m}")))?;
                match spec {
                    RateSpec::Constant(r) => RateCurve::constant(r, horizon),
                    RateSpec::Steps(s) => RateCurve::piecewise(s, horizon),
                }
                .map_err(|e| ConfigError::at(line, format!("`{key}`: {e}")))
            }
        };
        rates.push(curve?);
    }
    let rates: [RateCurve; 3] = rates.try_into().expect("three curves");
    let [rate_i, rate_1, rate_2] = rates;

    let bounds = match entries.get("bounds") {
        None => BoundConvention::Section4,
        Some(&(line, v)) => match v.to_ascii_lowercase().as_str() {
            "section4" => BoundConvention::Section4,
            "definition21" => BoundConvention::Definition21,
            _ => {
                return Err(ConfigError::at(
                    line,
                    format!("`bounds` must be section4 or definition21, got `{v}`"),
                ))
            }
        },
    };

    let params = MarketParams {
        horizon,
        intensity: number("lambda", base.intensity)?,
        insurer_loading: number("theta", base.insurer_loading)?,
        loading_cap: number("eta", base.loading_cap)?,
        risk_aversion: PerParty::new(
            number("gamma_I", base.risk_aversion.insurer)?,
            number("gamma_R1", base.risk_aversion.reinsurer1)?,
            number("gamma_R2", base.risk_aversion.reinsurer2)?,
        ),
        rates: PerParty::new(rate_i, rate_1, rate_2),
        claims,
        initial_surplus: PerParty::new(
            number("x0_I", base.initial_surplus.insurer)?,
            number("x0_R1", base.initial_surplus.reinsurer1)?,
            number("x0_R2", base.initial_surplus.reinsurer2)?,
        ),
        bounds,
    };
    if let Err(e) = params.validate() {
        let line = match &e {
            reins_core::Error::InvalidParameter { name, .. } => {
                let key = match *name {
                    "x0" => "x0_I",
                    "claims" => "claims",
                    other => other,
                };
                entries.get(key).map(|e| e.0)
            }
            _ => None,
        };
        return Err(ConfigError {
            line,
            message: e.to_string(),
        });
    }
    Ok(RunParams { params, t })
}

fn claims_from(entries: &HashMap<&str, (usize, &str)>) -> Result<ClaimDistribution, ConfigError> {
    let set: Vec<&str> = ["beta", "mu", "claims"]
        .into_iter()
        .filter(|k| entries.contains_key(k))
        .collect();
    if set.len() > 1 {
        let line = set.iter().map(|k| entries[k].0).max();
        return Err(ConfigError {
            line,
            message: format!("claim law set more than once ({})", set.join(", ")),
        });
    }
    let Some(&key) = set.first() else {
        return Ok(ClaimDistribution::Exponential { rate: 1.0 });
    };
    let (line, v) = entries[key];
    let err = |m: String| ConfigError::at(line, m);
    match key {
        "beta" | "mu" => {
            let x: f64 = v
                .parse()
                .map_err(|_| err(format!("`{key}` must be a number, got `{v}`")))?;
            if !(x > 0.0 && x.is_finite()) {
                return Err(err(format!("`{key}` must be positive, got {x}")));
            }
            let rate = if key == "mu" { 1.0 / x } else { x };
            ClaimDistribution::exponential(rate).map_err(|e| err(e.to_string()))
        }
        _ => parse_claims(v).map_err(err),
    }
}

fn parse_claims(v: &str) -> Result<ClaimDistribution, String> {
    let v = v.replace(' ', "");
    let (name, rest) = v
        .split_once('(')
        .ok_or_else(|| format!("expected `law(args)`, got `{v}`"))?;
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("missing `)` in `{v}`"))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|a| {
            a.parse::<f64>()
                .map_err(|_| format!("bad argument `{a}` in `{v}`"))
        })
        .collect::<Result<_, _>>()?;
    let want = |n: usize| {
        if nums.len() == n {
            Ok(())
        } else {
            Err(format!(
                "`{name}` takes {n} argument(s), got {}",
                nums.len()
            ))
        }
    };
    match name {
        "exponential" => {
            want(1)?;
            ClaimDistribution::exponential(nums[0]).map_err(|e| e.to_string())
        }
        "uniform" => {
            want(2)?;
            Ok(ClaimDistribution::Generic(
                GenericClaims::uniform(nums[0], nums[1]).map_err(|e| e.to_string())?,
            ))
        }
        "erlang" => {
            want(2)?;
            if nums[0].fract() != 0.0 || nums[0] < 1.0 || nums[0] > u32::MAX as f64 {
                return Err(format!(
                    "erlang shape must be a positive integer, got {}",
                    nums[0]
                ));
            }
            Ok(ClaimDistribution::Generic(
                GenericClaims::erlang(nums[0] as u32, nums[1]).map_err(|e| e.to_string())?,
            ))
        }
        other => Err(format!(
            "unknown claim law `{other}` (expected exponential, uniform or erlang)"
        )),
    }
}

fn parse_rate(v: &str) -> Result<RateSpec, String> {
    if let Ok(r) = v.parse::<f64>() {
        return Ok(RateSpec::Constant(r));
    }
    let inner = v
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("expected a number or `[(start, rate), ...]`, got `{v}`"))?;
    let mut steps = Vec::new();
    for chunk in inner.split(')') {
        let chunk = chunk.trim().trim_start_matches(',').trim();
        if chunk.is_empty() {
            continue;
        }
        let pair = chunk
            .strip_prefix('(')
            .ok_or_else(|| format!("expected `(start, rate)`, got `{chunk}`"))?;
        let (a, b) = pair
            .split_once(',')
            .ok_or_else(|| format!("expected `(start, rate)`, got `({pair})`"))?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad start `{}`", a.trim()))?;
        let b: f64 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad rate `{}`", b.trim()))?;
        steps.push((a, b));
    }
    if steps.is_empty() {
        return Err("empty rate list".into());
    }
    Ok(RateSpec::Steps(steps))
}

/// Whether `run` is the base market at `t = 0`.
pub fn is_reference(run: &RunParams) -> bool {
    let p = &run.params;
    let flat = |party: Party| p.rates[party].segments() == [(0.0, 0.1)];
    run.t == 0.0
        && p.horizon == 8.0
        && p.intensity == 1.0
        && p.insurer_loading == 0.1
        && p.loading_cap == 0.9
        && p.claims.exponential_rate() == Some(1.0)
        && p.bounds == BoundConvention::Section4
        && Party::ALL
            .into_iter()
            .all(|q| p.risk_aversion[q] == 0.1 && flat(q))
}
