//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, sections are key prefixes
//! (`params.theta`, `levy.rate`, `sim.horizon`, ...). The driver may also be
//! given inline as `levy = { kind = compound-poisson, rate = 1, jumps = standard-normal }`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::first_jump::InnovationPairing;
use crate::levy::{DriverKind, JumpDist, LevySpec, SConvention};
use crate::model::ParamSet;
use crate::sim::Sigma2Init;
use crate::estimation::RhoForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Moments,
    FirstJump,
    Estimate,
    MomRoundtrip,
}

impl Command {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => Command::Simulate,
            "moments" => Command::Moments,
            "firstjump" => Command::FirstJump,
            "estimate" => Command::Estimate,
            "mom-roundtrip" => Command::MomRoundtrip,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Moments => "moments",
            Command::FirstJump => "firstjump",
            Command::Estimate => "estimate",
            Command::MomRoundtrip => "mom-roundtrip",
        }
    }

    fn stochastic(&self) -> bool {
        matches!(self, Command::Simulate | Command::FirstJump)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Mom,
    Pmle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    Mom,
    Manual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub horizon: f64,
    /// Spacing of the output grid.
    pub step: f64,
    pub sigma2_0: Sigma2Init,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSettings {
    /// Return interval `r`.
    pub r: f64,
    /// Number of lags in the autocovariance tables.
    pub lags: usize,
    pub lag_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstJumpSettings {
    pub horizon: f64,
    pub steps: Vec<f64>,
    pub paths: usize,
    /// `None` uses the stationary mean of `σ²`.
    pub sigma2_0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSettings {
    pub input: Option<PathBuf>,
    pub delta: Option<f64>,
    pub method: EstimateMethod,
    pub init: InitMethod,
    pub pairing: InnovationPairing,
    pub rho_form: RhoForm,
    pub bootstrap: usize,
    pub max_lag: Option<usize>,
    pub starts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripSettings {
    /// Grid points per parameter axis.
    pub points: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: Option<u64>,
    pub params: Option<ParamSet>,
    pub levy: LevySpec,
    pub sim: SimSettings,
    pub moments: MomentSettings,
    pub firstjump: FirstJumpSettings,
    pub estimate: EstimateSettings,
    pub roundtrip: RoundtripSettings,
    pub output: OutputSettings,
    hash: String,
}

impl RunConfig {
    /// First 16 hex digits of the SHA-256 of the normalized assignments,
    /// output locations excluded.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn params_or_err(&self) -> Result<ParamSet> {
        self.params.ok_or_else(|| Error::InvalidArgument("params.* are required for this command".into()))
    }

    pub fn seed_or_err(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::InvalidArgument("seed is required for this command".into()))
    }
}

const KEYS: &[&str] = &[
    "command",
    "seed",
    "params.theta",
    "params.eta",
    "params.phi",
    "params.gamma",
    "levy.kind",
    "levy.rate",
    "levy.jumps",
    "levy.normalize",
    "levy.s",
    "sim.horizon",
    "sim.step",
    "sim.sigma2_0",
    "moments.r",
    "moments.lags",
    "moments.lag_step",
    "firstjump.horizon",
    "firstjump.steps",
    "firstjump.paths",
    "firstjump.sigma2_0",
    "estimate.input",
    "estimate.delta",
    "estimate.method",
    "estimate.init",
    "estimate.pairing",
    "estimate.rho_form",
    "estimate.bootstrap",
    "estimate.max_lag",
    "estimate.starts",
    "roundtrip.points",
    "roundtrip.s",
    "output.path",
    "output.events",
    "output.json",
];

/// Raw assignments with their line numbers.
#[derive(Debug, Default)]
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn insert(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(parse_err(line, format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(parse_err(line, format!("missing value for '{key}'")));
        }
        if let Some((first, _)) = self.0.insert(key.to_string(), (line, value.to_string())) {
            return Err(parse_err(line, format!("'{key}' already set on line {first}")));
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.0.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn get<T>(&self, key: &str, parse: impl Fn(&str) -> Option<T>, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => parse(v)
                .map(Some)
                .ok_or_else(|| parse_err(line, format!("{key}: expected {what}, got '{v}'"))),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.raw(key).map_or(0, |(l, _)| l)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn positive(s: &str) -> Option<f64> {
    float(s).filter(|v| *v > 0.0)
}

fn count(s: &str) -> Option<usize> {
    s.parse().ok()
}

fn boolean(s: &str) -> Option<bool> {
    s.parse().ok()
}

fn path(s: &str) -> Option<PathBuf> {
    Some(PathBuf::from(s.trim_matches('"')))
}

fn jump_dist(s: &str) -> Option<JumpDist> {
    let arg = |name: &str| -> Option<f64> {
        s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')').and_then(positive)
    };
    match s {
        "standard-normal" => Some(JumpDist::StandardNormal),
        _ => arg("scaled-normal")
            .map(|sd| JumpDist::ScaledNormal { sd })
            .or_else(|| arg("two-point").map(|a| JumpDist::TwoPoint { a })),
    }
}

fn s_convention(s: &str) -> Option<SConvention> {
    match s {
        "pseudo" => Some(SConvention::Pseudo),
        "true" => Some(SConvention::True),
        _ => positive(s).map(SConvention::Fixed),
    }
}

fn sigma2_init(s: &str) -> Option<Sigma2Init> {
    match s {
        "stationary" => Some(Sigma2Init::Stationary),
        _ => positive(s).map(Sigma2Init::Value),
    }
}

fn float_list(s: &str) -> Option<Vec<f64>> {
    let v: Option<Vec<f64>> = s.split(',').map(|x| positive(x.trim())).collect();
    v.filter(|v| !v.is_empty())
}

/// Splits `a = 1, b = f(2, 3)` at top-level commas.
fn split_inline(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    parts.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect()
}

fn collect(text: &str) -> Result<Entries> {
    let mut entries = Entries::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "levy" && value.starts_with('{') {
            let body = value
                .strip_prefix('{')
                .and_then(|v| v.strip_suffix('}'))
                .ok_or_else(|| parse_err(line, "unterminated '{' in levy"))?;
            for part in split_inline(body) {
                let (k, v) = part
                    .split_once('=')
                    .or_else(|| part.split_once(':'))
                    .ok_or_else(|| parse_err(line, format!("expected 'key = value' in levy, got '{part}'")))?;
                entries.insert(line, &format!("levy.{}", k.trim()), v.trim())?;
            }
        } else {
            entries.insert(line, key, value)?;
        }
    }
    Ok(entries)
}

fn config_hash(entries: &Entries) -> String {
    let mut hasher = Sha256::new();
    for (k, (_, v)) in entries.0.iter().filter(|(k, _)| !k.starts_with("output.")) {
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(v.as_bytes());
        hasher.update(b"\n");
    }
    hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn parse_params(e: &Entries) -> Result<Option<ParamSet>> {
    let names = ["params.theta", "params.eta", "params.phi", "params.gamma"];
    let mut values = [None; 4];
    for (slot, key) in values.iter_mut().zip(names) {
        *slot = e.get(key, float, "a number")?;
    }
    match values {
        [None, None, None, None] => Ok(None),
        [Some(theta), Some(eta), Some(phi), Some(gamma)] => {
            let line = |k: &str| e.line(k);
            if !(0.0..1.0).contains(&gamma) {
                return Err(parse_err(line("params.gamma"), format!("gamma must lie in [0,1), got {gamma}")));
            }
            for (key, v) in [("params.theta", theta), ("params.eta", eta), ("params.phi", phi)] {
                if v <= 0.0 {
                    return Err(parse_err(line(key), format!("{} must be positive, got {v}", &key[7..])));
                }
            }
            ParamSet::new(theta, eta, phi, gamma)
                .map(Some)
                .map_err(|err| parse_err(line("params.theta"), err.to_string()))
        }
        _ => {
            let missing: Vec<_> = names.iter().zip(values).filter(|(_, v)| v.is_none()).map(|(k, _)| *k).collect();
            Err(parse_err(0, format!("incomplete parameter set, missing {}", missing.join(", "))))
        }
    }
}

fn parse_levy(e: &Entries) -> Result<LevySpec> {
    if let Some((line, kind)) = e.raw("levy.kind") {
        if kind != "compound-poisson" {
            return Err(parse_err(line, format!("levy.kind: unsupported driver '{kind}'")));
        }
    }
    let _ = DriverKind::CompoundPoisson;
    let rate = e.get("levy.rate", positive, "a positive number")?.unwrap_or(1.0);
    let jumps = e
        .get("levy.jumps", jump_dist, "standard-normal, scaled-normal(s) or two-point(a)")?
        .unwrap_or(JumpDist::StandardNormal);
    let normalize = e.get("levy.normalize", boolean, "true or false")?.unwrap_or(true);
    let s = e.get("levy.s", s_convention, "pseudo, true or a positive number")?.unwrap_or(SConvention::Pseudo);
    let line = e.line("levy.jumps").max(e.line("levy.rate"));
    let spec = if normalize {
        LevySpec::compound_poisson(rate, jumps)
    } else {
        LevySpec::compound_poisson_unnormalized(rate, jumps)
    }
    .map_err(|err| parse_err(line, err.to_string()))?;
    spec.with_s_convention(s).map_err(|err| parse_err(e.line("levy.s"), err.to_string()))
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = collect(text)?;
    let command = match e.raw("command") {
        None => return Err(parse_err(0, "missing 'command'")),
        Some((line, c)) => Command::parse(c).ok_or_else(|| {
            parse_err(line, format!("unknown command '{c}' (simulate, moments, firstjump, estimate, mom-roundtrip)"))
        })?,
    };
    let seed = e.get("seed", |s| s.parse::<u64>().ok(), "a 64-bit unsigned integer")?;
    if command.stochastic() && seed.is_none() {
        return Err(parse_err(0, format!("'seed' is required for {}", command.name())));
    }
    let params = parse_params(&e)?;
    if params.is_none() && matches!(command, Command::Simulate | Command::Moments | Command::FirstJump) {
        return Err(parse_err(0, format!("params.theta/eta/phi/gamma are required for {}", command.name())));
    }
    let levy = parse_levy(&e)?;

    let sim = SimSettings {
        horizon: e.get("sim.horizon", positive, "a positive number")?.unwrap_or(1000.0),
        step: e.get("sim.step", positive, "a positive number")?.unwrap_or(1.0),
        sigma2_0: e.get("sim.sigma2_0", sigma2_init, "'stationary' or a positive number")?.unwrap_or(Sigma2Init::Stationary),
    };
    let moments = MomentSettings {
        r: e.get("moments.r", positive, "a positive number")?.unwrap_or(1.0),
        lags: e.get("moments.lags", count, "a non-negative integer")?.unwrap_or(50),
        lag_step: 0.0,
    };
    let moments = MomentSettings {
        lag_step: e.get("moments.lag_step", positive, "a positive number")?.unwrap_or(moments.r),
        ..moments
    };
    if moments.lag_step < moments.r && moments.lags > 0 {
        return Err(parse_err(e.line("moments.lag_step"), "moments.lag_step must be at least moments.r"));
    }
    let firstjump = FirstJumpSettings {
        horizon: e.get("firstjump.horizon", positive, "a positive number")?.unwrap_or(10.0),
        steps: e
            .get("firstjump.steps", float_list, "a comma-separated list of positive numbers")?
            .unwrap_or_else(|| vec![0.5, 0.1, 0.02, 0.004]),
        paths: e.get("firstjump.paths", count, "a positive integer")?.unwrap_or(200),
        sigma2_0: match e.get("firstjump.sigma2_0", sigma2_init, "'stationary' or a positive number")? {
            None | Some(Sigma2Init::Stationary) => None,
            Some(Sigma2Init::Value(v)) => Some(v),
        },
    };
    if firstjump.paths == 0 {
        return Err(parse_err(e.line("firstjump.paths"), "firstjump.paths must be positive"));
    }
    let estimate = EstimateSettings {
        input: e.get("estimate.input", path, "a path")?,
        delta: e.get("estimate.delta", positive, "a positive number")?,
        method: e
            .get(
                "estimate.method",
                |s| match s {
                    "mom" => Some(EstimateMethod::Mom),
                    "pmle" => Some(EstimateMethod::Pmle),
                    "both" => Some(EstimateMethod::Both),
                    _ => None,
                },
                "mom, pmle or both",
            )?
            .unwrap_or(EstimateMethod::Both),
        init: e
            .get(
                "estimate.init",
                |s| match s {
                    "mom" => Some(InitMethod::Mom),
                    "manual" => Some(InitMethod::Manual),
                    _ => None,
                },
                "mom or manual",
            )?
            .unwrap_or(InitMethod::Mom),
        pairing: e
            .get(
                "estimate.pairing",
                |s| match s {
                    "contemporaneous" => Some(InnovationPairing::Contemporaneous),
                    "lagged" => Some(InnovationPairing::Lagged),
                    _ => None,
                },
                "contemporaneous or lagged",
            )?
            .unwrap_or_default(),
        rho_form: e
            .get(
                "estimate.rho_form",
                |s| match s {
                    "printed" => Some(RhoForm::AsPrinted),
                    "exact-decay" => Some(RhoForm::ExactDecay),
                    _ => None,
                },
                "printed or exact-decay",
            )?
            .unwrap_or_default(),
        bootstrap: e.get("estimate.bootstrap", count, "a non-negative integer")?.unwrap_or(0),
        max_lag: e.get("estimate.max_lag", count, "a positive integer")?,
        starts: e.get("estimate.starts", count, "a positive integer")?.unwrap_or(1).max(1),
    };
    if command == Command::Estimate {
        if estimate.init == InitMethod::Manual && params.is_none() && estimate.method != EstimateMethod::Mom {
            return Err(parse_err(e.line("estimate.init"), "estimate.init = manual needs params.*"));
        }
        if estimate.bootstrap > 0 && seed.is_none() {
            return Err(parse_err(e.line("estimate.bootstrap"), "'seed' is required for bootstrap standard errors"));
        }
        if let Some(p) = &estimate.input {
            if !p.exists() {
                return Err(parse_err(e.line("estimate.input"), format!("input file {} does not exist", p.display())));
            }
        }
    }
    let roundtrip = RoundtripSettings {
        points: e.get("roundtrip.points", count, "a positive integer")?.unwrap_or(4).max(2),
        s: e.get("roundtrip.s", positive, "a positive number")?.unwrap_or(3.0),
    };
    let output = OutputSettings {
        path: e.get("output.path", path, "a path")?,
        events: e.get("output.events", path, "a path")?,
        json: e.get("output.json", path, "a path")?,
    };
    Ok(RunConfig {
        command,
        seed,
        params,
        levy,
        sim,
        moments,
        firstjump,
        estimate,
        roundtrip,
        output,
        hash: config_hash(&e),
    })
}
