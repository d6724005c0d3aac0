use std::fs;
use std::io::Write;
use std::path::Path;

use gjr_cogarch::config::{EstimateMethod, InitMethod, RunConfig};
use gjr_cogarch::estimation::{
    attach_bootstrap_errors, empirical_moments, estimate_mom, estimate_pmle, forward_summary, mom_initial_guess,
    mom_invert, AcfFitOptions, EstimateReport, InitSource, PmleOptions,
};
use gjr_cogarch::first_jump::convergence_study;
use gjr_cogarch::io::{format_float, read_returns, write_csv, write_csv_to, Provenance};
use gjr_cogarch::model::{return_moments, sigma2_autocov, sigma2_moment, stationarity};
use gjr_cogarch::sim::simulate as simulate_path;
use gjr_cogarch::{Error, ParamSet, PsiValues, Result};

fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance { seed: cfg.seed, config_hash: cfg.hash().to_string() }
}

/// Writes to `output.path` when set, else to stdout.
fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<()> {
    match &cfg.output.path {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_csv(cfg: &RunConfig, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, &provenance(cfg), columns, rows)?;
    emit(cfg, &buf)
}

pub fn simulate(cfg: &RunConfig) -> Result<u8> {
    let params = cfg.params_or_err()?;
    let s = &cfg.sim;
    let path = simulate_path(&params, &cfg.levy, s.horizon, s.sigma2_0, cfg.seed_or_err()?)?;
    let points = (s.horizon / s.step + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=points).map(|i| i as f64 * s.step).collect();
    let rows: Vec<Vec<f64>> = path.sample(&times).iter().map(|p| vec![p.time, p.sigma2, p.g]).collect();
    emit_csv(cfg, &["time", "sigma2", "G"], &rows)?;
    if let Some(events) = &cfg.output.events {
        let rows: Vec<Vec<f64>> = path
            .events()
            .iter()
            .map(|e| vec![e.time, e.jump, e.sigma2_before, e.sigma2_after])
            .collect();
        write_csv(events, &provenance(cfg), &["time", "jump", "sigma2_before", "sigma2_after"], &rows)?;
    }
    Ok(0)
}

pub fn moments(cfg: &RunConfig) -> Result<u8> {
    let params = cfg.params_or_err()?;
    let levy = &cfg.levy;
    let m = &cfg.moments;
    let psi = PsiValues::new(&params, levy);
    let st = stationarity(&params, levy);
    let flag = |b: bool| if b { 1.0 } else { 0.0 };

    let mut rows: Vec<(&str, f64, Result<f64>)> = vec![
        ("psi1", 0.0, Ok(psi.psi1)),
        ("psi2", 0.0, Ok(psi.psi2)),
        ("log_condition", 0.0, Ok(flag(st.log_condition))),
        ("psi1_negative", 0.0, Ok(flag(st.psi1_negative))),
        ("psi2_negative", 0.0, Ok(flag(st.psi2_negative))),
        ("E_sigma2", 0.0, sigma2_moment(&params, levy, 1)),
        ("E_sigma4", 0.0, sigma2_moment(&params, levy, 2)),
    ];
    let ret = return_moments(&params, levy, m.r);
    if let Ok(ret) = &ret {
        rows.push(("E_G2", 0.0, Ok(ret.second)));
        rows.push(("E_G4", 0.0, ret.fourth_or_err()));
        rows.push(("var_G2", 0.0, ret.var_sq()));
        for j in 1..=m.lags {
            let lag = j as f64 * m.lag_step;
            rows.push(("cov_G", lag, ret.cov(lag)));
            rows.push(("cov_G2", lag, ret.cov_sq(lag)));
            rows.push(("cor_G2", lag, ret.cor_sq(lag)));
        }
    }
    for j in 0..=m.lags {
        let lag = j as f64 * m.lag_step;
        rows.push(("acov_sigma2", lag, sigma2_autocov(&params, levy, lag)));
    }

    let mut buf = Vec::new();
    writeln!(buf, "{}", provenance(cfg).comment_line())?;
    writeln!(buf, "# r={}", format_float(m.r))?;
    writeln!(buf, "quantity,lag,value")?;
    let mut skipped = Vec::new();
    for (name, lag, value) in rows {
        match value {
            Ok(v) => writeln!(buf, "{name},{},{}", format_float(lag), format_float(v))?,
            Err(e) => {
                if !skipped.iter().any(|(n, _)| *n == name) {
                    skipped.push((name, e.to_string()));
                }
            }
        }
    }
    if let Err(e) = ret {
        skipped.push(("return moments", e.to_string()));
    }
    for (name, why) in skipped {
        eprintln!("note: {name} omitted: {why}");
    }
    emit(cfg, &buf)?;
    Ok(0)
}

pub fn firstjump(cfg: &RunConfig) -> Result<u8> {
    let params = cfg.params_or_err()?;
    let fj = &cfg.firstjump;
    let sigma2_0 = match fj.sigma2_0 {
        Some(v) => v,
        None => sigma2_moment(&params, &cfg.levy, 1).map_err(|e| {
            Error::InvalidArgument(format!("{e}; set firstjump.sigma2_0 for a nonstationary model"))
        })?,
    };
    let levels = convergence_study(&params, &cfg.levy, fj.horizon, &fj.steps, fj.paths, sigma2_0, cfg.seed_or_err()?)?;
    let rows: Vec<Vec<f64>> = levels
        .iter()
        .map(|l| vec![l.level as f64, l.step, l.threshold, l.err_sigma2, l.err_g])
        .collect();
    emit_csv(cfg, &["n", "dt", "m", "err_sigma2", "err_G"], &rows)?;
    Ok(0)
}

enum Block {
    Report(EstimateReport, Option<InitSource>),
    Failed(&'static str, Error),
}

fn pmle_start(cfg: &RunConfig, series: &gjr_cogarch::ReturnSeries, acf: AcfFitOptions) -> Result<(ParamSet, Option<InitSource>)> {
    match cfg.estimate.init {
        InitMethod::Manual => Ok((cfg.params_or_err()?, None)),
        InitMethod::Mom => {
            let (summary, _) = empirical_moments(series, acf, cfg.levy.assumed_s())?;
            let (p, source) = mom_initial_guess(&summary)?;
            Ok((p, Some(source)))
        }
    }
}

fn block_lines(block: &Block) -> Vec<(String, String)> {
    match block {
        Block::Report(report, source) => {
            let mut kv = report.key_values();
            if let Some(s) = source {
                let name = match s {
                    InitSource::Moments => "moments",
                    InitSource::SymmetricMoments => "symmetric-moments",
                };
                kv.insert(1, ("init_source".into(), name.into()));
            }
            kv
        }
        Block::Failed(method, err) => vec![("method".into(), method.to_string()), ("error".into(), err.to_string())],
    }
}

fn json_value(v: &str) -> serde_json::Value {
    use serde_json::Value;
    match v {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => match v.parse::<f64>() {
            Ok(x) => serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number),
            Err(_) => Value::String(v.to_string()),
        },
    }
}

pub fn estimate(cfg: &RunConfig) -> Result<u8> {
    let est = &cfg.estimate;
    let input = est
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("no input series (estimate.input or --input)".into()))?;
    let series = read_returns(input, est.delta)?;
    let acf = AcfFitOptions { max_lag: est.max_lag };
    let opts = PmleOptions { pairing: est.pairing, rho_form: est.rho_form, starts: est.starts, ..Default::default() };

    let mut blocks = Vec::new();
    if matches!(est.method, EstimateMethod::Mom | EstimateMethod::Both) {
        let result = estimate_mom(&series, &cfg.levy, acf).and_then(|mut r| {
            if est.bootstrap > 0 {
                attach_bootstrap_errors(&mut r, &series, &cfg.levy, acf, &opts, est.bootstrap, cfg.seed_or_err()?)?;
            }
            Ok(r)
        });
        blocks.push(match result {
            Ok(r) => Block::Report(r, None),
            Err(e) => Block::Failed("mom", e),
        });
    }
    if matches!(est.method, EstimateMethod::Pmle | EstimateMethod::Both) {
        let result = pmle_start(cfg, &series, acf).and_then(|(init, source)| {
            let mut r = estimate_pmle(&series, &init, &cfg.levy, &opts)?;
            if est.bootstrap > 0 {
                attach_bootstrap_errors(&mut r, &series, &cfg.levy, acf, &opts, est.bootstrap, cfg.seed_or_err()?)?;
            }
            Ok((r, source))
        });
        blocks.push(match result {
            Ok((r, source)) => Block::Report(r, source),
            Err(e) => Block::Failed("pmle", e),
        });
    }

    let prov = provenance(cfg);
    let mut text = format!("{}\n", prov.comment_line());
    let mut json_blocks = Vec::new();
    for block in &blocks {
        let kv = block_lines(block);
        text.push('\n');
        for (k, v) in &kv {
            text.push_str(&format!("{k} = {v}\n"));
        }
        let obj: serde_json::Map<String, serde_json::Value> = kv.iter().map(|(k, v)| (k.clone(), json_value(v))).collect();
        json_blocks.push(serde_json::Value::Object(obj));
    }
    emit(cfg, text.as_bytes())?;
    if let Some(path) = &cfg.output.json {
        let doc = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "seed": cfg.seed,
            "config": cfg.hash(),
            "estimates": json_blocks,
        });
        write_json(path, &doc)?;
    }

    let mut code = 0;
    for block in &blocks {
        if let Block::Failed(_, e) = block {
            eprintln!("error: {e}");
            code = code.max(if matches!(e, Error::InfeasibleMoments(_)) { 2 } else { 1 });
        }
    }
    Ok(code)
}

fn write_json(path: &Path, doc: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Log-spaced grid of `n` points on `[a, b]`.
fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

pub fn mom_roundtrip(cfg: &RunConfig) -> Result<u8> {
    let n = cfg.roundtrip.points;
    let s = cfg.roundtrip.s;
    let gammas: Vec<f64> = (0..n).map(|i| 0.9 * i as f64 / (n - 1) as f64).collect();
    let (mut sets, mut failures, mut worst) = (0usize, 0usize, (0.0f64, String::new()));
    for theta in log_grid(0.01, 1.0, n) {
        for p in log_grid(0.005, 0.5, n) {
            for ratio in log_grid(0.03, 1.5, n) {
                for &gamma in &gammas {
                    for delta in log_grid(0.1, 5.0, n) {
                        let phi = ratio * p;
                        let params = ParamSet::new(theta, p + phi * (1.0 + gamma * gamma), phi, gamma)?;
                        if PsiValues::from_moments(&params, 1.0, s).psi2 >= 0.0 {
                            continue;
                        }
                        sets += 1;
                        match forward_summary(&params, s, delta).and_then(|m| mom_invert(&m)) {
                            Ok((back, _)) => {
                                for (a, b) in back.as_array().iter().zip(params.as_array()) {
                                    let e = if b == 0.0 { a.abs() } else { (a / b - 1.0).abs() };
                                    if e > worst.0 {
                                        worst = (e, format!("theta={theta} eta={} phi={phi} gamma={gamma} delta={delta}", params.eta()));
                                    }
                                }
                            }
                            Err(_) => failures += 1,
                        }
                    }
                }
            }
        }
    }
    let text = format!(
        "{}\nsets = {sets}\nfailures = {failures}\nmax_rel_error = {}\nworst = {}\n",
        provenance(cfg).comment_line(),
        format_float(worst.0),
        worst.1
    );
    emit(cfg, text.as_bytes())?;
    Ok(if failures > 0 { 1 } else { 0 })
}
