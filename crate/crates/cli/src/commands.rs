use boundary_lab::boundary::{
    boundary_point, contraction_diameter, estimate_flag, relevant_spectra, stationarity_defect,
    triviality_report,
};
use boundary_lab::padic_linalg::{Flag, ParabolicSpec};
use boundary_lab::places::{format_rational, height_ball_profile};
use boundary_lab::walk_engine::{
    estimate_lyapunov, lln_residual, sample_path_stream, ConvolutionSequence, LyapunovSpectrum,
    MeasureSpec,
};
use boundary_lab::Place;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{fmt_f64, Report};
use crate::{CliError, Command, RunConfig};

/// Streams of the lln sample paths, disjoint from those the library uses.
const LLN_STREAMS: u64 = 1 << 40;

/// Run the configured command. The second value carries a budget overflow
/// that cut a sweep short; the partial report is still worth writing.
pub fn execute(
    config: &RunConfig,
    mu: Option<&MeasureSpec>,
) -> Result<(Report, Option<CliError>), CliError> {
    let need = || mu.expect("measure loaded for this command");
    let report = match config.command {
        Command::Places => places(config, need())?,
        Command::Lyapunov => lyapunov(config, need())?,
        Command::Flag => flag(config, need())?,
        Command::Lln => lln(config, need())?,
        Command::Stationarity => stationarity(config, need())?,
        Command::Contraction => contraction(config, need())?,
        Command::Triviality => triviality(config, need())?,
        Command::Entropy => return entropy(config, need()),
        Command::Ballcount => ballcount(config)?,
    };
    Ok((report, None))
}

fn header(config: &RunConfig, mu: &MeasureSpec) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(config.command.name()));
    m.insert(
        "measure".into(),
        json!({
            "name": mu.name(),
            "dim": mu.dim(),
            "sha256": config.measure.as_ref().map(|r| r.sha256.clone()),
        }),
    );
    m.insert("seed".into(), json!(config.seed));
    m
}

fn finish(mut head: serde_json::Map<String, Value>, body: Value) -> Value {
    if let Value::Object(fields) = body {
        head.extend(fields);
    }
    Value::Object(head)
}

/// Relevant places, or the `--place` override (warning on places that are not relevant).
fn target_places(config: &RunConfig, mu: &MeasureSpec) -> Result<Vec<Place>, CliError> {
    let relevant = mu.relevant_places().map_err(CliError::core("--measure"))?;
    if config.places.is_empty() {
        return Ok(relevant.places());
    }
    let mut out = Vec::new();
    for &p in &config.places {
        if !relevant.places().contains(&p) {
            eprintln!(
                "warning: --place {p} is not a relevant place of '{}' (relevant: {relevant}); \
                 every atom is an isometry there",
                mu.name()
            );
        }
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `n/4, n/2, n`, deduplicated, at least 1.
fn horizons(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [n / 4, n / 2, n].into_iter().map(|k| k.max(1)).collect();
    v.dedup();
    v
}

fn spectrum(
    config: &RunConfig,
    mu: &MeasureSpec,
    place: Place,
) -> Result<LyapunovSpectrum, CliError> {
    estimate_lyapunov(mu, place, config.n, config.trials, config.seed)
        .map_err(CliError::core(format!("lyapunov at {place}")))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn median(v: &[f64]) -> f64 {
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Nearest-rank quantile of sorted data.
fn quantile(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let rank = (q * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

/// `+∞` becomes JSON `null`.
fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn places(config: &RunConfig, mu: &MeasureSpec) -> Result<Report, CliError> {
    let relevant = mu.relevant_places().map_err(CliError::core("--measure"))?;
    let rows = relevant
        .places()
        .iter()
        .map(|p| {
            let kind = if p.is_finite() {
                "finite"
            } else {
                "archimedean"
            };
            vec![p.to_string(), kind.to_string()]
        })
        .collect();
    let body = json!({ "atoms": mu.len(), "relevant_places": relevant });
    Ok(Report {
        json: finish(header(config, mu), body),
        header: vec!["place", "kind"],
        rows,
    })
}

fn lyapunov(config: &RunConfig, mu: &MeasureSpec) -> Result<Report, CliError> {
    let spectra = target_places(config, mu)?
        .into_iter()
        .map(|p| spectrum(config, mu, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for s in &spectra {
        for i in 0..s.dim() {
            rows.push(vec![
                s.place().to_string(),
                (i + 1).to_string(),
                fmt_f64(s.exponents()[i]),
                fmt_f64(s.std_errors()[i]),
                s.log_p_units()
                    .map(|u| format_rational(&u[i]))
                    .unwrap_or_default(),
            ]);
        }
    }
    let body = json!({ "n": config.n, "trials": config.trials, "spectra": spectra });
    Ok(Report {
        json: finish(header(config, mu), body),
        header: vec![
            "place",
            "index (dimensionless)",
            "exponent (nats/step)",
            "std_error (nats/step)",
            "exponent (ln p units, exact)",
        ],
        rows,
    })
}

fn flag(config: &RunConfig, mu: &MeasureSpec) -> Result<Report, CliError> {
    let mut spectra = relevant_spectra(mu, config.n, config.trials, config.seed)
        .map_err(CliError::core("lyapunov"))?;
    let targets = target_places(config, mu)?;
    for &p in &targets {
        if !spectra.iter().any(|s| s.place() == p) {
            spectra.push(spectrum(config, mu, p)?);
        }
    }
    let mut point = boundary_point(mu, &spectra, config.n, config.seed, config.gap)
        .map_err(CliError::core("flag"))?;
    point.places.retain(|b| targets.contains(&b.place));

    let mut rows = Vec::new();
    for b in &point.places {
        let flag = serde_json::to_value(&b.flag).expect("plain data");
        for (level, dim) in b.flag.dims().iter().enumerate() {
            rows.push(vec![
                b.place.to_string(),
                (level + 1).to_string(),
                dim.to_string(),
                fmt_f64(b.residual),
                flag["matrices"][level].to_string(),
            ]);
        }
    }
    let body =
        json!({ "n": config.n, "trials": config.trials, "gap": config.gap, "boundary": point });
    Ok(Report {
        json: finish(header(config, mu), body),
        header: vec![
            "place",
            "level (dimensionless)",
            "dim (dimensionless)",
            "residual (nats/step)",
            "basis",
        ],
        rows,
    })
}

fn lln(config: &RunConfig, mu: &MeasureSpec) -> Result<Report, CliError> {
    if config.samples == 0 {
        return Err(CliError::Config("--samples must be at least 1".into()));
    }
    let grid = horizons(config.n);
    let mut per_place = Vec::new();
    let mut rows = Vec::new();
    for place in target_places(config, mu)? {
        let spec = spectrum(config, mu, place)?.parabolic(config.gap);
        let wrong = Flag::reversed_coordinate(place, spec.dims())
            .map_err(CliError::core("wrong-flag control"))?;
        // Per path: (residual, wrong-flag residual) at each horizon.
        let per_path = (0..config.samples as u64)
            .into_par_iter()
            .map(|j| {
                let path = sample_path_stream(mu, config.n, config.seed, LLN_STREAMS + j);
                grid.iter()
                    .map(|&k| {
                        let b = estimate_flag(&path, &spec, k)?;
                        Ok((
                            lln_residual(&path, &b, &spec, k)?,
                            lln_residual(&path, &wrong, &spec, k)?,
                        ))
                    })
                    .collect::<boundary_lab::Result<Vec<_>>>()
            })
            .collect::<boundary_lab::Result<Vec<_>>>()
            .map_err(CliError::core(format!("lln at {place}")))?;

        let mut sweep = Vec::new();
        for (i, &k) in grid.iter().enumerate() {
            let right = sorted(per_path.iter().map(|r| r[i].0).collect());
            let wrong = sorted(per_path.iter().map(|r| r[i].1).collect());
            let (med, q90, wmed) = (median(&right), quantile(&right, 0.9), median(&wrong));
            rows.push(vec![
                place.to_string(),
                k.to_string(),
                fmt_f64(med),
                fmt_f64(q90),
                fmt_f64(wmed),
            ]);
            sweep.push(json!({
                "n": k,
                "median_nats_per_step": med,
                "q90_nats_per_step": q90,
                "wrong_flag_median_nats_per_step": wmed,
            }));
        }
        per_place.push(json!({ "place": place, "block_dims": spec.dims(), "sweep": sweep }));
    }
    let body = json!({
        "trials": config.trials,
        "samples": config.samples,
        "gap": config.gap,
        "places": per_place,
    });
    Ok(Report {
        json: finish(header(config, mu), body),
        header: vec![
            "place",
            "n (steps)",
            "median_residual (nats/step)",
            "q90_residual (nats/step)",
            "wrong_flag_median (nats/step)",
        ],
        rows,
    })
}

/// Per-place JSON, CSV rows and CSV header.
type Sweep = (Vec<Value>, Vec<Vec<String>>, Vec<&'static str>);

/// Shared shape of the stationarity and contraction sweeps.
fn diagnostic_sweep(
    config: &RunConfig,
    mu: &MeasureSpec,
    value_column: &'static str,
    json_key: &str,
    f: impl Fn(&ParabolicSpec, usize) -> boundary_lab::Result<f64>,
) -> Result<Sweep, CliError> {
    let mut per_place = Vec::new();
    let mut rows = Vec::new();
    for place in target_places(config, mu)? {
        let spec = spectrum(config, mu, place)?.parabolic(config.gap);
        let mut sweep = Vec::new();
        for k in horizons(config.n) {
            let v = f(&spec, k).map_err(CliError::core(format!(
                "{} at {place}",
                config.command.name()
            )))?;
            rows.push(vec![place.to_string(), k.to_string(), fmt_f64(v)]);
            sweep.push(json!({ "n": k, json_key: finite_or_null(v) }));
        }
        per_place.push(json!({ "place": place, "block_dims": spec.dims(), "sweep": sweep }));
    }
    Ok((per_place, rows, vec!["place", "n (steps)", value_column]))
}

fn stationarity(config: &RunConfig, mu: &MeasureSpec) -> Result<Report, CliError> {
    let (per_place, rows, header_row) = diagnostic_sweep(
        config,
        mu,
        "tv_defect (dimensionless)",
        "tv_defect",
        |spec, k| stationarity_defect(mu, spec, config.samples, k, config.depth, config.seed),
    )?;
    let body = json!({
        "samples": config.samples,
        "depth": config.depth,
        "gap": config.gap,
        "sampling_scale": 3.0 / (config.samples as f64).sqrt(),
        "places": per_place,
    });
    Ok(Report {
        json: finish(header(config, mu), body),
        header: header_row,
        rows,
    })
}

fn contraction(config: &RunConfig, mu: &MeasureSpec) -> Result<Report, CliError> {
    let (per_place, rows, header_row) =
        diagnostic_sweep(config, mu, "diameter (nats)", "diameter_nats", |spec, k| {
            contraction_diameter(mu, spec, k, config.samples, config.seed)
        })?;
    let body = json!({ "samples": config.samples, "gap": config.gap, "places": per_place });
    Ok(Report {
        json: finish(header(config, mu), body),
        header: header_row,
        rows,
    })
}

fn triviality(config: &RunConfig, mu: &MeasureSpec) -> Result<Report, CliError> {
    let spectra = target_places(config, mu)?
        .into_iter()
        .map(|p| spectrum(config, mu, p))
        .collect::<Result<Vec<_>, _>>()?;
    let report = triviality_report(&spectra, config.gap);
    let rows = report
        .places
        .iter()
        .map(|p| {
            let dims: Vec<String> = p.block_dims.iter().map(usize::to_string).collect();
            vec![
                p.place.to_string(),
                fmt_f64(p.gap_nats_per_step),
                fmt_f64(p.gap_std_error),
                dims.join(" "),
                serde_json::to_value(p.verdict)
                    .expect("plain data")
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
            ]
        })
        .collect();
    let body = json!({ "n": config.n, "trials": config.trials, "report": report });
    Ok(Report {
        json: finish(header(config, mu), body),
        header: vec![
            "place",
            "spread (nats/step)",
            "spread_std_error (nats/step)",
            "block_dims",
            "verdict",
        ],
        rows,
    })
}

fn entropy(config: &RunConfig, mu: &MeasureSpec) -> Result<(Report, Option<CliError>), CliError> {
    let mut seq = ConvolutionSequence::new(mu);
    let mut sweep = Vec::new();
    let mut rows = Vec::new();
    let mut overflow = None;
    while seq.n() < config.n {
        if let Err(e) = seq.advance() {
            overflow = Some(e);
            break;
        }
        let h = seq.entropy();
        rows.push(vec![
            h.n.to_string(),
            h.support_size.to_string(),
            fmt_f64(h.nats()),
            h.exact.to_string(),
        ]);
        sweep.push(json!({
            "n": h.n,
            "support_size": h.support_size,
            "entropy_nats": h.nats(),
            "entropy_exact": h.exact.to_string(),
        }));
    }
    let body = json!({
        "max_n": config.n,
        "completed_n": seq.n(),
        "budget_exceeded": overflow.as_ref().map(|e| e.to_string()),
        "sweep": sweep,
    });
    let report = Report {
        json: finish(header(config, mu), body),
        header: vec![
            "n (steps)",
            "support_size (dimensionless)",
            "entropy (nats)",
            "entropy_exact (nats)",
        ],
        rows,
    };
    Ok((
        report,
        overflow.map(CliError::core(format!("entropy at n={}", seq.n() + 1))),
    ))
}

fn ballcount(config: &RunConfig) -> Result<Report, CliError> {
    let profile = height_ball_profile(config.rmax).map_err(CliError::core("--rmax"))?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (m, count) in profile {
        let r = (m as f64).ln();
        rows.push(vec![fmt_f64(r), count.to_string()]);
        points.push(json!({ "max_height": m, "radius_nats": r, "count": count }));
    }
    let body = json!({ "command": "ballcount", "seed": config.seed, "rmax": config.rmax, "points": points });
    Ok(Report {
        json: body,
        header: vec!["radius (nats)", "count (dimensionless)"],
        rows,
    })
}
