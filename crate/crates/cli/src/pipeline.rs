//! Experiment pipelines and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use decaylab::decayfit::{fit_power_law, theory_exponent, DecayReport, FitOptions};
use decaylab::evolution::{evolve, EvolveOptions};
use decaylab::potential::PotentialModel;
use decaylab::scattering::{
    default_grid, detect_zero_resonance_with, smalllambda_fit_unchecked, predicted_smalllambda_exponent,
    transmission_reflection_with, JostOptions,
};
use decaylab::semiclassical::{action_integrals, wkb_vs_exact};
use decaylab::timedomain::{fd_evolve, FdConfig, FdData};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Pipeline};
use crate::output::{field_table, num, write_json, Table};
use crate::CliError;

fn core(context: &str) -> impl Fn(decaylab::Error) -> CliError + '_ {
    move |e| CliError::Core(context.to_string(), e)
}

fn jost_options(cfg: &ExperimentConfig) -> JostOptions {
    JostOptions { rtol: cfg.tolerances.ode_rtol, ..JostOptions::default() }
}

/// Runs the configured pipeline into `out` and returns the manifest.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Value, CliError> {
    cfg.validate().map_err(CliError::Validation)?;
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let start = Instant::now();
    let model = PotentialModel::new(cfg.model.clone()).map_err(core("model"))?;
    let mut summary = json!({});
    let artifacts = match cfg.pipeline {
        Pipeline::PotentialDump => potential_dump(cfg, &model, out)?,
        Pipeline::ScatterSweep => scatter_sweep(cfg, &model, out)?,
        Pipeline::Resonance => resonance(cfg, &model, out)?,
        Pipeline::Evolve => evolve_run(cfg, &model, out)?,
        Pipeline::Fdtd => fdtd_run(cfg, &model, out)?.0,
        Pipeline::WkbSweep => wkb_sweep(cfg, &model, out)?,
        Pipeline::PriceLaw => {
            let (files, reports) = price_law(cfg, &model, out)?;
            summary = json!({ "decay_reports": reports });
            files
        }
    };
    let manifest = json!({
        "name": cfg.name,
        "pipeline": cfg.pipeline,
        "config_hash": cfg.hash(),
        "resolved_config": cfg.to_toml(),
        "tool": env!("CARGO_PKG_NAME"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "finished_unix_s": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "artifacts": artifacts.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "summary": summary,
    });
    write_json(&out.join("manifest.json"), &manifest).map_err(CliError::Io)?;
    Ok(manifest)
}

fn points(grid: &Option<crate::config::Grid>) -> Vec<f64> {
    grid.as_ref().map(|g| g.points()).unwrap_or_default()
}

fn potential_dump(cfg: &ExperimentConfig, model: &PotentialModel, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut table = Table::new(
        format!("potential {:?}", cfg.model),
        &[("x", "length", "position"), ("potential", "1/length^2", "V(x)")],
    );
    for x in points(&cfg.grids.x) {
        table.push(vec![num(x), num(model.evaluate(x))]);
    }
    let mut files = table.write(out, "potential").map_err(CliError::Io)?;
    let (left, right) = model.tails().map_err(core("tail classification"))?;
    let tails = out.join("tails.json");
    write_json(&tails, &json!({ "left": left, "right": right })).map_err(CliError::Io)?;
    files.push(tails);
    Ok(files)
}

fn scatter_sweep(cfg: &ExperimentConfig, model: &PotentialModel, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let grid = default_grid(model);
    let opts = jost_options(cfg);
    let rows = points(&cfg.grids.lambda)
        .par_iter()
        .map(|&l| transmission_reflection_with(model, l, &grid, &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(core("scatter sweep"))?;
    let mut table = Table::new(
        format!("scattering data for {:?}", cfg.model),
        &[
            ("lambda", "1/length", "spectral parameter, energy = lambda^2"),
            ("abs_t", "1", "|T(lambda)|"),
            ("abs_r_plus", "1", "|R+(lambda)|"),
            ("abs_r_minus", "1", "|R-(lambda)|"),
            ("unitarity_defect", "1", "max | |T|^2 + |R|^2 - 1 |"),
            ("abs_w", "1/length", "|W(lambda)| of the Jost solutions"),
        ],
    );
    for s in rows {
        table.push(vec![num(s.lambda), num(s.t.norm()), num(s.r_plus.norm()), num(s.r_minus.norm()), num(s.unitarity_defect()), num(s.w.norm())]);
    }
    table.write(out, "scattering").map_err(CliError::Io)
}

fn resonance(cfg: &ExperimentConfig, model: &PotentialModel, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let report = detect_zero_resonance_with(model, cfg.tolerances.resonance_threshold).map_err(core("resonance"))?;
    let mut value = json!({ "model": cfg.model, "resonance": report });
    if let Some(g) = &cfg.grids.lambda {
        let fit = smalllambda_fit_unchecked(model, &g.points()).map_err(core("small-lambda fit"))?;
        value["small_lambda_fit"] = json!({ "c": fit.c, "p": fit.p, "lambdas": fit.lambdas, "abs_w": fit.abs_w });
        value["predicted_exponent"] = json!(predicted_smalllambda_exponent(model).ok());
        if report.resonant {
            value["note"] = json!("model is resonant; the fitted exponent does not follow the tail law");
        }
    }
    let path = out.join("resonance.json");
    write_json(&path, &value).map_err(CliError::Io)?;
    Ok(vec![path])
}

fn evolve_run(cfg: &ExperimentConfig, model: &PotentialModel, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let opts = EvolveOptions {
        jost: jost_options(cfg),
        bandwidth_tol: cfg.tolerances.bandwidth,
        budget: cfg.tolerances.evolve_budget,
        ..EvolveOptions::default()
    };
    let field = evolve(model, cfg.propagator, &cfg.data, &points(&cfg.grids.t), &points(&cfg.grids.x), &opts)
        .map_err(core("spectral evolution"))?;
    let mut files = field_table(&field, 1).write(out, "field").map_err(CliError::Io)?;
    let diag = out.join("diagnostics.json");
    write_json(&diag, &json!(field.diagnostics)).map_err(CliError::Io)?;
    files.push(diag);
    Ok(files)
}

fn fd_config(cfg: &ExperimentConfig) -> FdConfig {
    let fd = cfg.fd.as_ref().expect("validated");
    FdConfig { courant: fd.courant, boundary: fd.boundary, ..FdConfig::new(fd.h, fd.t_final) }
}

fn fdtd_run(
    cfg: &ExperimentConfig,
    model: &PotentialModel,
    out: &Path,
) -> Result<(Vec<PathBuf>, decaylab::evolution::WaveField), CliError> {
    let data = match cfg.propagator {
        decaylab::evolution::Propagator::Cosine => FdData::value(cfg.data),
        decaylab::evolution::Propagator::Sinc => FdData::velocity(cfg.data),
        p => return Err(CliError::Validation(vec![format!("propagator: {p:?} is not available for finite differences")])),
    };
    let field = fd_evolve(model, &data, &fd_config(cfg), &points(&cfg.grids.x)).map_err(core("finite differences"))?;
    let stride = cfg.fd.as_ref().map(|f| f.output_stride).unwrap_or(1);
    let mut files = field_table(&field, stride).write(out, "series").map_err(CliError::Io)?;
    let diag = out.join("diagnostics.json");
    write_json(&diag, &json!(field.diagnostics)).map_err(CliError::Io)?;
    files.push(diag);
    Ok((files, field))
}

fn wkb_sweep(cfg: &ExperimentConfig, model: &PotentialModel, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut cases = Vec::new();
    for h in points(&cfg.grids.hbar) {
        for e in points(&cfg.grids.energy) {
            cases.push((e, h));
        }
    }
    let rows = cases
        .par_iter()
        .map(|&(e, h)| {
            let data = action_integrals(model, e, h, true)?;
            let (_, exact, dev) = wkb_vs_exact(model, e, h, true)?;
            let (_, _, dev_unc) = wkb_vs_exact(model, e, h, false)?;
            Ok(vec![num(e), num(h), num(data.s), num(data.sigma11_abs), num(exact), num(dev), num(dev_unc)])
        })
        .collect::<Result<Vec<_>, decaylab::Error>>()
        .map_err(core("WKB sweep"))?;
    let mut table = Table::new(
        format!("semiclassical barrier transmission for {:?}", cfg.model),
        &[
            ("energy", "1/length^2", "E"),
            ("hbar", "1", "semiclassical parameter"),
            ("action", "1/length", "S = integral of sqrt(V0 - E) between the turning points"),
            ("wkb_amplitude", "1", "exp(-S/hbar)"),
            ("exact_abs_t", "1", "|T| of -hbar^2 f'' + V f = E f"),
            ("rel_dev", "1", "|exp(-S/hbar) - |T|| / |T| with the corrected potential V0"),
            ("rel_dev_uncorrected", "1", "the same with V in place of V0"),
        ],
    );
    for r in rows {
        table.push(r);
    }
    table.write(out, "wkb").map_err(CliError::Io)
}

fn price_law(
    cfg: &ExperimentConfig,
    model: &PotentialModel,
    out: &Path,
) -> Result<(Vec<PathBuf>, Vec<DecayReport>), CliError> {
    let (mut files, field) = fdtd_run(cfg, model, out)?;
    let fit = cfg.fit.as_ref().expect("validated");
    let theory = theory_exponent(model, cfg.propagator, cfg.data.mean().abs() < 1e-12).ok();
    let mut reports = Vec::new();
    for (j, x) in field.x.iter().enumerate() {
        let mut r = fit_power_law(&field.station(j), *x, (fit.window[0], fit.window[1]), &FitOptions { min_t_lo: fit.min_t_lo })
            .map_err(core("decay fit"))?;
        r.theory = theory.clone();
        reports.push(r);
    }
    let path = out.join("decay_report.json");
    write_json(&path, &json!({ "name": cfg.name, "model": cfg.model, "propagator": cfg.propagator, "reports": reports }))
        .map_err(CliError::Io)?;
    files.push(path);
    Ok((files, reports))
}

/// Joins decay reports against their theory exponents.
pub fn compare_reports(inputs: &[PathBuf]) -> Result<Table, CliError> {
    let mut table = Table::new(
        "measured decay exponents against the proven rates",
        &[
            ("run", "", "name of the producing run"),
            ("station", "length", "station position"),
            ("t_lo", "time", "window start"),
            ("t_hi", "time", "window end"),
            ("alpha", "1", "fitted exponent"),
            ("r2", "1", "coefficient of determination"),
            ("theory", "1", "proven exponent (empty: faster than any power or not applicable)"),
            ("sharp", "1", "sharp Price exponent where it differs"),
            ("difference", "1", "alpha - theory"),
        ],
    );
    for path in inputs {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Validation(vec![format!("{}: {e}", path.display())]))?;
        let name = v["name"].as_str().unwrap_or("").replace(',', ";");
        let reports: Vec<DecayReport> = serde_json::from_value(v["reports"].clone())
            .map_err(|e| CliError::Validation(vec![format!("{}: reports: {e}", path.display())]))?;
        for r in reports {
            let th = r.theory.as_ref().and_then(|t| t.exponent);
            let sharp = r.theory.as_ref().and_then(|t| t.sharp);
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            table.push(vec![
                name.clone(),
                num(r.station),
                num(r.t_lo),
                num(r.t_hi),
                num(r.alpha),
                num(r.r2),
                opt(th),
                opt(sharp),
                opt(th.map(|t| r.alpha - t)),
            ]);
        }
    }
    Ok(table)
}
