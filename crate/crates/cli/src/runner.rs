//! Experiment orchestration: fluctuation simulation with deterministic
//! parallel replicates, CSV/JSON emission.

use crate::config::Resolved;
use coxballs::field::{sample_fluctuations, FluctuationSample};
use coxballs::measures::TestMeasure;
use coxballs::pointprocess::truncation_bias_bound;
use coxballs::rng::MasterSeed;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<coxballs::pointprocess::ModelError> for RunError {
    fn from(e: coxballs::pointprocess::ModelError) -> Self {
        RunError::Runtime(e.to_string())
    }
}

/// Tag usable in file names: rho with the decimal point spelled out.
pub fn rho_tag(rho: f64) -> String {
    format!("{rho}").replace('.', "p").replace('-', "m")
}

/// Simulate one (measure, rho) cell and return its samples.
pub fn simulate_cell(
    resolved: &Resolved,
    mu: &TestMeasure,
    rho: f64,
) -> Result<Vec<FluctuationSample>, RunError> {
    let trunc = resolved.truncation(rho);
    Ok(sample_fluctuations(
        &resolved.model,
        mu,
        rho,
        resolved.config.replicates,
        trunc,
        MasterSeed(resolved.config.seed),
    )?)
}

/// Fluctuation CSV: `seed_index,rho,value,centering,normalized`, `.` decimal,
/// bytes fully determined by (config, seed).
pub fn fluctuation_csv(samples: &[FluctuationSample]) -> String {
    let mut out = String::with_capacity(32 * samples.len() + 64);
    out.push_str("seed_index,rho,value,centering,normalized\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.seed_index, s.rho, s.value, s.centering, s.normalized
        );
    }
    out
}

/// Run `simulate` over every (measure, rho) cell: one CSV per cell plus a
/// metadata JSON carrying the seed, all resolved defaults, truncation bias
/// bounds and timings.
pub fn run_simulate(resolved: &Resolved, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut cells = Vec::new();
    let t0 = Instant::now();
    for (name, mu) in &resolved.measures {
        for &rho in &resolved.config.rhos {
            let cell_start = Instant::now();
            let samples = simulate_cell(resolved, mu, rho)?;
            let path = out_dir.join(format!("fluct_{name}_rho{}.csv", rho_tag(rho)));
            std::fs::write(&path, fluctuation_csv(&samples))?;
            let trunc = resolved.truncation(rho);
            let centering_err =
                coxballs::field::centering_error_bound(&resolved.model, mu, rho, trunc)
                    .map_err(RunError::from)?;
            cells.push(json!({
                "measure": name,
                "rho": rho,
                "rows": samples.len(),
                "file": path.file_name().unwrap().to_string_lossy(),
                "r_cap": trunc.r_cap,
                "eps_kernel": trunc.eps_kernel,
                "truncation_bias_bound": truncation_bias_bound(&resolved.model, rho, mu, trunc.r_cap),
                "centering_grid_error": centering_err,
                "n_rho": resolved.regime.n(rho),
                "seconds": cell_start.elapsed().as_secs_f64(),
            }));
            written.push(path);
        }
    }
    let meta = json!({
        "command": "simulate",
        "seed": resolved.config.seed,
        "regime": resolved.regime.kind.as_str(),
        "replicates": resolved.config.replicates,
        "tolerances": resolved.config.tolerances,
        "thetas": resolved.thetas,
        "cells": cells,
        "total_seconds": t0.elapsed().as_secs_f64(),
    });
    let meta_path = out_dir.join("metadata.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
    written.push(meta_path);
    Ok(written)
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

/// CF comparison CSV: `theta,ecf_re,ecf_im,th_re,th_im,se,z`.
pub fn cf_csv(report: &coxballs::stats::CFReport) -> String {
    let mut out = String::new();
    out.push_str("theta,ecf_re,ecf_im,th_re,th_im,se,z\n");
    for (i, th) in report.thetas.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            th,
            report.empirical[i].re,
            report.empirical[i].im,
            report.theoretical[i].re,
            report.theoretical[i].im,
            report.se,
            report.z_scores[i]
        );
    }
    out
}

/// Summary JSON shared by the verification checks.
pub fn report_summary(
    check: &str,
    report: &coxballs::stats::CFReport,
    seed: u64,
    extra: serde_json::Value,
) -> serde_json::Value {
    json!({
        "check": check,
        "pass": report.pass,
        "sup_deviation": report.sup_deviation,
        "allowance": report.allowance,
        "se": report.se,
        "n": report.n,
        "seed": seed,
        "detail": extra,
    })
}
