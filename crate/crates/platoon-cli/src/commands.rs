//! The four subcommands: simulate, stability, compare, sweep.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use platoon_core::control::{CsParams, CtgParams};
use platoon_core::moe::MoeSummary;
use platoon_core::sim::{run_multi, SimulationTrace};
use platoon_core::stability::{feasibility_scan, hybrid_verdict};

use crate::config::{
    resolve_simulate, ExperimentConfig, ScenarioSection, StabilitySection, SystemSpec,
};
use crate::error::{CliError, Result};
use crate::formats;

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ExperimentConfig::parse(&text)
}

/// Parses the `--scenario` flag: `periodic`, `decel-accel`, or
/// `custom:<path>` with a CSV of `t,a` samples.
fn scenario_override(flag: &str, base: Option<&ScenarioSection>) -> Result<ScenarioSection> {
    if let Some(path) = flag.strip_prefix("custom:") {
        let path = PathBuf::from(path);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Option<f64> { s?.trim().parse().ok() };
            match (parse(parts.next()), parse(parts.next())) {
                (Some(t), Some(a)) => samples.push([t, a]),
                _ if lineno == 0 => continue, // tolerate a header row
                _ => {
                    return Err(CliError::Config(format!(
                        "custom profile {}: line {} is not 't,a'",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        let mut section = base.cloned().unwrap_or_else(|| ScenarioSection {
            kind: String::new(),
            v0: None,
            duration: 120.0,
            amplitude: 2.3,
            period: 9.0,
            active: 80.0,
            start_position: 0.0,
            samples: None,
        });
        section.kind = "custom".into();
        section.samples = Some(samples);
        Ok(section)
    } else {
        ScenarioSection::named(flag)
    }
}

fn station_for(trace: &SimulationTrace, fraction: f64) -> f64 {
    let p0 = &trace.vehicles[0].p;
    p0[0] + fraction * (p0[p0.len() - 1] - p0[0])
}

pub fn cmd_simulate(
    config_path: &Path,
    scenario_flag: Option<&str>,
    dt: Option<f64>,
    out_dir: &Path,
) -> Result<()> {
    let config = read_config(config_path)?;
    let over = match scenario_flag {
        Some(flag) => Some(scenario_override(flag, config.scenario.as_ref())?),
        None => None,
    };
    let resolved = resolve_simulate(&config, over, dt)?;
    let trace = run_multi(
        &resolved.platoons,
        &resolved.scenario,
        resolved.run.dt,
        false,
    )?;
    let coeffs = formats::load_coefficients(resolved.run.coefficients.as_deref())?;
    let station = station_for(&trace, resolved.run.station_fraction);
    let moe = MoeSummary::compute(&trace, &coeffs, station, resolved.run.ttc_star)?;

    formats::write_trace_csv(&out_dir.join("trace.csv"), &trace)?;
    formats::write_moe_csv(
        &out_dir.join("moe.csv"),
        &resolved.system_label,
        resolved.platoons[0].r,
        &resolved.scenario_label,
        trace.platoon_vehicle_count(),
        &moe,
    )?;
    if trace.collision_flagged() {
        eprintln!(
            "warning: vehicle ordering violated at {} step(s); collision flag recorded",
            trace.collisions.len()
        );
    }
    Ok(())
}

/// Gains for the stability checks, taken from the config or the reference
/// set. Delay factors have unit magnitude on the imaginary axis, so the
/// compensation delays are irrelevant here.
fn stability_params(config: &ExperimentConfig) -> (CtgParams, CsParams, StabilitySection) {
    let stab = config.stability.clone().unwrap_or_default();
    let ctg = match config.gains.as_ref().and_then(|g| g.ctg.as_ref()) {
        Some(c) => CtgParams {
            k_s: c.k_s,
            k_v: c.k_v,
            k_a: c.k_a,
            h: c.h_leader,
            g: 0.0,
        },
        None => CtgParams {
            k_s: 0.1,
            k_v: 0.7,
            k_a: 0.84,
            h: 1.4,
            g: 0.0,
        },
    };
    let cs = match config.gains.as_ref().and_then(|g| g.cs.as_ref()) {
        Some(c) => CsParams {
            q1: c.q1,
            q3: c.q3,
            q4: c.q4,
            lambda: c.lambda,
            g: 0.0,
            sigma: 0.0,
        },
        None => CsParams {
            q1: 0.4,
            q3: 0.9,
            q4: 0.6,
            lambda: 0.1,
            g: 0.0,
            sigma: 0.0,
        },
    };
    (ctg, cs, stab)
}

pub fn cmd_stability(config_path: &Path, out: &Path) -> Result<()> {
    let config = read_config(config_path)?;
    let (ctg, cs, stab) = stability_params(&config);
    let grid = stab.grid()?;
    let report = hybrid_verdict(&ctg, &cs, stab.phi, stab.n, &grid)?;
    report.validate()?;
    formats::write_report_json(out, &report)?;
    Ok(())
}

pub fn cmd_compare(config_path: &Path, out_dir: &Path, jobs: Option<usize>) -> Result<()> {
    let config = read_config(config_path)?;
    let section = config
        .compare
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [compare] section".into()))?;
    if section.n_min < 2 || section.n_max < section.n_min || section.n_max > 64 {
        return Err(CliError::Config(
            "compare.n range must satisfy 2 <= n_min <= n_max <= 64".into(),
        ));
    }
    if section.platoons == 0 {
        return Err(CliError::Config("compare.platoons must be >= 1".into()));
    }
    let systems: Vec<SystemSpec> = section
        .systems
        .iter()
        .map(|s| SystemSpec::parse(s))
        .collect::<Result<_>>()?;
    let scenario = ScenarioSection::named(&section.scenario)?.resolve()?;
    let run_section = config.run.clone().unwrap_or_default();
    let coeffs = formats::load_coefficients(run_section.coefficients.as_deref())?;
    let n_values: Vec<usize> = (section.n_min..=section.n_max).collect();

    // every (system, n) cell, in output order
    let mut cells = Vec::new();
    for spec in &systems {
        for &n in &n_values {
            cells.push((*spec, n));
        }
    }

    let run_cell = |(spec, n): &(SystemSpec, usize)| -> Result<MoeSummary> {
        let cfg = spec.config(*n, config.gains.as_ref(), config.vehicle.as_ref())?;
        let chain = vec![cfg; section.platoons];
        let trace = run_multi(&chain, &scenario, run_section.dt, false)?;
        let station = station_for(&trace, run_section.station_fraction);
        MoeSummary::compute(&trace, &coeffs, station, run_section.ttc_star)
            .map_err(|e| CliError::from(e))
    };

    let results: Vec<Result<MoeSummary>> = match jobs {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            pool.install(|| cells.par_iter().map(run_cell).collect())
        }
        None => cells.par_iter().map(run_cell).collect(),
    };

    let mut summaries = Vec::with_capacity(results.len());
    for ((spec, n), result) in cells.iter().zip(results) {
        match result {
            Ok(s) => summaries.push(s),
            Err(e) => {
                return Err(CliError::Config(format!(
                    "cell ({}, n={n}) failed: {e}",
                    spec.label()
                )))
            }
        }
    }

    type MetricFn = fn(&MoeSummary) -> f64;
    let metrics: [(&str, MetricFn); 10] = [
        ("outflow", |m| m.outflow),
        ("dampening_ratio", |m| m.dampening_ratio),
        ("fuel", |m| m.fuel),
        ("hc", |m| m.hc),
        ("co", |m| m.co),
        ("nox", |m| m.nox),
        ("co2", |m| m.co2),
        ("tet", |m| m.tet),
        ("tit", |m| m.tit),
        ("max_jerk", |m| m.max_jerk),
    ];
    for (name, extract) in metrics {
        let mut rows = Vec::new();
        for (si, spec) in systems.iter().enumerate() {
            let cells: Vec<f64> = (0..n_values.len())
                .map(|ni| extract(&summaries[si * n_values.len() + ni]))
                .collect();
            rows.push((spec.label(), spec.r, cells));
        }
        formats::write_table_csv(&out_dir.join(format!("{name}.csv")), &n_values, &rows)?;
    }
    Ok(())
}

pub fn cmd_sweep(config_path: &Path, out: &Path) -> Result<()> {
    let config = read_config(config_path)?;
    let section = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let (ctg, cs, stab) = stability_params(&config);
    let grid = stab.grid()?;
    let x = section.x.resolve()?;
    let y = section.y.resolve()?;
    let region = feasibility_scan(&x, &y, &ctg, &cs, stab.phi, section.n, &grid)?;
    formats::write_region_csv(out, &region)?;
    Ok(())
}
