//! File formats: trace CSV, MOE rows, comparison tables, feasibility-region
//! CSV, stability-report JSON, and the consumption-coefficient file.
//!
//! All numeric CSV output uses fixed 6-decimal formatting so that reruns diff
//! byte-identically.

use std::fs;
use std::io::Write;
use std::path::Path;

use platoon_core::moe::{MoeSummary, VtMicroCoefficients};
use platoon_core::sim::SimulationTrace;
use platoon_core::stability::{FeasibilityGrid, StabilityReport};

use crate::error::{CliError, Result};

/// Bundled coefficient set for a composite light-duty vehicle.
pub const BUNDLED_COEFFICIENTS: &str = include_str!("../data/vt_micro_ldv.toml");

/// Loads a coefficient file, or the bundled set when no path is given.
pub fn load_coefficients(path: Option<&Path>) -> Result<VtMicroCoefficients> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        None => BUNDLED_COEFFICIENTS.to_string(),
    };
    let coeffs: VtMicroCoefficients =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("coefficient file: {e}")))?;
    coeffs.validate()?;
    Ok(coeffs)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

/// Trace CSV: `t`, then `p_i, v_i, a_i, u_i, ds_i` per vehicle, vehicle 0
/// being the exogenous one.
pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut out = String::from("t");
    for i in 0..trace.vehicles.len() {
        out.push_str(&format!(",p{i},v{i},a{i},u{i},ds{i}"));
    }
    out.push('\n');
    for k in 0..trace.samples() {
        out.push_str(&format!("{:.6}", trace.time_at(k)));
        for s in &trace.vehicles {
            out.push_str(&format!(
                ",{:.6},{:.6},{:.6},{:.6},{:.6}",
                s.p[k], s.v[k], s.a[k], s.u[k], s.ds[k]
            ));
        }
        out.push('\n');
    }
    out
}

pub fn write_trace_csv(path: &Path, trace: &SimulationTrace) -> Result<()> {
    write_file(path, &trace_csv(trace))
}

pub const MOE_CSV_HEADER: &str =
    "system,r,scenario,n,outflow,dampening_ratio,fuel,hc,co,nox,co2,tet,tit,max_jerk\n";

pub fn moe_csv_row(system: &str, r: usize, scenario: &str, n: usize, moe: &MoeSummary) -> String {
    format!(
        "{system},{r},{scenario},{n},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        moe.outflow,
        moe.dampening_ratio,
        moe.fuel,
        moe.hc,
        moe.co,
        moe.nox,
        moe.co2,
        moe.tet,
        moe.tit,
        moe.max_jerk
    )
}

pub fn write_moe_csv(
    path: &Path,
    system: &str,
    r: usize,
    scenario: &str,
    n: usize,
    moe: &MoeSummary,
) -> Result<()> {
    let mut out = String::from(MOE_CSV_HEADER);
    out.push_str(&moe_csv_row(system, r, scenario, n, moe));
    write_file(path, &out)
}

/// One comparison table: rows of (system, r) against a range of platoon
/// sizes, with a trailing arithmetic-mean column.
pub fn table_csv(n_values: &[usize], rows: &[(String, usize, Vec<f64>)]) -> String {
    let mut out = String::from("system,r");
    for n in n_values {
        out.push_str(&format!(",n={n}"));
    }
    out.push_str(",average\n");
    for (label, r, cells) in rows {
        out.push_str(&format!("{label},{r}"));
        for value in cells {
            out.push_str(&format!(",{value:.6}"));
        }
        let avg = cells.iter().sum::<f64>() / cells.len() as f64;
        out.push_str(&format!(",{avg:.6}\n"));
    }
    out
}

pub fn write_table_csv(
    path: &Path,
    n_values: &[usize],
    rows: &[(String, usize, Vec<f64>)],
) -> Result<()> {
    write_file(path, &table_csv(n_values, rows))
}

/// Feasibility-region CSV: one `(x, y, verdict)` row per grid cell.
pub fn region_csv(grid: &FeasibilityGrid) -> String {
    let mut out = format!(
        "{},{},hybrid_stable\n",
        grid.x_param.name(),
        grid.y_param.name()
    );
    for (iy, y) in grid.y_values.iter().enumerate() {
        for (ix, x) in grid.x_values.iter().enumerate() {
            out.push_str(&format!("{x:.6},{y:.6},{}\n", grid.verdicts[iy][ix]));
        }
    }
    out
}

pub fn write_region_csv(path: &Path, grid: &FeasibilityGrid) -> Result<()> {
    write_file(path, &region_csv(grid))
}

pub fn write_report_json(path: &Path, report: &StabilityReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Numeric(format!("report serialization: {e}")))?;
    write_file(path, &(json + "\n"))
}
