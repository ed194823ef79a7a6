//! Experiment configuration: one human-editable TOML file per experiment.
//!
//! Every section is optional and every omitted field falls back to the
//! reference parameter set, so a minimal simulate config names only the
//! platoon kind, its size, and a scenario.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use platoon_core::control::ExoLeaderKind;
use platoon_core::model::VehicleParams;
use platoon_core::sim::{CsGains, CtgGains, PlatoonConfig, PlatoonKind, Scenario, ScenarioKind};
use platoon_core::stability::{FrequencyGrid, ScanAxis, ScanParam};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub platoon: Option<PlatoonSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gains: Option<GainsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<VehicleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatoonSection {
    /// "hybrid", "cs", or "ctg".
    pub kind: String,
    pub n: usize,
    #[serde(default = "default_r", skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    /// Platoon sizes of a multi-platoon chain; overrides `n` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi: Option<Vec<usize>>,
    /// "cav" or "av-hdv".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exo_kind: Option<String>,
}

fn default_r() -> Option<usize> {
    None
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ctg: Option<CtgSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cs: Option<CsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtgSection {
    pub k_s: f64,
    pub k_v: f64,
    pub k_a: f64,
    pub h_leader: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_follower: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsSection {
    pub q1: f64,
    pub q3: f64,
    pub q4: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    #[serde(default = "d_phi")]
    pub phi: f64,
    #[serde(default = "d_length")]
    pub length: f64,
    #[serde(default = "d_standstill")]
    pub standstill: f64,
    #[serde(default)]
    pub sensor_delay: f64,
    #[serde(default)]
    pub comm_delay: f64,
    #[serde(default)]
    pub leader_delay_per_hop: f64,
}

fn d_phi() -> f64 {
    0.5
}
fn d_length() -> f64 {
    5.0
}
fn d_standstill() -> f64 {
    5.0
}

impl Default for VehicleSection {
    fn default() -> Self {
        Self {
            phi: d_phi(),
            length: d_length(),
            standstill: d_standstill(),
            sensor_delay: 0.0,
            comm_delay: 0.0,
            leader_delay_per_hop: 0.0,
        }
    }
}

impl VehicleSection {
    pub fn to_params(&self) -> VehicleParams {
        VehicleParams {
            phi: self.phi,
            length: self.length,
            standstill: self.standstill,
            sensor_delay: self.sensor_delay,
            comm_delay: self.comm_delay,
            leader_delay_per_hop: self.leader_delay_per_hop,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// "periodic", "decel-accel", or "custom".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(default = "d_duration")]
    pub duration: f64,
    #[serde(default = "d_amplitude")]
    pub amplitude: f64,
    #[serde(default = "d_period")]
    pub period: f64,
    #[serde(default = "d_active")]
    pub active: f64,
    #[serde(default)]
    pub start_position: f64,
    /// `[[t, a], ...]` for custom profiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
}

fn d_duration() -> f64 {
    120.0
}
fn d_amplitude() -> f64 {
    2.3
}
fn d_period() -> f64 {
    9.0
}
fn d_active() -> f64 {
    80.0
}

impl ScenarioSection {
    pub fn resolve(&self) -> Result<Scenario> {
        let kind = match self.kind.as_str() {
            "periodic" => ScenarioKind::Periodic {
                amplitude: self.amplitude,
                period: self.period,
                active: self.active,
            },
            "decel-accel" => ScenarioKind::DecelAccel,
            "custom" => {
                let samples = self.samples.as_ref().ok_or_else(|| {
                    CliError::Config("scenario.samples is required for custom scenarios".into())
                })?;
                ScenarioKind::Custom {
                    samples: samples.iter().map(|s| (s[0], s[1])).collect(),
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "scenario.kind '{other}' is not one of periodic, decel-accel, custom"
                )))
            }
        };
        let v0 = self.v0.unwrap_or(match &kind {
            ScenarioKind::DecelAccel => 30.0,
            _ => 20.0,
        });
        let scenario = Scenario {
            kind,
            duration: self.duration,
            v0,
            start_position: self.start_position,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "periodic" | "decel-accel" => Ok(Self {
                kind: name.to_string(),
                v0: None,
                duration: d_duration(),
                amplitude: d_amplitude(),
                period: d_period(),
                active: d_active(),
                start_position: 0.0,
                samples: None,
            }),
            other => Err(CliError::Config(format!(
                "unknown scenario '{other}' (expected periodic or decel-accel)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_station_fraction")]
    pub station_fraction: f64,
    #[serde(default = "d_ttc_star")]
    pub ttc_star: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<PathBuf>,
}

fn d_dt() -> f64 {
    0.1
}
fn d_station_fraction() -> f64 {
    0.75
}
fn d_ttc_star() -> f64 {
    2.0
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt: d_dt(),
            station_fraction: d_station_fraction(),
            ttc_star: d_ttc_star(),
            coefficients: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "d_stab_n")]
    pub n: usize,
    #[serde(default = "d_phi")]
    pub phi: f64,
    #[serde(default = "d_w_min")]
    pub w_min: f64,
    #[serde(default = "d_w_max")]
    pub w_max: f64,
    #[serde(default = "d_points")]
    pub points: usize,
}

fn d_stab_n() -> usize {
    5
}
fn d_w_min() -> f64 {
    1e-3
}
fn d_w_max() -> f64 {
    1e3
}
fn d_points() -> usize {
    2000
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            n: d_stab_n(),
            phi: d_phi(),
            w_min: d_w_min(),
            w_max: d_w_max(),
            points: d_points(),
        }
    }
}

impl StabilitySection {
    pub fn grid(&self) -> Result<FrequencyGrid> {
        Ok(FrequencyGrid::log(self.w_min, self.w_max, self.points)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// Row labels: "hybrid", "cs", "ctg:2", "ctg:3".
    pub systems: Vec<String>,
    #[serde(default = "d_n_min")]
    pub n_min: usize,
    #[serde(default = "d_n_max")]
    pub n_max: usize,
    /// "periodic" or "decel-accel".
    pub scenario: String,
    /// Number of identical platoons chained behind the exogenous vehicle.
    #[serde(default = "d_platoons")]
    pub platoons: usize,
}

fn d_n_min() -> usize {
    4
}
fn d_n_max() -> usize {
    10
}
fn d_platoons() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSection {
    pub fn resolve(&self) -> Result<ScanAxis> {
        Ok(ScanAxis {
            param: ScanParam::from_name(&self.param)?,
            min: self.min,
            max: self.max,
            count: self.count,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub x: AxisSection,
    pub y: AxisSection,
    #[serde(default = "d_stab_n")]
    pub n: usize,
}

/// A platoon kind plus its communication span, parsed from a row label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemSpec {
    pub kind: PlatoonKind,
    pub r: usize,
}

impl SystemSpec {
    pub fn parse(label: &str) -> Result<Self> {
        let (kind_str, r) = match label.split_once(':') {
            Some((k, r)) => {
                let r: usize = r.parse().map_err(|_| {
                    CliError::Config(format!("bad communication span in system '{label}'"))
                })?;
                (k, r)
            }
            None => (label, 2),
        };
        let kind = match kind_str {
            "hybrid" => PlatoonKind::Hybrid,
            "cs" => PlatoonKind::Cs,
            "ctg" => PlatoonKind::Ctg,
            other => {
                return Err(CliError::Config(format!(
                    "unknown system '{other}' (expected hybrid, cs, or ctg[:r])"
                )))
            }
        };
        Ok(Self { kind, r })
    }

    pub fn label(&self) -> String {
        match self.kind {
            PlatoonKind::Hybrid => "hybrid".into(),
            PlatoonKind::Cs => "cs".into(),
            PlatoonKind::Ctg => format!("ctg:{}", self.r),
        }
    }

    /// Reference platoon configuration for this system at size `n`.
    pub fn config(
        &self,
        n: usize,
        gains: Option<&GainsSection>,
        vehicle: Option<&VehicleSection>,
    ) -> Result<PlatoonConfig> {
        let mut cfg = match self.kind {
            PlatoonKind::Hybrid => PlatoonConfig::hybrid(n),
            PlatoonKind::Cs => PlatoonConfig::cs(n),
            PlatoonKind::Ctg => PlatoonConfig::ctg(n, self.r),
        };
        if let Some(v) = vehicle {
            cfg.vehicle = v.to_params();
        }
        if let Some(g) = gains {
            if let Some(ctg) = &g.ctg {
                cfg.ctg = CtgGains {
                    k_s: ctg.k_s,
                    k_v: ctg.k_v,
                    k_a: ctg.k_a,
                    h_leader: ctg.h_leader,
                    h_follower: ctg.h_follower.unwrap_or(cfg.ctg.h_follower),
                };
            }
            if let Some(cs) = &g.cs {
                cfg.cs = CsGains {
                    q1: cs.q1,
                    q3: cs.q3,
                    q4: cs.q4,
                    lambda: cs.lambda,
                };
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything a simulate run needs, resolved from one config file.
#[derive(Debug, Clone)]
pub struct ResolvedSimulate {
    pub platoons: Vec<PlatoonConfig>,
    pub scenario: Scenario,
    pub run: RunSection,
    pub system_label: String,
    pub scenario_label: String,
}

pub fn resolve_simulate(
    config: &ExperimentConfig,
    scenario_override: Option<ScenarioSection>,
    dt_override: Option<f64>,
) -> Result<ResolvedSimulate> {
    let platoon = config
        .platoon
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [platoon] section".into()))?;
    let spec = SystemSpec {
        kind: match platoon.kind.as_str() {
            "hybrid" => PlatoonKind::Hybrid,
            "cs" => PlatoonKind::Cs,
            "ctg" => PlatoonKind::Ctg,
            other => {
                return Err(CliError::Config(format!(
                    "platoon.kind '{other}' is not one of hybrid, cs, ctg"
                )))
            }
        },
        r: platoon.r.unwrap_or(2),
    };
    let exo = match platoon.exo_kind.as_deref() {
        None | Some("cav") => ExoLeaderKind::Cav,
        Some("av-hdv") => ExoLeaderKind::AvHdv,
        Some(other) => {
            return Err(CliError::Config(format!(
                "platoon.exo_kind '{other}' is not one of cav, av-hdv"
            )))
        }
    };
    let sizes: Vec<usize> = match &platoon.multi {
        Some(sizes) if !sizes.is_empty() => sizes.clone(),
        Some(_) => return Err(CliError::Config("platoon.multi must not be empty".into())),
        None => vec![platoon.n],
    };
    let mut platoons = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let mut cfg = spec.config(n, config.gains.as_ref(), config.vehicle.as_ref())?;
        cfg.exo_kind = exo;
        platoons.push(cfg);
    }

    let scenario_section = scenario_override
        .or_else(|| config.scenario.clone())
        .ok_or_else(|| {
            CliError::Config("missing [scenario] section (or pass --scenario)".into())
        })?;
    let scenario = scenario_section.resolve()?;

    let mut run = config.run.clone().unwrap_or_default();
    if let Some(dt) = dt_override {
        run.dt = dt;
    }
    if !(run.dt.is_finite() && run.dt > 0.0) {
        return Err(CliError::Config("run.dt must be > 0".into()));
    }
    if !(0.0..1.0).contains(&run.station_fraction) || run.station_fraction <= 0.0 {
        return Err(CliError::Config(
            "run.station_fraction must lie in (0, 1)".into(),
        ));
    }

    Ok(ResolvedSimulate {
        platoons,
        scenario,
        run,
        system_label: spec.label(),
        scenario_label: scenario_section.kind.clone(),
    })
}
