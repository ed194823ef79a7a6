//! Spacing policies and control laws.
//!
//! Three laws are implemented:
//! - the delay-compensated constant-time-gap (CTG) law used by a platoon
//!   leader against the vehicle ahead of the platoon,
//! - the delay-compensated constant-spacing (CS) law used by followers, which
//!   tracks both the immediate predecessor and the platoon leader,
//! - a multi-predecessor CTG follower law used to build the pure-CTG baseline
//!   platoons for comparisons.
//!
//! All laws are pure functions over committed state histories; delayed terms
//! are realized as interpolated lookups at `t - g` (predecessor channels) and
//! `t - sigma` (leader channels).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{StateHistory, VehicleParams, VehicleState};

/// Gains and timing of the CTG law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtgParams {
    /// Spacing-error gain (1/s^2).
    pub k_s: f64,
    /// Speed-difference gain (1/s).
    pub k_v: f64,
    /// Acceleration-difference gain (dimensionless).
    pub k_a: f64,
    /// Constant time gap (s).
    pub h: f64,
    /// Compensation delay (s).
    pub g: f64,
}

impl CtgParams {
    pub fn validate(&self, vehicle: &VehicleParams) -> Result<()> {
        for (name, v) in [
            ("ctg.k_s", self.k_s),
            ("ctg.k_v", self.k_v),
            ("ctg.k_a", self.k_a),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(alloc::format!("{name} must be finite")));
            }
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::Config("ctg.h must be > 0".into()));
        }
        let floor = vehicle.sensor_delay.max(vehicle.comm_delay);
        if !(self.g.is_finite() && self.g >= floor) {
            return Err(Error::Config(alloc::format!(
                "ctg.g must be >= max(sensor_delay, comm_delay) = {floor}"
            )));
        }
        Ok(())
    }
}

/// Gains and timing of the CS law.
///
/// `sigma` is the accumulated compensation delay from the platoon leader to
/// this vehicle: `sigma_i = sum of g_k for k = 2..=i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsParams {
    pub q1: f64,
    pub q3: f64,
    pub q4: f64,
    /// Bandwidth gain (1/s).
    pub lambda: f64,
    /// Compensation delay toward the predecessor (s).
    pub g: f64,
    /// Accumulated compensation delay toward the platoon leader (s).
    pub sigma: f64,
}

impl CsParams {
    pub fn validate(&self, vehicle: &VehicleParams) -> Result<()> {
        for (name, v) in [
            ("cs.q1", self.q1),
            ("cs.q3", self.q3),
            ("cs.q4", self.q4),
            ("cs.lambda", self.lambda),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(alloc::format!("{name} must be finite")));
            }
        }
        if self.q3 == -1.0 {
            return Err(Error::DegenerateGain);
        }
        let floor = vehicle
            .sensor_delay
            .max(vehicle.comm_delay)
            .max(vehicle.leader_delay_per_hop);
        if !(self.g.is_finite() && self.g >= floor) {
            return Err(Error::Config(alloc::format!(
                "cs.g must be >= max(sensor_delay, comm_delay, leader_delay_per_hop) = {floor}"
            )));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config("cs.sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Kind of the vehicle ahead of the platoon. Acceleration feedback is only
/// available from a connected (CAV) leader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExoLeaderKind {
    Cav,
    AvHdv,
}

/// CTG target spacing: `v_self * h + integral of leader speed over [t-g, t] + d`.
pub fn ctg_target_spacing(
    v_self: f64,
    leader_hist: &StateHistory,
    t: f64,
    p: &CtgParams,
    standstill: f64,
) -> Result<f64> {
    let comp = leader_hist.speed_integral(t - p.g, t)?;
    Ok(v_self * p.h + comp + standstill)
}

/// CTG spacing error: `p_leader(t-g) - p_self - L - v_self * h - d`.
pub fn ctg_spacing_error(
    p_self: f64,
    v_self: f64,
    leader_hist: &StateHistory,
    t: f64,
    p: &CtgParams,
    length: f64,
    standstill: f64,
) -> Result<f64> {
    let leader = leader_hist.lookup(t - p.g)?;
    Ok(leader.p - p_self - length - v_self * p.h - standstill)
}

/// CTG control law of a platoon leader.
///
/// The acceleration-difference channel is dropped when the vehicle ahead is
/// not connected.
pub fn ctg_control(
    state_self: &VehicleState,
    leader_hist: &StateHistory,
    t: f64,
    p: &CtgParams,
    length: f64,
    standstill: f64,
    exo: ExoLeaderKind,
) -> Result<f64> {
    let err = ctg_spacing_error(
        state_self.p,
        state_self.v,
        leader_hist,
        t,
        p,
        length,
        standstill,
    )?;
    let leader = leader_hist.lookup(t - p.g)?;
    let mut u = p.k_s * err + p.k_v * (leader.v - state_self.v);
    if exo == ExoLeaderKind::Cav {
        u += p.k_a * (leader.a - state_self.a);
    }
    Ok(u)
}

/// CS target spacing: `d + integral of predecessor speed over [t-g, t]`.
pub fn cs_target_spacing(
    pred_hist: &StateHistory,
    t: f64,
    p: &CsParams,
    standstill: f64,
) -> Result<f64> {
    let comp = pred_hist.speed_integral(t - p.g, t)?;
    Ok(standstill + comp)
}

/// CS spacing error toward the predecessor: `p_pred(t-g) - p_self - L - d`.
pub fn cs_spacing_error(
    p_self: f64,
    pred_hist: &StateHistory,
    t: f64,
    p: &CsParams,
    length: f64,
    standstill: f64,
) -> Result<f64> {
    let pred = pred_hist.lookup(t - p.g)?;
    Ok(pred.p - p_self - length - standstill)
}

/// CS spacing error toward the platoon leader over `index - 1` links:
/// `p_leader(t-sigma) - p_self - (index-1) * (L + d)`.
pub fn cs_leader_spacing_error(
    p_self: f64,
    leader_hist: &StateHistory,
    t: f64,
    p: &CsParams,
    length: f64,
    standstill: f64,
    index: usize,
) -> Result<f64> {
    if index < 2 {
        return Err(Error::Config("cs vehicle index must be >= 2".into()));
    }
    let leader = leader_hist.lookup(t - p.sigma)?;
    let links = (index - 1) as f64;
    Ok(leader.p - p_self - links * (length + standstill))
}

/// CS control law tracking both the predecessor and the platoon leader.
#[allow(clippy::too_many_arguments)]
pub fn cs_control(
    state_self: &VehicleState,
    pred_hist: &StateHistory,
    leader_hist: &StateHistory,
    t: f64,
    p: &CsParams,
    length: f64,
    standstill: f64,
    index: usize,
) -> Result<f64> {
    let denom = 1.0 + p.q3;
    if denom == 0.0 {
        return Err(Error::DegenerateGain);
    }
    let pred = pred_hist.lookup(t - p.g)?;
    let leader = leader_hist.lookup(t - p.sigma)?;
    let e_pred = cs_spacing_error(state_self.p, pred_hist, t, p, length, standstill)?;
    let e_lead =
        cs_leader_spacing_error(state_self.p, leader_hist, t, p, length, standstill, index)?;
    let u = pred.a
        + p.q3 * leader.a
        + (p.q1 + p.lambda) * (pred.v - state_self.v)
        + p.q1 * p.lambda * e_pred
        + (p.q4 + p.lambda * p.q3) * (leader.v - state_self.v)
        + p.lambda * p.q4 * e_lead;
    Ok(u / denom)
}

/// Multi-predecessor CTG follower law for the pure-CTG baseline platoons.
///
/// `preds` holds the histories of the nearest available predecessors,
/// nearest first, already truncated near the platoon head. The error channels
/// toward predecessor `j` (1-based) use the equilibrium gap chain replicated
/// `j` times: desired front-to-front distance
/// `j * (h * v_self + d + L) + (j - 1) * g * v_self`, the trailing term being
/// the delay-compensation offset of the `j - 1` intermediate links. Channels
/// are averaged with weight `1 / preds.len()`. With a single predecessor the
/// law reduces exactly to the platoon-leader CTG law.
pub fn ctg_follower_control(
    state_self: &VehicleState,
    preds: &[&StateHistory],
    t: f64,
    p: &CtgParams,
    length: f64,
    standstill: f64,
    r: usize,
) -> Result<f64> {
    if r < 1 {
        return Err(Error::Config("ctg.r must be >= 1".into()));
    }
    if preds.is_empty() || preds.len() > r {
        return Err(Error::Config(
            "ctg follower needs between 1 and r predecessor histories".into(),
        ));
    }
    let mut sum = 0.0;
    for (idx, hist) in preds.iter().enumerate() {
        let j = (idx + 1) as f64;
        let pred = hist.lookup(t - p.g)?;
        let desired =
            j * (p.h * state_self.v + standstill + length) + (j - 1.0) * p.g * state_self.v;
        let err = pred.p - state_self.p - desired;
        sum += p.k_s * err + p.k_v * (pred.v - state_self.v) + p.k_a * (pred.a - state_self.a);
    }
    Ok(sum / preds.len() as f64)
}
