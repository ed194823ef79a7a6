//! Vehicle state, longitudinal dynamics, and delayed-history storage.
//!
//! Every vehicle follows the linear third-order model: position integrates
//! speed, speed integrates realized acceleration, and realized acceleration
//! chases the commanded acceleration through a first-order actuation lag.
//! Controllers never read live predecessor state; they read a [`StateHistory`]
//! at delay-shifted times, which is what makes the delay-compensated spacing
//! policies exact at equilibrium.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use alloc::vec::Vec;

/// Slack applied when comparing lookup times against the latest sample, so
/// that `t = k * dt` computed two different ways still resolves.
const TIME_SLACK: f64 = 1e-9;

/// Front-bumper position, speed, and realized acceleration of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Position of the front bumper (m).
    pub p: f64,
    /// Speed (m/s).
    pub v: f64,
    /// Realized acceleration (m/s^2).
    pub a: f64,
}

impl VehicleState {
    pub fn new(p: f64, v: f64, a: f64) -> Self {
        Self { p, v, a }
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.v.is_finite() && self.a.is_finite()
    }
}

/// Physical and delay parameters shared by the vehicles of a platoon.
///
/// `leader_delay_per_hop` is the per-hop communication delay to the platoon
/// leader: vehicle `i` receives leader state aged by `i *
/// leader_delay_per_hop` seconds, so consecutive-vehicle delay differences are
/// constant along the string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Actuation time lag (s).
    pub phi: f64,
    /// Vehicle length (m).
    pub length: f64,
    /// Standstill distance (m).
    pub standstill: f64,
    /// On-board sensor delay for predecessor position/speed (s).
    pub sensor_delay: f64,
    /// V2V communication delay for predecessor acceleration (s).
    pub comm_delay: f64,
    /// Per-hop communication delay toward the platoon leader (s).
    pub leader_delay_per_hop: f64,
}

impl VehicleParams {
    /// Reference parameter set with the delays zeroed. This is the default
    /// used by the shipped scenario runs.
    pub fn delay_free() -> Self {
        Self {
            phi: 0.5,
            length: 5.0,
            standstill: 5.0,
            sensor_delay: 0.0,
            comm_delay: 0.0,
            leader_delay_per_hop: 0.0,
        }
    }

    /// Reference parameter set including the nominal sensing and
    /// communication delays (0.02 s sensor, 0.1 s V2V, 0.1 s per hop).
    pub fn with_reference_delays() -> Self {
        Self {
            sensor_delay: 0.02,
            comm_delay: 0.1,
            leader_delay_per_hop: 0.1,
            ..Self::delay_free()
        }
    }

    /// Compensation delay `g`: the smallest admissible value, i.e. the
    /// largest of the sensing, communication, and per-hop leader delays.
    pub fn compensation_delay(&self) -> f64 {
        self.sensor_delay
            .max(self.comm_delay)
            .max(self.leader_delay_per_hop)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi.is_finite() && self.phi > 0.0) {
            return Err(Error::Config("vehicle.phi must be > 0".into()));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Config("vehicle.length must be > 0".into()));
        }
        if !(self.standstill.is_finite() && self.standstill >= 0.0) {
            return Err(Error::Config("vehicle.standstill must be >= 0".into()));
        }
        for (name, v) in [
            ("vehicle.sensor_delay", self.sensor_delay),
            ("vehicle.comm_delay", self.comm_delay),
            ("vehicle.leader_delay_per_hop", self.leader_delay_per_hop),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(alloc::format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::delay_free()
    }
}

/// One explicit-Euler step of the third-order longitudinal dynamics.
///
/// The state is sampled before the update (first-order hold): the new speed
/// uses the old acceleration and the new position uses the old speed.
pub fn step_dynamics(state: VehicleState, u: f64, phi: f64, dt: f64) -> Result<VehicleState> {
    if !state.is_finite() || !u.is_finite() {
        return Err(Error::NonFinite {
            context: "step_dynamics input",
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config("dt must be > 0".into()));
    }
    if !(phi.is_finite() && phi > 0.0) {
        return Err(Error::Config("phi must be > 0".into()));
    }
    Ok(VehicleState {
        p: state.p + dt * state.v,
        v: state.v + dt * state.a,
        a: state.a + dt * (u - state.a) / phi,
    })
}

/// Uniformly sampled state history of one vehicle, supporting interpolated
/// delayed lookups and speed integrals.
///
/// The history may start before the simulation origin: pre-filled samples let
/// delayed lookups resolve exactly during warm-up instead of clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct StateHistory {
    dt: f64,
    t0: f64,
    samples: Vec<VehicleState>,
}

impl StateHistory {
    /// Creates a history whose first sample is `first` at time `t0`.
    pub fn new(dt: f64, t0: f64, first: VehicleState) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config("history dt must be > 0".into()));
        }
        if !first.is_finite() || !t0.is_finite() {
            return Err(Error::NonFinite {
                context: "history initial sample",
            });
        }
        Ok(Self {
            dt,
            t0,
            samples: alloc::vec![first],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start_time(&self) -> f64 {
        self.t0
    }

    pub fn latest_time(&self) -> f64 {
        self.t0 + (self.samples.len() - 1) as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Appends the state at the next sample instant.
    pub fn push(&mut self, state: VehicleState) -> Result<()> {
        if !state.is_finite() {
            return Err(Error::NonFinite {
                context: "history push",
            });
        }
        self.samples.push(state);
        Ok(())
    }

    /// State at time `t`, linearly interpolated between bracketing samples.
    ///
    /// Times before the first sample clamp to it (cold start); times beyond
    /// the latest sample are a lookahead error, because controllers must
    /// never ask for the future.
    pub fn lookup(&self, t: f64) -> Result<VehicleState> {
        if !t.is_finite() {
            return Err(Error::NonFinite {
                context: "history lookup time",
            });
        }
        let latest = self.latest_time();
        if t > latest + TIME_SLACK {
            return Err(Error::Lookahead {
                requested: t,
                latest,
            });
        }
        if t <= self.t0 {
            return Ok(self.samples[0]);
        }
        let x = (t - self.t0) / self.dt;
        let i = (x.floor() as usize).min(self.samples.len() - 1);
        let frac = x - i as f64;
        if frac <= 0.0 || i + 1 == self.samples.len() {
            return Ok(self.samples[i]);
        }
        let s0 = self.samples[i];
        let s1 = self.samples[i + 1];
        Ok(VehicleState {
            p: s0.p + frac * (s1.p - s0.p),
            v: s0.v + frac * (s1.v - s0.v),
            a: s0.a + frac * (s1.a - s0.a),
        })
    }

    /// Trapezoidal integral of the interpolated speed signal over `[t_a, t_b]`.
    ///
    /// Exact for piecewise-linear speed; returns exactly 0 when `t_a == t_b`.
    pub fn speed_integral(&self, t_a: f64, t_b: f64) -> Result<f64> {
        if !t_a.is_finite() || !t_b.is_finite() {
            return Err(Error::NonFinite {
                context: "speed_integral bounds",
            });
        }
        if t_a > t_b {
            return Err(Error::ArgumentOrder { lo: t_a, hi: t_b });
        }
        if t_a == t_b {
            return Ok(0.0);
        }
        let mut acc = 0.0;
        let mut t = t_a;
        let mut v_t = self.lookup(t)?.v;
        loop {
            // next grid boundary strictly after t, then cap at t_b
            let idx = ((t - self.t0) / self.dt + TIME_SLACK).floor() + 1.0;
            let boundary = self.t0 + idx * self.dt;
            let t_next = if boundary < t_b { boundary } else { t_b };
            let v_next = self.lookup(t_next)?.v;
            acc += 0.5 * (v_t + v_next) * (t_next - t);
            if t_next >= t_b {
                return Ok(acc);
            }
            t = t_next;
            v_t = v_next;
        }
    }
}
