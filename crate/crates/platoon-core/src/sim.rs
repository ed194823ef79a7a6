//! Time-domain execution of single and multi-platoon systems.
//!
//! The engine advances all vehicles synchronously: at each step every
//! controller reads only histories committed through the current instant,
//! then all states advance together. Delayed lookups therefore never see
//! uncommitted state and the trace is independent of the per-step vehicle
//! evaluation order.
//!
//! The exogenous vehicle (index 0) integrates its disturbance profile
//! directly, without the actuation lag; it is the disturbance source, not a
//! controlled vehicle.

use serde::{Deserialize, Serialize};

use crate::control::{
    cs_control, cs_spacing_error, ctg_control, ctg_follower_control, ctg_spacing_error, CsParams,
    CtgParams, ExoLeaderKind,
};
use crate::error::{Error, Result};
use crate::model::{step_dynamics, StateHistory, VehicleParams, VehicleState};
use alloc::vec::Vec;

/// Spacing-policy family of a platoon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlatoonKind {
    /// Constant spacing throughout, leader-predecessor-follower topology.
    Cs,
    /// Constant time gap throughout, `r`-predecessor topology.
    Ctg,
    /// CTG first vehicle, CS followers.
    Hybrid,
}

/// CTG gain set. `h_leader` is the time gap of the platoon's first vehicle;
/// `h_follower` applies to the followers of pure-CTG platoons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtgGains {
    pub k_s: f64,
    pub k_v: f64,
    pub k_a: f64,
    pub h_leader: f64,
    pub h_follower: f64,
}

impl CtgGains {
    /// Hybrid-platoon leader gains.
    pub fn hybrid_reference() -> Self {
        Self {
            k_s: 0.1,
            k_v: 0.7,
            k_a: 0.84,
            h_leader: 1.4,
            h_follower: 1.4,
        }
    }

    /// Pure-CTG baseline gains for the given communication span.
    pub fn baseline_reference(r: usize) -> Self {
        let h_follower = if r >= 3 { 0.198 } else { 0.262 };
        Self {
            k_s: 0.1,
            k_v: 1.67,
            k_a: 0.84,
            h_leader: 0.594,
            h_follower,
        }
    }
}

/// CS gain set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsGains {
    pub q1: f64,
    pub q3: f64,
    pub q4: f64,
    pub lambda: f64,
}

impl CsGains {
    pub fn reference() -> Self {
        Self {
            q1: 0.4,
            q3: 0.9,
            q4: 0.6,
            lambda: 0.1,
        }
    }
}

/// Full description of one platoon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatoonConfig {
    pub kind: PlatoonKind,
    /// Number of platoon vehicles (the exogenous vehicle is not counted).
    pub n: usize,
    /// Communication span for pure-CTG platoons (2 or 3).
    pub r: usize,
    pub ctg: CtgGains,
    pub cs: CsGains,
    pub vehicle: VehicleParams,
    pub exo_kind: ExoLeaderKind,
}

impl PlatoonConfig {
    pub fn hybrid(n: usize) -> Self {
        Self {
            kind: PlatoonKind::Hybrid,
            n,
            r: 2,
            ctg: CtgGains::hybrid_reference(),
            cs: CsGains::reference(),
            vehicle: VehicleParams::delay_free(),
            exo_kind: ExoLeaderKind::Cav,
        }
    }

    pub fn cs(n: usize) -> Self {
        Self {
            kind: PlatoonKind::Cs,
            n,
            r: 2,
            ctg: CtgGains::hybrid_reference(),
            cs: CsGains::reference(),
            vehicle: VehicleParams::delay_free(),
            exo_kind: ExoLeaderKind::Cav,
        }
    }

    pub fn ctg(n: usize, r: usize) -> Self {
        Self {
            kind: PlatoonKind::Ctg,
            n,
            r,
            ctg: CtgGains::baseline_reference(r),
            cs: CsGains::reference(),
            vehicle: VehicleParams::delay_free(),
            exo_kind: ExoLeaderKind::Cav,
        }
    }

    /// Compensation delay shared by all vehicles of this platoon.
    pub fn compensation_delay(&self) -> f64 {
        self.vehicle.compensation_delay()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config("platoon.n must be >= 2".into()));
        }
        if self.kind == PlatoonKind::Ctg && !(self.r == 2 || self.r == 3) {
            return Err(Error::Config(
                "platoon.r must be 2 or 3 for CTG platoons".into(),
            ));
        }
        self.vehicle.validate()?;
        let g = self.compensation_delay();
        let leader = CtgParams {
            k_s: self.ctg.k_s,
            k_v: self.ctg.k_v,
            k_a: self.ctg.k_a,
            h: self.ctg.h_leader,
            g,
        };
        if self.kind != PlatoonKind::Cs {
            leader.validate(&self.vehicle)?;
            if self.kind == PlatoonKind::Ctg
                && !(self.ctg.h_follower.is_finite() && self.ctg.h_follower > 0.0)
            {
                return Err(Error::Config("ctg.h_follower must be > 0".into()));
            }
        }
        if self.kind != PlatoonKind::Ctg {
            let cs = CsParams {
                q1: self.cs.q1,
                q3: self.cs.q3,
                q4: self.cs.q4,
                lambda: self.cs.lambda,
                g,
                sigma: g,
            };
            cs.validate(&self.vehicle)?;
        }
        Ok(())
    }
}

/// Exogenous disturbance profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Sinusoidal acceleration of the given amplitude and period, active for
    /// `active` seconds, zero afterwards.
    Periodic {
        amplitude: f64,
        period: f64,
        active: f64,
    },
    /// Constant cruise, a -2.5 m/s^2 drop from 30 to 10 m/s, a slow plateau,
    /// and a +2.5 m/s^2 recovery.
    DecelAccel,
    /// Acceleration samples `(t, a)`, linearly interpolated, clamped at the
    /// ends.
    Custom { samples: Vec<(f64, f64)> },
}

/// A disturbance scenario: profile, run length, initial speed, and the start
/// position of the exogenous vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Total simulated time (s).
    pub duration: f64,
    /// Initial speed of every vehicle (m/s).
    pub v0: f64,
    /// Initial front-bumper position of the exogenous vehicle (m).
    pub start_position: f64,
}

impl Scenario {
    /// Periodic fluctuation: +/-2.3 m/s^2 sine, 9 s period, active 80 s.
    pub fn periodic() -> Self {
        Self {
            kind: ScenarioKind::Periodic {
                amplitude: 2.3,
                period: 9.0,
                active: 80.0,
            },
            duration: 120.0,
            v0: 20.0,
            start_position: 0.0,
        }
    }

    /// Large deceleration and acceleration: 30 m/s cruise, -2.5 m/s^2 down to
    /// 10 m/s, 30 s plateau, +2.5 m/s^2 back to 30 m/s.
    pub fn decel_accel() -> Self {
        Self {
            kind: ScenarioKind::DecelAccel,
            duration: 120.0,
            v0: 30.0,
            start_position: 0.0,
        }
    }

    /// Constant-speed scenario with no disturbance, for equilibrium checks.
    pub fn constant_speed(v0: f64, duration: f64) -> Self {
        Self {
            kind: ScenarioKind::Custom {
                samples: alloc::vec![(0.0, 0.0)],
            },
            duration,
            v0,
            start_position: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config("scenario.duration must be > 0".into()));
        }
        if !(self.v0.is_finite() && self.v0 >= 0.0) {
            return Err(Error::Config("scenario.v0 must be >= 0".into()));
        }
        if !self.start_position.is_finite() {
            return Err(Error::Config(
                "scenario.start_position must be finite".into(),
            ));
        }
        match &self.kind {
            ScenarioKind::Periodic {
                amplitude,
                period,
                active,
            } => {
                if !(amplitude.is_finite()
                    && period.is_finite()
                    && *period > 0.0
                    && active.is_finite()
                    && *active >= 0.0)
                {
                    return Err(Error::Config(
                        "scenario.periodic parameters out of range".into(),
                    ));
                }
            }
            ScenarioKind::DecelAccel => {}
            ScenarioKind::Custom { samples } => {
                if samples.is_empty() {
                    return Err(Error::Config(
                        "scenario.custom needs at least one sample".into(),
                    ));
                }
                if samples
                    .iter()
                    .any(|(t, a)| !t.is_finite() || !a.is_finite())
                {
                    return Err(Error::Config(
                        "scenario.custom samples must be finite".into(),
                    ));
                }
                if samples.windows(2).any(|p| p[0].0 >= p[1].0) {
                    return Err(Error::Config(
                        "scenario.custom sample times must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Acceleration of the exogenous vehicle at time `t`.
pub fn exogenous_profile(s: &Scenario, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 || t > s.duration {
        return Err(Error::Config(alloc::format!(
            "scenario time {t} outside [0, {}]",
            s.duration
        )));
    }
    Ok(match &s.kind {
        ScenarioKind::Periodic {
            amplitude,
            period,
            active,
        } => {
            if t < *active {
                amplitude * (2.0 * core::f64::consts::PI * t / period).sin()
            } else {
                0.0
            }
        }
        ScenarioKind::DecelAccel => {
            if t < 30.0 {
                0.0
            } else if t < 38.0 {
                -2.5
            } else if t < 68.0 {
                0.0
            } else if t < 76.0 {
                2.5
            } else {
                0.0
            }
        }
        ScenarioKind::Custom { samples } => {
            let first = samples[0];
            let last = samples[samples.len() - 1];
            if t <= first.0 {
                first.1
            } else if t >= last.0 {
                last.1
            } else {
                let i = samples.partition_point(|(ts, _)| *ts <= t) - 1;
                let (t0, a0) = samples[i];
                let (t1, a1) = samples[i + 1];
                a0 + (a1 - a0) * (t - t0) / (t1 - t0)
            }
        }
    })
}

/// Control role of one platoon vehicle.
#[derive(Debug, Clone)]
enum Role {
    CtgLeader {
        ahead: usize,
        params: CtgParams,
        exo: ExoLeaderKind,
    },
    CsFollower {
        pred: usize,
        leader: usize,
        params: CsParams,
        index: usize,
    },
    CtgFollower {
        preds: Vec<usize>,
        params: CtgParams,
        r: usize,
    },
}

/// One collision-flag event: the follower's front-to-rear gap to the vehicle
/// ahead became non-positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub step: usize,
    pub follower: usize,
}

/// Time series of one vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleSeries {
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub u: Vec<f64>,
    pub ds: Vec<f64>,
}

impl VehicleSeries {
    fn with_capacity(n: usize) -> Self {
        Self {
            p: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            ds: Vec::with_capacity(n),
        }
    }
}

/// Full trace of a run. Vehicle 0 is the exogenous vehicle; platoon vehicles
/// follow in order, platoon by platoon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub dt: f64,
    pub duration: f64,
    pub platoon_sizes: Vec<usize>,
    pub vehicle_length: f64,
    pub standstill: f64,
    pub vehicles: Vec<VehicleSeries>,
    pub collisions: Vec<CollisionEvent>,
}

impl SimulationTrace {
    /// Number of samples per series (`steps + 1`).
    pub fn samples(&self) -> usize {
        self.vehicles[0].p.len()
    }

    /// Platoon vehicle count, exogenous vehicle excluded.
    pub fn platoon_vehicle_count(&self) -> usize {
        self.platoon_sizes.iter().sum()
    }

    pub fn collision_flagged(&self) -> bool {
        !self.collisions.is_empty()
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

struct Engine {
    roles: Vec<Role>,
    states: Vec<VehicleState>,
    histories: Vec<StateHistory>,
    length: f64,
    standstill: f64,
}

impl Engine {
    fn control(&self, role_idx: usize, t: f64) -> Result<f64> {
        let me = &self.states[role_idx + 1];
        match &self.roles[role_idx] {
            Role::CtgLeader { ahead, params, exo } => ctg_control(
                me,
                &self.histories[*ahead],
                t,
                params,
                self.length,
                self.standstill,
                *exo,
            ),
            Role::CsFollower {
                pred,
                leader,
                params,
                index,
            } => cs_control(
                me,
                &self.histories[*pred],
                &self.histories[*leader],
                t,
                params,
                self.length,
                self.standstill,
                *index,
            ),
            Role::CtgFollower { preds, params, r } => {
                let hists: Vec<&StateHistory> = preds.iter().map(|i| &self.histories[*i]).collect();
                ctg_follower_control(me, &hists, t, params, self.length, self.standstill, *r)
            }
        }
    }

    fn spacing_error(&self, role_idx: usize, t: f64) -> Result<f64> {
        let me = &self.states[role_idx + 1];
        match &self.roles[role_idx] {
            Role::CtgLeader { ahead, params, .. } => ctg_spacing_error(
                me.p,
                me.v,
                &self.histories[*ahead],
                t,
                params,
                self.length,
                self.standstill,
            ),
            Role::CsFollower { pred, params, .. } => cs_spacing_error(
                me.p,
                &self.histories[*pred],
                t,
                params,
                self.length,
                self.standstill,
            ),
            Role::CtgFollower { preds, params, .. } => {
                let pred = self.histories[preds[0]].lookup(t - params.g)?;
                Ok(pred.p - me.p - (params.h * me.v + self.standstill + self.length))
            }
        }
    }
}

fn build_roles(cfgs: &[PlatoonConfig]) -> Result<(Vec<Role>, Vec<f64>)> {
    let mut roles = Vec::new();
    let mut gaps = Vec::new(); // equilibrium front-to-front gap to the vehicle ahead, per unit v0 parts
    let mut global = 1usize; // next platoon vehicle's global index
    for cfg in cfgs {
        let g = cfg.compensation_delay();
        let leader_global = global;
        for i in 1..=cfg.n {
            let ahead = global - 1;
            match (cfg.kind, i) {
                (PlatoonKind::Hybrid, 1) | (PlatoonKind::Ctg, 1) => {
                    let params = CtgParams {
                        k_s: cfg.ctg.k_s,
                        k_v: cfg.ctg.k_v,
                        k_a: cfg.ctg.k_a,
                        h: cfg.ctg.h_leader,
                        g,
                    };
                    roles.push(Role::CtgLeader {
                        ahead,
                        params,
                        exo: cfg.exo_kind,
                    });
                    gaps.push((cfg.ctg.h_leader, g));
                }
                (PlatoonKind::Cs, 1) => {
                    // the vehicle ahead serves as both predecessor and leader
                    let params = CsParams {
                        q1: cfg.cs.q1,
                        q3: cfg.cs.q3,
                        q4: cfg.cs.q4,
                        lambda: cfg.cs.lambda,
                        g,
                        sigma: g,
                    };
                    roles.push(Role::CsFollower {
                        pred: ahead,
                        leader: ahead,
                        params,
                        index: 2,
                    });
                    gaps.push((0.0, g));
                }
                (PlatoonKind::Hybrid, _) | (PlatoonKind::Cs, _) => {
                    let params = CsParams {
                        q1: cfg.cs.q1,
                        q3: cfg.cs.q3,
                        q4: cfg.cs.q4,
                        lambda: cfg.cs.lambda,
                        g,
                        sigma: g * (i - 1) as f64,
                    };
                    roles.push(Role::CsFollower {
                        pred: ahead,
                        leader: leader_global,
                        params,
                        index: i,
                    });
                    gaps.push((0.0, g));
                }
                (PlatoonKind::Ctg, _) => {
                    let m = cfg.r.min(i - 1);
                    let preds: Vec<usize> = (1..=m).map(|j| global - j).collect();
                    let params = CtgParams {
                        k_s: cfg.ctg.k_s,
                        k_v: cfg.ctg.k_v,
                        k_a: cfg.ctg.k_a,
                        h: cfg.ctg.h_follower,
                        g,
                    };
                    roles.push(Role::CtgFollower {
                        preds,
                        params,
                        r: cfg.r,
                    });
                    gaps.push((cfg.ctg.h_follower, g));
                }
            }
            global += 1;
        }
    }
    // gaps carry (h, g); the caller turns them into distances at v0
    let _ = &gaps;
    Ok((roles, gaps.into_iter().map(|(h, g)| h + g).collect()))
}

/// Runs a chain of platoons behind one exogenous vehicle.
///
/// The first vehicle of every platoon after the first treats the previous
/// platoon's tail as the vehicle ahead, with unchanged in-platoon topology.
/// All platoons must share the spacing-policy kind unless `allow_mixed` is
/// set.
pub fn run_multi(
    cfgs: &[PlatoonConfig],
    scenario: &Scenario,
    dt: f64,
    allow_mixed: bool,
) -> Result<SimulationTrace> {
    if cfgs.is_empty() {
        return Err(Error::Config("at least one platoon is required".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config("dt must be > 0".into()));
    }
    scenario.validate()?;
    for cfg in cfgs {
        cfg.validate()?;
    }
    if !allow_mixed && cfgs.iter().any(|c| c.kind != cfgs[0].kind) {
        return Err(Error::Config(
            "multi-platoon systems must share one platoon kind (pass allow_mixed to override)"
                .into(),
        ));
    }
    if cfgs.iter().any(|c| c.vehicle != cfgs[0].vehicle) {
        return Err(Error::Config(
            "all platoons must share vehicle parameters".into(),
        ));
    }

    let length = cfgs[0].vehicle.length;
    let standstill = cfgs[0].vehicle.standstill;
    let phi = cfgs[0].vehicle.phi;
    let v0 = scenario.v0;

    let (roles, gap_rates) = build_roles(cfgs)?;
    let total = roles.len() + 1;

    // equilibrium front-to-front gaps at v0
    let mut positions = Vec::with_capacity(total);
    positions.push(scenario.start_position);
    for rate in &gap_rates {
        let gap = rate * v0 + standstill + length;
        if gap - length <= 0.0 {
            return Err(Error::Config("non-positive equilibrium clear gap".into()));
        }
        let prev = *positions.last().unwrap();
        positions.push(prev - gap);
    }

    let n_steps = (scenario.duration / dt).round() as usize;
    if n_steps == 0 {
        return Err(Error::Config("duration shorter than one step".into()));
    }

    // largest delayed lookback needed, with slack
    let max_delay = roles
        .iter()
        .map(|r| match r {
            Role::CtgLeader { params, .. } => params.g,
            Role::CsFollower { params, .. } => params.g.max(params.sigma),
            Role::CtgFollower { params, .. } => params.g,
        })
        .fold(0.0, f64::max);
    let prefill = (max_delay / dt).ceil() as usize + 2;

    let a0_init = exogenous_profile(scenario, 0.0)?;
    let states: Vec<VehicleState> = positions
        .iter()
        .enumerate()
        .map(|(i, &p)| VehicleState::new(p, v0, if i == 0 { a0_init } else { 0.0 }))
        .collect();

    // histories pre-filled with backdated constant-speed motion
    let mut histories: Vec<StateHistory> = Vec::with_capacity(total);
    for state in &states {
        let t0 = -(prefill as f64) * dt;
        let mut h = StateHistory::new(dt, t0, VehicleState::new(state.p + v0 * t0, v0, 0.0))?;
        for k in 1..=prefill {
            let t = t0 + k as f64 * dt;
            let s = if k == prefill {
                *state
            } else {
                VehicleState::new(state.p + v0 * t, v0, 0.0)
            };
            h.push(s)?;
        }
        histories.push(h);
    }

    let mut engine = Engine {
        roles,
        states,
        histories,
        length,
        standstill,
    };
    let mut series: Vec<VehicleSeries> = (0..total)
        .map(|_| VehicleSeries::with_capacity(n_steps + 1))
        .collect();
    let mut collisions = Vec::new();

    for k in 0..=n_steps {
        let t = k as f64 * dt;

        let mut controls = Vec::with_capacity(total - 1);
        for idx in 0..engine.roles.len() {
            let u = engine.control(idx, t)?;
            if !u.is_finite() {
                return Err(Error::Numeric {
                    step: k,
                    vehicle: idx + 1,
                });
            }
            controls.push(u);
        }

        for i in 0..total {
            let s = engine.states[i];
            series[i].p.push(s.p);
            series[i].v.push(s.v);
            series[i].a.push(s.a);
            if i == 0 {
                series[i].u.push(s.a);
                series[i].ds.push(0.0);
            } else {
                series[i].u.push(controls[i - 1]);
                series[i].ds.push(engine.spacing_error(i - 1, t)?);
            }
            if i > 0 && engine.states[i - 1].p - s.p - length <= 0.0 {
                collisions.push(CollisionEvent {
                    step: k,
                    follower: i,
                });
            }
        }

        if k == n_steps {
            break;
        }

        // advance everything, then commit
        let t_next = (k + 1) as f64 * dt;
        let exo = engine.states[0];
        engine.states[0] = VehicleState::new(
            exo.p + dt * exo.v,
            exo.v + dt * exo.a,
            exogenous_profile(scenario, t_next)?,
        );
        for i in 1..total {
            engine.states[i] =
                step_dynamics(engine.states[i], controls[i - 1], phi, dt).map_err(|_| {
                    Error::Numeric {
                        step: k,
                        vehicle: i,
                    }
                })?;
        }
        for i in 0..total {
            engine.histories[i].push(engine.states[i])?;
        }
    }

    Ok(SimulationTrace {
        dt,
        duration: n_steps as f64 * dt,
        platoon_sizes: cfgs.iter().map(|c| c.n).collect(),
        vehicle_length: length,
        standstill,
        vehicles: series,
        collisions,
    })
}

/// Runs one platoon behind the exogenous vehicle.
pub fn run(cfg: &PlatoonConfig, scenario: &Scenario, dt: f64) -> Result<SimulationTrace> {
    run_multi(core::slice::from_ref(cfg), scenario, dt, false)
}

/// Equilibrium front-to-front gaps for a config at speed `v0`, first the gap
/// of vehicle 1 to the exogenous vehicle, then one gap per following link.
pub fn equilibrium_gaps(cfg: &PlatoonConfig, v0: f64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (_, rates) = build_roles(core::slice::from_ref(cfg))?;
    Ok(rates
        .iter()
        .map(|rate| rate * v0 + cfg.vehicle.standstill + cfg.vehicle.length)
        .collect())
}
