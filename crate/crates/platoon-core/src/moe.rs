//! Measurements of effectiveness computed from a simulation trace:
//! traffic outflow, dampening ratio, fuel/emission totals, surrogate safety
//! (TTC / TET / TIT), and ride comfort (maximum jerk).
//!
//! All metrics range over the platoon vehicles only; the exogenous vehicle
//! (index 0) enters solely as the reference for the dampening ratio and as
//! the predecessor of vehicle 1 in the safety measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SimulationTrace;
use alloc::vec::Vec;

/// ln(rate) above which a sample is excluded as an overflow.
const OVERFLOW_LN: f64 = 700.0;

/// Energy/emission category of the log-polynomial consumption model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Fuel,
    Hc,
    Co,
    Nox,
    Co2,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Fuel,
        Category::Hc,
        Category::Co,
        Category::Nox,
        Category::Co2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Category::Fuel => "fuel",
            Category::Hc => "hc",
            Category::Co => "co",
            Category::Nox => "nox",
            Category::Co2 => "co2",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "fuel" => Category::Fuel,
            "hc" => Category::Hc,
            "co" => Category::Co,
            "nox" => Category::Nox,
            "co2" => Category::Co2,
            other => {
                return Err(Error::Config(alloc::format!(
                    "unknown emission category '{other}'"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpeedUnit {
    #[serde(rename = "m/s")]
    MetersPerSecond,
    #[serde(rename = "km/h")]
    KilometersPerHour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccelUnit {
    #[serde(rename = "m/s^2")]
    MetersPerSecondSquared,
    #[serde(rename = "km/h/s")]
    KilometersPerHourPerSecond,
}

/// Input units the coefficient matrices were fitted in. Declarations are
/// mandatory in the coefficient file; a silent unit mismatch is the dominant
/// failure mode of consumption models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VtMicroUnits {
    pub speed: SpeedUnit,
    pub acceleration: AccelUnit,
}

/// Regression coefficients of the log-polynomial consumption model:
/// `ln(rate) = sum over c1, c2 of e[c1][c2] * v^c1 * a^c2` with speed and
/// acceleration powers 0..=3, one 4x4 matrix per category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VtMicroCoefficients {
    pub units: VtMicroUnits,
    pub fuel: [[f64; 4]; 4],
    pub hc: [[f64; 4]; 4],
    pub co: [[f64; 4]; 4],
    pub nox: [[f64; 4]; 4],
    pub co2: [[f64; 4]; 4],
}

impl VtMicroCoefficients {
    pub fn matrix(&self, category: Category) -> &[[f64; 4]; 4] {
        match category {
            Category::Fuel => &self.fuel,
            Category::Hc => &self.hc,
            Category::Co => &self.co,
            Category::Nox => &self.nox,
            Category::Co2 => &self.co2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for cat in Category::ALL {
            if self.matrix(cat).iter().flatten().any(|e| !e.is_finite()) {
                return Err(Error::Config(alloc::format!(
                    "vt-micro matrix '{}' contains non-finite entries",
                    cat.name()
                )));
            }
        }
        Ok(())
    }

    fn convert(&self, v: f64, a: f64) -> (f64, f64) {
        let v = match self.units.speed {
            SpeedUnit::MetersPerSecond => v,
            SpeedUnit::KilometersPerHour => v * 3.6,
        };
        let a = match self.units.acceleration {
            AccelUnit::MetersPerSecondSquared => a,
            AccelUnit::KilometersPerHourPerSecond => a * 3.6,
        };
        (v, a)
    }
}

/// Total consumption for one category plus the count of overflow samples
/// that were excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VtMicroTotal {
    pub total: f64,
    pub overflow_samples: usize,
}

/// Traffic outflow through a downstream station.
///
/// Crossing times are found by linear interpolation of each position series
/// through `station_x`. The flow is the platoon vehicle count divided by the
/// interval from the exogenous vehicle's crossing (the head of the convoy)
/// to the last platoon vehicle's crossing.
pub fn traffic_outflow(trace: &SimulationTrace, station_x: f64) -> Result<f64> {
    let crossing = |vehicle: usize| -> Result<f64> {
        let p = &trace.vehicles[vehicle].p;
        let k = match p.iter().position(|&x| x >= station_x) {
            Some(k) => k,
            None => {
                return Err(Error::MeasurementInfeasible(alloc::format!(
                    "vehicle {vehicle} never crosses the station at {station_x} m"
                )))
            }
        };
        if k == 0 {
            return Ok(0.0);
        }
        let frac = (station_x - p[k - 1]) / (p[k] - p[k - 1]);
        Ok((k - 1) as f64 * trace.dt + frac * trace.dt)
    };
    let first = crossing(0)?;
    let last = crossing(trace.vehicles.len() - 1)?;
    for vehicle in 1..trace.vehicles.len() - 1 {
        crossing(vehicle)?;
    }
    let n = trace.platoon_vehicle_count() as f64;
    let interval = last - first;
    if interval <= 0.0 {
        return Err(Error::MeasurementInfeasible(
            "degenerate crossing interval".into(),
        ));
    }
    Ok(n / interval)
}

/// Dampening ratio: discrete L2 norm of the tail vehicle's acceleration over
/// the exogenous vehicle's, across the whole trace.
pub fn dampening_ratio(trace: &SimulationTrace) -> Result<f64> {
    let dt = trace.dt;
    let l2 = |series: &[f64]| -> f64 { (series.iter().map(|a| a * a).sum::<f64>() * dt).sqrt() };
    let denom = l2(&trace.vehicles[0].a);
    if denom == 0.0 {
        return Err(Error::MeasurementInfeasible(
            "exogenous acceleration is identically zero; dampening ratio undefined".into(),
        ));
    }
    Ok(l2(&trace.vehicles[trace.vehicles.len() - 1].a) / denom)
}

/// Time to collision of `vehicle` against the vehicle ahead at sample `step`.
/// Infinite when the subject is not closing in.
pub fn ttc(trace: &SimulationTrace, vehicle: usize, step: usize) -> f64 {
    let gap = trace.vehicles[vehicle - 1].p[step]
        - trace.vehicles[vehicle].p[step]
        - trace.vehicle_length;
    let closing = trace.vehicles[vehicle].v[step] - trace.vehicles[vehicle - 1].v[step];
    if closing > 0.0 {
        gap / closing
    } else {
        f64::INFINITY
    }
}

fn safety_sums(trace: &SimulationTrace, ttc_star: f64) -> Result<(f64, f64)> {
    if !(ttc_star.is_finite() && ttc_star > 0.0) {
        return Err(Error::Config("ttc_star must be > 0".into()));
    }
    let mut tet = 0.0;
    let mut tit = 0.0;
    for vehicle in 1..trace.vehicles.len() {
        for step in 0..trace.samples() {
            let t = ttc(trace, vehicle, step);
            if t > 0.0 && t <= ttc_star {
                tet += trace.dt;
                tit += (1.0 / t - 1.0 / ttc_star) * trace.dt;
            }
        }
    }
    Ok((tet, tit))
}

/// Time exposed time-to-collision: seconds spent with `0 < TTC <= ttc_star`,
/// summed over platoon vehicles.
pub fn tet(trace: &SimulationTrace, ttc_star: f64) -> Result<f64> {
    safety_sums(trace, ttc_star).map(|(t, _)| t)
}

/// Time integrated time-to-collision: integral of `1/TTC - 1/ttc_star` over
/// the exposed samples.
pub fn tit(trace: &SimulationTrace, ttc_star: f64) -> Result<f64> {
    safety_sums(trace, ttc_star).map(|(_, t)| t)
}

/// Default safety threshold (s).
pub const TTC_STAR: f64 = 2.0;

/// Maximum jerk over the platoon vehicles: forward difference of realized
/// acceleration.
pub fn max_jerk(trace: &SimulationTrace) -> Result<f64> {
    if trace.samples() < 2 {
        return Err(Error::MeasurementInfeasible(
            "trace too short for a jerk estimate".into(),
        ));
    }
    let mut worst = 0.0f64;
    for series in &trace.vehicles[1..] {
        for pair in series.a.windows(2) {
            worst = worst.max((pair[1] - pair[0]).abs() / trace.dt);
        }
    }
    Ok(worst)
}

/// Total consumption of one category over all platoon vehicles, by
/// trapezoidal integration of the instantaneous rate.
pub fn vt_micro(
    trace: &SimulationTrace,
    coeffs: &VtMicroCoefficients,
    category: Category,
) -> Result<VtMicroTotal> {
    coeffs.validate()?;
    let e = coeffs.matrix(category);
    let mut total = 0.0;
    let mut overflow = 0usize;
    for series in &trace.vehicles[1..] {
        let mut rates: Vec<f64> = Vec::with_capacity(trace.samples());
        for step in 0..trace.samples() {
            let (v, a) = coeffs.convert(series.v[step], series.a[step]);
            let mut ln_rate = 0.0;
            let mut v_pow = 1.0;
            for row in e.iter() {
                let mut va_pow = v_pow;
                for &coeff in row.iter() {
                    ln_rate += coeff * va_pow;
                    va_pow *= a;
                }
                v_pow *= v;
            }
            if ln_rate > OVERFLOW_LN {
                overflow += 1;
                rates.push(0.0);
            } else {
                rates.push(ln_rate.exp());
            }
        }
        let inner: f64 = rates[1..rates.len() - 1].iter().sum();
        total += (0.5 * rates[0] + inner + 0.5 * rates[rates.len() - 1]) * trace.dt;
    }
    Ok(VtMicroTotal {
        total,
        overflow_samples: overflow,
    })
}

/// All measurements of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoeSummary {
    pub outflow: f64,
    pub dampening_ratio: f64,
    pub fuel: f64,
    pub hc: f64,
    pub co: f64,
    pub nox: f64,
    pub co2: f64,
    pub tet: f64,
    pub tit: f64,
    pub max_jerk: f64,
    pub vt_overflow_samples: usize,
}

impl MoeSummary {
    pub fn compute(
        trace: &SimulationTrace,
        coeffs: &VtMicroCoefficients,
        station_x: f64,
        ttc_star: f64,
    ) -> Result<Self> {
        let (tet, tit) = safety_sums(trace, ttc_star)?;
        let mut totals = [0.0f64; 5];
        let mut overflow = 0usize;
        for (slot, cat) in totals.iter_mut().zip(Category::ALL) {
            let r = vt_micro(trace, coeffs, cat)?;
            *slot = r.total;
            overflow += r.overflow_samples;
        }
        Ok(Self {
            outflow: traffic_outflow(trace, station_x)?,
            dampening_ratio: dampening_ratio(trace)?,
            fuel: totals[0],
            hc: totals[1],
            co: totals[2],
            nox: totals[3],
            co2: totals[4],
            tet,
            tit,
            max_jerk: max_jerk(trace)?,
            vt_overflow_samples: overflow,
        })
    }

    pub fn category_total(&self, category: Category) -> f64 {
        match category {
            Category::Fuel => self.fuel,
            Category::Hc => self.hc,
            Category::Co => self.co,
            Category::Nox => self.nox,
            Category::Co2 => self.co2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::VehicleSeries;

    /// Hand-built trace: column of vehicles at constant speeds.
    fn synthetic_trace(
        dt: f64,
        samples: usize,
        starts: &[f64],
        speeds: &[f64],
        accels: &[f64],
    ) -> SimulationTrace {
        let vehicles = starts
            .iter()
            .zip(speeds)
            .zip(accels)
            .map(|((p0, v), a)| {
                let mut s = VehicleSeries {
                    p: Vec::new(),
                    v: Vec::new(),
                    a: Vec::new(),
                    u: Vec::new(),
                    ds: Vec::new(),
                };
                for k in 0..samples {
                    let t = k as f64 * dt;
                    s.p.push(p0 + v * t + 0.5 * a * t * t);
                    s.v.push(v + a * t);
                    s.a.push(*a);
                    s.u.push(*a);
                    s.ds.push(0.0);
                }
                s
            })
            .collect();
        SimulationTrace {
            dt,
            duration: (samples - 1) as f64 * dt,
            platoon_sizes: alloc::vec![starts.len() - 1],
            vehicle_length: 5.0,
            standstill: 5.0,
            vehicles,
            collisions: Vec::new(),
        }
    }

    #[test]
    fn outflow_constant_speed_column() {
        // exogenous + two platoon vehicles, 10 m apart, 20 m/s: the interval
        // from the exogenous crossing to the tail crossing is 1 s
        let trace = synthetic_trace(
            0.1,
            101,
            &[0.0, -10.0, -20.0],
            &[20.0, 20.0, 20.0],
            &[0.0, 0.0, 0.0],
        );
        let q = traffic_outflow(&trace, 50.0).unwrap();
        assert!((q - 2.0).abs() < 1e-9);
    }

    #[test]
    fn outflow_invariant_to_station_translation() {
        let trace = synthetic_trace(
            0.1,
            201,
            &[0.0, -10.0, -20.0],
            &[20.0, 20.0, 20.0],
            &[0.0, 0.0, 0.0],
        );
        let a = traffic_outflow(&trace, 30.0).unwrap();
        let b = traffic_outflow(&trace, 130.0).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn outflow_names_the_stranded_vehicle() {
        let trace = synthetic_trace(0.1, 11, &[0.0, -10.0], &[20.0, 0.0], &[0.0, 0.0]);
        match traffic_outflow(&trace, 5.0) {
            Err(Error::MeasurementInfeasible(msg)) => assert!(msg.contains("vehicle 1")),
            other => panic!("expected infeasible error, got {other:?}"),
        }
    }

    #[test]
    fn dampening_ratio_passthrough_is_one() {
        let mut trace = synthetic_trace(0.1, 50, &[0.0, -10.0], &[20.0, 20.0], &[0.0, 0.0]);
        for k in 0..50 {
            let a = (0.3 * k as f64).sin();
            trace.vehicles[0].a[k] = a;
            trace.vehicles[1].a[k] = a;
        }
        assert!((dampening_ratio(&trace).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dampening_ratio_zero_disturbance_is_undefined() {
        let trace = synthetic_trace(0.1, 50, &[0.0, -10.0], &[20.0, 20.0], &[0.0, 0.0]);
        assert!(matches!(
            dampening_ratio(&trace),
            Err(Error::MeasurementInfeasible(_))
        ));
    }

    #[test]
    fn ttc_definition() {
        // gap 20 m, closing at 4 m/s -> 5 s
        let trace = synthetic_trace(0.1, 2, &[25.0, 0.0], &[16.0, 20.0], &[0.0, 0.0]);
        assert!((ttc(&trace, 1, 0) - 5.0).abs() < 1e-12);
        // not closing -> infinity
        let trace = synthetic_trace(0.1, 2, &[25.0, 0.0], &[20.0, 16.0], &[0.0, 0.0]);
        assert!(ttc(&trace, 1, 0).is_infinite());
    }

    #[test]
    fn tet_tit_hand_evaluated_window() {
        // TTC pinned at exactly 1 s for exactly 10 samples: gap 2 m, closing
        // 2 m/s inside the window, far apart elsewhere
        let dt = 0.1;
        let samples = 30;
        let mut trace = synthetic_trace(dt, samples, &[0.0, -40.0], &[20.0, 20.0], &[0.0, 0.0]);
        for k in 0..samples {
            let flagged = (10..20).contains(&k);
            let gap = if flagged { 2.0 } else { 40.0 };
            trace.vehicles[0].p[k] = 100.0;
            trace.vehicles[1].p[k] = 100.0 - gap - trace.vehicle_length;
            trace.vehicles[0].v[k] = 20.0;
            trace.vehicles[1].v[k] = if flagged { 22.0 } else { 20.0 };
        }
        let tet_v = tet(&trace, 2.0).unwrap();
        let tit_v = tit(&trace, 2.0).unwrap();
        assert!((tet_v - 1.0).abs() < 1e-9);
        assert!((tit_v - 0.5).abs() < 1e-9);
    }

    #[test]
    fn tet_zero_iff_tit_zero() {
        let trace = synthetic_trace(0.1, 40, &[0.0, -15.0], &[20.0, 20.0], &[0.0, 0.0]);
        let t = tet(&trace, 2.0).unwrap();
        let i = tit(&trace, 2.0).unwrap();
        assert_eq!(t == 0.0, i == 0.0);
        assert_eq!(t, 0.0);
    }

    #[test]
    fn jerk_constant_acceleration_is_zero_and_scales_linearly() {
        let trace = synthetic_trace(0.1, 30, &[0.0, -15.0], &[20.0, 20.0], &[0.5, 0.5]);
        assert_eq!(max_jerk(&trace).unwrap(), 0.0);

        let mut varied = trace.clone();
        for k in 0..30 {
            varied.vehicles[1].a[k] = (0.4 * k as f64).sin();
        }
        let j1 = max_jerk(&varied).unwrap();
        let mut doubled = varied.clone();
        for k in 0..30 {
            doubled.vehicles[1].a[k] *= 2.0;
        }
        assert!((max_jerk(&doubled).unwrap() - 2.0 * j1).abs() < 1e-12);
    }

    fn constant_coeffs(e00: f64) -> VtMicroCoefficients {
        let mut m = [[0.0; 4]; 4];
        m[0][0] = e00;
        VtMicroCoefficients {
            units: VtMicroUnits {
                speed: SpeedUnit::KilometersPerHour,
                acceleration: AccelUnit::KilometersPerHourPerSecond,
            },
            fuel: m,
            hc: m,
            co: m,
            nox: m,
            co2: m,
        }
    }

    #[test]
    fn vt_micro_constant_rate() {
        // only e00 = c: total = n * T * exp(c)
        let trace = synthetic_trace(
            0.1,
            101,
            &[0.0, -10.0, -20.0],
            &[20.0, 20.0, 20.0],
            &[0.0; 3],
        );
        let c = -2.0;
        let r = vt_micro(&trace, &constant_coeffs(c), Category::Fuel).unwrap();
        assert!((r.total - 2.0 * 10.0 * c.exp()).abs() < 1e-9);
        assert_eq!(r.overflow_samples, 0);
    }

    #[test]
    fn vt_micro_stationary_trace() {
        let trace = synthetic_trace(0.1, 101, &[0.0, -10.0], &[0.0, 0.0], &[0.0, 0.0]);
        let mut coeffs = constant_coeffs(-1.0);
        // non-constant terms do not matter at v = a = 0
        coeffs.fuel[1][0] = 3.0;
        coeffs.fuel[0][2] = -4.0;
        let r = vt_micro(&trace, &coeffs, Category::Fuel).unwrap();
        assert!((r.total - 10.0 * (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn vt_micro_overflow_samples_are_excluded_and_counted() {
        let trace = synthetic_trace(0.1, 11, &[0.0, -10.0], &[30.0, 30.0], &[0.0, 0.0]);
        let mut coeffs = constant_coeffs(0.0);
        coeffs.fuel[3][0] = 1.0; // v^3 at 108 km/h -> ln rate around 1.26e6
        let r = vt_micro(&trace, &coeffs, Category::Fuel).unwrap();
        assert_eq!(r.overflow_samples, 11);
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn vt_micro_additive_over_time_splits() {
        let full = synthetic_trace(0.1, 41, &[0.0, -10.0], &[20.0, 20.0], &[0.0, 0.3]);
        let coeffs = constant_coeffs(-1.5);
        let slice = |lo: usize, hi: usize| {
            let mut t = full.clone();
            for s in &mut t.vehicles {
                s.p = s.p[lo..=hi].to_vec();
                s.v = s.v[lo..=hi].to_vec();
                s.a = s.a[lo..=hi].to_vec();
                s.u = s.u[lo..=hi].to_vec();
                s.ds = s.ds[lo..=hi].to_vec();
            }
            t
        };
        let whole = vt_micro(&full, &coeffs, Category::Co).unwrap().total;
        let first = vt_micro(&slice(0, 20), &coeffs, Category::Co)
            .unwrap()
            .total;
        let second = vt_micro(&slice(20, 40), &coeffs, Category::Co)
            .unwrap()
            .total;
        assert!((whole - (first + second)).abs() < 1e-9);
    }

    #[test]
    fn category_names_round_trip() {
        for cat in Category::ALL {
            assert_eq!(Category::from_name(cat.name()).unwrap(), cat);
        }
        assert!(Category::from_name("particulates").is_err());
    }
}
