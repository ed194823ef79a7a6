//! Frequency-domain stability analysis.
//!
//! Local stability is decided by closed-form residual predicates on the
//! delay-free closed loops. String stability is decided by sweeping magnitude
//! conditions over a frequency grid:
//!
//! - `eq14`: per-hop spacing-error magnitude `|B/A| <= 1`,
//! - `eq18`: ex-head-to-tail sufficient condition
//!   `|(1 + GK + GFh)/(GK)| >= max(|C|/(|A| - |B|), 1)`,
//! - `eq22`: the leader acceleration ratio `|GK/(1 + GK + GFh)|`,
//! - `head_to_tail`: the last-to-first acceleration magnitude
//!   `|(B/A)^(n-1) + C/(A-B) (1 - (B/A)^(n-1))|`.
//!
//! Verdicts are for the sufficient conditions only: a false verdict means the
//! condition could not be certified on the grid, not that the platoon is
//! necessarily unstable. Delay factors `e^{-gz}` have unit magnitude on the
//! imaginary axis and drop out of every condition.

use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::control::{CsParams, CtgParams};
use crate::error::{Error, Result};

/// Relative tolerance for verdict comparisons.
pub const VERDICT_TOL: f64 = 1e-9;
/// Distance to the boundary below which a verdict is flagged marginal.
pub const MARGINAL_BAND: f64 = 1e-6;
/// Denominator magnitude treated as a singular frequency.
pub const SINGULAR_EPS: f64 = 1e-15;

pub const DEFAULT_GRID_MIN: f64 = 1e-3;
pub const DEFAULT_GRID_MAX: f64 = 1e3;
pub const DEFAULT_GRID_POINTS: usize = 2000;
/// Linear points inserted into each interval where a verdict flips.
pub const REFINE_POINTS: usize = 200;

/// Transfer blocks of the platoon in the Laplace domain, evaluated at one
/// complex frequency. `g`/`k`/`f` belong to the CTG leader loop, `a`/`b`/`c`
/// to the CS follower recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferBlocks {
    pub g: Complex64,
    pub k: Complex64,
    pub f: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

/// Evaluates all six blocks at `z`. `z = 0` is singular (the plant contains a
/// double integrator).
pub fn eval_blocks(
    z: Complex64,
    ctg: &CtgParams,
    cs: &CsParams,
    phi: f64,
) -> Result<TransferBlocks> {
    let plant_den = z * z + z * z * z * phi;
    if plant_den.norm() < SINGULAR_EPS {
        return Err(Error::SingularFrequency { w: z.im });
    }
    let one = Complex64::new(1.0, 0.0);
    let g = one / plant_den;
    let k = z * z * ctg.k_a + z * ctg.k_v + ctg.k_s;
    let f = z * ctg.k_s;
    let a = z * z * (one + z * phi) * (1.0 + cs.q3)
        + z * (cs.q1 + cs.lambda + cs.q4 + cs.q3 * cs.lambda)
        + (cs.q1 + cs.q4) * cs.lambda;
    let b = z * z + z * (cs.q1 + cs.lambda) + cs.q1 * cs.lambda;
    let c = z * z * cs.q3 + z * (cs.q4 + cs.q3 * cs.lambda) + cs.q4 * cs.lambda;
    Ok(TransferBlocks { g, k, f, a, b, c })
}

/// Residuals of a closed-form local-stability predicate; stable iff all are
/// strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStability {
    pub residuals: Vec<f64>,
    pub stable: bool,
}

/// Local stability of the CS follower loop on spacing error.
pub fn local_stability_cs(p: &CsParams, phi: f64) -> LocalStability {
    let r1 = 1.0 + p.q3;
    let r2 = (p.q1 + p.q4) * p.lambda;
    let r3 = p.lambda * (1.0 + p.q3) - (p.lambda * phi - 1.0) * (p.q1 + p.q4);
    let residuals = alloc::vec![r1, r2, r3];
    let stable = residuals.iter().all(|&r| r > 0.0);
    LocalStability { residuals, stable }
}

/// Local stability of the CTG leader loop on acceleration.
pub fn local_stability_ctg(p: &CtgParams, phi: f64) -> LocalStability {
    let r1 = 1.0 + p.k_a;
    let r2 = p.k_s;
    let r3 = p.k_v + p.h * p.k_s;
    let r4 = (1.0 + p.k_a) * (p.k_v + p.h * p.k_s) - phi * p.k_s;
    let residuals = alloc::vec![r1, r2, r3, r4];
    let stable = residuals.iter().all(|&r| r > 0.0);
    LocalStability { residuals, stable }
}

/// Frequency grid in rad/s, strictly positive and sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    /// Logarithmic grid of `n` points over `[w_min, w_max]`.
    pub fn log(w_min: f64, w_max: f64, n: usize) -> Result<Self> {
        if !(w_min.is_finite() && w_max.is_finite() && w_min > 0.0 && w_max > w_min) {
            return Err(Error::Config(
                "frequency grid bounds must satisfy 0 < min < max".into(),
            ));
        }
        if n < 2 {
            return Err(Error::Config(
                "frequency grid needs at least 2 points".into(),
            ));
        }
        let (l0, l1) = (w_min.ln(), w_max.ln());
        let points = (0..n)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
            .collect();
        Ok(Self { points })
    }

    pub fn default_grid() -> Self {
        Self::log(DEFAULT_GRID_MIN, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS).unwrap()
    }

    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Config(
                "frequency grid must be finite and positive".into(),
            ));
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Returns a new grid with `REFINE_POINTS` linear points inserted into
    /// every interval whose endpoints disagree on any status flag.
    fn refine_where(&self, flips: &[bool]) -> Self {
        debug_assert_eq!(flips.len() + 1, self.points.len());
        let mut merged = self.points.clone();
        for (i, flip) in flips.iter().enumerate() {
            if !flip {
                continue;
            }
            let (lo, hi) = (self.points[i], self.points[i + 1]);
            for k in 1..=REFINE_POINTS {
                merged.push(lo + (hi - lo) * k as f64 / (REFINE_POINTS + 1) as f64);
            }
        }
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        merged.dedup();
        Self { points: merged }
    }
}

/// Raw per-frequency quantities entering every verdict.
#[derive(Debug, Clone, Copy)]
struct PointEval {
    eq14: f64,
    eq18_left: f64,
    /// `None` where `|A| <= |B|` (the sufficient condition's right side is
    /// undefined there and the condition counts as failed).
    eq18_right: Option<f64>,
    eq22: f64,
    head_to_tail: f64,
    eq14_singular: bool,
    eq18_singular: bool,
    h2t_singular: bool,
}

fn eval_point(w: f64, ctg: &CtgParams, cs: &CsParams, phi: f64, n: usize) -> PointEval {
    let z = Complex64::new(0.0, w);
    // the plant denominator never vanishes for w > 0
    let blocks = eval_blocks(z, ctg, cs, phi).expect("w > 0 is never singular for the plant");
    let (a_mag, b_mag, c_mag) = (blocks.a.norm(), blocks.b.norm(), blocks.c.norm());

    let eq14_singular = a_mag < SINGULAR_EPS;
    let eq14 = if eq14_singular {
        f64::MAX
    } else {
        b_mag / a_mag
    };

    let gk = blocks.g * blocks.k;
    let closed = Complex64::new(1.0, 0.0) + gk + blocks.g * blocks.f * ctg.h;
    let gk_mag = gk.norm();
    let eq18_singular = gk_mag < SINGULAR_EPS;
    let eq18_left = if eq18_singular {
        f64::MAX
    } else {
        closed.norm() / gk_mag
    };
    let eq22 = if closed.norm() < SINGULAR_EPS {
        f64::MAX
    } else {
        gk_mag / closed.norm()
    };
    let eq18_right = if a_mag > b_mag && !eq14_singular {
        Some((c_mag / (a_mag - b_mag)).max(1.0))
    } else {
        None
    };

    let ab = blocks.a - blocks.b;
    let h2t_singular = ab.norm() < SINGULAR_EPS || eq14_singular;
    let head_to_tail = if h2t_singular {
        f64::MAX
    } else {
        let rho = blocks.b / blocks.a;
        let rho_pow = rho.powu((n - 1) as u32);
        let one = Complex64::new(1.0, 0.0);
        (rho_pow + blocks.c / ab * (one - rho_pow)).norm()
    };

    PointEval {
        eq14,
        eq18_left,
        eq18_right,
        eq22,
        head_to_tail,
        eq14_singular,
        eq18_singular,
        h2t_singular,
    }
}

fn eq14_ok(p: &PointEval) -> bool {
    !p.eq14_singular && p.eq14 <= 1.0 + VERDICT_TOL
}

fn eq18_ok(p: &PointEval) -> bool {
    match p.eq18_right {
        Some(right) => !p.eq18_singular && p.eq18_left >= right - VERDICT_TOL * right.max(1.0),
        None => false,
    }
}

fn h2t_ok(p: &PointEval) -> bool {
    !p.h2t_singular && p.head_to_tail <= 1.0 + VERDICT_TOL
}

/// Per-frequency magnitude curve with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCurve {
    pub freqs: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub verdict: bool,
    pub marginal: bool,
    pub singular: Vec<f64>,
}

/// The two sides of the ex-head-to-tail sufficient condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExHeadToTailCurve {
    pub freqs: Vec<f64>,
    pub left: Vec<f64>,
    /// `None` where the right side is undefined (`|A| <= |B|`).
    pub right: Vec<Option<f64>>,
    pub verdict: bool,
    pub marginal: bool,
    pub singular: Vec<f64>,
}

fn sweep(
    ctg: &CtgParams,
    cs: &CsParams,
    phi: f64,
    n: usize,
    grid: &FrequencyGrid,
) -> (FrequencyGrid, Vec<PointEval>) {
    let evals: Vec<PointEval> = grid
        .points()
        .iter()
        .map(|&w| eval_point(w, ctg, cs, phi, n))
        .collect();
    let flips: Vec<bool> = evals
        .windows(2)
        .map(|pair| {
            eq14_ok(&pair[0]) != eq14_ok(&pair[1])
                || eq18_ok(&pair[0]) != eq18_ok(&pair[1])
                || pair[0].eq18_right.is_some() != pair[1].eq18_right.is_some()
                || h2t_ok(&pair[0]) != h2t_ok(&pair[1])
        })
        .collect();
    if flips.iter().any(|&f| f) {
        let refined = grid.refine_where(&flips);
        let evals = refined
            .points()
            .iter()
            .map(|&w| eval_point(w, ctg, cs, phi, n))
            .collect();
        (refined, evals)
    } else {
        (grid.clone(), evals)
    }
}

/// Sweeps the spacing-error string-stability magnitude `|B/A|` and verdicts
/// `<= 1` across the grid.
pub fn string_spacing_condition(cs: &CsParams, phi: f64, grid: &FrequencyGrid) -> ConditionCurve {
    // the CTG blocks do not enter eq14; any placeholder gains work
    let ctg = CtgParams {
        k_s: 1.0,
        k_v: 1.0,
        k_a: 0.0,
        h: 1.0,
        g: 0.0,
    };
    let (grid, evals) = sweep(&ctg, cs, phi, 2, grid);
    let magnitude: Vec<f64> = evals.iter().map(|p| p.eq14).collect();
    let singular: Vec<f64> = grid
        .points()
        .iter()
        .zip(&evals)
        .filter(|(_, p)| p.eq14_singular)
        .map(|(w, _)| *w)
        .collect();
    let verdict = evals.iter().all(eq14_ok);
    let worst = magnitude.iter().cloned().fold(f64::MIN, f64::max);
    ConditionCurve {
        freqs: grid.points().to_vec(),
        magnitude,
        verdict,
        marginal: (worst - 1.0).abs() < MARGINAL_BAND,
        singular,
    }
}

/// Sweeps both sides of the ex-head-to-tail condition and verdicts
/// `left >= right` across the grid. Frequencies where `|A| <= |B|` fail the
/// condition outright.
pub fn ex_head_to_tail_condition(
    ctg: &CtgParams,
    cs: &CsParams,
    phi: f64,
    grid: &FrequencyGrid,
) -> ExHeadToTailCurve {
    let (grid, evals) = sweep(ctg, cs, phi, 2, grid);
    let left: Vec<f64> = evals.iter().map(|p| p.eq18_left).collect();
    let right: Vec<Option<f64>> = evals.iter().map(|p| p.eq18_right).collect();
    let singular: Vec<f64> = grid
        .points()
        .iter()
        .zip(&evals)
        .filter(|(_, p)| p.eq18_singular)
        .map(|(w, _)| *w)
        .collect();
    let verdict = evals.iter().all(eq18_ok);
    let margin = evals
        .iter()
        .filter_map(|p| p.eq18_right.map(|r| p.eq18_left - r))
        .fold(f64::MAX, f64::min);
    ExHeadToTailCurve {
        freqs: grid.points().to_vec(),
        left,
        right,
        verdict,
        marginal: margin.abs() < MARGINAL_BAND,
        singular,
    }
}

/// Head-to-tail acceleration magnitude curve for a platoon of `n` vehicles,
/// with its minimum and maximum over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadToTailCurve {
    pub freqs: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub n: usize,
    pub min: f64,
    pub max: f64,
    /// True iff the magnitude stays `<= 1` on the whole grid.
    pub verdict: bool,
    pub marginal: bool,
    pub singular: Vec<f64>,
}

pub fn head_to_tail_norm(
    cs: &CsParams,
    phi: f64,
    n: usize,
    grid: &FrequencyGrid,
) -> Result<HeadToTailCurve> {
    if n < 2 {
        return Err(Error::Config("head_to_tail_norm needs n >= 2".into()));
    }
    let ctg = CtgParams {
        k_s: 1.0,
        k_v: 1.0,
        k_a: 0.0,
        h: 1.0,
        g: 0.0,
    };
    let (grid, evals) = sweep(&ctg, cs, phi, n, grid);
    let magnitude: Vec<f64> = evals.iter().map(|p| p.head_to_tail).collect();
    let singular: Vec<f64> = grid
        .points()
        .iter()
        .zip(&evals)
        .filter(|(_, p)| p.h2t_singular)
        .map(|(w, _)| *w)
        .collect();
    let regular: Vec<f64> = evals
        .iter()
        .filter(|p| !p.h2t_singular)
        .map(|p| p.head_to_tail)
        .collect();
    let min = regular.iter().cloned().fold(f64::MAX, f64::min);
    let max = regular.iter().cloned().fold(f64::MIN, f64::max);
    Ok(HeadToTailCurve {
        freqs: grid.points().to_vec(),
        magnitude,
        n,
        min,
        max,
        verdict: evals.iter().all(h2t_ok),
        marginal: (max - 1.0).abs() < MARGINAL_BAND,
        singular,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub local_cs: bool,
    pub local_ctg: bool,
    pub string_spacing: bool,
    pub ex_head_to_tail: bool,
    pub head_to_tail: bool,
    pub hybrid: bool,
}

/// Full stability report: every curve, every verdict, and the parameters they
/// were computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub ctg: CtgParams,
    pub cs: CsParams,
    pub phi: f64,
    pub grid: Vec<f64>,
    /// `|B/A|` per frequency.
    pub eq14: Vec<f64>,
    /// Left side of the ex-head-to-tail condition per frequency.
    pub eq18_left: Vec<f64>,
    /// Right side per frequency; `None` where undefined.
    pub eq18_right: Vec<Option<f64>>,
    /// Leader acceleration ratio `|GK/(1 + GK + GFh)|` per frequency.
    pub eq22: Vec<f64>,
    /// Head-to-tail magnitude per frequency for `head_to_tail_n` vehicles.
    pub head_to_tail: Vec<f64>,
    pub head_to_tail_n: usize,
    pub head_to_tail_min: f64,
    pub head_to_tail_max: f64,
    pub local_cs_residuals: Vec<f64>,
    pub local_ctg_residuals: Vec<f64>,
    pub verdicts: Verdicts,
    pub marginal_string_spacing: bool,
    pub marginal_ex_head_to_tail: bool,
    pub singular_frequencies: Vec<f64>,
    /// Failed hybrid sub-conditions, named by equation: "eq14" and/or "eq18".
    pub failing: Vec<String>,
}

impl StabilityReport {
    /// Structural self-check used by the JSON round-trip contract.
    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.eq14.len() != n
            || self.eq18_left.len() != n
            || self.eq18_right.len() != n
            || self.eq22.len() != n
            || self.head_to_tail.len() != n
        {
            return Err(Error::Config(
                "report curve lengths disagree with grid".into(),
            ));
        }
        if self.grid.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Config(
                "report grid must be strictly increasing".into(),
            ));
        }
        if self.grid.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::Config(
                "report grid must be positive and finite".into(),
            ));
        }
        for (name, curve) in [
            ("eq14", &self.eq14),
            ("eq18_left", &self.eq18_left),
            ("eq22", &self.eq22),
            ("head_to_tail", &self.head_to_tail),
        ] {
            if curve.iter().any(|m| !m.is_finite()) {
                return Err(Error::Config(alloc::format!(
                    "{name} curve contains non-finite values"
                )));
            }
        }
        if self.verdicts.hybrid != (self.verdicts.string_spacing && self.verdicts.ex_head_to_tail) {
            return Err(Error::Config(
                "hybrid verdict must equal eq14 && eq18".into(),
            ));
        }
        let mut failing = Vec::new();
        if !self.verdicts.string_spacing {
            failing.push(String::from("eq14"));
        }
        if !self.verdicts.ex_head_to_tail {
            failing.push(String::from("eq18"));
        }
        if failing != self.failing {
            return Err(Error::Config("failing list disagrees with verdicts".into()));
        }
        Ok(())
    }
}

/// Runs every stability check and aggregates the curves into one report.
///
/// The hybrid verdict is the conjunction of the spacing-error condition and
/// the ex-head-to-tail condition.
pub fn hybrid_verdict(
    ctg: &CtgParams,
    cs: &CsParams,
    phi: f64,
    n: usize,
    grid: &FrequencyGrid,
) -> Result<StabilityReport> {
    if n < 2 {
        return Err(Error::Config("platoon size n must be >= 2".into()));
    }
    let (grid, evals) = sweep(ctg, cs, phi, n, grid);
    let local_cs = local_stability_cs(cs, phi);
    let local_ctg = local_stability_ctg(ctg, phi);

    let string_spacing = evals.iter().all(eq14_ok);
    let ex_head_to_tail = evals.iter().all(eq18_ok);
    let head_to_tail = evals.iter().all(h2t_ok);
    let hybrid = string_spacing && ex_head_to_tail;

    let mut singular: Vec<f64> = grid
        .points()
        .iter()
        .zip(&evals)
        .filter(|(_, p)| p.eq14_singular || p.eq18_singular || p.h2t_singular)
        .map(|(w, _)| *w)
        .collect();
    singular.dedup();

    let h2t_regular: Vec<f64> = evals
        .iter()
        .filter(|p| !p.h2t_singular)
        .map(|p| p.head_to_tail)
        .collect();
    let eq14_worst = evals.iter().map(|p| p.eq14).fold(f64::MIN, f64::max);
    let eq18_margin = evals
        .iter()
        .filter_map(|p| p.eq18_right.map(|r| p.eq18_left - r))
        .fold(f64::MAX, f64::min);

    let mut failing = Vec::new();
    if !string_spacing {
        failing.push(String::from("eq14"));
    }
    if !ex_head_to_tail {
        failing.push(String::from("eq18"));
    }

    Ok(StabilityReport {
        ctg: *ctg,
        cs: *cs,
        phi,
        grid: grid.points().to_vec(),
        eq14: evals.iter().map(|p| p.eq14).collect(),
        eq18_left: evals.iter().map(|p| p.eq18_left).collect(),
        eq18_right: evals.iter().map(|p| p.eq18_right).collect(),
        eq22: evals.iter().map(|p| p.eq22).collect(),
        head_to_tail: evals.iter().map(|p| p.head_to_tail).collect(),
        head_to_tail_n: n,
        head_to_tail_min: h2t_regular.iter().cloned().fold(f64::MAX, f64::min),
        head_to_tail_max: h2t_regular.iter().cloned().fold(f64::MIN, f64::max),
        local_cs_residuals: local_cs.residuals,
        local_ctg_residuals: local_ctg.residuals,
        verdicts: Verdicts {
            local_cs: local_cs.stable,
            local_ctg: local_ctg.stable,
            string_spacing,
            ex_head_to_tail,
            head_to_tail,
            hybrid,
        },
        marginal_string_spacing: (eq14_worst - 1.0).abs() < MARGINAL_BAND,
        marginal_ex_head_to_tail: eq18_margin.abs() < MARGINAL_BAND,
        singular_frequencies: singular,
        failing,
    })
}

/// Parameter axis selectable by name in a feasibility scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParam {
    Q1,
    Q3,
    Q4,
    Lambda,
    KS,
    KV,
    KA,
    H,
    Phi,
}

impl ScanParam {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "q1" => Self::Q1,
            "q3" => Self::Q3,
            "q4" => Self::Q4,
            "lambda" => Self::Lambda,
            "k_s" => Self::KS,
            "k_v" => Self::KV,
            "k_a" => Self::KA,
            "h" => Self::H,
            "phi" => Self::Phi,
            other => {
                return Err(Error::Config(alloc::format!(
                    "unknown scan parameter '{other}' (expected one of q1, q3, q4, lambda, k_s, k_v, k_a, h, phi)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Q1 => "q1",
            Self::Q3 => "q3",
            Self::Q4 => "q4",
            Self::Lambda => "lambda",
            Self::KS => "k_s",
            Self::KV => "k_v",
            Self::KA => "k_a",
            Self::H => "h",
            Self::Phi => "phi",
        }
    }

    fn apply(&self, value: f64, ctg: &mut CtgParams, cs: &mut CsParams, phi: &mut f64) {
        match self {
            Self::Q1 => cs.q1 = value,
            Self::Q3 => cs.q3 = value,
            Self::Q4 => cs.q4 = value,
            Self::Lambda => cs.lambda = value,
            Self::KS => ctg.k_s = value,
            Self::KV => ctg.k_v = value,
            Self::KA => ctg.k_a = value,
            Self::H => ctg.h = value,
            Self::Phi => *phi = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanAxis {
    pub param: ScanParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl ScanAxis {
    fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Config("scan axis count must be >= 1".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::Config(
                "scan axis range must be finite with min <= max".into(),
            ));
        }
        if self.count == 1 || self.min == self.max {
            return Ok(alloc::vec![self.min]);
        }
        Ok((0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect())
    }
}

/// Boolean matrix of hybrid verdicts over a Cartesian parameter grid.
/// `verdicts[iy][ix]` corresponds to `(x_values[ix], y_values[iy])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityGrid {
    pub x_param: ScanParam,
    pub y_param: ScanParam,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub verdicts: Vec<Vec<bool>>,
}

/// Scans the hybrid verdict over two parameter axes, all other parameters
/// fixed.
pub fn feasibility_scan(
    x: &ScanAxis,
    y: &ScanAxis,
    ctg: &CtgParams,
    cs: &CsParams,
    phi: f64,
    n: usize,
    grid: &FrequencyGrid,
) -> Result<FeasibilityGrid> {
    let x_values = x.values()?;
    let y_values = y.values()?;
    let mut verdicts = Vec::with_capacity(y_values.len());
    for &yv in &y_values {
        let mut row = Vec::with_capacity(x_values.len());
        for &xv in &x_values {
            let mut ctg_c = *ctg;
            let mut cs_c = *cs;
            let mut phi_c = phi;
            x.param.apply(xv, &mut ctg_c, &mut cs_c, &mut phi_c);
            y.param.apply(yv, &mut ctg_c, &mut cs_c, &mut phi_c);
            let report = hybrid_verdict(&ctg_c, &cs_c, phi_c, n, grid)?;
            row.push(report.verdicts.hybrid);
        }
        verdicts.push(row);
    }
    Ok(FeasibilityGrid {
        x_param: x.param,
        y_param: y.param,
        x_values,
        y_values,
        verdicts,
    })
}
