//! Acceptance suite: every criterion the artifact must meet, one pass/fail
//! line per criterion (run with `--nocapture` to see them).
//!
//! Frequency-domain criteria are exact; Scenario-2 table criteria carry the
//! stated tolerances; Scenario-1 criteria are ordering/qualitative because
//! the disturbance waveform is only pinned up to amplitude and duration.

use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use platoon_cli::formats::load_coefficients;
use platoon_core::control::{CsParams, CtgParams};
use platoon_core::moe::{dampening_ratio, MoeSummary, VtMicroCoefficients};
use platoon_core::sim::{run, run_multi, PlatoonConfig, Scenario, SimulationTrace};
use platoon_core::stability::{
    eval_blocks, head_to_tail_norm, hybrid_verdict, local_stability_cs, local_stability_ctg,
    FrequencyGrid,
};

const DT: f64 = 0.1;
const STATION_FRACTION: f64 = 0.75;
const TTC_STAR: f64 = 2.0;
const N_RANGE: [usize; 7] = [4, 5, 6, 7, 8, 9, 10];

fn ctg_ref() -> CtgParams {
    CtgParams {
        k_s: 0.1,
        k_v: 0.7,
        k_a: 0.84,
        h: 1.4,
        g: 0.1,
    }
}

fn cs_ref(lambda: f64) -> CsParams {
    CsParams {
        q1: 0.4,
        q3: 0.9,
        q4: 0.6,
        lambda,
        g: 0.1,
        sigma: 0.1,
    }
}

fn coeffs() -> &'static VtMicroCoefficients {
    static C: OnceLock<VtMicroCoefficients> = OnceLock::new();
    C.get_or_init(|| load_coefficients(None).expect("bundled coefficients"))
}

fn station_for(trace: &SimulationTrace) -> f64 {
    let p0 = &trace.vehicles[0].p;
    p0[0] + STATION_FRACTION * (p0[p0.len() - 1] - p0[0])
}

fn summarize(trace: &SimulationTrace) -> MoeSummary {
    MoeSummary::compute(trace, coeffs(), station_for(trace), TTC_STAR).expect("moe summary")
}

/// Scenario-2 measurement grid: (system, n) -> summary, computed once.
fn scen2(system: &str, n: usize) -> &'static MoeSummary {
    static GRID: OnceLock<Vec<(&'static str, usize, MoeSummary)>> = OnceLock::new();
    let grid = GRID.get_or_init(|| {
        let mut cells = Vec::new();
        for sys in ["hybrid", "cs", "ctg2", "ctg3"] {
            for n in N_RANGE {
                let cfg = config_for(sys, n);
                let trace = run(&cfg, &Scenario::decel_accel(), DT).expect("scenario-2 run");
                assert!(
                    !trace.collision_flagged(),
                    "{sys} n={n} flagged a collision"
                );
                cells.push((sys, n, summarize(&trace)));
            }
        }
        cells
    });
    &grid
        .iter()
        .find(|(s, m, _)| *s == system && *m == n)
        .expect("cell exists")
        .2
}

fn config_for(system: &str, n: usize) -> PlatoonConfig {
    match system {
        "hybrid" => PlatoonConfig::hybrid(n),
        "cs" => PlatoonConfig::cs(n),
        "ctg2" => PlatoonConfig::ctg(n, 2),
        "ctg3" => PlatoonConfig::ctg(n, 3),
        other => panic!("unknown system {other}"),
    }
}

/// Scenario-1 traces used by the ordering and figure-shape criteria.
struct Scen1Fixture {
    hybrid_n7: MoeSummary,
    cs_n7: MoeSummary,
    ctg2_n7: MoeSummary,
    lam01_n5: SimulationTrace,
    lam03_n5: SimulationTrace,
}

fn scen1() -> &'static Scen1Fixture {
    static F: OnceLock<Scen1Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let s = Scenario::periodic();
        let run_sys = |sys: &str| {
            let trace = run(&config_for(sys, 7), &s, DT).expect("scenario-1 run");
            assert!(!trace.collision_flagged());
            summarize(&trace)
        };
        let mut lam03_cfg = PlatoonConfig::hybrid(5);
        lam03_cfg.cs.lambda = 0.3;
        Scen1Fixture {
            hybrid_n7: run_sys("hybrid"),
            cs_n7: run_sys("cs"),
            ctg2_n7: run_sys("ctg2"),
            lam01_n5: run(&PlatoonConfig::hybrid(5), &s, DT).unwrap(),
            lam03_n5: run(&lam03_cfg, &s, DT).unwrap(),
        }
    })
}

fn report_line(num: usize, desc: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {num:2}: {} - {} ({detail})",
        if pass { "PASS" } else { "FAIL" },
        desc
    );
    pass
}

fn amp(series: &[f64]) -> f64 {
    series.iter().fold(0.0f64, |m, a| m.max(a.abs()))
}

#[test]
fn criterion_01_stable_instance_is_hybrid_string_stable() {
    let start = Instant::now();
    let grid = FrequencyGrid::default_grid();
    let report = hybrid_verdict(&ctg_ref(), &cs_ref(0.1), 0.5, 5, &grid).unwrap();
    let elapsed = start.elapsed();
    let eq14_max = report.eq14.iter().cloned().fold(f64::MIN, f64::max);
    let pass = report.verdicts.hybrid
        && report.verdicts.string_spacing
        && report.verdicts.ex_head_to_tail
        && eq14_max <= 1.0 + 1e-9
        && elapsed.as_secs_f64() < 1.0;
    assert!(report_line(
        1,
        "lambda=0.1 instance hybrid string stable on the full grid",
        pass,
        &format!("eq14 max {eq14_max:.4}, runtime {elapsed:.2?}")
    ));
}

#[test]
fn criterion_02_unstable_instance_fails_only_the_acceleration_condition() {
    let start = Instant::now();
    let grid = FrequencyGrid::default_grid();
    let report = hybrid_verdict(&ctg_ref(), &cs_ref(0.3), 0.5, 5, &grid).unwrap();
    let elapsed = start.elapsed();
    let pass = report.verdicts.string_spacing
        && !report.verdicts.ex_head_to_tail
        && !report.verdicts.hybrid
        && report.failing == vec![String::from("eq18")]
        && elapsed.as_secs_f64() < 1.0;
    assert!(report_line(
        2,
        "lambda=0.3 instance fails eq18 only",
        pass,
        &format!("failing {:?}, runtime {elapsed:.2?}", report.failing)
    ));
}

#[test]
fn criterion_03_head_to_tail_norm_reaches_one_for_any_platoon_size() {
    // the head-to-tail curve equals 1 in the w -> 0 limit and exceeds it on
    // the grid, so its supremum stays >= 1: head-to-tail string stability on
    // acceleration cannot be certified for any n
    let start = Instant::now();
    let grid = FrequencyGrid::default_grid();
    let mut pass = true;
    let mut detail = String::new();
    for n in [2usize, 5, 10] {
        let curve = head_to_tail_norm(&cs_ref(0.1), 0.5, n, &grid).unwrap();
        let low_w = FrequencyGrid::from_points(vec![1e-6, 2e-6]).unwrap();
        let limit = head_to_tail_norm(&cs_ref(0.1), 0.5, n, &low_w).unwrap();
        pass &= curve.max >= 1.0 - 1e-6;
        pass &= (limit.magnitude[0] - 1.0).abs() < 1e-6;
        pass &= !curve.verdict;
        detail.push_str(&format!("n={n} sup {:.4}; ", curve.max));
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 1.0;
    assert!(report_line(
        3,
        "head-to-tail norm supremum >= 1 at n in {2, 5, 10}",
        pass,
        &format!("{detail}runtime {elapsed:.2?}")
    ));
}

/// Durand-Kerner roots of a cubic, the oracle for the local predicates.
fn cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let a = [c2 / c3, c1 / c3, c0 / c3];
    let eval = |z: Complex64| ((z + a[0]) * z + a[1]) * z + a[2];
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [seed, seed * seed, seed * seed * seed];
    for _ in 0..200 {
        let prev = roots;
        for i in 0..3 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    denom *= prev[i] - prev[j];
                }
            }
            roots[i] = prev[i] - eval(prev[i]) / denom;
        }
    }
    roots
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }
}

#[test]
fn criterion_04_local_predicates_and_root_finder_oracle() {
    let phi = 0.5;
    let cs = local_stability_cs(&cs_ref(0.1), phi);
    let ctg = local_stability_ctg(&ctg_ref(), phi);
    let mut pass = cs.stable
        && ctg.stable
        && cs.residuals.iter().all(|r| *r > 0.0)
        && ctg.residuals.iter().all(|r| *r > 0.0);

    // 20 in-region samples per predicate: the delay-free closed-loop cubic
    // must have strictly negative real parts
    let mut rng = Lcg(0xacce_97ed);
    let mut seen = 0;
    while seen < 20 {
        let p = CsParams {
            q1: rng.range(0.05, 1.2),
            q3: rng.range(-0.4, 1.2),
            q4: rng.range(0.05, 1.2),
            lambda: rng.range(0.02, 0.6),
            g: 0.0,
            sigma: 0.0,
        };
        let verdict = local_stability_cs(&p, phi);
        if !verdict.stable || verdict.residuals.iter().any(|r| r.abs() < 1e-3) {
            continue;
        }
        let roots = cubic_roots(
            (1.0 + p.q3) * phi,
            1.0 + p.q3,
            (p.q1 + p.q4) + p.lambda * (1.0 + p.q3),
            (p.q1 + p.q4) * p.lambda,
        );
        pass &= roots.iter().all(|r| r.re < 0.0);
        seen += 1;
    }
    seen = 0;
    while seen < 20 {
        let p = CtgParams {
            k_s: rng.range(0.02, 0.8),
            k_v: rng.range(0.1, 2.0),
            k_a: rng.range(-0.5, 1.2),
            h: rng.range(0.2, 2.0),
            g: 0.0,
        };
        let verdict = local_stability_ctg(&p, phi);
        if !verdict.stable || verdict.residuals.iter().any(|r| r.abs() < 1e-3) {
            continue;
        }
        let roots = cubic_roots(phi, 1.0 + p.k_a, p.k_v + p.h * p.k_s, p.k_s);
        pass &= roots.iter().all(|r| r.re < 0.0);
        seen += 1;
    }
    assert!(report_line(
        4,
        "local predicates positive; oracle confirms 20 in-region samples each",
        pass,
        &format!(
            "cs residuals {:?}, ctg residuals {:?}",
            cs.residuals, ctg.residuals
        )
    ));
}

#[test]
fn criterion_05_scenario2_dampening_ratios() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    for n in N_RANGE {
        let dr = scen2("hybrid", n).dampening_ratio;
        pass &= (dr - 0.95).abs() <= 0.05;
        let dr_cs = scen2("cs", n).dampening_ratio;
        pass &= (1.11..=1.22).contains(&dr_cs);
        let dr_ctg = scen2("ctg2", n).dampening_ratio;
        pass &= (0.85..=1.02).contains(&dr_ctg);
        if n == 4 || n == 10 {
            detail.push_str(&format!(
                "n={n}: hyb {dr:.3} cs {dr_cs:.3} ctg2 {dr_ctg:.3}; "
            ));
        }
    }
    let per_cell = start.elapsed().as_secs_f64() / 28.0;
    pass &= per_cell < 5.0;
    assert!(report_line(
        5,
        "scenario-2 dampening ratios match the reference table",
        pass,
        &detail
    ));
}

#[test]
fn criterion_06_scenario2_outflow() {
    let hybrid_table = [1.48, 1.64, 1.76, 1.89, 1.97, 2.05, 2.13];
    let mut pass = true;
    let mut prev = 0.0;
    let mut detail = String::new();
    for (i, n) in N_RANGE.into_iter().enumerate() {
        let q = scen2("hybrid", n).outflow;
        pass &= (q - hybrid_table[i]).abs() <= 0.15;
        pass &= q > prev; // monotonically increasing in n
        prev = q;
        let q_cs = scen2("cs", n).outflow;
        pass &= (q_cs - 3.0).abs() <= 0.2;
        let q_ctg = scen2("ctg2", n).outflow;
        pass &= q_cs > q && q > q_ctg; // strict ordering
        if n == 4 || n == 10 {
            detail.push_str(&format!(
                "n={n}: cs {q_cs:.3} > hyb {q:.3} > ctg2 {q_ctg:.3}; "
            ));
        }
    }
    assert!(report_line(
        6,
        "scenario-2 outflow cells, monotonicity, and ordering",
        pass,
        &detail
    ));
}

#[test]
fn criterion_07_scenario2_surrogate_safety() {
    let mut pass = true;
    for n in N_RANGE {
        pass &= scen2("hybrid", n).tet == 0.0 && scen2("hybrid", n).tit == 0.0;
        pass &= scen2("cs", n).tet == 0.0 && scen2("cs", n).tit == 0.0;
        pass &= scen2("ctg3", n).tet > 0.0;
    }
    let tet_ctg3 = scen2("ctg3", 6).tet;
    let tit_ctg3 = scen2("ctg3", 6).tit;
    let in_band = (tet_ctg3 - 2.30).abs() <= 0.5;
    assert!(report_line(
        7,
        "scenario-2 safety: hybrid and CS exactly zero, CTG r=3 exposed",
        pass,
        &format!(
            "ctg3 TET {tet_ctg3:.2} (reconstruction-sensitive target 2.30 +/- 0.5: {}), TIT {tit_ctg3:.2}",
            if in_band { "inside" } else { "outside" }
        )
    ));
}

#[test]
fn criterion_08_scenario2_max_jerk() {
    let mut pass = true;
    let mut detail = String::new();
    for n in [4usize, 7, 10] {
        let j_hyb = scen2("hybrid", n).max_jerk;
        let j_cs = scen2("cs", n).max_jerk;
        pass &= (j_hyb - 4.20).abs() <= 0.3;
        pass &= (j_cs - 5.00).abs() <= 0.3;
        pass &= j_cs > j_hyb;
        if n == 7 {
            detail = format!("hybrid {j_hyb:.3}, cs {j_cs:.3}");
        }
    }
    assert!(report_line(
        8,
        "scenario-2 maximum jerk cells and ordering",
        pass,
        &detail
    ));
}

#[test]
fn criterion_09_multi_platoon_chain() {
    let cfg = PlatoonConfig::hybrid(4);
    let trace = run_multi(&[cfg, cfg], &Scenario::decel_accel(), DT, false).unwrap();
    let moe = summarize(&trace);
    let pass = (moe.dampening_ratio - 0.96).abs() <= 0.05
        && moe.tet == 0.0
        && moe.tit == 0.0
        && !trace.collision_flagged();
    assert!(report_line(
        9,
        "hybrid 2x(n=4) chain: dampening ratio in band, safety exactly zero",
        pass,
        &format!(
            "DR {:.3}, TET {}, TIT {}",
            moe.dampening_ratio, moe.tet, moe.tit
        )
    ));
}

#[test]
fn criterion_10_scenario1_orderings() {
    let f = scen1();
    let dr_ok = f.cs_n7.dampening_ratio > 1.0 && f.hybrid_n7.dampening_ratio < 1.0;
    let q_ok = f.cs_n7.outflow > f.hybrid_n7.outflow && f.hybrid_n7.outflow > f.ctg2_n7.outflow;
    let fuel_ok = f.hybrid_n7.fuel < f.cs_n7.fuel;
    let co_ok = f.hybrid_n7.co < f.cs_n7.co;
    let jerk_ok =
        f.cs_n7.max_jerk > f.ctg2_n7.max_jerk && f.ctg2_n7.max_jerk > f.hybrid_n7.max_jerk;
    let pass = dr_ok && q_ok && fuel_ok && co_ok && jerk_ok;
    assert!(report_line(
        10,
        "scenario-1 orderings: DR, outflow, fuel/CO, jerk",
        pass,
        &format!(
            "DR cs {:.3} / hyb {:.3}; Q {:.2} > {:.2} > {:.2}; J {:.2} > {:.2} > {:.2}",
            f.cs_n7.dampening_ratio,
            f.hybrid_n7.dampening_ratio,
            f.cs_n7.outflow,
            f.hybrid_n7.outflow,
            f.ctg2_n7.outflow,
            f.cs_n7.max_jerk,
            f.ctg2_n7.max_jerk,
            f.hybrid_n7.max_jerk
        )
    ));
}

#[test]
fn criterion_11_scenario1_figure_shape() {
    let f = scen1();
    let exo_amp = amp(&f.lam01_n5.vehicles[0].a);
    let tail01 = amp(&f.lam01_n5.vehicles[5].a);
    let tail03 = amp(&f.lam03_n5.vehicles[5].a);

    // spacing errors converge once the disturbance window closes
    let converged = |trace: &SimulationTrace| {
        let k0 = (110.0 / DT) as usize;
        let tail_window: f64 = trace.vehicles[1..]
            .iter()
            .flat_map(|s| s.ds[k0..].iter())
            .fold(0.0f64, |m, e| m.max(e.abs()));
        let peak: f64 = trace.vehicles[1..]
            .iter()
            .flat_map(|s| s.ds.iter())
            .fold(0.0f64, |m, e| m.max(e.abs()));
        tail_window < 0.1 && tail_window < 0.1 * peak
    };

    let pass =
        tail01 < exo_amp && tail03 > exo_amp && converged(&f.lam01_n5) && converged(&f.lam03_n5);
    assert!(report_line(
        11,
        "figure shape: lambda=0.1 attenuates the tail, lambda=0.3 amplifies it",
        pass,
        &format!("exo {exo_amp:.3}, tail(0.1) {tail01:.3}, tail(0.3) {tail03:.3}")
    ));
}

#[test]
fn criterion_12_invariant_suite() {
    let mut pass = true;
    let mut notes = Vec::new();

    // equilibrium fixed point over 20 s
    let trace = run(
        &PlatoonConfig::hybrid(5),
        &Scenario::constant_speed(20.0, 20.0),
        DT,
    )
    .unwrap();
    let max_u = trace.vehicles[1..]
        .iter()
        .flat_map(|s| s.u.iter())
        .fold(0.0f64, |m, u| m.max(u.abs()));
    pass &= max_u < 1e-9;
    notes.push(format!("max|u| {max_u:.1e}"));

    // Galilean offset
    let base = Scenario::decel_accel();
    let mut shifted = base.clone();
    shifted.start_position = 500.0;
    let a = run(&PlatoonConfig::hybrid(4), &base, DT).unwrap();
    let b = run(&PlatoonConfig::hybrid(4), &shifted, DT).unwrap();
    let mut worst = 0.0f64;
    for (sa, sb) in a.vehicles.iter().zip(&b.vehicles) {
        for k in 0..a.samples() {
            worst = worst.max((sb.p[k] - sa.p[k] - 500.0).abs());
            worst = worst.max((sb.u[k] - sa.u[k]).abs());
        }
    }
    pass &= worst < 1e-9;

    // determinism: byte-identical reruns
    let c = run(&PlatoonConfig::hybrid(4), &base, DT).unwrap();
    pass &= a == c;

    // dt-halving drift on the dampening ratio
    let dr1 = dampening_ratio(&run(&PlatoonConfig::hybrid(5), &base, 0.1).unwrap()).unwrap();
    let dr2 = dampening_ratio(&run(&PlatoonConfig::hybrid(5), &base, 0.05).unwrap()).unwrap();
    pass &= (dr1 - dr2).abs() < 0.01;
    notes.push(format!("dt drift {:.4}", (dr1 - dr2).abs()));

    // TET = 0 iff TIT = 0 across the scenario-2 grid
    for sys in ["hybrid", "cs", "ctg2", "ctg3"] {
        for n in N_RANGE {
            let m = scen2(sys, n);
            pass &= (m.tet == 0.0) == (m.tit == 0.0);
        }
    }

    // conjugate symmetry of the transfer blocks
    let (ctg, cs) = (ctg_ref(), cs_ref(0.1));
    let mut w = 0.003;
    while w < 500.0 {
        let up = eval_blocks(Complex64::new(0.0, w), &ctg, &cs, 0.5).unwrap();
        let dn = eval_blocks(Complex64::new(0.0, -w), &ctg, &cs, 0.5).unwrap();
        for (x, y) in [
            (up.g, dn.g),
            (up.k, dn.k),
            (up.f, dn.f),
            (up.a, dn.a),
            (up.b, dn.b),
            (up.c, dn.c),
        ] {
            pass &= (x.norm() - y.norm()).abs() < 1e-12 * x.norm().max(1.0);
        }
        w *= 3.7;
    }

    // eq22 is the exact reciprocal of the eq18 left side
    let grid = FrequencyGrid::log(1e-3, 1e3, 500).unwrap();
    let report = hybrid_verdict(&ctg, &cs, 0.5, 5, &grid).unwrap();
    for (l, r) in report.eq18_left.iter().zip(&report.eq22) {
        pass &= (l * r - 1.0).abs() < 1e-12;
    }

    // simulation-frequency consistency: the verdict-passing hybrid stays
    // near-attenuating in the time domain, the failing one amplifies
    let f = scen1();
    let dr_s1 = dampening_ratio(&f.lam01_n5).unwrap();
    pass &= report.verdicts.hybrid && dr_s1 <= 1.02;
    pass &= amp(&f.lam03_n5.vehicles[5].a) > amp(&f.lam03_n5.vehicles[0].a);
    notes.push(format!("scenario-1 DR {dr_s1:.3}"));

    assert!(report_line(12, "invariant suite", pass, &notes.join(", ")));
}
