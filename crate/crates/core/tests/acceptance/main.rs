//! Acceptance gate. Every criterion prints one `PASS`/`FAIL` line to stdout,
//! bypassing the harness capture, and then asserts.

use std::io::Write;
use std::sync::OnceLock;

use cavity_jumps::effective::{analytic_summary, timescales, TimescaleSummary};
use cavity_jumps::linalg::{trace_distance, CMatrix};
use cavity_jumps::lindblad::{evolve_density, DensityMatrix, EvolveOptions, Liouvillian};
use cavity_jumps::model::{build_basis, structural_equivalence, BasisIndex};
use cavity_jumps::telegraph::{
    default_threshold, fidelity_scan, period_stats, segment_periods, thin_detections, ChannelMask, FidelityPoint,
    FidelityScan, PeriodStats,
};
use cavity_jumps::trajectory::{ensemble_average, thinning_seed};
use cavity_jumps::{InitialState, ModelParams, Simulator};

mod properties;

pub fn report(criterion: &str, what: &str, pass: bool, detail: impl std::fmt::Display) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{verdict} criterion {criterion}: {what} [{detail}]");
}

fn defaults() -> ModelParams {
    ModelParams::default()
}

fn at_nmax(n_max: usize) -> ModelParams {
    ModelParams { n_max, ..defaults() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// `v` rounded to `digits` significant digits.
fn round_sig(v: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits - 1 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}

#[test]
fn criterion_1_analytic_values() {
    let s = analytic_summary(&defaults()).unwrap();
    let (e, p, t) = (s.effective, s.populations, s.timescales);
    // Hand evaluation at Δ = 50, Ω_L = g = κ = 1, Ω_M = 0.1, Γ₀ = Γ₁ = 0.05.
    let x: f64 = -0.05;
    let denom = 3.0 + 16.0 * x * x + 16.0 * x.powi(4);
    let expected = [
        ("g_eff", e.g_eff, -1.0 / (50.0 * 2f64.sqrt())),
        ("delta_l", e.delta_l, -0.005),
        ("kappa_eff", e.kappa_eff, 8e-4),
        ("x", e.x, x),
        ("cooperativity", e.cooperativity, 10.0),
        ("ps01", p.ps01, (1.0 + 8.0 * x * x) / denom),
        ("p11", p.p11, 1.0 / denom),
        ("p00", p.p00, 1.0 - (2.0 + 8.0 * x * x) / denom),
        ("t_cav", t.t_cav, 1881.25),
        ("t_dark", t.t_dark, 20000.0 / 0.15),
        ("t_light", t.t_light, 20000.0 * 3.0401 / 0.151),
        ("ratio_dark_cav", t.ratio_dark_cav, (20000.0 / 0.15) / 1881.25),
        ("ratio_light_dark", t.ratio_light_dark, 3.0401 * 0.15 / 0.151),
    ];
    let mut worst = ("", 0.0);
    for (name, got, want) in expected {
        let r = rel(got, want);
        if r > worst.1 {
            worst = (name, r);
        }
    }
    let quoted = [
        ("T_dark", round_sig(t.t_dark, 5), 1.3333e5),
        ("T_light", round_sig(t.t_light, 4), 4.027e5),
        ("dark/cav", round_sig(t.ratio_dark_cav, 3), 70.9),
        ("light/dark", round_sig(t.ratio_light_dark, 3), 3.02),
        ("C", round_sig(e.cooperativity, 6), 10.0),
    ];
    let quoted_ok = quoted.iter().all(|(_, a, b)| a == b);
    let pass = worst.1 < 5e-7 && quoted_ok;
    report(
        "1",
        "closed-form values to 6 significant digits",
        pass,
        format!(
            "worst relative error {:.1e} in {}; quoted values {:?}",
            worst.1, worst.0, quoted
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_structural_equivalence() {
    let mut worst: f64 = 0.0;
    let sets = [
        defaults(),
        ModelParams {
            delta: 7.0,
            omega_l: 1.3,
            omega_m: 0.4,
            gamma0: 0.02,
            gamma1: 0.3,
            ..defaults()
        },
        ModelParams {
            n_max: 3,
            g: 2.0,
            kappa: 0.5,
            ..defaults()
        },
    ];
    for p in sets {
        let r = structural_equivalence(&p);
        worst = worst.max(r.hamiltonian).max(r.reset).max(r.unitarity);
    }
    let pass = worst <= 1e-12;
    report(
        "2",
        "bare and collective generators agree elementwise",
        pass,
        format!(
            "max deviation {worst:.2e} over {} parameter sets, tol 1e-12",
            sets.len()
        ),
    );
    assert!(pass);
}

const C3_TIME: f64 = 50.0;
const C3_TRAJ: usize = 2000;

struct EnsembleCheck {
    average: CMatrix,
    distance: f64,
}

fn ensemble_vs_lindblad(n_max: usize) -> EnsembleCheck {
    let sim = Simulator::new(at_nmax(n_max)).unwrap();
    let recs = sim
        .run_ensemble(InitialState::Ground, C3_TRAJ, 2024, C3_TIME, &[C3_TIME], 0)
        .unwrap();
    let average = ensemble_average(&recs, 0).unwrap().density;
    let l = Liouvillian::new(&sim.hamiltonian, &sim.channels);
    let rho0 = DensityMatrix::pure(&InitialState::Ground.vector(&sim.basis));
    let rho = evolve_density(&rho0, C3_TIME, &l, EvolveOptions::default()).unwrap();
    EnsembleCheck {
        distance: trace_distance(&average, rho.matrix()),
        average,
    }
}

fn c3(n_max: usize) -> &'static EnsembleCheck {
    static N2: OnceLock<EnsembleCheck> = OnceLock::new();
    static N3: OnceLock<EnsembleCheck> = OnceLock::new();
    match n_max {
        2 => N2.get_or_init(|| ensemble_vs_lindblad(2)),
        3 => N3.get_or_init(|| ensemble_vs_lindblad(3)),
        _ => unreachable!(),
    }
}

#[test]
fn criterion_3_trajectories_match_master_equation() {
    let d = c3(2).distance;
    let pass = d < 0.02;
    report(
        "3",
        "ensemble average vs Lindblad solution at t = 50",
        pass,
        format!("trace distance {d:.4} with {C3_TRAJ} trajectories, tol 0.02"),
    );
    assert!(pass);
}

const C4_TRAJ: usize = 40;
const C4_HORIZON_TDARK: f64 = 100.0;

struct TelegraphCheck {
    stats: PeriodStats,
    interior: usize,
    ts: TimescaleSummary,
}

impl TelegraphCheck {
    fn dark(&self) -> f64 {
        self.stats.dark.unwrap().mean
    }
    fn light(&self) -> f64 {
        self.stats.light.unwrap().mean
    }
    fn ratio(&self) -> f64 {
        self.dark() / self.stats.click_spacing.unwrap().mean
    }
}

fn telegraph_run(n_max: usize) -> TelegraphCheck {
    let p = at_nmax(n_max);
    let ts = timescales(&p).unwrap();
    let sim = Simulator::new(p).unwrap();
    let horizon = C4_HORIZON_TDARK * ts.t_dark;
    let threshold = default_threshold(ts.t_cav, 1.0);
    let segs: Vec<_> = sim
        .run_ensemble(InitialState::Ground, C4_TRAJ, 77, horizon, &[], 0)
        .unwrap()
        .iter()
        .map(|r| {
            let s = thin_detections(
                r.trajectory_id,
                &r.events,
                horizon,
                1.0,
                thinning_seed(r.seed),
                ChannelMask::CAVITY,
            )
            .unwrap();
            segment_periods(&s, threshold).unwrap()
        })
        .collect();
    let interior = segs.iter().map(|s| s.periods.len().saturating_sub(2)).sum();
    TelegraphCheck {
        stats: period_stats(&segs).unwrap(),
        interior,
        ts,
    }
}

fn c4(n_max: usize) -> &'static TelegraphCheck {
    static N2: OnceLock<TelegraphCheck> = OnceLock::new();
    static N3: OnceLock<TelegraphCheck> = OnceLock::new();
    match n_max {
        2 => N2.get_or_init(|| telegraph_run(2)),
        3 => N3.get_or_init(|| telegraph_run(3)),
        _ => unreachable!(),
    }
}

#[test]
fn criterion_4_telegraph_statistics() {
    let c = c4(2);
    let dark = c.dark() / c.ts.t_dark;
    let light = c.light() / c.ts.t_light;
    let ratio = c.ratio();
    let checks = [
        ("interior periods >= 200", c.interior >= 200, format!("{}", c.interior)),
        (
            "dark within 15% of T_dark",
            (dark - 1.0).abs() < 0.15,
            format!("{dark:.3} T_dark"),
        ),
        (
            "light within 25% of T_light",
            (light - 1.0).abs() < 0.25,
            format!("{light:.3} T_light"),
        ),
        (
            "dark/spacing in [55, 90]",
            (55.0..=90.0).contains(&ratio),
            format!("{ratio:.1}"),
        ),
    ];
    for (what, pass, detail) in &checks {
        report("4", what, *pass, detail);
    }
    assert!(checks.iter().all(|c| c.1));
}

const C5_TRAJ: usize = 4000;
const C5_HORIZON_TDARK: f64 = 40.0;
const C5_ETAS: [f64; 3] = [0.2, 0.5, 1.0];
const C5_WAITS: [f64; 4] = [0.5, 0.7, 1.0, 1.5];
/// The `(η, t_wait)` pairs the fidelity claims are made at.
const C5_POINTS: [(f64, f64); 4] = [(0.2, 0.7), (0.5, 0.5), (1.0, 1.0), (1.0, 1.5)];

fn fidelity_run(n_max: usize, n_traj: usize) -> Vec<FidelityPoint> {
    let p = at_nmax(n_max);
    let ts = timescales(&p).unwrap();
    let sim = Simulator::new(p).unwrap();
    let scan = FidelityScan {
        etas: C5_ETAS.to_vec(),
        t_waits: C5_WAITS.to_vec(),
        n_traj,
        master_seed: 4242,
        horizon: C5_HORIZON_TDARK * ts.t_dark,
        mask: ChannelMask::CAVITY,
        workers: 0,
    };
    fidelity_scan(&sim, &scan).unwrap()
}

fn c5(n_max: usize) -> &'static [FidelityPoint] {
    static N2: OnceLock<Vec<FidelityPoint>> = OnceLock::new();
    static N3: OnceLock<Vec<FidelityPoint>> = OnceLock::new();
    match n_max {
        2 => N2.get_or_init(|| fidelity_run(2, C5_TRAJ)),
        3 => N3.get_or_init(|| fidelity_run(3, C5_TRAJ / 2)),
        _ => unreachable!(),
    }
}

fn point(points: &[FidelityPoint], eta: f64, wait: f64) -> &FidelityPoint {
    points.iter().find(|p| p.eta == eta && p.t_wait_tdark == wait).unwrap()
}

fn describe(p: &FidelityPoint) -> String {
    format!(
        "F = {:.4} ± {:.4}, {} samples, {} dropped",
        p.fidelity, p.stderr, p.n_samples, p.n_dropped
    )
}

#[test]
fn criterion_5a_fidelity_eta_0_2() {
    let p = point(c5(2), 0.2, 0.7);
    let pass = p.n_samples >= 500 && p.fidelity - 2.0 * p.stderr > 0.9;
    report("5a", "F(eta=0.2, t=0.7 T_dark) - 2SE > 0.9", pass, describe(p));
    assert!(pass);
}

#[test]
fn criterion_5b_fidelity_eta_0_5() {
    let p = point(c5(2), 0.5, 0.5);
    let pass = p.n_samples >= 500 && p.fidelity - 2.0 * p.stderr > 0.95;
    report("5b", "F(eta=0.5, t=0.5 T_dark) - 2SE > 0.95", pass, describe(p));
    assert!(pass);
}

#[test]
fn criterion_5c_fidelity_perfect_detector() {
    let points = c5(2);
    let mut pass = true;
    for wait in [1.0, 1.5] {
        let p = point(points, 1.0, wait);
        let ok = p.n_samples >= 500 && p.fidelity >= 0.99;
        report("5c", &format!("F(eta=1, t={wait} T_dark) >= 0.99"), ok, describe(p));
        pass &= ok;
    }
    assert!(pass);
}

/// Zero-pads a density matrix from the `small` basis into the `large` one.
fn embed(rho: &CMatrix, small: &BasisIndex, large: &BasisIndex) -> CMatrix {
    let map: Vec<usize> = (0..small.dim()).map(|k| large.index(small.state(k))).collect();
    let mut out = CMatrix::zeros(large.dim(), large.dim());
    for (i, &a) in map.iter().enumerate() {
        for (j, &b) in map.iter().enumerate() {
            out[(a, b)] = rho[(i, j)];
        }
    }
    out
}

#[test]
fn criterion_6_truncation_insensitivity() {
    let (b2, b3) = (build_basis(2), build_basis(3));
    let d = trace_distance(&embed(&c3(2).average, &b2, &b3), &c3(3).average);
    let ok3 = d < 0.02;
    report(
        "6",
        "n_max 2 vs 3: criterion 3 ensemble average",
        ok3,
        format!("trace distance {d:.2e}, tol 0.02"),
    );

    let (t2, t3) = (c4(2), c4(3));
    let dd = (t3.dark() - t2.dark()).abs() / t2.ts.t_dark;
    let dl = (t3.light() - t2.light()).abs() / t2.ts.t_light;
    let dr = (t3.ratio() - t2.ratio()).abs();
    // The ratio window [55, 90] has half-width 17.5.
    let ok4 = dd < 0.15 && dl < 0.25 && dr < 17.5;
    report(
        "6",
        "n_max 2 vs 3: criterion 4 statistics",
        ok4,
        format!("dark {dd:.3} T_dark (tol 0.15), light {dl:.3} T_light (tol 0.25), ratio {dr:.1} (tol 17.5)"),
    );

    let mut ok5 = true;
    for (eta, wait) in C5_POINTS {
        let (a, b) = (point(c5(2), eta, wait), point(c5(3), eta, wait));
        let diff = (a.fidelity - b.fidelity).abs();
        let tol = 2.0 * a.stderr.hypot(b.stderr);
        ok5 &= diff < tol;
        report(
            "6",
            &format!("n_max 2 vs 3: criterion 5 fidelity at eta={eta}, t={wait} T_dark"),
            diff < tol,
            format!("|dF| {diff:.4}, 2SE {tol:.4}"),
        );
    }
    assert!(ok3 && ok4 && ok5);
}

#[test]
fn criterion_6_worker_count_reproducibility() {
    let p = defaults();
    let ts = timescales(&p).unwrap();
    let sim = Simulator::new(p).unwrap();
    let horizon = 2.0 * ts.t_dark;
    let runs: Vec<_> = [1, 2, 3]
        .iter()
        .map(|&w| {
            sim.run_ensemble(InitialState::Ground, 6, 99, horizon, &[0.5 * horizon], w)
                .unwrap()
        })
        .collect();
    let bits = |recs: &[cavity_jumps::trajectory::TrajectoryRecord]| -> Vec<u64> {
        recs.iter()
            .flat_map(|r| r.events.iter().map(|e| e.time.to_bits()))
            .chain(
                recs.iter()
                    .flat_map(|r| r.snapshots[0].state.iter().map(|z| z.re.to_bits() ^ z.im.to_bits())),
            )
            .collect()
    };
    let ensembles_equal = runs.iter().all(|r| bits(r) == bits(&runs[0]) && r == &runs[0]);

    let scans: Vec<_> = [1, 3]
        .iter()
        .map(|&w| {
            let scan = FidelityScan {
                etas: vec![0.5, 1.0],
                t_waits: vec![0.5],
                n_traj: 6,
                master_seed: 5,
                horizon: 20.0 * ts.t_dark,
                mask: ChannelMask::CAVITY,
                workers: w,
            };
            fidelity_scan(&sim, &scan).unwrap()
        })
        .collect();
    let scans_equal = scans[0] == scans[1];
    let pass = ensembles_equal && scans_equal;
    report(
        "6",
        "seeded runs bit-identical across worker counts",
        pass,
        format!("ensembles {ensembles_equal}, fidelity scans {scans_equal}"),
    );
    assert!(pass);
}
