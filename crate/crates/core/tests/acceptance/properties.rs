//! Property suites. Each runs a fixed number of random cases and prints one
//! line.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use cavity_jumps::config::{ExperimentKind, RunConfig};
use cavity_jumps::effective::{build_effective_model, EffectiveState, QuasiSteadyAmplitudes};
use cavity_jumps::linalg::eigen_decompose;
use cavity_jumps::lindblad::{evolve_density, DensityMatrix, EvolveOptions, Liouvillian};
use cavity_jumps::model::{build_basis, collective_hamiltonian, Channel, PairState, ProductState};
use cavity_jumps::telegraph::{segment_periods, thin_detections, ChannelMask, DetectionStream, PeriodKind};
use cavity_jumps::trajectory::JumpEvent;
use cavity_jumps::validate::{effective_steady_state_mismatch, norm_decay_mismatch, random_state};
use cavity_jumps::{InitialState, ModelParams, Simulator};

use super::report;

fn check<S: Strategy>(what: &str, cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>)
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&strategy, test);
    let detail = match &result {
        Ok(()) => format!("{cases} cases"),
        Err(e) => e.to_string(),
    };
    report("6", what, result.is_ok(), detail);
    result.unwrap();
}

fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.1..2.0f64,
        0.05..2.0f64,
        0.01..0.5f64,
        0.01..0.5f64,
        0.05..2.0f64,
        0.01..0.5f64,
        5.0..100.0f64,
        1usize..=3,
    )
        .prop_map(
            |(g, kappa, gamma0, gamma1, omega_l, omega_m, delta, n_max)| ModelParams {
                g,
                kappa,
                gamma0,
                gamma1,
                omega_l,
                omega_m,
                delta,
                n_max,
            },
        )
}

#[test]
fn norm_decay_identity() {
    check(
        "norm-decay identity, 1e-8 relative",
        48,
        (params(), any::<u64>()),
        |(p, seed)| {
            let psi = random_state(build_basis(p.n_max).dim(), seed);
            let m = norm_decay_mismatch(&p, &psi);
            prop_assert!(m < 1e-8, "mismatch {m:e}");
            Ok(())
        },
    );
}

#[test]
fn lindblad_bounds() {
    let p = ModelParams::default();
    let sim = Simulator::new(p).unwrap();
    let l = Liouvillian::new(&sim.hamiltonian, &sim.channels);
    let dim = sim.basis.dim();
    check(
        "Lindblad trace, Hermiticity and positivity bounds",
        6,
        (any::<u64>(), 0.0..50.0f64),
        |(seed, t)| {
            let rho = evolve_density(
                &DensityMatrix::pure(&random_state(dim, seed)),
                t,
                &l,
                EvolveOptions::default(),
            )
            .unwrap();
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-9 && rho.trace().im.abs() < 1e-9);
            prop_assert!(rho.hermiticity_error() < 1e-10);
            prop_assert!(rho.min_eigenvalue() > -1e-8, "{}", rho.min_eigenvalue());
            Ok(())
        },
    );
}

#[test]
fn effective_dark_state_annihilated() {
    check("effective Hamiltonian annihilates |a01> exactly", 64, params(), |p| {
        let m = build_effective_model(&p).unwrap();
        let out = m.hamiltonian.apply(&EffectiveState::A01.vector());
        prop_assert!(out.iter().all(|z| z.re == 0.0 && z.im == 0.0), "{out:?}");
        Ok(())
    });
}

#[test]
fn effective_steady_state_closed_form() {
    check("effective steady state vs closed form, 1e-9", 24, -0.3..0.3f64, |x| {
        let m = effective_steady_state_mismatch(x).unwrap();
        prop_assert!(m < 1e-9, "x = {x}: {m:e}");
        Ok(())
    });
}

#[test]
fn quasi_steady_ratio_on_dark_eigenvector() {
    let p = ModelParams::default();
    let basis = build_basis(p.n_max);
    let e = eigen_decompose(&collective_hamiltonian(&p, &basis).matrix).unwrap();
    let a01 = basis.collective_index(PairState::A01, 0);
    let k = (0..basis.dim())
        .max_by(|&i, &j| e.vectors[(a01, i)].norm().total_cmp(&e.vectors[(a01, j)].norm()))
        .unwrap();
    let a = QuasiSteadyAmplitudes::from_collective(&basis, &e.vectors.column(k).into_owned());
    let ratio = a.alpha02_0 / a.alpha01_0;
    let want = -p.omega_l / (2.0 * p.delta);
    let err = (ratio.re / want - 1.0).abs().max(ratio.im.abs() / want.abs());
    let pass = err < 0.05;
    report(
        "6",
        "quasi-steady alpha02/alpha01 on the dark eigenvector at delta = 50",
        pass,
        format!("{:.6}{:+.1e}i vs {want}, relative error {err:.1e}", ratio.re, ratio.im),
    );
    assert!(pass);
}

#[test]
fn survival_is_nonincreasing() {
    let sim = Simulator::new(ModelParams::default()).unwrap();
    let dim = sim.basis.dim();
    check(
        "survival probability nonincreasing",
        64,
        (any::<u64>(), prop::collection::vec(0.0..2e5f64, 2..20)),
        |(seed, mut times)| {
            times.sort_by(f64::total_cmp);
            let prepared = sim.propagator.prepare(&random_state(dim, seed));
            let s: Vec<f64> = times.iter().map(|&t| prepared.survival(t)).collect();
            prop_assert!(s[0] <= 1.0 + 1e-12);
            for w in s.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{w:?}");
            }
            Ok(())
        },
    );
}

#[test]
fn basis_bijection() {
    check("product basis index is a bijection", 64, 0usize..6, |n_max| {
        let b = build_basis(n_max);
        prop_assert_eq!(b.dim(), 9 * (n_max + 1));
        for k in 0..b.dim() {
            let s = b.state(k);
            prop_assert!(s.atom1 < 3 && s.atom2 < 3 && s.photons <= n_max);
            prop_assert_eq!(b.index(s), k);
            prop_assert_eq!(b.index(ProductState::new(s.atom1, s.atom2, s.photons)), k);
        }
        Ok(())
    });
}

fn events() -> impl Strategy<Value = Vec<JumpEvent>> {
    prop::collection::vec((0.0..1e4f64, 0usize..5), 0..200).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.into_iter()
            .map(|(time, c)| JumpEvent {
                time,
                channel: Channel::ALL[c],
            })
            .collect()
    })
}

#[test]
fn thinning_is_a_nested_subset() {
    check(
        "thinning keeps a seeded, eta-nested subset",
        128,
        (events(), 0.0..=1.0f64, 0.0..=1.0f64, any::<u64>(), any::<bool>()),
        |(ev, a, b, seed, atomic)| {
            let mask = if atomic { ChannelMask::ALL } else { ChannelMask::CAVITY };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let s_lo = thin_detections(0, &ev, 1e4, lo, seed, mask).unwrap();
            let s_hi = thin_detections(0, &ev, 1e4, hi, seed, mask).unwrap();
            prop_assert_eq!(&s_lo, &thin_detections(0, &ev, 1e4, lo, seed, mask).unwrap());
            let visible: Vec<f64> = ev.iter().filter(|e| mask.contains(e.channel)).map(|e| e.time).collect();
            prop_assert!(s_hi.clicks.iter().all(|t| visible.contains(t)));
            prop_assert!(s_lo.clicks.iter().all(|t| s_hi.clicks.contains(t)));
            if hi == 1.0 {
                prop_assert_eq!(&s_hi.clicks, &visible);
            }
            Ok(())
        },
    );
}

#[test]
fn segmentation_tiles_the_record() {
    let strategy = (prop::collection::vec(0.0..1e4f64, 0..100), 1.0..2e3f64);
    check(
        "light/dark periods tile [0, horizon] and alternate",
        256,
        strategy,
        |(mut clicks, threshold)| {
            clicks.sort_by(f64::total_cmp);
            let n = clicks.len();
            let stream = DetectionStream {
                trajectory_id: 0,
                eta: 1.0,
                seed: 0,
                mask: ChannelMask::CAVITY,
                horizon: 1e4,
                clicks,
            };
            let seg = segment_periods(&stream, threshold).unwrap();
            let periods = &seg.periods;
            prop_assert!(!periods.is_empty());
            prop_assert_eq!(periods[0].start, 0.0);
            prop_assert_eq!(periods.last().unwrap().end, 1e4);
            let total: f64 = periods.iter().map(|p| p.duration()).sum();
            prop_assert!((total - 1e4).abs() < 1e-9);
            for w in periods.windows(2) {
                prop_assert_eq!(w[0].end, w[1].start);
                prop_assert_ne!(w[0].kind, w[1].kind);
            }
            for p in periods.iter().filter(|p| p.kind == PeriodKind::Dark) {
                prop_assert!(p.duration() > threshold && p.clicks == 0);
            }
            prop_assert_eq!(periods.iter().map(|p| p.clicks).sum::<usize>(), n);
            Ok(())
        },
    );
}

#[test]
fn config_round_trip() {
    let strategy = (
        0usize..5,
        params(),
        1usize..10_000,
        0.1..1e3f64,
        any::<u64>(),
        prop::collection::vec(0.01..=1.0f64, 1..4),
        prop::collection::vec(0.0..5.0f64, 1..4),
        0usize..8,
        any::<bool>(),
    );
    check(
        "config survives a TOML round trip",
        128,
        strategy,
        |(kind, model, n_traj, horizon, seed, eta, t_wait, workers, dark)| {
            let mut c = RunConfig::new(ExperimentKind::ALL[kind]);
            c.model = model;
            c.run.n_traj = n_traj;
            c.run.horizon_tdark = horizon;
            c.run.seed = seed;
            c.run.eta = eta;
            c.run.t_wait = t_wait;
            c.run.workers = workers;
            if dark {
                c.run.initial = InitialState::Dark;
            }
            let text = c.to_toml().unwrap();
            prop_assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
            Ok(())
        },
    );
}
