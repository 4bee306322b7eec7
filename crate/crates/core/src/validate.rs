//! Fast self-checks of the generators and solvers at one parameter set.

use rand::Rng;
use serde::Serialize;

use crate::effective::{build_effective_model, steady_populations, EffectiveModel, EffectiveParams, EffectiveState};
use crate::error::Result;
use crate::linalg::{max_abs, max_abs_diff, norm_sqr, CVector, C64};
use crate::lindblad::{evolve_density, steady_state, DensityMatrix, EvolveOptions, Liouvillian};
use crate::model::{
    build_basis, build_hamiltonian, build_jump_operators, collective_hamiltonian, decay_bookkeeping_error,
    structural_equivalence, swap_operator, validate_regime, ModelParams, PairState, RegimeReport,
};
use crate::propagator::{dense_exponential, Propagator};
use crate::trajectory::{channel_weights, rng_stream, InitialState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub params: ModelParams,
    pub checks: Vec<Check>,
    pub regime: RegimeReport,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn random_state(dim: usize, seed: u64) -> CVector {
    let mut rng = rng_stream(seed);
    let v = CVector::from_fn(dim, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let n = norm_sqr(&v).sqrt();
    v / C64::new(n, 0.0)
}

/// Relative mismatch between `−d‖ψ(t)‖²/dt` at `t = 0`, taken by a
/// five-point difference of the dense propagator, and `Σ_c weight_c`.
pub fn norm_decay_mismatch(params: &ModelParams, psi: &CVector) -> f64 {
    let basis = build_basis(params.n_max);
    let h = build_hamiltonian(params, &basis).matrix;
    let channels = build_jump_operators(params, &basis);
    let scale = max_abs(&h).max(1e-300);
    let step = 1e-3 / scale;
    let s = |t: f64| norm_sqr(&(dense_exponential(&h, t) * psi));
    let derivative = (s(-2.0 * step) - 8.0 * s(-step) + 8.0 * s(step) - s(2.0 * step)) / (12.0 * step);
    let weights: f64 = channel_weights(psi, &channels).iter().sum();
    (derivative + weights).abs() / weights.abs().max(1e-300)
}

/// Steady state of the three-level effective ladder at `κ_eff/Ω_M = 1e-6`,
/// compared with the closed-form populations.
pub fn effective_steady_state_mismatch(x: f64) -> Result<f64> {
    let omega_m = 0.1;
    let eff = EffectiveParams {
        g_eff: 0.0,
        delta_l: x * omega_m,
        kappa_eff: 1e-7,
        x,
        cooperativity: 0.0,
    };
    let m = EffectiveModel::from_rates(eff, omega_m).light_manifold();
    let ss = steady_state(&Liouvillian::new(&m.hamiltonian, &m.channels))?;
    let want = steady_populations(x);
    Ok([want.p00, want.ps01, want.p11]
        .iter()
        .enumerate()
        .map(|(k, w)| (ss.population(k) - w).abs())
        .fold(0.0, f64::max))
}

pub fn run_validation(params: &ModelParams) -> Result<ValidationReport> {
    params.validate()?;
    let basis = build_basis(params.n_max);
    let h = build_hamiltonian(params, &basis);
    let channels = build_jump_operators(params, &basis);
    let mut checks = Vec::new();

    checks.push(Check::below(
        "decay bookkeeping",
        decay_bookkeeping_error(&h, &channels),
        1e-12,
    ));
    let swap = swap_operator(&basis);
    checks.push(Check::below(
        "swap symmetry of H_cond",
        max_abs_diff(&(&swap * &h.matrix), &(&h.matrix * &swap)),
        1e-12,
    ));
    let st = structural_equivalence(params);
    checks.push(Check::below("collective transform unitary", st.unitarity, 1e-14));
    checks.push(Check::below("bare vs collective Hamiltonian", st.hamiltonian, 1e-12));
    checks.push(Check::below("bare vs collective reset map", st.reset, 1e-12));

    let hc = collective_hamiltonian(params, &basis).matrix;
    let a01 = basis.collective_index(PairState::A01, 0);
    let leak = PairState::ALL
        .into_iter()
        .filter(|p| ![PairState::A01, PairState::A02, PairState::A12].contains(p))
        .flat_map(|p| (0..=params.n_max).map(move |n| (p, n)))
        .map(|(p, n)| hc[(a01, basis.collective_index(p, n))].norm())
        .fold(0.0, f64::max);
    checks.push(Check::below("|a01,0> decoupled from symmetric states", leak, 0.0));

    for seed in 0..3 {
        let psi = random_state(basis.dim(), seed);
        checks.push(Check::below(
            format!("norm-decay identity (random state {seed})"),
            norm_decay_mismatch(params, &psi),
            1e-8,
        ));
    }

    let spectral = Propagator::new(&h);
    if spectral.is_spectral() {
        let stepped = Propagator::stepped(&h);
        let psi = random_state(basis.dim(), 7);
        let diff = (0..4)
            .map(|k| 10f64.powi(k))
            .map(|t| {
                let a = spectral.propagate(&psi, t);
                let b = stepped.propagate(&psi, t);
                (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        checks.push(Check::below("spectral vs stepped propagation", diff, 1e-8));
    }

    if params.delta != 0.0 && params.omega_m != 0.0 && params.kappa != 0.0 && params.gamma() != 0.0 {
        let eff = build_effective_model(params)?;
        let dark = eff.hamiltonian.apply(&EffectiveState::A01.vector());
        checks.push(Check::below("effective H annihilates |a01>", max_abs_vec(&dark), 0.0));
    }
    for x in [0.0, -0.05, -0.2] {
        checks.push(Check::below(
            format!("effective steady state vs closed form (x = {x})"),
            effective_steady_state_mismatch(x)?,
            1e-9,
        ));
    }

    let l = Liouvillian::new(&h, &channels);
    let rho0 = DensityMatrix::pure(&InitialState::Ground.vector(&basis));
    let rho = evolve_density(&rho0, 50.0, &l, EvolveOptions::default())?;
    checks.push(Check::below("trace after t = 50", (rho.trace().re - 1.0).abs(), 1e-9));
    checks.push(Check::below("hermiticity after t = 50", rho.hermiticity_error(), 1e-10));
    checks.push(Check::below(
        "negativity after t = 50",
        (-rho.min_eigenvalue()).max(0.0),
        1e-8,
    ));
    checks.push(Check::below("trace of rhs", l.rhs(rho.matrix()).trace().norm(), 1e-12));

    Ok(ValidationReport {
        params: *params,
        checks,
        regime: validate_regime(params),
    })
}

fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
