//! Master-equation evolution `ρ̇ = −i(H ρ − ρ H†) + Σ_c rate_c C_c ρ C_c†`
//! for a conditional Hamiltonian `H` that already carries the
//! `−(i/2) Σ rate C†C` decay terms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, kron, max_abs, CMatrix, CVector, C64, I};
use crate::model::{JumpChannel, Operator};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Relative singular-value cutoff that decides the Liouvillian null space.
pub const NULL_SPACE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub CMatrix);

impl DensityMatrix {
    pub fn pure(psi: &CVector) -> Self {
        DensityMatrix(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[(k, k)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.0 - self.0.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }

    /// Hermitian within 1e-10, unit trace within 1e-9, eigenvalues above −1e-8.
    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::Numerical(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::Numerical(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::Numerical(format!("density matrix eigenvalue {min:e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct SparseOp {
    rate: f64,
    entries: Vec<(usize, usize, C64)>,
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != c(0.0) {
                out.push((i, j, z));
            }
        }
    }
    out
}

/// Generator of the master equation. Operators are kept as nonzero lists
/// for the right-hand side; the dense vectorised form is built on demand.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    hamiltonian: CMatrix,
    h_entries: Vec<(usize, usize, C64)>,
    channels: Vec<(CMatrix, f64)>,
    jumps: Vec<SparseOp>,
}

impl Liouvillian {
    pub fn new(h: &Operator, channels: &[JumpChannel]) -> Liouvillian {
        let dim = h.dim();
        for ch in channels {
            assert_eq!(
                ch.operator.dim(),
                dim,
                "channel {} has wrong dimension",
                ch.operator.label
            );
        }
        Liouvillian {
            dim,
            hamiltonian: h.matrix.clone(),
            h_entries: nonzeros(&h.matrix),
            channels: channels
                .iter()
                .map(|ch| (ch.operator.matrix.clone(), ch.rate))
                .collect(),
            jumps: channels
                .iter()
                .map(|ch| SparseOp {
                    rate: ch.rate,
                    entries: nonzeros(&ch.operator.matrix),
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `dρ/dt`.
    pub fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        // −i H ρ
        for &(i, k, h) in &self.h_entries {
            let f = -I * h;
            for j in 0..d {
                out[(i, j)] += f * rho[(k, j)];
            }
        }
        // +i ρ H†: (ρH†)_{ij} = Σ_k ρ_ik conj(H_jk)
        for &(j, k, h) in &self.h_entries {
            let f = I * h.conj();
            for i in 0..d {
                out[(i, j)] += f * rho[(i, k)];
            }
        }
        for op in &self.jumps {
            for &(i, k, a) in &op.entries {
                for &(j, l, b) in &op.entries {
                    out[(i, j)] += a * rho[(k, l)] * b.conj() * op.rate;
                }
            }
        }
        out
    }

    /// Dense `d² × d²` superoperator acting on column-stacked `vec(ρ)`
    /// (`vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`).
    pub fn vectorized(&self) -> CMatrix {
        let d = self.dim;
        let id = CMatrix::identity(d, d);
        let h = &self.hamiltonian;
        let mut l = kron(&id, h) * (-I) + kron(&h.map(|z| z.conj()), &id) * I;
        for (m, rate) in &self.channels {
            l += kron(&m.map(|z| z.conj()), m) * c(*rate);
        }
        l
    }
}

/// Convenience wrapper around [`Liouvillian::rhs`].
pub fn lindblad_rhs(rho: &CMatrix, h: &Operator, channels: &[JumpChannel]) -> CMatrix {
    Liouvillian::new(h, channels).rhs(rho)
}

pub fn vectorize(rho: &CMatrix) -> CVector {
    CVector::from_iterator(rho.len(), rho.iter().copied())
}

pub fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_iterator(d, d, v.iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps shorter than `min_step_rel · max(t, 1)` abort the integration.
    pub min_step_rel: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-8,
            atol: 1e-12,
            min_step_rel: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EvolveStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest `‖ρ − ρ†‖_max` removed by symmetrisation after a step.
    pub max_hermiticity_drift: f64,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates from `rho0` at time 0 and returns the state at each of the
/// (nondecreasing) `times`.
pub fn evolve_density_at(
    rho0: &DensityMatrix,
    times: &[f64],
    liouvillian: &Liouvillian,
    opts: EvolveOptions,
) -> Result<(Vec<DensityMatrix>, EvolveStats)> {
    let mut stats = EvolveStats::default();
    let mut y = rho0.0.clone();
    let mut t = 0.0;
    let mut h = 1e-3;
    let mut k1 = liouvillian.rhs(&y);
    let mut out = Vec::with_capacity(times.len());

    for &target in times {
        if target < t {
            return Err(Error::Numerical(format!(
                "output times must be nondecreasing ({target} < {t})"
            )));
        }
        let min_step = opts.min_step_rel * target.max(1.0);
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Numerical(format!("step limit reached at t = {t}")));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };

            let mut k = vec![k1.clone()];
            for a_row in A.iter() {
                let mut stage = y.clone();
                for (kj, &a) in k.iter().zip(a_row.iter()) {
                    if a != 0.0 {
                        stage += kj * c(step * a);
                    }
                }
                k.push(liouvillian.rhs(&stage));
            }
            // FSAL: the 7th stage is evaluated at the 5th-order solution.
            let mut y5 = y.clone();
            let mut err = CMatrix::zeros(y.nrows(), y.ncols());
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    y5 += kj * c(step * B5[j]);
                }
                let e = B5[j] - B4[j];
                if e != 0.0 {
                    err += kj * c(step * e);
                }
            }
            let mut err_norm: f64 = 0.0;
            for ((e, a), b) in err.iter().zip(y.iter()).zip(y5.iter()) {
                let scale = opts.atol + opts.rtol * a.norm().max(b.norm());
                err_norm = err_norm.max(e.norm() / scale);
            }

            if err_norm <= 1.0 {
                t = if last { target } else { t + step };
                let drift = max_abs(&(&y5 - y5.adjoint()));
                stats.max_hermiticity_drift = stats.max_hermiticity_drift.max(drift);
                y = (&y5 + y5.adjoint()) * c(0.5);
                k1 = if drift == 0.0 {
                    k.pop().unwrap()
                } else {
                    liouvillian.rhs(&y)
                };
                stats.accepted += 1;
            } else {
                stats.rejected += 1;
            }
            let factor = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && err_norm <= 1.0) {
                h = step * factor;
            }
            if h < min_step && t < target {
                return Err(Error::StepUnderflow { time: t, step: h });
            }
        }
        out.push(DensityMatrix(y.clone()));
    }
    if stats.max_hermiticity_drift > HERMITICITY_TOL {
        log::debug!(
            "hermiticity drift {:e} removed by symmetrisation",
            stats.max_hermiticity_drift
        );
    }
    Ok((out, stats))
}

/// Solution at time `t` with adaptive Dormand–Prince steps.
pub fn evolve_density(
    rho0: &DensityMatrix,
    t: f64,
    liouvillian: &Liouvillian,
    opts: EvolveOptions,
) -> Result<DensityMatrix> {
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    if t < 0.0 {
        return Err(Error::Numerical(format!("negative evolution time {t}")));
    }
    Ok(evolve_density_at(rho0, &[t], liouvillian, opts)?.0.pop().unwrap())
}

/// Solution at time `t` through the dense exponential of the vectorised
/// Liouvillian. Cost grows as `d⁶`; meant for validating the integrator.
pub fn evolve_dense_exponential(rho0: &DensityMatrix, t: f64, liouvillian: &Liouvillian) -> DensityMatrix {
    let prop = (liouvillian.vectorized() * c(t)).exp();
    DensityMatrix(unvectorize(&(prop * vectorize(&rho0.0)), liouvillian.dim()))
}

/// Unique trace-one null vector of the Liouvillian.
pub fn steady_state(liouvillian: &Liouvillian) -> Result<DensityMatrix> {
    let d = liouvillian.dim();
    let l = liouvillian.vectorized();
    let svd = l.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = NULL_SPACE_RTOL * sigma_max.max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] <= cutoff).collect();
    match null.len() {
        1 => {}
        0 => return Err(Error::Numerical("Liouvillian has no null vector".into())),
        dimension => return Err(Error::DegenerateSteadyState { dimension }),
    }
    let v = v_t.row(null[0]).adjoint();
    let rho = unvectorize(&v, d);
    let tr = rho.trace();
    if tr.norm() < 1e-14 {
        return Err(Error::Numerical("null vector is traceless".into()));
    }
    let rho = &rho / tr;
    Ok(DensityMatrix((&rho + rho.adjoint()) * c(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::{
        build_effective_model, steady_populations, EffectiveModel, EffectiveParams, EffectiveState,
    };
    use crate::linalg::max_abs_diff;
    use crate::model::{build_basis, build_hamiltonian, build_jump_operators, ModelParams, PairState, ProductState};

    fn full(params: &ModelParams) -> (crate::model::BasisIndex, Liouvillian) {
        let b = build_basis(params.n_max);
        let l = Liouvillian::new(&build_hamiltonian(params, &b), &build_jump_operators(params, &b));
        (b, l)
    }

    fn mixed_state(d: usize) -> DensityMatrix {
        let a = CMatrix::from_fn(d, d, |i, j| {
            C64::new(((i * 5 + j * 3) % 7) as f64 - 3.0, (i as f64) - (j as f64) * 0.5)
        });
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        DensityMatrix(rho / tr)
    }

    #[test]
    fn rhs_is_traceless() {
        let p = ModelParams::default();
        let (_, l) = full(&p);
        let r = l.rhs(&mixed_state(l.dim()).0);
        assert!(r.trace().norm() < 1e-12);
    }

    #[test]
    fn rhs_matches_vectorized_form() {
        let p = ModelParams {
            n_max: 1,
            ..ModelParams::default()
        };
        let (_, l) = full(&p);
        let rho = mixed_state(l.dim()).0;
        let dense = unvectorize(&(l.vectorized() * vectorize(&rho)), l.dim());
        assert!(max_abs_diff(&dense, &l.rhs(&rho)) < 1e-12);
    }

    #[test]
    fn doubly_excited_population_decays_at_twice_gamma() {
        let p = ModelParams::default().undriven();
        let (b, l) = full(&p);
        let rho = DensityMatrix::pure(&b.basis_vector(ProductState::new(2, 2, 0)));
        let k = b.index(ProductState::new(2, 2, 0));
        assert!((l.rhs(&rho.0)[(k, k)].re + 0.2).abs() < 1e-14);
    }

    #[test]
    fn effective_dark_state_is_stationary() {
        let m = build_effective_model(&ModelParams::default()).unwrap();
        let rho = DensityMatrix::pure(&EffectiveState::A01.vector());
        assert!(max_abs(&lindblad_rhs(&rho.0, &m.hamiltonian, &m.channels)) < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let p = ModelParams::default();
        let (b, l) = full(&p);
        let rho = DensityMatrix::pure(&b.basis_vector(ProductState::new(0, 0, 0)));
        assert_eq!(evolve_density(&rho, 0.0, &l, EvolveOptions::default()).unwrap(), rho);
    }

    #[test]
    fn cavity_decay_population() {
        let p = ModelParams::default().undriven();
        let (b, l) = full(&p);
        let rho = DensityMatrix::pure(&b.basis_vector(ProductState::new(0, 0, 1)));
        let out = evolve_density(&rho, 3.0, &l, EvolveOptions::default()).unwrap();
        let k = b.index(ProductState::new(0, 0, 1));
        assert!((out.population(k) - (-3.0f64).exp()).abs() < 1e-9);
        out.check().unwrap();
    }

    #[test]
    fn integrator_agrees_with_dense_exponential() {
        let p = ModelParams {
            n_max: 0,
            omega_m: 0.3,
            delta: 5.0,
            ..ModelParams::default()
        };
        let (b, l) = full(&p);
        let rho = DensityMatrix::pure(&b.collective_in_bare(PairState::S01, 0));
        for t in [0.5, 7.0, 40.0] {
            let a = evolve_density(&rho, t, &l, EvolveOptions::default()).unwrap();
            let e = evolve_dense_exponential(&rho, t, &l);
            assert!(max_abs_diff(&a.0, &e.0) < 1e-7, "t={t}");
            a.check().unwrap();
        }
    }

    #[test]
    fn effective_steady_state_matches_closed_form_at_weak_coupling() {
        // κ_eff/Ω_M = 1e-6 pushes the leakage correction far below 1e-9.
        let omega_m = 0.1;
        for x in [0.0, -0.05, -0.2] {
            let eff = EffectiveParams {
                g_eff: 0.0,
                delta_l: x * omega_m,
                kappa_eff: 1e-7,
                x,
                cooperativity: 0.0,
            };
            let m = EffectiveModel::from_rates(eff, omega_m).light_manifold();
            let ss = steady_state(&Liouvillian::new(&m.hamiltonian, &m.channels)).unwrap();
            let want = steady_populations(x);
            let got = [ss.population(0), ss.population(1), ss.population(2)];
            for (g, w) in got.iter().zip([want.p00, want.ps01, want.p11]) {
                assert!((g - w).abs() < 1e-9, "x={x}: {got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn effective_steady_state_at_defaults() {
        let m = build_effective_model(&ModelParams::default()).unwrap().light_manifold();
        let l = Liouvillian::new(&m.hamiltonian, &m.channels);
        let ss = steady_state(&l).unwrap();
        ss.check().unwrap();
        assert!(max_abs(&l.rhs(&ss.0)) < 1e-10);
        let want = steady_populations(-0.05);
        assert!((ss.population(0) - want.p00).abs() < 2e-5);
        assert!((ss.population(1) - want.ps01).abs() < 2e-5);
        assert!((ss.population(2) - want.p11).abs() < 2e-5);
    }

    #[test]
    fn undriven_steady_state_is_degenerate() {
        let p = ModelParams {
            n_max: 0,
            ..ModelParams::default()
        }
        .undriven();
        let (_, l) = full(&p);
        match steady_state(&l) {
            Err(Error::DegenerateSteadyState { dimension }) => assert_eq!(dimension, 16),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }
}
