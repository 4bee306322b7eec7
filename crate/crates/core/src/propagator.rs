//! No-emission evolution `ψ(t) = exp(−i H_cond t) ψ(0)`.
//!
//! `H_cond` is time independent, so it is diagonalised once and every later
//! propagation costs one `O(d²)` product regardless of `t`. When the
//! eigenvector matrix is ill conditioned the propagator demotes itself to a
//! stepped matrix exponential: `exp(−iHh)` for a fixed step `h` is squared
//! repeatedly and any `t` is assembled from the binary expansion of `t/h`.

use crate::error::Result;
use crate::linalg::{eigen_decompose, max_abs, norm_sqr, one_norm, CMatrix, CVector, C64, I};
use crate::model::Operator;

/// Spectral decompositions with a worse condition estimate are not trusted.
pub const MAX_CONDITION: f64 = 1e8;
/// Maximum `‖VΛV⁻¹ − H‖_max / ‖H‖_max` accepted for the spectral path.
pub const MAX_RECONSTRUCTION: f64 = 1e-9;

const STEPPED_POWERS: usize = 64;

#[derive(Debug, Clone)]
struct Spectral {
    values: CVector,
    vectors: CMatrix,
    inverse: CMatrix,
    condition: f64,
}

#[derive(Debug, Clone)]
struct Stepped {
    step: f64,
    /// `exp(−iH h 2^k)` for `k = 0..STEPPED_POWERS`.
    powers: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
enum Method {
    Spectral(Spectral),
    Stepped(Stepped),
}

#[derive(Debug, Clone)]
pub struct Propagator {
    hamiltonian: CMatrix,
    method: Method,
}

impl Propagator {
    /// Spectral propagator, demoted to the stepped one if the decomposition
    /// fails or fails its accuracy checks.
    pub fn new(h: &Operator) -> Propagator {
        match Self::spectral(h) {
            Ok(p) => p,
            Err(reason) => {
                log::warn!(
                    "{}: spectral propagator demoted to stepped integration ({reason})",
                    h.label
                );
                Self::stepped(h)
            }
        }
    }

    fn spectral(h: &Operator) -> std::result::Result<Propagator, String> {
        let eig = eigen_decompose(&h.matrix).map_err(|e| e.to_string())?;
        let scale = max_abs(&h.matrix);
        if eig.condition > MAX_CONDITION {
            return Err(format!("eigenvector condition {:.3e}", eig.condition));
        }
        if eig.reconstruction_error > MAX_RECONSTRUCTION * scale {
            return Err(format!("reconstruction error {:.3e}", eig.reconstruction_error));
        }
        Ok(Propagator {
            hamiltonian: h.matrix.clone(),
            method: Method::Spectral(Spectral {
                values: eig.values,
                vectors: eig.vectors,
                inverse: eig.inverse,
                condition: eig.condition,
            }),
        })
    }

    /// Always uses the stepped matrix exponential.
    pub fn stepped(h: &Operator) -> Propagator {
        let norm = one_norm(&h.matrix);
        let step = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        let mut powers = Vec::with_capacity(STEPPED_POWERS);
        let mut m = (&h.matrix * (-I * step)).exp();
        for _ in 0..STEPPED_POWERS {
            let next = &m * &m;
            powers.push(m);
            m = next;
        }
        Propagator {
            hamiltonian: h.matrix.clone(),
            method: Method::Stepped(Stepped { step, powers }),
        }
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.method, Method::Spectral(_))
    }

    /// Condition estimate of the eigenvector matrix (spectral path only).
    pub fn condition(&self) -> Option<f64> {
        match &self.method {
            Method::Spectral(s) => Some(s.condition),
            Method::Stepped(_) => None,
        }
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Instantaneous loss rate `−d‖ψ‖²/dt = ⟨ψ| i(H − H†) |ψ⟩`.
    pub fn decay_rate(&self, psi: &CVector) -> f64 {
        let hpsi = &self.hamiltonian * psi;
        let expectation: C64 = psi.iter().zip(hpsi.iter()).map(|(a, b)| a.conj() * b).sum();
        -2.0 * expectation.im
    }

    /// Unnormalised `exp(−iHt)ψ`; its squared norm is the no-emission
    /// probability over `t`.
    pub fn propagate(&self, psi: &CVector, t: f64) -> CVector {
        self.prepare(psi).state_at(t)
    }

    /// Precomputes what is needed to evaluate `exp(−iHt)ψ` at many `t`.
    pub fn prepare(&self, psi: &CVector) -> PreparedState<'_> {
        let coefficients = match &self.method {
            Method::Spectral(s) => &s.inverse * psi,
            Method::Stepped(_) => psi.clone(),
        };
        PreparedState {
            propagator: self,
            initial: psi.clone(),
            coefficients,
        }
    }
}

/// A state ready for repeated propagation by one [`Propagator`].
#[derive(Debug, Clone)]
pub struct PreparedState<'a> {
    propagator: &'a Propagator,
    initial: CVector,
    /// Eigen-coefficients `V⁻¹ψ` (spectral) or `ψ` itself (stepped).
    coefficients: CVector,
}

impl PreparedState<'_> {
    pub fn state_at(&self, t: f64) -> CVector {
        if t == 0.0 {
            return self.initial.clone();
        }
        match &self.propagator.method {
            Method::Spectral(s) => {
                let phased = CVector::from_iterator(
                    self.coefficients.len(),
                    self.coefficients
                        .iter()
                        .zip(s.values.iter())
                        .map(|(coef, lambda)| coef * (-I * lambda * t).exp()),
                );
                &s.vectors * phased
            }
            Method::Stepped(st) => stepped_apply(&self.propagator.hamiltonian, st, &self.coefficients, t),
        }
    }

    /// `(S(t), −dS/dt)` for the survival `S`.
    pub fn survival_and_loss(&self, t: f64) -> (f64, f64) {
        let psi = self.state_at(t);
        (norm_sqr(&psi), self.propagator.decay_rate(&psi))
    }

    /// No-emission probability `‖exp(−iHt)ψ‖²`.
    pub fn survival(&self, t: f64) -> f64 {
        norm_sqr(&self.state_at(t))
    }
}

fn stepped_apply(h: &CMatrix, st: &Stepped, psi: &CVector, t: f64) -> CVector {
    if t < st.step {
        return (h * (-I * t)).exp() * psi;
    }
    let ratio = t / st.step;
    let max_steps = (1u128 << STEPPED_POWERS) - 1;
    let n = (ratio.floor() as u128).min(max_steps);
    let remainder = t - n as f64 * st.step;
    let mut out = if remainder.abs() > 0.0 {
        (h * (-I * remainder)).exp() * psi
    } else {
        psi.clone()
    };
    for (k, power) in st.powers.iter().enumerate() {
        if (n >> k) & 1 == 1 {
            out = power * out;
        }
    }
    out
}

/// Dense `exp(−iHt)` by scaling and squaring; used for cross-checks.
pub fn dense_exponential(h: &CMatrix, t: f64) -> CMatrix {
    (h * (-I * t)).exp()
}

/// Builds a spectral propagator or reports why it would be demoted.
pub fn try_spectral(h: &Operator) -> Result<Propagator> {
    Propagator::spectral(h).map_err(crate::error::Error::Numerical)
}
