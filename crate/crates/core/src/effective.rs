//! Adiabatically eliminated model and closed-form observables.
//!
//! With the excited level and the photon states eliminated, the light period
//! is a three-state ladder `|00⟩ ↔ |s01⟩ ↔ |11⟩` driven by `Ω_M/√2` with
//! detuning `Δ_L` and cavity leakage `κ_eff`, while `|a01⟩` is decoupled.
//! The functions here evaluate the steady populations and the mean
//! timescales `T_cav`, `T_dark` and `T_light` of the telegraph signal.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C64, I};
use crate::model::{BasisIndex, BasisKind, Channel, JumpChannel, ModelParams, Operator, PairState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// `−Ω_L g/(√2 Δ)`
    pub g_eff: f64,
    /// `−Ω_L²/(4Δ)`
    pub delta_l: f64,
    /// `4 g_eff²/κ`
    pub kappa_eff: f64,
    /// `−Ω_L²/(4ΔΩ_M)`
    pub x: f64,
    /// `g²/(κΓ)`
    pub cooperativity: f64,
}

pub fn derived_params(params: &ModelParams) -> Result<EffectiveParams> {
    if params.delta == 0.0 {
        return Err(Error::Undefined {
            quantity: "g_eff",
            reason: "detuning delta is zero".into(),
        });
    }
    if params.omega_m == 0.0 {
        return Err(Error::Undefined {
            quantity: "x",
            reason: "omega_m is zero".into(),
        });
    }
    if params.kappa == 0.0 {
        return Err(Error::Undefined {
            quantity: "kappa_eff",
            reason: "kappa is zero".into(),
        });
    }
    if params.gamma() == 0.0 {
        return Err(Error::Undefined {
            quantity: "cooperativity",
            reason: "gamma0 + gamma1 is zero".into(),
        });
    }
    let g_eff = -params.omega_l * params.g / (SQRT_2 * params.delta);
    let delta_l = -params.omega_l * params.omega_l / (4.0 * params.delta);
    Ok(EffectiveParams {
        g_eff,
        delta_l,
        kappa_eff: 4.0 * g_eff * g_eff / params.kappa,
        x: delta_l / params.omega_m,
        cooperativity: params.cooperativity(),
    })
}

/// Basis of the effective model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveState {
    G00,
    S01,
    G11,
    A01,
}

impl EffectiveState {
    pub const ALL: [EffectiveState; 4] = [
        EffectiveState::G00,
        EffectiveState::S01,
        EffectiveState::G11,
        EffectiveState::A01,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn vector(self) -> CVector {
        let mut v = CVector::zeros(4);
        v[self.index()] = c(1.0);
        v
    }
}

/// Conditional Hamiltonian and reset channel of the eliminated model.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub params: EffectiveParams,
    pub hamiltonian: Operator,
    pub channels: Vec<JumpChannel>,
}

impl EffectiveModel {
    /// Restriction to `{|00⟩, |s01⟩, |11⟩}`, dropping the decoupled `|a01⟩`.
    pub fn light_manifold(&self) -> EffectiveModel {
        let cut = |m: &CMatrix| m.view((0, 0), (3, 3)).into_owned();
        EffectiveModel {
            params: self.params,
            hamiltonian: Operator::new(cut(&self.hamiltonian.matrix), BasisKind::Effective, "H_eff_light"),
            channels: self
                .channels
                .iter()
                .map(|ch| JumpChannel {
                    channel: ch.channel,
                    operator: Operator::new(
                        cut(&ch.operator.matrix),
                        BasisKind::Effective,
                        ch.operator.label.clone(),
                    ),
                    rate: ch.rate,
                })
                .collect(),
        }
    }
}

/// Builds the eliminated model on `{|00,0⟩, |s01,0⟩, |11,0⟩, |a01,0⟩}`.
///
/// Cavity emission is a single coherent jump `L = |00⟩⟨s01| + |s01⟩⟨11|` at
/// rate `κ_eff`: it is what `b` does to the one-photon admixtures
/// `ξ_00,1 ∝ σ_01,0` and `σ_01,1 ∝ ξ_11,0`.
pub fn build_effective_model(params: &ModelParams) -> Result<EffectiveModel> {
    let eff = derived_params(params)?;
    let report = crate::model::validate_regime(params);
    for w in report.warnings() {
        log::warn!("effective model outside its regime: {} (ratio {:.3})", w.name, w.ratio);
    }

    Ok(EffectiveModel::from_rates(eff, params.omega_m))
}

impl EffectiveModel {
    /// Builds the operators from `Ω_M` and the `delta_l`/`kappa_eff` fields
    /// of `eff`, so the ladder can be set up at any `(x, κ_eff/Ω_M)`.
    pub fn from_rates(eff: EffectiveParams, omega_m: f64) -> EffectiveModel {
        use EffectiveState::*;
        let mut h = CMatrix::zeros(4, 4);
        let ladder = omega_m * FRAC_1_SQRT_2;
        for (a, b) in [(G00, S01), (S01, G11)] {
            h[(a.index(), b.index())] = c(ladder);
            h[(b.index(), a.index())] = c(ladder);
        }
        h[(G11.index(), G11.index())] = C64::new(eff.delta_l, -0.5 * eff.kappa_eff);
        h[(G00.index(), G00.index())] = c(-eff.delta_l);
        h[(S01.index(), S01.index())] = -I * (0.5 * eff.kappa_eff);

        let mut l = CMatrix::zeros(4, 4);
        l[(G00.index(), S01.index())] = c(1.0);
        l[(S01.index(), G11.index())] = c(1.0);

        EffectiveModel {
            params: eff,
            hamiltonian: Operator::new(h, BasisKind::Effective, "H_eff"),
            channels: vec![JumpChannel {
                channel: Channel::Cavity,
                operator: Operator::new(l, BasisKind::Effective, "L_eff"),
                rate: eff.kappa_eff,
            }],
        }
    }
}

/// Slow and fast amplitudes of a collective-basis state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSteadyAmplitudes {
    pub alpha01_0: C64,
    pub alpha02_0: C64,
    pub alpha12_0: C64,
    pub sigma01_0: C64,
    pub sigma02_0: C64,
    pub sigma12_0: C64,
    pub xi11_0: C64,
    pub xi22_0: C64,
    pub xi00_1: C64,
    pub sigma01_1: C64,
}

impl QuasiSteadyAmplitudes {
    /// Reads the amplitudes from a state in collective coordinates. One-photon
    /// amplitudes read as zero when `n_max = 0`.
    pub fn from_collective(basis: &BasisIndex, v: &CVector) -> Self {
        let amp = |p: PairState, n: usize| {
            if n <= basis.n_max() {
                v[basis.collective_index(p, n)]
            } else {
                c(0.0)
            }
        };
        QuasiSteadyAmplitudes {
            alpha01_0: amp(PairState::A01, 0),
            alpha02_0: amp(PairState::A02, 0),
            alpha12_0: amp(PairState::A12, 0),
            sigma01_0: amp(PairState::S01, 0),
            sigma02_0: amp(PairState::S02, 0),
            sigma12_0: amp(PairState::S12, 0),
            xi11_0: amp(PairState::G11, 0),
            xi22_0: amp(PairState::E22, 0),
            xi00_1: amp(PairState::G00, 1),
            sigma01_1: amp(PairState::S01, 1),
        }
    }
}

/// Deviations of the fast amplitudes from their first-order quasi-steady
/// values, keyed by the fast amplitude they constrain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiSteadyResidual {
    pub entries: Vec<(&'static str, C64)>,
}

impl QuasiSteadyResidual {
    pub fn get(&self, name: &str) -> Option<C64> {
        self.entries.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max)
    }
}

pub fn quasisteady_residual(basis: &BasisIndex, state: &CVector, params: &ModelParams) -> Result<QuasiSteadyResidual> {
    let eff = derived_params(params)?;
    let a = QuasiSteadyAmplitudes::from_collective(basis, state);
    let ratio = params.omega_l / (2.0 * params.delta);
    let leak = I * (2.0 * eff.g_eff / params.kappa);
    Ok(QuasiSteadyResidual {
        entries: vec![
            ("alpha02_0", a.alpha02_0 + a.alpha01_0 * ratio),
            ("alpha12_0", a.alpha12_0),
            ("xi22_0", a.xi22_0),
            ("sigma02_0", a.sigma02_0 + a.sigma01_0 * ratio),
            (
                "sigma12_0",
                a.sigma12_0 - a.xi11_0 * (params.omega_l / (SQRT_2 * params.delta)),
            ),
            ("xi00_1", a.xi00_1 + leak * a.sigma01_0),
            ("sigma01_1", a.sigma01_1 + leak * a.xi11_0),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyPopulations {
    pub p00: f64,
    pub ps01: f64,
    pub p11: f64,
}

/// Light-period steady populations as a function of `x`.
pub fn steady_populations(x: f64) -> SteadyPopulations {
    if !x.is_finite() {
        return SteadyPopulations {
            p00: 1.0,
            ps01: 0.0,
            p11: 0.0,
        };
    }
    let x2 = x * x;
    let denom = 3.0 + 16.0 * x2 + 16.0 * x2 * x2;
    let ps01 = (1.0 + 8.0 * x2) / denom;
    let p11 = 1.0 / denom;
    SteadyPopulations {
        p00: 1.0 - ps01 - p11,
        ps01,
        p11,
    }
}

/// Mean intra-cavity photon number during a light period,
/// `(κ_eff/κ)(P_s01 + P_11)`.
pub fn mean_photon_number(params: &ModelParams) -> Result<f64> {
    let eff = derived_params(params)?;
    let pops = steady_populations(eff.x);
    Ok(eff.kappa_eff / params.kappa * (pops.ps01 + pops.p11))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimescaleSummary {
    /// Mean spacing of cavity emissions within a light period.
    pub t_cav: f64,
    pub t_dark: f64,
    pub t_light: f64,
    pub ratio_dark_cav: f64,
    pub ratio_light_dark: f64,
    /// `32g²/(3κ(2Γ₀+Γ₁))`, the `x → 0` limit of `ratio_dark_cav`.
    pub ratio_max: f64,
}

pub fn timescales(params: &ModelParams) -> Result<TimescaleSummary> {
    let undefined = |quantity, reason: &str| Error::Undefined {
        quantity,
        reason: reason.to_string(),
    };
    let eff = derived_params(params)?;
    let (g, kappa, delta, omega_l) = (params.g, params.kappa, params.delta, params.omega_l);
    let dark_rate = 2.0 * params.gamma0 + params.gamma1;
    if g == 0.0 || omega_l == 0.0 {
        return Err(undefined("t_cav", "requires g and omega_l nonzero"));
    }
    if dark_rate == 0.0 {
        return Err(undefined("t_dark", "2*gamma0 + gamma1 is zero"));
    }
    let x2 = eff.x * eff.x;
    let light_rate = 2.0 * params.gamma0 + (1.0 + 8.0 * x2) * params.gamma1;
    if light_rate == 0.0 {
        return Err(undefined("t_light", "2*gamma0 + (1 + 8x^2)*gamma1 is zero"));
    }

    let shelving = 8.0 * delta * delta / (omega_l * omega_l);
    let t_cav = (3.0 + 4.0 * x2) * kappa * delta * delta / (4.0 * g * g * omega_l * omega_l);
    let t_dark = shelving / dark_rate;
    let t_light = (3.0 + 16.0 * x2 + 16.0 * x2 * x2) / light_rate * shelving;
    Ok(TimescaleSummary {
        t_cav,
        t_dark,
        t_light,
        ratio_dark_cav: t_dark / t_cav,
        ratio_light_dark: t_light / t_dark,
        ratio_max: 32.0 * g * g / (3.0 * kappa * dark_rate),
    })
}

/// Everything the closed forms say about one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSummary {
    pub params: ModelParams,
    pub effective: EffectiveParams,
    pub populations: SteadyPopulations,
    pub timescales: TimescaleSummary,
    pub mean_photon_number: f64,
}

pub fn analytic_summary(params: &ModelParams) -> Result<AnalyticSummary> {
    let effective = derived_params(params)?;
    Ok(AnalyticSummary {
        params: *params,
        effective,
        populations: steady_populations(effective.x),
        timescales: timescales(params)?,
        mean_photon_number: mean_photon_number(params)?,
    })
}

impl AnalyticSummary {
    /// `(name, value)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let e = &self.effective;
        let p = &self.populations;
        let t = &self.timescales;
        vec![
            ("g_eff", e.g_eff),
            ("delta_l", e.delta_l),
            ("kappa_eff", e.kappa_eff),
            ("x", e.x),
            ("cooperativity", e.cooperativity),
            ("p00", p.p00),
            ("ps01", p.ps01),
            ("p11", p.p11),
            ("mean_photon_number", self.mean_photon_number),
            ("t_cav", t.t_cav),
            ("t_dark", t.t_dark),
            ("t_light", t.t_light),
            ("ratio_dark_cav", t.ratio_dark_cav),
            ("ratio_light_dark", t.ratio_light_dark),
            ("ratio_max", t.ratio_max),
        ]
    }
}
