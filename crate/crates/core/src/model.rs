//! Two three-level atoms coupled to one cavity mode.
//!
//! Each atom has ground levels `0`, `1` and an excited level `2`. The `0–2`
//! transitions couple to the cavity with strength `g`, a laser with Rabi
//! frequency `Ω_L` drives `1–2` (detuned by `Δ`) and a weak field `Ω_M`
//! drives `0–1`. Units are `ħ = 1` and all rates are multiples of `g`.
//!
//! The bare basis is the product `|j₁ j₂, n⟩`; the collective basis replaces
//! the atomic pair with `|00⟩, |11⟩, |22⟩, |s_jk⟩, |a_jk⟩`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, max_abs_diff, CMatrix, CVector, C64, I};

/// Physical rates and frequencies, all in units of `g` (time in `1/g`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub g: f64,
    pub kappa: f64,
    /// Decay rate of the `2 → 0` transition.
    pub gamma0: f64,
    /// Decay rate of the `2 → 1` transition.
    pub gamma1: f64,
    pub omega_l: f64,
    pub omega_m: f64,
    pub delta: f64,
    /// Highest retained cavity photon number.
    pub n_max: usize,
}

impl Default for ModelParams {
    /// `Δ = 50`, `κ = Ω_L = 1`, `Ω_M = Γ = 0.1` with `Γ₀ = Γ₁`, i.e. `C = 10`.
    fn default() -> Self {
        ModelParams {
            g: 1.0,
            kappa: 1.0,
            gamma0: 0.05,
            gamma1: 0.05,
            omega_l: 1.0,
            omega_m: 0.1,
            delta: 50.0,
            n_max: 2,
        }
    }
}

impl ModelParams {
    /// Total spontaneous decay rate of level 2.
    pub fn gamma(&self) -> f64 {
        self.gamma0 + self.gamma1
    }

    /// Single-atom cooperativity `g²/(κΓ)`.
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (self.kappa * self.gamma())
    }

    /// All couplings and drives switched off, rates kept.
    pub fn undriven(&self) -> Self {
        ModelParams {
            g: 0.0,
            omega_l: 0.0,
            omega_m: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("omega_l", self.omega_l),
            ("omega_m", self.omega_m),
        ];
        for (name, value) in nonneg {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be finite and non-negative, got {value}"),
                });
            }
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                message: format!("must be finite, got {}", self.delta),
            });
        }
        Ok(())
    }
}

/// One bare product state `|j₁ j₂, n⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductState {
    pub atom1: usize,
    pub atom2: usize,
    pub photons: usize,
}

impl ProductState {
    pub fn new(atom1: usize, atom2: usize, photons: usize) -> Self {
        ProductState { atom1, atom2, photons }
    }
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{},{}⟩", self.atom1, self.atom2, self.photons)
    }
}

/// Flat index over `|j₁ j₂, n⟩`, lexicographic in `(j₁, j₂, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisIndex {
    n_max: usize,
}

pub const LEVELS: usize = 3;
pub const PAIR_STATES: usize = LEVELS * LEVELS;

pub fn build_basis(n_max: usize) -> BasisIndex {
    BasisIndex { n_max }
}

impl BasisIndex {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        PAIR_STATES * self.fock_dim()
    }

    pub fn index(&self, s: ProductState) -> usize {
        debug_assert!(s.atom1 < LEVELS && s.atom2 < LEVELS && s.photons <= self.n_max);
        (s.atom1 * LEVELS + s.atom2) * self.fock_dim() + s.photons
    }

    pub fn state(&self, k: usize) -> ProductState {
        debug_assert!(k < self.dim());
        let pair = k / self.fock_dim();
        ProductState {
            atom1: pair / LEVELS,
            atom2: pair % LEVELS,
            photons: k % self.fock_dim(),
        }
    }

    pub fn states(&self) -> impl Iterator<Item = ProductState> + '_ {
        (0..self.dim()).map(move |k| self.state(k))
    }

    pub fn basis_vector(&self, s: ProductState) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[self.index(s)] = c(1.0);
        v
    }

    /// Collective-basis index of `|pair, n⟩`; same layout as [`Self::index`].
    pub fn collective_index(&self, pair: PairState, photons: usize) -> usize {
        pair.index() * self.fock_dim() + photons
    }

    pub fn collective_vector(&self, pair: PairState, photons: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[self.collective_index(pair, photons)] = c(1.0);
        v
    }

    /// `|pair, n⟩` expressed in bare product coordinates.
    pub fn collective_in_bare(&self, pair: PairState, photons: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        for ((j1, j2), amp) in pair.components() {
            v[self.index(ProductState::new(j1, j2, photons))] = c(amp);
        }
        v
    }
}

/// Symmetric/antisymmetric two-atom states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairState {
    G00,
    G11,
    E22,
    S01,
    A01,
    S02,
    A02,
    S12,
    A12,
}

impl PairState {
    pub const ALL: [PairState; PAIR_STATES] = [
        PairState::G00,
        PairState::G11,
        PairState::E22,
        PairState::S01,
        PairState::A01,
        PairState::S02,
        PairState::A02,
        PairState::S12,
        PairState::A12,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            PairState::G00 => "00",
            PairState::G11 => "11",
            PairState::E22 => "22",
            PairState::S01 => "s01",
            PairState::A01 => "a01",
            PairState::S02 => "s02",
            PairState::A02 => "a02",
            PairState::S12 => "s12",
            PairState::A12 => "a12",
        }
    }

    /// Expansion in bare pair states `|j₁ j₂⟩`.
    pub fn components(self) -> Vec<((usize, usize), f64)> {
        let sym = |j, k| vec![((j, k), FRAC_1_SQRT_2), ((k, j), FRAC_1_SQRT_2)];
        let anti = |j, k| vec![((j, k), FRAC_1_SQRT_2), ((k, j), -FRAC_1_SQRT_2)];
        match self {
            PairState::G00 => vec![((0, 0), 1.0)],
            PairState::G11 => vec![((1, 1), 1.0)],
            PairState::E22 => vec![((2, 2), 1.0)],
            PairState::S01 => sym(0, 1),
            PairState::A01 => anti(0, 1),
            PairState::S02 => sym(0, 2),
            PairState::A02 => anti(0, 2),
            PairState::S12 => sym(1, 2),
            PairState::A12 => anti(1, 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Bare,
    Collective,
    /// The four-state adiabatically eliminated model.
    Effective,
}

/// Dense complex matrix tagged with the basis it acts in.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub matrix: CMatrix,
    pub basis: BasisKind,
    pub label: String,
}

impl Operator {
    pub fn new(matrix: CMatrix, basis: BasisKind, label: impl Into<String>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operators are square");
        Operator {
            matrix,
            basis,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// `U O U†`, retagged.
    pub fn conjugate_by(&self, u: &CMatrix, basis: BasisKind) -> Operator {
        Operator::new(u * &self.matrix * u.adjoint(), basis, self.label.clone())
    }
}

/// Emission channels. The discriminant order is the fixed channel order
/// used everywhere (sampling, CSV output, weights).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Cavity,
    Atom1To0,
    Atom1To1,
    Atom2To0,
    Atom2To1,
}

impl Channel {
    pub const ALL: [Channel; 5] = [
        Channel::Cavity,
        Channel::Atom1To0,
        Channel::Atom1To1,
        Channel::Atom2To0,
        Channel::Atom2To1,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Channel::Cavity => "cavity",
            Channel::Atom1To0 => "atom1_to0",
            Channel::Atom1To1 => "atom1_to1",
            Channel::Atom2To0 => "atom2_to0",
            Channel::Atom2To1 => "atom2_to1",
        }
    }

    pub fn from_label(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|ch| ch.label() == s)
    }

    pub fn is_atomic(self) -> bool {
        self != Channel::Cavity
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A jump operator `C` with its rate; the emission weight of a state is
/// `rate·‖Cψ‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannel {
    pub channel: Channel,
    pub operator: Operator,
    pub rate: f64,
}

impl JumpChannel {
    pub fn weight(&self, psi: &CVector) -> f64 {
        self.rate * crate::linalg::norm_sqr(&self.operator.apply(psi))
    }

    /// `rate · C†C`
    pub fn decay_generator(&self) -> CMatrix {
        let m = &self.operator.matrix;
        m.adjoint() * m * c(self.rate)
    }
}

/// `|to⟩⟨from|` on one atom (0 or 1), identity elsewhere.
pub fn atom_transition(basis: &BasisIndex, atom: usize, to: usize, from: usize) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for s in basis.states() {
        let level = if atom == 0 { s.atom1 } else { s.atom2 };
        if level != from {
            continue;
        }
        let mut t = s;
        if atom == 0 {
            t.atom1 = to;
        } else {
            t.atom2 = to;
        }
        m[(basis.index(t), basis.index(s))] = c(1.0);
    }
    m
}

/// Truncated cavity annihilation operator `b`.
pub fn annihilation(basis: &BasisIndex) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for s in basis.states().filter(|s| s.photons > 0) {
        let t = ProductState::new(s.atom1, s.atom2, s.photons - 1);
        m[(basis.index(t), basis.index(s))] = c((s.photons as f64).sqrt());
    }
    m
}

/// Exchanges the two atoms: `|j₁ j₂, n⟩ → |j₂ j₁, n⟩`.
pub fn swap_operator(basis: &BasisIndex) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for s in basis.states() {
        let t = ProductState::new(s.atom2, s.atom1, s.photons);
        m[(basis.index(t), basis.index(s))] = c(1.0);
    }
    m
}

/// Conditional (no-emission) Hamiltonian in the bare product basis.
pub fn build_hamiltonian(params: &ModelParams, basis: &BasisIndex) -> Operator {
    assert_eq!(params.n_max, basis.n_max(), "basis built for a different truncation");
    let d = basis.dim();
    let b = annihilation(basis);
    let bdag = b.adjoint();
    let mut h = CMatrix::zeros(d, d);
    let excited = C64::new(params.delta, -0.5 * params.gamma());
    for atom in 0..2 {
        let s12 = atom_transition(basis, atom, 1, 2);
        let s01 = atom_transition(basis, atom, 0, 1);
        let s02 = atom_transition(basis, atom, 0, 2);
        let p2 = atom_transition(basis, atom, 2, 2);

        h += (&s12 + s12.adjoint()) * c(0.5 * params.omega_l);
        h += (&s01 + s01.adjoint()) * c(0.5 * params.omega_m);
        let coupling = &s02 * &bdag;
        h += (coupling.adjoint() + coupling) * c(params.g);
        h += p2 * excited;
    }
    h -= &bdag * &b * (I * (0.5 * params.kappa));
    Operator::new(h, BasisKind::Bare, "H_cond")
}

/// The five emission channels, in [`Channel::ALL`] order.
pub fn build_jump_operators(params: &ModelParams, basis: &BasisIndex) -> Vec<JumpChannel> {
    let mut out = vec![JumpChannel {
        channel: Channel::Cavity,
        operator: Operator::new(annihilation(basis), BasisKind::Bare, "C_cav"),
        rate: params.kappa,
    }];
    let atom_channels = [
        (Channel::Atom1To0, 0, 0, params.gamma0),
        (Channel::Atom1To1, 0, 1, params.gamma1),
        (Channel::Atom2To0, 1, 0, params.gamma0),
        (Channel::Atom2To1, 1, 1, params.gamma1),
    ];
    for (channel, atom, to, rate) in atom_channels {
        out.push(JumpChannel {
            channel,
            operator: Operator::new(
                atom_transition(basis, atom, to, 2),
                BasisKind::Bare,
                format!("C_atom{}_to{}", atom + 1, to),
            ),
            rate,
        });
    }
    out
}

/// Unitary mapping bare coordinates to collective coordinates:
/// `U[(p, n), (j₁ j₂, n)] = ⟨p | j₁ j₂⟩`.
pub fn collective_transform(basis: &BasisIndex) -> Operator {
    let d = basis.dim();
    let mut u = CMatrix::zeros(d, d);
    for pair in PairState::ALL {
        for n in 0..basis.fock_dim() {
            let row = basis.collective_index(pair, n);
            for ((j1, j2), amp) in pair.components() {
                u[(row, basis.index(ProductState::new(j1, j2, n)))] = c(amp);
            }
        }
    }
    Operator::new(u, BasisKind::Collective, "U_collective")
}

/// Accumulates `coef·|a, n+shift⟩⟨b, n|·(√(n+1) if shift)` plus its Hermitian
/// conjugate, in collective coordinates.
fn add_collective_term(
    m: &mut CMatrix,
    basis: &BasisIndex,
    a: PairState,
    b: PairState,
    coef: f64,
    create_photon: bool,
) {
    for n in 0..basis.fock_dim() {
        let (n_out, amp) = if create_photon {
            if n + 1 > basis.n_max() {
                continue;
            }
            (n + 1, ((n + 1) as f64).sqrt())
        } else {
            (n, 1.0)
        };
        let row = basis.collective_index(a, n_out);
        let col = basis.collective_index(b, n);
        m[(row, col)] += c(coef * amp);
        m[(col, row)] += c(coef * amp);
    }
}

/// Conditional Hamiltonian written directly in the collective basis.
pub fn collective_hamiltonian(params: &ModelParams, basis: &BasisIndex) -> Operator {
    use PairState::*;
    let d = basis.dim();
    let mut h = CMatrix::zeros(d, d);
    let s2 = std::f64::consts::SQRT_2;
    let half_l = 0.5 * params.omega_l;
    let half_m = 0.5 * params.omega_m;
    let g = params.g;

    for (a, b, k) in [(S01, S02, 1.0), (A01, A02, 1.0), (G11, S12, s2), (S12, E22, s2)] {
        add_collective_term(&mut h, basis, a, b, half_l * k, false);
    }
    for (a, b, k) in [(S02, S12, 1.0), (A02, A12, 1.0), (G00, S01, s2), (S01, G11, s2)] {
        add_collective_term(&mut h, basis, a, b, half_m * k, false);
    }
    for (a, b, k) in [(S01, S12, 1.0), (A01, A12, -1.0), (G00, S02, s2), (S02, E22, s2)] {
        add_collective_term(&mut h, basis, a, b, g * k, true);
    }

    let excited = C64::new(params.delta, -0.5 * params.gamma());
    for n in 0..basis.fock_dim() {
        for (pair, k) in [(S02, 1.0), (A02, 1.0), (S12, 1.0), (A12, 1.0), (E22, 2.0)] {
            let i = basis.collective_index(pair, n);
            h[(i, i)] += excited * k;
        }
        for pair in PairState::ALL {
            let i = basis.collective_index(pair, n);
            h[(i, i)] -= I * (0.5 * params.kappa * n as f64);
        }
    }
    Operator::new(h, BasisKind::Collective, "H_cond")
}

/// Photon-number-diagonal `Σ_n |a, n⟩⟨b, n|` in collective coordinates.
fn collective_ketbra(basis: &BasisIndex, terms: &[(PairState, PairState, f64)]) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for &(a, b, coef) in terms {
        for n in 0..basis.fock_dim() {
            m[(basis.collective_index(a, n), basis.collective_index(b, n))] += c(coef);
        }
    }
    m
}

/// Symmetric/antisymmetric reset operators `R_ji` plus the cavity channel,
/// all in collective coordinates. Order: cavity, R01, R02, R11, R12.
///
/// These differ from the transformed single-atom channels individually but
/// generate the same reset superoperator.
pub fn collective_reset_operators(params: &ModelParams, basis: &BasisIndex) -> Vec<JumpChannel> {
    use PairState::*;
    let h = FRAC_1_SQRT_2;
    let r01 = collective_ketbra(
        basis,
        &[(G00, S02, 1.0), (S01, S12, h), (A01, A12, -h), (S02, E22, 1.0)],
    );
    let r02 = collective_ketbra(
        basis,
        &[(G00, A02, 1.0), (S01, A12, h), (A01, S12, -h), (A02, E22, -1.0)],
    );
    let r11 = collective_ketbra(basis, &[(G11, S12, 1.0), (S01, S02, h), (A01, A02, h), (S12, E22, 1.0)]);
    let r12 = collective_ketbra(
        basis,
        &[(G11, A12, 1.0), (S01, A02, h), (A01, S02, h), (A12, E22, -1.0)],
    );

    // b does not touch the atoms, so it has the same form in both bases.
    let u = collective_transform(basis).matrix;
    let b = &u * annihilation(basis) * u.adjoint();

    let mk = |channel, m, label: &str, rate| JumpChannel {
        channel,
        operator: Operator::new(m, BasisKind::Collective, label),
        rate,
    };
    vec![
        mk(Channel::Cavity, b, "C_cav", params.kappa),
        mk(Channel::Atom1To0, r01, "R01", params.gamma0),
        mk(Channel::Atom2To0, r02, "R02", params.gamma0),
        mk(Channel::Atom1To1, r11, "R11", params.gamma1),
        mk(Channel::Atom2To1, r12, "R12", params.gamma1),
    ]
}

/// Reset superoperator `Σ_c rate_c C_c ρ C_c†`.
pub fn apply_reset(channels: &[JumpChannel], rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for ch in channels {
        let m = &ch.operator.matrix;
        out += m * rho * m.adjoint() * c(ch.rate);
    }
    out
}

/// `max |i(H − H†) − Σ_c rate_c C_c†C_c|`.
pub fn decay_bookkeeping_error(h: &Operator, channels: &[JumpChannel]) -> f64 {
    let lhs = (&h.matrix - h.matrix.adjoint()) * I;
    let mut rhs = CMatrix::zeros(h.dim(), h.dim());
    for ch in channels {
        rhs += ch.decay_generator();
    }
    max_abs_diff(&lhs, &rhs)
}

/// Largest elementwise disagreements between the bare and collective forms
/// of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralReport {
    /// `U H_bare U†` against the directly built collective `H_cond`.
    pub hamiltonian: f64,
    /// Reset superoperators compared on every matrix unit `|i⟩⟨j|`.
    pub reset: f64,
    /// `U†U − 1`.
    pub unitarity: f64,
}

pub fn structural_equivalence(params: &ModelParams) -> StructuralReport {
    let b = build_basis(params.n_max);
    let d = b.dim();
    let u = collective_transform(&b).matrix;
    let unitarity = max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(d, d));
    let transformed = build_hamiltonian(params, &b).conjugate_by(&u, BasisKind::Collective);
    let hamiltonian = max_abs_diff(&transformed.matrix, &collective_hamiltonian(params, &b).matrix);

    let bare = build_jump_operators(params, &b);
    let coll = collective_reset_operators(params, &b);
    let mut reset: f64 = 0.0;
    let mut e = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            e[(i, j)] = c(1.0);
            let via_bare = &u * apply_reset(&bare, &(u.adjoint() * &e * &u)) * u.adjoint();
            reset = reset.max(max_abs_diff(&via_bare, &apply_reset(&coll, &e)));
            e[(i, j)] = c(0.0);
        }
    }
    StructuralReport {
        hamiltonian,
        reset,
        unitarity,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeStatus {
    Pass,
    /// The two sides of a strict inequality are equal.
    Borderline,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCondition {
    pub name: String,
    pub ratio: f64,
    pub status: RegimeStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub conditions: Vec<RegimeCondition>,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.status == RegimeStatus::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCondition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &RegimeCondition> {
        self.conditions.iter().filter(|c| c.status != RegimeStatus::Pass)
    }
}

/// Thresholds that operationalise the weak-drive and large-detuning
/// inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Minimum `|Δ|/X` for `X ≪ Δ`.
    pub min_separation: f64,
    /// Maximum `Ω_M/X` for `Ω_M < X`.
    pub max_weak_drive: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            min_separation: 10.0,
            max_weak_drive: 0.5,
        }
    }
}

pub fn validate_regime(params: &ModelParams) -> RegimeReport {
    validate_regime_with(params, RegimeThresholds::default())
}

pub fn validate_regime_with(params: &ModelParams, thresholds: RegimeThresholds) -> RegimeReport {
    let others = [
        ("g", params.g),
        ("kappa", params.kappa),
        ("gamma", params.gamma()),
        ("omega_l", params.omega_l),
    ];
    let mut conditions = Vec::with_capacity(2 * others.len());

    for (name, value) in others {
        let ratio = if params.omega_m == 0.0 {
            0.0
        } else if value == 0.0 {
            f64::INFINITY
        } else {
            params.omega_m / value
        };
        let status = if ratio <= thresholds.max_weak_drive {
            RegimeStatus::Pass
        } else if (ratio - 1.0).abs() <= 1e-12 {
            RegimeStatus::Borderline
        } else {
            RegimeStatus::Warn
        };
        conditions.push(RegimeCondition {
            name: format!("omega_m < {name}"),
            ratio,
            status,
        });
    }

    for (name, value) in others {
        let ratio = if value == 0.0 {
            f64::INFINITY
        } else {
            params.delta.abs() / value
        };
        let status = if ratio >= thresholds.min_separation {
            RegimeStatus::Pass
        } else {
            RegimeStatus::Warn
        };
        conditions.push(RegimeCondition {
            name: format!("{name} << delta"),
            ratio,
            status,
        });
    }

    RegimeReport { conditions }
}
