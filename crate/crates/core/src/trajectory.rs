//! Monte Carlo wavefunction trajectories.
//!
//! Between emissions the state follows `exp(−iH_cond t)`; the squared norm
//! is the probability that no emission has happened yet. Each jump is
//! sampled event by event: draw `r ∈ (0,1)`, solve `‖ψ(t)‖² = r` for the
//! jump time, then draw `u ∈ (0,1)` to pick the channel in proportion to
//! `rate_c·‖C_c ψ‖²`. Exactly these two uniforms are consumed per jump, in
//! that order, from a per-trajectory ChaCha20 stream.

use std::io::Write;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, norm_sqr, CMatrix, CVector};
use crate::model::{
    build_basis, build_hamiltonian, build_jump_operators, BasisIndex, Channel, JumpChannel, ModelParams, Operator,
    PairState, ProductState,
};
use crate::propagator::{PreparedState, Propagator};

/// Relative time tolerance of the jump-time root find.
pub const JUMP_TIME_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: Channel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// Normalised state at `time`.
    pub state: CVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub trajectory_id: usize,
    pub seed: u64,
    pub initial: String,
    pub horizon: f64,
    pub events: Vec<JumpEvent>,
    pub snapshots: Vec<Snapshot>,
}

impl TrajectoryRecord {
    pub fn events_on(&self, channel: Channel) -> impl Iterator<Item = &JumpEvent> {
        self.events.iter().filter(move |e| e.channel == channel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `|00, 0⟩`
    Ground,
    /// `|a01, 0⟩`
    Dark,
    #[serde(skip)]
    Product(ProductState),
}

impl InitialState {
    pub fn label(&self) -> String {
        match self {
            InitialState::Ground => "|00,0>".to_string(),
            InitialState::Dark => "|a01,0>".to_string(),
            InitialState::Product(s) => format!("|{}{},{}>", s.atom1, s.atom2, s.photons),
        }
    }

    pub fn vector(&self, basis: &BasisIndex) -> CVector {
        match self {
            InitialState::Ground => basis.basis_vector(ProductState::new(0, 0, 0)),
            InitialState::Dark => basis.collective_in_bare(PairState::A01, 0),
            InitialState::Product(s) => basis.basis_vector(*s),
        }
    }
}

/// Finds the time at which the no-emission probability of `state` drops to
/// `r`, or `None` if that does not happen within `t_max`.
///
/// The survival is bracketed by doubling a stride that starts at the inverse
/// of the initial loss rate. The bracket is then narrowed by Newton steps on
/// `ln S(t)`, falling back to bisection whenever a step leaves it, until the
/// bracket or the last step is within a relative [`JUMP_TIME_RTOL`].
/// Survival is nonincreasing, so the root is unique.
pub fn sample_jump_time(state: &CVector, prop: &Propagator, r: f64, t_max: f64) -> Option<f64> {
    let prepared = prop.prepare(state);
    sample_prepared(&prepared, prop.decay_rate(state), r, t_max)
}

fn sample_prepared(prepared: &PreparedState<'_>, initial_rate: f64, r: f64, t_max: f64) -> Option<f64> {
    debug_assert!(r > 0.0 && r < 1.0);
    if t_max <= 0.0 {
        return None;
    }
    let stride = if initial_rate > 0.0 { 1.0 / initial_rate } else { 1.0 };
    let mut lo = 0.0;
    let mut hi = stride.min(t_max);
    loop {
        if prepared.survival(hi) <= r {
            break;
        }
        if hi >= t_max {
            return None;
        }
        lo = hi;
        hi = (2.0 * hi).min(t_max);
    }
    let ln_r = r.ln();
    let mut t = 0.5 * (lo + hi);
    loop {
        let (survival, loss) = prepared.survival_and_loss(t);
        if survival > r {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= JUMP_TIME_RTOL * hi {
            return Some(0.5 * (lo + hi));
        }
        // d ln S/dt = −loss/S
        let newton = t + (survival.ln() - ln_r) * survival / loss;
        if newton.is_finite() && newton > lo && newton < hi {
            if (newton - t).abs() <= 0.5 * JUMP_TIME_RTOL * newton {
                return Some(newton);
            }
            t = newton;
        } else {
            t = 0.5 * (lo + hi);
        }
    }
}

/// Emission weights `rate_c·‖C_c ψ‖²` in channel order.
pub fn channel_weights(state: &CVector, channels: &[JumpChannel]) -> Vec<f64> {
    channels.iter().map(|ch| ch.weight(state)).collect()
}

/// Index of the channel selected by `u ∈ (0,1)` on the cumulative weights,
/// or `None` when every weight vanishes.
pub fn select_channel(state: &CVector, channels: &[JumpChannel], u: f64) -> Option<usize> {
    let weights = channel_weights(state, channels);
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = None;
    for (k, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        acc += w;
        last_nonzero = Some(k);
        if target < acc {
            return Some(k);
        }
    }
    last_nonzero
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` in an ensemble: `splitmix64(master ⊕ splitmix64(index))`.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// Seed of the detector-thinning stream attached to one trajectory.
pub fn thinning_seed(trajectory_seed: u64) -> u64 {
    splitmix64(trajectory_seed ^ 0xD1B5_4A32_D192_ED03)
}

pub fn rng_stream(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Model plus the shared, read-only machinery needed to unravel it.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub params: ModelParams,
    pub basis: BasisIndex,
    pub hamiltonian: Operator,
    pub channels: Vec<JumpChannel>,
    pub propagator: Propagator,
}

impl Simulator {
    pub fn new(params: ModelParams) -> Result<Simulator> {
        params.validate()?;
        let basis = build_basis(params.n_max);
        let hamiltonian = build_hamiltonian(&params, &basis);
        let propagator = Propagator::new(&hamiltonian);
        Ok(Simulator {
            channels: build_jump_operators(&params, &basis),
            params,
            basis,
            hamiltonian,
            propagator,
        })
    }

    /// Same model, stepped matrix-exponential propagation.
    pub fn with_stepped_propagator(params: ModelParams) -> Result<Simulator> {
        let mut sim = Simulator::new(params)?;
        sim.propagator = Propagator::stepped(&sim.hamiltonian);
        Ok(sim)
    }

    pub fn runner(&self, initial: InitialState, seed: u64) -> TrajectoryRunner<'_> {
        TrajectoryRunner::new(self, initial.vector(&self.basis), seed)
    }

    pub fn run_trajectory(
        &self,
        initial: InitialState,
        seed: u64,
        t_max: f64,
        snapshot_times: &[f64],
    ) -> TrajectoryRecord {
        let mut runner = self.runner(initial, seed);
        let mut snaps: Vec<f64> = snapshot_times.iter().copied().filter(|t| *t <= t_max).collect();
        snaps.sort_by(|a, b| a.total_cmp(b));
        let mut pending = snaps.into_iter().peekable();
        let mut snapshots = Vec::new();
        let mut events = Vec::new();

        loop {
            let next = runner.next_event(t_max);
            let until = next.map_or(t_max, |e| e.time);
            while let Some(&t) = pending.peek() {
                let before_jump = next.is_some() && t < until;
                if !(before_jump || (next.is_none() && t <= until)) {
                    break;
                }
                let t = t.max(runner.previous_time());
                snapshots.push(Snapshot {
                    time: t,
                    state: runner.normalized_state_before_jump(t),
                });
                pending.next();
            }
            match next {
                Some(event) => {
                    runner.commit();
                    events.push(event);
                }
                None => break,
            }
        }

        TrajectoryRecord {
            trajectory_id: 0,
            seed,
            initial: initial.label(),
            horizon: t_max,
            events,
            snapshots,
        }
    }

    /// Runs `n_traj` trajectories with seeds [`trajectory_seed`]`(master, i)`.
    /// The output is ordered by index and does not depend on `workers`
    /// (`0` means the rayon default).
    pub fn run_ensemble(
        &self,
        initial: InitialState,
        n_traj: usize,
        master_seed: u64,
        t_max: f64,
        snapshot_times: &[f64],
        workers: usize,
    ) -> Result<Vec<TrajectoryRecord>> {
        with_workers(workers, || {
            (0..n_traj)
                .into_par_iter()
                .map(|i| {
                    let mut rec =
                        self.run_trajectory(initial, trajectory_seed(master_seed, i as u64), t_max, snapshot_times);
                    rec.trajectory_id = i;
                    rec
                })
                .collect()
        })
    }
}

/// Runs `f` on a pool of `workers` threads (`0`: rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Step-by-step trajectory generator.
///
/// [`next_event`](Self::next_event) samples the next jump without applying
/// it, so callers can inspect the no-jump segment first;
/// [`commit`](Self::commit) then applies it.
pub struct TrajectoryRunner<'a> {
    sim: &'a Simulator,
    rng: ChaCha20Rng,
    time: f64,
    prepared: PreparedState<'a>,
    state: CVector,
    pending: Option<(JumpEvent, CVector)>,
}

impl<'a> TrajectoryRunner<'a> {
    pub fn new(sim: &'a Simulator, initial: CVector, seed: u64) -> Self {
        let norm = norm_sqr(&initial).sqrt();
        let state = initial * c(1.0 / norm);
        TrajectoryRunner {
            prepared: sim.propagator.prepare(&state),
            sim,
            rng: rng_stream(seed),
            time: 0.0,
            state,
            pending: None,
        }
    }

    /// Time of the last applied jump (0 at the start).
    pub fn previous_time(&self) -> f64 {
        self.time
    }

    /// Normalised state right after the last applied jump.
    pub fn state(&self) -> &CVector {
        &self.state
    }

    /// Normalised no-jump state at absolute time `t ≥ previous_time()`,
    /// ignoring any sampled-but-uncommitted jump.
    pub fn normalized_state_before_jump(&self, t: f64) -> CVector {
        let v = self.prepared.state_at(t - self.time);
        let n = norm_sqr(&v).sqrt();
        v * c(1.0 / n)
    }

    /// Samples the next jump before absolute time `horizon`. Returns `None`
    /// when no jump occurs in time. Calling it again before
    /// [`commit`](Self::commit) returns the same event.
    pub fn next_event(&mut self, horizon: f64) -> Option<JumpEvent> {
        if let Some((event, _)) = &self.pending {
            return Some(*event);
        }
        loop {
            let r: f64 = self.rng.sample(Open01);
            let rate = self.sim.propagator.decay_rate(&self.state);
            let dt = sample_prepared(&self.prepared, rate, r, horizon - self.time)?;
            let t = self.time + dt;
            let pre = self.normalized_state_before_jump(t);
            let u: f64 = self.rng.sample(Open01);
            match select_channel(&pre, &self.sim.channels, u) {
                Some(k) => {
                    let ch = &self.sim.channels[k];
                    let post = ch.operator.apply(&pre);
                    let post = &post * c(1.0 / norm_sqr(&post).sqrt());
                    let event = JumpEvent {
                        time: t,
                        channel: ch.channel,
                    };
                    self.pending = Some((event, post));
                    return Some(event);
                }
                None => {
                    log::debug!("no emission channel open at t = {t}; continuing without a jump");
                    self.reset_to(t, pre);
                }
            }
        }
    }

    /// Applies the jump returned by the last [`next_event`](Self::next_event).
    pub fn commit(&mut self) {
        if let Some((event, post)) = self.pending.take() {
            self.reset_to(event.time, post);
        }
    }

    fn reset_to(&mut self, t: f64, state: CVector) {
        self.time = t;
        self.prepared = self.sim.propagator.prepare(&state);
        self.state = state;
    }
}

/// Writes `trajectory_id,time,channel` rows, times with 15 significant digits.
pub fn write_events_csv<W: Write>(records: &[TrajectoryRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trajectory_id", "time", "channel"])?;
    for rec in records {
        for e in &rec.events {
            w.write_record([
                rec.trajectory_id.to_string(),
                format!("{:.14e}", e.time),
                e.channel.label().to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<events csv>", e))?;
    Ok(())
}

/// Parses the event CSV back into `(trajectory_id, event)` rows.
pub fn read_events_csv<R: std::io::Read>(input: R) -> Result<Vec<(usize, JumpEvent)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let bad = |what: &str| Error::config("events csv", format!("bad {what} in row {row:?}"));
        let id = row
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("trajectory_id"))?;
        let time = row.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("time"))?;
        let channel = row.get(2).and_then(Channel::from_label).ok_or_else(|| bad("channel"))?;
        out.push((id, JumpEvent { time, channel }));
    }
    Ok(out)
}

/// Ensemble average of `|ψ⟩⟨ψ|` at one snapshot index, with the standard
/// error of each diagonal element.
#[derive(Debug, Clone)]
pub struct EnsembleAverage {
    pub density: CMatrix,
    pub population_stderr: Vec<f64>,
    pub samples: usize,
}

pub fn ensemble_average(records: &[TrajectoryRecord], snapshot: usize) -> Result<EnsembleAverage> {
    let states: Vec<&CVector> = records
        .iter()
        .filter_map(|r| r.snapshots.get(snapshot).map(|s| &s.state))
        .collect();
    let n = states.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} snapshots at index {snapshot}")));
    }
    let d = states[0].len();
    let mut density = CMatrix::zeros(d, d);
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    for psi in &states {
        density += *psi * psi.adjoint();
        for (k, z) in psi.iter().enumerate() {
            let p = z.norm_sqr();
            sum[k] += p;
            sum_sq[k] += p * p;
        }
    }
    density /= c(n as f64);
    let nf = n as f64;
    let population_stderr = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, s2)| {
            let mean = s / nf;
            let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        })
        .collect();
    Ok(EnsembleAverage {
        density,
        population_stderr,
        samples: n,
    })
}
