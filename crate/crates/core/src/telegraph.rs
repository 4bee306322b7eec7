//! Detector records: click thinning, binned counts, light/dark segmentation
//! and the no-click entanglement preparation protocol.

use std::io::Write;

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::timescales;
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::model::{BasisIndex, Channel, ProductState};
use crate::trajectory::{rng_stream, thinning_seed, trajectory_seed, with_workers, InitialState, JumpEvent, Simulator};

/// Which emission channels the detector sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMask {
    pub cavity: bool,
    pub atomic: bool,
}

impl Default for ChannelMask {
    fn default() -> Self {
        ChannelMask::CAVITY
    }
}

impl ChannelMask {
    pub const CAVITY: ChannelMask = ChannelMask {
        cavity: true,
        atomic: false,
    };
    pub const ALL: ChannelMask = ChannelMask {
        cavity: true,
        atomic: true,
    };

    pub fn contains(&self, channel: Channel) -> bool {
        if channel.is_atomic() {
            self.atomic
        } else {
            self.cavity
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter {
            name: "eta",
            message: format!("detector efficiency must lie in [0, 1], got {eta}"),
        });
    }
    Ok(())
}

/// Clicks registered by a detector of efficiency `eta` on one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionStream {
    pub trajectory_id: usize,
    pub eta: f64,
    pub seed: u64,
    pub mask: ChannelMask,
    pub horizon: f64,
    pub clicks: Vec<f64>,
}

/// Keeps each event on a masked channel independently with probability
/// `eta`. One uniform is drawn per masked event, in event order, from the
/// stream seeded by `seed`; an event is kept when the draw is below `eta`.
/// Streams with the same seed are therefore nested in `eta`.
pub fn thin_detections(
    trajectory_id: usize,
    events: &[JumpEvent],
    horizon: f64,
    eta: f64,
    seed: u64,
    mask: ChannelMask,
) -> Result<DetectionStream> {
    check_eta(eta)?;
    let mut rng = rng_stream(seed);
    let clicks = events
        .iter()
        .filter(|e| mask.contains(e.channel))
        .filter_map(|e| {
            let u: f64 = rng.sample(Open01);
            (u < eta).then_some(e.time)
        })
        .collect();
    Ok(DetectionStream {
        trajectory_id,
        eta,
        seed,
        mask,
        horizon,
        clicks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub bin_start: f64,
    pub count: usize,
}

/// Left-closed bins of width `bin_width` starting at 0 and covering the
/// horizon; the last bin may extend past it.
pub fn bin_counts(stream: &DetectionStream, bin_width: f64) -> Result<Vec<Bin>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "bin_width",
            message: format!("must be positive, got {bin_width}"),
        });
    }
    let n_bins = ((stream.horizon / bin_width).ceil() as usize).max(1);
    let mut counts = vec![0usize; n_bins];
    for &t in &stream.clicks {
        let k = ((t / bin_width).floor() as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| Bin {
            bin_start: k as f64 * bin_width,
            count,
        })
        .collect())
}

pub fn write_bins_csv<W: Write>(bins: &[Bin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_start", "count"])?;
    for b in bins {
        w.write_record([format!("{:.14e}", b.bin_start), b.count.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<telegraph csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodKind {
    Light,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub kind: PeriodKind,
    pub start: f64,
    pub end: f64,
    /// Clicks in `[start, end]`. Boundary clicks belong to the light side.
    pub clicks: usize,
}

impl Period {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSegmentation {
    pub threshold: f64,
    pub horizon: f64,
    pub periods: Vec<Period>,
    /// Gaps between consecutive clicks inside each light period, in order.
    #[serde(skip)]
    pub light_gaps: Vec<Vec<f64>>,
}

/// Default gap threshold `10·T_cav/η`.
pub fn default_threshold(t_cav: f64, eta: f64) -> f64 {
    10.0 * t_cav / eta
}

/// Splits `[0, horizon]` into light and dark periods. Every silence longer
/// than `threshold` (including the one before the first click and the one
/// after the last) is a dark period; the stretches in between are light.
pub fn segment_periods(stream: &DetectionStream, threshold: f64) -> Result<PeriodSegmentation> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gap_threshold",
            message: format!("must be positive, got {threshold}"),
        });
    }
    let h = stream.horizon;
    let clicks = &stream.clicks;
    let mut seg = PeriodSegmentation {
        threshold,
        horizon: h,
        periods: Vec::new(),
        light_gaps: Vec::new(),
    };
    if clicks.is_empty() {
        seg.periods.push(Period {
            kind: PeriodKind::Dark,
            start: 0.0,
            end: h,
            clicks: 0,
        });
        return Ok(seg);
    }

    // Boundaries 0, c_1, …, c_n, horizon; gap i runs from b[i] to b[i+1].
    let b: Vec<f64> = std::iter::once(0.0)
        .chain(clicks.iter().copied())
        .chain(std::iter::once(h))
        .collect();
    let last_gap = b.len() - 2;
    let mut light: Option<(f64, usize, Vec<f64>)> = None;
    for i in 0..=last_gap {
        let (from, to) = (b[i], b[i + 1]);
        let ends_on_click = i < last_gap;
        if to - from > threshold {
            match light.take() {
                Some(l) => seg.push_light(l, from),
                // A lone click between two silences is a zero-length light period.
                None if i > 0 => seg.push_light((from, 1, Vec::new()), from),
                None => {}
            }
            seg.periods.push(Period {
                kind: PeriodKind::Dark,
                start: from,
                end: to,
                clicks: 0,
            });
        } else {
            let l = light.get_or_insert((from, usize::from(i > 0), Vec::new()));
            if ends_on_click {
                l.1 += 1;
                if i > 0 {
                    l.2.push(to - from);
                }
            }
        }
    }
    if let Some(l) = light {
        seg.push_light(l, h);
    }
    Ok(seg)
}

impl PeriodSegmentation {
    fn push_light(&mut self, (start, clicks, gaps): (f64, usize, Vec<f64>), end: f64) {
        self.periods.push(Period {
            kind: PeriodKind::Light,
            start,
            end,
            clicks,
        });
        self.light_gaps.push(gaps);
    }
}

/// Sample moments of a set of durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

impl DurationStats {
    pub fn from_samples(xs: &[f64]) -> Option<DurationStats> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let variance = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };
        Some(DurationStats {
            count: n,
            mean,
            variance,
            stderr: (variance / nf).sqrt(),
        })
    }
}

/// Statistics over the interior periods of one or more segmentations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodStats {
    pub light: Option<DurationStats>,
    pub dark: Option<DurationStats>,
    /// Spacing of consecutive clicks inside interior light periods.
    pub click_spacing: Option<DurationStats>,
}

/// Discards the first and last period of every segmentation (they are cut
/// by the record boundaries) and pools the rest.
pub fn period_stats(segmentations: &[PeriodSegmentation]) -> Result<PeriodStats> {
    let mut light = Vec::new();
    let mut dark = Vec::new();
    let mut spacing = Vec::new();
    for seg in segmentations {
        let n = seg.periods.len();
        if n < 3 {
            continue;
        }
        let mut light_idx = usize::from(seg.periods[0].kind == PeriodKind::Light);
        for p in &seg.periods[1..n - 1] {
            match p.kind {
                PeriodKind::Light => {
                    light.push(p.duration());
                    spacing.extend_from_slice(&seg.light_gaps[light_idx]);
                    light_idx += 1;
                }
                PeriodKind::Dark => dark.push(p.duration()),
            }
        }
    }
    if light.is_empty() && dark.is_empty() {
        return Err(Error::InsufficientData(
            "no complete interior light or dark period".into(),
        ));
    }
    Ok(PeriodStats {
        light: DurationStats::from_samples(&light),
        dark: DurationStats::from_samples(&dark),
        click_spacing: DurationStats::from_samples(&spacing),
    })
}

/// Overlap of a bare-basis state with `|a01⟩`, summed over photon number.
pub fn singlet_fidelity(basis: &BasisIndex, psi: &CVector) -> f64 {
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..=basis.n_max())
        .map(|n| {
            let a = psi[basis.index(ProductState::new(0, 1, n))];
            let b = psi[basis.index(ProductState::new(1, 0, n))];
            ((a - b) * s).norm_sqr()
        })
        .sum::<f64>()
        / norm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub eta: f64,
    pub t_wait_tdark: f64,
    pub fidelity: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub n_dropped: usize,
    /// Mean success time `τ` in `1/g`.
    pub mean_prep_time: f64,
    pub mean_prep_time_tdark: f64,
}

/// Settings of a fidelity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityScan {
    pub etas: Vec<f64>,
    /// Wait windows in units of `T_dark`.
    pub t_waits: Vec<f64>,
    pub n_traj: usize,
    pub master_seed: u64,
    /// Trajectory length in `1/g`.
    pub horizon: f64,
    pub mask: ChannelMask,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    tau: f64,
    fidelity: f64,
}

/// Runs the no-click protocol for every `(η, t_wait)` pair.
///
/// Each trajectory starts in `|00,0⟩`. For a given pair, success is the
/// first instant `τ` at which the thinned record has been silent for
/// `t_wait` (the window may open at 0); the sample is the `|a01⟩` overlap of
/// the true, unthinned state at `τ`. Trajectories that reach the horizon
/// first are dropped. One trajectory serves every pair: the thinning draws
/// are those of [`thin_detections`] with [`thinning_seed`], so the clicks
/// seen at each `η` are exactly that function's output.
///
/// Points are returned `eta`-major. More than half the trajectories dropped
/// at any point is an error.
pub fn fidelity_scan(sim: &Simulator, scan: &FidelityScan) -> Result<Vec<FidelityPoint>> {
    for &eta in &scan.etas {
        check_eta(eta)?;
        if eta == 0.0 {
            return Err(Error::InvalidParameter {
                name: "eta",
                message: "the protocol needs a detector with eta > 0".into(),
            });
        }
    }
    for &t in &scan.t_waits {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_wait",
                message: format!("must be finite and non-negative, got {t}"),
            });
        }
    }
    if scan.n_traj == 0 {
        return Err(Error::InsufficientData("n_traj = 0".into()));
    }
    let t_dark = timescales(&sim.params)?.t_dark;
    let windows: Vec<f64> = scan.t_waits.iter().map(|t| t * t_dark).collect();

    let outcomes: Vec<Vec<Option<Outcome>>> = with_workers(scan.workers, || {
        (0..scan.n_traj)
            .into_par_iter()
            .map(|i| protocol_trajectory(sim, scan, &windows, trajectory_seed(scan.master_seed, i as u64)))
            .collect()
    })?;

    let mut points = Vec::with_capacity(scan.etas.len() * windows.len());
    for (ei, &eta) in scan.etas.iter().enumerate() {
        for (wi, &tw) in scan.t_waits.iter().enumerate() {
            let k = ei * windows.len() + wi;
            let hits: Vec<Outcome> = outcomes.iter().filter_map(|o| o[k]).collect();
            let dropped = scan.n_traj - hits.len();
            if 2 * dropped > scan.n_traj {
                return Err(Error::HorizonTooShort {
                    dropped,
                    total: scan.n_traj,
                });
            }
            let f: Vec<f64> = hits.iter().map(|o| o.fidelity).collect();
            let stats = DurationStats::from_samples(&f)
                .ok_or_else(|| Error::InsufficientData(format!("no successful sample at eta={eta}, t={tw}")))?;
            let mean_tau = hits.iter().map(|o| o.tau).sum::<f64>() / hits.len() as f64;
            points.push(FidelityPoint {
                eta,
                t_wait_tdark: tw,
                fidelity: stats.mean,
                stderr: stats.stderr,
                n_samples: hits.len(),
                n_dropped: dropped,
                mean_prep_time: mean_tau,
                mean_prep_time_tdark: mean_tau / t_dark,
            });
        }
    }
    Ok(points)
}

/// Single-point form of [`fidelity_scan`].
#[allow(clippy::too_many_arguments)]
pub fn fidelity_protocol(
    sim: &Simulator,
    eta: f64,
    t_wait_tdark: f64,
    n_traj: usize,
    master_seed: u64,
    horizon: f64,
    mask: ChannelMask,
    workers: usize,
) -> Result<FidelityPoint> {
    let scan = FidelityScan {
        etas: vec![eta],
        t_waits: vec![t_wait_tdark],
        n_traj,
        master_seed,
        horizon,
        mask,
        workers,
    };
    Ok(fidelity_scan(sim, &scan)?.remove(0))
}

fn protocol_trajectory(sim: &Simulator, scan: &FidelityScan, windows: &[f64], seed: u64) -> Vec<Option<Outcome>> {
    let n_w = windows.len();
    let mut out: Vec<Option<Outcome>> = vec![None; scan.etas.len() * n_w];
    let mut open = out.len();
    let mut last_click = vec![0.0; scan.etas.len()];
    let mut thin = rng_stream(thinning_seed(seed));
    let mut runner = sim.runner(InitialState::Ground, seed);

    while open > 0 {
        let event = runner.next_event(scan.horizon);
        let until = event.map_or(scan.horizon, |e| e.time);
        for (ei, &last) in last_click.iter().enumerate() {
            for (wi, &w) in windows.iter().enumerate() {
                let k = ei * n_w + wi;
                if out[k].is_none() && last + w <= until {
                    let tau = last + w;
                    let psi = runner.normalized_state_before_jump(tau);
                    out[k] = Some(Outcome {
                        tau,
                        fidelity: singlet_fidelity(&sim.basis, &psi),
                    });
                    open -= 1;
                }
            }
        }
        let Some(event) = event else { break };
        runner.commit();
        if scan.mask.contains(event.channel) {
            let u: f64 = thin.sample(Open01);
            for (ei, &eta) in scan.etas.iter().enumerate() {
                if u < eta {
                    last_click[ei] = event.time;
                }
            }
        }
    }
    out
}

pub fn write_fidelity_csv<W: Write>(points: &[FidelityPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta", "t_over_Tdark", "F", "stderr", "n_samples", "mean_prep_time"])?;
    for p in points {
        w.write_record([
            p.eta.to_string(),
            p.t_wait_tdark.to_string(),
            format!("{:.10}", p.fidelity),
            format!("{:.3e}", p.stderr),
            p.n_samples.to_string(),
            format!("{:.6e}", p.mean_prep_time),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<fidelity csv>", e))?;
    Ok(())
}
