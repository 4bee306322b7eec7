//! Runs one configured experiment and writes its artifacts.
//!
//! Every run writes `config.toml`, the resolved configuration including the
//! master seed, next to its results:
//!
//! | kind        | files                                         |
//! |-------------|-----------------------------------------------|
//! | `analytic`  | `analytic.json`                               |
//! | `validate`  | `validate.json`                               |
//! | `simulate`  | `events.csv`, `simulate.json`                 |
//! | `telegraph` | `telegraph_eta{η}.csv` per η, `periods.json`  |
//! | `fidelity`  | `fidelity.csv`, `fidelity.json`               |
//!
//! JSON files give times both in `1/g` and in units of `T_dark`.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ExperimentKind, RunConfig};
use crate::effective::{analytic_summary, timescales, AnalyticSummary, TimescaleSummary};
use crate::error::{Error, Result};
use crate::model::{validate_regime, Channel, RegimeReport};
use crate::telegraph::{
    bin_counts, default_threshold, fidelity_scan, period_stats, segment_periods, thin_detections, write_bins_csv,
    write_fidelity_csv, ChannelMask, FidelityPoint, FidelityScan, PeriodStats,
};
use crate::trajectory::{thinning_seed, write_events_csv, Simulator};
use crate::validate::{run_validation, ValidationReport};

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub kind: ExperimentKind,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Human-readable summary for the terminal.
    pub summary: String,
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Artifacts> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }
}

pub fn run_experiment(config: &RunConfig) -> Result<RunOutcome> {
    config.check()?;
    let mut art = Artifacts::new(&config.run.out)?;
    art.text("config.toml", &config.to_toml()?)?;
    let summary = match config.kind {
        ExperimentKind::Analytic => analytic(config, &mut art)?,
        ExperimentKind::Validate => validate(config, &mut art)?,
        ExperimentKind::Simulate => simulate(config, &mut art)?,
        ExperimentKind::Telegraph => telegraph(config, &mut art)?,
        ExperimentKind::Fidelity => fidelity(config, &mut art)?,
    };
    Ok(RunOutcome {
        kind: config.kind,
        out_dir: art.dir,
        files: art.files,
        summary,
    })
}

#[derive(Serialize)]
struct AnalyticOutput {
    #[serde(flatten)]
    summary: AnalyticSummary,
    t_cav_tdark: f64,
    t_light_tdark: f64,
    regime: RegimeReport,
}

/// Two-column `name value` table.
pub fn analytic_table(summary: &AnalyticSummary) -> String {
    let mut s = String::new();
    for (name, value) in summary.rows() {
        let _ = writeln!(s, "{name:<20} {value:>16.8e}");
    }
    s
}

fn analytic(config: &RunConfig, art: &mut Artifacts) -> Result<String> {
    let summary = analytic_summary(&config.model)?;
    let t = summary.timescales;
    art.json(
        "analytic.json",
        &AnalyticOutput {
            summary,
            t_cav_tdark: t.t_cav / t.t_dark,
            t_light_tdark: t.t_light / t.t_dark,
            regime: validate_regime(&config.model),
        },
    )?;
    Ok(analytic_table(&summary))
}

fn validate(config: &RunConfig, art: &mut Artifacts) -> Result<String> {
    let report: ValidationReport = run_validation(&config.model)?;
    art.json("validate.json", &report)?;
    let mut s = String::new();
    for c in &report.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        let _ = writeln!(s, "{mark} {:<48} {:.3e} (tol {:.0e})", c.name, c.value, c.tolerance);
    }
    for w in report.regime.warnings() {
        let _ = writeln!(s, "regime: {} is {:?} (ratio {:.3})", w.name, w.status, w.ratio);
    }
    let failed = report.failures().count();
    if failed > 0 {
        eprint!("{s}");
        return Err(Error::Numerical(format!("{failed} validation checks failed")));
    }
    Ok(s)
}

fn mask(config: &RunConfig) -> ChannelMask {
    if config.run.detect_atomic {
        ChannelMask::ALL
    } else {
        ChannelMask::CAVITY
    }
}

/// `T_dark` when it is defined, else 1 so that horizons read in `1/g`.
fn time_unit(config: &RunConfig) -> (Option<TimescaleSummary>, f64) {
    match timescales(&config.model) {
        Ok(t) => (Some(t), t.t_dark),
        Err(e) => {
            log::warn!("timescales undefined ({e}); horizon_tdark is read in units of 1/g");
            (None, 1.0)
        }
    }
}

#[derive(Serialize)]
struct SimulateOutput {
    n_traj: usize,
    seed: u64,
    initial: String,
    horizon: f64,
    horizon_tdark: f64,
    events_per_channel: Vec<(String, usize)>,
}

fn simulate(config: &RunConfig, art: &mut Artifacts) -> Result<String> {
    let (_, t_dark) = time_unit(config);
    let horizon = config.run.horizon_tdark * t_dark;
    let sim = Simulator::new(config.model)?;
    let records = sim.run_ensemble(
        config.run.initial,
        config.run.n_traj,
        config.run.seed,
        horizon,
        &[],
        config.run.workers,
    )?;
    write_events_csv(&records, art.create("events.csv")?)?;
    let counts: Vec<(String, usize)> = Channel::ALL
        .iter()
        .map(|&ch| {
            let n = records.iter().map(|r| r.events_on(ch).count()).sum();
            (ch.label().to_string(), n)
        })
        .collect();
    art.json(
        "simulate.json",
        &SimulateOutput {
            n_traj: config.run.n_traj,
            seed: config.run.seed,
            initial: config.run.initial.label(),
            horizon,
            horizon_tdark: horizon / t_dark,
            events_per_channel: counts.clone(),
        },
    )?;
    let mut s = format!("{} trajectories to t = {horizon:.6e}\n", config.run.n_traj);
    for (label, n) in counts {
        let _ = writeln!(s, "{label:<10} {n}");
    }
    Ok(s)
}

#[derive(Serialize)]
struct TelegraphEta {
    eta: f64,
    threshold: f64,
    threshold_tdark: f64,
    bins_file: String,
    stats: PeriodStats,
    dark_mean_tdark: Option<f64>,
    light_mean_tdark: Option<f64>,
    click_spacing_tcav: Option<f64>,
    dark_over_spacing: Option<f64>,
}

#[derive(Serialize)]
struct TelegraphOutput {
    n_traj: usize,
    seed: u64,
    horizon: f64,
    horizon_tdark: f64,
    bin_width: f64,
    bin_width_tdark: f64,
    predicted: TimescaleSummary,
    detectors: Vec<TelegraphEta>,
}

fn telegraph(config: &RunConfig, art: &mut Artifacts) -> Result<String> {
    let ts = timescales(&config.model)?;
    let horizon = config.run.horizon_tdark * ts.t_dark;
    let bin_width = config.run.bin_width_tdark * ts.t_dark;
    let sim = Simulator::new(config.model)?;
    let records = sim.run_ensemble(
        crate::trajectory::InitialState::Ground,
        config.run.n_traj,
        config.run.seed,
        horizon,
        &[],
        config.run.workers,
    )?;
    let mask = mask(config);
    let mut detectors = Vec::new();
    let mut s = String::new();
    for &eta in &config.run.eta {
        let threshold = config
            .run
            .gap_threshold
            .unwrap_or_else(|| default_threshold(ts.t_cav, eta));
        let mut segs = Vec::with_capacity(records.len());
        for (k, rec) in records.iter().enumerate() {
            let stream = thin_detections(
                rec.trajectory_id,
                &rec.events,
                horizon,
                eta,
                thinning_seed(rec.seed),
                mask,
            )?;
            if k == 0 {
                let name = format!("telegraph_eta{eta}.csv");
                write_bins_csv(&bin_counts(&stream, bin_width)?, art.create(&name)?)?;
            }
            segs.push(segment_periods(&stream, threshold)?);
        }
        let stats = period_stats(&segs)?;
        let dark = stats.dark.map(|d| d.mean);
        let spacing = stats.click_spacing.map(|d| d.mean);
        let entry = TelegraphEta {
            eta,
            threshold,
            threshold_tdark: threshold / ts.t_dark,
            bins_file: format!("telegraph_eta{eta}.csv"),
            stats,
            dark_mean_tdark: dark.map(|d| d / ts.t_dark),
            light_mean_tdark: stats.light.map(|d| d.mean / ts.t_dark),
            click_spacing_tcav: spacing.map(|x| x / ts.t_cav),
            dark_over_spacing: dark.zip(spacing).map(|(d, x)| d / x),
        };
        let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            s,
            "eta {eta}: dark {} T_dark ({} periods), light {} T_dark, click spacing {} T_cav, dark/spacing {}",
            fmt(entry.dark_mean_tdark),
            stats.dark.map_or(0, |d| d.count),
            fmt(entry.light_mean_tdark),
            fmt(entry.click_spacing_tcav),
            fmt(entry.dark_over_spacing),
        );
        detectors.push(entry);
    }
    art.json(
        "periods.json",
        &TelegraphOutput {
            n_traj: config.run.n_traj,
            seed: config.run.seed,
            horizon,
            horizon_tdark: config.run.horizon_tdark,
            bin_width,
            bin_width_tdark: config.run.bin_width_tdark,
            predicted: ts,
            detectors,
        },
    )?;
    Ok(s)
}

#[derive(Serialize)]
struct FidelityOutput {
    n_traj: usize,
    seed: u64,
    horizon: f64,
    horizon_tdark: f64,
    t_dark: f64,
    points: Vec<FidelityPoint>,
}

fn fidelity(config: &RunConfig, art: &mut Artifacts) -> Result<String> {
    let ts = timescales(&config.model)?;
    let horizon = config.run.horizon_tdark * ts.t_dark;
    let sim = Simulator::new(config.model)?;
    let points = fidelity_scan(
        &sim,
        &FidelityScan {
            etas: config.run.eta.clone(),
            t_waits: config.run.t_wait.clone(),
            n_traj: config.run.n_traj,
            master_seed: config.run.seed,
            horizon,
            mask: mask(config),
            workers: config.run.workers,
        },
    )?;
    write_fidelity_csv(&points, art.create("fidelity.csv")?)?;
    art.json(
        "fidelity.json",
        &FidelityOutput {
            n_traj: config.run.n_traj,
            seed: config.run.seed,
            horizon,
            horizon_tdark: config.run.horizon_tdark,
            t_dark: ts.t_dark,
            points: points.clone(),
        },
    )?;
    let mut s = String::new();
    for p in &points {
        let _ = writeln!(
            s,
            "eta {:<4} t {:<5} F = {:.4} ± {:.4}  ({} samples, {} dropped, mean prep {:.2} T_dark)",
            p.eta, p.t_wait_tdark, p.fidelity, p.stderr, p.n_samples, p.n_dropped, p.mean_prep_time_tdark
        );
    }
    Ok(s)
}
