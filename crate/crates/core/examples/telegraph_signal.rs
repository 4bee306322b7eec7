//! One long trajectory seen through a detector: binned counts drawn as a
//! bar chart, then light/dark period statistics over a small ensemble.

use cavity_jumps::effective::timescales;
use cavity_jumps::telegraph::{
    bin_counts, default_threshold, period_stats, segment_periods, thin_detections, ChannelMask,
};
use cavity_jumps::trajectory::thinning_seed;
use cavity_jumps::{InitialState, ModelParams, Simulator};

fn main() -> cavity_jumps::Result<()> {
    let params = ModelParams::default();
    let ts = timescales(&params)?;
    let sim = Simulator::new(params)?;
    let horizon = 20.0 * ts.t_dark;
    let eta = 0.5;

    let records = sim.run_ensemble(InitialState::Ground, 8, 3, horizon, &[], 0)?;
    let first = &records[0];
    let stream = thin_detections(
        0,
        &first.events,
        horizon,
        eta,
        thinning_seed(first.seed),
        ChannelMask::CAVITY,
    )?;
    for bin in bin_counts(&stream, 0.38 * ts.t_dark)? {
        println!(
            "{:>6.2} {:>3} {}",
            bin.bin_start / ts.t_dark,
            bin.count,
            "#".repeat(bin.count)
        );
    }

    let threshold = default_threshold(ts.t_cav, eta);
    let segmentations = records
        .iter()
        .map(|r| {
            let s = thin_detections(
                r.trajectory_id,
                &r.events,
                horizon,
                eta,
                thinning_seed(r.seed),
                ChannelMask::CAVITY,
            )?;
            segment_periods(&s, threshold)
        })
        .collect::<cavity_jumps::Result<Vec<_>>>()?;
    let stats = period_stats(&segmentations)?;
    if let (Some(dark), Some(light)) = (stats.dark, stats.light) {
        println!(
            "\n{} dark periods, mean {:.2} T_dark",
            dark.count,
            dark.mean / ts.t_dark
        );
        println!(
            "{} light periods, mean {:.2} T_light",
            light.count,
            light.mean / ts.t_light
        );
    }
    Ok(())
}
