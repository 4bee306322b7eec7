//! Heralded singlet preparation: wait for a click-free window and read the
//! overlap of the conditional state with |a01>.

use cavity_jumps::effective::timescales;
use cavity_jumps::telegraph::{fidelity_scan, write_fidelity_csv, ChannelMask, FidelityScan};
use cavity_jumps::{ModelParams, Simulator};

fn main() -> cavity_jumps::Result<()> {
    let params = ModelParams::default();
    let ts = timescales(&params)?;
    let sim = Simulator::new(params)?;
    let scan = FidelityScan {
        etas: vec![0.2, 0.5, 1.0],
        t_waits: vec![0.1, 0.3, 0.5, 0.7, 1.0],
        n_traj: 300,
        master_seed: 11,
        horizon: 40.0 * ts.t_dark,
        mask: ChannelMask::CAVITY,
        workers: 0,
    };
    let points = fidelity_scan(&sim, &scan)?;
    write_fidelity_csv(&points, std::io::stdout())
}
