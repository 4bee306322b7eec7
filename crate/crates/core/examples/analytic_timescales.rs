//! Closed-form rates and timescales, and how the dark/cavity ratio depends
//! on the microwave drive.

use cavity_jumps::effective::{analytic_summary, timescales};
use cavity_jumps::experiment::analytic_table;
use cavity_jumps::ModelParams;

fn main() -> cavity_jumps::Result<()> {
    let params = ModelParams::default();
    let summary = analytic_summary(&params)?;
    print!("{}", analytic_table(&summary));

    println!(
        "\n{:>8} {:>10} {:>12} {:>12} {:>10}",
        "omega_m", "x", "T_cav", "T_light", "T_dark/T_cav"
    );
    for omega_m in [0.02, 0.05, 0.1, 0.2, 0.5, 1.0] {
        let p = ModelParams { omega_m, ..params };
        let ts = timescales(&p)?;
        let x = analytic_summary(&p)?.effective.x;
        println!(
            "{omega_m:>8} {x:>10.4} {:>12.1} {:>12.4e} {:>10.2}",
            ts.t_cav, ts.t_light, ts.ratio_dark_cav
        );
    }
    println!("upper limit of T_dark/T_cav: {:.2}", timescales(&params)?.ratio_max);
    Ok(())
}
