//! The three-level light-manifold ladder: steady state from the Liouvillian
//! null space against the closed-form populations.

use cavity_jumps::effective::{build_effective_model, steady_populations};
use cavity_jumps::lindblad::{steady_state, Liouvillian};
use cavity_jumps::ModelParams;

fn main() -> cavity_jumps::Result<()> {
    println!(
        "{:>8} {:>9} {:>10} {:>10} {:>10} {:>10}",
        "omega_m", "x", "P00", "Ps01", "P11", "closed P11"
    );
    for omega_m in [0.01, 0.03, 0.1, 0.3] {
        let params = ModelParams {
            omega_m,
            ..ModelParams::default()
        };
        let model = build_effective_model(&params)?.light_manifold();
        let rho = steady_state(&Liouvillian::new(&model.hamiltonian, &model.channels))?;
        let closed = steady_populations(model.params.x);
        println!(
            "{omega_m:>8} {:>9.4} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            model.params.x,
            rho.population(0),
            rho.population(1),
            rho.population(2),
            closed.p11
        );
    }
    Ok(())
}
