//! Averages a trajectory ensemble and compares it with the density matrix
//! integrated from the master equation.

use cavity_jumps::linalg::trace_distance;
use cavity_jumps::lindblad::{evolve_density_at, DensityMatrix, EvolveOptions, Liouvillian};
use cavity_jumps::model::ProductState;
use cavity_jumps::trajectory::ensemble_average;
use cavity_jumps::{InitialState, ModelParams, Simulator};

fn main() -> cavity_jumps::Result<()> {
    let sim = Simulator::new(ModelParams::default())?;
    let times = [5.0, 20.0, 50.0, 100.0];
    let n_traj = 500;
    let records = sim.run_ensemble(InitialState::Ground, n_traj, 1, 100.0, &times, 0)?;

    let l = Liouvillian::new(&sim.hamiltonian, &sim.channels);
    let rho0 = DensityMatrix::pure(&InitialState::Ground.vector(&sim.basis));
    let (exact, _) = evolve_density_at(&rho0, &times, &l, EvolveOptions::default())?;

    let k00 = sim.basis.index(ProductState::new(0, 0, 0));
    let k11 = sim.basis.index(ProductState::new(1, 1, 0));
    println!("{n_traj} trajectories");
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "t", "P00 traj", "P00 ME", "P11 traj", "P11 ME", "distance"
    );
    for (k, t) in times.iter().enumerate() {
        let avg = ensemble_average(&records, k)?;
        let rho = &exact[k];
        println!(
            "{t:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            avg.density[(k00, k00)].re,
            rho.population(k00),
            avg.density[(k11, k11)].re,
            rho.population(k11),
            trace_distance(&avg.density, rho.matrix())
        );
    }
    Ok(())
}
