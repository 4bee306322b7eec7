//! The bare product basis and the collective (symmetric/antisymmetric)
//! basis describe the same generator.

use cavity_jumps::model::{build_basis, collective_hamiltonian, structural_equivalence, PairState};
use cavity_jumps::ModelParams;

fn main() {
    let params = ModelParams::default();
    let r = structural_equivalence(&params);
    println!("unitarity of the transform       {:.2e}", r.unitarity);
    println!("Hamiltonian mismatch             {:.2e}", r.hamiltonian);
    println!("reset map mismatch               {:.2e}", r.reset);

    let basis = build_basis(params.n_max);
    let h = collective_hamiltonian(&params, &basis).matrix;
    let a01 = basis.collective_index(PairState::A01, 0);
    println!("\ncouplings of |a01,0> in the collective Hamiltonian:");
    for pair in PairState::ALL {
        for n in 0..=params.n_max {
            let z = h[(a01, basis.collective_index(pair, n))];
            if z.norm() > 0.0 {
                println!("  <a01,0|H|{},{n}> = {:+.4e}{:+.4e}i", pair.label(), z.re, z.im);
            }
        }
    }
}
