//! Single-particle spectrum and Krawtchouk basis of a clean and a noisy chain.
//!
//! cargo run --example spectrum -- 8

use krawchain::cli::single_particle_spectrum;
use krawchain::hamiltonians::{apply_coupling_noise, hopping_matrix, ChainSpec};
use krawchain::krawtchouk::build_basis;

fn main() -> krawchain::Result<()> {
    let n_qubits: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    let clean = ChainSpec::krawtchouk(n_qubits, 1.0)?;
    println!("couplings J_x = {:?}", clean.couplings);

    let noisy = apply_coupling_noise(&clean.clone().with_noise(0.01, 42))?;
    let a = single_particle_spectrum(&clean)?;
    let b = single_particle_spectrum(&noisy)?;
    println!("{:>3} {:>12} {:>12}", "k", "clean", "eps=0.01");
    for (k, (x, y)) in a.iter().zip(&b).enumerate() {
        println!("{k:>3} {x:>12.8} {y:>12.8}");
    }

    let basis = build_basis(clean.n(), 1.0)?;
    println!("orthogonality residual   {:.2e}", basis.orthogonality_residual());
    println!("diagonalization residual {:.2e}", basis.diagonalization_residual(&hopping_matrix(&clean.couplings)));
    Ok(())
}
