//! Controlled gates built from iSWAP_N, and the basis-state walk through the
//! controlled-iSWAP_2 circuit.

use krawchain::circuits::{basis_walk, ctrl_iswap2_circuit, verify_ctrl_iswap2_circuit, verify_ctrl_x_circuit, DriveSource};

fn main() -> krawchain::Result<()> {
    for n in [4, 6] {
        let x = verify_ctrl_x_circuit(n, DriveSource::Ideal)?;
        let s = verify_ctrl_iswap2_circuit(n, DriveSource::Ideal)?;
        println!("N={n}: ctrl-X deviation {:.1e} (ancilla leak {:.1e}), ctrl-iSWAP2 deviation {:.1e} with {} iSWAP2 gates", x.deviation, x.ancilla_leakage, s.deviation, s.iswap2_gates);
    }

    let circuit = ctrl_iswap2_circuit(6, DriveSource::Ideal)?;
    for input in ["111101", "111110", "011101"] {
        let walk = basis_walk(&circuit, input)?;
        println!("|{input}>");
        for (gate, state) in &walk.steps {
            println!("  {gate:<14} {state}");
        }
    }

    let sim = verify_ctrl_iswap2_circuit(4, DriveSource::Simulated { m: 2 })?;
    println!("N=4 with simulated drive (M=2): deviation {:.3e}", sim.deviation);
    Ok(())
}
