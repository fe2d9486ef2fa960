//! Perfect state transfer and the GHZ pulse.

use krawchain::experiments::{ghz_demo, ghz_fidelity, pst_demo, pst_mirror_overlap};
use krawchain::hamiltonians::ChainSpec;

fn main() -> krawchain::Result<()> {
    for n in 2..=7 {
        let r = pst_demo(n)?;
        println!("PST N={n}: max infidelity {:.1e}", r.max_infidelity);
    }
    println!("|1100> mirror overlap {}", pst_mirror_overlap("1100")?);

    for n in [3, 5, 7] {
        let g = ghz_demo(n)?;
        println!("GHZ N={n}: fidelity {:.15}, overlap {:?}", g.fidelity, g.overlap);
    }
    let mut spec = ChainSpec::krawtchouk(3, 1.0)?;
    spec.couplings[0] *= 1.05;
    println!("GHZ N=3 with one coupling +5%: fidelity {:.6}", ghz_fidelity(&spec)?.fidelity);
    Ok(())
}
