//! Both eigengate constructions: mapping onto eigenstates, phases, intertwining.

use krawchain::eigengate::{build_eigengate, compare_forms, map_basis_state, so3_checks, EigengateVariant};
use krawchain::hamiltonians::ChainSpec;
use krawchain::krawtchouk::{build_basis, eigenstate_vector, ModeSet};

fn main() -> krawchain::Result<()> {
    for n in [2, 4, 6, 8] {
        let cmp = compare_forms(n, 1.0)?;
        for v in &cmp.variants {
            println!(
                "N={n} {:<12} min overlap {:.15} phase err {:.1e} intertwining {:.1e}",
                v.variant.name(),
                v.min_overlap,
                v.max_phase_error,
                v.intertwining
            );
        }
        println!("      forms differ by {:.1e}, so(3) residual {:.1e}", cmp.max_entry_difference, so3_checks(n, 1.0)?.max_residual());
    }

    let form = build_eigengate(&ChainSpec::krawtchouk(4, 1.0)?, EigengateVariant::ThreeStep)?;
    let out = map_basis_state(&form, "1010")?;
    let target = eigenstate_vector(&build_basis(3, 1.0)?, &ModeSet::from_bits("1010")?)?;
    println!("U_K|1010> = {} |1010>_HK", target.inner(&out)?);
    Ok(())
}
