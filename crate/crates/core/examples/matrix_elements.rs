//! Driving matrix elements between the two extreme half-filled eigenstates.

use krawchain::driving::drive_matrix_element;
use krawchain::hamiltonians::DriveSign;
use krawchain::krawtchouk::{build_basis, c2, conjugate_phase, largest_sector_element, m1_closed_form, m2_asymptotic_probe, m2_closed_form, m2_pair_bruteforce};
use krawchain::linalg::{paulis, tensor_embed};

fn main() -> krawchain::Result<()> {
    let m1 = m1_closed_form(2)?;
    println!("M1(n=2) = {} (minor product {})", m1.closed, m1.minor_product);

    for n in [3usize, 5, 7] {
        let d = n.div_ceil(2);
        for j in 0..=n - d {
            let closed = m2_closed_form(n, j)?;
            let (brute, conj) = m2_pair_bruteforce(n, j)?;
            println!("M2(n={n}, j={j}, d={d}) = {:+.12}  brute {:+.12}  conjugate {:+.12}", closed.value, brute, conj);
        }
        println!("  conjugate phase (-1)^(N/2) = {}", conjugate_phase(n + 1)?);
    }

    let m = drive_matrix_element(6, &[1], DriveSign::Minus)?;
    println!("N=6 drive amplitude A/J_D = |m|/2 = {}", m.norm() / 2.0);

    // sigma^-_1 sigma^+_4 in the 3-particle sector of N = 6
    let basis = build_basis(5, 1.0)?;
    let op = tensor_embed(&paulis::sigma_minus().kron(&paulis::sigma_plus()), &[1, 4], 6)?;
    println!("largest 3-particle element: {}", largest_sector_element(&basis, &op, 3)?);

    println!("asymptotics, c2 = {:.8}", c2());
    for row in m2_asymptotic_probe(&[5, 9, 13, 17, 21, 25, 29])? {
        println!("  n={:>2} j={} M2={:+.6e} M2/c2^(n^2)={:.6e} ratio={:?}", row.n, row.j, row.m2, row.scaled, row.ratio);
    }
    Ok(())
}
