//! Off-resonant error of a pi pulse on a driven two-level system.

use std::f64::consts::PI;

use krawchain::driving::{simulate_two_level, two_level_error, PropagationOptions};

fn main() -> krawchain::Result<()> {
    // A = Delta/(4k) keeps tau Delta/2pi = k and tau gap/2pi integer
    for k in [2, 4, 5, 10, 25, 50] {
        let a = 1.0 / (4.0 * k as f64);
        let e = two_level_error(a, 1.0, 1.0)?;
        println!("A/Delta={a:<7} error {:.4e} leading order {:.4e} integer {}", e.measured, e.predicted, e.integer_conditions);
    }
    let off = two_level_error(0.1, 1.0, 1.0)?;
    println!("A/Delta=0.1     error {:.4e} (integer conditions {})", off.measured, off.integer_conditions);
    let (a, gap, delta) = (0.05, 1.0, 0.2);
    let u = simulate_two_level(0.0, gap, a, gap + delta, PI / (2.0 * a), &PropagationOptions::default())?;
    println!(
        "simulated {:.10} closed form {:.10}",
        1.0 - u.trace().norm() / 2.0,
        two_level_error(a, delta, gap)?.measured
    );
    Ok(())
}
