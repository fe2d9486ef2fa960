use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::{propagate_unitary, DriveTerm, PropagationOptions, PulseSchedule};
use crate::error::{Error, Result};
use crate::linalg::{paulis, BlockOperator, Operator, Partition};

#[derive(Clone, Debug, Serialize)]
pub struct TwoLevelError {
    /// `1 - |cos((pi/4A) sqrt(Delta^2 + 4A^2))|`.
    pub measured: f64,
    /// `(pi^2/8) (A/Delta)^2`.
    pub predicted: f64,
    /// Whether `tau (E2 - E1)/2pi` and `tau Delta/2pi` are integers for `tau = pi/2A`.
    pub integer_conditions: bool,
}

/// Off-resonant error of a `tau = pi/(2A)` pulse on `[[E1, A e^{iwt}], [A e^{-iwt}, E2]]`.
pub fn two_level_error(a: f64, delta: f64, gap: f64) -> Result<TwoLevelError> {
    if !(a > 0.0 && delta > 0.0) {
        return Err(Error::invalid(format!("need A > 0 and Delta > 0, got A = {a}, Delta = {delta}")));
    }
    let tau = PI / (2.0 * a);
    let is_int = |v: f64| (v - v.round()).abs() < 1e-9;
    Ok(TwoLevelError {
        measured: 1.0 - ((PI / (4.0 * a)) * (delta * delta + 4.0 * a * a).sqrt()).cos().abs(),
        predicted: PI * PI / 8.0 * (a / delta).powi(2),
        integer_conditions: is_int(tau * gap / (2.0 * PI)) && is_int(tau * delta / (2.0 * PI)),
    })
}

/// Propagator of the two-level drive over `[0, duration]`.
pub fn simulate_two_level(e1: f64, e2: f64, a: f64, omega: f64, duration: f64, opts: &PropagationOptions) -> Result<Operator> {
    let p = Arc::new(Partition::trivial(2));
    let h0 = BlockOperator::from_dense(&Operator::real_diagonal(&[e1, e2]), Arc::clone(&p))?;
    // A e^{iwt} |1><2| + h.c. = A cos(wt) X + A cos(wt + pi/2) Y
    let x = BlockOperator::from_dense(&paulis::x().scale_real(a), Arc::clone(&p))?;
    let y = BlockOperator::from_dense(&paulis::y().scale_real(a), Arc::clone(&p))?;
    let mut s = PulseSchedule::new(p, 0.0);
    s.push_driven(
        &h0,
        vec![DriveTerm { operator: x, omega, phase: 0.0 }, DriveTerm { operator: y, omega, phase: PI / 2.0 }],
        duration,
    )?;
    Ok(propagate_unitary(&s, opts)?.0.to_dense())
}
