//! Time-dependent propagation and the resonant driving protocols.
//!
//! A [`PulseSchedule`] is a sequence of static segments, driven segments and
//! instantaneous gate layers, all stored per excitation sector. Driven
//! segments carry `H(t) = H_0 + sum_d cos(omega_d t + phase_d) V_d` with `t`
//! the absolute schedule time, and are integrated either by the exponential
//! midpoint rule or by the fourth-order Magnus (Gauss) rule. Every substep is
//! an exact exponential of a Hermitian matrix, so propagators stay unitary.

mod protocol;
mod two_level;

pub use protocol::{
    drive_matrix_element, gate_time_accounting, halfway_inversion_segments, iswap_target, phase_target,
    resonance_frequency, run_iswap_protocol, strongest_drive_sites, DriveClock, GateTime, ProtocolOutcome,
    ProtocolParams, TargetGate,
};
pub use two_level::{simulate_two_level, two_level_error, TwoLevelError};

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BlockOperator, Operator, Partition, StateVector};

/// One monochromatic drive `cos(omega t + phase) V`.
#[derive(Clone, Debug)]
pub struct DriveTerm {
    pub operator: BlockOperator,
    pub omega: f64,
    pub phase: f64,
}

#[derive(Clone, Debug)]
pub enum Segment {
    Static { hamiltonian: BlockOperator, duration: f64 },
    Driven { base: BlockOperator, drives: Vec<DriveTerm>, duration: f64 },
    /// A unitary layer taking no schedule time.
    Gate { unitary: BlockOperator, label: String },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Static { duration, .. } | Segment::Driven { duration, .. } => *duration,
            Segment::Gate { .. } => 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PulseSchedule {
    partition: Arc<Partition>,
    pub t0: f64,
    segments: Vec<Segment>,
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid(format!("segment duration must be positive and finite, got {duration}")));
    }
    Ok(())
}

impl PulseSchedule {
    pub fn new(partition: Arc<Partition>, t0: f64) -> Self {
        Self { partition, t0, segments: Vec::new() }
    }

    /// A schedule over the whole space as one block, for operators that do
    /// not conserve the excitation number.
    pub fn dense(dim: usize, t0: f64) -> Self {
        Self::new(Arc::new(Partition::trivial(dim)), t0)
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Absolute start time of the next appended segment.
    pub fn end_time(&self) -> f64 {
        self.t0 + self.total_duration()
    }

    fn adopt(&self, op: &BlockOperator) -> Result<BlockOperator> {
        if **op.partition() == *self.partition {
            Ok(op.clone())
        } else {
            BlockOperator::from_dense(&op.to_dense(), Arc::clone(&self.partition))
        }
    }

    pub fn push_static(&mut self, hamiltonian: &BlockOperator, duration: f64) -> Result<&mut Self> {
        check_duration(duration)?;
        let hamiltonian = self.adopt(hamiltonian)?;
        self.segments.push(Segment::Static { hamiltonian, duration });
        Ok(self)
    }

    pub fn push_static_dense(&mut self, hamiltonian: &Operator, duration: f64) -> Result<&mut Self> {
        let h = BlockOperator::from_dense(hamiltonian, Arc::clone(&self.partition))?;
        self.push_static(&h, duration)
    }

    pub fn push_driven(&mut self, base: &BlockOperator, drives: Vec<DriveTerm>, duration: f64) -> Result<&mut Self> {
        check_duration(duration)?;
        let base = self.adopt(base)?;
        let drives = drives
            .into_iter()
            .map(|d| {
                if !(d.omega.is_finite() && d.phase.is_finite()) {
                    return Err(Error::invalid("drive frequency and phase must be finite"));
                }
                Ok(DriveTerm { operator: self.adopt(&d.operator)?, ..d })
            })
            .collect::<Result<Vec<_>>>()?;
        self.segments.push(Segment::Driven { base, drives, duration });
        Ok(self)
    }

    pub fn push_gate(&mut self, unitary: &BlockOperator, label: impl Into<String>) -> Result<&mut Self> {
        let unitary = self.adopt(unitary)?;
        self.segments.push(Segment::Gate { unitary, label: label.into() });
        Ok(self)
    }

    pub fn extend(&mut self, other: PulseSchedule) -> Result<&mut Self> {
        if *other.partition != *self.partition {
            return Err(Error::invalid("cannot join schedules over different partitions"));
        }
        self.segments.extend(other.segments);
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// `U = exp(-i H(t + h/2) h)`, second order.
    ExponentialMidpoint,
    /// Two-point Gauss Magnus expansion, fourth order.
    Magnus4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    pub integrator: Integrator,
    /// Substeps per drive period on the first pass.
    pub steps_per_period: usize,
    /// Largest column-norm change accepted under step halving.
    pub tolerance: f64,
    pub max_refinements: usize,
    /// Reuse the one-period propagator when all drives share one frequency.
    pub periodic_acceleration: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            integrator: Integrator::Magnus4,
            steps_per_period: 64,
            tolerance: 1e-9,
            max_refinements: 10,
            periodic_acceleration: true,
        }
    }
}

impl PropagationOptions {
    pub fn midpoint() -> Self {
        Self { integrator: Integrator::ExponentialMidpoint, ..Self::default() }
    }
}

/// Step counts and convergence data for each driven segment.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PropagationReport {
    pub segments: Vec<SegmentReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentReport {
    pub steps_per_period: usize,
    pub refinements: usize,
    /// Column-norm change between the last two refinements.
    pub last_change: f64,
}

impl PropagationReport {
    pub fn max_change(&self) -> f64 {
        self.segments.iter().map(|s| s.last_change).fold(0.0, f64::max)
    }
}

fn hamiltonian_at(base: &BlockOperator, drives: &[DriveTerm], t: f64) -> BlockOperator {
    let terms: Vec<(&BlockOperator, f64)> =
        drives.iter().map(|d| (&d.operator, (d.omega * t + d.phase).cos())).collect();
    base.linear_combination(&terms)
}

/// One substep `[t, t + h]`.
fn step(base: &BlockOperator, drives: &[DriveTerm], t: f64, h: f64, integrator: Integrator) -> Result<BlockOperator> {
    match integrator {
        Integrator::ExponentialMidpoint => hamiltonian_at(base, drives, t + 0.5 * h).expm(h),
        Integrator::Magnus4 => {
            let r = 3f64.sqrt() / 6.0;
            let h1 = hamiltonian_at(base, drives, t + (0.5 - r) * h);
            let h2 = hamiltonian_at(base, drives, t + (0.5 + r) * h);
            // H_eff = (h/2)(H1 + H2) - i (sqrt3/12) h^2 [H2, H1]
            let comm = h2.commutator(&h1);
            let k = 3f64.sqrt() / 12.0 * h * h;
            let heff = h1.add(&h2).scale_real(0.5 * h).add(&comm.scale(crate::linalg::c(0.0, -k)));
            heff.expm(1.0)
        }
    }
}

/// `n_steps` equal substeps over `[t, t + duration]`.
fn integrate(
    base: &BlockOperator,
    drives: &[DriveTerm],
    t: f64,
    duration: f64,
    n_steps: usize,
    integrator: Integrator,
) -> Result<BlockOperator> {
    let h = duration / n_steps as f64;
    let mut u = BlockOperator::identity(Arc::clone(base.partition()));
    for s in 0..n_steps {
        u = step(base, drives, t + s as f64 * h, h, integrator)?.matmul(&u);
    }
    Ok(u)
}

fn common_period(drives: &[DriveTerm]) -> Option<f64> {
    let omega = drives.first()?.omega;
    if omega == 0.0 || drives.iter().any(|d| d.omega != omega) {
        return None;
    }
    Some(2.0 * PI / omega.abs())
}

fn driven_propagator(
    base: &BlockOperator,
    drives: &[DriveTerm],
    t: f64,
    duration: f64,
    steps_per_period: usize,
    opts: &PropagationOptions,
) -> Result<BlockOperator> {
    let Some(period) = common_period(drives).or_else(|| {
        // no single frequency: take the fastest drive as the step scale
        drives
            .iter()
            .map(|d| d.omega.abs())
            .filter(|w| *w > 0.0)
            .fold(None, |m: Option<f64>, w| Some(m.map_or(w, |m| m.max(w))))
            .map(|w| 2.0 * PI / w)
    }) else {
        return integrate(base, drives, t, duration, steps_per_period.max(1), opts.integrator);
    };
    let steps_for = |len: f64| ((len / period) * steps_per_period as f64).ceil().max(1.0) as usize;
    if opts.periodic_acceleration && common_period(drives).is_some() && duration > period {
        let whole = (duration / period + 1e-12).floor();
        let rem = duration - whole * period;
        let u_period = integrate(base, drives, t, period, steps_per_period, opts.integrator)?;
        let mut u = u_period.pow(whole as u64);
        if rem > 1e-12 * period {
            u = integrate(base, drives, t, rem, steps_for(rem), opts.integrator)?.matmul(&u);
        }
        Ok(u)
    } else {
        integrate(base, drives, t, duration, steps_for(duration), opts.integrator)
    }
}

fn converged_driven(
    base: &BlockOperator,
    drives: &[DriveTerm],
    t: f64,
    duration: f64,
    opts: &PropagationOptions,
) -> Result<(BlockOperator, SegmentReport)> {
    let mut steps = opts.steps_per_period.max(1);
    let mut current = driven_propagator(base, drives, t, duration, steps, opts)?;
    let mut change = f64::INFINITY;
    for r in 1..=opts.max_refinements {
        steps *= 2;
        let finer = driven_propagator(base, drives, t, duration, steps, opts)?;
        change = finer.max_column_distance(&current);
        current = finer;
        if change < opts.tolerance {
            return Ok((current, SegmentReport { steps_per_period: steps, refinements: r, last_change: change }));
        }
    }
    Err(Error::NotConverged { refinements: opts.max_refinements, achieved: change, tolerance: opts.tolerance })
}

/// Full propagator of a schedule (later segments act on the left).
pub fn propagate_unitary(schedule: &PulseSchedule, opts: &PropagationOptions) -> Result<(BlockOperator, PropagationReport)> {
    let mut u = BlockOperator::identity(Arc::clone(&schedule.partition));
    let mut t = schedule.t0;
    let mut report = PropagationReport::default();
    for seg in &schedule.segments {
        let s = match seg {
            Segment::Static { hamiltonian, duration } => hamiltonian.expm(*duration)?,
            Segment::Gate { unitary, .. } => unitary.clone(),
            Segment::Driven { base, drives, duration } => {
                let (s, r) = converged_driven(base, drives, t, *duration, opts)?;
                report.segments.push(r);
                s
            }
        };
        u = s.matmul(&u);
        t += seg.duration();
    }
    Ok((u, report))
}

/// Dense form of [`propagate_unitary`].
pub fn propagate_unitary_dense(schedule: &PulseSchedule, opts: &PropagationOptions) -> Result<Operator> {
    Ok(propagate_unitary(schedule, opts)?.0.to_dense())
}

/// Evolve a state. Convergence is controlled on the full propagator, which
/// bounds the change of any normalised input state.
pub fn propagate(state: &StateVector, schedule: &PulseSchedule, opts: &PropagationOptions) -> Result<StateVector> {
    if state.dim() != schedule.partition.dim() {
        return Err(Error::DimensionMismatch { expected: schedule.partition.dim(), found: state.dim() });
    }
    if schedule.segments.is_empty() {
        return Ok(state.clone());
    }
    propagate_unitary(schedule, opts)?.0.apply(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_hk, ChainSpec};
    use crate::linalg::{basis_index, c, expm_hermitian, paulis};

    fn two_level_drive(a: f64, omega: f64, e2: f64) -> PulseSchedule {
        let h0 = BlockOperator::from_blocks(
            Arc::new(Partition::trivial(2)),
            vec![Operator::real_diagonal(&[0.0, e2]).into_mat()],
        )
        .unwrap();
        let p = Arc::clone(h0.partition());
        let x = BlockOperator::from_dense(&paulis::x().scale_real(a), Arc::clone(&p)).unwrap();
        let y = BlockOperator::from_dense(&paulis::y().scale_real(a), Arc::clone(&p)).unwrap();
        let mut s = PulseSchedule::new(p, 0.0);
        let drives = vec![
            DriveTerm { operator: x, omega, phase: 0.0 },
            DriveTerm { operator: y, omega, phase: PI / 2.0 },
        ];
        s.push_driven(&h0, drives, PI / (2.0 * a)).unwrap();
        s
    }

    #[test]
    fn empty_schedule_is_identity() {
        let s = PulseSchedule::new(Arc::new(Partition::excitation(3)), 0.0);
        let psi = StateVector::from_bits("101").unwrap();
        assert_eq!(propagate(&psi, &s, &PropagationOptions::default()).unwrap(), psi);
        let (u, _) = propagate_unitary(&s, &PropagationOptions::default()).unwrap();
        assert_eq!(u.to_dense().max_abs_diff(&Operator::identity(8)).unwrap(), 0.0);
    }

    #[test]
    fn static_segment_matches_expm() {
        let hk = build_hk(&ChainSpec::krawtchouk(4, 1.0).unwrap()).unwrap();
        let mut s = PulseSchedule::new(Arc::new(Partition::excitation(4)), 0.0);
        s.push_static_dense(&hk, 0.77).unwrap();
        let u = propagate_unitary_dense(&s, &PropagationOptions::default()).unwrap();
        assert!(u.max_abs_diff(&expm_hermitian(&hk, 0.77).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn pst_mirror() {
        let hk = build_hk(&ChainSpec::krawtchouk(4, 1.0).unwrap()).unwrap();
        let mut s = PulseSchedule::new(Arc::new(Partition::excitation(4)), 0.0);
        s.push_static_dense(&hk, PI).unwrap();
        let out = propagate(&StateVector::from_bits("1000").unwrap(), &s, &PropagationOptions::default()).unwrap();
        assert!((out.amp(basis_index(&[3], 4)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resonant_two_level_flip() {
        for opts in [PropagationOptions::default(), PropagationOptions { tolerance: 1e-7, ..PropagationOptions::midpoint() }] {
            let s = two_level_drive(0.05, 1.0, 1.0);
            let out = propagate(&StateVector::from_bits("0").unwrap(), &s, &opts).unwrap();
            assert!((out.amp(1).norm_sqr() - 1.0).abs() < 1e-6, "{opts:?}");
        }
    }

    #[test]
    fn rejects_bad_duration() {
        let mut s = PulseSchedule::dense(2, 0.0);
        let h = BlockOperator::identity(Arc::clone(s.partition()));
        assert!(s.push_static(&h, 0.0).is_err());
        assert!(s.push_static(&h, f64::NAN).is_err());
    }

    #[test]
    fn integrators_agree_and_acceleration_is_exact() {
        let spec = ChainSpec::krawtchouk(4, 1.0).unwrap();
        let p = Arc::new(Partition::excitation(4));
        let base = BlockOperator::from_dense(&build_hk(&spec).unwrap(), Arc::clone(&p)).unwrap();
        let drive = crate::hamiltonians::DrivingSpec {
            j: 0,
            d: 2,
            sign: crate::hamiltonians::DriveSign::Plus,
            j_d: 0.3,
            omega: 4.0,
            phase: 0.4,
        };
        let v = BlockOperator::from_dense(&crate::hamiltonians::driving_operator(&drive, 4).unwrap(), Arc::clone(&p)).unwrap();
        let mut s = PulseSchedule::new(p, 0.25);
        s.push_driven(&base, vec![DriveTerm { operator: v, omega: 4.0, phase: 0.4 }], 7.3).unwrap();
        let fast = propagate_unitary(&s, &PropagationOptions::default()).unwrap().0;
        let slow_opts = PropagationOptions { periodic_acceleration: false, ..Default::default() };
        let slow = propagate_unitary(&s, &slow_opts).unwrap().0;
        let mid = propagate_unitary(&s, &PropagationOptions { tolerance: 1e-8, ..PropagationOptions::midpoint() }).unwrap().0;
        assert!(fast.max_column_distance(&slow) < 1e-8);
        assert!(fast.max_column_distance(&mid) < 1e-7);
        assert!(fast.unitarity_deviation() < 1e-10);
    }

    #[test]
    fn non_convergence_is_reported() {
        let s = two_level_drive(0.05, 1.0, 1.0);
        let opts = PropagationOptions { steps_per_period: 1, max_refinements: 1, tolerance: 1e-15, ..Default::default() };
        match propagate_unitary(&s, &opts) {
            Err(Error::NotConverged { refinements: 1, achieved, .. }) => assert!(achieved > 0.0),
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn gate_layers_take_no_time() {
        let p = Arc::new(Partition::trivial(2));
        let x = BlockOperator::from_dense(&paulis::x(), Arc::clone(&p)).unwrap();
        let mut s = PulseSchedule::new(p, 1.0);
        s.push_gate(&x, "X").unwrap();
        assert_eq!(s.end_time(), 1.0);
        let u = propagate_unitary_dense(&s, &PropagationOptions::default()).unwrap();
        assert_eq!(u.get(0, 1), c(1.0, 0.0));
    }
}
