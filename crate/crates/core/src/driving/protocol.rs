//! The `iSWAP_N` protocol: eigengate, resonant drive with halfway inversion,
//! inverse eigengate.
//!
//! Conventions fixed here:
//! - `J_D = J / (2 M |m|)` with `m = <1^h 0^h|_{H^K} V |0^h 1^h>_{H^K}` for the
//!   summed unit-strength drive `V`, `h = N/2`. Then `A = J_D |m| / 2 = J/(4M)`.
//! - The drive phase is `pi - arg(m)`, which makes the rotating-frame coupling
//!   real and negative so the transition picks up the factor `+i`.
//! - The drive clock runs on drive time only: across the `H^Z` pulse the phase
//!   is shifted by `-omega pi/J`, which equals a paused clock in absolute time.
//! - The inversion pulse `P = exp(-i pi H^Z/J)` is closed by `P^dag`; a second
//!   `P` would leave `P^2 = (-1)^q` on the gate.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{propagate_unitary, DriveTerm, PropagationOptions, PropagationReport, PulseSchedule};
use crate::eigengate::analytic_eigengate_blocks;
use crate::error::{Error, Result};
use crate::hamiltonians::{
    apply_coupling_noise, driving_terms, hk_terms, hz_terms, ChainSpec, DriveSign, DrivingSpec,
};
use crate::krawtchouk::{build_basis, m2_closed_form, manybody_energy, optimal_drive_sign, ModeSet};
use crate::linalg::{c, i_pow, BlockOperator, Partition, C64, I, ONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetGate {
    /// `|1^h 0^h> <-> i |0^h 1^h>`, drive time `2 pi M / J`.
    Iswap,
    /// `iSWAP_N^2`: minus signs on both states, drive time doubled.
    Phase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveClock {
    /// Drive phase continuous in drive time; paused during the `H^Z` pulse.
    DriveTime,
    /// `cos(omega t + phase)` in absolute schedule time throughout.
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub target: TargetGate,
    /// Left sites of the drive terms; `None` picks the `j` maximising `|M^(2)|`.
    pub drive_sites: Option<Vec<usize>>,
    /// `None` selects the sign from the conjugate-phase rule.
    pub sign: Option<DriveSign>,
    pub halfway_inversion: bool,
    pub noise_eps: f64,
    pub seed: u64,
    pub omega_override: Option<f64>,
    /// `None` uses `pi - arg(m)`.
    pub phase_override: Option<f64>,
    pub clock: DriveClock,
    pub options: PropagationOptions,
}

impl ProtocolParams {
    pub fn new(n_qubits: usize, m: u32) -> Self {
        Self {
            n_qubits,
            j: 1.0,
            m,
            target: TargetGate::Iswap,
            drive_sites: None,
            sign: None,
            halfway_inversion: true,
            noise_eps: 0.0,
            seed: 0,
            omega_override: None,
            phase_override: None,
            clock: DriveClock::DriveTime,
            options: PropagationOptions::default(),
        }
    }

    pub fn with_noise(mut self, eps: f64, seed: u64) -> Self {
        self.noise_eps = eps;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 || self.n_qubits % 2 != 0 {
            return Err(Error::Parity(format!("the iSWAP_N protocol needs even N >= 2, got {}", self.n_qubits)));
        }
        if self.m < 1 {
            return Err(Error::invalid("M must be a positive integer"));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::invalid(format!("J must be positive, got {}", self.j)));
        }
        if !(0.0..1.0).contains(&self.noise_eps) {
            return Err(Error::invalid(format!("noise eps must lie in [0, 1), got {}", self.noise_eps)));
        }
        if let Some(sites) = &self.drive_sites {
            if sites.is_empty() {
                return Err(Error::invalid("at least one drive site is required"));
            }
            for &s in sites {
                if s + self.n_qubits / 2 >= self.n_qubits {
                    return Err(Error::SiteOutOfRange { site: s + self.n_qubits / 2, n_qubits: self.n_qubits });
                }
            }
        }
        Ok(())
    }

    /// `tau_D = 2 pi M / J`, doubled for the phase gate.
    pub fn tau_d(&self) -> f64 {
        let base = 2.0 * PI * self.m as f64 / self.j;
        match self.target {
            TargetGate::Iswap => base,
            TargetGate::Phase => 2.0 * base,
        }
    }
}

/// Energy gap between `|0^h 1^h>_{H^K}` and `|1^h 0^h>_{H^K}`: `N^2 J / 4`.
pub fn resonance_frequency(n_qubits: usize, j: f64) -> Result<f64> {
    if n_qubits % 2 != 0 || n_qubits < 2 {
        return Err(Error::Parity(format!("resonance defined for even N, got {n_qubits}")));
    }
    let n = n_qubits - 1;
    let basis = build_basis(n, j)?;
    let h = n_qubits / 2;
    Ok(manybody_energy(&basis, &ModeSet::upper(n, h)) - manybody_energy(&basis, &ModeSet::lower(n, h)))
}

/// Left sites `j` where `|M^(2)_{j, N/2}|` is largest.
pub fn strongest_drive_sites(n_qubits: usize) -> Result<Vec<usize>> {
    if n_qubits % 2 != 0 || n_qubits < 2 {
        return Err(Error::Parity(format!("drive sites defined for even N, got {n_qubits}")));
    }
    let n = n_qubits - 1;
    let values: Vec<f64> = (0..=(n - 1) / 2)
        .map(|j| m2_closed_form(n, j).map(|r| r.value.abs()))
        .collect::<Result<_>>()?;
    let best = values.iter().copied().fold(0.0, f64::max);
    Ok((0..values.len()).filter(|&j| values[j] >= best * (1.0 - 1e-9)).collect())
}

fn special_states(n_qubits: usize) -> (usize, usize) {
    let n = n_qubits - 1;
    let h = n_qubits / 2;
    (ModeSet::lower(n, h).index(), ModeSet::upper(n, h).index())
}

/// `|1^h 0^h> <-> i |0^h 1^h>`, identity elsewhere.
pub fn iswap_target(n_qubits: usize, partition: &Arc<Partition>) -> Result<BlockOperator> {
    if n_qubits % 2 != 0 {
        return Err(Error::Parity(format!("iSWAP_N needs even N, got {n_qubits}")));
    }
    let (lo, hi) = special_states(n_qubits);
    Ok(BlockOperator::from_fn(Arc::clone(partition), |r, s| {
        if (r, s) == (lo, hi) || (r, s) == (hi, lo) {
            I
        } else if r == s && r != lo && r != hi {
            ONE
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// `iSWAP_N^2`: `-1` on both special states.
pub fn phase_target(n_qubits: usize, partition: &Arc<Partition>) -> Result<BlockOperator> {
    let t = iswap_target(n_qubits, partition)?;
    Ok(t.matmul(&t))
}

/// `m = <1^h 0^h|_{H^K} V |0^h 1^h>_{H^K}` for the unit-strength summed drive.
pub fn drive_matrix_element(n_qubits: usize, sites: &[usize], sign: DriveSign) -> Result<C64> {
    let n = n_qubits - 1;
    let h = n_qubits / 2;
    let basis = build_basis(n, 1.0)?;
    let mut v = crate::hamiltonians::SparseHamiltonian::new(n_qubits);
    for &j in sites {
        let spec = DrivingSpec { j, d: h, sign, j_d: 1.0, omega: 0.0, phase: 0.0 };
        v.extend(&driving_terms(&spec, n_qubits)?);
    }
    let bra = crate::krawtchouk::eigenstate_vector(&basis, &ModeSet::lower(n, h))?;
    let ket = crate::krawtchouk::eigenstate_vector(&basis, &ModeSet::upper(n, h))?;
    v.to_operator().expectation(&bra, &ket)
}

/// Drive segments with the halfway inversion:
/// drive `tau/2`, `exp(-i pi H^Z/J)`, drive `tau/2`, `exp(+i pi H^Z/J)`.
pub fn halfway_inversion_segments(
    base: &BlockOperator,
    drives: &[DriveTerm],
    tau_d: f64,
    j: f64,
    n_qubits: usize,
    t0: f64,
    clock: DriveClock,
) -> Result<PulseSchedule> {
    let p = Arc::clone(base.partition());
    let hz = hz_terms(n_qubits, j)?.to_blocks(&p)?;
    let pulse = PI / j;
    let mut s = PulseSchedule::new(p, t0);
    s.push_driven(base, drives.to_vec(), tau_d / 2.0)?;
    s.push_static(&hz, pulse)?;
    let second: Vec<DriveTerm> = drives
        .iter()
        .map(|d| DriveTerm {
            phase: match clock {
                DriveClock::DriveTime => d.phase - d.omega * pulse,
                DriveClock::Absolute => d.phase,
            },
            ..d.clone()
        })
        .collect();
    s.push_driven(base, second, tau_d / 2.0)?;
    s.push_static(&hz.scale_real(-1.0), pulse)?;
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub params: ProtocolParams,
    /// `U_K^dag U_drive U_K`.
    pub unitary: BlockOperator,
    /// `1 - |Tr(U_target U^dag)| / 2^N`.
    pub error: f64,
    pub omega: f64,
    pub j_d: f64,
    /// `A = J_D |m| / 2`.
    pub coupling_a: f64,
    pub matrix_element: C64,
    pub phase: f64,
    pub tau_d: f64,
    pub sites: Vec<usize>,
    pub sign: DriveSign,
    pub unitarity: f64,
    /// `|<0^h 1^h| (-i) U |1^h 0^h>|` and the reverse transition.
    pub transition_overlaps: (f64, f64),
    pub report: PropagationReport,
}

pub fn run_iswap_protocol(params: &ProtocolParams) -> Result<ProtocolOutcome> {
    params.validate()?;
    let (nq, j) = (params.n_qubits, params.j);
    let h = nq / 2;
    let partition = Arc::new(Partition::excitation(nq));
    let sites = match &params.drive_sites {
        Some(s) => s.clone(),
        None => strongest_drive_sites(nq)?,
    };
    let sign = match params.sign {
        Some(s) => s,
        None => optimal_drive_sign(nq)?,
    };
    let m_el = drive_matrix_element(nq, &sites, sign)?;
    if m_el.norm() < 1e-14 {
        return Err(Error::invalid(format!("drive on sites {sites:?} with sign {} does not couple the states", sign.symbol())));
    }
    let omega = match params.omega_override {
        Some(w) => w,
        None => resonance_frequency(nq, j)?,
    };
    let j_d = j / (2.0 * params.m as f64 * m_el.norm());
    let phase = params.phase_override.unwrap_or(PI - m_el.arg());
    let tau_d = params.tau_d();

    let clean = ChainSpec::krawtchouk(nq, j)?.with_noise(params.noise_eps, params.seed);
    let noisy = apply_coupling_noise(&clean)?;
    let base = hk_terms(&noisy)?.to_blocks(&partition)?;
    let mut v = crate::hamiltonians::SparseHamiltonian::new(nq);
    for &s in &sites {
        let spec = DrivingSpec { j: s, d: h, sign, j_d, omega, phase };
        v.extend(&driving_terms(&spec, nq)?);
    }
    let drives = vec![DriveTerm { operator: v.to_blocks(&partition)?, omega, phase }];

    let schedule = if params.halfway_inversion {
        halfway_inversion_segments(&base, &drives, tau_d, j, nq, 0.0, params.clock)?
    } else {
        let mut s = PulseSchedule::new(Arc::clone(&partition), 0.0);
        s.push_driven(&base, drives, tau_d)?;
        s
    };
    let (u_drive, report) = propagate_unitary(&schedule, &params.options)?;
    let uk = analytic_eigengate_blocks(nq, j, &partition)?;
    let unitary = uk.adjoint().matmul(&u_drive).matmul(&uk);

    let target = match params.target {
        TargetGate::Iswap => iswap_target(nq, &partition)?,
        TargetGate::Phase => phase_target(nq, &partition)?,
    };
    let error = target.phase_invariant_distance(&unitary);
    let (lo, hi) = special_states(nq);
    let want = match params.target {
        TargetGate::Iswap => i_pow(1),
        TargetGate::Phase => i_pow(2),
    };
    let overlaps = match params.target {
        TargetGate::Iswap => ((unitary.get(hi, lo) / want).norm(), (unitary.get(lo, hi) / want).norm()),
        TargetGate::Phase => ((unitary.get(lo, lo) / want).norm(), (unitary.get(hi, hi) / want).norm()),
    };
    Ok(ProtocolOutcome {
        params: params.clone(),
        unitarity: unitary.unitarity_deviation(),
        unitary,
        error,
        omega,
        j_d,
        coupling_a: 0.5 * j_d * m_el.norm(),
        matrix_element: m_el,
        phase,
        tau_d,
        sites,
        sign,
        transition_overlaps: overlaps,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateTime {
    /// `2 pi/J + 2 pi M/J`, units of `1/J`.
    pub raw_time: f64,
    /// `raw_time * (N/2)(J / J_max)`.
    pub penalized_time: f64,
    /// `pi / J_max`.
    pub iswap2_time: f64,
    pub iswap2_equivalents: f64,
}

/// Time of two eigengates plus the drive, in `iSWAP_2` units.
pub fn gate_time_accounting(n_qubits: usize, m: u32, j: f64, j_max: f64) -> Result<GateTime> {
    if n_qubits % 2 != 0 {
        return Err(Error::Parity(format!("gate-time accounting needs even N, got {n_qubits}")));
    }
    let raw_time = 2.0 * PI / j + 2.0 * PI * m as f64 / j;
    let penalized_time = raw_time * (n_qubits as f64 / 2.0) * (j / j_max);
    let iswap2_time = PI / j_max;
    // penalized / (pi/J_max) = N (1 + M) exactly
    let iswap2_equivalents = (n_qubits as u64 * (1 + m as u64)) as f64;
    Ok(GateTime { raw_time, penalized_time, iswap2_time, iswap2_equivalents })
}
