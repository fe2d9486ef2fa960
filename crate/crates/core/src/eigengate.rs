//! The Krawtchouk eigengate `U_K`, mapping `|s>` to `i^(qn) |s>_{H^K}`.
//!
//! Two constructions:
//! three-step `exp(-i pi/(2J) H^Z) exp(-i pi/(2J) H^K) exp(-i pi/(2J) H^Z)` and
//! single-pulse `exp(-i (pi/J) (H^K + H^Z)/sqrt 2)`. With `L_X = H^K/J` and
//! `L_Z = H^Z/J` spanning so(3), the single pulse is a `pi` rotation about
//! `(L_X + L_Z)/sqrt 2`, which swaps `L_Z` and `L_X`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{build_hk, build_hz, hk_terms, hz_diagonal, hz_terms, ChainSpec};
use crate::krawtchouk::{build_basis, eigenstate_vector, sector_eigenvectors, ModeSet};
use crate::linalg::{
    c, expm_hermitian, i_pow, BlockOperator, Operator, Partition, StateVector, C64, ONE,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigengateVariant {
    ThreeStep,
    SinglePulse,
}

impl EigengateVariant {
    pub const ALL: [EigengateVariant; 2] = [EigengateVariant::ThreeStep, EigengateVariant::SinglePulse];

    pub fn name(self) -> &'static str {
        match self {
            EigengateVariant::ThreeStep => "three_step",
            EigengateVariant::SinglePulse => "single_pulse",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigengateForm {
    pub variant: EigengateVariant,
    pub n_qubits: usize,
    pub j: f64,
    pub unitary: Operator,
}

/// `exp(-i theta H^Z)` as a diagonal.
pub fn hz_phases(n_qubits: usize, j: f64, theta: f64) -> Vec<C64> {
    hz_diagonal(n_qubits, j).into_iter().map(|e| C64::cis(-e * theta)).collect()
}

/// Dense eigengate from a (possibly noisy) chain spec. `H^Z` is always exact.
pub fn build_eigengate(spec: &ChainSpec, variant: EigengateVariant) -> Result<EigengateForm> {
    spec.validate()?;
    let (n, j) = (spec.n_qubits, spec.j);
    let hk = build_hk(spec)?;
    let unitary = match variant {
        EigengateVariant::ThreeStep => {
            let d = hz_phases(n, j, PI / (2.0 * j));
            let mid = expm_hermitian(&hk, PI / (2.0 * j))?;
            Operator::from_fn(1 << n, |r, s| d[r] * mid.get(r, s) * d[s])
        }
        EigengateVariant::SinglePulse => {
            let h = &hk + &build_hz(n, j)?;
            expm_hermitian(&h, PI * FRAC_1_SQRT_2 / j)?
        }
    };
    Ok(EigengateForm { variant, n_qubits: n, j, unitary })
}

/// Sector-blocked eigengate; the fast path for large `N`.
pub fn build_eigengate_blocks(
    spec: &ChainSpec,
    variant: EigengateVariant,
    partition: &Arc<Partition>,
) -> Result<BlockOperator> {
    spec.validate()?;
    let (n, j) = (spec.n_qubits, spec.j);
    let hk = hk_terms(spec)?;
    match variant {
        EigengateVariant::ThreeStep => {
            let d = hz_phases(n, j, PI / (2.0 * j));
            let mid = hk.to_blocks(partition)?.expm(PI / (2.0 * j))?;
            let blocks = (0..partition.n_sectors())
                .map(|s| {
                    let idx = partition.sector(s);
                    let b = mid.block(s);
                    Mat::from_fn(idx.len(), idx.len(), |r, q| d[idx[r]] * b[(r, q)] * d[idx[q]])
                })
                .collect();
            BlockOperator::from_blocks(Arc::clone(partition), blocks)
        }
        EigengateVariant::SinglePulse => {
            let mut h = hk;
            h.extend(&hz_terms(n, j)?);
            h.to_blocks(partition)?.expm(PI * FRAC_1_SQRT_2 / j)
        }
    }
}

/// The exact eigengate: sector-`q` column `s` equals `i^(qn) |s>_{H^K}`.
pub fn analytic_eigengate_blocks(n_qubits: usize, j: f64, partition: &Arc<Partition>) -> Result<BlockOperator> {
    if partition.n_sectors() != n_qubits + 1 {
        return Err(Error::invalid("analytic eigengate needs the excitation partition"));
    }
    let n = n_qubits - 1;
    let basis = build_basis(n, j)?;
    let blocks = (0..=n_qubits)
        .map(|q| {
            let phase = i_pow((q * n) as i64);
            let v = sector_eigenvectors(&basis, q);
            Mat::from_fn(v.nrows(), v.ncols(), |r, s| v[(r, s)] * phase)
        })
        .collect();
    BlockOperator::from_blocks(Arc::clone(partition), blocks)
}

pub fn analytic_eigengate(n_qubits: usize, j: f64) -> Result<Operator> {
    let p = Arc::new(Partition::excitation(n_qubits));
    Ok(analytic_eigengate_blocks(n_qubits, j, &p)?.to_dense())
}

/// Trace error `1 - |Tr(U_exact^dag U)|/2^N` of a noisy three-step eigengate.
pub fn noisy_eigengate_error(noisy: &ChainSpec, partition: &Arc<Partition>, exact: &BlockOperator) -> Result<f64> {
    let u = build_eigengate_blocks(noisy, EigengateVariant::ThreeStep, partition)?;
    Ok(exact.phase_invariant_distance(&u))
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseEntry {
    pub state: String,
    pub q: usize,
    /// `|<s|_{H^K} U |s>|`.
    pub overlap: f64,
    /// `arg <s|_{H^K} U |s>` in radians.
    pub phase: f64,
    /// `arg i^(qn)`.
    pub expected_phase: f64,
    /// `|<s|_{H^K} U |s> - i^(qn)|`.
    pub phase_error: f64,
}

/// Overlap and phase of every column with its target eigenstate.
pub fn phase_table(form: &EigengateForm) -> Result<Vec<PhaseEntry>> {
    let nq = form.n_qubits;
    let n = nq - 1;
    let basis = build_basis(n, form.j)?;
    let mut out = Vec::with_capacity(1 << nq);
    for idx in 0..1usize << nq {
        let modes = ModeSet::from_index(n, idx);
        let target = eigenstate_vector(&basis, &modes)?;
        let col = form.unitary.column(idx);
        let z = target.inner(&col)?;
        let want = i_pow((modes.q() * n) as i64);
        out.push(PhaseEntry {
            state: modes.bits(),
            q: modes.q(),
            overlap: z.norm(),
            phase: z.arg(),
            expected_phase: want.arg(),
            phase_error: (z - want).norm(),
        });
    }
    Ok(out)
}

/// `max |H^K U - U H^Z|`.
pub fn check_intertwining(form: &EigengateForm, hk: &Operator, hz: &Operator) -> Result<f64> {
    let u = &form.unitary;
    Ok(hk.matmul(u).max_abs_diff(&u.matmul(hz))?)
}

#[derive(Clone, Debug, Serialize)]
pub struct BchResidual {
    pub theta: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct So3Report {
    pub n_qubits: usize,
    /// `[L_X, L_Y] - i L_Z`, `[L_Y, L_Z] - i L_X`, `[L_Z, L_X] - i L_Y`.
    pub commutators: [f64; 3],
    pub bch: Vec<BchResidual>,
}

impl So3Report {
    pub fn max_residual(&self) -> f64 {
        self.commutators
            .iter()
            .copied()
            .chain(self.bch.iter().map(|b| b.residual))
            .fold(0.0, f64::max)
    }
}

pub const BCH_ANGLES: [f64; 4] = [0.0, PI / 2.0, PI, 1.234_567];

/// so(3) relations of `L_X = H^K/J`, `L_Z = H^Z/J`, `L_Y = -i[L_Z, L_X]`, and
/// `e^{-i L_H t} L_Z e^{i L_H t} = sin^2(t/2) L_X - sin(t)/sqrt2 L_Y + cos^2(t/2) L_Z`.
pub fn so3_checks(n_qubits: usize, j: f64) -> Result<So3Report> {
    let spec = ChainSpec::krawtchouk(n_qubits, j)?;
    let lx = build_hk(&spec)?.scale_real(1.0 / j);
    let lz = build_hz(n_qubits, j)?.scale_real(1.0 / j);
    let ly = lz.commutator(&lx).scale(c(0.0, -1.0));
    let i = c(0.0, 1.0);
    let commutators = [
        lx.commutator(&ly).max_abs_diff(&lz.scale(i))?,
        ly.commutator(&lz).max_abs_diff(&lx.scale(i))?,
        lz.commutator(&lx).max_abs_diff(&ly.scale(i))?,
    ];
    let lh = (&lx + &lz).scale_real(FRAC_1_SQRT_2);
    let eig = crate::linalg::hermitian_eigendecompose(&lh)?;
    let mut bch = Vec::new();
    for &theta in &BCH_ANGLES {
        let u = eig.exp(theta);
        let lhs = u.matmul(&lz).matmul(&u.adjoint());
        let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
        let rhs = &(&lx.scale_real(s * s) - &ly.scale_real(theta.sin() * FRAC_1_SQRT_2)) + &lz.scale_real(co * co);
        bch.push(BchResidual { theta, residual: lhs.max_abs_diff(&rhs)? });
    }
    Ok(So3Report { n_qubits, commutators, bch })
}

#[derive(Clone, Debug, Serialize)]
pub struct VariantSummary {
    pub variant: EigengateVariant,
    pub unitarity: f64,
    pub min_overlap: f64,
    pub max_phase_error: f64,
    pub intertwining: f64,
    pub phases: Vec<PhaseEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormComparison {
    pub n_qubits: usize,
    pub variants: Vec<VariantSummary>,
    /// Entrywise `max |U_three_step - U_single_pulse|`.
    pub max_entry_difference: f64,
}

pub fn summarize(form: &EigengateForm, hk: &Operator, hz: &Operator) -> Result<VariantSummary> {
    let phases = phase_table(form)?;
    Ok(VariantSummary {
        variant: form.variant,
        unitarity: form.unitary.unitarity_deviation(),
        min_overlap: phases.iter().map(|p| p.overlap).fold(f64::INFINITY, f64::min),
        max_phase_error: phases.iter().map(|p| p.phase_error).fold(0.0, f64::max),
        intertwining: check_intertwining(form, hk, hz)?,
        phases,
    })
}

/// Both constructions side by side on the clean chain.
pub fn compare_forms(n_qubits: usize, j: f64) -> Result<FormComparison> {
    let spec = ChainSpec::krawtchouk(n_qubits, j)?;
    let hk = build_hk(&spec)?;
    let hz = build_hz(n_qubits, j)?;
    let three = build_eigengate(&spec, EigengateVariant::ThreeStep)?;
    let single = build_eigengate(&spec, EigengateVariant::SinglePulse)?;
    Ok(FormComparison {
        n_qubits,
        max_entry_difference: three.unitary.max_abs_diff(&single.unitary)?,
        variants: vec![summarize(&three, &hk, &hz)?, summarize(&single, &hk, &hz)?],
    })
}

/// Apply the dense eigengate to a state, then read its overlap with a target eigenstate.
pub fn map_basis_state(form: &EigengateForm, bits: &str) -> Result<StateVector> {
    form.unitary.apply(&StateVector::from_bits(bits)?)
}

/// `exp(-i pi/J H^Z)` factorised as `(x)_x diag(1, e^{-i pi (x - n/2)})`.
pub fn hz_pulse_single_qubit_factors(n_qubits: usize) -> Vec<[C64; 2]> {
    let half = (n_qubits as f64 - 1.0) / 2.0;
    (0..n_qubits).map(|x| [ONE, C64::cis(-PI * (x as f64 - half))]).collect()
}
