//! Chain Hamiltonians: general XX+YY couplings with local fields, the
//! Krawtchouk chain `H^K`, its diagonal dual `H^Z`, and the two-site driving
//! operators.
//!
//! Hopping normalisation: `(J_x/2)(X_x X_{x+1} + Y_x Y_{x+1})` equals
//! `J_x (sigma^+_x sigma^-_{x+1} + h.c.)`, so the one-excitation block is the
//! tridiagonal matrix with off-diagonals `J_x`. With the Krawtchouk couplings
//! this block has spectrum `J(k - n/2)` and its `+lambda_k` eigenvector is the
//! Krawtchouk vector `phi_k` itself (no `k -> n-k` reversal).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bit, c, BlockOperator, Operator, Partition, C64, I, ZERO};

/// A controllable chain: couplings `J_x` on bonds, fields on sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(default)]
    pub couplings: Vec<f64>,
    #[serde(default)]
    pub zfields: Vec<f64>,
    #[serde(default)]
    pub noise_eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xfields: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub yfields: Vec<f64>,
}

impl ChainSpec {
    /// Clean Krawtchouk chain with zero fields.
    pub fn krawtchouk(n_qubits: usize, j: f64) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::invalid(format!("a chain needs N >= 2 qubits, got {n_qubits}")));
        }
        let spec = Self {
            n_qubits,
            j,
            couplings: krawtchouk_couplings(n_qubits - 1, j)?,
            zfields: vec![0.0; n_qubits],
            noise_eps: 0.0,
            seed: 0,
            xfields: Vec::new(),
            yfields: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_noise(mut self, eps: f64, seed: u64) -> Self {
        self.noise_eps = eps;
        self.seed = seed;
        self
    }

    /// Fill omitted couplings with Krawtchouk values and omitted fields with zeros.
    pub fn with_defaults(mut self) -> Result<Self> {
        if self.couplings.is_empty() && self.n_qubits >= 2 {
            self.couplings = krawtchouk_couplings(self.n_qubits - 1, self.j)?;
        }
        if self.zfields.is_empty() {
            self.zfields = vec![0.0; self.n_qubits];
        }
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<Self>(text)?.with_defaults()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n < 2 {
            return Err(Error::invalid(format!("a chain needs N >= 2 qubits, got {n}")));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::invalid(format!("J must be positive, got {}", self.j)));
        }
        if self.couplings.len() != n - 1 {
            return Err(Error::invalid(format!(
                "expected {} couplings for N = {n}, got {}",
                n - 1,
                self.couplings.len()
            )));
        }
        if self.zfields.len() != n {
            return Err(Error::invalid(format!("expected {n} zfields, got {}", self.zfields.len())));
        }
        for (name, f) in [("xfields", &self.xfields), ("yfields", &self.yfields)] {
            if !f.is_empty() && f.len() != n {
                return Err(Error::invalid(format!("expected {n} {name}, got {}", f.len())));
            }
        }
        if !(0.0..1.0).contains(&self.noise_eps) {
            return Err(Error::invalid(format!("noise_eps must lie in [0, 1), got {}", self.noise_eps)));
        }
        let all = self.couplings.iter().chain(&self.zfields).chain(&self.xfields).chain(&self.yfields);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite coupling or field"));
        }
        Ok(())
    }

    /// `n = N - 1`, the Krawtchouk index range.
    pub fn n(&self) -> usize {
        self.n_qubits - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriveSign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl DriveSign {
    pub fn symbol(self) -> char {
        match self {
            DriveSign::Plus => '+',
            DriveSign::Minus => '-',
        }
    }
}

impl std::str::FromStr for DriveSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(DriveSign::Plus),
            "-" | "minus" => Ok(DriveSign::Minus),
            other => Err(Error::invalid(format!("drive sign must be + or -, got `{other}`"))),
        }
    }
}

/// One two-site drive term `H_D^(j, sign)` with strength, frequency and phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingSpec {
    pub j: usize,
    pub d: usize,
    pub sign: DriveSign,
    #[serde(rename = "J_D")]
    pub j_d: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DrivingSpec {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("drive separation d must be positive"));
        }
        if self.j + self.d >= n_qubits {
            return Err(Error::SiteOutOfRange { site: self.j + self.d, n_qubits });
        }
        if !(self.j_d.is_finite() && self.omega.is_finite() && self.phase.is_finite()) {
            return Err(Error::invalid("non-finite drive parameter"));
        }
        Ok(())
    }

    /// `cos(omega t + phase)`.
    pub fn envelope(&self, t: f64) -> f64 {
        (self.omega * t + self.phase).cos()
    }
}

/// `J^K_x = -(J/2) sqrt((x+1)(n-x))` for `x = 0..n-1`.
pub fn krawtchouk_couplings(n: usize, j: f64) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::invalid("Krawtchouk couplings need n >= 1"));
    }
    Ok((0..n).map(|x| -0.5 * j * (((x + 1) * (n - x)) as f64).sqrt()).collect())
}

/// A Hamiltonian as a list of matrix entries, duplicates summed on assembly.
#[derive(Clone, Debug, Default)]
pub struct SparseHamiltonian {
    n_qubits: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseHamiltonian {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, entries: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn push(&mut self, row: usize, col: usize, z: C64) {
        if z != ZERO {
            self.entries.push((row, col, z));
        }
    }

    /// Adds `a sigma^+_p sigma^-_q + conj(a) sigma^-_p sigma^+_q`.
    pub fn add_hopping(&mut self, p: usize, q: usize, a: C64) {
        let n = self.n_qubits;
        let (mp, mq) = (1usize << (n - 1 - p), 1usize << (n - 1 - q));
        for col in 0..self.dim() {
            if bit(col, p, n) && !bit(col, q, n) {
                let row = col ^ mp ^ mq;
                self.push(row, col, a);
                self.push(col, row, a.conj());
            }
        }
    }

    /// Adds `sum_x w_x n_x` with `n_x = (1 - Z_x)/2`.
    pub fn add_number_field(&mut self, weights: &[f64]) {
        let n = self.n_qubits;
        for idx in 0..self.dim() {
            let e: f64 = (0..n).filter(|&x| bit(idx, x, n)).map(|x| weights[x]).sum();
            self.push(idx, idx, c(e, 0.0));
        }
    }

    /// Adds `sum_x g_x P_x` for a single-qubit Pauli `P` in {X, Y, Z}.
    fn add_pauli_field(&mut self, weights: &[f64], pauli: char) {
        let n = self.n_qubits;
        for idx in 0..self.dim() {
            for (x, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let excited = bit(idx, x, n);
                match pauli {
                    'Z' => self.push(idx, idx, c(if excited { -w } else { w }, 0.0)),
                    'X' => self.push(idx ^ (1 << (n - 1 - x)), idx, c(w, 0.0)),
                    _ => {
                        // Y|0> = i|1>, Y|1> = -i|0>
                        let z = if excited { c(0.0, -w) } else { c(0.0, w) };
                        self.push(idx ^ (1 << (n - 1 - x)), idx, z);
                    }
                }
            }
        }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.entries.iter_mut().for_each(|e| e.2 *= s);
        self
    }

    pub fn extend(&mut self, other: &SparseHamiltonian) {
        assert_eq!(self.n_qubits, other.n_qubits, "qubit count mismatch");
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn to_operator(&self) -> Operator {
        let mut op = Operator::zeros(self.dim());
        for &(i, j, z) in &self.entries {
            op.set(i, j, op.get(i, j) + z);
        }
        op
    }

    /// Assemble per excitation sector; fails on any sector-changing entry.
    pub fn to_blocks(&self, partition: &Arc<Partition>) -> Result<BlockOperator> {
        let mut blocks: Vec<faer::Mat<C64>> = (0..partition.n_sectors())
            .map(|s| {
                let m = partition.sector(s).len();
                faer::Mat::zeros(m, m)
            })
            .collect();
        for &(i, j, z) in &self.entries {
            let (si, oi) = partition.locate(i);
            let (sj, oj) = partition.locate(j);
            if si != sj {
                return Err(Error::NotNumberConserving(z.norm()));
            }
            blocks[si][(oi, oj)] += z;
        }
        BlockOperator::from_blocks(Arc::clone(partition), blocks)
    }
}

/// `sum_x (J_x/2)(X_x X_{x+1} + Y_x Y_{x+1})` with the chain's couplings.
pub fn hk_terms(spec: &ChainSpec) -> Result<SparseHamiltonian> {
    spec.validate()?;
    let mut h = SparseHamiltonian::new(spec.n_qubits);
    for (x, &jx) in spec.couplings.iter().enumerate() {
        h.add_hopping(x, x + 1, c(jx, 0.0));
    }
    Ok(h)
}

pub fn build_hk(spec: &ChainSpec) -> Result<Operator> {
    Ok(hk_terms(spec)?.to_operator())
}

/// Full chain Hamiltonian: couplings plus `alpha X + beta Y + gamma Z` fields.
pub fn chain_terms(spec: &ChainSpec) -> Result<SparseHamiltonian> {
    let mut h = hk_terms(spec)?;
    h.add_pauli_field(&spec.zfields, 'Z');
    h.add_pauli_field(&spec.xfields, 'X');
    h.add_pauli_field(&spec.yfields, 'Y');
    Ok(h)
}

pub fn build_chain_hamiltonian(spec: &ChainSpec) -> Result<Operator> {
    Ok(chain_terms(spec)?.to_operator())
}

/// Site energies of `H^Z`: `J (x - n/2)`.
pub fn hz_site_energies(n_qubits: usize, j: f64) -> Vec<f64> {
    let half = (n_qubits as f64 - 1.0) / 2.0;
    (0..n_qubits).map(|x| j * (x as f64 - half)).collect()
}

/// `(J/2) sum_x (x - n/2)(1 - Z_x)`, diagonal.
pub fn hz_terms(n_qubits: usize, j: f64) -> Result<SparseHamiltonian> {
    if n_qubits < 2 {
        return Err(Error::invalid(format!("H^Z needs N >= 2, got {n_qubits}")));
    }
    let mut h = SparseHamiltonian::new(n_qubits);
    h.add_number_field(&hz_site_energies(n_qubits, j));
    Ok(h)
}

pub fn build_hz(n_qubits: usize, j: f64) -> Result<Operator> {
    Ok(hz_terms(n_qubits, j)?.to_operator())
}

/// Diagonal of `H^Z` in the computational basis.
pub fn hz_diagonal(n_qubits: usize, j: f64) -> Vec<f64> {
    let e = hz_site_energies(n_qubits, j);
    (0..1usize << n_qubits)
        .map(|idx| (0..n_qubits).filter(|&x| bit(idx, x, n_qubits)).map(|x| e[x]).sum())
        .collect()
}

/// Time-independent part of a drive: `J_D [s+ s- + s- s+]` or `i J_D [s+ s- - s- s+]`.
pub fn driving_terms(spec: &DrivingSpec, n_qubits: usize) -> Result<SparseHamiltonian> {
    spec.validate(n_qubits)?;
    let a = match spec.sign {
        DriveSign::Plus => c(spec.j_d, 0.0),
        DriveSign::Minus => I * spec.j_d,
    };
    let mut h = SparseHamiltonian::new(n_qubits);
    h.add_hopping(spec.j, spec.j + spec.d, a);
    Ok(h)
}

pub fn driving_operator(spec: &DrivingSpec, n_qubits: usize) -> Result<Operator> {
    Ok(driving_terms(spec, n_qubits)?.to_operator())
}

/// `H_D^(j, sign)(t) = cos(omega t + phase) * driving_operator`.
pub fn build_driving(spec: &DrivingSpec, n_qubits: usize, t: f64) -> Result<Operator> {
    Ok(driving_operator(spec, n_qubits)?.scale_real(spec.envelope(t)))
}

/// Quenched multiplicative noise `J_x -> (1 + eps_x) J_x`, `eps_x ~ U[-eps, eps]`.
/// Fields are left exact. The returned spec keeps `noise_eps` and `seed` as a record.
pub fn apply_coupling_noise(spec: &ChainSpec) -> Result<ChainSpec> {
    spec.validate()?;
    let mut out = spec.clone();
    let eps = spec.noise_eps;
    if eps == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for jx in &mut out.couplings {
        *jx *= 1.0 + rng.random_range(-eps..=eps);
    }
    Ok(out)
}

/// Single-particle hopping matrix: tridiagonal with off-diagonals `J_x`.
pub fn hopping_matrix(couplings: &[f64]) -> Operator {
    let m = couplings.len() + 1;
    Operator::from_fn(m, |r, s| {
        if s == r + 1 {
            c(couplings[r], 0.0)
        } else if r == s + 1 {
            c(couplings[s], 0.0)
        } else {
            ZERO
        }
    })
}

/// One-excitation block of a dense operator, ordered by site `x = 0..N-1`.
pub fn one_excitation_block(op: &Operator, n_qubits: usize) -> Operator {
    let idx: Vec<usize> = (0..n_qubits).map(|x| 1usize << (n_qubits - 1 - x)).collect();
    let sub = op.submatrix(&idx, &idx);
    Operator::from_fn(n_qubits, |i, j| sub[(i, j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigendecompose, paulis, tensor_embed};

    fn total_z(n: usize) -> Operator {
        let mut z = Operator::zeros(1 << n);
        for x in 0..n {
            z += &tensor_embed(&paulis::z(), &[x], n).unwrap();
        }
        z
    }

    fn parity(n: usize) -> Operator {
        let mut p = Operator::identity(1 << n);
        for x in 0..n {
            p = p.matmul(&tensor_embed(&paulis::z(), &[x], n).unwrap());
        }
        p
    }

    /// Independent construction straight from Pauli products.
    fn hk_from_paulis(spec: &ChainSpec) -> Operator {
        let pair = &paulis::x().kron(&paulis::x()) + &paulis::y().kron(&paulis::y());
        let mut h = Operator::zeros(1 << spec.n_qubits);
        for (x, &jx) in spec.couplings.iter().enumerate() {
            h += &tensor_embed(&pair, &[x, x + 1], spec.n_qubits).unwrap().scale_real(jx / 2.0);
        }
        h
    }

    #[test]
    fn couplings_match_formula() {
        assert_eq!(krawtchouk_couplings(1, 1.0).unwrap(), vec![-0.5]);
        let k3 = krawtchouk_couplings(3, 1.0).unwrap();
        let r3 = 3f64.sqrt() / 2.0;
        for (a, b) in k3.iter().zip([-r3, -1.0, -r3]) {
            assert!((a - b).abs() < 1e-15);
        }
        let k5 = krawtchouk_couplings(5, 2.0).unwrap();
        let max = k5.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((max - 3.0).abs() < 1e-15);
        assert!(krawtchouk_couplings(0, 1.0).is_err());
    }

    #[test]
    fn hk_two_sites() {
        let spec = ChainSpec::krawtchouk(2, 1.0).unwrap();
        let h = build_hk(&spec).unwrap();
        let expected = Operator::from_fn(4, |i, j| if (i, j) == (1, 2) || (i, j) == (2, 1) { c(-0.5, 0.0) } else { ZERO });
        assert_eq!(h.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn hk_matches_pauli_construction() {
        for n in 2..=6 {
            let spec = ChainSpec::krawtchouk(n, 1.3).unwrap().with_noise(0.2, 9);
            let spec = apply_coupling_noise(&spec).unwrap();
            let d = build_hk(&spec).unwrap().max_abs_diff(&hk_from_paulis(&spec)).unwrap();
            assert!(d < 1e-15, "N = {n}: {d}");
        }
    }

    #[test]
    fn hk_one_excitation_spectrum() {
        let spec = ChainSpec::krawtchouk(4, 1.0).unwrap();
        let block = one_excitation_block(&build_hk(&spec).unwrap(), 4);
        assert!(block.max_abs_diff(&hopping_matrix(&spec.couplings)).unwrap() < 1e-12);
        let e = hermitian_eigendecompose(&block).unwrap();
        for (l, want) in e.values.iter().zip([-1.5, -0.5, 0.5, 1.5]) {
            assert!((l - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hz_values() {
        let hz = build_hz(2, 1.0).unwrap();
        let expected = Operator::real_diagonal(&[0.0, 0.5, -0.5, 0.0]);
        assert!(hz.max_abs_diff(&expected).unwrap() < 1e-15);
        let d4 = hz_diagonal(4, 1.0);
        assert!((d4[0b0001] - 1.5).abs() < 1e-15);
        assert!((d4[0b1100] + 2.0).abs() < 1e-15);
        let dense = build_hz(4, 1.0).unwrap();
        for (i, v) in d4.iter().enumerate() {
            assert!((dense.get(i, i).re - v).abs() < 1e-15);
        }
    }

    #[test]
    fn hz_equals_pauli_form() {
        let n = 5;
        let j = 0.8;
        let mut want = Operator::zeros(1 << n);
        let one_minus_z = &Operator::identity(2) - &paulis::z();
        for x in 0..n {
            let w = 0.5 * j * (x as f64 - (n as f64 - 1.0) / 2.0);
            want += &tensor_embed(&one_minus_z, &[x], n).unwrap().scale_real(w);
        }
        assert!(build_hz(n, j).unwrap().max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn driving_examples() {
        let plus = DrivingSpec { j: 0, d: 1, sign: DriveSign::Plus, j_d: 0.7, omega: 2.0, phase: 0.0 };
        let h = build_driving(&plus, 2, 0.0).unwrap();
        assert!((h.get(1, 2).re - 0.7).abs() < 1e-15 && (h.get(2, 1).re - 0.7).abs() < 1e-15);
        let zero = build_driving(&plus, 2, std::f64::consts::FRAC_PI_4).unwrap();
        assert!(zero.max_abs() < 1e-15);
        let minus = DrivingSpec { j: 1, d: 3, sign: DriveSign::Minus, j_d: 1.1, omega: 9.0, phase: 0.3 };
        let h = build_driving(&minus, 6, 0.4).unwrap();
        assert!(h.is_hermitian());
        assert!(h.max_abs() > 0.0);
        for i in 0..64 {
            for k in 0..64 {
                assert_eq!(h.get(i, k).re, 0.0);
            }
        }
    }

    #[test]
    fn driving_rejects_bad_sites() {
        let bad = DrivingSpec { j: 3, d: 3, sign: DriveSign::Plus, j_d: 1.0, omega: 1.0, phase: 0.0 };
        assert!(build_driving(&bad, 6, 0.0).is_err());
    }

    #[test]
    fn symmetries() {
        for n in 2..=6 {
            let spec = ChainSpec::krawtchouk(n, 1.0).unwrap();
            let hk = build_hk(&spec).unwrap();
            let zt = total_z(n);
            assert_eq!(hk.commutator(&zt).max_abs(), 0.0);
            assert!(hk.commutator(&parity(n)).max_abs() < 1e-15);
            let sm = tensor_embed(&paulis::sigma_minus(), &[0], n).unwrap();
            let anti = &parity(n).matmul(&sm) + &sm.matmul(&parity(n));
            assert!(anti.max_abs() < 1e-15);
            let drive = DrivingSpec { j: 0, d: n - 1, sign: DriveSign::Minus, j_d: 1.0, omega: 1.0, phase: 0.0 };
            assert_eq!(driving_operator(&drive, n).unwrap().commutator(&zt).max_abs(), 0.0);
        }
    }

    #[test]
    fn noise_is_bounded_and_seeded() {
        let base = ChainSpec::krawtchouk(8, 1.0).unwrap();
        assert_eq!(apply_coupling_noise(&base).unwrap(), base);
        let a = apply_coupling_noise(&base.clone().with_noise(0.01, 5)).unwrap();
        let b = apply_coupling_noise(&base.clone().with_noise(0.01, 5)).unwrap();
        let other = apply_coupling_noise(&base.clone().with_noise(0.01, 6)).unwrap();
        assert_eq!(a.couplings, b.couplings);
        assert_ne!(a.couplings, other.couplings);
        for (n, c0) in a.couplings.iter().zip(&base.couplings) {
            assert!((n / c0 - 1.0).abs() <= 0.01 + 1e-15);
        }
        assert_eq!(a.zfields, base.zfields);
    }

    #[test]
    fn blocks_match_dense() {
        let spec = ChainSpec::krawtchouk(5, 1.0).unwrap();
        let p = Arc::new(Partition::excitation(5));
        let h = hk_terms(&spec).unwrap();
        assert_eq!(h.to_blocks(&p).unwrap().to_dense().max_abs_diff(&h.to_operator()).unwrap(), 0.0);
        let mut with_x = spec.clone();
        with_x.xfields = vec![0.1; 5];
        assert!(chain_terms(&with_x).unwrap().to_blocks(&p).is_err());
    }

    #[test]
    fn chain_fields_match_paulis() {
        let mut spec = ChainSpec::krawtchouk(3, 1.0).unwrap();
        spec.zfields = vec![0.1, -0.2, 0.3];
        spec.xfields = vec![0.4, 0.0, -0.5];
        spec.yfields = vec![0.0, 0.6, 0.7];
        let mut want = hk_from_paulis(&spec);
        for x in 0..3 {
            want += &tensor_embed(&paulis::z(), &[x], 3).unwrap().scale_real(spec.zfields[x]);
            want += &tensor_embed(&paulis::x(), &[x], 3).unwrap().scale_real(spec.xfields[x]);
            want += &tensor_embed(&paulis::y(), &[x], 3).unwrap().scale_real(spec.yfields[x]);
        }
        let got = build_chain_hamiltonian(&spec).unwrap();
        assert!(got.max_abs_diff(&want).unwrap() < 1e-15);
        assert!(got.is_hermitian());
    }

    #[test]
    fn json_round_trip_uses_short_names() {
        let spec = ChainSpec::krawtchouk(3, 1.0).unwrap().with_noise(0.01, 42);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"N\":3") && text.contains("\"noise_eps\"") && !text.contains("xfields"));
        assert_eq!(ChainSpec::from_json(&text).unwrap(), spec);
        let minimal = ChainSpec::from_json(r#"{"N": 4, "J": 1.0}"#).unwrap();
        assert_eq!(minimal.couplings.len(), 3);
        let drive: DrivingSpec =
            serde_json::from_str(r#"{"j":1,"d":3,"sign":"-","J_D":0.5,"omega":9.0,"phase":0.0}"#).unwrap();
        assert_eq!(drive.sign, DriveSign::Minus);
        assert!(ChainSpec::from_json(r#"{"N": 4, "J": 1.0, "couplings": [1.0]}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn random_chains_are_hermitian_and_conserving(
            n in 2usize..=5,
            seed in 0u64..1000,
            eps in 0.0f64..0.5,
        ) {
            let spec = ChainSpec::krawtchouk(n, 1.0).unwrap().with_noise(eps, seed);
            let mut spec = apply_coupling_noise(&spec).unwrap();
            spec.zfields = (0..n).map(|x| 0.1 * x as f64 - 0.2).collect();
            let h = build_chain_hamiltonian(&spec).unwrap();
            proptest::prop_assert!(h.hermitian_asymmetry() < 1e-12);
            proptest::prop_assert_eq!(h.commutator(&total_z(n)).max_abs(), 0.0);
        }
    }
}
