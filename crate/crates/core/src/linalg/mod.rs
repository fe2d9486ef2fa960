//! Dense complex linear algebra on the `2^N` computational basis.
//!
//! Basis ordering: qubit `x = 0` is the leftmost symbol of a ket string and
//! the most significant bit, so `|b_0 b_1 ... b_n>` has index
//! `sum_x b_x 2^(n-x)`. `|1>` is the excited state; `sigma^- = (X - iY)/2`
//! maps `|0>` to `|1>`.

mod sectors;

pub use sectors::{BlockEigh, BlockOperator, Partition};

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use faer::{Mat, Side};

use crate::error::{Error, Result};

pub type C64 = faer::c64;

/// Tolerance for construction checks (hermiticity, normalisation).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for unitarity and operator-equivalence checks.
pub const EQUIVALENCE_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `i^k` for any integer `k`, exact.
pub fn i_pow(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Number of qubits for a power-of-two dimension.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Basis index of the ket whose excited qubits are `sites`.
pub fn basis_index(sites: &[usize], n_qubits: usize) -> usize {
    sites.iter().fold(0, |acc, &x| acc | (1 << (n_qubits - 1 - x)))
}

/// Basis index of a ket string such as `"111101"`.
pub fn index_from_bits(bits: &str) -> Result<usize> {
    let n = bits.len();
    let mut idx = 0usize;
    for (x, ch) in bits.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => idx |= 1 << (n - 1 - x),
            other => return Err(Error::invalid(format!("bad ket symbol `{other}` in `{bits}`"))),
        }
    }
    Ok(idx)
}

/// Occupation of qubit `x` in basis state `index`.
#[inline]
pub fn bit(index: usize, x: usize, n_qubits: usize) -> bool {
    (index >> (n_qubits - 1 - x)) & 1 == 1
}

/// Ket string of a basis index.
pub fn bits_of(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).map(|x| if bit(index, x, n_qubits) { '1' } else { '0' }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        qubit_count(amps.len())?;
        Ok(Self { amps })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![ZERO; dim])
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut v = Self::zeros(dim)?;
        v.amps[index] = ONE;
        Ok(v)
    }

    pub fn from_bits(bits: &str) -> Result<Self> {
        Self::basis(1 << bits.len(), index_from_bits(bits)?)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < CONSTRUCTION_TOL
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn scaled(mut self, z: C64) -> Self {
        self.amps.iter_mut().for_each(|a| *a *= z);
        self
    }

    /// Tensor product `self (x) other`, `self` on the leading qubits.
    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A dense complex square matrix. Hamiltonians and unitaries share this
/// type; which role a matrix plays is checked by [`Operator::is_hermitian`]
/// and [`Operator::is_unitary`].
#[derive(Clone)]
pub struct Operator {
    mat: Mat<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim(), self.dim())?;
        if self.dim() <= 8 {
            for i in 0..self.dim() {
                let row: Vec<String> = (0..self.dim())
                    .map(|j| {
                        let z = self.mat[(i, j)];
                        format!("{:+.4}{:+.4}i", z.re, z.im)
                    })
                    .collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
        }
        Ok(())
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self { mat: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Mat::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { mat: Mat::from_fn(dim, dim, f) }
    }

    pub fn from_mat(mat: Mat<C64>) -> Result<Self> {
        check_dim(mat.nrows(), mat.ncols())?;
        Ok(Self { mat })
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            check_dim(dim, r.len())?;
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { c(entries[i], 0.0) } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.mat[(i, j)] = z;
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint().to_owned() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self::from_fn(self.dim(), |i, j| self.mat[(i, j)] * z)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    /// Largest entrywise `|a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        let mut m = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        Ok(m)
    }

    /// Largest `|M - M^dag|` entry.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                m = m.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_asymmetry() < CONSTRUCTION_TOL * self.max_abs().max(1.0)
    }

    /// Largest `|U^dag U - 1|` entry.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint().matmul(self);
        p.max_abs_diff(&Operator::identity(self.dim())).unwrap_or(f64::INFINITY)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() < EQUIVALENCE_TOL
    }

    pub fn matmul(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim(), other.dim(), "operator dimension mismatch");
        Operator { mat: &self.mat * &other.mat }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), state.dim())?;
        let d = self.dim();
        let mut out = vec![ZERO; d];
        for (j, &a) in state.amps().iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let col = self.mat.col(j);
            for (o, &m) in out.iter_mut().zip(col.iter()) {
                *o += m * a;
            }
        }
        StateVector::new(out)
    }

    /// Column `j`, i.e. the image of basis state `j`.
    pub fn column(&self, j: usize) -> StateVector {
        StateVector { amps: self.mat.col(j).iter().copied().collect() }
    }

    /// `<bra| self |ket>`.
    pub fn expectation(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        bra.inner(&self.apply(ket)?)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        let (a, b) = (self.dim(), other.dim());
        Operator::from_fn(a * b, |i, j| self.mat[(i / b, j / b)] * other.mat[(i % b, j % b)])
    }

    /// `Tr(self^dag other)`.
    pub fn overlap_trace(&self, other: &Operator) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        let d = self.dim();
        let mut acc = ZERO;
        for j in 0..d {
            for i in 0..d {
                acc += self.mat[(i, j)].conj() * other.mat[(i, j)];
            }
        }
        Ok(acc)
    }

    /// Global-phase-invariant distance `1 - |Tr(self^dag other)| / dim`.
    pub fn phase_invariant_distance(&self, other: &Operator) -> Result<f64> {
        Ok(1.0 - self.overlap_trace(other)?.norm() / self.dim() as f64)
    }

    /// Gate error `1 - |Tr(target actual^dag)| / dim`, with `self` the target.
    pub fn trace_error(&self, actual: &Operator) -> Result<f64> {
        // |Tr(T U^dag)| = |Tr(T^dag U)|
        self.phase_invariant_distance(actual)
    }

    /// Restriction to the rows and columns listed in `indices`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat<C64> {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.mat[(rows[i], cols[j])])
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.mat[(i, j)].norm() <= tol))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        self.mat += &rhs.mat;
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Eigenvalues ascending, eigenvectors as orthonormal columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

impl Eigh {
    /// `V f(Lambda) V^dag` for a scalar function of the eigenvalues.
    pub fn reconstruct(&self, f: impl Fn(f64) -> C64) -> Operator {
        Operator { mat: spectral_apply(self.vectors.mat(), &self.values, f) }
    }

    /// `exp(-i H t)`.
    pub fn exp(&self, t: f64) -> Operator {
        self.reconstruct(|l| C64::cis(-l * t))
    }

    /// Largest column norm of `H V - V Lambda`.
    pub fn residual(&self, h: &Operator) -> f64 {
        let hv = h.mat() * self.vectors.mat();
        let d = h.dim();
        (0..d)
            .map(|k| {
                (0..d)
                    .map(|i| (hv[(i, k)] - self.vectors.get(i, k) * self.values[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn spectral_apply(v: &Mat<C64>, values: &[f64], f: impl Fn(f64) -> C64) -> Mat<C64> {
    let d = v.nrows();
    let scaled = Mat::from_fn(d, d, |i, k| v[(i, k)] * f(values[k]));
    &scaled * v.adjoint()
}

/// Hermitian eigendecomposition of a raw matrix; rejects non-Hermitian input.
pub(crate) fn eigh_mat(h: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let d = h.nrows();
    check_dim(d, h.ncols())?;
    let mut asym = 0.0f64;
    let mut scale = 1.0f64;
    let mut real = true;
    for j in 0..d {
        for i in 0..d {
            let z = h[(i, j)];
            scale = scale.max(z.norm());
            if z.im != 0.0 {
                real = false;
            }
            if i <= j {
                asym = asym.max((z - h[(j, i)].conj()).norm());
            }
        }
    }
    if asym > CONSTRUCTION_TOL * scale {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    if d == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if real {
        let a = Mat::<f64>::from_fn(d, d, |i, j| 0.5 * (h[(i, j)].re + h[(j, i)].re));
        let e = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let values = (0..d).map(|k| e.S()[k]).collect();
        let u = e.U();
        Ok((values, Mat::from_fn(d, d, |i, k| c(u[(i, k)], 0.0))))
    } else {
        let a = Mat::<C64>::from_fn(d, d, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
        let e = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let values = (0..d).map(|k| e.S()[k].re).collect();
        Ok((values, e.U().to_owned()))
    }
}

pub fn hermitian_eigendecompose(h: &Operator) -> Result<Eigh> {
    let (values, vectors) = eigh_mat(h.mat())?;
    Ok(Eigh { values, vectors: Operator { mat: vectors } })
}

/// `exp(-i H t)` through the exact eigendecomposition of `H`.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    Ok(hermitian_eigendecompose(h)?.exp(t))
}

/// Embed `op` (acting on `sites.len()` qubits, `sites[0]` most significant)
/// into an `n_qubits` register, identity elsewhere.
pub fn tensor_embed(op: &Operator, sites: &[usize], n_qubits: usize) -> Result<Operator> {
    let k = sites.len();
    check_dim(1 << k, op.dim())?;
    for (i, &s) in sites.iter().enumerate() {
        if s >= n_qubits {
            return Err(Error::SiteOutOfRange { site: s, n_qubits });
        }
        if sites[..i].contains(&s) {
            return Err(Error::DuplicateSite(s));
        }
    }
    let dim = 1usize << n_qubits;
    let site_mask = sites.iter().fold(0usize, |m, &s| m | (1 << (n_qubits - 1 - s)));
    let local = |g: usize| -> usize {
        sites
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | ((g >> (n_qubits - 1 - s)) & 1))
    };
    let mut out = Operator::zeros(dim);
    for col in 0..dim {
        let rest = col & !site_mask;
        let lc = local(col);
        for lr in 0..(1usize << k) {
            let z = op.get(lr, lc);
            if z == ZERO {
                continue;
            }
            let mut row = rest;
            for (b, &s) in sites.iter().enumerate() {
                if (lr >> (k - 1 - b)) & 1 == 1 {
                    row |= 1 << (n_qubits - 1 - s);
                }
            }
            out.mat[(row, col)] = z;
        }
    }
    Ok(out)
}

/// Single-qubit and two-qubit building blocks.
pub mod paulis {
    use super::{c, Operator, ONE, ZERO};

    pub fn identity() -> Operator {
        Operator::identity(2)
    }

    pub fn x() -> Operator {
        Operator::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]).unwrap()
    }

    pub fn y() -> Operator {
        Operator::from_rows(&[&[ZERO, c(0.0, -1.0)], &[c(0.0, 1.0), ZERO]]).unwrap()
    }

    pub fn z() -> Operator {
        Operator::real_diagonal(&[1.0, -1.0])
    }

    /// `(X - iY)/2`: `|0> -> |1>`.
    pub fn sigma_minus() -> Operator {
        Operator::from_rows(&[&[ZERO, ZERO], &[ONE, ZERO]]).unwrap()
    }

    /// `(X + iY)/2`: `|1> -> |0>`.
    pub fn sigma_plus() -> Operator {
        Operator::from_rows(&[&[ZERO, ONE], &[ZERO, ZERO]]).unwrap()
    }

    /// `(1 - Z)/2`, the excitation number of one qubit.
    pub fn number() -> Operator {
        Operator::real_diagonal(&[0.0, 1.0])
    }

    pub fn hadamard() -> Operator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Operator::from_rows(&[&[c(s, 0.0), c(s, 0.0)], &[c(s, 0.0), c(-s, 0.0)]]).unwrap()
    }

    /// `diag(1, e^{i phi})`.
    pub fn phase(phi: f64) -> Operator {
        Operator::diagonal(&[ONE, super::C64::cis(phi)])
    }

    pub fn swap() -> Operator {
        Operator::from_fn(4, |i, j| {
            let perm = [0usize, 2, 1, 3];
            if perm[j] == i {
                ONE
            } else {
                ZERO
            }
        })
    }

    /// CNOT with the first (most significant) qubit as control.
    pub fn cnot() -> Operator {
        Operator::from_fn(4, |i, j| {
            let perm = [0usize, 1, 3, 2];
            if perm[j] == i {
                ONE
            } else {
                ZERO
            }
        })
    }
}
