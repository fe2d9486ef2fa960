//! Krawtchouk polynomials, the single-particle eigenbasis of the Krawtchouk
//! chain, free-fermion many-body eigenstates, and the driving matrix elements
//! `M^(1)`, `M^(2)` both by brute force and through exact minors.

use std::f64::consts::{FRAC_PI_2, LN_2};

use faer::Mat;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{basis_index, bit, c, i_pow, Operator, StateVector, C64, ZERO};

/// Largest `n` accepted by the exact integer routines.
pub const MAX_N: usize = 60;

/// Exact `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_N {
        return Err(Error::invalid(format!("n = {n} exceeds the supported maximum {MAX_N}")));
    }
    Ok(())
}

/// `K^(n)_{k,x} = sum_j (-1)^j C(x,j) C(n-x,k-j)`.
pub fn krawtchouk_poly(n: usize, k: usize, x: usize) -> Result<i128> {
    check_n(n)?;
    if k > n || x > n {
        return Err(Error::invalid(format!("Krawtchouk indices k = {k}, x = {x} outside 0..={n}")));
    }
    let mut acc: i128 = 0;
    for j in 0..=k.min(x) {
        if k - j > n - x {
            continue;
        }
        let term = (binomial(x, j) * binomial(n - x, k - j)) as i128;
        acc += if j % 2 == 0 { term } else { -term };
    }
    Ok(acc)
}

/// Single-particle eigenbasis data for an `N = n + 1` site chain.
#[derive(Clone, Debug)]
pub struct KrawtchoukBasis {
    pub n: usize,
    pub j: f64,
    /// `kmatrix[k][x] = K^(n)_{k,x}`.
    pub kmatrix: Vec<Vec<i128>>,
    /// `phi[k][x] = phi^(n)_{k,x}`: row `k` is the `lambda_k` eigenvector.
    pub phi: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
}

pub fn build_basis(n: usize, j: f64) -> Result<KrawtchoukBasis> {
    if n < 1 {
        return Err(Error::invalid("Krawtchouk basis needs n >= 1"));
    }
    check_n(n)?;
    let mut kmatrix = vec![vec![0i128; n + 1]; n + 1];
    for (k, row) in kmatrix.iter_mut().enumerate() {
        for (x, v) in row.iter_mut().enumerate() {
            *v = krawtchouk_poly(n, k, x)?;
        }
    }
    let two_n = (n as f64 * LN_2).exp();
    let phi = (0..=n)
        .map(|k| {
            (0..=n)
                .map(|x| {
                    let w = binomial(n, x) as f64 / (binomial(n, k) as f64 * two_n);
                    w.sqrt() * kmatrix[k][x] as f64
                })
                .collect()
        })
        .collect();
    let lambdas = (0..=n).map(|k| j * (k as f64 - n as f64 / 2.0)).collect();
    Ok(KrawtchoukBasis { n, j, kmatrix, phi, lambdas })
}

impl KrawtchoukBasis {
    pub fn n_qubits(&self) -> usize {
        self.n + 1
    }

    pub fn phi_matrix(&self) -> Operator {
        Operator::from_fn(self.n + 1, |k, x| c(self.phi[k][x], 0.0))
    }

    /// Largest entry of `phi phi^T - 1`.
    pub fn orthogonality_residual(&self) -> f64 {
        let m = self.n + 1;
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let dot: f64 = (0..m).map(|x| self.phi[a][x] * self.phi[b][x]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    pub fn symmetry_residual(&self) -> f64 {
        let m = self.n + 1;
        (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| (self.phi[a][b] - self.phi[b][a]).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|h phi_k - lambda_k phi_k|` over `k` for a single-particle matrix `h`.
    pub fn diagonalization_residual(&self, hopping: &Operator) -> f64 {
        let m = self.n + 1;
        let mut worst = 0.0f64;
        for k in 0..m {
            for r in 0..m {
                let hv: C64 = (0..m).map(|x| hopping.get(r, x) * self.phi[k][x]).sum();
                worst = worst.max((hv - c(self.lambdas[k] * self.phi[k][r], 0.0)).norm());
            }
        }
        worst
    }

    /// Exact integer minor of `K` on the given rows and columns.
    pub fn k_minor(&self, rows: &[usize], cols: &[usize]) -> BigInt {
        let m: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&x| BigInt::from(self.kmatrix[r][x])).collect())
            .collect();
        bareiss_det(m)
    }

    /// `ln` of the `phi` normalisation factor multiplying `det K[rows, cols]`.
    fn minor_log_weight(&self, rows: &[usize], cols: &[usize]) -> f64 {
        let n = self.n;
        let col_part: f64 = cols.iter().map(|&x| (binomial(n, x) as f64).ln()).sum();
        let row_part: f64 = rows.iter().map(|&k| (binomial(n, k) as f64).ln() + n as f64 * LN_2).sum();
        0.5 * (col_part - row_part)
    }

    /// `det phi[rows, cols]` from the exact `K` minor and the exact weights.
    pub fn phi_minor(&self, rows: &[usize], cols: &[usize]) -> f64 {
        let k = self.k_minor(rows, cols);
        if k.is_zero() {
            return 0.0;
        }
        let sign = if k.is_negative() { -1.0 } else { 1.0 };
        let ln_k = bigint_ln_abs(&k);
        sign * (ln_k + self.minor_log_weight(rows, cols)).exp()
    }

    /// `det phi[rows, cols]` in floating point.
    pub fn phi_minor_float(&self, rows: &[usize], cols: &[usize]) -> f64 {
        let m = Mat::<f64>::from_fn(rows.len(), cols.len(), |a, b| self.phi[rows[a]][cols[b]]);
        det_f64(m)
    }
}

fn bigint_ln_abs(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        v.abs().to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        // keep 64 leading bits
        let shift = bits - 64;
        let top: BigInt = v.abs() >> shift;
        top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * LN_2
    }
}

/// Fraction-free Gaussian elimination; exact for integer matrices.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let size = m.len();
    if size == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..size - 1 {
        if m[k][k].is_zero() {
            match (k + 1..size).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[size - 1][size - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Determinant by LU with partial pivoting.
pub fn det_f64(mut a: Mat<f64>) -> f64 {
    let m = a.nrows();
    let mut det = 1.0;
    for k in 0..m {
        let p = (k..m).max_by(|&r, &s| a[(r, k)].abs().total_cmp(&a[(s, k)].abs())).unwrap_or(k);
        if a[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            for col in 0..m {
                let t = a[(k, col)];
                a[(k, col)] = a[(p, col)];
                a[(p, col)] = t;
            }
            det = -det;
        }
        let piv = a[(k, k)];
        det *= piv;
        for r in k + 1..m {
            let f = a[(r, k)] / piv;
            if f != 0.0 {
                for col in k + 1..m {
                    a[(r, col)] -= f * a[(k, col)];
                }
            }
        }
    }
    det
}

/// Occupied mode (or site) indices, strictly ascending. As a computational
/// basis label, mode `k` occupied means qubit `k` is `|1>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModeSet {
    n: usize,
    occupied: Vec<usize>,
}

impl ModeSet {
    pub fn new(n: usize, occupied: Vec<usize>) -> Result<Self> {
        if occupied.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("mode indices must be strictly ascending: {occupied:?}")));
        }
        if let Some(&last) = occupied.last() {
            if last > n {
                return Err(Error::invalid(format!("mode {last} outside 0..={n}")));
            }
        }
        Ok(Self { n, occupied })
    }

    /// The modes labelled by a computational basis index of `n + 1` qubits.
    pub fn from_index(n: usize, index: usize) -> Self {
        let occupied = (0..=n).filter(|&x| bit(index, x, n + 1)).collect();
        Self { n, occupied }
    }

    /// Label string such as `"000111"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("empty mode label"));
        }
        let mut occupied = Vec::new();
        for (k, ch) in bits.chars().enumerate() {
            match ch {
                '1' => occupied.push(k),
                '0' => {}
                other => return Err(Error::invalid(format!("bad label symbol `{other}` in `{bits}`"))),
            }
        }
        Ok(Self { n: bits.len() - 1, occupied })
    }

    /// `q` ones followed by zeros: `|1^q 0^(N-q)>`.
    pub fn lower(n: usize, q: usize) -> Self {
        Self { n, occupied: (0..q).collect() }
    }

    /// zeros followed by `q` ones: `|0^(N-q) 1^q>`.
    pub fn upper(n: usize, q: usize) -> Self {
        Self { n, occupied: (n + 1 - q..=n).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn q(&self) -> usize {
        self.occupied.len()
    }

    pub fn index(&self) -> usize {
        basis_index(&self.occupied, self.n + 1)
    }

    pub fn bits(&self) -> String {
        (0..=self.n).map(|k| if self.occupied.contains(&k) { '1' } else { '0' }).collect()
    }
}

/// `sum_{k in modes} lambda_k`.
pub fn manybody_energy(basis: &KrawtchoukBasis, modes: &ModeSet) -> f64 {
    modes.occupied().iter().map(|&k| basis.lambdas[k]).sum()
}

/// Slater amplitude `det phi[modes, sites]`, both ascending.
pub fn slater_amplitude(basis: &KrawtchoukBasis, modes: &[usize], sites: &[usize]) -> f64 {
    match modes.len() {
        0 => 1.0,
        1 => basis.phi[modes[0]][sites[0]],
        _ => {
            let m = Mat::<f64>::from_fn(modes.len(), modes.len(), |a, b| basis.phi[modes[a]][sites[b]]);
            det_f64(m)
        }
    }
}

/// `c^dag_{k_1} ... c^dag_{k_q} |0>` on the full `2^N` space.
pub fn eigenstate_vector(basis: &KrawtchoukBasis, modes: &ModeSet) -> Result<StateVector> {
    if modes.n() != basis.n {
        return Err(Error::DimensionMismatch { expected: basis.n, found: modes.n() });
    }
    let nq = basis.n_qubits();
    let dim = 1usize << nq;
    let q = modes.q();
    let mut amps = vec![ZERO; dim];
    let mut sites = Vec::with_capacity(q);
    for (idx, a) in amps.iter_mut().enumerate() {
        if idx.count_ones() as usize != q {
            continue;
        }
        sites.clear();
        sites.extend((0..nq).filter(|&x| bit(idx, x, nq)));
        *a = c(slater_amplitude(basis, modes.occupied(), &sites), 0.0);
    }
    StateVector::new(amps)
}

/// Eigenvectors of the `q`-excitation sector as columns. Rows and columns are
/// both ordered by ascending basis index, the column label read as a mode set.
pub fn sector_eigenvectors(basis: &KrawtchoukBasis, q: usize) -> Mat<C64> {
    let nq = basis.n_qubits();
    let members: Vec<Vec<usize>> = (0..1usize << nq)
        .filter(|i| i.count_ones() as usize == q)
        .map(|i| (0..nq).filter(|&x| bit(i, x, nq)).collect())
        .collect();
    let m = members.len();
    Mat::from_fn(m, m, |r, s| c(slater_amplitude(basis, &members[s], &members[r]), 0.0))
}

/// `<bra| op |ket>` between Krawtchouk eigenstates.
pub fn matrix_element_bruteforce(
    basis: &KrawtchoukBasis,
    bra: &ModeSet,
    op: &Operator,
    ket: &ModeSet,
) -> Result<C64> {
    let b = eigenstate_vector(basis, bra)?;
    let k = eigenstate_vector(basis, ket)?;
    op.expectation(&b, &k)
}

/// Largest `|<s'| op |s>|` over eigenstates of the `q`-particle sector.
pub fn largest_sector_element(basis: &KrawtchoukBasis, op: &Operator, q: usize) -> Result<f64> {
    let nq = basis.n_qubits();
    let idx: Vec<usize> = (0..1usize << nq).filter(|i| i.count_ones() as usize == q).collect();
    let v = sector_eigenvectors(basis, q);
    let block = op.submatrix(&idx, &idx);
    let rotated = v.adjoint() * &block * &v;
    let mut worst = 0.0f64;
    for j in 0..idx.len() {
        for i in 0..idx.len() {
            worst = worst.max(rotated[(i, j)].norm());
        }
    }
    Ok(worst)
}

/// `(-2)^e` as an exact integer.
fn neg_two_pow(e: u32) -> BigInt {
    let v = BigInt::from(2).pow(e);
    if e % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Minor identity: computed exact value against a claimed value.
#[derive(Clone, Debug, Serialize)]
pub struct MinorIdentity {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub computed: String,
    pub claimed: String,
    pub holds: bool,
}

impl MinorIdentity {
    fn new(rows: Vec<usize>, cols: Vec<usize>, computed: &BigInt, claimed: &BigInt) -> Self {
        Self { rows, cols, computed: computed.to_string(), claimed: claimed.to_string(), holds: computed == claimed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct M1Report {
    pub n: usize,
    /// `(-2)^(-n^2/4)`.
    pub closed: f64,
    /// `2^(n/2) |phi_A| |phi_B|` from exact minors.
    pub minor_product: f64,
    /// The two `K` minors against `(-2)^(n(n+2)/2)` and `(-2)^(n(n-2)/2)`.
    pub stated_identities: [MinorIdentity; 2],
    /// The same minors against `(-2)^(n(n+2)/8)` and `(-2)^(n(n-2)/8)`.
    pub corrected_identities: [MinorIdentity; 2],
}

/// `M^(1)_{n/2} = <1^(n/2+1) 0^(n/2)| sigma^-_{n/2} |0^(n/2+1) 1^(n/2)>`.
pub fn m1_closed_form(n: usize) -> Result<M1Report> {
    if n % 2 != 0 || n == 0 {
        return Err(Error::Parity(format!("M^(1) needs even n >= 2 (odd N), got n = {n}")));
    }
    let basis = build_basis(n, 1.0)?;
    let h = n / 2;
    let (ra, ca): (Vec<usize>, Vec<usize>) = ((0..=h).collect(), (0..=h).collect());
    let (rb, cb): (Vec<usize>, Vec<usize>) = ((0..h).collect(), (h + 1..=n).collect());
    let ka = basis.k_minor(&ra, &ca);
    let kb = basis.k_minor(&rb, &cb);
    let minor_product = 2f64.powi(h as i32) * basis.phi_minor(&ra, &ca) * basis.phi_minor(&rb, &cb);
    let sign = if (n * n / 4) % 2 == 0 { 1.0 } else { -1.0 };
    let closed = sign * (-((n * n / 4) as f64) * LN_2).exp();
    let e = |num: usize, den: usize| (num / den) as u32;
    Ok(M1Report {
        n,
        closed,
        minor_product,
        stated_identities: [
            MinorIdentity::new(ra.clone(), ca.clone(), &ka, &neg_two_pow(e(n * (n + 2), 2))),
            MinorIdentity::new(rb.clone(), cb.clone(), &kb, &neg_two_pow(e(n * (n - 2), 2))),
        ],
        corrected_identities: [
            MinorIdentity::new(ra, ca, &ka, &neg_two_pow(e(n * (n + 2), 8))),
            MinorIdentity::new(rb, cb, &kb, &neg_two_pow(e(n * (n - 2), 8))),
        ],
    })
}

/// Brute-force `M^(1)_{n/2}` on `N = n + 1` qubits.
pub fn m1_bruteforce(n: usize) -> Result<f64> {
    if n % 2 != 0 || n == 0 {
        return Err(Error::Parity(format!("M^(1) needs even n >= 2, got n = {n}")));
    }
    let basis = build_basis(n, 1.0)?;
    let h = n / 2;
    let op = crate::linalg::tensor_embed(&crate::linalg::paulis::sigma_minus(), &[h], n + 1)?;
    let bra = ModeSet::lower(n, h + 1);
    let ket = ModeSet::upper(n, h);
    Ok(matrix_element_bruteforce(&basis, &bra, &op, &ket)?.re)
}

#[derive(Clone, Debug, Serialize)]
pub struct M2Report {
    pub n: usize,
    pub j: usize,
    pub d: usize,
    /// `2^((n-1)/2) |phi_A| |phi_B|` from exact minors.
    pub value: f64,
    /// The two `K` minors against the stated closed values.
    pub identities: [MinorIdentity; 2],
}

fn check_m2(n: usize, j: usize) -> Result<usize> {
    if n % 2 != 1 {
        return Err(Error::Parity(format!("M^(2) needs odd n (even N), got n = {n}")));
    }
    let d = n.div_ceil(2);
    if j + d > n {
        return Err(Error::invalid(format!("j = {j} out of range: need j + {d} <= {n}")));
    }
    Ok(d)
}

/// `M^(2)_{j,d} = <1^(N/2) 0^(N/2)| sigma^-_j sigma^+_{j+d} |0^(N/2) 1^(N/2)>`, `d = (n+1)/2`.
pub fn m2_closed_form(n: usize, j: usize) -> Result<M2Report> {
    let d = check_m2(n, j)?;
    let basis = build_basis(n, 1.0)?;
    let half = (n - 1) / 2;
    let ra: Vec<usize> = (j..j + d).collect();
    let ca: Vec<usize> = (0..=half).collect();
    let rb: Vec<usize> = (j + 1..=j + d).collect();
    let cb: Vec<usize> = (half + 1..=n).collect();
    let value = 2f64.powi(half as i32) * basis.phi_minor(&ra, &ca) * basis.phi_minor(&rb, &cb);
    let base = neg_two_pow(((n - 1) * (n + 1) / 8) as u32);
    let signed = if ((j + 1) * (n + 1) / 2) % 2 == 0 { base.clone() } else { -base.clone() };
    let ka = basis.k_minor(&ra, &ca);
    let kb = basis.k_minor(&rb, &cb);
    Ok(M2Report {
        n,
        j,
        d,
        value,
        identities: [MinorIdentity::new(ra, ca, &ka, &base), MinorIdentity::new(rb, cb, &kb, &signed)],
    })
}

/// Brute-force `M^(2)_{j,(n+1)/2}` on `N = n + 1` qubits.
pub fn m2_bruteforce(n: usize, j: usize) -> Result<f64> {
    let (value, _) = m2_pair_bruteforce(n, j)?;
    Ok(value)
}

/// `(M^(2), <1^h 0^h| sigma^+_j sigma^-_{j+d} |0^h 1^h>)` by brute force.
pub fn m2_pair_bruteforce(n: usize, j: usize) -> Result<(f64, f64)> {
    let d = check_m2(n, j)?;
    let basis = build_basis(n, 1.0)?;
    let nq = n + 1;
    let h = nq / 2;
    let (sm, sp) = (crate::linalg::paulis::sigma_minus(), crate::linalg::paulis::sigma_plus());
    let direct = crate::linalg::tensor_embed(&sm.kron(&sp), &[j, j + d], nq)?;
    let conj = crate::linalg::tensor_embed(&sp.kron(&sm), &[j, j + d], nq)?;
    let bra = ModeSet::lower(n, h);
    let ket = ModeSet::upper(n, h);
    let a = matrix_element_bruteforce(&basis, &bra, &direct, &ket)?;
    let b = matrix_element_bruteforce(&basis, &bra, &conj, &ket)?;
    Ok((a.re, b.re))
}

/// Relative phase `(-1)^(N/2)` of the `sigma^+ sigma^-` element against `M^(2)`.
pub fn conjugate_phase(n_qubits: usize) -> Result<i8> {
    if n_qubits % 2 != 0 {
        return Err(Error::Parity(format!("conjugate phase needs even N, got {n_qubits}")));
    }
    Ok(if (n_qubits / 2) % 2 == 0 { 1 } else { -1 })
}

/// Drive sign giving constructive interference: `+` for `N/2` even, `-` for odd.
pub fn optimal_drive_sign(n_qubits: usize) -> Result<crate::hamiltonians::DriveSign> {
    Ok(match conjugate_phase(n_qubits)? {
        1 => crate::hamiltonians::DriveSign::Plus,
        _ => crate::hamiltonians::DriveSign::Minus,
    })
}

/// Max over `(x, y)` of `|sum_k (-i)^k K_{x,k} K_{k,y} - i^(x+y-n/2) 2^(n/2) K_{x,y}|`.
pub fn meixner_identity_check(n: usize) -> Result<f64> {
    let basis = build_basis(n, 1.0)?;
    let k = &basis.kmatrix;
    let scale = (n as f64 * 0.5 * LN_2).exp();
    let mut worst = 0.0f64;
    for x in 0..=n {
        for y in 0..=n {
            let lhs: C64 = (0..=n).map(|kk| i_pow(-(kk as i64)) * (k[x][kk] * k[kk][y]) as f64).sum();
            let phase = C64::cis(FRAC_PI_2 * (x as f64 + y as f64 - n as f64 / 2.0));
            let rhs = phase * (scale * k[x][y] as f64);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// `c_2 = 2^(3/4) 3^(-9/16)`.
pub fn c2() -> f64 {
    2f64.powf(0.75) * 3f64.powf(-9.0 / 16.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub j: usize,
    pub m2: f64,
    /// `|M^(2)| / c_2^(n^2)`.
    pub scaled: f64,
    /// `scaled(n) / scaled(previous n)`; `None` for the first row.
    pub ratio: Option<f64>,
}

/// `M^(2)_{(n-1)/4, (n+1)/2}` and its size relative to `c_2^(n^2)`, for
/// `n = 1 mod 4` (`N = 2, 6, 10, ...`).
pub fn m2_asymptotic_probe(n_list: &[usize]) -> Result<Vec<AsymptoticRow>> {
    let mut rows: Vec<AsymptoticRow> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n % 4 != 1 {
            return Err(Error::Parity(format!("asymptotic probe needs n = 1 mod 4, got n = {n}")));
        }
        let j = (n - 1) / 4;
        let m2 = m2_closed_form(n, j)?.value;
        let scaled = (m2.abs().ln() - (n * n) as f64 * c2().ln()).exp();
        let ratio = rows.last().map(|p| scaled / p.scaled);
        rows.push(AsymptoticRow { n, j, m2, scaled, ratio });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_hk, hopping_matrix, ChainSpec};
    use crate::linalg::hermitian_eigendecompose;

    #[test]
    fn small_polynomials() {
        for x in 0..=6 {
            assert_eq!(krawtchouk_poly(6, 0, x).unwrap(), 1);
        }
        let row: Vec<i128> = (0..=2).map(|x| krawtchouk_poly(2, 1, x).unwrap()).collect();
        assert_eq!(row, vec![2, 0, -2]);
        assert!(krawtchouk_poly(3, 4, 0).is_err());
    }

    #[test]
    fn binomials_exact() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn n1_is_hadamard() {
        let b = build_basis(1, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [[s, s], [s, -s]];
        for k in 0..2 {
            for x in 0..2 {
                assert!((b.phi[k][x] - want[k][x]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn basis_invariants_up_to_13() {
        for n in 1..=13 {
            let b = build_basis(n, 1.0).unwrap();
            assert!(b.orthogonality_residual() < 1e-12, "n = {n}");
            assert!(b.symmetry_residual() < 1e-12, "n = {n}");
            for (k, l) in b.lambdas.iter().enumerate() {
                assert_eq!(*l, k as f64 - n as f64 / 2.0);
            }
        }
    }

    #[test]
    fn phi_diagonalizes_hopping_block() {
        for n in 1..=12 {
            let spec = ChainSpec::krawtchouk(n + 1, 1.0).unwrap();
            let b = build_basis(n, 1.0).unwrap();
            let r = b.diagonalization_residual(&hopping_matrix(&spec.couplings));
            assert!(r < 1e-12, "n = {n}: {r}");
        }
    }

    #[test]
    fn phi_matches_dense_eigensolver_up_to_sign() {
        let spec = ChainSpec::krawtchouk(6, 1.0).unwrap();
        let b = build_basis(5, 1.0).unwrap();
        let e = hermitian_eigendecompose(&hopping_matrix(&spec.couplings)).unwrap();
        for k in 0..6 {
            assert!((e.values[k] - b.lambdas[k]).abs() < 1e-12);
            let overlap: f64 = (0..6).map(|x| e.vectors.get(x, k).re * b.phi[k][x]).sum();
            assert!((overlap.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn energies() {
        let b = build_basis(5, 1.0).unwrap();
        assert_eq!(manybody_energy(&b, &ModeSet::new(5, vec![]).unwrap()), 0.0);
        let hi = manybody_energy(&b, &ModeSet::upper(5, 3));
        let lo = manybody_energy(&b, &ModeSet::lower(5, 3));
        assert_eq!((hi, lo, hi - lo), (4.5, -4.5, 9.0));
        let b3 = build_basis(3, 1.0).unwrap();
        assert_eq!(manybody_energy(&b3, &ModeSet::upper(3, 2)) - manybody_energy(&b3, &ModeSet::lower(3, 2)), 4.0);
    }

    #[test]
    fn mode_sets() {
        assert!(ModeSet::new(4, vec![2, 1]).is_err());
        assert!(ModeSet::new(4, vec![5]).is_err());
        let s = ModeSet::from_bits("000111").unwrap();
        assert_eq!(s.occupied(), &[3, 4, 5]);
        assert_eq!(s, ModeSet::upper(5, 3));
        assert_eq!(ModeSet::from_index(5, s.index()), s);
        assert_eq!(ModeSet::lower(5, 3).bits(), "111000");
    }

    #[test]
    fn vacuum_single_and_full_band() {
        let b = build_basis(3, 1.0).unwrap();
        let vac = eigenstate_vector(&b, &ModeSet::new(3, vec![]).unwrap()).unwrap();
        assert_eq!(vac.amp(0), c(1.0, 0.0));
        let one = eigenstate_vector(&b, &ModeSet::new(3, vec![2]).unwrap()).unwrap();
        for x in 0..4 {
            assert!((one.amp(1 << (3 - x)).re - b.phi[2][x]).abs() < 1e-15);
        }
        let full = eigenstate_vector(&b, &ModeSet::new(3, vec![0, 1, 2, 3]).unwrap()).unwrap();
        assert!((full.amp(15).norm() - 1.0).abs() < 1e-12);
    }

    /// JW oracle: build c^dag_k from f^dag_x = (prod_{j<x} Z_j) sigma^-_x and apply to vacuum.
    #[test]
    fn slater_sign_matches_jordan_wigner() {
        use crate::linalg::{paulis, tensor_embed};
        for n in 1..=5 {
            let nq = n + 1;
            let b = build_basis(n, 1.0).unwrap();
            let f_dag: Vec<Operator> = (0..nq)
                .map(|x| {
                    let mut op = tensor_embed(&paulis::sigma_minus(), &[x], nq).unwrap();
                    for j in 0..x {
                        op = tensor_embed(&paulis::z(), &[j], nq).unwrap().matmul(&op);
                    }
                    op
                })
                .collect();
            let c_dag: Vec<Operator> = (0..nq)
                .map(|k| {
                    let mut op = Operator::zeros(1 << nq);
                    for (x, f) in f_dag.iter().enumerate() {
                        op += &f.scale_real(b.phi[k][x]);
                    }
                    op
                })
                .collect();
            for idx in 0..1usize << nq {
                let modes = ModeSet::from_index(n, idx);
                let mut psi = StateVector::basis(1 << nq, 0).unwrap();
                for &k in modes.occupied().iter().rev() {
                    psi = c_dag[k].apply(&psi).unwrap();
                }
                let slater = eigenstate_vector(&b, &modes).unwrap();
                assert!(psi.distance(&slater).unwrap() < 1e-12, "n = {n}, modes {:?}", modes.occupied());
            }
        }
    }

    #[test]
    fn eigenstates_are_eigenvectors_and_orthonormal() {
        for nq in 2..=8 {
            let n = nq - 1;
            let b = build_basis(n, 1.0).unwrap();
            let hk = build_hk(&ChainSpec::krawtchouk(nq, 1.0).unwrap()).unwrap();
            let mut states = Vec::new();
            for idx in 0..1usize << nq {
                let m = ModeSet::from_index(n, idx);
                let v = eigenstate_vector(&b, &m).unwrap();
                assert!(v.is_normalized());
                let hv = hk.apply(&v).unwrap();
                let r = hv.distance(&v.clone().scaled(c(manybody_energy(&b, &m), 0.0))).unwrap();
                assert!(r < 1e-10, "N = {nq}, modes {:?}: {r}", m.occupied());
                if idx % 7 == 0 {
                    states.push(v);
                }
            }
            for (a, va) in states.iter().enumerate() {
                for (bb, vb) in states.iter().enumerate() {
                    let want = if a == bb { 1.0 } else { 0.0 };
                    assert!((va.inner(vb).unwrap().norm() - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sector_eigenvectors_are_unitary_columns() {
        let b = build_basis(5, 1.0).unwrap();
        let v = sector_eigenvectors(&b, 3);
        let g = v.adjoint() * &v;
        let id = Mat::<C64>::identity(20, 20);
        assert!((&g - &id).norm_max() < 1e-12);
        let col = ModeSet::upper(5, 3);
        let full = eigenstate_vector(&b, &col).unwrap();
        let idx: Vec<usize> = (0..64usize).filter(|i| i.count_ones() == 3).collect();
        let s = idx.iter().position(|&i| i == col.index()).unwrap();
        for (r, &g) in idx.iter().enumerate() {
            assert!((v[(r, s)] - full.amp(g)).norm() < 1e-15);
        }
    }

    #[test]
    fn dynamical_phases_reset() {
        use crate::linalg::expm_hermitian;
        let hk = build_hk(&ChainSpec::krawtchouk(5, 1.0).unwrap()).unwrap();
        let u = expm_hermitian(&hk, 2.0 * std::f64::consts::PI * 2.0).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(32)).unwrap() < 1e-10);
    }

    #[test]
    fn m1_values() {
        let r2 = m1_closed_form(2).unwrap();
        assert!((r2.closed + 0.5).abs() < 1e-15);
        assert!((r2.minor_product + 0.5).abs() < 1e-12);
        assert!((m1_bruteforce(2).unwrap() + 0.5).abs() < 1e-12);
        let r4 = m1_closed_form(4).unwrap();
        assert!((r4.closed - 0.0625).abs() < 1e-15);
        assert!((r4.minor_product - 0.0625).abs() < 1e-12);
        assert!((m1_bruteforce(4).unwrap() - 0.0625).abs() < 1e-12);
        assert!(m1_closed_form(3).is_err());
    }

    #[test]
    fn m1_minor_exponents() {
        for n in [2, 4, 6, 8, 10] {
            let r = m1_closed_form(n).unwrap();
            assert!(r.corrected_identities.iter().all(|i| i.holds), "n = {n}");
            assert!(!r.stated_identities[0].holds, "n = {n}");
            assert!((r.minor_product - r.closed).abs() < 1e-12 * r.closed.abs().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn m2_values() {
        let r3 = 3f64.sqrt() / 8.0;
        assert!((m2_closed_form(3, 0).unwrap().value - r3).abs() < 1e-12);
        assert!((m2_closed_form(3, 1).unwrap().value - r3).abs() < 1e-12);
        assert!((m2_closed_form(5, 1).unwrap().value - 5.0 / 64.0).abs() < 1e-12);
        assert!((m2_closed_form(1, 0).unwrap().value + 0.5).abs() < 1e-12);
        assert!(m2_closed_form(4, 0).is_err());
        assert!(m2_closed_form(5, 3).is_err());
    }

    #[test]
    fn m2_closed_equals_bruteforce() {
        for n in [1, 3, 5, 7] {
            for j in 0..=(n - 1) / 2 {
                let closed = m2_closed_form(n, j).unwrap().value;
                let (brute, conj) = m2_pair_bruteforce(n, j).unwrap();
                assert!((closed - brute).abs() < 1e-12, "n = {n}, j = {j}: {closed} vs {brute}");
                let p = conjugate_phase(n + 1).unwrap() as f64;
                assert!((conj - p * brute).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn m2_identities_hold_at_stated_ends() {
        for n in [3, 5, 7, 9, 11] {
            assert!(m2_closed_form(n, 0).unwrap().identities[0].holds, "n = {n}");
            assert!(m2_closed_form(n, (n - 1) / 2).unwrap().identities[1].holds, "n = {n}");
        }
        let mid = m2_closed_form(5, 1).unwrap();
        assert_eq!(mid.identities[0].computed, "-80");
        assert_eq!(mid.identities[1].computed, "-80");
    }

    #[test]
    fn conjugate_phase_rule() {
        assert_eq!(conjugate_phase(4).unwrap(), 1);
        assert_eq!(conjugate_phase(6).unwrap(), -1);
        assert!(conjugate_phase(5).is_err());
        assert_eq!(optimal_drive_sign(6).unwrap(), crate::hamiltonians::DriveSign::Minus);
    }

    #[test]
    fn meixner() {
        for n in 1..=9 {
            let r = meixner_identity_check(n).unwrap();
            assert!(r < 1e-9, "n = {n}: {r}");
        }
        assert!(meixner_identity_check(1).unwrap() < 1e-12);
    }

    #[test]
    fn c2_value_and_probe() {
        assert!((c2() - 0.9065).abs() < 1e-4);
        assert!((c2() - 0.906_550_06).abs() < 1e-8);
        let rows = m2_asymptotic_probe(&[1, 5, 9, 13, 17, 21]).unwrap();
        assert!(rows.iter().all(|r| r.scaled.is_finite() && r.scaled > 0.0));
        assert!((rows[1].m2.abs() - 5.0 / 64.0).abs() < 1e-12);
        let tail: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
        assert!(tail.iter().all(|r| (0.01..100.0).contains(r)));
        assert!(m2_asymptotic_probe(&[7]).is_err());
    }

    #[test]
    fn decay_constant_from_second_differences() {
        // log|M2| + log(n)/6 = a + b n + n^2 log c2; step 4 in n gives 32 log c2
        let ns = [33usize, 37, 41];
        let l: Vec<f64> = ns
            .iter()
            .map(|&n| m2_closed_form(n, (n - 1) / 4).unwrap().value.abs().ln() + (n as f64).ln() / 6.0)
            .collect();
        let fitted = ((l[2] - 2.0 * l[1] + l[0]) / 32.0).exp();
        assert!((fitted - c2()).abs() < 2e-4, "{fitted}");
        // the other reading of the subscript decays like 2^(-n^2/4) instead
        let l: Vec<f64> = ns
            .iter()
            .map(|&n| m2_closed_form(n, (n - 1) / 2).unwrap().value.abs().ln() + (n as f64).ln() / 6.0)
            .collect();
        let other = ((l[2] - 2.0 * l[1] + l[0]) / 32.0).exp();
        assert!((other - 2f64.powf(-0.25)).abs() < 1e-3, "{other}");
    }

    #[test]
    fn bareiss_agrees_with_float() {
        let b = build_basis(7, 1.0).unwrap();
        let rows = [1, 2, 4, 5];
        let cols = [0, 3, 6, 7];
        let exact = b.phi_minor(&rows, &cols);
        let float = b.phi_minor_float(&rows, &cols);
        assert!((exact - float).abs() < 1e-13);
        assert_eq!(bareiss_det(vec![]), BigInt::one());
    }

    proptest::proptest! {
        #[test]
        fn orthogonality_against_weights(n in 1usize..=20, a in 0usize..=20, b in 0usize..=20) {
            let (a, b) = (a % (n + 1), b % (n + 1));
            // sum_x C(n,x) K_a(x) K_b(x) = 2^n C(n,a) delta_ab
            let mut acc: i128 = 0;
            for x in 0..=n {
                acc += binomial(n, x) as i128 * krawtchouk_poly(n, a, x).unwrap() * krawtchouk_poly(n, b, x).unwrap();
            }
            let want = if a == b { (1i128 << n) * binomial(n, a) as i128 } else { 0 };
            proptest::prop_assert_eq!(acc, want);
        }
    }
}
