//! Block-diagonal storage for operators that conserve the excitation number.
//!
//! Everything built from XX+YY couplings, Z fields and the driving terms keeps
//! the number of `|1>` qubits fixed, so a `2^N` operator splits into `N+1`
//! blocks of size `C(N, q)`. Products, exponentials and traces then cost the
//! sum over blocks instead of the full dimension.

use std::sync::Arc;

use faer::Mat;

use super::{c, check_dim, eigh_mat, spectral_apply, Operator, StateVector, C64, CONSTRUCTION_TOL, ZERO};
use crate::error::{Error, Result};

/// Grouping of basis indices into sectors, each sector ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    dim: usize,
    sectors: Vec<Vec<usize>>,
    locate: Vec<(usize, usize)>,
}

impl Partition {
    /// Sectors of fixed excitation number `q = 0..=n_qubits`.
    pub fn excitation(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut sectors = vec![Vec::new(); n_qubits + 1];
        for idx in 0..dim {
            sectors[idx.count_ones() as usize].push(idx);
        }
        Self::from_sectors(dim, sectors)
    }

    /// A single sector holding the whole space.
    pub fn trivial(dim: usize) -> Self {
        Self::from_sectors(dim, vec![(0..dim).collect()])
    }

    fn from_sectors(dim: usize, sectors: Vec<Vec<usize>>) -> Self {
        let mut locate = vec![(0, 0); dim];
        for (s, members) in sectors.iter().enumerate() {
            for (o, &idx) in members.iter().enumerate() {
                locate[idx] = (s, o);
            }
        }
        Self { dim, sectors, locate }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector(&self, s: usize) -> &[usize] {
        &self.sectors[s]
    }

    /// `(sector, offset within sector)` of a basis index.
    pub fn locate(&self, index: usize) -> (usize, usize) {
        self.locate[index]
    }
}

#[derive(Clone, Debug)]
pub struct BlockOperator {
    partition: Arc<Partition>,
    blocks: Vec<Mat<C64>>,
}

impl BlockOperator {
    pub fn zeros(partition: Arc<Partition>) -> Self {
        let blocks = partition.sectors.iter().map(|s| Mat::zeros(s.len(), s.len())).collect();
        Self { partition, blocks }
    }

    pub fn identity(partition: Arc<Partition>) -> Self {
        let blocks = partition.sectors.iter().map(|s| Mat::identity(s.len(), s.len())).collect();
        Self { partition, blocks }
    }

    /// Fill every block from a function of global basis indices.
    pub fn from_fn(partition: Arc<Partition>, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let blocks = partition
            .sectors
            .iter()
            .map(|s| Mat::from_fn(s.len(), s.len(), |i, j| f(s[i], s[j])))
            .collect();
        Self { partition, blocks }
    }

    pub fn from_blocks(partition: Arc<Partition>, blocks: Vec<Mat<C64>>) -> Result<Self> {
        check_dim(partition.n_sectors(), blocks.len())?;
        for (s, b) in blocks.iter().enumerate() {
            check_dim(partition.sector(s).len(), b.nrows())?;
            check_dim(partition.sector(s).len(), b.ncols())?;
        }
        Ok(Self { partition, blocks })
    }

    /// Split a dense operator; fails if it couples different sectors.
    pub fn from_dense(op: &Operator, partition: Arc<Partition>) -> Result<Self> {
        check_dim(partition.dim(), op.dim())?;
        let d = op.dim();
        let mut leak = 0.0f64;
        for j in 0..d {
            let sj = partition.locate(j).0;
            for i in 0..d {
                if partition.locate(i).0 != sj {
                    leak = leak.max(op.get(i, j).norm());
                }
            }
        }
        if leak > CONSTRUCTION_TOL * op.max_abs().max(1.0) {
            return Err(Error::NotNumberConserving(leak));
        }
        Ok(Self::from_fn(partition, |i, j| op.get(i, j)))
    }

    pub fn to_dense(&self) -> Operator {
        let mut out = Operator::zeros(self.partition.dim());
        for (s, b) in self.blocks.iter().enumerate() {
            let idx = self.partition.sector(s);
            for (j, &gj) in idx.iter().enumerate() {
                for (i, &gi) in idx.iter().enumerate() {
                    out.set(gi, gj, b[(i, j)]);
                }
            }
        }
        out
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn block(&self, s: usize) -> &Mat<C64> {
        &self.blocks[s]
    }

    pub fn blocks(&self) -> &[Mat<C64>] {
        &self.blocks
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (si, oi) = self.partition.locate(i);
        let (sj, oj) = self.partition.locate(j);
        if si == sj {
            self.blocks[si][(oi, oj)]
        } else {
            ZERO
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Mat<C64>, &Mat<C64>) -> Mat<C64>) -> Self {
        assert_eq!(*self.partition, *other.partition, "partition mismatch");
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Self { partition: Arc::clone(&self.partition), blocks }
    }

    fn map(&self, f: impl Fn(&Mat<C64>) -> Mat<C64>) -> Self {
        Self { partition: Arc::clone(&self.partition), blocks: self.blocks.iter().map(f).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> Self {
        self.map(|a| Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * z))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        self.map(|a| a.adjoint().to_owned())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| (0..b.nrows()).map(|i| b[(i, i)]).sum::<C64>()).sum()
    }

    /// `Tr(self^dag other)`.
    pub fn overlap_trace(&self, other: &Self) -> C64 {
        assert_eq!(*self.partition, *other.partition, "partition mismatch");
        let mut acc = ZERO;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            for j in 0..a.ncols() {
                for i in 0..a.nrows() {
                    acc += a[(i, j)].conj() * b[(i, j)];
                }
            }
        }
        acc
    }

    /// `1 - |Tr(self^dag other)| / dim`.
    pub fn phase_invariant_distance(&self, other: &Self) -> f64 {
        1.0 - self.overlap_trace(other).norm() / self.dim() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| (0..b.ncols()).flat_map(move |j| (0..b.nrows()).map(move |i| b[(i, j)].norm())))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Largest 2-norm of a column of `self - other`.
    pub fn max_column_distance(&self, other: &Self) -> f64 {
        assert_eq!(*self.partition, *other.partition, "partition mismatch");
        let mut worst = 0.0f64;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            for j in 0..a.ncols() {
                let s: f64 = (0..a.nrows()).map(|i| (a[(i, j)] - b[(i, j)]).norm_sqr()).sum();
                worst = worst.max(s.sqrt());
            }
        }
        worst
    }

    /// `self + sum_k w_k terms_k`.
    pub fn linear_combination(&self, terms: &[(&BlockOperator, f64)]) -> Self {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(s, base)| {
                Mat::from_fn(base.nrows(), base.ncols(), |i, j| {
                    terms.iter().fold(base[(i, j)], |acc, (t, w)| acc + t.blocks[s][(i, j)] * *w)
                })
            })
            .collect();
        Self { partition: Arc::clone(&self.partition), blocks }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(Arc::clone(&self.partition)))
    }

    pub fn eigh(&self) -> Result<BlockEigh> {
        let mut values = Vec::with_capacity(self.blocks.len());
        let mut vectors = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (v, u) = eigh_mat(b)?;
            values.push(v);
            vectors.push(u);
        }
        Ok(BlockEigh { partition: Arc::clone(&self.partition), values, vectors })
    }

    /// `exp(-i H t)`, block by block.
    pub fn expm(&self, t: f64) -> Result<Self> {
        Ok(self.eigh()?.exp(t))
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = Self::identity(Arc::clone(&self.partition));
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.matmul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.matmul(&base);
            }
        }
        acc
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), state.dim())?;
        let mut out = vec![ZERO; self.dim()];
        for (s, b) in self.blocks.iter().enumerate() {
            let idx = self.partition.sector(s);
            for (j, &gj) in idx.iter().enumerate() {
                let a = state.amp(gj);
                if a == ZERO {
                    continue;
                }
                for (i, &gi) in idx.iter().enumerate() {
                    out[gi] += b[(i, j)] * a;
                }
            }
        }
        StateVector::new(out)
    }
}

#[derive(Clone, Debug)]
pub struct BlockEigh {
    partition: Arc<Partition>,
    pub values: Vec<Vec<f64>>,
    pub vectors: Vec<Mat<C64>>,
}

impl BlockEigh {
    pub fn reconstruct(&self, f: impl Fn(f64) -> C64) -> BlockOperator {
        let blocks = self
            .vectors
            .iter()
            .zip(&self.values)
            .map(|(v, l)| spectral_apply(v, l, &f))
            .collect();
        BlockOperator { partition: Arc::clone(&self.partition), blocks }
    }

    pub fn exp(&self, t: f64) -> BlockOperator {
        self.reconstruct(|l| C64::cis(-l * t))
    }

    /// All eigenvalues, ascending.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.values.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        all
    }
}
