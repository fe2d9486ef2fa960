//! Gate algebra around `iSWAP_N`: the ancilla construction of the
//! `(N-2)`-controlled X and the CNS/SCN construction of the
//! `(N-2)`-controlled `iSWAP_2`.
//!
//! CNS is CNOT then SWAP, SCN is SWAP then CNOT; in both the CNOT control is
//! the first (upper) qubit of the pair.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::driving::{iswap_target, phase_target, run_iswap_protocol, ProtocolParams, TargetGate};
use crate::error::{Error, Result};
use crate::linalg::{bits_of, c, expm_hermitian, paulis, tensor_embed, Operator, Partition, StateVector, C64, I, ONE, ZERO};

pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct GateOp {
    pub name: String,
    pub sites: Vec<usize>,
    pub unitary: Operator,
}

impl GateOp {
    pub fn new(name: impl Into<String>, sites: Vec<usize>, unitary: Operator) -> Result<Self> {
        if unitary.dim() != 1 << sites.len() {
            return Err(Error::DimensionMismatch { expected: 1 << sites.len(), found: unitary.dim() });
        }
        for (i, s) in sites.iter().enumerate() {
            if sites[..i].contains(s) {
                return Err(Error::DuplicateSite(*s));
            }
        }
        if unitary.unitarity_deviation() > 1e-10 {
            return Err(Error::invalid(format!("gate is not unitary (deviation {:.3e})", unitary.unitarity_deviation())));
        }
        Ok(Self { name: name.into(), sites, unitary })
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.name, self.sites)
    }
}

/// `Z^{-1/2} = diag(1, -i)`.
pub fn z_minus_half() -> Operator {
    Operator::diagonal(&[ONE, c(0.0, -1.0)])
}

/// `exp(-i (pi/J) H2)` with `H2 = -(J/4)(XX + YY)`; independent of `J`.
pub fn iswap2() -> Operator {
    let xx = paulis::x().kron(&paulis::x());
    let yy = paulis::y().kron(&paulis::y());
    let h2 = (&xx + &yy).scale_real(-0.25);
    expm_hermitian(&h2, PI).expect("XX + YY is Hermitian")
}

/// `(H x 1) iSWAP_2 (Z^{-1/2} x Z^{-1/2}) (1 x H)`.
pub fn cns() -> Operator {
    let h1 = paulis::hadamard().kron(&paulis::identity());
    let h2 = paulis::identity().kron(&paulis::hadamard());
    let z = z_minus_half().kron(&z_minus_half());
    h1.matmul(&iswap2()).matmul(&z).matmul(&h2)
}

/// Mirror of the CNS circuit: `(1 x H)(Z^{-1/2} x Z^{-1/2}) iSWAP_2 (H x 1)`.
pub fn scn() -> Operator {
    let h1 = paulis::hadamard().kron(&paulis::identity());
    let h2 = paulis::identity().kron(&paulis::hadamard());
    let z = z_minus_half().kron(&z_minus_half());
    h2.matmul(&z).matmul(&iswap2()).matmul(&h1)
}

/// Truth-table references.
pub fn cns_reference() -> Operator {
    paulis::swap().matmul(&paulis::cnot())
}

pub fn scn_reference() -> Operator {
    paulis::cnot().matmul(&paulis::swap())
}

/// Named gate on `sites`; `iSWAP_N` and `PHASE_N` span all listed sites.
pub fn primitive(name: &str, sites: &[usize]) -> Result<GateOp> {
    let want = |k: usize| {
        if sites.len() == k {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} acts on {k} qubits, got {}", sites.len())))
        }
    };
    let u = match name {
        "X" => want(1).map(|_| paulis::x())?,
        "H" => want(1).map(|_| paulis::hadamard())?,
        "Z^-1/2" => want(1).map(|_| z_minus_half())?,
        "iSWAP2" => want(2).map(|_| iswap2())?,
        "CNS" => want(2).map(|_| cns())?,
        "SCN" => want(2).map(|_| scn())?,
        "CNOT" => want(2).map(|_| paulis::cnot())?,
        "SWAP" => want(2).map(|_| paulis::swap())?,
        "iSWAP_N" | "PHASE_N" => {
            let n = sites.len();
            let p = Arc::new(Partition::excitation(n));
            let t = if name == "iSWAP_N" { iswap_target(n, &p)? } else { phase_target(n, &p)? };
            t.to_dense()
        }
        other => return Err(Error::UnknownGate(other.to_string())),
    };
    GateOp::new(name, sites.to_vec(), u)
}

#[derive(Clone, Debug)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, ops: Vec::new() }
    }

    pub fn push(&mut self, op: GateOp) -> Result<&mut Self> {
        if let Some(&s) = op.sites.iter().find(|&&s| s >= self.n_qubits) {
            return Err(Error::SiteOutOfRange { site: s, n_qubits: self.n_qubits });
        }
        self.ops.push(op);
        Ok(self)
    }

    pub fn gate(&mut self, name: &str, sites: &[usize]) -> Result<&mut Self> {
        self.push(primitive(name, sites)?)
    }

    /// Number of `iSWAP_2` pulses: one per `iSWAP2`, CNS or SCN.
    pub fn iswap2_count(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o.name.as_str(), "iSWAP2" | "CNS" | "SCN")).count()
    }
}

/// Time-ordered product `U_k ... U_1`.
pub fn compose(circuit: &Circuit) -> Result<Operator> {
    let mut u = Operator::identity(1 << circuit.n_qubits);
    for op in &circuit.ops {
        u = tensor_embed(&op.unitary, &op.sites, circuit.n_qubits)?.matmul(&u);
    }
    Ok(u)
}

/// X on the last of `n_qubits` when all others are 1.
pub fn multi_controlled_x(n_qubits: usize) -> Operator {
    let dim = 1 << n_qubits;
    let mask = dim - 2;
    Operator::from_fn(dim, |r, s| {
        let image = if s & mask == mask { s ^ 1 } else { s };
        if r == image {
            ONE
        } else {
            ZERO
        }
    })
}

/// `iSWAP_2` on the last two of `n_qubits` when all others are 1.
pub fn multi_controlled_iswap2(n_qubits: usize) -> Operator {
    let dim = 1 << n_qubits;
    let mask = dim - 4;
    Operator::from_fn(dim, |r, s| {
        let active = s & mask == mask && (s & 3 == 1 || s & 3 == 2);
        if active {
            if r == s ^ 3 {
                I
            } else {
                ZERO
            }
        } else if r == s {
            ONE
        } else {
            ZERO
        }
    })
}

/// Where the `N`-qubit resonant gate comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DriveSource {
    Ideal,
    /// Simulated protocol with this `M`.
    Simulated { m: u32 },
}

fn n_qubit_gate(name: &str, n: usize, source: DriveSource) -> Result<GateOp> {
    let sites: Vec<usize> = (0..n).collect();
    match source {
        DriveSource::Ideal => primitive(name, &sites),
        DriveSource::Simulated { m } => {
            let mut p = ProtocolParams::new(n, m);
            p.target = if name == "PHASE_N" { TargetGate::Phase } else { TargetGate::Iswap };
            let out = run_iswap_protocol(&p)?;
            GateOp::new(format!("{name}(M={m})"), sites, out.unitary.to_dense())
        }
    }
}

/// `H_t X_{h..N-2}` PHASE_N `X_{h..N-2} H_t` with target `N-2` and ancilla `N-1`.
pub fn ctrl_x_circuit(n: usize, source: DriveSource) -> Result<Circuit> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Parity(format!("ctrl-X construction needs even N >= 4, got {n}")));
    }
    let target = n - 2;
    let flips: Vec<usize> = (n / 2..=n - 2).collect();
    let mut c = Circuit::new(n);
    c.gate("H", &[target])?;
    for &k in &flips {
        c.gate("X", &[k])?;
    }
    c.push(n_qubit_gate("PHASE_N", n, source)?)?;
    for &k in &flips {
        c.gate("X", &[k])?;
    }
    c.gate("H", &[target])?;
    Ok(c)
}

/// `V^dag iSWAP_N V` with `V` the SCN ladder from `(N-3, N-2)` up to `(0, 1)`,
/// X after the rungs starting at `N/2 - 1` and `0`.
pub fn ctrl_iswap2_circuit(n: usize, source: DriveSource) -> Result<Circuit> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Parity(format!("ctrl-iSWAP2 construction needs even N >= 4, got {n}")));
    }
    let flip = |k: usize| k == 0 || k == n / 2 - 1;
    let mut c = Circuit::new(n);
    for k in (0..=n - 3).rev() {
        c.gate("SCN", &[k, k + 1])?;
        if flip(k) {
            c.gate("X", &[k])?;
        }
    }
    c.push(n_qubit_gate("iSWAP_N", n, source)?)?;
    for k in 0..=n - 3 {
        if flip(k) {
            c.gate("X", &[k])?;
        }
        c.gate("CNS", &[k, k + 1])?;
    }
    Ok(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct CircuitReport {
    pub which: &'static str,
    #[serde(rename = "N")]
    pub n_qubits: usize,
    pub source: DriveSource,
    /// `1 - |Tr(T^dag U)| / dim` on the compared subspace.
    pub deviation: f64,
    /// Largest amplitude leaving ancilla `|0>`; zero without ancilla.
    pub ancilla_leakage: f64,
    pub unitarity: f64,
    pub iswap2_gates: usize,
}

/// Compared on ancilla-|0> inputs against the `(N-2)`-controlled X.
pub fn verify_ctrl_x_circuit(n: usize, source: DriveSource) -> Result<CircuitReport> {
    let circuit = ctrl_x_circuit(n, source)?;
    let u = compose(&circuit)?;
    let keep: Vec<usize> = (0..1usize << n).filter(|i| i & 1 == 0).collect();
    let flipped: Vec<usize> = (0..1usize << n).filter(|i| i & 1 == 1).collect();
    let sub = Operator::from_mat(u.submatrix(&keep, &keep))?;
    let target = multi_controlled_x(n - 1);
    let leak = u.submatrix(&flipped, &keep);
    let mut ancilla_leakage: f64 = 0.0;
    for j in 0..leak.ncols() {
        for i in 0..leak.nrows() {
            ancilla_leakage = ancilla_leakage.max(leak[(i, j)].norm());
        }
    }
    Ok(CircuitReport {
        which: "ctrl-x",
        n_qubits: n,
        source,
        deviation: target.phase_invariant_distance(&sub)?,
        ancilla_leakage,
        unitarity: u.unitarity_deviation(),
        iswap2_gates: circuit.iswap2_count(),
    })
}

pub fn verify_ctrl_iswap2_circuit(n: usize, source: DriveSource) -> Result<CircuitReport> {
    let circuit = ctrl_iswap2_circuit(n, source)?;
    let u = compose(&circuit)?;
    Ok(CircuitReport {
        which: "ctrl-iswap2",
        n_qubits: n,
        source,
        deviation: multi_controlled_iswap2(n).phase_invariant_distance(&u)?,
        ancilla_leakage: 0.0,
        unitarity: u.unitarity_deviation(),
        iswap2_gates: circuit.iswap2_count(),
    })
}

/// A basis state with a phase, or a superposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum WalkState {
    Basis { bits: String, phase: (f64, f64) },
    Superposition,
}

impl WalkState {
    fn of(state: &StateVector) -> Self {
        let n = state.n_qubits();
        let mut hit = None;
        for (idx, a) in state.amps().iter().enumerate() {
            if a.norm() > 1e-12 {
                if hit.is_some() {
                    return WalkState::Superposition;
                }
                hit = Some((idx, *a));
            }
        }
        match hit {
            Some((idx, a)) => WalkState::Basis { bits: bits_of(idx, n), phase: (clean(a.re), clean(a.im)) },
            None => WalkState::Superposition,
        }
    }

    pub fn basis(bits: &str, phase: C64) -> Self {
        WalkState::Basis { bits: bits.to_string(), phase: (phase.re, phase.im) }
    }
}

fn clean(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-12 {
        r + 0.0
    } else {
        x
    }
}

impl fmt::Display for WalkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkState::Superposition => write!(f, "(superposition)"),
            WalkState::Basis { bits, phase } => {
                let p = match *phase {
                    (1.0, 0.0) => String::new(),
                    (-1.0, 0.0) => "-".into(),
                    (0.0, 1.0) => "i".into(),
                    (0.0, -1.0) => "-i".into(),
                    (re, im) => format!("({re}{im:+}i)"),
                };
                write!(f, "{p}|{bits}>")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisWalk {
    pub input: String,
    /// State after each gate, labelled by the gate.
    pub steps: Vec<(String, WalkState)>,
}

impl BasisWalk {
    pub fn output(&self) -> &WalkState {
        &self.steps.last().expect("walks record every gate").1
    }

    /// State just before the first gate named `name`.
    pub fn before(&self, name: &str) -> Option<&WalkState> {
        let pos = self.steps.iter().position(|(g, _)| g.starts_with(name))?;
        pos.checked_sub(1).map(|i| &self.steps[i].1)
    }

    pub fn after(&self, name: &str) -> Option<&WalkState> {
        self.steps.iter().find(|(g, _)| g.starts_with(name)).map(|(_, s)| s)
    }
}

/// Follow a computational basis state through `circuit` gate by gate.
pub fn basis_walk(circuit: &Circuit, bits: &str) -> Result<BasisWalk> {
    if bits.len() != circuit.n_qubits {
        return Err(Error::DimensionMismatch { expected: circuit.n_qubits, found: bits.len() });
    }
    let mut state = StateVector::from_bits(bits)?;
    let mut steps = Vec::with_capacity(circuit.ops.len());
    for op in &circuit.ops {
        state = tensor_embed(&op.unitary, &op.sites, circuit.n_qubits)?.apply(&state)?;
        steps.push((op.to_string(), WalkState::of(&state)));
    }
    Ok(BasisWalk { input: bits.to_string(), steps })
}
