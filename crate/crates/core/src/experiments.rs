//! Seeded Monte Carlo sweeps and the closed-form demos.
//!
//! Every sample draws its own seed from [`derive_seed`], so work items are
//! independent. Samples are evaluated in parallel and collected in index
//! order, then reduced sequentially: tables do not depend on the thread count.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driving::{run_iswap_protocol, ProtocolParams};
use crate::eigengate::{analytic_eigengate_blocks, noisy_eigengate_error};
use crate::error::{Error, Result};
use crate::hamiltonians::{apply_coupling_noise, build_hk, hk_terms, ChainSpec};
use crate::linalg::{basis_index, c, expm_hermitian, Operator, Partition, StateVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    /// Protocol error against `M` under coupling noise.
    #[serde(rename = "2")]
    ProtocolNoise,
    /// Three-step eigengate trace error against `eps`.
    #[serde(rename = "3")]
    EigengateNoise,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub figure: Figure,
    pub n_values: Vec<usize>,
    /// Ignored by the eigengate sweep.
    pub m_values: Vec<u32>,
    pub eps_values: Vec<f64>,
    pub samples: usize,
    pub base_seed: u64,
    /// Worker cap; `None` uses the global rayon pool.
    #[serde(default)]
    pub threads: Option<usize>,
}

pub const DEFAULT_SAMPLES: usize = 200;
pub const FIG2_EPS: [f64; 4] = [0.0, 1e-3, 3e-3, 1e-2];
pub const FIG3_EPS: [f64; 5] = [1e-3, 1.778_279_410_038_923e-3, 3.162_277_660_168_379_5e-3, 5.623_413_251_903_491e-3, 1e-2];

impl SweepConfig {
    pub fn fig2() -> Self {
        Self {
            figure: Figure::ProtocolNoise,
            n_values: vec![4, 6],
            m_values: (1..=20).collect(),
            eps_values: FIG2_EPS.to_vec(),
            samples: DEFAULT_SAMPLES,
            base_seed: 2024,
            threads: None,
        }
    }

    pub fn fig3() -> Self {
        Self {
            figure: Figure::EigengateNoise,
            n_values: vec![2, 4, 8, 12],
            m_values: Vec::new(),
            eps_values: FIG3_EPS.to_vec(),
            samples: DEFAULT_SAMPLES,
            base_seed: 2024,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        if self.n_values.is_empty() || self.eps_values.is_empty() {
            return Err(Error::invalid("parameter grid is empty"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        if let Some(e) = self.eps_values.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(Error::invalid(format!("eps {e} outside [0, 1)")));
        }
        match self.figure {
            Figure::ProtocolNoise => {
                if self.m_values.is_empty() {
                    return Err(Error::invalid("M grid is empty"));
                }
                if let Some(n) = self.n_values.iter().find(|n| ![4, 6].contains(*n)) {
                    return Err(Error::invalid(format!("protocol sweep supports N in {{4, 6}}, got {n}")));
                }
                if let Some(m) = self.m_values.iter().find(|m| !(1..=20).contains(*m)) {
                    return Err(Error::invalid(format!("protocol sweep supports 1 <= M <= 20, got {m}")));
                }
            }
            Figure::EigengateNoise => {
                if let Some(n) = self.n_values.iter().find(|n| ![2, 4, 8, 12].contains(*n)) {
                    return Err(Error::invalid(format!("eigengate sweep supports N in {{2, 4, 8, 12}}, got {n}")));
                }
            }
        }
        Ok(())
    }

    fn run_in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(f()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64` folded over `(base, N, M, eps index, sample)`.
/// Stable across versions; the eigengate sweep passes `m = 0`.
pub fn derive_seed(base: u64, n: usize, m: u32, eps_index: usize, sample: usize) -> u64 {
    [n as u64, m as u64, eps_index as u64, sample as u64]
        .iter()
        .fold(splitmix64(base), |h, &v| splitmix64(h ^ v))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    /// Standard error of the mean; zero for a single sample.
    pub stderr: f64,
    pub samples: usize,
}

/// Mean and standard error, summed in slice order.
pub fn stats(xs: &[f64]) -> Stats {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Stats { mean, stderr, samples: n }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("slope fit needs two or more matched points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("slope fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig2Row {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: u32,
    pub eps: f64,
    pub tau_d: f64,
    pub mean_error: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig3Row {
    #[serde(rename = "N")]
    pub n: usize,
    pub eps: f64,
    pub mean_error: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn sample_failure(point: String, sample: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Sample { point: point.clone(), sample, source: Box::new(e) }
}

/// Protocol error per `(N, M, eps)`; noiseless points use one run.
pub fn sweep_fig2(config: &SweepConfig) -> Result<Vec<Fig2Row>> {
    config.validate()?;
    if config.figure != Figure::ProtocolNoise {
        return Err(Error::invalid("sweep_fig2 needs figure 2"));
    }
    config.run_in_pool(|| {
        let mut rows = Vec::new();
        for &n in &config.n_values {
            for &m in &config.m_values {
                for (ei, &eps) in config.eps_values.iter().enumerate() {
                    let count = if eps == 0.0 { 1 } else { config.samples };
                    let point = format!("N={n} M={m} eps={eps}");
                    let errors: Vec<f64> = (0..count)
                        .into_par_iter()
                        .map(|s| {
                            let p = ProtocolParams::new(n, m).with_noise(eps, derive_seed(config.base_seed, n, m, ei, s));
                            run_iswap_protocol(&p).map(|o| o.error).map_err(sample_failure(point.clone(), s))
                        })
                        .collect::<Result<_>>()?;
                    let st = stats(&errors);
                    rows.push(Fig2Row {
                        n,
                        m,
                        eps,
                        tau_d: ProtocolParams::new(n, m).tau_d(),
                        mean_error: st.mean,
                        stderr: st.stderr,
                        samples: st.samples,
                    });
                }
            }
        }
        Ok(rows)
    })?
}

/// Trace error of the noisy three-step eigengate against the analytic one.
pub fn sweep_fig3(config: &SweepConfig) -> Result<Vec<Fig3Row>> {
    config.validate()?;
    if config.figure != Figure::EigengateNoise {
        return Err(Error::invalid("sweep_fig3 needs figure 3"));
    }
    config.run_in_pool(|| {
        let mut rows = Vec::new();
        for &n in &config.n_values {
            let partition = Arc::new(Partition::excitation(n));
            let exact = analytic_eigengate_blocks(n, 1.0, &partition)?;
            for (ei, &eps) in config.eps_values.iter().enumerate() {
                let count = if eps == 0.0 { 1 } else { config.samples };
                let point = format!("N={n} eps={eps}");
                let errors: Vec<f64> = (0..count)
                    .into_par_iter()
                    .map(|s| {
                        let spec = ChainSpec::krawtchouk(n, 1.0)?.with_noise(eps, derive_seed(config.base_seed, n, 0, ei, s));
                        apply_coupling_noise(&spec)
                            .and_then(|noisy| noisy_eigengate_error(&noisy, &partition, &exact))
                            .map_err(sample_failure(point.clone(), s))
                    })
                    .collect::<Result<_>>()?;
                let st = stats(&errors);
                rows.push(Fig3Row { n, eps, mean_error: st.mean, stderr: st.stderr, samples: st.samples });
            }
        }
        Ok(rows)
    })?
}

/// `{:.16e}`: 17 significant digits, round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fig2_csv(rows: &[Fig2Row]) -> String {
    let mut out = String::from("N,M,eps,tau_d_per_inv_J,mean_error,stderr,samples\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.m,
            fmt_f64(r.eps),
            fmt_f64(r.tau_d),
            fmt_f64(r.mean_error),
            fmt_f64(r.stderr),
            r.samples
        ));
    }
    out
}

pub fn fig3_csv(rows: &[Fig3Row]) -> String {
    let mut out = String::from("N,eps,mean_trace_error,stderr,samples\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.n, fmt_f64(r.eps), fmt_f64(r.mean_error), fmt_f64(r.stderr), r.samples));
    }
    out
}

/// JSON sidecar written next to a sweep table.
#[derive(Clone, Debug, Serialize)]
pub struct SweepMetadata {
    pub config: SweepConfig,
    pub code_version: &'static str,
    pub wall_time_s: f64,
    pub seed_rule: &'static str,
}

impl SweepMetadata {
    pub fn new(config: &SweepConfig, started: Instant) -> Self {
        Self {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION"),
            wall_time_s: started.elapsed().as_secs_f64(),
            seed_rule: "splitmix64 folded over (base_seed, N, M, eps_index, sample); M = 0 for figure 3",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GhzResult {
    #[serde(rename = "N")]
    pub n: usize,
    pub fidelity: f64,
    /// `<GHZ| R P |+>^N`; the prefactor `e^{+-i pi/4}` is its inverse phase.
    pub overlap: (f64, f64),
}

/// `exp(-i pi X/4)^N exp(-i pi H^K/J) |+>^N` against `(|0^N> + |1^N>)/sqrt 2`.
pub fn ghz_demo(n: usize) -> Result<GhzResult> {
    ghz_fidelity(&ChainSpec::krawtchouk(n, 1.0)?)
}

/// GHZ construction on arbitrary couplings, pulse length `pi/J`.
pub fn ghz_fidelity(spec: &ChainSpec) -> Result<GhzResult> {
    let n = spec.n_qubits;
    if n % 2 == 0 {
        return Err(Error::Parity(format!("GHZ pulse needs odd N, got {n}")));
    }
    let dim = 1usize << n;
    let plus = StateVector::new(vec![c((dim as f64).powf(-0.5), 0.0); dim])?;
    let pulse = expm_hermitian(&build_hk(spec)?, PI / spec.j)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r1 = Operator::from_rows(&[&[c(s, 0.0), c(0.0, -s)], &[c(0.0, -s), c(s, 0.0)]])?;
    let rot = (1..n).fold(r1.clone(), |acc, _| acc.kron(&r1));
    let out = rot.apply(&pulse.apply(&plus)?)?;
    let mut g = vec![C64::new(0.0, 0.0); dim];
    g[0] = c(s, 0.0);
    g[dim - 1] = c(s, 0.0);
    let ov = StateVector::new(g)?.inner(&out)?;
    Ok(GhzResult { n, fidelity: ov.norm_sqr(), overlap: (ov.re, ov.im) })
}

#[derive(Clone, Debug, Serialize)]
pub struct PstReport {
    #[serde(rename = "N")]
    pub n: usize,
    /// `|<{n-x}| exp(-i pi H^K/J) |{x}>|` per site.
    pub mirror_overlaps: Vec<f64>,
    pub max_infidelity: f64,
}

/// Single-excitation mirror under a `pi/J` Krawtchouk pulse.
pub fn pst_demo(n: usize) -> Result<PstReport> {
    let spec = ChainSpec::krawtchouk(n, 1.0)?;
    let p = Arc::new(Partition::excitation(n));
    let u = hk_terms(&spec)?.to_blocks(&p)?.expm(PI / spec.j)?;
    let mirror_overlaps: Vec<f64> =
        (0..n).map(|x| u.get(basis_index(&[n - 1 - x], n), basis_index(&[x], n)).norm()).collect();
    let max_infidelity = mirror_overlaps.iter().map(|o| 1.0 - o).fold(0.0, f64::max);
    Ok(PstReport { n, mirror_overlaps, max_infidelity })
}

/// `|<mirror(bits)| exp(-i pi H^K/J) |bits>|` for any occupation pattern.
pub fn pst_mirror_overlap(bits: &str) -> Result<f64> {
    let n = bits.len();
    let spec = ChainSpec::krawtchouk(n, 1.0)?;
    let p = Arc::new(Partition::excitation(n));
    let u = hk_terms(&spec)?.to_blocks(&p)?.expm(PI / spec.j)?;
    let input = StateVector::from_bits(bits)?;
    let mirrored: String = bits.chars().rev().collect();
    let target = StateVector::from_bits(&mirrored)?;
    Ok(target.inner(&u.apply(&input)?)?.norm())
}
