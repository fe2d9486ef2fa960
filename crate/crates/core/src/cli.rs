//! Command-line frontend.
//!
//! Exit codes: 0 success, 1 a checked quantity exceeded its tolerance, 2 usage
//! error. Energies are in units of `J`, times in units of `1/J`. CSV output
//! uses 17 significant digits; JSON uses shortest round-trip floats.
//!
//! `--config file.json` supplies flag values from a JSON object whose keys
//! are flag names (`"samples": 200`, `"eps": [0.001, 0.01]`). Flags given on
//! the command line take precedence.

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::circuits::{verify_ctrl_iswap2_circuit, verify_ctrl_x_circuit, CircuitReport, DriveSource};
use crate::driving::{gate_time_accounting, run_iswap_protocol, ProtocolParams, TargetGate};
use crate::eigengate::{compare_forms, so3_checks};
use crate::error::{Error, Result};
use crate::experiments::{
    fig2_csv, fig3_csv, fmt_f64, ghz_demo, pst_demo, sweep_fig2, sweep_fig3, SweepConfig, SweepMetadata,
};
use crate::hamiltonians::{apply_coupling_noise, build_hk, hopping_matrix, ChainSpec, DriveSign};
use crate::krawtchouk::{
    build_basis, conjugate_phase, m1_bruteforce, m1_closed_form, m2_closed_form, m2_pair_bruteforce,
    meixner_identity_check,
};
use crate::linalg::hermitian_eigendecompose;

pub const THREADS_ENV: &str = "KRAW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "krawchain", version, about = "Krawtchouk chain eigengates, resonant iSWAP_N driving and noise sweeps")]
pub struct Cli {
    /// JSON object of flag values; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    CtrlX,
    CtrlIswap2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Iswap,
    Phase,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-particle spectrum of the (optionally noisy) chain.
    Spectrum(SpectrumArgs),
    /// Closed-form driving matrix elements against brute force.
    MatrixElements(MatrixArgs),
    /// Eigengate mapping, intertwining and so(3) checks.
    EigengateCheck(EigengateArgs),
    /// One run of the resonant iSWAP_N protocol.
    Drive(DriveArgs),
    /// Seeded Monte Carlo noise sweep (figure 2: protocol, figure 3: eigengate).
    NoiseSweep(SweepArgs),
    /// Controlled-gate constructions from iSWAP_N.
    CircuitVerify(CircuitArgs),
    /// GHZ state from a pi/J Krawtchouk pulse.
    Ghz(QubitArgs),
    /// Perfect state transfer of single excitations.
    Pst(QubitArgs),
    /// Every identity check up to a chain length.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Number of qubits N.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub out: Format,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Number of qubits N; odd N gives M^(1), even N gives M^(2).
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
}

#[derive(Debug, Args)]
pub struct EigengateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
}

#[derive(Debug, Args)]
pub struct DriveArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: u32,
    #[arg(long, default_value_t = 1.0)]
    pub j: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Target::Iswap)]
    pub target: Target,
    /// Drive for the full time without the mid-drive H^Z pulse.
    #[arg(long)]
    pub no_inversion: bool,
    /// Drive sites j (left end of each pair); default: strongest element.
    #[arg(long, value_delimiter = ',')]
    pub sites: Option<Vec<usize>>,
    #[arg(long)]
    pub sign: Option<DriveSign>,
    /// Drive frequency in units of J; default: the computed resonance.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Gate-time penalty reference J_max, in units of J.
    #[arg(long, default_value_t = 1.0)]
    pub j_max: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub out: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub figure: u8,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker cap; falls back to KRAW_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV destination; a `.meta.json` sidecar is written beside it.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CircuitArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long)]
    pub n: usize,
    /// Replace the ideal iSWAP_N / PHASE_N by the simulated protocol.
    #[arg(long)]
    pub use_simulated_drive: bool,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
}

#[derive(Debug, Args)]
pub struct QubitArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
}

const SUBCOMMANDS: [&str; 9] =
    ["spectrum", "matrix-elements", "eigengate-check", "drive", "noise-sweep", "circuit-verify", "ghz", "pst", "verify-all"];

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Insert flags from the JSON config after the subcommand, skipping any the
/// user already passed.
pub fn merge_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = std::fs::read_to_string(&path)?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)? else {
        return Err(Error::invalid(format!("{path}: config must be a JSON object")));
    };
    let given: HashSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut extra = Vec::new();
    for (key, value) in map {
        let flag = key.replace('_', "-");
        if given.contains(&flag) {
            continue;
        }
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::invalid(format!("config key `{key}`: unsupported value {other}"))),
        };
        match &value {
            Value::Bool(true) => extra.push(format!("--{flag}")),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
                extra.push(format!("--{flag}"));
                extra.push(parts.join(","));
            }
            v => {
                extra.push(format!("--{flag}"));
                extra.push(scalar(v)?);
            }
        }
    }
    let at = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())).map_or(args.len(), |i| i + 1);
    let mut merged = args;
    merged.splice(at..at, extra);
    Ok(merged)
}

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(&cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e @ (Error::InvalidParameter(_) | Error::Parity(_) | Error::SiteOutOfRange { .. })) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Runs a command; `Ok(false)` means a check failed.
fn execute(cmd: &Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Spectrum(a) => spectrum(a, out),
        Command::MatrixElements(a) => matrix_elements(a, out),
        Command::EigengateCheck(a) => eigengate_check(a, out),
        Command::Drive(a) => drive(a, out),
        Command::NoiseSweep(a) => noise_sweep(a, out),
        Command::CircuitVerify(a) => circuit_verify(a, out),
        Command::Ghz(a) => {
            let g = ghz_demo(a.n)?;
            json(out, &g)?;
            Ok(g.fidelity > 1.0 - 1e-10)
        }
        Command::Pst(a) => {
            let p = pst_demo(a.n)?;
            json(out, &p)?;
            Ok(p.max_infidelity < 1e-10)
        }
        Command::VerifyAll(a) => {
            let checks = verify_all(a.n_max)?;
            for c in &checks {
                writeln!(out, "{c}")?;
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            writeln!(out, "{} checks, {} failed", checks.len(), failed)?;
            Ok(failed == 0)
        }
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    k: usize,
    lambda: f64,
    expected: f64,
    abs_error: f64,
}

/// Eigenvalues of the built one-excitation hopping matrix against `k - n/2`.
pub fn single_particle_spectrum(spec: &ChainSpec) -> Result<Vec<f64>> {
    let mut values = hermitian_eigendecompose(&hopping_matrix(&spec.couplings))?.values;
    values.sort_by(f64::total_cmp);
    Ok(values.into_iter().map(|v| v / spec.j).collect())
}

fn spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> Result<bool> {
    let spec = apply_coupling_noise(&ChainSpec::krawtchouk(a.n, a.j)?.with_noise(a.eps, a.seed))?;
    let n = spec.n();
    let rows: Vec<SpectrumRow> = single_particle_spectrum(&spec)?
        .into_iter()
        .enumerate()
        .map(|(k, lambda)| {
            let expected = k as f64 - n as f64 / 2.0;
            SpectrumRow { k, lambda, expected, abs_error: (lambda - expected).abs() }
        })
        .collect();
    match a.out {
        Format::Csv => {
            writeln!(out, "k,lambda_per_J,expected_per_J,abs_error")?;
            for r in &rows {
                writeln!(out, "{},{},{},{}", r.k, fmt_f64(r.lambda), fmt_f64(r.expected), fmt_f64(r.abs_error))?;
            }
        }
        Format::Json => json(out, &rows)?,
    }
    Ok(a.eps > 0.0 || rows.iter().all(|r| r.abs_error < 1e-10))
}

#[derive(Serialize)]
struct M2Row {
    j: usize,
    d: usize,
    closed_form: f64,
    bruteforce: Option<f64>,
    conjugate: Option<f64>,
    conjugate_phase: i8,
    identities_hold: [bool; 2],
}

const BRUTE_MAX_N: usize = 7;

fn matrix_elements(a: &MatrixArgs, out: &mut dyn Write) -> Result<bool> {
    if a.n < 2 {
        return Err(Error::invalid("matrix elements need N >= 2"));
    }
    let n = a.n - 1;
    if a.n % 2 == 1 {
        let r = m1_closed_form(n)?;
        let brute = if n <= BRUTE_MAX_N { Some(m1_bruteforce(n)?) } else { None };
        let ok = (r.closed - r.minor_product).abs() < 1e-12 && brute.is_none_or(|b| (b - r.closed).abs() < 1e-12);
        match a.out {
            Format::Json => json(out, &serde_json::json!({ "N": a.n, "M1": r, "bruteforce": brute }))?,
            Format::Csv => {
                writeln!(out, "n,closed_form,minor_product,bruteforce")?;
                let b = brute.map(fmt_f64).unwrap_or_default();
                writeln!(out, "{n},{},{},{b}", fmt_f64(r.closed), fmt_f64(r.minor_product))?;
            }
        }
        return Ok(ok);
    }
    let phase = conjugate_phase(a.n)?;
    let d = n.div_ceil(2);
    let mut rows = Vec::new();
    let mut ok = true;
    for j in 0..=n - d {
        let r = m2_closed_form(n, j)?;
        let (brute, conj) = if n <= BRUTE_MAX_N {
            let (b, c) = m2_pair_bruteforce(n, j)?;
            ok &= (b - r.value).abs() < 1e-12 && (c - phase as f64 * b).abs() < 1e-12;
            (Some(b), Some(c))
        } else {
            (None, None)
        };
        rows.push(M2Row {
            j,
            d,
            closed_form: r.value,
            bruteforce: brute,
            conjugate: conj,
            conjugate_phase: phase,
            identities_hold: [r.identities[0].holds, r.identities[1].holds],
        });
    }
    match a.out {
        Format::Json => json(out, &serde_json::json!({ "N": a.n, "n": n, "M2": rows }))?,
        Format::Csv => {
            writeln!(out, "j,d,closed_form,bruteforce,conjugate,conjugate_phase")?;
            for r in &rows {
                let o = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
                writeln!(out, "{},{},{},{},{},{}", r.j, r.d, fmt_f64(r.closed_form), o(r.bruteforce), o(r.conjugate), r.conjugate_phase)?;
            }
        }
    }
    Ok(ok)
}

fn eigengate_check(a: &EigengateArgs, out: &mut dyn Write) -> Result<bool> {
    let cmp = compare_forms(a.n, a.j)?;
    let so3 = so3_checks(a.n, a.j)?;
    let hk_norm = build_hk(&ChainSpec::krawtchouk(a.n, a.j)?)?.max_abs();
    let mapping = cmp.variants.iter().all(|v| v.min_overlap > 1.0 - 1e-9 && v.max_phase_error < 1e-9);
    let intertwining = cmp.variants.iter().all(|v| v.intertwining < 1e-9 * hk_norm.max(1.0));
    json(
        out,
        &serde_json::json!({
            "N": a.n,
            "J": a.j,
            "variants": cmp.variants.iter().map(|v| serde_json::json!({
                "variant": v.variant,
                "unitarity": v.unitarity,
                "min_overlap": v.min_overlap,
                "max_phase_error": v.max_phase_error,
                "intertwining": v.intertwining,
            })).collect::<Vec<_>>(),
            "max_entry_difference": cmp.max_entry_difference,
            "so3": so3,
            "pass": { "mapping": mapping, "intertwining": intertwining, "so3": so3.max_residual() < 1e-9 },
        }),
    )?;
    Ok(mapping && intertwining && so3.max_residual() < 1e-9)
}

#[derive(Serialize)]
struct DriveReport {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: u32,
    #[serde(rename = "J")]
    j: f64,
    eps: f64,
    seed: u64,
    target: &'static str,
    halfway_inversion: bool,
    error: f64,
    omega: f64,
    #[serde(rename = "J_D")]
    j_d: f64,
    coupling_a: f64,
    drive_phase: f64,
    tau_d: f64,
    sites: Vec<usize>,
    sign: char,
    unitarity: f64,
    transition_overlaps: (f64, f64),
    iswap2_equivalents: f64,
}

fn drive(a: &DriveArgs, out: &mut dyn Write) -> Result<bool> {
    let mut p = ProtocolParams::new(a.n, a.m).with_noise(a.eps, a.seed);
    p.j = a.j;
    p.target = match a.target {
        Target::Iswap => TargetGate::Iswap,
        Target::Phase => TargetGate::Phase,
    };
    p.halfway_inversion = !a.no_inversion;
    p.drive_sites = a.sites.clone();
    p.sign = a.sign;
    p.omega_override = a.omega.map(|w| w * a.j);
    let o = run_iswap_protocol(&p)?;
    let gate_time = gate_time_accounting(a.n, a.m, a.j, a.j_max * a.j)?;
    let r = DriveReport {
        n: a.n,
        m: a.m,
        j: a.j,
        eps: a.eps,
        seed: a.seed,
        target: match a.target {
            Target::Iswap => "iswap",
            Target::Phase => "phase",
        },
        halfway_inversion: p.halfway_inversion,
        error: o.error,
        omega: o.omega / a.j,
        j_d: o.j_d / a.j,
        coupling_a: o.coupling_a / a.j,
        drive_phase: o.phase,
        tau_d: o.tau_d * a.j,
        sites: o.sites,
        sign: o.sign.symbol(),
        unitarity: o.unitarity,
        transition_overlaps: o.transition_overlaps,
        iswap2_equivalents: gate_time.iswap2_equivalents,
    };
    match a.out {
        Format::Json => json(out, &r)?,
        Format::Csv => {
            writeln!(out, "N,M,eps,seed,error,omega_per_J,J_D_per_J,tau_d_per_inv_J,iswap2_equivalents")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                r.m,
                fmt_f64(r.eps),
                r.seed,
                fmt_f64(r.error),
                fmt_f64(r.omega),
                fmt_f64(r.j_d),
                fmt_f64(r.tau_d),
                fmt_f64(r.iswap2_equivalents)
            )?;
        }
    }
    Ok(o.unitarity < 1e-8)
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(format!("{THREADS_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn noise_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<bool> {
    let mut cfg = if a.figure == 2 { SweepConfig::fig2() } else { SweepConfig::fig3() };
    if let Some(n) = &a.n {
        cfg.n_values = n.clone();
    }
    if let Some(m) = &a.m {
        cfg.m_values = m.clone();
    }
    if let Some(e) = &a.eps {
        cfg.eps_values = e.clone();
    }
    if let Some(s) = a.samples {
        cfg.samples = s;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    cfg.threads = match a.threads {
        Some(t) => Some(t),
        None => threads_from_env()?,
    };
    cfg.validate()?;
    let started = Instant::now();
    let csv = if a.figure == 2 { fig2_csv(&sweep_fig2(&cfg)?) } else { fig3_csv(&sweep_fig3(&cfg)?) };
    match &a.output {
        Some(path) => {
            std::fs::write(path, &csv)?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta.json");
            let text = serde_json::to_string_pretty(&SweepMetadata::new(&cfg, started))?;
            std::fs::write(PathBuf::from(meta), text + "\n")?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(true)
}

fn circuit_verify(a: &CircuitArgs, out: &mut dyn Write) -> Result<bool> {
    let source = if a.use_simulated_drive { DriveSource::Simulated { m: a.m } } else { DriveSource::Ideal };
    let r: CircuitReport = match a.which {
        Which::CtrlX => verify_ctrl_x_circuit(a.n, source)?,
        Which::CtrlIswap2 => verify_ctrl_iswap2_circuit(a.n, source)?,
    };
    json(out, &r)?;
    Ok(a.use_simulated_drive || (r.deviation < 1e-10 && r.ancilla_leakage < 1e-10))
}

/// One line of the identity suite.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<40} {:.3e} (tol {:.1e})", self.name, self.value, self.tolerance)
    }
}

/// Identity suite for chains of up to `n_max` qubits.
pub fn verify_all(n_max: usize) -> Result<Vec<Check>> {
    if n_max < 2 {
        return Err(Error::invalid("verify-all needs --n-max >= 2"));
    }
    let mut checks = Vec::new();
    for nq in 2..=n_max {
        let spec = ChainSpec::krawtchouk(nq, 1.0)?;
        let basis = build_basis(nq - 1, 1.0)?;
        let err = single_particle_spectrum(&spec)?
            .iter()
            .enumerate()
            .map(|(k, l)| (l - (k as f64 - (nq - 1) as f64 / 2.0)).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("spectrum N={nq}"), err, 1e-10));
        let resid = basis
            .orthogonality_residual()
            .max(basis.symmetry_residual())
            .max(basis.diagonalization_residual(&hopping_matrix(&spec.couplings)));
        checks.push(Check::at_most(format!("krawtchouk basis N={nq}"), resid, 1e-10));
    }
    for nq in (2..=n_max.min(8)).step_by(2) {
        let cmp = compare_forms(nq, 1.0)?;
        let hk_norm = build_hk(&ChainSpec::krawtchouk(nq, 1.0)?)?.max_abs();
        for v in &cmp.variants {
            let name = v.variant.name();
            checks.push(Check::at_most(format!("eigengate {name} overlap N={nq}"), 1.0 - v.min_overlap, 1e-9));
            checks.push(Check::at_most(format!("eigengate {name} phases N={nq}"), v.max_phase_error, 1e-9));
            checks.push(Check::at_most(format!("intertwining {name} N={nq}"), v.intertwining / hk_norm, 1e-9));
        }
    }
    for nq in 2..=n_max.min(8) {
        checks.push(Check::at_most(format!("so(3) and BCH N={nq}"), so3_checks(nq, 1.0)?.max_residual(), 1e-9));
    }
    for n in 1..=n_max.clamp(1, 9) {
        checks.push(Check::at_most(format!("Meixner n={n}"), meixner_identity_check(n)?, 1e-9));
    }
    for n in (2..=(n_max - 1).min(6)).step_by(2) {
        let r = m1_closed_form(n)?;
        let diff = (r.closed - m1_bruteforce(n)?).abs().max((r.closed - r.minor_product).abs());
        checks.push(Check::at_most(format!("M1 closed vs brute n={n}"), diff, 1e-12));
    }
    for n in (3..=(n_max - 1).min(BRUTE_MAX_N)).step_by(2) {
        let phase = conjugate_phase(n + 1)? as f64;
        let mut diff: f64 = 0.0;
        for j in 0..=n - n.div_ceil(2) {
            let (b, c) = m2_pair_bruteforce(n, j)?;
            diff = diff.max((m2_closed_form(n, j)?.value - b).abs()).max((c - phase * b).abs());
        }
        checks.push(Check::at_most(format!("M2 closed vs brute n={n}"), diff, 1e-12));
    }
    for nq in 2..=n_max {
        checks.push(Check::at_most(format!("PST N={nq}"), pst_demo(nq)?.max_infidelity, 1e-10));
    }
    for nq in (3..=n_max.max(5)).step_by(2) {
        checks.push(Check::at_most(format!("GHZ N={nq}"), 1.0 - ghz_demo(nq)?.fidelity, 1e-10));
    }
    for nq in (4..=n_max).step_by(2) {
        let x = verify_ctrl_x_circuit(nq, DriveSource::Ideal)?;
        checks.push(Check::at_most(format!("ctrl-X circuit N={nq}"), x.deviation.max(x.ancilla_leakage), 1e-10));
        let s = verify_ctrl_iswap2_circuit(nq, DriveSource::Ideal)?;
        checks.push(Check::at_most(format!("ctrl-iSWAP2 circuit N={nq}"), s.deviation, 1e-10));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv: Vec<String> = std::iter::once("krawchain").chain(args.iter().copied()).map(String::from).collect();
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn spectrum_csv() {
        let (code, out, _) = call(&["spectrum", "--n", "6", "--j", "1"]);
        assert_eq!(code, 0);
        let last = out.lines().last().unwrap();
        assert!(last.starts_with("5,2.5000000000000"), "{last}");
        assert_eq!(out.lines().count(), 7);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["spectrum"]).0, 2);
        assert_eq!(call(&["spectrum", "--n", "4", "--bogus"]).0, 2);
        assert_eq!(call(&["ghz", "--n", "4"]).0, 2);
        assert_eq!(call(&["noise-sweep", "--figure", "5"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn matrix_elements_pass() {
        let (code, out, _) = call(&["matrix-elements", "--n", "6"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("\"closed_form\": 0.078125"));
        assert_eq!(call(&["matrix-elements", "--n", "3"]).0, 0);
    }

    #[test]
    fn config_file_merges_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n": 4, "j": 2.0, "out": "json"}"#).unwrap();
        let p = path.to_str().unwrap();
        let (code, out, _) = call(&["spectrum", "--config", p]);
        assert_eq!(code, 0);
        assert!(out.trim_start().starts_with('['));
        let (code, out, _) = call(&["--config", p, "spectrum", "--out", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 5);
    }

    #[test]
    fn circuit_and_demos() {
        assert_eq!(call(&["circuit-verify", "--which", "ctrl-x", "--n", "4"]).0, 0);
        assert_eq!(call(&["circuit-verify", "--which", "ctrl-iswap2", "--n", "6"]).0, 0);
        assert_eq!(call(&["ghz", "--n", "5"]).0, 0);
        assert_eq!(call(&["pst", "--n", "6"]).0, 0);
    }

    #[test]
    fn small_verify_all() {
        let checks = verify_all(4).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        assert!(checks.iter().any(|c| c.name.starts_with("M2")));
    }
}
