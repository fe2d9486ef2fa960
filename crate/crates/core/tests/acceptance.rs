//! Acceptance suite. One PASS/FAIL line per criterion; exit status 1 on any failure.

use std::process::ExitCode;
use std::time::Instant;

use krawchain::circuits::{
    basis_walk, ctrl_iswap2_circuit, verify_ctrl_iswap2_circuit, verify_ctrl_x_circuit, DriveSource, WalkState,
};
use krawchain::cli::single_particle_spectrum;
use krawchain::driving::{
    drive_matrix_element, gate_time_accounting, resonance_frequency, run_iswap_protocol, ProtocolParams,
};
use krawchain::eigengate::{compare_forms, so3_checks, EigengateVariant};
use krawchain::experiments::{
    fig2_csv, fig3_csv, ghz_demo, loglog_slope, pst_demo, sweep_fig2, sweep_fig3, Figure, SweepConfig,
};
use krawchain::hamiltonians::{build_hk, ChainSpec, DriveSign};
use krawchain::krawtchouk::{
    conjugate_phase, m1_bruteforce, m1_closed_form, m2_closed_form, m2_pair_bruteforce, meixner_identity_check,
};
use krawchain::linalg::{I, ONE};
use krawchain::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn spectrum_exactness() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for nq in 2..=13 {
        let n = (nq - 1) as f64;
        let spec = ChainSpec::krawtchouk(nq, 1.0)?;
        for (k, l) in single_particle_spectrum(&spec)?.iter().enumerate() {
            worst = worst.max((l - (k as f64 - n / 2.0)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-10 && secs < 1.0, format!("max |lambda_k - J(k - n/2)| = {worst:.2e} over N <= 13 in {secs:.3} s"))
}

fn eigengate_mapping() -> Result<Outcome> {
    let (mut overlap, mut phase) = (f64::INFINITY, 0.0f64);
    for nq in [2, 4, 6, 8] {
        let cmp = compare_forms(nq, 1.0)?;
        for v in &cmp.variants {
            overlap = overlap.min(v.min_overlap);
            if v.variant == EigengateVariant::ThreeStep {
                phase = phase.max(v.max_phase_error);
            }
        }
    }
    outcome(
        overlap > 1.0 - 1e-9 && phase < 1e-9,
        format!("min overlap 1 - {:.2e}, max three-step |phase - i^(qn)| = {phase:.2e}", 1.0 - overlap),
    )
}

fn intertwining() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for nq in 2..=8 {
        let norm = build_hk(&ChainSpec::krawtchouk(nq, 1.0)?)?.max_abs();
        for v in compare_forms(nq, 1.0)?.variants {
            worst = worst.max(v.intertwining / norm);
        }
    }
    outcome(worst < 1e-9, format!("max |H^K U_K - U_K H^Z| / |H^K| = {worst:.2e} over N <= 8"))
}

fn algebra_suite() -> Result<Outcome> {
    let mut so3: f64 = 0.0;
    for nq in 2..=8 {
        let r = so3_checks(nq, 1.0)?;
        for b in &r.bch {
            if [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI].contains(&b.theta) {
                so3 = so3.max(b.residual);
            }
        }
        so3 = r.commutators.iter().copied().fold(so3, f64::max);
    }
    let mut meixner: f64 = 0.0;
    for n in 1..=9 {
        meixner = meixner.max(meixner_identity_check(n)?);
    }
    outcome(so3 < 1e-9 && meixner < 1e-9, format!("so(3)/BCH residual {so3:.2e}, Meixner residual {meixner:.2e}"))
}

fn matrix_elements() -> Result<Outcome> {
    let m1 = m1_closed_form(2)?.closed;
    let m2_3 = m2_closed_form(3, 0)?.value;
    let m2_5 = m2_closed_form(5, 1)?.value;
    let values = (m1 + 0.5).abs().max((m2_3 - 3f64.sqrt() / 8.0).abs()).max((m2_5 - 5.0 / 64.0).abs());
    let mut closed_vs_brute: f64 = 0.0;
    let mut phase: f64 = 0.0;
    for n in [2, 4, 6] {
        let r = m1_closed_form(n)?;
        closed_vs_brute = closed_vs_brute.max((r.closed - m1_bruteforce(n)?).abs());
    }
    for n in [1, 3, 5, 7] {
        let sign = conjugate_phase(n + 1)? as f64;
        for j in 0..=n - n.div_ceil(2) {
            let (direct, conj) = m2_pair_bruteforce(n, j)?;
            closed_vs_brute = closed_vs_brute.max((m2_closed_form(n, j)?.value - direct).abs());
            phase = phase.max((conj - sign * direct).abs());
        }
    }
    let amplitude: f64 = 0.5 * drive_matrix_element(6, &[1], DriveSign::Minus)?.norm();
    let amp_err = (amplitude - 5.0 / 64.0).abs();
    outcome(
        values < 1e-12 && closed_vs_brute < 1e-12 && phase < 1e-12 && amp_err < 1e-12,
        format!(
            "values {values:.1e}, closed vs brute {closed_vs_brute:.1e}, conjugate phase {phase:.1e}, A/J_D = {amplitude:.15}"
        ),
    )
}

fn headline_numbers() -> Result<Outcome> {
    let mut parts = Vec::new();
    let (w4, w6) = (resonance_frequency(4, 1.0)?, resonance_frequency(6, 1.0)?);
    let mut pass = w4 == 4.0 && w6 == 9.0;
    parts.push(format!("omega = {w4}J, {w6}J"));
    for (nq, m, tol) in [(4, 1, 1e-3), (6, 4, 5e-3)] {
        let start = Instant::now();
        let out = run_iswap_protocol(&ProtocolParams::new(nq, m))?;
        let secs = start.elapsed().as_secs_f64();
        pass &= out.error < tol && secs < 60.0;
        parts.push(format!("N={nq} M={m} error {:.3e} ({secs:.1} s)", out.error));
    }
    outcome(pass, parts.join(", "))
}

fn scaling_law() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for nq in [4, 6] {
        let (mut taus, mut errs) = (Vec::new(), Vec::new());
        for m in 2..=20 {
            let out = run_iswap_protocol(&ProtocolParams::new(nq, m))?;
            taus.push(out.tau_d);
            errs.push(out.error);
        }
        let slope = loglog_slope(&taus, &errs)?;
        pass &= (slope + 2.0).abs() <= 0.3;
        parts.push(format!("N={nq} slope {slope:.3}"));
    }
    outcome(pass, parts.join(", "))
}

fn noise_floor() -> Result<Outcome> {
    let cfg = SweepConfig {
        figure: Figure::ProtocolNoise,
        n_values: vec![6],
        m_values: vec![16, 20],
        eps_values: vec![1e-2],
        samples: 180,
        base_seed: 2024,
        threads: None,
    };
    let rows = sweep_fig2(&cfg)?;
    let (e16, e20) = (rows[0].mean_error, rows[1].mean_error);
    let ratio = e16.max(e20) / e16.min(e20);
    outcome(
        ratio <= 3.0,
        format!("N=6 eps=1e-2, 180 samples: M=16 {e16:.3e}, M=20 {e20:.3e}, ratio {ratio:.2}"),
    )
}

fn eigengate_noise() -> Result<Outcome> {
    let eps = vec![1e-3, 10f64.powf(-2.5), 1e-2];
    let cfg = SweepConfig {
        figure: Figure::EigengateNoise,
        n_values: vec![4, 8, 12],
        m_values: Vec::new(),
        eps_values: eps.clone(),
        samples: 110,
        base_seed: 2024,
        threads: None,
    };
    let rows = sweep_fig3(&cfg)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for nq in [4, 8, 12] {
        let errs: Vec<f64> = rows.iter().filter(|r| r.n == nq).map(|r| r.mean_error).collect();
        let slope = loglog_slope(&eps, &errs)?;
        pass &= (slope - 2.0).abs() <= 0.3;
        parts.push(format!("N={nq} slope {slope:.3}"));
    }
    outcome(pass, parts.join(", "))
}

fn pst_and_ghz() -> Result<Outcome> {
    let mut pst: f64 = 0.0;
    for nq in 2..=6 {
        pst = pst.max(pst_demo(nq)?.max_infidelity);
    }
    let ghz = [3, 5].iter().map(|&n| ghz_demo(n).map(|g| 1.0 - g.fidelity)).collect::<Result<Vec<_>>>()?;
    let ghz = ghz.into_iter().fold(0.0, f64::max);
    outcome(pst < 1e-10 && ghz < 1e-10, format!("PST infidelity {pst:.2e} (N <= 6), GHZ infidelity {ghz:.2e} (N = 3, 5)"))
}

fn circuit_identities() -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for nq in [4, 6] {
        let x = verify_ctrl_x_circuit(nq, DriveSource::Ideal)?;
        let s = verify_ctrl_iswap2_circuit(nq, DriveSource::Ideal)?;
        dev = dev.max(x.deviation).max(x.ancilla_leakage).max(s.deviation);
    }
    let c = ctrl_iswap2_circuit(6, DriveSource::Ideal)?;
    let walk = basis_walk(&c, "111101")?;
    let back = basis_walk(&c, "111110")?;
    let walks = walk.before("iSWAP_N") == Some(&WalkState::basis("000111", ONE))
        && walk.after("iSWAP_N") == Some(&WalkState::basis("111000", I))
        && walk.output() == &WalkState::basis("111110", I)
        && back.output() == &WalkState::basis("111101", I);
    outcome(
        dev < 1e-10 && walks,
        format!("max deviation {dev:.2e}; |111101> -> |000111> -> i|111000> -> {}", walk.output()),
    )
}

fn gate_time() -> Result<Outcome> {
    let a = gate_time_accounting(6, 4, 1.0, 1.0)?.iswap2_equivalents;
    let b = gate_time_accounting(4, 1, 1.0, 1.0)?.iswap2_equivalents;
    outcome(a == 30.0 && b == 8.0, format!("N=6 M=4: {a}, N=4 M=1: {b}"))
}

fn determinism() -> Result<Outcome> {
    let fig2 = |threads| SweepConfig {
        figure: Figure::ProtocolNoise,
        n_values: vec![4],
        m_values: vec![1, 2],
        eps_values: vec![0.0, 1e-2],
        samples: 6,
        base_seed: 7,
        threads: Some(threads),
    };
    let fig3 = |threads| SweepConfig {
        figure: Figure::EigengateNoise,
        n_values: vec![4, 8],
        m_values: Vec::new(),
        eps_values: vec![1e-3, 1e-2],
        samples: 8,
        base_seed: 7,
        threads: Some(threads),
    };
    let a2 = fig2_csv(&sweep_fig2(&fig2(1))?);
    let b2 = fig2_csv(&sweep_fig2(&fig2(4))?);
    let a3 = fig3_csv(&sweep_fig3(&fig3(1))?);
    let b3 = fig3_csv(&sweep_fig3(&fig3(3))?);
    outcome(
        a2 == b2 && a3 == b3,
        format!("fig2 tables {} bytes, fig3 tables {} bytes, 1 vs 3-4 threads", a2.len(), a3.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 13] = [
        ("spectrum exactness", spectrum_exactness),
        ("eigengate mapping", eigengate_mapping),
        ("intertwining", intertwining),
        ("so(3), BCH, Meixner", algebra_suite),
        ("matrix elements", matrix_elements),
        ("protocol headline numbers", headline_numbers),
        ("scaling law", scaling_law),
        ("noise floor", noise_floor),
        ("eigengate noise", eigengate_noise),
        ("PST and GHZ", pst_and_ghz),
        ("circuit identities", circuit_identities),
        ("gate-time accounting", gate_time),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(o) => {
                failed += usize::from(!o.pass);
                println!("{} {:>2} {name}: {} [{secs:.1} s]", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: error: {e} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
