//! The resonant iSWAP_N protocol at the headline settings, with and without
//! the halfway inversion, plus its gate-time cost.

use krawchain::driving::{gate_time_accounting, run_iswap_protocol, ProtocolParams, TargetGate};

fn main() -> krawchain::Result<()> {
    for (n, m) in [(4, 1), (6, 4)] {
        let out = run_iswap_protocol(&ProtocolParams::new(n, m))?;
        let mut bare = ProtocolParams::new(n, m);
        bare.halfway_inversion = false;
        let bare = run_iswap_protocol(&bare)?;
        let cost = gate_time_accounting(n, m, 1.0, 1.0)?;
        println!(
            "N={n} M={m}: omega={} J_D={:.6} sites={:?} sign={} error={:.3e} (no inversion {:.3e}), {} iSWAP2 times",
            out.omega,
            out.j_d,
            out.sites,
            out.sign.symbol(),
            out.error,
            bare.error,
            cost.iswap2_equivalents
        );
    }

    let mut p = ProtocolParams::new(4, 1);
    p.target = TargetGate::Phase;
    println!("PHASE_4 from doubled drive: error {:.3e}", run_iswap_protocol(&p)?.error);

    let noisy = run_iswap_protocol(&ProtocolParams::new(6, 4).with_noise(0.01, 7))?;
    println!("N=6 M=4 eps=0.01 seed=7: error {:.3e}", noisy.error);
    Ok(())
}
