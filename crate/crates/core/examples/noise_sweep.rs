//! Small seeded sweeps of both noise experiments, printed as CSV.

use krawchain::experiments::{fig2_csv, fig3_csv, loglog_slope, sweep_fig2, sweep_fig3, SweepConfig};

fn main() -> krawchain::Result<()> {
    let mut fig3 = SweepConfig::fig3();
    fig3.n_values = vec![2, 4, 8];
    fig3.samples = 40;
    let rows = sweep_fig3(&fig3)?;
    print!("{}", fig3_csv(&rows));
    for n in &fig3.n_values {
        let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.n == *n).map(|r| (r.eps, r.mean_error)).unzip();
        println!("# N={n} slope {:.3}", loglog_slope(&x, &y)?);
    }

    let mut fig2 = SweepConfig::fig2();
    fig2.n_values = vec![4];
    fig2.m_values = vec![2, 4, 8, 16];
    fig2.eps_values = vec![0.0, 0.01];
    fig2.samples = 8;
    print!("{}", fig2_csv(&sweep_fig2(&fig2)?));
    Ok(())
}
