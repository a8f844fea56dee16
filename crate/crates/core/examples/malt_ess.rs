//! Continuous-time Langevin-refreshed dynamics on Gaussians: effective sample
//! size per unit time in the worst direction, as a function of damping and
//! trajectory time, and its maximizer.
//!
//! cargo run --release --example malt_ess -- [out.csv]

use mams::adaptation::{optimize_malt, worst_direction_ess};

fn main() -> mams::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "malt_ess.csv".into());
    let mut w = csv::Writer::from_path(&out)?;
    w.write_record(["beta", "t", "worst_ess_per_time"])?;
    for i in 1..50 {
        let beta = i as f64 / 50.0;
        for j in 1..=60 {
            let t = j as f64 * 0.05;
            w.write_record([beta.to_string(), t.to_string(), (worst_direction_ess(beta, t) / t).to_string()])?;
        }
    }
    w.flush()?;
    let opt = optimize_malt();
    println!(
        "optimum: beta·σ_max = {:.4}, T/σ_max = {:.4}, ESS/T = {:.4}, (1/beta)/T = {:.4}",
        opt.beta,
        opt.t,
        opt.ess_per_time,
        opt.ratio()
    );
    println!("surface written to {out}");
    Ok(())
}
