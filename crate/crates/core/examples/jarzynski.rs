//! Checks two consequences of exact Metropolis adjustment on a tuned
//! sampler: the stationary mean of `e^{-W}` is one, and accepted proposals
//! have positive work half of the time.
//!
//! cargo run --release --example jarzynski -- [transitions]

use mams::adaptation::{run_tuning, TuningSchedule};
use mams::diagnostics::mean_and_se_correlated;
use mams::models::Gaussian;
use mams::{Chain, ExactSampler, Preconditioned, Sampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DIM: usize = 100;

fn main() -> mams::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(100_000, |a| a.parse().expect("transitions"));
    let target = Gaussian::standard(DIM)?;
    for sampler in [Sampler::Mams, Sampler::MamsLangevin, Sampler::Hmc] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = vec![0.0; DIM];
        target.sample_exact(&mut rng, &mut x);
        let tuned = run_tuning(&target, sampler, &TuningSchedule::new(200_000), x.clone(), &mut rng)?.config;
        let pre = Preconditioned::new(&target, tuned.scales.clone())?;
        target.sample_exact(&mut rng, &mut x);
        let mut xt = vec![0.0; DIM];
        pre.to_transformed(&x, &mut xt);
        let mut chain = Chain::new(pre, sampler, tuned.kernel.clone(), xt, rng)?;
        let mut boltzmann = Vec::with_capacity(n);
        let mut positive = Vec::new();
        for _ in 0..n {
            let s = chain.step();
            boltzmann.push((-s.work).exp());
            if s.accepted {
                positive.push(if s.work > 0.0 { 1.0 } else { 0.0 });
            }
        }
        let (m, se) = mean_and_se_correlated(&boltzmann)?;
        let (p, se_p) = mean_and_se_correlated(&positive)?;
        println!(
            "{:<14} eps = {:.3}  accept = {:.3}  E[exp(-W)] = {m:.4} ± {se:.4}  P(W > 0 | accepted) = {p:.4} ± {se_p:.4}",
            sampler.name(),
            tuned.kernel.step_size,
            chain.stats().accept_rate()
        );
    }
    Ok(())
}
