//! The Metropolis-adjusted proposal: `n` leapfrog steps followed by a time
//! reversal, accepted with probability `min(1, e^{-W})` where `W` is the
//! accumulated energy error.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{leapfrog_step, normalize, time_reverse, ChainState, EnergyDelta, Flavor};
use crate::schedule::TrajectorySchedule;
use crate::target::Target;

/// Energy changes larger than this in magnitude mark a divergent proposal.
pub const DIVERGENCE_THRESHOLD: f64 = 1e10;

/// Result of one proposal (and, after [`mh_step`], of its accept decision).
#[derive(Debug, Clone)]
pub struct ProposalOutcome {
    pub end_state: ChainState,
    /// Accumulated energy error; `+∞` for divergent proposals.
    pub work: f64,
    pub energy: EnergyDelta,
    pub steps_taken: usize,
    pub grad_calls: u64,
    pub divergent: bool,
    pub accepted: bool,
}

/// Summary of one kernel transition, without the proposed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub work: f64,
    pub accept_prob: f64,
    pub accepted: bool,
    pub steps: usize,
    pub grad_calls: u64,
    pub divergent: bool,
}

pub fn is_divergent(e: &EnergyDelta) -> bool {
    !e.is_finite() || e.delta_v.abs() > DIVERGENCE_THRESHOLD || e.delta_k.abs() > DIVERGENCE_THRESHOLD
}

/// Acceptance probability `min(1, e^{-W})`, zero for NaN.
pub fn accept_probability(work: f64) -> f64 {
    if work.is_nan() {
        0.0
    } else {
        (-work).exp().min(1.0)
    }
}

/// Uniform draw on the unit sphere.
pub fn refresh_velocity<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let mut u = vec![0.0; d];
    refresh_velocity_into(&mut u, rng);
    u
}

pub fn refresh_velocity_into<R: Rng + ?Sized>(u: &mut [f64], rng: &mut R) {
    loop {
        u.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        if u.iter().any(|v| *v != 0.0) {
            break;
        }
    }
    normalize(u);
}

/// Standard-normal velocity for canonical dynamics.
pub fn refresh_gaussian_into<R: Rng + ?Sized>(u: &mut [f64], rng: &mut R) {
    u.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
}

pub fn refresh_for<R: Rng + ?Sized>(flavor: Flavor, u: &mut [f64], rng: &mut R) {
    match flavor {
        Flavor::Microcanonical => refresh_velocity_into(u, rng),
        Flavor::Canonical => refresh_gaussian_into(u, rng),
    }
}

/// Runs `n` leapfrog steps from `start` and reverses the final velocity.
///
/// The work `W` is the sum of potential and kinetic energy changes over all
/// steps. A divergence stops the trajectory and sets `W = +∞`.
pub fn propose<T: Target + ?Sized>(
    start: &ChainState,
    eps: f64,
    n: usize,
    target: &T,
    flavor: Flavor,
) -> ProposalOutcome {
    let mut state = start.clone();
    let mut energy = EnergyDelta::default();
    let mut grad_calls = 0;
    let mut divergent = false;
    for _ in 0..n {
        let step = leapfrog_step(&mut state, eps, target, flavor);
        grad_calls += 1;
        match step {
            Ok(e) if !is_divergent(&e) => energy += e,
            _ => {
                divergent = true;
                break;
            }
        }
    }
    if !divergent && is_divergent(&energy) {
        divergent = true;
    }
    time_reverse(&mut state.z);
    ProposalOutcome {
        end_state: state,
        work: if divergent { f64::INFINITY } else { energy.total() },
        energy,
        steps_taken: n,
        grad_calls,
        divergent,
        accepted: false,
    }
}

/// Draws the trajectory length, proposes, accepts with `min(1, e^{-W})` and
/// fully refreshes the velocity of the resulting state.
///
/// Random numbers are consumed in the order: trajectory length (uniform
/// schedule only), accept uniform, velocity refresh. With `metropolis` off
/// every proposal is taken, which gives the unadjusted sampler.
#[allow(clippy::too_many_arguments)]
pub fn metropolis_step<T: Target + ?Sized, R: Rng + ?Sized>(
    state: &mut ChainState,
    eps: f64,
    schedule: &mut TrajectorySchedule,
    metropolis: bool,
    target: &T,
    flavor: Flavor,
    rng: &mut R,
) -> ProposalOutcome {
    let n = schedule.draw_steps(rng);
    let mut outcome = propose(state, eps, n, target, flavor);
    let p = accept_probability(outcome.work);
    let uniform: f64 = rng.random();
    outcome.accepted = if metropolis { uniform < p } else { !outcome.divergent };
    if outcome.accepted {
        state.clone_from(&outcome.end_state);
    }
    refresh_for(flavor, &mut state.z.u, rng);
    outcome
}

/// One MAMS transition.
pub fn mh_step<T: Target + ?Sized, R: Rng + ?Sized>(
    state: &mut ChainState,
    eps: f64,
    schedule: &mut TrajectorySchedule,
    target: &T,
    rng: &mut R,
) -> ProposalOutcome {
    metropolis_step(state, eps, schedule, true, target, Flavor::Microcanonical, rng)
}

impl ProposalOutcome {
    pub fn info(&self) -> StepInfo {
        StepInfo {
            work: self.work,
            accept_prob: accept_probability(self.work),
            accepted: self.accepted,
            steps: self.steps_taken,
            grad_calls: self.grad_calls,
            divergent: self.divergent,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::norm;
    use crate::models::{build_gaussian, EigenLayout, Gaussian};
    use crate::schedule::SequenceKind;
    use crate::target::Flat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_draws_are_unit_and_isotropic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = 5;
        let n = 100_000;
        let mut mean = vec![0.0; d];
        let mut second = vec![0.0; d];
        for _ in 0..n {
            let u = refresh_velocity(d, &mut rng);
            assert!((norm(&u) - 1.0).abs() < 1e-12);
            for i in 0..d {
                mean[i] += u[i] / n as f64;
                second[i] += u[i] * u[i] / n as f64;
            }
        }
        // Var[u_i] = 1/d, Var[u_i²] = 2(d-1)/(d²(d+2)).
        let se_mean = (1.0 / d as f64 / n as f64).sqrt();
        let var_sq = 2.0 * (d - 1) as f64 / ((d * d) as f64 * (d + 2) as f64);
        let se_second = (var_sq / n as f64).sqrt();
        for i in 0..d {
            assert!(mean[i].abs() < 4.0 * se_mean);
            assert!((second[i] - 1.0 / d as f64).abs() < 4.0 * se_second);
        }
    }

    #[test]
    fn flat_target_always_accepts() {
        let t = Flat { dim: 4 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = refresh_velocity(4, &mut rng);
        let mut s = ChainState::new(&t, vec![0.0; 4], u);
        let mut sched = TrajectorySchedule::new(3.0, SequenceKind::Halton).unwrap();
        for _ in 0..100 {
            let out = mh_step(&mut s, 0.7, &mut sched, &t, &mut rng);
            assert_eq!(out.work, 0.0);
            assert!(out.accepted);
        }
    }

    #[test]
    fn divergent_proposals_are_rejected() {
        let g = build_gaussian(10, 1e12, EigenLayout::LogUniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x0: Vec<f64> = (0..10).map(|i| 1e5 * (i as f64 + 1.0)).collect();
        let mut s = ChainState::new(&g, x0.clone(), refresh_velocity(10, &mut rng));
        let mut sched = TrajectorySchedule::new(2.0, SequenceKind::Fixed).unwrap();
        let out = mh_step(&mut s, 1e6, &mut sched, &g, &mut rng);
        assert!(out.divergent);
        assert_eq!(out.work, f64::INFINITY);
        assert!(!out.accepted);
        assert_eq!(s.x(), &x0[..]);
        assert_eq!(accept_probability(f64::INFINITY), 0.0);
        assert_eq!(accept_probability(0.0), 1.0);
        assert_eq!(accept_probability(-3.0), 1.0);
    }

    #[test]
    fn proposal_is_an_involution() {
        let g = build_gaussian(6, 30.0, EigenLayout::LogUniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for flavor in [Flavor::Microcanonical, Flavor::Canonical] {
            for n in [1, 3, 8] {
                let x: Vec<f64> = (0..6).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let mut u = vec![0.0; 6];
                refresh_for(flavor, &mut u, &mut rng);
                let s = ChainState::new(&g, x, u);
                let once = propose(&s, 0.4, n, &g, flavor);
                let twice = propose(&once.end_state, 0.4, n, &g, flavor);
                for (a, b) in twice.end_state.z.x.iter().zip(&s.z.x) {
                    assert!((a - b).abs() < 1e-10);
                }
                for (a, b) in twice.end_state.z.u.iter().zip(&s.z.u) {
                    assert!((a - b).abs() < 1e-10);
                }
                assert!((once.work + twice.work).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn work_is_sum_of_step_energies() {
        let g = Gaussian::standard(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = ChainState::new(&g, vec![0.5, 1.0, -1.0], refresh_velocity(3, &mut rng));
        let out = propose(&s, 0.5, 4, &g, Flavor::Microcanonical);
        let mut manual = s.clone();
        let mut total = 0.0;
        for _ in 0..4 {
            total += leapfrog_step(&mut manual, 0.5, &g, Flavor::Microcanonical).unwrap().total();
        }
        assert!((out.work - total).abs() < 1e-14);
        assert_eq!(out.grad_calls, 4);
    }
}
