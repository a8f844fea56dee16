//! Plain HMC: Gaussian velocities, Hamiltonian leapfrog, Metropolis on the
//! canonical energy error. Shares the proposal and schedule machinery.

use rand::Rng;

use crate::dynamics::{ChainState, Flavor};
use crate::proposal::{metropolis_step, ProposalOutcome};
use crate::schedule::TrajectorySchedule;
use crate::target::Target;

pub fn hmc_step<T: Target + ?Sized, R: Rng + ?Sized>(
    state: &mut ChainState,
    eps: f64,
    schedule: &mut TrajectorySchedule,
    target: &T,
    rng: &mut R,
) -> ProposalOutcome {
    metropolis_step(state, eps, schedule, true, target, Flavor::Canonical, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Gaussian;
    use crate::proposal::{propose, refresh_gaussian_into};
    use crate::schedule::SequenceKind;
    use crate::target::Flat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn free_flight_on_flat_target() {
        let t = Flat { dim: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut u = vec![0.0; 3];
        refresh_gaussian_into(&mut u, &mut rng);
        let s = ChainState::new(&t, vec![0.0; 3], u.clone());
        let out = propose(&s, 0.5, 4, &t, Flavor::Canonical);
        assert_eq!(out.work, 0.0);
        for (x, v) in out.end_state.z.x.iter().zip(&u) {
            assert!((x - 2.0 * v).abs() < 1e-14);
        }
        let mut s = s;
        let mut sched = TrajectorySchedule::new(4.0, SequenceKind::Fixed).unwrap();
        assert!(hmc_step(&mut s, 0.5, &mut sched, &t, &mut rng).accepted);
    }

    #[test]
    fn work_matches_oscillator_recurrence() {
        // Leapfrog on H = (x² + p²)/2 in one dimension, duplicated across two coordinates.
        let g = Gaussian::standard(2).unwrap();
        let (x0, p0, eps, n) = (0.8, -0.4, 0.1, 25);
        let (mut x, mut p) = (x0, p0);
        for _ in 0..n {
            p -= 0.5 * eps * x;
            x += eps * p;
            p -= 0.5 * eps * x;
        }
        let expected = 2.0 * (0.5 * (x * x + p * p) - 0.5 * (x0 * x0 + p0 * p0));
        let s = ChainState::new(&g, vec![x0, x0], vec![p0, p0]);
        let out = propose(&s, eps, n, &g, Flavor::Canonical);
        assert!((out.work - expected).abs() < 1e-13, "{} vs {expected}", out.work);
    }
}
