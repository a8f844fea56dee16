//! Randomized trajectory lengths.
//!
//! A proposal takes `n = ⌈y·h⌉` steps with `h ∈ (0, 1)`. The scale `y` is
//! chosen so that `E[n] = L/ε` exactly when `h` is uniform, which corrects
//! for the upward bias of the ceiling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    #[default]
    Halton,
    Uniform,
    Fixed,
}

/// Base-2 Halton (van der Corput) sequence starting at index 1, so it never emits 0.
#[derive(Debug, Clone, Default)]
pub struct Halton {
    index: u64,
}

impl Halton {
    pub fn new() -> Self {
        Halton { index: 0 }
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

impl Iterator for Halton {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.index += 1;
        let mut i = self.index;
        let mut f = 0.5;
        let mut out = 0.0;
        while i > 0 {
            if i & 1 == 1 {
                out += f;
            }
            i >>= 1;
            f *= 0.5;
        }
        Some(out)
    }
}

/// Expected `⌈y·h⌉` for uniform `h`: `(⌊y⌋+1)(y − ⌊y⌋/2)/y`.
pub fn expected_steps(y: f64) -> f64 {
    let big_y = y.floor();
    (big_y + 1.0) * (y - 0.5 * big_y) / y
}

/// Solves `expected_steps(y) = avg_steps` for `y`.
pub fn solve_scale(avg_steps: f64) -> Result<f64> {
    if !(avg_steps.is_finite() && avg_steps >= 1.0) {
        return Err(Error::config(format!("average trajectory length {avg_steps} steps < 1")));
    }
    let big_y = (2.0 * avg_steps - 1.0).floor();
    let y = big_y * (big_y + 1.0) / (2.0 * (big_y + 1.0 - avg_steps));
    if y.is_finite() && y.floor() == big_y {
        return Ok(y);
    }
    // expected_steps is increasing in y and lies in [y/2, y], so [m, 2m] brackets the root.
    let (mut lo, mut hi) = (avg_steps, 2.0 * avg_steps);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_steps(mid) < avg_steps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone)]
pub struct TrajectorySchedule {
    avg_steps: f64,
    kind: SequenceKind,
    halton: Halton,
    scale: f64,
}

impl TrajectorySchedule {
    pub fn new(avg_steps: f64, kind: SequenceKind) -> Result<Self> {
        let scale = solve_scale(avg_steps)?;
        Ok(TrajectorySchedule { avg_steps, kind, halton: Halton::new(), scale })
    }

    /// Builds the schedule for trajectory length `l` and step size `eps`,
    /// clamping the average to at least one step.
    pub fn for_length(l: f64, eps: f64, kind: SequenceKind) -> Result<Self> {
        Self::new((l / eps).max(1.0), kind)
    }

    pub fn avg_steps(&self) -> f64 {
        self.avg_steps
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    /// Changes the average length while keeping the Halton position.
    pub fn set_avg_steps(&mut self, avg_steps: f64) -> Result<()> {
        self.scale = solve_scale(avg_steps)?;
        self.avg_steps = avg_steps;
        Ok(())
    }

    pub fn steps_for(&self, h: f64) -> usize {
        ((self.scale * h).ceil() as usize).max(1)
    }

    pub fn draw_steps<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        match self.kind {
            SequenceKind::Fixed => (self.avg_steps.round() as usize).max(1),
            SequenceKind::Halton => {
                let h = self.halton.next().expect("infinite sequence");
                self.steps_for(h)
            }
            SequenceKind::Uniform => {
                let h: f64 = rng.random();
                self.steps_for(h)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn halton_base_two_prefix() {
        let got: Vec<f64> = Halton::new().take(7).collect();
        assert_eq!(got, vec![0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875]);
    }

    #[test]
    fn scale_for_two_steps_is_three() {
        assert_eq!(solve_scale(2.0).unwrap(), 3.0);
        assert!((expected_steps(3.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn minimal_trajectory() {
        assert_eq!(solve_scale(1.0).unwrap(), 1.0);
        let mut s = TrajectorySchedule::new(1.0, SequenceKind::Uniform).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| s.draw_steps(&mut rng) == 1));
        assert_eq!(s.steps_for(1e-300), 1);
        assert_eq!(s.steps_for(0.0), 1);
    }

    #[test]
    fn rejects_short_trajectories() {
        assert!(TrajectorySchedule::new(0.5, SequenceKind::Halton).is_err());
        assert!(solve_scale(f64::NAN).is_err());
    }

    #[test]
    fn fixed_rounds() {
        let mut s = TrajectorySchedule::new(3.6, SequenceKind::Fixed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(s.draw_steps(&mut rng), 4);
    }

    #[test]
    fn scale_satisfies_expectation_identity() {
        for k in 0..400 {
            let m = 1.0 + 0.05 * k as f64;
            let y = solve_scale(m).unwrap();
            assert!((expected_steps(y) - m).abs() < 1e-9, "m={m} y={y}");
        }
    }

    #[test]
    fn uniform_draws_average_to_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = TrajectorySchedule::new(2.0, SequenceKind::Uniform).unwrap();
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.draw_steps(&mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.003, "{mean}");
    }
}
