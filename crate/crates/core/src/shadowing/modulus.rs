use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{perturbed_orbit, shadow_interval, shadow_shift, DEFAULT_INTERVAL_CAP};
use crate::error::{Error, Result};
use crate::rng;
use crate::systems::{State, System};

/// Fraction of trials that must shadow for a delta to count as passing.
pub const SUCCESS_RATE: f64 = 0.95;

const MAX_DOUBLINGS: usize = 32;
const MAX_HALVINGS: usize = 64;
const BISECTIONS: usize = 12;
const START_SYMBOLS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusRow {
    pub delta: f64,
    pub successes: usize,
    pub trials: usize,
    /// Trials stopped by the interval cap; they count as non-successes.
    pub resource_aborts: usize,
}

impl ModulusRow {
    pub fn passes(&self) -> bool {
        self.successes as f64 >= SUCCESS_RATE * self.trials as f64
    }

    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusReport {
    pub epsilon: f64,
    /// Largest tested delta that passed, or 0 if none did.
    pub delta_hat: f64,
    /// Every tested delta, ascending.
    pub rows: Vec<ModulusRow>,
}

#[derive(Debug, Clone)]
pub struct ModulusConfig {
    pub epsilon: f64,
    pub trials: usize,
    pub length: usize,
    pub seed: u64,
    pub cap: usize,
}

impl ModulusConfig {
    pub fn new(epsilon: f64, trials: usize, length: usize, seed: u64) -> Self {
        ModulusConfig { epsilon, trials, length, seed, cap: DEFAULT_INTERVAL_CAP }
    }

    /// Success fraction at one delta. Trial `j` uses the same start and
    /// noise stream at every delta.
    pub fn evaluate(&self, system: &System, delta: f64) -> Result<ModulusRow> {
        let outcomes: Vec<Trial> = (0..self.trials)
            .into_par_iter()
            .map(|j| self.trial(system, delta, j as u64))
            .collect::<Result<_>>()?;
        Ok(ModulusRow {
            delta,
            successes: outcomes.iter().filter(|t| matches!(t, Trial::Shadowed)).count(),
            trials: self.trials,
            resource_aborts: outcomes.iter().filter(|t| matches!(t, Trial::Aborted)).count(),
        })
    }

    fn trial(&self, system: &System, delta: f64, j: u64) -> Result<Trial> {
        let mut r = rng::stream(self.seed, rng::tag(&[0x4d4f_4455, j]));
        let x0 = match system {
            System::Shift(s) => State::Word(s.random_point(START_SYMBOLS, &mut r)),
            _ => {
                let (lo, hi) = system.domain().unwrap();
                State::Point(r.random_range(lo..=hi))
            }
        };
        let po = perturbed_orbit(system, &x0, self.length, delta, rng::tag(&[self.seed, j]))?;
        let shadowed = match system {
            System::Shift(s) => shadow_shift(s, &po)?.within(self.epsilon),
            _ => match shadow_interval(system, &po, self.epsilon, self.cap) {
                Ok(out) => out.succeeded(self.epsilon),
                Err(Error::ResourceCap { .. }) => return Ok(Trial::Aborted),
                Err(e) => return Err(e),
            },
        };
        Ok(if shadowed { Trial::Shadowed } else { Trial::Missed })
    }

    /// Brackets the pass/fail boundary by doubling or halving from
    /// `2·epsilon`, then bisects.
    pub fn run(&self, system: &System) -> Result<ModulusReport> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.length < 2 {
            return Err(Error::InvalidArgument("pseudo-orbit length must be at least 2".into()));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon {} must be positive", self.epsilon)));
        }
        let ceiling = match system.domain() {
            Some((lo, hi)) => hi - lo,
            None => 1.0,
        };
        let mut rows = Vec::new();
        let test = |delta: f64, rows: &mut Vec<ModulusRow>| -> Result<bool> {
            let row = self.evaluate(system, delta)?;
            let pass = row.passes();
            rows.push(row);
            Ok(pass)
        };
        let start = (2.0 * self.epsilon).min(ceiling);
        let (mut lo, mut hi) = (None, None);
        if test(start, &mut rows)? {
            lo = Some(start);
            let mut d = start;
            for _ in 0..MAX_DOUBLINGS {
                d *= 2.0;
                if d > ceiling {
                    break;
                }
                if test(d, &mut rows)? {
                    lo = Some(d);
                } else {
                    hi = Some(d);
                    break;
                }
            }
        } else {
            hi = Some(start);
            let mut d = start;
            for _ in 0..MAX_HALVINGS {
                d /= 2.0;
                if test(d, &mut rows)? {
                    lo = Some(d);
                    break;
                }
                hi = Some(d);
            }
        }
        if let (Some(mut a), Some(mut b)) = (lo, hi) {
            for _ in 0..BISECTIONS {
                let mid = 0.5 * (a + b);
                if test(mid, &mut rows)? {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            lo = Some(a);
        }
        rows.sort_by(|x, y| x.delta.total_cmp(&y.delta));
        Ok(ModulusReport { epsilon: self.epsilon, delta_hat: lo.unwrap_or(0.0), rows })
    }
}

enum Trial {
    Shadowed,
    Missed,
    Aborted,
}

/// Estimates the largest delta whose pseudo-orbits are `epsilon`-shadowed
/// in at least 95% of seeded trials.
pub fn shadowing_modulus(system: &System, epsilon: f64, trials: usize, length: usize, seed: u64) -> Result<ModulusReport> {
    ModulusConfig::new(epsilon, trials, length, seed).run(system)
}
