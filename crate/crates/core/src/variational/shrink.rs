use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::lift::Lift;
use super::pressure::Perron;
use crate::error::{Error, Result};
use crate::measures::{LocalObservable, MarkovMeasure, TestFamily};
use crate::rng;
use crate::systems::ShiftSpace;

/// Independent local searches per radius.
pub const RESTARTS: usize = 4;

/// Logit floor for transitions the centre gives probability zero.
const LOGIT_FLOOR: f64 = -30.0;

/// Steps of the feasibility bisection toward the measure of maximal entropy.
const INTERPOLATION_STEPS: usize = 16;

/// Steps of the bisection back onto the ball boundary after an infeasible
/// proposal.
const BOUNDARY_STEPS: usize = 4;

/// Best entropy found inside `D(μ, ν) ≤ δ` for one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkRow {
    pub delta: f64,
    pub sup_hat: f64,
    pub distance: f64,
    /// Evaluations spent on this radius.
    pub budget_used: usize,
    pub best: MarkovMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkReport {
    pub h_nu: f64,
    /// Entropy of the measure of maximal entropy, the unconstrained sup.
    pub h_top: f64,
    pub rows: Vec<ShrinkRow>,
}

impl ShrinkReport {
    pub fn is_nonincreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_hat <= w[0].sup_hat)
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    logits: Vec<f64>,
    measure: MarkovMeasure,
    entropy: f64,
    distance: f64,
}

struct Problem<'a> {
    k: usize,
    allowed: Vec<bool>,
    words: &'a [Vec<u8>],
    family: &'a TestFamily,
    target: Vec<f64>,
}

impl Problem<'_> {
    fn evaluate(&self, logits: &[f64]) -> Option<Candidate> {
        let k = self.k;
        let mut rows = vec![vec![0.0; k]; k];
        for (i, row) in rows.iter_mut().enumerate() {
            let top = (0..k).filter(|&j| self.allowed[i * k + j]).map(|j| logits[i * k + j]).fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for j in 0..k {
                if self.allowed[i * k + j] {
                    row[j] = (logits[i * k + j] - top).exp();
                    total += row[j];
                }
            }
            row.iter_mut().for_each(|x| *x /= total);
        }
        let measure = MarkovMeasure::from_stochastic(rows).ok()?;
        Some(self.score(logits.to_vec(), measure))
    }

    fn score(&self, logits: Vec<f64>, measure: MarkovMeasure) -> Candidate {
        let ints: Vec<f64> = self.words.iter().map(|w| measure.cylinder_mass(w)).collect();
        let distance = self.family.distance(&ints, &self.target);
        Candidate { logits, entropy: measure.entropy(), measure, distance }
    }

    fn logits_of(&self, m: &MarkovMeasure) -> Vec<f64> {
        let k = self.k;
        (0..k * k)
            .map(|ij| {
                let p = m.transition(ij / k, ij % k);
                if self.allowed[ij] { if p > 0.0 { p.ln().max(LOGIT_FLOOR) } else { LOGIT_FLOOR } } else { f64::NEG_INFINITY }
            })
            .collect()
    }

    /// Mixes transition matrices `(1−t)·a + t·b`.
    fn mix(&self, a: &MarkovMeasure, b: &MarkovMeasure, t: f64) -> Option<Candidate> {
        let k = self.k;
        let rows: Vec<Vec<f64>> =
            (0..k).map(|i| (0..k).map(|j| (1.0 - t) * a.transition(i, j) + t * b.transition(i, j)).collect()).collect();
        let m = MarkovMeasure::from_stochastic(rows).ok()?;
        let logits = self.logits_of(&m);
        Some(self.score(logits, m))
    }
}

/// Entropy of the best Markov measure found within weak* distance δ of ν,
/// for each δ of a decreasing grid.
///
/// Each radius gets `budget` evaluations: a bisection along the segment
/// from ν to the measure of maximal entropy, then Gaussian hill climbing in
/// row-softmax logits from several restarts. Every feasible candidate seen
/// at any radius is pooled, so `sup_hat` is nonincreasing in δ and never
/// below `h(ν)`. The values are lower bounds on the true sup.
pub fn shrink_experiment(
    shift: &ShiftSpace,
    nu: &MarkovMeasure,
    family: &TestFamily,
    delta_grid: &[f64],
    budget: usize,
    seed: u64,
) -> Result<ShrinkReport> {
    let k = shift.alphabet_size();
    if nu.alphabet_size() != k {
        return Err(Error::InvalidArgument(format!("measure alphabet {} differs from the shift's {k}", nu.alphabet_size())));
    }
    nu.require_supported_on(shift)?;
    if delta_grid.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::InvalidArgument("radii must be finite and nonnegative".into()));
    }
    if delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("delta grid must be strictly decreasing".into()));
    }
    if budget < INTERPOLATION_STEPS + RESTARTS {
        return Err(Error::InvalidArgument(format!("budget must be at least {}", INTERPOLATION_STEPS + RESTARTS)));
    }
    let words = family.cylinder_words().ok_or(Error::KindMismatch("shrinking balls need a cylinder family"))?;
    let target: Vec<f64> = words.iter().map(|w| nu.cylinder_mass(w)).collect();
    let allowed = (0..k * k).map(|ij| shift.allows((ij / k) as u8, (ij % k) as u8)).collect();
    let problem = Problem { k, allowed, words, family, target };

    let parry = max_entropy_measure(shift)?;
    let centre = problem.score(problem.logits_of(nu), nu.clone());
    let top = problem.score(problem.logits_of(&parry), parry.clone());
    let h_top = top.entropy;
    let mut pool = vec![centre.clone(), top];
    let mut used = Vec::with_capacity(delta_grid.len());

    for (di, &delta) in delta_grid.iter().enumerate() {
        let mut spent = 0;
        // largest feasible step toward the measure of maximal entropy
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut start = centre.clone();
        for _ in 0..INTERPOLATION_STEPS {
            let t = 0.5 * (lo + hi);
            spent += 1;
            match problem.mix(nu, &parry, t) {
                Some(c) if c.distance <= delta => {
                    lo = t;
                    start = c.clone();
                    pool.push(c);
                }
                _ => hi = t,
            }
        }
        let best_pooled = best_within(&pool, delta).cloned().unwrap_or_else(|| centre.clone());
        let per_restart = (budget - spent) / RESTARTS;
        let found: Vec<Vec<Candidate>> = (0..RESTARTS)
            .into_par_iter()
            .map(|r| {
                let from = if r % 2 == 0 { &start } else { &best_pooled };
                let mut rng = rng::stream(seed, rng::tag(&[di as u64, r as u64]));
                climb(&problem, from.clone(), delta, per_restart, &mut rng)
            })
            .collect();
        spent += per_restart * RESTARTS;
        for f in found {
            pool.extend(f);
        }
        used.push(spent);
    }

    let rows = delta_grid
        .iter()
        .zip(used)
        .map(|(&delta, budget_used)| {
            let best = best_within(&pool, delta).expect("the centre is always feasible");
            ShrinkRow { delta, sup_hat: best.entropy, distance: best.distance, budget_used, best: best.measure.clone() }
        })
        .collect();
    Ok(ShrinkReport { h_nu: centre.entropy, h_top, rows })
}

fn best_within(pool: &[Candidate], delta: f64) -> Option<&Candidate> {
    pool.iter().filter(|c| c.distance <= delta).max_by(|a, b| a.entropy.total_cmp(&b.entropy))
}

/// Hill climbing with an adaptive step; returns every feasible improvement.
fn climb(problem: &Problem, start: Candidate, delta: f64, budget: usize, rng: &mut rng::Rng) -> Vec<Candidate> {
    let mut current = start;
    let mut sigma = 0.5;
    let mut spent = 0;
    let mut kept = Vec::new();
    while spent < budget {
        let proposal: Vec<f64> = current
            .logits
            .iter()
            .map(|&x| if x.is_finite() { x + sigma * rng.sample::<f64, _>(StandardNormal) } else { x })
            .collect();
        spent += 1;
        let mut next = problem.evaluate(&proposal);
        if next.as_ref().is_some_and(|c| c.distance > delta) {
            // pull back toward the current point until feasible
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut feasible = None;
            for _ in 0..BOUNDARY_STEPS.min(budget - spent) {
                let t = 0.5 * (lo + hi);
                let mixed: Vec<f64> =
                    current.logits.iter().zip(&proposal).map(|(a, b)| if a.is_finite() { a + t * (b - a) } else { *a }).collect();
                spent += 1;
                match problem.evaluate(&mixed) {
                    Some(c) if c.distance <= delta => {
                        lo = t;
                        feasible = Some(c);
                    }
                    _ => hi = t,
                }
            }
            next = feasible;
        }
        match next {
            Some(c) if c.entropy > current.entropy => {
                kept.push(c.clone());
                current = c;
                sigma = (sigma * 1.5).min(2.0);
            }
            _ => sigma = (sigma * 0.9).max(1e-4),
        }
    }
    kept
}

/// The Parry measure: the Gibbs measure of the zero potential.
pub fn max_entropy_measure(shift: &ShiftSpace) -> Result<MarkovMeasure> {
    let k = shift.alphabet_size();
    let zero = LocalObservable::new(k, 1, vec![0.0; k])?;
    let lift = Lift::new(shift, &zero)?;
    lift.require_irreducible()?;
    Perron::compute(&lift, 0.0, (0.0, 0.0))?.gibbs(&lift).markov()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::spectrum::binary_entropy;

    fn family() -> TestFamily {
        TestFamily::cylinders(&ShiftSpace::full(2).unwrap(), 16).unwrap()
    }

    #[test]
    fn parry_measures() {
        let m = max_entropy_measure(&ShiftSpace::full(3).unwrap()).unwrap();
        assert!((m.entropy() - 3f64.ln()).abs() < 1e-12);
        let g = max_entropy_measure(&ShiftSpace::golden_mean()).unwrap();
        let gold = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.entropy() - gold.ln()).abs() < 1e-12);
        assert_eq!(g.transition(1, 1), 0.0);
    }

    #[test]
    fn uniform_centre_is_already_optimal() {
        let s = ShiftSpace::full(2).unwrap();
        let nu = MarkovMeasure::bernoulli2(0.5).unwrap();
        let r = shrink_experiment(&s, &nu, &family(), &[0.2, 0.05, 0.001], 200, 1).unwrap();
        for row in &r.rows {
            assert!((row.sup_hat - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn whole_ball_reaches_topological_entropy() {
        let s = ShiftSpace::full(2).unwrap();
        let nu = MarkovMeasure::bernoulli2(0.9).unwrap();
        let r = shrink_experiment(&s, &nu, &family(), &[1.5, 1.0], 100, 3).unwrap();
        for row in &r.rows {
            assert!((row.sup_hat - 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_decreases_toward_the_centre_entropy() {
        let s = ShiftSpace::full(2).unwrap();
        let nu = MarkovMeasure::bernoulli2(0.8).unwrap();
        let grid = [0.2, 0.1, 0.05, 0.02];
        let r = shrink_experiment(&s, &nu, &family(), &grid, 400, 7).unwrap();
        let h = binary_entropy(0.8);
        assert!((r.h_nu - h).abs() < 1e-12);
        assert!(r.is_nonincreasing());
        assert!(r.rows.windows(2).all(|w| w[1].sup_hat < w[0].sup_hat));
        for row in &r.rows {
            assert!(row.sup_hat >= h - 1e-9);
            assert!(row.distance <= row.delta);
            assert!(row.budget_used <= 400);
        }
    }

    #[test]
    fn zero_radius_keeps_the_centre() {
        let s = ShiftSpace::full(2).unwrap();
        let nu = MarkovMeasure::bernoulli2(0.3).unwrap();
        let r = shrink_experiment(&s, &nu, &family(), &[0.0], 50, 0).unwrap();
        assert!((r.rows[0].sup_hat - binary_entropy(0.3)).abs() < 1e-12);
    }

    #[test]
    fn rejects_increasing_grid() {
        let s = ShiftSpace::full(2).unwrap();
        let nu = MarkovMeasure::bernoulli2(0.3).unwrap();
        assert!(shrink_experiment(&s, &nu, &family(), &[0.1, 0.2], 50, 0).is_err());
    }

    #[test]
    fn same_seed_same_profile() {
        let s = ShiftSpace::full(2).unwrap();
        let nu = MarkovMeasure::bernoulli2(0.7).unwrap();
        let a = shrink_experiment(&s, &nu, &family(), &[0.1, 0.03], 120, 5).unwrap();
        let b = shrink_experiment(&s, &nu, &family(), &[0.1, 0.03], 120, 5).unwrap();
        assert_eq!(a, b);
    }
}
