use std::collections::HashMap;

use serde::Serialize;

use super::{rate, EntropyEstimate, Method, RateSample, MAX_CYLINDER_LENGTH};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::measures::LocalObservable;
use crate::systems::ShiftSpace;

/// Words of length `n` whose windowed average of `observable` lies in
/// `target`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetQuery {
    pub observable: LocalObservable,
    pub target: Interval,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LevelSetCount {
    Counted(EntropyEstimate),
    /// No admissible word qualifies; the rate would be −∞.
    Empty { n: usize },
}

impl LevelSetCount {
    pub fn value(&self) -> Option<f64> {
        match self {
            LevelSetCount::Counted(e) => Some(e.value),
            LevelSetCount::Empty { .. } => None,
        }
    }

    pub fn count(&self) -> u128 {
        match self {
            LevelSetCount::Counted(e) => e.diagnostics[0].count,
            LevelSetCount::Empty { .. } => 0,
        }
    }
}

/// Counts admissible `n`-words `w` with `(1/W)·Σ φ(window)` in the target,
/// the sum running over the `W = n − d + 1` depth-`d` windows inside `w`.
pub fn levelset_count(shift: &ShiftSpace, query: &LevelSetQuery) -> Result<LevelSetCount> {
    let phi = &query.observable;
    let (k, d, n) = (shift.alphabet_size(), phi.depth(), query.n);
    query.target.validate()?;
    if phi.alphabet() != k {
        return Err(Error::KindMismatch("observable alphabet differs from the shift's"));
    }
    if n < d {
        return Err(Error::InvalidArgument(format!("n = {n} is shorter than the observable depth {d}")));
    }
    if n + d > MAX_CYLINDER_LENGTH {
        return Err(Error::InvalidArgument(format!("n + d = {} exceeds {MAX_CYLINDER_LENGTH}", n + d)));
    }

    let mut levels: Vec<f64> = phi.values().to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let class: Vec<usize> = phi.values().iter().map(|v| levels.partition_point(|l| l < v)).collect();

    // state: last max(d-1, 1) symbols and how often each value occurred
    let l = (d - 1).max(1);
    let modulus = k.pow(l as u32);
    let mut layer: HashMap<(usize, Vec<u8>), u128> = HashMap::new();
    for w in shift.words(l) {
        let code = w.iter().fold(0, |a, &s| a * k + s as usize);
        let mut counts = vec![0u8; levels.len()];
        if d == 1 {
            counts[class[w[0] as usize]] += 1;
        }
        *layer.entry((code, counts)).or_insert(0) += 1;
    }
    for _ in l..n {
        let mut next: HashMap<(usize, Vec<u8>), u128> = HashMap::with_capacity(layer.len() * 2);
        for ((code, counts), c) in layer {
            let last = (code % k) as u8;
            for b in shift.successors(last) {
                let window = if d == 1 { b as usize } else { code * k + b as usize };
                let mut cc = counts.clone();
                cc[class[window]] += 1;
                *next.entry(((code * k + b as usize) % modulus, cc)).or_insert(0) += c;
            }
        }
        layer = next;
    }

    let windows = (n - d + 1) as f64;
    let mut total: u128 = 0;
    for ((_, counts), c) in layer {
        let sum: f64 = counts.iter().zip(&levels).map(|(&t, &v)| t as f64 * v).sum();
        if query.target.contains(sum / windows) {
            total += c;
        }
    }
    if total == 0 {
        return Ok(LevelSetCount::Empty { n });
    }
    let sample = RateSample { n, count: total, rate: rate(total, n) };
    Ok(LevelSetCount::Counted(EntropyEstimate::from_samples(Method::LevelsetCount, 1.0, None, vec![sample])))
}

/// Level-set count at `α` through the window `(α − 1/n, α + 1/n)`.
pub fn levelset_at(shift: &ShiftSpace, observable: &LocalObservable, alpha: f64, n: usize) -> Result<LevelSetCount> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let w = 1.0 / n as f64;
    let target = Interval::open(alpha - w, alpha + w)?;
    levelset_count(shift, &LevelSetQuery { observable: observable.clone(), target, n })
}
