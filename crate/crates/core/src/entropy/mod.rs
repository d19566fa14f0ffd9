//! Counting entropy: separated and spanning sets, Katok's cover numbers and
//! level sets of Birkhoff averages on shifts.

pub mod cover;
mod katok;
mod levelset;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::{State, System};

pub use katok::{katok_count, katok_entropy, MAX_CYLINDER_LENGTH};
pub use levelset::{levelset_at, levelset_count, LevelSetCount, LevelSetQuery};

/// Largest instance handed to the exact solvers.
pub const EXACT_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Separated,
    Spanning,
    Katok,
    LevelsetCount,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Separated => "separated",
            Method::Spanning => "spanning",
            Method::Katok => "katok",
            Method::LevelsetCount => "levelset_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSample {
    pub n: usize,
    pub count: u128,
    pub rate: f64,
}

/// An entropy estimate with the counts behind it. `value` is the rate at
/// the largest `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub n_used: usize,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub method: Method,
    pub diagnostics: Vec<RateSample>,
}

/// One line of entropy CSV output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub method: &'static str,
    pub n: usize,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub count: u128,
    pub rate: f64,
}

impl EntropyEstimate {
    pub(crate) fn from_samples(method: Method, epsilon: f64, delta: Option<f64>, diagnostics: Vec<RateSample>) -> Self {
        let last = *diagnostics.last().expect("at least one sample");
        EntropyEstimate { value: last.rate, n_used: last.n, epsilon, delta, method, diagnostics }
    }

    pub const CSV_HEADER: [&'static str; 6] = ["method", "n", "epsilon", "delta", "count", "rate"];

    /// Rows ordered by `n`.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let mut rows: Vec<CsvRow> = self
            .diagnostics
            .iter()
            .map(|s| CsvRow {
                method: self.method.name(),
                n: s.n,
                epsilon: self.epsilon,
                delta: self.delta,
                count: s.count,
                rate: s.rate,
            })
            .collect();
        rows.sort_by_key(|r| r.n);
        rows
    }
}

pub(crate) fn rate(count: u128, n: usize) -> f64 {
    (count as f64).ln() / n as f64
}

/// A separated subset of the candidates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparatedSet {
    pub count: usize,
    /// Indices into the candidate list.
    pub witnesses: Vec<usize>,
    /// False when the greedy fallback was used.
    pub exact: bool,
}

/// A spanning subset of the targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanningSet {
    pub count: usize,
    /// Indices into the target list.
    pub centers: Vec<usize>,
    pub exact: bool,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")))
    }
}

/// `close[i][j]` iff `d_n(x_i, x_j) < epsilon`.
fn closeness(system: &System, xs: &[State], n: usize, epsilon: f64) -> Result<Vec<Vec<bool>>> {
    let m = xs.len();
    let mut close = vec![vec![false; m]; m];
    for i in 0..m {
        close[i][i] = true;
        for j in (i + 1)..m {
            let c = system.dist_n(&xs[i], &xs[j], n)? < epsilon;
            close[i][j] = c;
            close[j][i] = c;
        }
    }
    Ok(close)
}

/// On shifts `d_n` is an ultrametric, so "closer than ε" is an equivalence
/// relation and both problems reduce to counting classes.
fn shift_classes(system: &System, xs: &[State], n: usize, epsilon: f64) -> Result<Option<Vec<usize>>> {
    if system.shift().is_none() {
        return Ok(None);
    }
    let mut reps: Vec<usize> = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let mut found = false;
        for &r in &reps {
            if system.dist_n(x, &xs[r], n)? < epsilon {
                found = true;
                break;
            }
        }
        if !found {
            reps.push(i);
        }
    }
    Ok(Some(reps))
}

/// Largest `(n, ε)`-separated subset (`d_n ≥ ε` pairwise) of `candidates`.
pub fn max_separated(system: &System, candidates: &[State], n: usize, epsilon: f64) -> Result<SeparatedSet> {
    check_epsilon(epsilon)?;
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("candidate list is empty".into()));
    }
    if let Some(reps) = shift_classes(system, candidates, n, epsilon)? {
        return Ok(SeparatedSet { count: reps.len(), witnesses: reps, exact: true });
    }
    let close = closeness(system, candidates, n, epsilon)?;
    Ok(separated_from_closeness(&close))
}

fn separated_from_closeness(close: &[Vec<bool>]) -> SeparatedSet {
    let m = close.len();
    if m <= EXACT_LIMIT {
        let adj: Vec<u32> = (0..m)
            .map(|i| (0..m).filter(|&j| j != i && close[i][j]).fold(0u32, |a, j| a | 1 << j))
            .collect();
        let w = cover::max_independent_set(&adj);
        SeparatedSet { count: w.len(), witnesses: w, exact: true }
    } else {
        let adj: Vec<Vec<usize>> = (0..m).map(|i| (0..m).filter(|&j| j != i && close[i][j]).collect()).collect();
        let w = cover::greedy_independent_set(&adj);
        SeparatedSet { count: w.len(), witnesses: w, exact: false }
    }
}

/// Smallest set of targets whose Bowen balls (`d_n < ε`) cover all targets.
pub fn min_spanning(system: &System, targets: &[State], n: usize, epsilon: f64) -> Result<SpanningSet> {
    check_epsilon(epsilon)?;
    if targets.is_empty() {
        return Ok(SpanningSet { count: 0, centers: vec![], exact: true });
    }
    if let Some(reps) = shift_classes(system, targets, n, epsilon)? {
        return Ok(SpanningSet { count: reps.len(), centers: reps, exact: true });
    }
    let close = closeness(system, targets, n, epsilon)?;
    Ok(spanning_from_closeness(&close))
}

fn spanning_from_closeness(close: &[Vec<bool>]) -> SpanningSet {
    let m = close.len();
    if m <= EXACT_LIMIT {
        let balls: Vec<u32> = (0..m).map(|i| (0..m).filter(|&j| close[i][j]).fold(0u32, |a, j| a | 1 << j)).collect();
        let mut c = cover::min_set_cover(&balls, (1u32 << m) - 1).expect("every target covers itself");
        c.sort_unstable();
        SpanningSet { count: c.len(), centers: c, exact: true }
    } else {
        let balls: Vec<Vec<usize>> = (0..m).map(|i| (0..m).filter(|&j| close[i][j]).collect()).collect();
        let c = cover::greedy_set_cover(&balls, m).expect("every target covers itself");
        SpanningSet { count: c.len(), centers: c, exact: false }
    }
}

/// Same as [`max_separated`] but always through the graph solvers, for
/// cross-checking the shift shortcut.
pub fn max_separated_by_graph(system: &System, candidates: &[State], n: usize, epsilon: f64) -> Result<SeparatedSet> {
    check_epsilon(epsilon)?;
    Ok(separated_from_closeness(&closeness(system, candidates, n, epsilon)?))
}

/// Same as [`min_spanning`] but always through the graph solvers.
pub fn min_spanning_by_graph(system: &System, targets: &[State], n: usize, epsilon: f64) -> Result<SpanningSet> {
    check_epsilon(epsilon)?;
    if targets.is_empty() {
        return Ok(SpanningSet { count: 0, centers: vec![], exact: true });
    }
    Ok(spanning_from_closeness(&closeness(system, targets, n, epsilon)?))
}
