use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::katok_entropy;
use crate::error::{Error, Result};
use crate::measures::{MarkovMeasure, Measure, TestFamily};
use crate::rng;
use crate::systems::{ShiftSpace, Word};

/// Cylinder lengths used for the entropy estimate behind the size bound.
const KATOK_GRID: [usize; 3] = [8, 12, 16];
const KATOK_DELTA: f64 = 0.1;

/// Inputs to [`select_blocks`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockParams {
    /// Minimal return time `t`; returns are searched in `[t, (1+γ)t]`.
    pub n: usize,
    /// Separation scale `ε = 2^-q`.
    pub q: u32,
    /// Level; blocks must stay within `1/k` of the measure.
    pub k: usize,
    pub gamma: f64,
    /// Number of sampled candidate words.
    pub budget: usize,
    pub seed: u64,
}

impl BlockParams {
    /// Depth of the cylinder partition. One more than `q`, so two blocks
    /// in the same cell that return together can only be told apart
    /// inside the block.
    pub fn partition_depth(&self) -> usize {
        self.q as usize + 1
    }

    pub fn epsilon(&self) -> f64 {
        0.5f64.powi(self.q as i32)
    }

    /// Last admissible return time.
    pub fn window_end(&self) -> usize {
        (self.n as f64 * (1.0 + self.gamma)).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCheck {
    Passed,
    Failed,
    /// The bound is at most one, so any nonempty family meets it.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionStats {
    pub sampled: usize,
    /// Candidates meeting both return and typicality conditions.
    pub accepted: usize,
    /// Size of the separated subset.
    pub separated: usize,
    /// Separated candidates returning at the chosen time.
    pub returning: usize,
    pub katok_rate: f64,
    pub bound: f64,
    pub bound_check: BoundCheck,
}

impl SelectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.sampled as f64
    }
}

/// Orbit blocks for one measure at one level.
#[derive(Debug, Clone, Serialize)]
pub struct BlockFamily {
    pub measure: MarkovMeasure,
    pub params: BlockParams,
    /// Chosen return time; every block has this length.
    pub n: usize,
    /// Common partition cell of all blocks and of their `n`-th iterates.
    pub cell: Vec<u8>,
    #[serde(skip)]
    pub blocks: Vec<Word>,
    pub stats: SelectionStats,
}

impl BlockFamily {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The `n` symbols a block contributes.
    pub fn block_symbols(&self, i: usize) -> Vec<u8> {
        self.blocks[i].prefix(self.n)
    }
}

/// Samples typical words of `m` and keeps a separated family of blocks
/// that all start in one partition cell and return to it at one time.
pub fn select_blocks(shift: &ShiftSpace, m: &MarkovMeasure, family: &TestFamily, params: BlockParams) -> Result<BlockFamily> {
    let BlockParams { n, q, k, gamma, budget, seed } = params;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside (0, 1)")));
    }
    if n == 0 || k == 0 || q == 0 {
        return Err(Error::InvalidArgument("block length, level and q must be positive".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("sampling budget must be positive".into()));
    }
    if family.cylinder_words().is_none() {
        return Err(Error::KindMismatch("block selection needs a cylinder family"));
    }
    m.require_supported_on(shift)?;
    let r = params.partition_depth();
    let hi = params.window_end();
    let len = hi + r.max(family.depth());
    let target = Measure::Markov(m.clone()).integrals(family)?;
    let sampler = m.sampler();
    let bound = 1.0 / k as f64;

    let candidates: Vec<Option<Vec<u8>>> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, rng::tag(&[0x424c_4f43, i as u64]));
            let w = sampler.sample(len, &mut g);
            let returns = (n..=hi).any(|t| w[t..t + r] == w[..r]);
            (returns && stays_typical(&w, n, hi, family, &target, bound)).then_some(w)
        })
        .collect();
    let accepted: Vec<Vec<u8>> = candidates.into_iter().flatten().collect();
    if accepted.is_empty() {
        return Err(Error::BudgetExhausted { sampled: budget, accepted: 0 });
    }

    // d_n(x, y) < 2^-q exactly when x and y agree on n + q symbols
    let mut seen = HashSet::new();
    let separated: Vec<Vec<u8>> = accepted
        .iter()
        .filter(|w| seen.insert(w[..n + q as usize].to_vec()))
        .cloned()
        .collect();

    let returning_at = |t: usize| separated.iter().filter(|w| w[t..t + r] == w[..r]).count();
    let (n_chosen, returning) = (n..=hi)
        .map(|t| (t, returning_at(t)))
        .fold((n, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let v: Vec<&Vec<u8>> = separated.iter().filter(|w| w[n_chosen..n_chosen + r] == w[..r]).collect();
    let mut cells: Vec<&[u8]> = v.iter().map(|w| &w[..r]).collect();
    cells.sort();
    cells.dedup();
    let cell = cells
        .iter()
        .max_by(|a, b| {
            let ca = v.iter().filter(|w| &w[..r] == **a).count();
            let cb = v.iter().filter(|w| &w[..r] == **b).count();
            // ties go to the lexicographically smaller cell
            ca.cmp(&cb).then_with(|| b.cmp(a))
        })
        .expect("at least one block returns")
        .to_vec();
    let blocks: Vec<Word> = v
        .iter()
        .filter(|w| w[..r] == cell[..])
        .map(|w| shift.complete(w))
        .collect::<Result<_>>()?;

    let katok_rate = katok_entropy(shift, m, q, KATOK_DELTA, &KATOK_GRID)?.value;
    let exponent = n_chosen as f64 * (1.0 - gamma) * (katok_rate - 4.0 * gamma);
    let size_bound = exponent.exp();
    let bound_check = if size_bound <= 1.0 {
        BoundCheck::Vacuous
    } else if blocks.len() as f64 >= size_bound {
        BoundCheck::Passed
    } else {
        BoundCheck::Failed
    };
    Ok(BlockFamily {
        measure: m.clone(),
        params,
        n: n_chosen,
        cell,
        stats: SelectionStats {
            sampled: budget,
            accepted: accepted.len(),
            separated: separated.len(),
            returning,
            katok_rate,
            bound: size_bound,
            bound_check,
        },
        blocks,
    })
}

/// `D(E_m(w), target) < bound` for every `m` in `n..=hi`.
fn stays_typical(w: &[u8], n: usize, hi: usize, family: &TestFamily, target: &[f64], bound: f64) -> bool {
    let depth = family.depth();
    let mut acc = vec![0.0; target.len()];
    let mut scaled = vec![0.0; target.len()];
    for i in 0..hi {
        family.add_cylinder_hits(&w[i..(i + depth).min(w.len())], 1.0, &mut acc);
        let m = i + 1;
        if m >= n {
            for (s, a) in scaled.iter_mut().zip(&acc) {
                *s = a / m as f64;
            }
            if family.distance(&scaled, target) >= bound {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, q: u32, k: usize) -> BlockParams {
        BlockParams { n, q, k, gamma: 0.25, budget: 64, seed: 5 }
    }

    #[test]
    fn fair_coin_blocks() {
        let shift = ShiftSpace::full(2).unwrap();
        let fam = TestFamily::cylinders(&shift, 16).unwrap();
        let m = MarkovMeasure::bernoulli2(0.5).unwrap();
        let b = select_blocks(&shift, &m, &fam, params(16, 1, 2)).unwrap();
        assert!(!b.is_empty());
        assert!(b.n >= 16 && b.n <= 20);
        for x in &b.blocks {
            assert_eq!(x.prefix(2), b.cell);
            assert_eq!(x.shifted(b.n).prefix(2), b.cell);
        }
        let big = select_blocks(&shift, &m, &fam, BlockParams { budget: 256, ..params(48, 1, 2) }).unwrap();
        assert!(big.stats.separated >= b.stats.separated);
    }

    #[test]
    fn blocks_are_separated_and_typical() {
        let shift = ShiftSpace::full(2).unwrap();
        let fam = TestFamily::cylinders(&shift, 16).unwrap();
        let m = MarkovMeasure::bernoulli2(0.7).unwrap();
        let p = params(64, 2, 3);
        let b = select_blocks(&shift, &m, &fam, p).unwrap();
        let sys = crate::System::Shift(shift.clone());
        for (i, x) in b.blocks.iter().enumerate() {
            for y in &b.blocks[i + 1..] {
                let d = sys.dist_n(&x.clone().into(), &y.clone().into(), p.n).unwrap();
                assert!(d >= p.epsilon());
            }
        }
        let target = Measure::Markov(m.clone()).integrals(&fam).unwrap();
        for x in &b.blocks {
            let w = x.prefix(p.window_end() + fam.depth());
            assert!(stays_typical(&w, p.n, p.window_end(), &fam, &target, 1.0 / 3.0));
        }
    }

    #[test]
    fn cycle_measure_gives_one_block() {
        let shift = ShiftSpace::full(2).unwrap();
        let fam = TestFamily::cylinders(&shift, 16).unwrap();
        let m = MarkovMeasure::cycle(2).unwrap();
        let b = select_blocks(&shift, &m, &fam, params(16, 1, 1)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.blocks[0].prefix(6), b.blocks[0].shifted(2).prefix(6));
    }

    #[test]
    fn narrow_window_keeps_its_closed_endpoint() {
        let shift = ShiftSpace::full(2).unwrap();
        let fam = TestFamily::cylinders(&shift, 4).unwrap();
        let m = MarkovMeasure::point_mass(2, 1).unwrap();
        let p = BlockParams { n: 3, q: 1, k: 1, gamma: 0.01, budget: 4, seed: 0 };
        assert_eq!(p.window_end(), 3);
        let b = select_blocks(&shift, &m, &fam, p).unwrap();
        assert_eq!(b.n, 3);
        assert_eq!(b.stats.bound_check, BoundCheck::Vacuous);
    }

    #[test]
    fn rejects_bad_parameters() {
        let shift = ShiftSpace::full(2).unwrap();
        let fam = TestFamily::cylinders(&shift, 4).unwrap();
        let m = MarkovMeasure::bernoulli2(0.5).unwrap();
        assert!(select_blocks(&shift, &m, &fam, BlockParams { gamma: 1.0, ..params(8, 1, 1) }).is_err());
        assert!(select_blocks(&shift, &m, &fam, BlockParams { budget: 0, ..params(8, 1, 1) }).is_err());
        let strict = BlockParams { k: 1000, ..params(8, 1, 1) };
        assert!(matches!(select_blocks(&shift, &m, &fam, strict), Err(Error::BudgetExhausted { .. })));
    }
}
