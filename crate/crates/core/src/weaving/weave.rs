use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blocks::{select_blocks, BlockFamily, BlockParams};
use super::schedule::{build_schedule, ConnectorTable, LevelPlan, WeaveSchedule};
use crate::error::{Error, Result};
use crate::measures::{convex_decompose, Decomposition, Measure, TestFamily, DEFAULT_DENOMINATOR_CAP};
use crate::rng;
use crate::shadowing::{shadow_shift, validate_pseudo, PseudoOrbit};
use crate::systems::{ShiftSpace, State, System, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeaveConfig {
    pub k_max: usize,
    /// Return time searched at level 1; doubles with each level.
    pub t1: usize,
    pub gamma: f64,
    /// Block separation `2^-q`.
    pub q: u32,
    /// Candidate words sampled per block family.
    pub budget: usize,
    /// Size of the cylinder test family.
    #[serde(rename = "N")]
    pub family_size: usize,
    pub denominator_cap: u64,
    pub length_cap: u64,
    pub seed: u64,
}

impl Default for WeaveConfig {
    fn default() -> Self {
        WeaveConfig {
            k_max: 3,
            t1: 1024,
            gamma: 0.25,
            q: 2,
            budget: 64,
            family_size: 16,
            denominator_cap: DEFAULT_DENOMINATOR_CAP,
            length_cap: 1_000_000,
            seed: 0,
        }
    }
}

/// Everything fixed before block picks are drawn.
#[derive(Debug, Clone, Serialize)]
pub struct WeavePlan {
    pub config: WeaveConfig,
    #[serde(skip)]
    pub shift: ShiftSpace,
    #[serde(skip)]
    pub family: TestFamily,
    pub target: Measure,
    pub decompositions: Vec<Decomposition>,
    /// Block families for levels `1..=k_max+1`.
    pub blocks: Vec<Vec<BlockFamily>>,
    pub schedule: WeaveSchedule,
}

/// Position of one block in the woven order; all indices from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub level: usize,
    pub cycle: usize,
    pub measure: usize,
    pub rep: usize,
}

/// Decomposes the target at each level, selects blocks, joins their cells
/// and fixes the schedule.
pub fn plan_weave(shift: &ShiftSpace, target: &Measure, config: &WeaveConfig) -> Result<WeavePlan> {
    if config.k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if config.t1 == 0 {
        return Err(Error::InvalidArgument("t1 must be positive".into()));
    }
    shift.require_irreducible()?;
    if target.alphabet_size() != Some(shift.alphabet_size()) {
        return Err(Error::InvalidMeasure("target alphabet does not match the shift".into()));
    }
    let family = TestFamily::cylinders(shift, config.family_size)?;
    let mut decompositions = Vec::new();
    let mut blocks = Vec::new();
    // every level up to k_max places at least one block of length >= t
    let mut least_length: u128 = 0;
    for k in 1..=config.k_max + 1 {
        let t = 1u128
            .checked_shl(k as u32 - 1)
            .and_then(|p| p.checked_mul(config.t1 as u128))
            .filter(|&t| t <= usize::MAX as u128)
            .ok_or(Error::ScheduleOverflow { level: k, length: u128::MAX, cap: config.length_cap })?;
        if k <= config.k_max {
            least_length += t;
            if least_length > config.length_cap as u128 {
                return Err(Error::ScheduleOverflow { level: k, length: least_length, cap: config.length_cap });
            }
        }
        let t = t as usize;
        let dec = convex_decompose(target, k, &family, config.denominator_cap)?;
        let fams = dec
            .parts
            .par_iter()
            .enumerate()
            .filter(|(_, (a, _))| *a.numer() > 0)
            .map(|(j, (_, m))| {
                let params = BlockParams {
                    n: t,
                    q: config.q,
                    k,
                    gamma: config.gamma,
                    budget: config.budget,
                    seed: rng::tag(&[config.seed, k as u64, j as u64]),
                };
                select_blocks(shift, m, &family, params)
            })
            .collect::<Result<Vec<_>>>()?;
        decompositions.push(dec);
        blocks.push(fams);
    }
    let plans: Vec<LevelPlan> = decompositions
        .iter()
        .zip(&blocks)
        .map(|(dec, fams)| LevelPlan {
            coefficients: dec.parts.iter().map(|(a, _)| *a).filter(|a: &Ratio<u64>| *a.numer() > 0).collect(),
            block_lengths: fams.iter().map(|f| f.n).collect(),
            cells: fams.iter().map(|f| f.cell.clone()).collect(),
        })
        .collect();
    let connectors = ConnectorTable::build(shift, &plans)?;
    let schedule = build_schedule(&plans, &connectors, config.q, config.length_cap)?;
    Ok(WeavePlan {
        config: config.clone(),
        shift: shift.clone(),
        family,
        target: target.clone(),
        decompositions,
        blocks,
        schedule,
    })
}

impl WeavePlan {
    /// Every block slot in woven order.
    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        for lv in &self.schedule.levels {
            for cycle in 1..=lv.t_k as usize {
                for (j, &reps) in lv.repetitions.iter().enumerate() {
                    for rep in 1..=reps as usize {
                        out.push(Slot { level: lv.k, cycle, measure: j + 1, rep });
                    }
                }
            }
        }
        out
    }

    pub fn family_for(&self, slot: &Slot) -> &BlockFamily {
        &self.blocks[slot.level - 1][slot.measure - 1]
    }

    pub fn offset(&self, slot: &Slot) -> u64 {
        self.schedule
            .block_offset(slot.level, slot.cycle, slot.measure, slot.rep)
            .expect("slot comes from the schedule")
    }
}

/// Uniform block choice for every slot.
pub fn random_picks(plan: &WeavePlan, seed: u64) -> Vec<usize> {
    let mut g = rng::stream(seed, rng::tag(&[0x5049_434b]));
    plan.slots().iter().map(|s| g.random_range(0..plan.family_for(s).len())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    Block { slot: Slot, pick: usize },
    Connector { from: (usize, usize), to: (usize, usize) },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: u64,
    pub len: usize,
    pub kind: SegmentKind,
}

/// A concatenated pseudo-orbit with its segment layout.
#[derive(Debug, Clone)]
pub struct WovenOrbit {
    pub pseudo: PseudoOrbit,
    pub segments: Vec<Segment>,
}

/// Lays blocks and connectors out in schedule order and validates the
/// result as a pseudo-orbit with gap `δ'`.
pub fn concatenate(plan: &WeavePlan, picks: &[usize]) -> Result<WovenOrbit> {
    let slots = plan.slots();
    if picks.len() != slots.len() {
        return Err(Error::InvalidArgument(format!("expected {} picks, got {}", slots.len(), picks.len())));
    }
    let sched = &plan.schedule;
    let table = &sched.connectors;
    let link = |k1: usize, j1: usize, k2: usize, j2: usize| -> Result<Word> { plan.shift.complete(&table.get(k1, j1, k2, j2).word) };
    let mut states: Vec<State> = Vec::with_capacity(sched.total_length as usize);
    let mut segments = Vec::new();
    let mut push = |w: &Word, len: usize, kind: SegmentKind, states: &mut Vec<State>| {
        segments.push(Segment { start: states.len() as u64, len, kind });
        states.extend((0..len).map(|p| State::Word(w.shifted(p))));
    };
    let mut picks_iter = slots.iter().zip(picks);
    for lv in &sched.levels {
        let k = lv.k;
        let sk = lv.repetitions.len();
        let loops: Vec<Word> = (1..=sk).map(|j| link(k, j, k, j % sk + 1)).collect::<Result<_>>()?;
        for _cycle in 1..=lv.t_k {
            for j in 1..=sk {
                for _ in 0..lv.repetitions[j - 1] {
                    let (slot, &pick) = picks_iter.next().expect("slot count checked");
                    let fam = plan.family_for(slot);
                    let w = fam
                        .blocks
                        .get(pick)
                        .ok_or_else(|| Error::InvalidArgument(format!("pick {pick} out of range at {slot:?}")))?;
                    if plan.offset(slot) != states.len() as u64 {
                        return Err(Error::Invariant(format!("block {slot:?} starts off its offset")));
                    }
                    push(w, fam.n, SegmentKind::Block { slot: *slot, pick }, &mut states);
                }
                let to = (k, j % sk + 1);
                push(&loops[j - 1], lv.run_connectors[j - 1], SegmentKind::Connector { from: (k, j), to }, &mut states);
            }
        }
        let exit = link(k, 1, k + 1, 1)?;
        push(&exit, lv.exit, SegmentKind::Connector { from: (k, 1), to: (k + 1, 1) }, &mut states);
        if states.len() as u64 != sched.offsets.level[k] {
            return Err(Error::Invariant(format!("level {k} ends at {} instead of its offset", states.len())));
        }
    }
    let pseudo = validate_pseudo(&System::Shift(plan.shift.clone()), states, sched.delta_prime)?;
    Ok(WovenOrbit { pseudo, segments })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: u64,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeaveOutcome {
    #[serde(skip)]
    pub point: Word,
    pub total_length: u64,
    pub k_max: usize,
    /// `D(E_n(z), ν)` at every cycle start and at the total length.
    pub convergence: Vec<ConvergencePoint>,
    pub final_distance: f64,
    /// `ε/2` plus the `1/k_max` decomposition slack.
    pub band: f64,
    /// Largest shadow deviation inside each block, in slot order.
    pub block_deviations: Vec<f64>,
    pub max_deviation: f64,
    pub picks: Vec<usize>,
}

/// Weaves, shadows by splicing and measures the empirical statistics of
/// the shadowing point.
pub fn weave_point(plan: &WeavePlan, picks: &[usize]) -> Result<WeaveOutcome> {
    let woven = concatenate(plan, picks)?;
    let shadow = shadow_shift(&plan.shift, &woven.pseudo)?;
    let z = shadow.point.word().expect("shift point").clone();
    let sched = &plan.schedule;
    let block_deviations: Vec<f64> = woven
        .segments
        .iter()
        .filter(|s| matches!(s.kind, SegmentKind::Block { .. }))
        .map(|s| {
            let a = s.start as usize;
            shadow.per_step[a..a + s.len].iter().copied().fold(0.0, f64::max)
        })
        .collect();
    let mut grid: Vec<u64> = sched.offsets.cycle.iter().flatten().copied().filter(|&m| m > 0).collect();
    grid.push(sched.total_length);
    grid.sort_unstable();
    grid.dedup();
    let convergence = empirical_distances(&z, &grid, &plan.family, &plan.target.integrals(&plan.family)?);
    let final_distance = convergence.last().map_or(0.0, |c| c.distance);
    let band = sched.epsilon / 2.0 + 1.0 / sched.k_max as f64;
    if !final_distance.is_finite() || final_distance > band {
        return Err(Error::Invariant(format!("final distance {final_distance} outside the band {band}")));
    }
    Ok(WeaveOutcome {
        point: z,
        total_length: sched.total_length,
        k_max: sched.k_max,
        convergence,
        final_distance,
        band,
        block_deviations,
        max_deviation: shadow.max_deviation,
        picks: picks.to_vec(),
    })
}

/// `D(E_n(z), ν)` for each `n` in the ascending `grid`.
fn empirical_distances(z: &Word, grid: &[u64], family: &TestFamily, target: &[f64]) -> Vec<ConvergencePoint> {
    let depth = family.depth();
    let last = grid.last().copied().unwrap_or(0) as usize;
    let symbols = z.prefix(last + depth);
    let mut acc = vec![0.0; target.len()];
    let mut out = Vec::with_capacity(grid.len());
    let mut next = grid.iter().peekable();
    for i in 0..last {
        family.add_cylinder_hits(&symbols[i..i + depth], 1.0, &mut acc);
        while next.peek().is_some_and(|&&n| n as usize == i + 1) {
            let n = *next.next().unwrap();
            let scaled: Vec<f64> = acc.iter().map(|a| a / n as f64).collect();
            out.push(ConvergencePoint { n, distance: family.distance(&scaled, target) });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationAudit {
    pub slot: Slot,
    pub offset: u64,
    pub n: usize,
    pub distance: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Checks that two woven points differing in one block slot stay
/// `ε/2`-apart in `d_n` from that block's offset.
pub fn separation_audit(plan: &WeavePlan, a: &WeaveOutcome, b: &WeaveOutcome) -> Result<SeparationAudit> {
    if a.picks.len() != b.picks.len() {
        return Err(Error::InvalidArgument("outcomes come from different schedules".into()));
    }
    let differ: Vec<usize> = (0..a.picks.len()).filter(|&i| a.picks[i] != b.picks[i]).collect();
    let &[i] = differ.as_slice() else {
        return Err(Error::InvalidArgument(format!("outcomes must differ in exactly one slot, found {}", differ.len())));
    };
    let slot = plan.slots()[i];
    let offset = plan.offset(&slot);
    let n = plan.family_for(&slot).n;
    let sys = System::Shift(plan.shift.clone());
    let za = State::Word(a.point.shifted(offset as usize));
    let zb = State::Word(b.point.shifted(offset as usize));
    let distance = sys.dist_n(&za, &zb, n)?;
    let threshold = plan.schedule.epsilon / 2.0;
    Ok(SeparationAudit { slot, offset, n, distance, threshold, passed: distance >= threshold })
}
