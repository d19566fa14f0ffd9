use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use super::connector::{connector, Connector};
use crate::error::{Error, Result};
use crate::systems::ShiftSpace;

/// What the schedule needs to know about one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPlan {
    #[serde(serialize_with = "ser_ratios")]
    pub coefficients: Vec<Ratio<u64>>,
    pub block_lengths: Vec<usize>,
    pub cells: Vec<Vec<u8>>,
}

fn ser_ratios<S: serde::Serializer>(v: &[Ratio<u64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|a| a.to_string()))
}

/// Shortest connectors between the cells of every pair of `(level, j)`
/// units, levels and `j` counted from 1.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectorTable {
    units: Vec<(usize, usize)>,
    #[serde(skip)]
    level_start: Vec<usize>,
    table: Vec<Vec<Connector>>,
}

impl ConnectorTable {
    pub fn build(shift: &ShiftSpace, levels: &[LevelPlan]) -> Result<Self> {
        let mut units = Vec::new();
        let mut cells = Vec::new();
        let mut level_start = Vec::new();
        for (k, lv) in levels.iter().enumerate() {
            level_start.push(units.len());
            for (j, c) in lv.cells.iter().enumerate() {
                units.push((k + 1, j + 1));
                cells.push(c);
            }
        }
        let table = cells
            .iter()
            .map(|a| cells.iter().map(|b| connector(shift, a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(ConnectorTable { units, level_start, table })
    }

    fn index(&self, k: usize, j: usize) -> usize {
        self.level_start[k - 1] + j - 1
    }

    pub fn get(&self, k1: usize, j1: usize, k2: usize, j2: usize) -> &Connector {
        &self.table[self.index(k1, j1)][self.index(k2, j2)]
    }

    /// `s(k1, j1, k2, j2)`.
    pub fn s(&self, k1: usize, j1: usize, k2: usize, j2: usize) -> usize {
        self.get(k1, j1, k2, j2).s
    }

    pub fn levels(&self) -> usize {
        self.level_start.len()
    }

    /// Sum of `s` over all pairs of units on levels `1..=top`.
    pub fn sum_up_to(&self, top: usize) -> u128 {
        let end = if top >= self.levels() { self.units.len() } else { self.level_start[top] };
        self.table[..end].iter().map(|row| row[..end].iter().map(|c| c.s as u128).sum::<u128>()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSchedule {
    pub k: usize,
    #[serde(serialize_with = "ser_ratios")]
    pub coefficients: Vec<Ratio<u64>>,
    pub block_lengths: Vec<usize>,
    pub cells: Vec<Vec<u8>>,
    /// `N_k·C_{k,j}`: blocks of measure `j` per cycle.
    pub repetitions: Vec<u64>,
    pub n_k: u64,
    /// `k` times the connector sum that `N_k` has to dominate.
    pub connector_bound: u64,
    /// `s(k,j,k,j+1)` for each run `j`, the last wrapping to `j = 1`.
    pub run_connectors: Vec<usize>,
    pub x_k: u64,
    pub y_k: u64,
    pub t_k: u64,
    /// `s(k,1,k+1,1)`, the exit toward the next level.
    pub exit: usize,
}

/// Start indices of every level, cycle, measure run and block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Offsets {
    /// `M_1, …, M_{k_max+1}`.
    pub level: Vec<u64>,
    pub cycle: Vec<Vec<u64>>,
    pub run: Vec<Vec<Vec<u64>>>,
    pub block: Vec<Vec<Vec<Vec<u64>>>>,
}

/// Result of re-checking every integer condition on a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub integrality: bool,
    pub connector_bound: bool,
    pub y_identity: bool,
    pub density: bool,
    pub cycle_counts: bool,
    pub offsets: bool,
}

impl Certificate {
    pub fn all(&self) -> bool {
        self.integrality && self.connector_bound && self.y_identity && self.density && self.cycle_counts && self.offsets
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeaveSchedule {
    pub k_max: usize,
    pub length_cap: u64,
    /// Separation scale `ε = 2^-q` of the blocks.
    pub epsilon: f64,
    pub partition_depth: usize,
    pub partition_diameter: f64,
    /// Pseudo-orbit gap bound `δ'`.
    pub delta_prime: f64,
    /// Deviation guaranteed by splicing a `δ'`-pseudo-orbit.
    pub splice_bound: f64,
    pub levels: Vec<LevelSchedule>,
    /// Level `k_max + 1`, used only for its cells and connectors.
    pub lookahead: LevelPlan,
    pub connectors: ConnectorTable,
    pub offsets: Offsets,
    pub total_length: u64,
    pub certificate: Certificate,
}

/// Smallest integers meeting the integrality, connector, density and
/// cycle-count conditions, with all offsets laid out.
///
/// `plans` holds levels `1..=k_max+1`; the last one only contributes its
/// cells. The length condition on the cycle counts that would involve
/// level `k_max + 1` is not imposed.
pub fn build_schedule(plans: &[LevelPlan], connectors: &ConnectorTable, q: u32, length_cap: u64) -> Result<WeaveSchedule> {
    if plans.len() < 2 {
        return Err(Error::InvalidArgument("need at least one level plus the lookahead level".into()));
    }
    if connectors.levels() != plans.len() {
        return Err(Error::InvalidArgument("connector table does not match the level plans".into()));
    }
    let k_max = plans.len() - 1;
    for (k, p) in plans.iter().enumerate() {
        let s = p.coefficients.len();
        if s == 0 || p.block_lengths.len() != s || p.cells.len() != s {
            return Err(Error::InvalidArgument(format!("level {} has inconsistent plan lengths", k + 1)));
        }
        if p.coefficients.iter().any(|a| *a.numer() == 0) || p.block_lengths.contains(&0) {
            return Err(Error::InvalidArgument(format!("level {} has a zero coefficient or block length", k + 1)));
        }
        let total: Ratio<u128> = p.coefficients.iter().map(|a| Ratio::new(*a.numer() as u128, *a.denom() as u128)).sum();
        if total != Ratio::from_integer(1) {
            return Err(Error::InvalidArgument(format!("level {} coefficients sum to {total}", k + 1)));
        }
    }
    let r = plans[0].cells[0].len();
    let overflow = |level: usize, length: u128| Error::ScheduleOverflow { level, length, cap: length_cap };
    let fit = |level: usize, v: u128| -> Result<u64> {
        if v > length_cap as u128 {
            Err(overflow(level, v))
        } else {
            Ok(v as u64)
        }
    };

    let mut levels = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let p = &plans[k - 1];
        let sk = p.coefficients.len();
        let step: u128 = p
            .coefficients
            .iter()
            .zip(&p.block_lengths)
            .map(|(a, &n)| {
                let den = *a.denom() as u128 * n as u128;
                den / den.gcd(&(*a.numer() as u128))
            })
            .fold(1, |l, d| l.lcm(&d));
        let bound = k as u128 * connectors.sum_up_to(k + 1);
        let n_k = step.max(bound.div_ceil(step) * step);
        let n_k = fit(k, n_k)?;
        let repetitions: Vec<u64> = p
            .coefficients
            .iter()
            .zip(&p.block_lengths)
            .map(|(a, &n)| (n_k as u128 * *a.numer() as u128 / (*a.denom() as u128 * n as u128)) as u64)
            .collect();
        let run_connectors: Vec<usize> = (1..=sk).map(|j| connectors.s(k, j, k, j % sk + 1)).collect();
        let x_k: usize = run_connectors.iter().sum();
        let y_k = fit(k, n_k as u128 + x_k as u128)?;
        levels.push(LevelSchedule {
            k,
            coefficients: p.coefficients.clone(),
            block_lengths: p.block_lengths.clone(),
            cells: p.cells.clone(),
            repetitions,
            n_k,
            connector_bound: fit(k, bound)?,
            run_connectors,
            x_k: x_k as u64,
            y_k,
            t_k: 0,
            exit: connectors.s(k, 1, k + 1, 1),
        });
    }

    // cycle counts, smallest first; every condition is a lower bound
    let mut mass: u128 = 0; // sum over r < k of Y_r T_r
    let mut with_exits: u128 = 0; // same plus the exit connectors
    for k in 1..=k_max {
        let y = levels[k - 1].y_k as u128;
        let mut t: u128 = if k == 1 { 1 } else { levels[k - 2].t_k as u128 + 1 };
        if k >= 2 {
            t = t.max((k as u128 * with_exits).div_ceil(y));
        }
        if k < k_max {
            let need = (k as u128 + 1) * levels[k].y_k as u128;
            t = t.max(need.saturating_sub(mass).div_ceil(y));
        }
        mass += y * t;
        with_exits += y * t + levels[k - 1].exit as u128;
        if with_exits > length_cap as u128 {
            return Err(overflow(k, with_exits));
        }
        levels[k - 1].t_k = t as u64;
    }

    let offsets = lay_out(&levels);
    let total_length = *offsets.level.last().unwrap();
    let mut schedule = WeaveSchedule {
        k_max,
        length_cap,
        epsilon: 0.5f64.powi(q as i32),
        partition_depth: r,
        partition_diameter: 0.5f64.powi(r as i32),
        delta_prime: 0.5f64.powi(r as i32),
        splice_bound: 0.5f64.powi(r as i32 + 1),
        levels,
        lookahead: plans[k_max].clone(),
        connectors: connectors.clone(),
        offsets,
        total_length,
        certificate: Certificate {
            integrality: false,
            connector_bound: false,
            y_identity: false,
            density: false,
            cycle_counts: false,
            offsets: false,
        },
    };
    schedule.certificate = schedule.verify();
    if !schedule.certificate.all() {
        return Err(Error::Invariant(format!("schedule failed its own checks: {:?}", schedule.certificate)));
    }
    Ok(schedule)
}

fn lay_out(levels: &[LevelSchedule]) -> Offsets {
    let mut level = vec![0u64];
    let mut cycle = Vec::new();
    let mut run = Vec::new();
    let mut block = Vec::new();
    for lv in levels {
        let m_q = *level.last().unwrap();
        let mut cyc = Vec::new();
        let mut runs = Vec::new();
        let mut blocks = Vec::new();
        for i in 0..lv.t_k {
            let m_qi = m_q + i * lv.y_k;
            cyc.push(m_qi);
            let mut at = m_qi;
            let mut r_i = Vec::new();
            let mut b_i = Vec::new();
            for j in 0..lv.block_lengths.len() {
                r_i.push(at);
                let n = lv.block_lengths[j] as u64;
                b_i.push((0..lv.repetitions[j]).map(|t| at + t * n).collect::<Vec<_>>());
                at += lv.repetitions[j] * n;
                at += lv.run_connectors[j] as u64;
            }
            runs.push(r_i);
            blocks.push(b_i);
        }
        level.push(m_q + lv.t_k * lv.y_k + lv.exit as u64);
        cycle.push(cyc);
        run.push(runs);
        block.push(blocks);
    }
    Offsets { level, cycle, run, block }
}

impl WeaveSchedule {
    pub fn level(&self, k: usize) -> &LevelSchedule {
        &self.levels[k - 1]
    }

    /// `M_{q,i,j,t}`, all indices from 1.
    pub fn block_offset(&self, q: usize, i: usize, j: usize, t: usize) -> Option<u64> {
        self.offsets.block.get(q.checked_sub(1)?)?.get(i.checked_sub(1)?)?.get(j.checked_sub(1)?)?.get(t.checked_sub(1)?).copied()
    }

    /// Share of level `k`'s stretch `[M_k, M_{k+1})` covered by blocks of
    /// measure `j`.
    pub fn block_coverage(&self, k: usize, j: usize) -> f64 {
        let lv = self.level(k);
        let covered = lv.t_k * lv.repetitions[j - 1] * lv.block_lengths[j - 1] as u64;
        covered as f64 / (self.offsets.level[k] - self.offsets.level[k - 1]) as f64
    }

    /// Recomputes every condition from the stored integers.
    pub fn verify(&self) -> Certificate {
        let levels = &self.levels;
        let k_max = self.k_max;
        let integrality = levels.iter().all(|lv| {
            lv.coefficients.iter().zip(&lv.block_lengths).zip(&lv.repetitions).all(|((a, &n), &rep)| {
                rep as u128 * *a.denom() as u128 * n as u128 == lv.n_k as u128 * *a.numer() as u128
            })
        });
        let connector_bound = levels.iter().all(|lv| {
            lv.connector_bound as u128 == lv.k as u128 * self.connectors.sum_up_to(lv.k + 1)
                && lv.n_k >= lv.connector_bound
        });
        let y_identity = levels.iter().all(|lv| {
            let sk = lv.coefficients.len();
            let blocks: u128 = lv.repetitions.iter().zip(&lv.block_lengths).map(|(&r, &n)| r as u128 * n as u128).sum();
            let x: usize = (1..=sk).map(|j| self.connectors.s(lv.k, j, lv.k, j % sk + 1)).sum();
            x as u64 == lv.x_k && blocks + lv.x_k as u128 == lv.y_k as u128 && lv.n_k + lv.x_k == lv.y_k
        });
        let density = levels.iter().all(|lv| lv.k as u128 * lv.n_k as u128 >= (lv.k as u128 - 1) * lv.y_k as u128);
        let mut cycle_counts = levels.windows(2).all(|w| w[0].t_k < w[1].t_k) && levels[0].t_k >= 1;
        for k in 1..k_max {
            let mass: u128 = levels[..k].iter().map(|lv| lv.y_k as u128 * lv.t_k as u128).sum();
            let with_exits: u128 = mass + levels[..k].iter().map(|lv| lv.exit as u128).sum::<u128>();
            let next = &levels[k];
            cycle_counts &= (k as u128 + 1) * next.y_k as u128 <= mass;
            cycle_counts &= (k as u128 + 1) * with_exits <= next.y_k as u128 * next.t_k as u128;
        }
        let o = &self.offsets;
        let mut offsets = o.level.len() == k_max + 1 && o.level[0] == 0;
        for (q, lv) in levels.iter().enumerate() {
            offsets &= lv.exit == self.connectors.s(lv.k, 1, lv.k + 1, 1);
            offsets &= o.level[q + 1] == o.level[q] + lv.t_k * lv.y_k + lv.exit as u64;
            offsets &= o.cycle[q].len() as u64 == lv.t_k;
            for (i, &m_qi) in o.cycle[q].iter().enumerate() {
                offsets &= m_qi == o.level[q] + i as u64 * lv.y_k;
                let mut expect = m_qi;
                for j in 0..lv.block_lengths.len() {
                    offsets &= o.run[q][i][j] == expect;
                    let n = lv.block_lengths[j] as u64;
                    let runs = &o.block[q][i][j];
                    offsets &= runs.len() as u64 == lv.repetitions[j];
                    offsets &= runs.iter().enumerate().all(|(t, &m)| m == o.run[q][i][j] + t as u64 * n);
                    expect += lv.repetitions[j] * n + self.connectors.s(lv.k, j + 1, lv.k, (j + 1) % lv.block_lengths.len() + 1) as u64;
                }
            }
        }
        offsets &= self.total_length == o.level[k_max];
        Certificate { integrality, connector_bound, y_identity, density, cycle_counts, offsets }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(coeffs: &[(u64, u64)], lengths: &[usize], cells: &[&[u8]]) -> LevelPlan {
        LevelPlan {
            coefficients: coeffs.iter().map(|&(a, b)| Ratio::new(a, b)).collect(),
            block_lengths: lengths.to_vec(),
            cells: cells.iter().map(|c| c.to_vec()).collect(),
        }
    }

    #[test]
    fn single_measure_single_level() {
        let shift = ShiftSpace::full(2).unwrap();
        let plans = vec![plan(&[(1, 1)], &[16], &[&[0]]), plan(&[(1, 1)], &[32], &[&[1]])];
        let table = ConnectorTable::build(&shift, &plans).unwrap();
        let s = build_schedule(&plans, &table, 1, 1_000_000).unwrap();
        let lv = s.level(1);
        // C = 1/16, and the connector bound is 1·4 = 4 < 16
        assert_eq!(lv.n_k, 16);
        assert_eq!(lv.repetitions, vec![1]);
        assert_eq!(lv.x_k, 1);
        assert_eq!(lv.y_k, 17);
        assert_eq!(lv.t_k, 1);
        assert_eq!(s.total_length, 17 + 1);
        assert!(s.certificate.all());
    }

    #[test]
    fn two_halves_satisfy_everything() {
        let shift = ShiftSpace::full(2).unwrap();
        let half = [(1, 2), (1, 2)];
        let plans = vec![
            plan(&half, &[16, 16], &[&[0, 1], &[1, 1]]),
            plan(&half, &[32, 32], &[&[0, 0], &[1, 0]]),
            plan(&half, &[64, 64], &[&[1, 1], &[0, 0]]),
        ];
        let table = ConnectorTable::build(&shift, &plans).unwrap();
        let s = build_schedule(&plans, &table, 1, 1_000_000).unwrap();
        let c = s.verify();
        assert!(c.all(), "{c:?}");
        for lv in &s.levels {
            assert_eq!(lv.y_k, lv.n_k + lv.x_k);
            assert!(lv.n_k % 32 == 0);
        }
        let reps = s.level(1).repetitions[0];
        assert_eq!(s.block_offset(1, 1, 1, 1), Some(0));
        assert_eq!(s.block_offset(1, 1, 1, 2), (reps >= 2).then_some(16));
        let m121 = s.block_offset(1, 1, 2, 1).unwrap();
        assert_eq!(m121, reps * 16 + table.s(1, 1, 1, 2) as u64);
        assert!(s.block_offset(3, 1, 1, 1).is_none());
        assert!(s.levels[0].t_k < s.levels[1].t_k);
    }

    #[test]
    fn overflow_is_reported_with_its_level() {
        let shift = ShiftSpace::full(2).unwrap();
        let plans = vec![
            plan(&[(1, 1)], &[64], &[&[0]]),
            plan(&[(1, 1)], &[4096], &[&[0]]),
            plan(&[(1, 1)], &[8192], &[&[0]]),
        ];
        let table = ConnectorTable::build(&shift, &plans).unwrap();
        match build_schedule(&plans, &table, 1, 10_000) {
            Err(Error::ScheduleOverflow { level, cap: 10_000, .. }) => assert!(level >= 1),
            other => panic!("expected overflow, got {other:?}"),
        }
        assert!(build_schedule(&plans, &table, 1, 1_000_000).is_ok());
    }

    #[test]
    fn coverage_tends_to_the_coefficients() {
        let shift = ShiftSpace::full(2).unwrap();
        let plans = vec![
            plan(&[(1, 4), (3, 4)], &[8, 8], &[&[0], &[1]]),
            plan(&[(1, 4), (3, 4)], &[16, 16], &[&[0], &[1]]),
            plan(&[(1, 4), (3, 4)], &[32, 32], &[&[0], &[1]]),
            plan(&[(1, 4), (3, 4)], &[64, 64], &[&[0], &[1]]),
        ];
        let table = ConnectorTable::build(&shift, &plans).unwrap();
        let s = build_schedule(&plans, &table, 1, 10_000_000).unwrap();
        for k in 1..=3 {
            let lv = s.level(k);
            let stretch = (lv.t_k * lv.y_k + lv.exit as u64) as f64;
            let expect = 0.75 * lv.n_k as f64 / lv.y_k as f64 * (lv.t_k * lv.y_k) as f64 / stretch;
            assert!((s.block_coverage(k, 2) - expect).abs() < 1e-12);
        }
        assert!((s.block_coverage(3, 2) - 0.75).abs() < (s.block_coverage(1, 2) - 0.75).abs() + 1e-12);
    }

    #[test]
    fn rejects_bad_plans() {
        let shift = ShiftSpace::full(2).unwrap();
        let bad = vec![plan(&[(1, 3)], &[8], &[&[0]]), plan(&[(1, 1)], &[8], &[&[0]])];
        let table = ConnectorTable::build(&shift, &bad).unwrap();
        assert!(build_schedule(&bad, &table, 1, 1000).is_err());
        assert!(build_schedule(&bad[..1], &table, 1, 1000).is_err());
    }
}
