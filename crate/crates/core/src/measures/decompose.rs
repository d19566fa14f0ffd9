use num_rational::Ratio;
use serde::Serialize;

use super::{Distance, MarkovMeasure, Measure, TestFamily};
use crate::error::{Error, Result};

pub const DEFAULT_DENOMINATOR_CAP: u64 = 10_000;

/// Exhaustive search is used while the number of numerator vectors for a
/// denominator stays below this.
const EXHAUSTIVE_LIMIT: u128 = 20_000;

/// Rational convex combination of ergodic Markov measures close to a target.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    /// Coefficients in lowest terms, with their measures.
    #[serde(serialize_with = "ser_parts")]
    pub parts: Vec<(Ratio<u64>, MarkovMeasure)>,
    /// Common denominator used by the search.
    pub denominator: u64,
    pub distance: Distance,
}

fn ser_parts<S: serde::Serializer>(parts: &[(Ratio<u64>, MarkovMeasure)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<(String, &MarkovMeasure)> = parts.iter().map(|(a, m)| (a.to_string(), m)).collect();
    v.serialize(s)
}

impl Decomposition {
    pub fn coefficients(&self) -> Vec<Ratio<u64>> {
        self.parts.iter().map(|(a, _)| *a).collect()
    }

    pub fn as_measure(&self) -> Result<Measure> {
        if self.parts.len() == 1 {
            return Ok(Measure::Markov(self.parts[0].1.clone()));
        }
        let parts = self
            .parts
            .iter()
            .map(|(a, m)| (*a.numer() as f64 / *a.denom() as f64, m.clone()))
            .collect();
        Ok(Measure::Mixture(super::Mixture::new(parts)?))
    }
}

/// Writes `nu` as a rational mixture of ergodic Markov measures within
/// `1/k` in the truncated weak* distance.
///
/// The smallest common denominator `Q ≤ cap` that reaches the target wins;
/// among the numerator vectors for that `Q`, the lexicographically smallest
/// one reaching the target is returned.
pub fn convex_decompose(nu: &Measure, k: usize, family: &TestFamily, cap: u64) -> Result<Decomposition> {
    if k == 0 {
        return Err(Error::InvalidArgument("decomposition level k must be at least 1".into()));
    }
    let components: Vec<(f64, MarkovMeasure)> = match nu {
        Measure::Markov(m) => m.ergodic_components(),
        Measure::Mixture(x) => x
            .components()
            .flat_map(|(w, m)| m.ergodic_components().into_iter().map(move |(v, c)| (w * v, c)))
            .collect(),
        Measure::Atomic(_) => {
            return Err(Error::InvalidMeasure("decomposition needs a Markov measure or a mixture".into()))
        }
    };
    let tail = family.tail_bound();
    if components.len() == 1 {
        let (_, m) = components.into_iter().next().unwrap();
        let distance = Distance { value: 0.0, tail };
        return Ok(Decomposition { parts: vec![(Ratio::from_integer(1), m)], denominator: 1, distance });
    }
    let target = nu.integrals(family)?;
    let parts: Vec<Vec<f64>> = components
        .iter()
        .map(|(_, m)| Measure::Markov(m.clone()).integrals(family))
        .collect::<Result<_>>()?;
    let tau: Vec<f64> = components.iter().map(|(w, _)| *w).collect();
    let s = components.len();
    let goal = 1.0 / k as f64;
    let eval = |num: &[u64], q: u64| {
        let mix: Vec<f64> = (0..family.len())
            .map(|i| num.iter().zip(&parts).map(|(&a, p)| a as f64 / q as f64 * p[i]).sum())
            .collect();
        family.distance(&mix, &target)
    };
    let mut best = f64::INFINITY;
    for q in (s as u64)..=cap {
        let mut hit: Option<(Vec<u64>, f64)> = None;
        for num in candidates(&tau, q) {
            let d = eval(&num, q);
            best = best.min(d);
            if d <= goal && hit.as_ref().is_none_or(|(h, _)| num < *h) {
                hit = Some((num, d));
            }
        }
        if let Some((num, d)) = hit {
            let parts = num
                .iter()
                .zip(components)
                .map(|(&a, (_, m))| (Ratio::new(a, q), m))
                .collect();
            return Ok(Decomposition { parts, denominator: q, distance: Distance { value: d, tail } });
        }
    }
    Err(Error::Unattainable { achieved: best, target: goal })
}

/// Numerator vectors with every entry ≥ 1 summing to `q`.
fn candidates(tau: &[f64], q: u64) -> Vec<Vec<u64>> {
    let s = tau.len();
    if binomial(q - 1, s as u64 - 1) <= EXHAUSTIVE_LIMIT {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(s);
        compositions(q, s, &mut cur, &mut out);
        return out;
    }
    // floor/ceil rounding of q·tau, repaired to the right sum
    let base: Vec<u64> = tau.iter().map(|&t| ((t * q as f64).floor() as u64).max(1)).collect();
    let mut out = Vec::new();
    let choices = s.min(16);
    for mask in 0u32..(1 << choices) {
        let v: Vec<u64> = base.iter().enumerate().map(|(i, &b)| b + u64::from(i < choices && mask >> i & 1 == 1)).collect();
        if v.iter().sum::<u64>() == q {
            out.push(v);
        }
    }
    out.sort();
    out
}

fn compositions(q: u64, parts: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if parts == 1 {
        cur.push(q);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for a in 1..=(q - (parts as u64 - 1)) {
        cur.push(a);
        compositions(q - a, parts - 1, cur, out);
        cur.pop();
    }
}

fn binomial(n: u64, r: u64) -> u128 {
    let r = r.min(n.saturating_sub(r));
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}
