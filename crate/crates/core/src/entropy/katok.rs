use std::collections::HashMap;

use super::{rate, EntropyEstimate, Method, RateSample};
use crate::error::{Error, Result};
use crate::measures::MarkovMeasure;
use crate::systems::ShiftSpace;

/// Longest cylinder the exact counters enumerate.
pub const MAX_CYLINDER_LENGTH: usize = 26;

/// Minimal number of `(n, 2^-q)` Bowen balls covering mass `1 − δ`.
///
/// On a shift these balls are exactly the `(n+q)`-cylinders, so the count
/// comes from sorting cylinder masses. Cylinders are grouped by first
/// symbol and transition counts, which fixes their mass.
pub fn katok_count(shift: &ShiftSpace, m: &MarkovMeasure, n: usize, q: u32, delta: f64) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidArgument("katok_count needs n >= 1".into()));
    }
    let len = n + q as usize;
    if len > MAX_CYLINDER_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "n + q = {len} exceeds the enumerable length {MAX_CYLINDER_LENGTH}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1)")));
    }
    m.require_supported_on(shift)?;
    let mut classes = mass_classes(m, len);
    classes.sort_by(|a, b| b.0.total_cmp(&a.0));
    let target = 1.0 - delta;
    let mut cum = 0.0;
    let mut count: u128 = 0;
    for (mass, size) in classes {
        let need = (target - cum) / mass;
        let r = if (need - need.round()).abs() <= 1e-9 * need.abs().max(1.0) { need.round() } else { need.ceil() };
        let r = r.max(1.0);
        if r <= size as f64 {
            return Ok(count + r as u128);
        }
        count += size;
        cum += mass * size as f64;
    }
    Ok(count)
}

/// Positive-mass cylinders of length `len`, as (mass, how many) groups.
fn mass_classes(m: &MarkovMeasure, len: usize) -> Vec<(f64, u128)> {
    let k = m.alphabet_size();
    // key: (first, last, transition counts)
    let mut layer: HashMap<(u8, u8, Vec<u8>), u128> = HashMap::new();
    for a in 0..k {
        if m.stationary()[a] > 0.0 {
            layer.insert((a as u8, a as u8, vec![0; k * k]), 1);
        }
    }
    for _ in 1..len {
        let mut next: HashMap<(u8, u8, Vec<u8>), u128> = HashMap::with_capacity(layer.len() * 2);
        for ((first, last, counts), c) in layer {
            for b in 0..k {
                if m.transition(last as usize, b) > 0.0 {
                    let mut cc = counts.clone();
                    cc[last as usize * k + b] += 1;
                    *next.entry((first, b as u8, cc)).or_insert(0) += c;
                }
            }
        }
        layer = next;
    }
    // regroup by mass; equal masses are merged bit-exactly
    let mut by_mass: HashMap<u64, u128> = HashMap::new();
    for ((first, _, counts), c) in layer {
        let mut mass = m.stationary()[first as usize];
        for (e, &t) in counts.iter().enumerate() {
            if t > 0 {
                mass *= m.transition(e / k, e % k).powi(t as i32);
            }
        }
        *by_mass.entry(mass.to_bits()).or_insert(0) += c;
    }
    by_mass.into_iter().map(|(b, c)| (f64::from_bits(b), c)).collect()
}

/// Rates `(1/n)·ln N(n, 2^-q, δ)` over `n_grid`.
pub fn katok_entropy(shift: &ShiftSpace, m: &MarkovMeasure, q: u32, delta: f64, n_grid: &[usize]) -> Result<EntropyEstimate> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("n grid is empty".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n grid must be strictly increasing".into()));
    }
    let samples = n_grid
        .iter()
        .map(|&n| {
            let count = katok_count(shift, m, n, q, delta)?;
            Ok(RateSample { n, count, rate: rate(count, n) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyEstimate::from_samples(Method::Katok, 0.5f64.powi(q as i32), Some(delta), samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sorts every cylinder mass individually.
    fn brute(m: &MarkovMeasure, len: usize, delta: f64) -> u128 {
        let k = m.alphabet_size();
        let mut masses: Vec<f64> = (0..k.pow(len as u32))
            .map(|mut c| {
                let mut w = vec![0u8; len];
                for i in (0..len).rev() {
                    w[i] = (c % k) as u8;
                    c /= k;
                }
                m.cylinder_mass(&w)
            })
            .collect();
        masses.sort_by(|a, b| b.total_cmp(a));
        let mut cum = 0.0;
        for (i, x) in masses.iter().enumerate() {
            cum += x;
            if cum >= 1.0 - delta - 1e-12 {
                return i as u128 + 1;
            }
        }
        masses.len() as u128
    }

    #[test]
    fn uniform_counts_are_ceilings() {
        let s = ShiftSpace::full(2).unwrap();
        let m = MarkovMeasure::bernoulli2(0.5).unwrap();
        assert_eq!(katok_count(&s, &m, 10, 1, 0.1).unwrap(), 1844);
        assert_eq!(katok_count(&s, &m, 10, 1, 1.0 - 1e-9).unwrap(), 1);
    }

    #[test]
    fn biased_counts_match_enumeration() {
        let s = ShiftSpace::full(2).unwrap();
        let m = MarkovMeasure::bernoulli2(0.7).unwrap();
        assert_eq!(katok_count(&s, &m, 8, 1, 0.1).unwrap(), brute(&m, 9, 0.1));
        let mk = MarkovMeasure::from_stochastic(vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3], vec![0.3, 0.3, 0.4]]).unwrap();
        let s3 = ShiftSpace::full(3).unwrap();
        for (n, q, d) in [(3, 1, 0.2), (5, 2, 0.05), (6, 0, 0.5)] {
            assert_eq!(katok_count(&s3, &mk, n, q, d).unwrap(), brute(&mk, n + q as usize, d));
        }
    }

    #[test]
    fn deterministic_measures_have_constant_counts() {
        let s = ShiftSpace::full(2).unwrap();
        let m = MarkovMeasure::point_mass(2, 1).unwrap();
        let e = katok_entropy(&s, &m, 1, 0.1, &[2, 4, 8]).unwrap();
        assert!(e.diagnostics.iter().all(|d| d.rate == 0.0 && d.count == 1));
        let c = MarkovMeasure::cycle(2).unwrap();
        let e = katok_entropy(&s, &c, 1, 0.1, &[2, 4, 8]).unwrap();
        assert!(e.diagnostics.iter().all(|d| d.count == 2));
    }

    #[test]
    fn preconditions() {
        let s = ShiftSpace::full(2).unwrap();
        let m = MarkovMeasure::bernoulli2(0.5).unwrap();
        assert!(katok_count(&s, &m, 25, 2, 0.1).is_err());
        assert!(katok_count(&s, &m, 5, 1, 0.0).is_err());
        assert!(katok_count(&s, &m, 5, 1, 1.0).is_err());
        assert!(katok_entropy(&s, &m, 1, 0.1, &[4, 4]).is_err());
        let g = ShiftSpace::golden_mean();
        assert!(katok_count(&g, &m, 5, 1, 0.1).is_err());
    }
}
