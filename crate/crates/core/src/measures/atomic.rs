use std::collections::HashMap;

use num_rational::Ratio;
use serde::ser::SerializeSeq;
use serde::Serialize;

use super::observable::Observable;
use crate::error::{Error, Result};
use crate::systems::{State, System};

/// Denominator used when real weights are converted to counts.
const WEIGHT_SCALE: u64 = 1 << 40;

/// A finitely supported probability measure. Weights are stored as integer
/// counts over a common denominator so total mass is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(State, u64)>,
    total: u64,
}

impl AtomicMeasure {
    pub fn from_counts(atoms: Vec<(State, u64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("atomic measure needs at least one atom".into()));
        }
        if atoms.iter().any(|(_, c)| *c == 0) {
            return Err(Error::InvalidMeasure("atom weights must be positive".into()));
        }
        let total = atoms
            .iter()
            .try_fold(0u64, |acc, (_, c)| acc.checked_add(*c))
            .ok_or_else(|| Error::InvalidMeasure("atom counts overflow".into()))?;
        Ok(AtomicMeasure { atoms, total })
    }

    /// Real weights summing to 1 within 1e-12; stored to within 2^-41.
    pub fn from_weights(atoms: Vec<(State, f64)>) -> Result<Self> {
        if atoms.iter().any(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure("atom weights must be positive".into()));
        }
        let s: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("atom weights sum to {s}")));
        }
        let mut counted: Vec<(State, u64)> = atoms
            .into_iter()
            .map(|(x, w)| (x, ((w * WEIGHT_SCALE as f64).round() as u64).max(1)))
            .collect();
        let sum: u64 = counted.iter().map(|(_, c)| c).sum();
        let big = (0..counted.len()).max_by_key(|&i| counted[i].1).unwrap();
        counted[big].1 = (counted[big].1 + WEIGHT_SCALE).checked_sub(sum).filter(|&c| c > 0).ok_or_else(|| {
            Error::InvalidMeasure("weights too fine to represent".into())
        })?;
        Self::from_counts(counted)
    }

    pub fn dirac(x: State) -> Self {
        AtomicMeasure { atoms: vec![(x, 1)], total: 1 }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&State, f64)> {
        self.atoms.iter().map(|(x, c)| (x, *c as f64 / self.total as f64))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Exact total mass, always 1.
    pub fn total_mass(&self) -> Ratio<u64> {
        let sum: u64 = self.atoms.iter().map(|(_, c)| c).sum();
        Ratio::new(sum, self.total)
    }

    /// Equal atoms combined, in order of first appearance.
    pub fn merged(&self) -> Self {
        let mut seen: HashMap<StateKey, usize> = HashMap::new();
        let mut out: Vec<(State, u64)> = Vec::new();
        for (x, c) in &self.atoms {
            let key = StateKey::of(x);
            match seen.get(&key) {
                Some(&i) => out[i].1 += c,
                None => {
                    seen.insert(key, out.len());
                    out.push((x.clone(), *c));
                }
            }
        }
        AtomicMeasure { atoms: out, total: self.total }
    }

    pub fn integrate(&self, obs: &Observable) -> Result<f64> {
        let mut s = 0.0;
        for (x, w) in self.atoms() {
            s += w * obs.eval(x)?;
        }
        Ok(s)
    }
}

/// Uniform measure on the first `n` points of the orbit of `x`.
pub fn empirical(system: &System, x: &State, n: usize) -> Result<AtomicMeasure> {
    if n == 0 {
        return Err(Error::InvalidArgument("empirical measure needs n >= 1".into()));
    }
    let orbit = system.orbit(x, n)?;
    AtomicMeasure::from_counts(orbit.into_iter().map(|s| (s, 1)).collect())
}

#[derive(PartialEq, Eq, Hash)]
enum StateKey {
    Word(Vec<u8>, Vec<u8>),
    Point(u64),
    Exact(String),
}

impl StateKey {
    fn of(x: &State) -> Self {
        match x {
            State::Word(w) => {
                let (h, c) = w.canonical();
                StateKey::Word(h, c)
            }
            State::Point(v) => StateKey::Point(if *v == 0.0 { 0 } else { v.to_bits() }),
            State::Exact(q) => StateKey::Exact(q.to_string()),
        }
    }
}

impl Serialize for AtomicMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.atoms.len()))?;
        for (x, w) in self.atoms() {
            seq.serialize_element(&(x, w))?;
        }
        seq.end()
    }
}
