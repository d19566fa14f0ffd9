use serde::{Deserialize, Serialize};

use super::observable::{hat, Observable};
use crate::error::{Error, Result};
use crate::systems::{ShiftSpace, State, System};

/// The truncated test-function family behind the weak* distance.
///
/// Shifts use indicators of admissible cylinders ordered by (length,
/// lexicographic); interval maps use unit-height hats on dyadic grids
/// ordered by (level, position). Every member has sup norm 1, and member
/// `i` (from 0) carries weight `2^-(i+2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFamily {
    members: Members,
    truncation: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Members {
    Cylinders { alphabet: usize, words: Vec<Vec<u8>>, index: Vec<Vec<Option<usize>>> },
    Hats { lo: f64, hi: f64, hats: Vec<(f64, f64)> },
}

/// Serialized description of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Cylinder,
    Hat,
}

pub const DEFAULT_TRUNCATION: usize = 16;

impl TestFamily {
    pub fn cylinders(shift: &ShiftSpace, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("family truncation must be at least 1".into()));
        }
        let k = shift.alphabet_size();
        let mut words = Vec::with_capacity(n);
        let mut len = 1;
        while words.len() < n {
            for w in shift.words(len) {
                if words.len() == n {
                    break;
                }
                words.push(w);
            }
            len += 1;
        }
        let depth = words.last().map_or(0, |w| w.len());
        let mut index: Vec<Vec<Option<usize>>> = (0..=depth).map(|l| vec![None; k.pow(l as u32)]).collect();
        for (i, w) in words.iter().enumerate() {
            index[w.len()][code(w, k)] = Some(i);
        }
        Ok(TestFamily { members: Members::Cylinders { alphabet: k, words, index }, truncation: n })
    }

    pub fn hats(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("family truncation must be at least 1".into()));
        }
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidArgument("hat family needs lo < hi".into()));
        }
        let mut hats = Vec::with_capacity(n);
        let mut level = 1u32;
        'outer: loop {
            let cells = 1u64 << level;
            let h = (hi - lo) / cells as f64;
            for j in 0..=cells {
                if hats.len() == n {
                    break 'outer;
                }
                hats.push((lo + j as f64 * h, h));
            }
            level += 1;
        }
        Ok(TestFamily { members: Members::Hats { lo, hi, hats }, truncation: n })
    }

    pub fn for_system(system: &System, n: usize) -> Result<Self> {
        match system {
            System::Shift(s) => Self::cylinders(s, n),
            _ => {
                let (lo, hi) = system.domain().expect("interval system");
                Self::hats(lo, hi, n)
            }
        }
    }

    pub fn from_spec(system: &System, spec: FamilySpec) -> Result<Self> {
        match (spec.kind, system) {
            (FamilyKind::Cylinder, System::Shift(_)) | (FamilyKind::Hat, System::Tent(_) | System::Interval(_)) => {
                Self::for_system(system, spec.n)
            }
            _ => Err(Error::KindMismatch("family kind does not fit the system")),
        }
    }

    pub fn spec(&self) -> FamilySpec {
        let kind = match self.members {
            Members::Cylinders { .. } => FamilyKind::Cylinder,
            Members::Hats { .. } => FamilyKind::Hat,
        };
        FamilySpec { kind, n: self.truncation }
    }

    pub fn len(&self) -> usize {
        self.truncation
    }

    pub fn is_empty(&self) -> bool {
        self.truncation == 0
    }

    pub fn weight(&self, i: usize) -> f64 {
        0.5f64.powi(i as i32 + 2)
    }

    pub fn norm(&self, _i: usize) -> f64 {
        1.0
    }

    /// Bound on the omitted part of the infinite sum.
    pub fn tail_bound(&self) -> f64 {
        0.5f64.powi(self.truncation as i32)
    }

    /// Longest cylinder, or 0 for hats.
    pub fn depth(&self) -> usize {
        match &self.members {
            Members::Cylinders { words, .. } => words.last().map_or(0, |w| w.len()),
            Members::Hats { .. } => 0,
        }
    }

    pub fn cylinder_words(&self) -> Option<&[Vec<u8>]> {
        match &self.members {
            Members::Cylinders { words, .. } => Some(words),
            Members::Hats { .. } => None,
        }
    }

    pub fn observable(&self, i: usize) -> Observable {
        match &self.members {
            Members::Cylinders { words, .. } => Observable::Cylinder(words[i].clone()),
            Members::Hats { hats, .. } => Observable::Hat { center: hats[i].0, half_width: hats[i].1 },
        }
    }

    /// All family members evaluated at `x`.
    pub fn eval_all(&self, x: &State) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.truncation];
        self.add_eval(x, 1.0, &mut out)?;
        Ok(out)
    }

    pub(crate) fn add_eval(&self, x: &State, weight: f64, acc: &mut [f64]) -> Result<()> {
        match (&self.members, x) {
            (Members::Cylinders { .. }, State::Word(w)) => {
                let prefix = w.prefix(self.depth());
                self.add_cylinder_hits(&prefix, weight, acc);
                Ok(())
            }
            (Members::Hats { lo, hi, hats }, _) => {
                let v = x.point().ok_or(Error::KindMismatch("hat family needs interval points"))?;
                if v < *lo || v > *hi {
                    return Err(Error::OutOfDomain(format!("{v} outside [{lo}, {hi}]")));
                }
                for (a, &(c, h)) in acc.iter_mut().zip(hats) {
                    *a += weight * hat(v, c, h);
                }
                Ok(())
            }
            _ => Err(Error::KindMismatch("cylinder family needs words")),
        }
    }

    /// Adds `weight` to every cylinder that `window` (read from its start)
    /// lies in. Cylinders longer than `window` are skipped.
    pub(crate) fn add_cylinder_hits(&self, window: &[u8], weight: f64, acc: &mut [f64]) {
        if let Members::Cylinders { alphabet, index, .. } = &self.members {
            let mut c = 0usize;
            for (l, &a) in window.iter().enumerate().take(index.len() - 1) {
                if a as usize >= *alphabet {
                    return;
                }
                c = c * alphabet + a as usize;
                if let Some(i) = index[l + 1][c] {
                    acc[i] += weight;
                }
            }
        }
    }

    /// Truncated weak* distance between two vectors of integrals.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| self.weight(i) * (x - y).abs() / self.norm(i))
            .sum()
    }
}

fn code(w: &[u8], k: usize) -> usize {
    w.iter().fold(0, |acc, &a| acc * k + a as usize)
}
