use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{State, Word};

/// A function of the first `depth` coordinates of a shift point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalObservable {
    alphabet: usize,
    depth: usize,
    /// Indexed by the base-`alphabet` value of the word, first symbol most
    /// significant.
    values: Vec<f64>,
}

impl LocalObservable {
    pub fn new(alphabet: usize, depth: usize, values: Vec<f64>) -> Result<Self> {
        if alphabet < 2 || depth == 0 {
            return Err(Error::InvalidArgument("observable needs alphabet >= 2 and depth >= 1".into()));
        }
        let expect = alphabet
            .checked_pow(depth as u32)
            .filter(|&n| n <= 1 << 22)
            .ok_or_else(|| Error::InvalidArgument(format!("observable table {alphabet}^{depth} too large")))?;
        if values.len() != expect {
            return Err(Error::InvalidArgument(format!("observable table has {} entries, expected {expect}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("observable values must be finite".into()));
        }
        Ok(LocalObservable { alphabet, depth, values })
    }

    /// Indicator of `symbol` at coordinate 0.
    pub fn frequency(alphabet: usize, symbol: u8) -> Result<Self> {
        if symbol as usize >= alphabet {
            return Err(Error::InvalidArgument(format!("symbol {symbol} outside alphabet {alphabet}")));
        }
        let values = (0..alphabet).map(|a| if a == symbol as usize { 1.0 } else { 0.0 }).collect();
        Self::new(alphabet, 1, values)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self, word: &[u8]) -> usize {
        word[..self.depth].iter().fold(0, |acc, &a| acc * self.alphabet + a as usize)
    }

    pub fn value(&self, word: &[u8]) -> f64 {
        self.values[self.index(word)]
    }

    pub fn eval_word(&self, w: &Word) -> f64 {
        self.value(&w.prefix(self.depth))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Something a measure can integrate.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Constant(f64),
    /// Indicator of the cylinder fixing the leading coordinates.
    Cylinder(Vec<u8>),
    /// Tent-shaped bump of height 1 on an interval.
    Hat { center: f64, half_width: f64 },
    Local(LocalObservable),
}

impl Observable {
    pub fn eval(&self, x: &State) -> Result<f64> {
        match (self, x) {
            (Observable::Constant(c), _) => Ok(*c),
            (Observable::Cylinder(c), State::Word(w)) => {
                Ok(if c.iter().enumerate().all(|(i, &a)| w.symbol(i) == a) { 1.0 } else { 0.0 })
            }
            (Observable::Local(phi), State::Word(w)) => Ok(phi.eval_word(w)),
            (Observable::Hat { center, half_width }, _) => {
                let v = x.point().ok_or(Error::KindMismatch("hat functions need interval points"))?;
                Ok(hat(v, *center, *half_width))
            }
            _ => Err(Error::KindMismatch("shift observables need words")),
        }
    }
}

pub(crate) fn hat(x: f64, center: f64, half_width: f64) -> f64 {
    (1.0 - (x - center).abs() / half_width).max(0.0)
}
