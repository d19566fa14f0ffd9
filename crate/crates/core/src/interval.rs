use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A real interval with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub lo_closed: bool,
    #[serde(default)]
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        let iv = Interval { lo, hi, lo_closed, hi_closed };
        iv.validate()?;
        Ok(iv)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(invalid("interval endpoints must be finite"));
        }
        let ok = self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed);
        if !ok {
            return Err(invalid(format!("malformed interval [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Intersection with the closed interval `[a, b]`, if nonempty.
    pub fn clip(&self, a: f64, b: f64) -> Option<Interval> {
        let (lo, lo_closed) = if a > self.lo {
            (a, true)
        } else if a == self.lo {
            (a, self.lo_closed)
        } else {
            (self.lo, self.lo_closed)
        };
        let (hi, hi_closed) = if b < self.hi {
            (b, true)
        } else if b == self.hi {
            (b, self.hi_closed)
        } else {
            (self.hi, self.hi_closed)
        };
        let iv = Interval { lo, hi, lo_closed, hi_closed };
        iv.validate().ok().map(|_| iv)
    }

    pub fn is_open(&self) -> bool {
        !self.lo_closed && !self.hi_closed
    }
}
