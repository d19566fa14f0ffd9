//! Dynamical systems: shifts of finite type and piecewise-linear interval maps.

pub(crate) mod pl;
mod shift;
mod word;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pl::{EndpointFixedMap, PiecewiseLinear, TentMap};
pub(crate) use pl::rational;
pub use shift::ShiftSpace;
pub use word::Word;

/// Coordinates compared by the shift metric; 2^-1080 already underflows.
pub const SHIFT_RESOLUTION: usize = 1080;

/// A point of a system.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Word(Word),
    Point(f64),
    /// An interval point carried exactly, used by shadowing.
    Exact(BigRational),
}

impl State {
    pub fn word(&self) -> Option<&Word> {
        match self {
            State::Word(w) => Some(w),
            _ => None,
        }
    }

    /// Interval coordinate, rounded to `f64` when exact.
    pub fn point(&self) -> Option<f64> {
        match self {
            State::Point(x) => Some(*x),
            State::Exact(q) => q.to_f64(),
            State::Word(_) => None,
        }
    }

    fn exact(&self) -> Option<BigRational> {
        match self {
            State::Point(x) => Some(rational(*x)),
            State::Exact(q) => Some(q.clone()),
            State::Word(_) => None,
        }
    }
}

impl From<Word> for State {
    fn from(w: Word) -> Self {
        State::Word(w)
    }
}

impl From<f64> for State {
    fn from(x: f64) -> Self {
        State::Point(x)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateRepr {
    Point(f64),
    Word { head: Vec<u8>, cycle: Vec<u8> },
    Exact { exact: String, approx: Option<f64> },
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            State::Point(x) => StateRepr::Point(*x),
            State::Word(w) => {
                let (head, cycle) = w.canonical();
                StateRepr::Word { head, cycle }
            }
            State::Exact(q) => StateRepr::Exact { exact: q.to_string(), approx: q.to_f64() },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match StateRepr::deserialize(d)? {
            StateRepr::Point(x) => Ok(State::Point(x)),
            StateRepr::Word { head, cycle } => {
                if cycle.is_empty() {
                    return Err(D::Error::custom("word cycle must be nonempty"));
                }
                Ok(State::Word(Word::new(head, cycle)))
            }
            StateRepr::Exact { exact, .. } => exact
                .parse::<BigRational>()
                .map(State::Exact)
                .map_err(|e| D::Error::custom(format!("bad rational {exact}: {e}"))),
        }
    }
}

/// JSON description of a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    FullShift { k: usize },
    Sft { transition: Vec<Vec<u8>> },
    Tent { s: f64 },
    Plmap { breakpoints: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone)]
pub enum System {
    Shift(ShiftSpace),
    Tent(TentMap),
    Interval(EndpointFixedMap),
}

impl System {
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        Ok(match spec {
            SystemSpec::FullShift { k } => System::Shift(ShiftSpace::full(*k)?),
            SystemSpec::Sft { transition } => System::Shift(ShiftSpace::sft(transition.clone())?),
            SystemSpec::Tent { s } => System::Tent(TentMap::new(*s)?),
            SystemSpec::Plmap { breakpoints, values } => {
                System::Interval(EndpointFixedMap::new(breakpoints.clone(), values.clone())?)
            }
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidSystem(format!("bad system JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn spec(&self) -> SystemSpec {
        match self {
            System::Shift(s) if s.is_full() => SystemSpec::FullShift { k: s.alphabet_size() },
            System::Shift(s) => SystemSpec::Sft { transition: s.transition() },
            System::Tent(t) => SystemSpec::Tent { s: t.slope() },
            System::Interval(m) => SystemSpec::Plmap {
                breakpoints: m.piecewise().knots().to_vec(),
                values: m.piecewise().values().to_vec(),
            },
        }
    }

    pub fn shift(&self) -> Option<&ShiftSpace> {
        match self {
            System::Shift(s) => Some(s),
            _ => None,
        }
    }

    pub fn piecewise(&self) -> Option<&PiecewiseLinear> {
        match self {
            System::Shift(_) => None,
            System::Tent(t) => Some(t.piecewise()),
            System::Interval(m) => Some(m.piecewise()),
        }
    }

    /// Domain of an interval system.
    pub fn domain(&self) -> Option<(f64, f64)> {
        self.piecewise().map(|p| p.domain())
    }

    pub fn contains(&self, x: &State) -> Result<()> {
        match (self, x) {
            (System::Shift(s), State::Word(w)) => {
                if s.admits(w) {
                    Ok(())
                } else {
                    Err(Error::OutOfDomain(format!("word {w} is not admissible")))
                }
            }
            (System::Shift(_), _) => Err(Error::KindMismatch("shift expects a word")),
            (_, State::Word(_)) => Err(Error::KindMismatch("interval map expects a point")),
            (_, State::Point(v)) => {
                if self.piecewise().unwrap().in_domain(*v) {
                    Ok(())
                } else {
                    Err(Error::OutOfDomain(format!("{v} outside {:?}", self.domain().unwrap())))
                }
            }
            (_, State::Exact(q)) => {
                if self.piecewise().unwrap().in_domain_exact(q) {
                    Ok(())
                } else {
                    Err(Error::OutOfDomain(format!("{q} outside {:?}", self.domain().unwrap())))
                }
            }
        }
    }

    /// One step of the map. Shift words are not re-checked for
    /// admissibility here; use [`System::contains`] for that.
    pub fn apply(&self, x: &State) -> Result<State> {
        self.iterate(x, 1)
    }

    pub fn iterate(&self, x: &State, n: usize) -> Result<State> {
        match (self, x) {
            (System::Shift(_), State::Word(w)) => Ok(State::Word(w.shifted(n))),
            (System::Shift(_), _) => Err(Error::KindMismatch("shift expects a word")),
            (_, State::Word(_)) => Err(Error::KindMismatch("interval map expects a point")),
            (_, State::Point(_)) | (_, State::Exact(_)) => {
                self.contains(x)?;
                let mut y = x.clone();
                for _ in 0..n {
                    y = self.step_point(&y);
                }
                Ok(y)
            }
        }
    }

    fn step_point(&self, x: &State) -> State {
        match (self, x) {
            (System::Tent(t), State::Point(v)) => State::Point(t.eval(*v)),
            (System::Interval(m), State::Point(v)) => State::Point(m.eval(*v)),
            (_, State::Exact(q)) => State::Exact(self.piecewise().unwrap().eval_exact(q)),
            _ => unreachable!("checked by caller"),
        }
    }

    pub fn dist(&self, x: &State, y: &State) -> Result<f64> {
        match (self, x, y) {
            (System::Shift(_), State::Word(a), State::Word(b)) => Ok(match a.first_disagreement(b, SHIFT_RESOLUTION) {
                Some(k) => 0.5f64.powi(k as i32),
                None => 0.0,
            }),
            (System::Shift(_), _, _) => Err(Error::KindMismatch("shift expects words")),
            (_, State::Point(a), State::Point(b)) => Ok((a - b).abs()),
            (_, State::Word(_), _) | (_, _, State::Word(_)) => Err(Error::KindMismatch("interval map expects points")),
            _ => {
                let d = (x.exact().unwrap() - y.exact().unwrap()).abs();
                Ok(d.to_f64().unwrap_or(f64::INFINITY))
            }
        }
    }

    /// Bowen metric: max over the first `n` iterates.
    pub fn dist_n(&self, x: &State, y: &State, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("dist_n needs n >= 1".into()));
        }
        match (self, x, y) {
            (System::Shift(_), State::Word(a), State::Word(b)) => {
                // the max is attained at i = 0 unless the words agree on 0..n-1
                Ok(match a.first_disagreement(b, n - 1 + SHIFT_RESOLUTION) {
                    Some(k) if k < n => 1.0,
                    Some(k) => 0.5f64.powi((k - n + 1) as i32),
                    None => 0.0,
                })
            }
            _ => self.dist_n_by_orbit(x, y, n),
        }
    }

    /// `dist_n` evaluated literally along both orbits.
    pub fn dist_n_by_orbit(&self, x: &State, y: &State, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("dist_n needs n >= 1".into()));
        }
        let (mut a, mut b) = (x.clone(), y.clone());
        let mut best = self.dist(&a, &b)?;
        for _ in 1..n {
            a = self.apply(&a)?;
            b = self.apply(&b)?;
            best = best.max(self.dist(&a, &b)?);
        }
        Ok(best)
    }

    pub fn orbit(&self, x: &State, n: usize) -> Result<Vec<State>> {
        if n == 0 {
            return Err(Error::InvalidArgument("orbit length must be at least 1".into()));
        }
        let mut out = Vec::with_capacity(n);
        out.push(x.clone());
        for i in 1..n {
            let next = self.apply(&out[i - 1])?;
            out.push(next);
        }
        Ok(out)
    }
}
