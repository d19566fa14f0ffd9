//! Probability measures, the truncated weak* distance and limit sets of
//! empirical measures.

mod atomic;
mod decompose;
mod family;
mod limit;
mod markov;
mod observable;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::State;

pub use atomic::{empirical, AtomicMeasure};
pub use decompose::{convex_decompose, Decomposition, DEFAULT_DENOMINATOR_CAP};
pub use family::{FamilyKind, FamilySpec, TestFamily, DEFAULT_TRUNCATION};
pub use limit::{limit_grid, limit_measures, LimitCluster};
pub use markov::{MarkovMeasure, MarkovSampler, MAX_LOCAL_WORDS};
pub use observable::{LocalObservable, Observable};

/// An explicit convex combination of Markov measures. Never collapsed, so
/// entropy is affine over the listed components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    mixture: Vec<Component>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Component {
    weight: f64,
    measure: MarkovMeasure,
}

impl Mixture {
    pub fn new(parts: Vec<(f64, MarkovMeasure)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidMeasure("mixture needs at least one component".into()));
        }
        if parts.iter().any(|(w, _)| !(*w > 0.0)) {
            return Err(Error::InvalidMeasure("mixture weights must be positive".into()));
        }
        let s: f64 = parts.iter().map(|(w, _)| w).sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("mixture weights sum to {s}")));
        }
        let k = parts[0].1.alphabet_size();
        if parts.iter().any(|(_, m)| m.alphabet_size() != k) {
            return Err(Error::InvalidMeasure("mixture components use different alphabets".into()));
        }
        Ok(Mixture { mixture: parts.into_iter().map(|(weight, measure)| Component { weight, measure }).collect() })
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, &MarkovMeasure)> {
        self.mixture.iter().map(|c| (c.weight, &c.measure))
    }

    pub fn alphabet_size(&self) -> usize {
        self.mixture[0].measure.alphabet_size()
    }

    pub fn entropy(&self) -> f64 {
        self.components().map(|(w, m)| w * m.entropy()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Atomic(AtomicMeasure),
    Markov(MarkovMeasure),
    Mixture(Mixture),
}

impl Measure {
    pub fn integrate(&self, obs: &Observable) -> Result<f64> {
        match self {
            Measure::Atomic(a) => a.integrate(obs),
            Measure::Markov(m) => m.integrate(obs),
            Measure::Mixture(x) => x.components().map(|(w, m)| Ok(w * m.integrate(obs)?)).sum(),
        }
    }

    /// Integrals of every family member, in family order.
    pub fn integrals(&self, family: &TestFamily) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; family.len()];
        match self {
            Measure::Atomic(a) => {
                for (x, w) in a.atoms() {
                    family.add_eval(x, w, &mut acc)?;
                }
            }
            Measure::Markov(m) => {
                let words = family.cylinder_words().ok_or(Error::KindMismatch("Markov measures live on shifts"))?;
                for (a, w) in acc.iter_mut().zip(words) {
                    *a = m.cylinder_mass(w);
                }
            }
            Measure::Mixture(x) => {
                for (w, m) in x.components() {
                    let part = Measure::Markov(m.clone()).integrals(family)?;
                    acc.iter_mut().zip(part).for_each(|(a, p)| *a += w * p);
                }
            }
        }
        Ok(acc)
    }

    /// Entropy for Markov measures and their mixtures.
    pub fn entropy(&self) -> Option<f64> {
        match self {
            Measure::Atomic(_) => None,
            Measure::Markov(m) => Some(m.entropy()),
            Measure::Mixture(x) => Some(x.entropy()),
        }
    }

    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            Measure::Atomic(_) => None,
            Measure::Markov(m) => Some(m.alphabet_size()),
            Measure::Mixture(x) => Some(x.alphabet_size()),
        }
    }
}

impl From<MarkovMeasure> for Measure {
    fn from(m: MarkovMeasure) -> Self {
        Measure::Markov(m)
    }
}

impl From<AtomicMeasure> for Measure {
    fn from(m: AtomicMeasure) -> Self {
        Measure::Atomic(m)
    }
}

impl From<Mixture> for Measure {
    fn from(m: Mixture) -> Self {
        Measure::Mixture(m)
    }
}

impl Serialize for Measure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Measure::Atomic(a) => a.serialize(s),
            Measure::Markov(m) => m.serialize(s),
            Measure::Mixture(x) => x.serialize(s),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MeasureRepr {
    Mixture(Mixture),
    Markov(MarkovMeasure),
    Atomic(Vec<(State, f64)>),
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        Ok(match MeasureRepr::deserialize(d)? {
            MeasureRepr::Mixture(x) => {
                let parts = x.mixture.into_iter().map(|c| (c.weight, c.measure)).collect();
                Measure::Mixture(Mixture::new(parts).map_err(D::Error::custom)?)
            }
            MeasureRepr::Markov(m) => Measure::Markov(m),
            MeasureRepr::Atomic(a) => Measure::Atomic(AtomicMeasure::from_weights(a).map_err(D::Error::custom)?),
        })
    }
}

/// A truncated weak* distance with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    pub value: f64,
    pub tail: f64,
}

pub fn weak_star_distance(mu: &Measure, nu: &Measure, family: &TestFamily) -> Result<Distance> {
    let a = mu.integrals(family)?;
    let b = nu.integrals(family)?;
    Ok(Distance { value: family.distance(&a, &b), tail: family.tail_bound() })
}

/// Closed or open weak* ball around a measure.
#[derive(Debug, Clone)]
pub struct MeasureBall {
    center: Measure,
    center_integrals: Vec<f64>,
    radius: f64,
}

impl MeasureBall {
    /// Radii above 1 are stored as 1, which already covers every measure.
    pub fn new(center: Measure, radius: f64, family: &TestFamily) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius {radius} must be positive")));
        }
        let center_integrals = center.integrals(family)?;
        Ok(MeasureBall { center, center_integrals, radius: radius.min(1.0) })
    }

    pub fn center(&self) -> &Measure {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn distance_to(&self, integrals: &[f64], family: &TestFamily) -> f64 {
        family.distance(integrals, &self.center_integrals)
    }

    /// Membership in the closed ball.
    pub fn contains_closed(&self, integrals: &[f64], family: &TestFamily) -> bool {
        self.radius >= 1.0 || self.distance_to(integrals, family) <= self.radius
    }
}
