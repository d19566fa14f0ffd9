//! Pseudo-orbits and the search for orbits that shadow them.

mod modulus;
mod refine;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::systems::{ShiftSpace, State, System, Word};

pub use modulus::{shadowing_modulus, ModulusConfig, ModulusReport, ModulusRow, SUCCESS_RATE};
pub use refine::{shadow_interval, IntervalShadow, DEFAULT_INTERVAL_CAP};

/// Random symbols appended after the kept coordinates when a shift state is
/// perturbed.
const RESAMPLED_TAIL: usize = 64;

/// A finite sequence with every step gap at most `delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoOrbit {
    states: Vec<State>,
    delta: f64,
}

impl PseudoOrbit {
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn into_states(self) -> Vec<State> {
        self.states
    }

    /// Appends `other`; the joint gap must stay within the larger delta.
    pub fn concat(self, other: PseudoOrbit, system: &System) -> Result<PseudoOrbit> {
        let delta = self.delta.max(other.delta);
        let mut states = self.states;
        states.extend(other.states);
        validate_pseudo(system, states, delta)
    }
}

/// Checks `d(f(x_i), x_{i+1}) ≤ delta` for every step. Shift words are not
/// re-checked for admissibility.
pub fn validate_pseudo(system: &System, states: Vec<State>, delta: f64) -> Result<PseudoOrbit> {
    if states.len() < 2 {
        return Err(Error::InvalidArgument("a pseudo-orbit needs at least two states".into()));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta {delta} must be finite and nonnegative")));
    }
    if system.shift().is_none() {
        for x in &states {
            system.contains(x)?;
        }
    }
    for i in 0..states.len() - 1 {
        let gap = system.dist(&system.apply(&states[i])?, &states[i + 1])?;
        if gap > delta {
            return Err(Error::PseudoOrbitGap { index: i, gap, delta });
        }
    }
    Ok(PseudoOrbit { states, delta })
}

/// Number of leading coordinates on which a `delta`-step must agree with
/// the true image: the least `m` with `2^-m ≤ delta`.
pub fn agreement_depth(delta: f64) -> Option<usize> {
    if delta <= 0.0 {
        None
    } else if delta >= 1.0 {
        Some(0)
    } else {
        let m = (1.0 / delta).log2().ceil() as usize;
        // guard the rounding of log2 at exact powers of two
        Some((m.saturating_sub(1)..=m + 1).find(|&j| 0.5f64.powi(j as i32) <= delta).unwrap_or(m))
    }
}

/// A true orbit with bounded random errors injected at every step.
///
/// Interval maps get i.i.d. uniform noise in `[−δ/2, δ/2]`, clamped to the
/// domain. Shift states keep the coordinates the metric resolves at `δ`
/// and have the rest resampled. `δ = 0` gives the true orbit.
pub fn perturbed_orbit(system: &System, x0: &State, n: usize, delta: f64, seed: u64) -> Result<PseudoOrbit> {
    if n < 2 {
        return Err(Error::InvalidArgument("a pseudo-orbit needs at least two states".into()));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta {delta} must be finite and nonnegative")));
    }
    system.contains(x0)?;
    if delta == 0.0 {
        return validate_pseudo(system, system.orbit(x0, n)?, 0.0);
    }
    let mut rng = rng::stream(seed, rng::tag(&[0x5045_5254, n as u64]));
    let mut states = Vec::with_capacity(n);
    match system {
        System::Shift(shift) => {
            let m = agreement_depth(delta).unwrap();
            states.push(x0.clone());
            for i in 1..n {
                let image = states[i - 1].word().expect("shift state").shifted(1);
                states.push(State::Word(resample_tail(shift, &image, m, &mut rng)));
            }
        }
        _ => {
            let (lo, hi) = system.domain().unwrap();
            let h = delta / 2.0;
            let mut x = x0.point().ok_or(Error::KindMismatch("interval map expects a point"))?;
            states.push(State::Point(x));
            for _ in 1..n {
                let y = system.apply(&State::Point(x))?.point().unwrap();
                x = (y + rng.random_range(-h..=h)).clamp(lo, hi);
                states.push(State::Point(x));
            }
        }
    }
    validate_pseudo(system, states, delta)
}

fn resample_tail<R: Rng + ?Sized>(shift: &ShiftSpace, w: &Word, keep: usize, rng: &mut R) -> Word {
    let mut v = w.prefix(keep);
    if v.is_empty() {
        v = shift.random_word(RESAMPLED_TAIL, rng);
    } else {
        shift.extend_random(&mut v, RESAMPLED_TAIL, rng);
    }
    shift.complete(&v).expect("random extensions are admissible")
}

/// An orbit segment together with its distance to a pseudo-orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShadowResult {
    pub point: State,
    pub max_deviation: f64,
    pub per_step: Vec<f64>,
}

impl ShadowResult {
    pub(crate) fn measure(system: &System, point: State, states: &[State]) -> Result<Self> {
        let mut per_step = Vec::with_capacity(states.len());
        let mut y = point.clone();
        for (i, x) in states.iter().enumerate() {
            if i > 0 {
                y = system.apply(&y)?;
            }
            per_step.push(system.dist(&y, x)?);
        }
        let max_deviation = per_step.iter().copied().fold(0.0, f64::max);
        Ok(ShadowResult { point, max_deviation, per_step })
    }

    /// Recomputes every deviation independently of how the point was found.
    pub fn verify(&self, system: &System, po: &PseudoOrbit) -> Result<bool> {
        let again = Self::measure(system, self.point.clone(), po.states())?;
        Ok(again.per_step == self.per_step && again.max_deviation == self.max_deviation)
    }

    /// The shadowing condition, strict in `epsilon`.
    pub fn within(&self, epsilon: f64) -> bool {
        self.max_deviation < epsilon
    }
}

/// Shadows a shift pseudo-orbit by reading off the first symbol of every
/// state, with the last state supplying the tail.
///
/// If every gap is at most `2^-m`, the result is within `2^-(m+1)` of every
/// state.
pub fn shadow_shift(shift: &ShiftSpace, po: &PseudoOrbit) -> Result<ShadowResult> {
    let states = po.states();
    let words: Vec<&Word> = states
        .iter()
        .map(|s| s.word().ok_or(Error::KindMismatch("shift expects words")))
        .collect::<Result<_>>()?;
    let prefix: Vec<u8> = words[..words.len() - 1].iter().map(|w| w.symbol(0)).collect();
    let z = Word::with_prefix(prefix, words[words.len() - 1]);
    if !shift.admits(&z) {
        let bad = (0..states.len())
            .find(|&i| !shift.allows(z.symbol(i), z.symbol(i + 1)))
            .unwrap_or(states.len());
        return Err(Error::InvalidArgument(format!("spliced word is not admissible at index {bad}")));
    }
    let system = System::Shift(shift.clone());
    let result = ShadowResult::measure(&system, State::Word(z), states)?;
    if let Some(m) = agreement_depth(po.delta()) {
        let bound = 0.5f64.powi(m as i32 + 1);
        if result.max_deviation > bound {
            return Err(Error::Invariant(format!(
                "splice deviation {} exceeds the guaranteed {bound}",
                result.max_deviation
            )));
        }
    } else if result.max_deviation != 0.0 {
        return Err(Error::Invariant("true orbit was not reproduced".into()));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::TentMap;

    fn tent2() -> System {
        System::Tent(TentMap::new(2.0).unwrap())
    }

    #[test]
    fn validation_examples() {
        let t = tent2();
        let orbit = t.orbit(&State::Point(0.2), 10).unwrap();
        assert!(validate_pseudo(&t, orbit, 1e-12).is_ok());
        let xs = vec![State::Point(0.2), State::Point(0.4001), State::Point(0.8002)];
        assert!(validate_pseudo(&t, xs.clone(), 1e-3).is_ok());
        match validate_pseudo(&t, xs, 1e-5) {
            Err(Error::PseudoOrbitGap { index, gap, .. }) => {
                assert_eq!(index, 0);
                assert!((gap - 1e-4).abs() < 1e-12);
            }
            other => panic!("expected a gap error, got {other:?}"),
        }
        assert!(validate_pseudo(&t, vec![State::Point(0.2)], 1.0).is_err());
    }

    #[test]
    fn perturbation_examples() {
        let t = tent2();
        let x0 = State::Point(0.2);
        let po = perturbed_orbit(&t, &x0, 5, 0.0, 1).unwrap();
        assert_eq!(po.states(), t.orbit(&x0, 5).unwrap().as_slice());
        let a = perturbed_orbit(&t, &x0, 100, 1e-6, 9).unwrap();
        let b = perturbed_orbit(&t, &x0, 100, 1e-6, 9).unwrap();
        assert_eq!(a.states(), b.states());
        assert!(validate_pseudo(&t, a.into_states(), 1e-6).is_ok());
        let s = System::Shift(ShiftSpace::full(2).unwrap());
        let w = State::Word(Word::periodic(&[0, 1, 1]));
        let po = perturbed_orbit(&s, &w, 30, 0.125, 4).unwrap();
        assert_eq!(po.len(), 30);
    }

    #[test]
    fn agreement_depths() {
        assert_eq!(agreement_depth(0.125), Some(3));
        assert_eq!(agreement_depth(0.1), Some(4));
        assert_eq!(agreement_depth(1.0), Some(0));
        assert_eq!(agreement_depth(0.0), None);
        assert_eq!(agreement_depth(0.5f64.powi(40)), Some(40));
    }

    #[test]
    fn splicing_a_true_orbit_returns_its_start() {
        let shift = ShiftSpace::full(2).unwrap();
        let s = System::Shift(shift.clone());
        let x = State::Word(Word::new(vec![1, 0, 0, 1, 1], vec![0, 1]));
        let po = perturbed_orbit(&s, &x, 12, 0.0, 0).unwrap();
        let r = shadow_shift(&shift, &po).unwrap();
        assert_eq!(r.point, x);
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.verify(&s, &po).unwrap());
    }

    #[test]
    fn splice_bound_on_random_pseudo_orbits() {
        let shift = ShiftSpace::full(2).unwrap();
        let s = System::Shift(shift.clone());
        let x = State::Word(shift.random_point(20, &mut rng::stream(5, 0)));
        let po = perturbed_orbit(&s, &x, 50, 0.125, 17).unwrap();
        let r = shadow_shift(&shift, &po).unwrap();
        assert!(r.max_deviation <= 0.0625);
        assert!(r.verify(&s, &po).unwrap());
    }

    #[test]
    fn golden_mean_splice_is_admissible() {
        let g = ShiftSpace::golden_mean();
        let s = System::Shift(g.clone());
        let x = State::Word(g.random_point(10, &mut rng::stream(2, 0)));
        let po = perturbed_orbit(&s, &x, 80, 0.25, 3).unwrap();
        let r = shadow_shift(&g, &po).unwrap();
        assert!(g.admits(r.point.word().unwrap()));
        assert!(r.max_deviation <= 0.125);
    }

    #[test]
    fn concatenation_revalidates() {
        let t = tent2();
        let a = validate_pseudo(&t, t.orbit(&State::Point(0.2), 3).unwrap(), 1e-3).unwrap();
        let b = validate_pseudo(&t, t.orbit(&State::Point(1.6004), 2).unwrap(), 1e-3).unwrap();
        assert!(a.clone().concat(b, &t).is_ok());
        let c = validate_pseudo(&t, t.orbit(&State::Point(1.7), 2).unwrap(), 1e-3).unwrap();
        assert!(a.concat(c, &t).is_err());
    }
}
