use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{PseudoOrbit, ShadowResult};
use crate::error::{Error, Result};
use crate::systems::pl::rational;
use crate::systems::{PiecewiseLinear, State, System};

pub const DEFAULT_INTERVAL_CAP: usize = 4096;

/// Outcome of the backward refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IntervalShadow {
    Found(ShadowResult),
    /// No point stays within `epsilon`; the candidate set emptied at `step`.
    Failed { step: usize },
}

impl IntervalShadow {
    pub fn result(&self) -> Option<&ShadowResult> {
        match self {
            IntervalShadow::Found(r) => Some(r),
            IntervalShadow::Failed { .. } => None,
        }
    }

    /// Found, and strictly inside `epsilon` at every step.
    pub fn succeeded(&self, epsilon: f64) -> bool {
        self.result().is_some_and(|r| r.within(epsilon))
    }
}

#[derive(Debug, Clone)]
struct Closed {
    lo: BigRational,
    hi: BigRational,
}

/// Searches for a true orbit within `epsilon` of `po` by maintaining the
/// exact set `{x : |f^j(x) − x_{t+j}| ≤ ε for t ≤ j < L}` from the back.
///
/// The set is a finite union of closed intervals. It is capped at `cap`
/// pieces; exceeding the cap is a resource error, not a failure.
pub fn shadow_interval(system: &System, po: &PseudoOrbit, epsilon: f64, cap: usize) -> Result<IntervalShadow> {
    let pl = system
        .piecewise()
        .ok_or(Error::KindMismatch("interval shadowing needs an interval map"))?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("interval cap must be positive".into()));
    }
    let eps = rational(epsilon);
    let targets: Vec<BigRational> = po
        .states()
        .iter()
        .map(exact_point)
        .collect::<Result<_>>()?;
    let last = targets.len() - 1;
    let mut set = window(pl, &targets[last], &eps).into_iter().collect::<Vec<_>>();
    if set.is_empty() {
        return Ok(IntervalShadow::Failed { step: last });
    }
    for t in (0..last).rev() {
        let Some(w) = window(pl, &targets[t], &eps) else {
            return Ok(IntervalShadow::Failed { step: t });
        };
        let mut next = Vec::new();
        for piece in 0..pl.pieces() {
            for iv in &set {
                if let Some(pre) = preimage(pl, piece, iv) {
                    if let Some(c) = intersect(&pre, &w) {
                        next.push(c);
                    }
                }
            }
        }
        set = merge(next);
        if set.is_empty() {
            return Ok(IntervalShadow::Failed { step: t });
        }
        if set.len() > cap {
            return Err(Error::ResourceCap { cap, step: t });
        }
    }
    let widest = set
        .iter()
        .max_by(|a, b| (&a.hi - &a.lo).cmp(&(&b.hi - &b.lo)))
        .expect("nonempty");
    let mid = (&widest.lo + &widest.hi) / BigRational::from_integer(BigInt::from(2));
    let result = ShadowResult::measure(system, State::Exact(mid.clone()), po.states())?;
    // independent exact check of the closed bound the refinement promised
    let mut y = mid;
    for (i, x) in targets.iter().enumerate() {
        if i > 0 {
            y = pl.eval_exact(&y);
        }
        let d = if &y > x { &y - x } else { x - &y };
        if d > eps {
            return Err(Error::Invariant(format!("refined point leaves the window at step {i}")));
        }
    }
    Ok(IntervalShadow::Found(result))
}

fn exact_point(s: &State) -> Result<BigRational> {
    match s {
        State::Point(x) => Ok(rational(*x)),
        State::Exact(q) => Ok(q.clone()),
        State::Word(_) => Err(Error::KindMismatch("interval map expects points")),
    }
}

fn window(pl: &PiecewiseLinear, x: &BigRational, eps: &BigRational) -> Option<Closed> {
    let (lo, hi) = pl.domain_exact();
    intersect(&Closed { lo: x - eps, hi: x + eps }, &Closed { lo: lo.clone(), hi: hi.clone() })
}

fn intersect(a: &Closed, b: &Closed) -> Option<Closed> {
    let lo = if a.lo > b.lo { &a.lo } else { &b.lo };
    let hi = if a.hi < b.hi { &a.hi } else { &b.hi };
    (lo <= hi).then(|| Closed { lo: lo.clone(), hi: hi.clone() })
}

/// Points of piece `i` mapped into `target`.
fn preimage(pl: &PiecewiseLinear, i: usize, target: &Closed) -> Option<Closed> {
    let (b0, b1, v0, v1) = pl.piece_exact(i);
    let rise = v1 - v0;
    if rise.is_zero() {
        let inside = v0 >= &target.lo && v0 <= &target.hi;
        return inside.then(|| Closed { lo: b0.clone(), hi: b1.clone() });
    }
    let (ylo, yhi) = if v0 < v1 { (v0, v1) } else { (v1, v0) };
    let range = intersect(target, &Closed { lo: ylo.clone(), hi: yhi.clone() })?;
    let scale = (b1 - b0) / rise;
    let a = b0 + (&range.lo - v0) * &scale;
    let b = b0 + (&range.hi - v0) * &scale;
    Some(if a <= b { Closed { lo: a, hi: b } } else { Closed { lo: b, hi: a } })
}

fn merge(mut v: Vec<Closed>) -> Vec<Closed> {
    v.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut out: Vec<Closed> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(top) if iv.lo <= top.hi => {
                if iv.hi > top.hi {
                    top.hi = iv.hi;
                }
            }
            _ => out.push(iv),
        }
    }
    out
}
