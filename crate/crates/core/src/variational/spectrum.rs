use serde::Serialize;

use super::lift::Lift;
use super::pressure::{GibbsMeasure, Perron, EXPONENT_LIMIT};
use crate::entropy::levelset_at;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::measures::LocalObservable;
use crate::systems::ShiftSpace;

/// Slack allowed when deciding that α lies in the attainable range.
const RANGE_SLACK: f64 = 1e-12;

/// `H(α) = sup{h(μ) : ∫φ dμ = α}` at one α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub h_var: f64,
    /// Minimizer of `P(q) − qα`; clamped at the exponent limit for α at an
    /// end of the range.
    pub q_star: f64,
    /// `h(maximizer) + q*·α − P(q*)`.
    pub duality_gap: f64,
    pub maximizer: GibbsMeasure,
    pub h_count: Option<f64>,
    pub n_count: Option<usize>,
    /// Set for an open endpoint of the constraint, where `h_var` is the
    /// limit from inside.
    pub one_sided: bool,
}

impl SpectrumPoint {
    /// Counting estimate minus the variational value.
    pub fn gap(&self) -> Option<f64> {
        self.h_count.map(|h| h - self.h_var)
    }
}

/// Range of `∫φ dμ` over invariant measures, with the lift it came from.
pub(crate) struct Prepared {
    lift: Lift,
    range: (f64, f64),
    q_limit: f64,
}

impl Prepared {
    pub fn new(shift: &ShiftSpace, phi: &LocalObservable) -> Result<Self> {
        let lift = Lift::new(shift, phi)?;
        lift.require_irreducible()?;
        let range = lift.mean_range();
        let (lo, hi) = lift.edges.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| (a.min(e.value), b.max(e.value)));
        let spread = hi - lo;
        let q_limit = if spread > 0.0 { EXPONENT_LIMIT / spread } else { 0.0 };
        Ok(Prepared { lift, range, q_limit })
    }

    fn perron(&self, q: f64) -> Result<Perron> {
        Perron::compute(&self.lift, q, self.range)
    }

    fn slope(&self, q: f64) -> Result<f64> {
        Ok(self.perron(q)?.derivative(&self.lift))
    }

    /// Legendre transform at α by bisection on the increasing `P'`.
    pub fn point(&self, alpha: f64) -> Result<SpectrumPoint> {
        let (lo, hi) = self.range;
        if !alpha.is_finite() || alpha < lo - RANGE_SLACK || alpha > hi + RANGE_SLACK {
            return Err(Error::EmptyConstraint(format!("alpha {alpha} outside the attainable range [{lo}, {hi}]")));
        }
        let q_star = if hi - lo <= RANGE_SLACK { 0.0 } else { self.solve(alpha)? };
        let perron = self.perron(q_star)?;
        let maximizer = perron.gibbs(&self.lift);
        let h_var = (perron.pressure - q_star * alpha).max(0.0);
        if (maximizer.integral - alpha).abs() > 1e-8 {
            return Err(Error::Invariant(format!(
                "maximizer integrates to {} instead of {alpha} (q* = {q_star})",
                maximizer.integral
            )));
        }
        let duality_gap = maximizer.entropy + q_star * alpha - perron.pressure;
        Ok(SpectrumPoint { alpha, h_var, q_star, duality_gap, maximizer, h_count: None, n_count: None, one_sided: false })
    }

    fn solve(&self, alpha: f64) -> Result<f64> {
        let center = self.slope(0.0)?;
        if alpha == center {
            return Ok(0.0);
        }
        let dir = if alpha > center { 1.0 } else { -1.0 };
        let limit = self.q_limit;
        // bracket [a, b] in |q| with the target between the slopes
        let (mut a, mut b) = (0.0, 1.0f64.min(limit));
        loop {
            let s = self.slope(dir * b)?;
            if (s - alpha) * dir >= 0.0 {
                break;
            }
            if b >= limit {
                return Ok(dir * limit);
            }
            a = b;
            b = (2.0 * b).min(limit);
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let s = self.slope(dir * mid)?;
            if (s - alpha).abs() <= 1e-14 {
                return Ok(dir * mid);
            }
            if (s - alpha) * dir < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(dir * 0.5 * (a + b))
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// α at which H peaks: the integral of the measure of maximal entropy.
    pub fn peak(&self) -> Result<f64> {
        self.slope(0.0)
    }
}

/// `H(α)` with its maximizing Gibbs–Markov measure.
pub fn constrained_sup(shift: &ShiftSpace, phi: &LocalObservable, alpha: f64) -> Result<SpectrumPoint> {
    Prepared::new(shift, phi)?.point(alpha)
}

/// Attainable range of `∫φ dμ` over invariant measures.
pub fn attainable_range(shift: &ShiftSpace, phi: &LocalObservable) -> Result<(f64, f64)> {
    Ok(Prepared::new(shift, phi)?.range())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub constraint: Interval,
    pub range: (f64, f64),
    pub points: Vec<SpectrumPoint>,
    /// Exact sup of H over the constraint, found by concavity.
    pub sup: f64,
    pub sup_alpha: f64,
    /// False when the sup is only approached at an open endpoint.
    pub attained: bool,
    /// Largest `h_var` among grid points strictly inside the constraint.
    pub interior_grid_sup: Option<f64>,
}

/// Evaluates H on the grid points lying in the closure of `constraint` and
/// the sup of H over the constraint. Open endpoints are reported as
/// one-sided limits. With `count_n`, each point also carries the level-set
/// counting rate at that word length.
pub fn spectrum(
    shift: &ShiftSpace,
    phi: &LocalObservable,
    constraint: &Interval,
    grid: &[f64],
    count_n: Option<usize>,
) -> Result<SpectrumResult> {
    constraint.validate()?;
    let prep = Prepared::new(shift, phi)?;
    let (lo, hi) = prep.range();

    let left = constraint.lo.max(lo);
    let right = constraint.hi.min(hi);
    let left_open = constraint.lo >= lo && !constraint.lo_closed;
    let right_open = constraint.hi <= hi && !constraint.hi_closed;
    if left > right || (left == right && (left_open || right_open)) {
        return Err(Error::EmptyConstraint(format!(
            "constraint {constraint:?} misses the attainable range [{lo}, {hi}]"
        )));
    }
    let peak = prep.peak()?;
    let sup_alpha = peak.clamp(left, right);
    let attained = !((sup_alpha == left && left_open) || (sup_alpha == right && right_open));
    let sup = prep.point(sup_alpha)?.h_var;

    let mut points = Vec::new();
    let mut interior_grid_sup: Option<f64> = None;
    for &alpha in grid {
        let endpoint = alpha == constraint.lo || alpha == constraint.hi;
        if !(constraint.contains(alpha) || endpoint) {
            continue;
        }
        let mut p = prep.point(alpha)?;
        p.one_sided = !constraint.contains(alpha);
        if !endpoint {
            interior_grid_sup = Some(interior_grid_sup.map_or(p.h_var, |s: f64| s.max(p.h_var)));
        }
        if let Some(n) = count_n {
            p.h_count = levelset_at(shift, phi, alpha, n)?.value();
            p.n_count = Some(n);
        }
        points.push(p);
    }
    Ok(SpectrumResult { constraint: *constraint, range: (lo, hi), points, sup, sup_alpha, attained, interior_grid_sup })
}

/// Binary entropy in nats.
#[cfg(test)]
pub(crate) fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ShiftSpace, LocalObservable) {
        (ShiftSpace::full(2).unwrap(), LocalObservable::frequency(2, 1).unwrap())
    }

    #[test]
    fn symmetric_point_is_maximal_entropy() {
        let (s, phi) = setup();
        let p = constrained_sup(&s, &phi, 0.5).unwrap();
        assert!((p.h_var - 2f64.ln()).abs() < 1e-12);
        assert!(p.q_star.abs() < 1e-9);
        let m = p.maximizer.markov().unwrap();
        assert!((m.transition(0, 1) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn legendre_value_at_three_tenths() {
        let (s, phi) = setup();
        let p = constrained_sup(&s, &phi, 0.3).unwrap();
        assert!((p.h_var - 0.610864302054894).abs() < 1e-9, "{}", p.h_var);
        assert!((p.maximizer.integral - 0.3).abs() < 1e-8);
        let m = p.maximizer.markov().unwrap();
        assert!((m.transition(1, 1) - 0.3).abs() < 1e-8);
        assert!(p.duality_gap.abs() < 1e-8);
        // q* = ln(α/(1−α))
        assert!((p.q_star - (0.3f64 / 0.7).ln()).abs() < 1e-7);
    }

    #[test]
    fn range_endpoints_have_zero_entropy() {
        let (s, phi) = setup();
        assert!(constrained_sup(&s, &phi, 0.0).unwrap().h_var < 1e-12);
        assert!(constrained_sup(&s, &phi, 1.0).unwrap().h_var < 1e-12);
    }

    #[test]
    fn outside_range_is_an_empty_constraint() {
        let (s, phi) = setup();
        assert!(matches!(constrained_sup(&s, &phi, 1.2), Err(Error::EmptyConstraint(_))));
        let g = ShiftSpace::golden_mean();
        assert!(matches!(constrained_sup(&g, &phi, 0.6), Err(Error::EmptyConstraint(_))));
    }

    #[test]
    fn closed_form_along_the_range() {
        let (s, phi) = setup();
        for i in 1..20 {
            let a = i as f64 / 20.0;
            let p = constrained_sup(&s, &phi, a).unwrap();
            assert!((p.h_var - binary_entropy(a)).abs() < 1e-10, "alpha {a}");
        }
    }

    #[test]
    fn golden_mean_peak_is_parry_frequency() {
        let g = ShiftSpace::golden_mean();
        let phi = LocalObservable::frequency(2, 1).unwrap();
        let gold = (1.0 + 5f64.sqrt()) / 2.0;
        // the Parry measure gives symbol 1 frequency 1/(1+φ²)
        let peak = 1.0 / (1.0 + gold * gold);
        let p = constrained_sup(&g, &phi, peak).unwrap();
        assert!((p.h_var - gold.ln()).abs() < 1e-10);
        assert!(constrained_sup(&g, &phi, 0.45).unwrap().h_var < gold.ln());
    }

    #[test]
    fn full_range_sup_is_topological_entropy() {
        let (s, phi) = setup();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let r = spectrum(&s, &phi, &Interval::open(-0.1, 1.1).unwrap(), &grid, None).unwrap();
        assert!((r.sup - 2f64.ln()).abs() < 1e-12);
        assert!(r.attained);
        assert_eq!(r.points.len(), 11);
    }

    #[test]
    fn open_interval_sup_is_an_endpoint_limit() {
        let (s, phi) = setup();
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let r = spectrum(&s, &phi, &Interval::open(0.25, 0.35).unwrap(), &grid, None).unwrap();
        assert!(!r.attained);
        assert_eq!(r.sup_alpha, 0.35);
        assert!((r.sup - binary_entropy(0.35)).abs() < 1e-10);
        let one_sided: Vec<_> = r.points.iter().filter(|p| p.one_sided).map(|p| p.alpha).collect();
        assert_eq!(one_sided, vec![0.25, 0.35]);
        // H increases on [0, 1/2]
        let h: Vec<f64> = r.points.iter().map(|p| p.h_var).collect();
        assert!(h.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn closed_set_sup_matches_interior() {
        let (s, phi) = setup();
        let grid: Vec<f64> = (0..=1000).map(|i| 0.3 + 0.1 * i as f64 / 1000.0).collect();
        let k = spectrum(&s, &phi, &Interval::closed(0.3, 0.4).unwrap(), &grid, None).unwrap();
        let u = spectrum(&s, &phi, &Interval::open(0.3, 0.4).unwrap(), &grid, None).unwrap();
        assert!(k.attained && !u.attained);
        assert!((k.sup - u.sup).abs() < 1e-12);
        assert!((k.sup - u.interior_grid_sup.unwrap()).abs() < 1e-3);
    }

    #[test]
    fn disjoint_constraint_is_rejected() {
        let g = ShiftSpace::golden_mean();
        let phi = LocalObservable::frequency(2, 1).unwrap();
        let r = spectrum(&g, &phi, &Interval::open(0.6, 0.9).unwrap(), &[0.7], None);
        assert!(matches!(r, Err(Error::EmptyConstraint(_))));
        let r = spectrum(&g, &phi, &Interval::open(0.5, 0.9).unwrap(), &[0.7], None);
        assert!(matches!(r, Err(Error::EmptyConstraint(_))));
    }

    #[test]
    fn counting_rates_are_attached() {
        let (s, phi) = setup();
        let r = spectrum(&s, &phi, &Interval::open(0.0, 1.0).unwrap(), &[0.3, 0.5], Some(20)).unwrap();
        for p in &r.points {
            assert_eq!(p.n_count, Some(20));
            let gap = p.gap().unwrap();
            let n = 20.0;
            let bound = (2.0 * std::f64::consts::PI * n * p.alpha * (1.0 - p.alpha)).ln() / (2.0 * n) + 0.02;
            assert!(gap.abs() <= bound, "alpha {}: gap {gap} bound {bound}", p.alpha);
        }
    }
}
