use serde::Serialize;

use super::lift::Lift;
use crate::error::{Error, Result};
use crate::measures::{LocalObservable, MarkovMeasure};
use crate::systems::ShiftSpace;

/// Relative tolerance of the eigenvalue iteration.
pub const PRESSURE_TOLERANCE: f64 = 1e-12;

const MAX_ITERATIONS: usize = 200_000;

/// Largest |q|·(max φ − min φ) used; beyond this the weights lose all
/// precision and the pressure is linear in q to within e^-200.
pub(crate) const EXPONENT_LIMIT: f64 = 200.0;

/// Perron data of the weighted lift at one value of q.
#[derive(Debug, Clone)]
pub(crate) struct Perron {
    pub q: f64,
    pub pressure: f64,
    /// log of the shifted eigenvalue; `pressure = ln_lambda + q·shift`.
    ln_lambda: f64,
    weights: Vec<f64>,
    right: Vec<f64>,
    left: Vec<f64>,
}

impl Perron {
    pub fn compute(lift: &Lift, q: f64, range: (f64, f64)) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::InvalidArgument(format!("q must be finite, got {q}")));
        }
        // shifting by the extreme cycle mean keeps the eigenvalue in [1, k]
        let shift = if q >= 0.0 { range.1 } else { range.0 };
        let weights: Vec<f64> = lift.edges.iter().map(|e| (q * (e.value - shift)).exp()).collect();
        let right = iterate(lift.len(), |v, out| {
            for (e, w) in lift.edges.iter().zip(&weights) {
                out[e.from] += w * v[e.to];
            }
        })?;
        let left = iterate(lift.len(), |v, out| {
            for (e, w) in lift.edges.iter().zip(&weights) {
                out[e.to] += w * v[e.from];
            }
        })?;
        let mut bv = vec![0.0; lift.len()];
        for (e, w) in lift.edges.iter().zip(&weights) {
            bv[e.from] += w * right[e.to];
        }
        let lambda = bv.iter().sum::<f64>() / right.iter().sum::<f64>();
        let ln_lambda = lambda.ln();
        Ok(Perron { q, pressure: ln_lambda + q * shift, ln_lambda, weights, right, left })
    }

    fn lambda(&self) -> f64 {
        self.ln_lambda.exp()
    }

    /// Edge probabilities of the Gibbs chain `B_uv r_v / (λ r_u)`.
    fn edge_probabilities(&self, lift: &Lift) -> Vec<f64> {
        let lambda = self.lambda();
        lift.edges
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| {
                let r = self.right[e.from];
                if r > 0.0 { w * self.right[e.to] / (lambda * r) } else { 0.0 }
            })
            .collect()
    }

    fn stationary(&self) -> Vec<f64> {
        let mut pi: Vec<f64> = self.left.iter().zip(&self.right).map(|(l, r)| l * r).collect();
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= total);
        pi
    }

    /// `P'(q)`, the integral of φ against the Gibbs measure.
    pub fn derivative(&self, lift: &Lift) -> f64 {
        let pi = self.stationary();
        let p = self.edge_probabilities(lift);
        lift.edges.iter().zip(&p).map(|(e, pe)| pi[e.from] * pe * e.value).sum()
    }

    pub fn gibbs(&self, lift: &Lift) -> GibbsMeasure {
        let stationary = self.stationary();
        let probs = self.edge_probabilities(lift);
        let n = lift.len();
        let mut transition = vec![vec![0.0; n]; n];
        let mut integral = 0.0;
        let mut entropy = 0.0;
        for ((e, &pe), _) in lift.edges.iter().zip(&probs).zip(0..) {
            transition[e.from][e.to] += pe;
            integral += stationary[e.from] * pe * e.value;
            if pe > 0.0 {
                entropy -= stationary[e.from] * pe * pe.ln();
            }
        }
        GibbsMeasure {
            q: self.q,
            pressure: self.pressure,
            states: lift.states.clone(),
            transition,
            stationary,
            integral,
            entropy: entropy.max(0.0),
        }
    }
}

/// Normalized power iteration on `B + I`, which shares the Perron vector
/// of `B` and is aperiodic whenever `B` is irreducible.
fn iterate(n: usize, apply: impl Fn(&[f64], &mut [f64])) -> Result<Vec<f64>> {
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_ITERATIONS {
        next.copy_from_slice(&v);
        apply(&v, &mut next);
        // Collatz–Wielandt bounds bracket the eigenvalue of B + I
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (a, b) in next.iter().zip(&v) {
            if *b > 1e-280 {
                lo = lo.min(a / b);
                hi = hi.max(a / b);
            }
        }
        let total: f64 = next.iter().sum();
        let mut change = 0.0;
        for (a, b) in next.iter().zip(v.iter_mut()) {
            let x = a / total;
            change += (x - *b).abs();
            *b = x;
        }
        if hi - lo <= 0.1 * PRESSURE_TOLERANCE * hi && change <= 1e-15 {
            return Ok(v);
        }
    }
    Err(Error::Invariant(format!("power iteration did not converge in {MAX_ITERATIONS} steps")))
}

/// Topological pressure of `q·φ`: the log spectral radius of the lifted
/// transfer matrix with entries `exp(q·φ(word))`.
pub fn pressure(shift: &ShiftSpace, phi: &LocalObservable, q: f64) -> Result<f64> {
    let lift = Lift::new(shift, phi)?;
    lift.require_irreducible()?;
    Ok(Perron::compute(&lift, q, lift.mean_range())?.pressure)
}

/// The equilibrium state of `q·φ`, a Markov chain on the lifted words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsMeasure {
    pub q: f64,
    pub pressure: f64,
    /// Lifted states; symbols of the chain are indices into this list.
    pub states: Vec<Vec<u8>>,
    pub transition: Vec<Vec<f64>>,
    pub stationary: Vec<f64>,
    /// `∫φ` under the measure.
    pub integral: f64,
    pub entropy: f64,
}

impl GibbsMeasure {
    /// The chain as a `MarkovMeasure`. When the lift has length-one states
    /// this is a measure on the original alphabet; otherwise its symbols are
    /// lifted-state indices.
    pub fn markov(&self) -> Result<MarkovMeasure> {
        if self.states.len() > 256 {
            return Err(Error::InvalidArgument(format!("{} lifted states do not fit a byte alphabet", self.states.len())));
        }
        if self.states.iter().all(|s| s.len() == 1) {
            let k = self.states.iter().map(|s| s[0] as usize + 1).max().unwrap_or(0);
            let mut p = vec![vec![0.0; k]; k];
            let mut pi = vec![0.0; k];
            for (i, s) in self.states.iter().enumerate() {
                pi[s[0] as usize] = self.stationary[i];
                for (j, t) in self.states.iter().enumerate() {
                    p[s[0] as usize][t[0] as usize] = self.transition[i][j];
                }
            }
            for (a, row) in p.iter_mut().enumerate() {
                if row.iter().sum::<f64>() == 0.0 {
                    row[a] = 1.0;
                }
            }
            return MarkovMeasure::new(p, pi);
        }
        MarkovMeasure::new(self.transition.clone(), self.stationary.clone())
    }

    pub fn lifted(&self) -> bool {
        self.states.iter().any(|s| s.len() > 1)
    }
}

/// Pressure sampled on a grid of q with derivatives from the eigen-data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureCurve {
    pub observable: LocalObservable,
    pub samples: Vec<(f64, f64)>,
    pub derivatives: Vec<f64>,
}

impl PressureCurve {
    /// Smallest second difference on the (possibly uneven) grid, scaled to
    /// a second-derivative estimate. Nonnegative up to rounding for convex P.
    pub fn min_second_difference(&self) -> f64 {
        self.samples
            .windows(3)
            .map(|w| {
                let ((a, pa), (b, pb), (c, pc)) = (w[0], w[1], w[2]);
                (pc - pb) / (c - b) - (pb - pa) / (b - a)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_convex(&self) -> bool {
        self.samples.len() < 3 || self.min_second_difference() >= -1e-9
    }
}

pub fn pressure_curve(shift: &ShiftSpace, phi: &LocalObservable, qs: &[f64]) -> Result<PressureCurve> {
    if qs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("q grid must be strictly increasing".into()));
    }
    let lift = Lift::new(shift, phi)?;
    lift.require_irreducible()?;
    let range = lift.mean_range();
    let mut samples = Vec::with_capacity(qs.len());
    let mut derivatives = Vec::with_capacity(qs.len());
    for &q in qs {
        let p = Perron::compute(&lift, q, range)?;
        samples.push((q, p.pressure));
        derivatives.push(p.derivative(&lift));
    }
    Ok(PressureCurve { observable: phi.clone(), samples, derivatives })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freq() -> LocalObservable {
        LocalObservable::frequency(2, 1).unwrap()
    }

    #[test]
    fn zero_weight_gives_topological_entropy() {
        let s = ShiftSpace::full(2).unwrap();
        assert!((pressure(&s, &freq(), 0.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        let g = ShiftSpace::golden_mean();
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((pressure(&g, &freq(), 0.0).unwrap() - golden).abs() < 1e-12);
    }

    #[test]
    fn frequency_pressure_closed_form() {
        let s = ShiftSpace::full(2).unwrap();
        for q in [-30.0, -3.0, -0.5, 0.25, 1.0, 7.0, 40.0] {
            let exact = (1.0 + f64::exp(q)).ln();
            let got = pressure(&s, &freq(), q).unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "q={q}: {got} vs {exact}");
        }
    }

    #[test]
    fn pressure_vanishes_as_q_goes_to_minus_infinity() {
        let s = ShiftSpace::full(2).unwrap();
        assert!(pressure(&s, &freq(), -60.0).unwrap() < 1e-20);
    }

    #[test]
    fn depth_two_observable_matches_pair_counting() {
        // φ = 1 on the word 11; on the full 2-shift the pressure is the log
        // of the top eigenvalue of [[1,1],[1,e^q]]
        let s = ShiftSpace::full(2).unwrap();
        let phi = LocalObservable::new(2, 2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        for q in [-2.0, 0.5, 3.0] {
            let t = 1.0 + f64::exp(q);
            let det = f64::exp(q) - 1.0;
            let top = (t + (t * t - 4.0 * det).sqrt()) / 2.0;
            assert!((pressure(&s, &phi, q).unwrap() - top.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn gibbs_measure_is_bernoulli_for_frequency() {
        let s = ShiftSpace::full(2).unwrap();
        let lift = Lift::new(&s, &freq()).unwrap();
        let q = 0.3f64;
        let g = Perron::compute(&lift, q, lift.mean_range()).unwrap().gibbs(&lift);
        let p = q.exp() / (1.0 + q.exp());
        assert!((g.integral - p).abs() < 1e-12);
        let m = g.markov().unwrap();
        assert!((m.transition(0, 1) - p).abs() < 1e-12);
        assert!((m.transition(1, 1) - p).abs() < 1e-12);
        // variational equality P = h + q∫φ
        assert!((g.entropy + q * g.integral - g.pressure).abs() < 1e-12);
    }

    #[test]
    fn curve_is_convex_with_matching_derivatives() {
        let s = ShiftSpace::full(2).unwrap();
        let qs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        let c = pressure_curve(&s, &freq(), &qs).unwrap();
        assert!(c.is_convex());
        for ((q, _), d) in c.samples.iter().zip(&c.derivatives) {
            let exact = q.exp() / (1.0 + q.exp());
            assert!((d - exact).abs() < 1e-12);
        }
    }
}
