use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub(crate) fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// A continuous piecewise-linear map given by its values at knots.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    knots: Vec<f64>,
    values: Vec<f64>,
    exact_knots: Vec<BigRational>,
    exact_values: Vec<BigRational>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidSystem(format!(
                "need at least two knots and one value per knot, got {} and {}",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSystem("knots and values must be finite".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSystem("knots must be strictly increasing".into()));
        }
        let (lo, hi) = (knots[0], knots[knots.len() - 1]);
        if values.iter().any(|&v| v < lo || v > hi) {
            return Err(Error::InvalidSystem(format!("values leave the domain [{lo}, {hi}]")));
        }
        let exact_knots = knots.iter().map(|&x| rational(x)).collect();
        let exact_values = values.iter().map(|&x| rational(x)).collect();
        Ok(PiecewiseLinear { knots, values, exact_knots, exact_values })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn pieces(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn in_domain(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    /// Piece containing `x`; a point on a knot belongs to the left piece.
    pub fn branch(&self, x: f64) -> usize {
        let i = self.knots[1..].partition_point(|&b| b < x);
        i.min(self.pieces() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.branch(x);
        let (b0, b1) = (self.knots[i], self.knots[i + 1]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        if x == b0 {
            return v0;
        }
        if x == b1 {
            return v1;
        }
        v0 + (v1 - v0) * ((x - b0) / (b1 - b0))
    }

    pub fn in_domain_exact(&self, x: &BigRational) -> bool {
        x >= &self.exact_knots[0] && x <= self.exact_knots.last().unwrap()
    }

    pub fn branch_exact(&self, x: &BigRational) -> usize {
        let i = self.exact_knots[1..].partition_point(|b| b < x);
        i.min(self.pieces() - 1)
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        let i = self.branch_exact(x);
        let (b0, b1, v0, v1) = self.piece_exact(i);
        v0 + (v1 - v0) * (x - b0) / (b1 - b0)
    }

    pub(crate) fn piece_exact(&self, i: usize) -> (&BigRational, &BigRational, &BigRational, &BigRational) {
        (&self.exact_knots[i], &self.exact_knots[i + 1], &self.exact_values[i], &self.exact_values[i + 1])
    }

    pub(crate) fn domain_exact(&self) -> (&BigRational, &BigRational) {
        (&self.exact_knots[0], self.exact_knots.last().unwrap())
    }

    /// Fixed points of the map that are not knots at the domain ends, found
    /// piece by piece in exact arithmetic. Returns a witness if any exist.
    fn interior_fixed_point(&self) -> Option<BigRational> {
        let (lo, hi) = self.domain_exact();
        let interior = |x: &BigRational| x > lo && x < hi;
        for i in 0..self.pieces() {
            let (b0, b1, v0, v1) = self.piece_exact(i);
            let g0 = v0 - b0;
            let g1 = v1 - b1;
            if g0.is_zero() && interior(b0) {
                return Some(b0.clone());
            }
            if g1.is_zero() && interior(b1) {
                return Some(b1.clone());
            }
            if g0.is_zero() && g1.is_zero() {
                // whole piece fixed; its midpoint is interior
                return Some((b0 + b1) / BigRational::from_integer(BigInt::from(2)));
            }
            if g0.is_negative() != g1.is_negative() && !g0.is_zero() && !g1.is_zero() {
                // g is linear, so the root is strictly inside the piece
                let t = &g0 / (&g0 - &g1);
                return Some(b0 + (b1 - b0) * t);
            }
        }
        None
    }
}

/// The tent map x ↦ s·x on [0,1], s·(2−x) on [1,2].
#[derive(Debug, Clone)]
pub struct TentMap {
    s: f64,
    pl: PiecewiseLinear,
}

impl TentMap {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 1.0 && s <= 2.0) {
            return Err(Error::InvalidSystem(format!("tent slope {s} outside (1, 2]")));
        }
        let pl = PiecewiseLinear::new(vec![0.0, 1.0, 2.0], vec![0.0, s, 0.0])?;
        Ok(TentMap { s, pl })
    }

    pub fn slope(&self) -> f64 {
        self.s
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 1.0 {
            self.s * x
        } else {
            self.s * (2.0 - x)
        }
    }

    pub fn piecewise(&self) -> &PiecewiseLinear {
        &self.pl
    }

    /// Branch indices along the orbit of `x`; the kink goes left.
    pub fn itinerary(&self, x: f64, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        let mut y = x;
        for _ in 0..n {
            out.push(if y <= 1.0 { 0 } else { 1 });
            y = self.eval(y);
        }
        out
    }
}

/// A piecewise-linear self-map of [0,1] whose fixed points all lie in {0, 1}.
#[derive(Debug, Clone)]
pub struct EndpointFixedMap {
    pl: PiecewiseLinear,
}

impl EndpointFixedMap {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) || breakpoints.last() != Some(&1.0) {
            return Err(Error::InvalidSystem("breakpoints must start at 0 and end at 1".into()));
        }
        let pl = PiecewiseLinear::new(breakpoints, values)?;
        if let Some(p) = pl.interior_fixed_point() {
            return Err(Error::InvalidSystem(format!(
                "map has an interior fixed point near {}",
                num_traits::ToPrimitive::to_f64(&p).unwrap_or(f64::NAN)
            )));
        }
        Ok(EndpointFixedMap { pl })
    }

    pub fn piecewise(&self) -> &PiecewiseLinear {
        &self.pl
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pl.eval(x)
    }
}
