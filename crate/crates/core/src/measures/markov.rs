use rand::Rng;
use serde::{Deserialize, Serialize};

use super::observable::{LocalObservable, Observable};
use crate::error::{Error, Result};
use crate::systems::ShiftSpace;

/// Largest number of words enumerated when integrating a local observable.
pub const MAX_LOCAL_WORDS: usize = 1 << 22;

/// A stationary Markov chain on symbols `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    k: usize,
    p: Vec<f64>,
    pi: Vec<f64>,
}

impl MarkovMeasure {
    pub fn new(p: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        let k = p.len();
        let flat = flatten(&p)?;
        check_stochastic(&flat, k)?;
        if pi.len() != k {
            return Err(Error::InvalidMeasure(format!("stationary vector has length {}, expected {k}", pi.len())));
        }
        if pi.iter().any(|&x| !(x >= 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure("stationary vector must be a probability vector".into()));
        }
        let m = MarkovMeasure { k, p: flat, pi };
        m.check_stationary()?;
        Ok(m)
    }

    /// Solves for the stationary vector; fails if it is not unique.
    pub fn from_stochastic(p: Vec<Vec<f64>>) -> Result<Self> {
        let k = p.len();
        let flat = flatten(&p)?;
        check_stochastic(&flat, k)?;
        let pi = stationary(&flat, k)?;
        let m = MarkovMeasure { k, p: flat, pi };
        m.check_stationary()?;
        Ok(m)
    }

    /// I.i.d. symbols with the given marginal.
    pub fn bernoulli(probs: &[f64]) -> Result<Self> {
        let rows = vec![probs.to_vec(); probs.len()];
        Self::new(rows, probs.to_vec())
    }

    /// Binary i.i.d. measure giving symbol 1 probability `p`.
    pub fn bernoulli2(p: f64) -> Result<Self> {
        Self::bernoulli(&[1.0 - p, p])
    }

    /// The rotation 0 → 1 → … → k−1 → 0 with uniform weight.
    pub fn cycle(k: usize) -> Result<Self> {
        let p = (0..k).map(|i| (0..k).map(|j| if j == (i + 1) % k { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(p, vec![1.0 / k as f64; k])
    }

    /// Dirac mass on the constant sequence `symbol`.
    pub fn point_mass(k: usize, symbol: u8) -> Result<Self> {
        let s = symbol as usize;
        if s >= k {
            return Err(Error::InvalidMeasure(format!("symbol {symbol} outside alphabet {k}")));
        }
        let p = (0..k).map(|_| (0..k).map(|j| if j == s { 1.0 } else { 0.0 }).collect()).collect();
        let pi = (0..k).map(|j| if j == s { 1.0 } else { 0.0 }).collect();
        Self::new(p, pi)
    }

    fn check_stationary(&self) -> Result<()> {
        for j in 0..self.k {
            let v: f64 = (0..self.k).map(|i| self.pi[i] * self.p[i * self.k + j]).sum();
            if (v - self.pi[j]).abs() > 1e-10 {
                return Err(Error::InvalidMeasure(format!("pi is not stationary at symbol {j}: {v} vs {}", self.pi[j])));
            }
        }
        Ok(())
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn stochastic(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    /// Entropy rate in nats.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for i in 0..self.k {
            for j in 0..self.k {
                let q = self.transition(i, j);
                if q > 0.0 {
                    h -= self.pi[i] * q * q.ln();
                }
            }
        }
        h.max(0.0)
    }

    pub fn cylinder_mass(&self, w: &[u8]) -> f64 {
        let Some(&first) = w.first() else { return 1.0 };
        if w.iter().any(|&a| a as usize >= self.k) {
            return 0.0;
        }
        let mut m = self.pi[first as usize];
        for pair in w.windows(2) {
            m *= self.transition(pair[0] as usize, pair[1] as usize);
        }
        m
    }

    /// Every transition the measure can use is allowed by `shift`.
    pub fn is_supported_on(&self, shift: &ShiftSpace) -> bool {
        if shift.alphabet_size() != self.k {
            return false;
        }
        let live = self.live_symbols();
        (0..self.k).all(|i| !live[i] || (0..self.k).all(|j| self.transition(i, j) == 0.0 || shift.allows(i as u8, j as u8)))
    }

    pub fn require_supported_on(&self, shift: &ShiftSpace) -> Result<()> {
        if self.is_supported_on(shift) {
            Ok(())
        } else {
            Err(Error::InvalidMeasure("measure charges transitions the shift forbids".into()))
        }
    }

    /// Symbols of positive stationary weight.
    fn live_symbols(&self) -> Vec<bool> {
        self.pi.iter().map(|&x| x > 0.0).collect()
    }

    /// Splits the measure along the closed classes of its support.
    pub fn ergodic_components(&self) -> Vec<(f64, MarkovMeasure)> {
        let live = self.live_symbols();
        let mut class = vec![usize::MAX; self.k];
        let mut out = Vec::new();
        for s in 0..self.k {
            if !live[s] || class[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            class[s] = id;
            let mut members = vec![s];
            while let Some(u) = stack.pop() {
                for v in 0..self.k {
                    if self.transition(u, v) > 0.0 && live[v] && class[v] == usize::MAX {
                        class[v] = id;
                        members.push(v);
                        stack.push(v);
                    }
                }
            }
            let mass: f64 = members.iter().map(|&i| self.pi[i]).sum();
            let pi = (0..self.k).map(|i| if class[i] == id { self.pi[i] / mass } else { 0.0 }).collect();
            out.push((mass, MarkovMeasure { k: self.k, p: self.p.clone(), pi }));
        }
        out
    }

    pub fn is_ergodic(&self) -> bool {
        self.ergodic_components().len() == 1
    }

    pub fn integrate(&self, obs: &Observable) -> Result<f64> {
        match obs {
            Observable::Constant(c) => Ok(*c),
            Observable::Cylinder(w) => Ok(self.cylinder_mass(w)),
            Observable::Local(phi) => self.integrate_local(phi),
            Observable::Hat { .. } => Err(Error::KindMismatch("Markov measures live on shifts")),
        }
    }

    pub fn integrate_local(&self, phi: &LocalObservable) -> Result<f64> {
        if phi.alphabet() != self.k {
            return Err(Error::KindMismatch("observable alphabet differs from the measure's"));
        }
        let words = self.k.checked_pow(phi.depth() as u32).filter(|&n| n <= MAX_LOCAL_WORDS);
        if words.is_none() {
            return Err(Error::InvalidArgument(format!("observable depth {} exceeds supported depth", phi.depth())));
        }
        // forward pass over prefixes, carrying the mass of each word
        let mut layer: Vec<(usize, u8, f64)> = (0..self.k).filter(|&a| self.pi[a] > 0.0).map(|a| (a, a as u8, self.pi[a])).collect();
        for _ in 1..phi.depth() {
            let mut next = Vec::with_capacity(layer.len() * self.k);
            for &(code, last, m) in &layer {
                for b in 0..self.k {
                    let q = self.transition(last as usize, b);
                    if q > 0.0 {
                        next.push((code * self.k + b, b as u8, m * q));
                    }
                }
            }
            layer = next;
        }
        Ok(layer.iter().map(|&(code, _, m)| m * phi.values()[code]).sum())
    }

    pub fn sampler(&self) -> MarkovSampler {
        let cum = |row: &[f64]| {
            let mut acc = 0.0;
            row.iter().map(|&x| { acc += x; acc }).collect::<Vec<f64>>()
        };
        MarkovSampler {
            start: cum(&self.pi),
            rows: self.p.chunks(self.k).map(cum).collect(),
        }
    }
}

/// Draws words from a Markov measure by inverse-CDF lookup.
#[derive(Debug, Clone)]
pub struct MarkovSampler {
    start: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl MarkovSampler {
    fn pick<R: Rng + ?Sized>(cum: &[f64], rng: &mut R) -> u8 {
        let u = rng.random::<f64>() * cum[cum.len() - 1];
        let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        // skip zero-probability symbols that share the boundary
        let i = (i..cum.len()).find(|&j| j == 0 || cum[j] > cum[j - 1]).unwrap_or(i);
        i as u8
    }

    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<u8> {
        let mut w = Vec::with_capacity(len);
        if len == 0 {
            return w;
        }
        let mut a = Self::pick(&self.start, rng);
        w.push(a);
        for _ in 1..len {
            a = Self::pick(&self.rows[a as usize], rng);
            w.push(a);
        }
        w
    }
}

fn flatten(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = p.len();
    if k == 0 {
        return Err(Error::InvalidMeasure("empty transition matrix".into()));
    }
    if p.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidMeasure("transition matrix must be square".into()));
    }
    Ok(p.iter().flatten().copied().collect())
}

fn check_stochastic(p: &[f64], k: usize) -> Result<()> {
    for (i, row) in p.chunks(k).enumerate() {
        if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidMeasure(format!("row {i} has a negative or non-finite entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("row {i} sums to {s}")));
        }
    }
    Ok(())
}

/// Solves πP = π, Σπ = 1 by Gaussian elimination with partial pivoting.
fn stationary(p: &[f64], k: usize) -> Result<Vec<f64>> {
    // rows 0..k-1: (P^T - I) π = 0; last row replaced by Σπ = 1
    let mut a = vec![0.0; k * (k + 1)];
    for r in 0..k {
        for c in 0..k {
            a[r * (k + 1) + c] = p[c * k + r] - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..k {
        a[(k - 1) * (k + 1) + c] = 1.0;
    }
    a[(k - 1) * (k + 1) + k] = 1.0;
    let w = k + 1;
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&x, &y| a[x * w + col].abs().total_cmp(&a[y * w + col].abs()))
            .unwrap();
        if a[piv * w + col].abs() < 1e-13 {
            return Err(Error::InvalidMeasure("stationary vector is not unique".into()));
        }
        for c in 0..w {
            a.swap(col * w + c, piv * w + c);
        }
        for r in 0..k {
            if r != col {
                let f = a[r * w + col] / a[col * w + col];
                if f != 0.0 {
                    for c in col..w {
                        a[r * w + c] -= f * a[col * w + c];
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..k).map(|r| (a[r * w + k] / a[r * w + r]).max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    Ok(pi)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MarkovRepr {
    Full {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        #[serde(default)]
        pi: Option<Vec<f64>>,
    },
    Bernoulli { bernoulli: Vec<f64> },
}

impl Serialize for MarkovMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MarkovRepr::Full { p: self.stochastic(), pi: Some(self.pi.clone()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MarkovMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = match MarkovRepr::deserialize(d)? {
            MarkovRepr::Full { p, pi: Some(pi) } => MarkovMeasure::new(p, pi),
            MarkovRepr::Full { p, pi: None } => MarkovMeasure::from_stochastic(p),
            MarkovRepr::Bernoulli { bernoulli } => MarkovMeasure::bernoulli(&bernoulli),
        };
        m.map_err(D::Error::custom)
    }
}
