use std::collections::VecDeque;

use rand::Rng;

use super::Word;
use crate::error::{Error, Result};

/// A one-sided subshift of finite type given by a 0/1 transition matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftSpace {
    k: usize,
    allowed: Vec<bool>,
}

impl ShiftSpace {
    pub fn full(k: usize) -> Result<Self> {
        Self::sft(vec![vec![1; k]; k])
    }

    /// Binary shift forbidding the word `11`.
    pub fn golden_mean() -> Self {
        Self::sft(vec![vec![1, 1], vec![1, 0]]).expect("valid matrix")
    }

    pub fn sft(transition: Vec<Vec<u8>>) -> Result<Self> {
        let k = transition.len();
        if !(2..=256).contains(&k) {
            return Err(Error::InvalidSystem(format!("alphabet size {k} outside 2..=256")));
        }
        let mut allowed = Vec::with_capacity(k * k);
        for (i, row) in transition.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidSystem(format!("row {i} has length {}, expected {k}", row.len())));
            }
            for &e in row {
                match e {
                    0 => allowed.push(false),
                    1 => allowed.push(true),
                    _ => return Err(Error::InvalidSystem(format!("transition entry {e} is not 0 or 1"))),
                }
            }
            if !row.contains(&1) {
                return Err(Error::InvalidSystem(format!("symbol {i} has no successor")));
            }
        }
        Ok(ShiftSpace { k, allowed })
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.allowed[a as usize * self.k + b as usize]
    }

    pub fn transition(&self) -> Vec<Vec<u8>> {
        self.allowed
            .chunks(self.k)
            .map(|r| r.iter().map(|&b| b as u8).collect())
            .collect()
    }

    pub fn is_full(&self) -> bool {
        self.allowed.iter().all(|&b| b)
    }

    pub fn successors(&self, a: u8) -> impl Iterator<Item = u8> + '_ {
        (0..self.k as u8).filter(move |&b| self.allows(a, b))
    }

    fn reach(&self, from: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.k];
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for v in 0..self.k {
                let e = if forward { self.allowed[u * self.k + v] } else { self.allowed[v * self.k + u] };
                if e && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn is_irreducible(&self) -> bool {
        self.reach(0, true).iter().all(|&b| b) && self.reach(0, false).iter().all(|&b| b)
    }

    pub fn require_irreducible(&self) -> Result<()> {
        if self.is_irreducible() {
            Ok(())
        } else {
            Err(Error::InvalidSystem("transition matrix is not irreducible".into()))
        }
    }

    pub fn is_admissible(&self, w: &[u8]) -> bool {
        w.iter().all(|&a| (a as usize) < self.k) && w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    /// Whether the infinite sequence `w` lies in the shift.
    pub fn admits(&self, w: &Word) -> bool {
        if (w.max_symbol() as usize) >= self.k {
            return false;
        }
        let (head, cycle, phase) = w.explicit();
        let p = cycle.len();
        let cyc = |i: usize| cycle[(phase + i) % p];
        if !self.is_admissible(head) {
            return false;
        }
        if let Some(&last) = head.last() {
            if !self.allows(last, cyc(0)) {
                return false;
            }
        }
        (0..p).all(|i| self.allows(cyc(i), cyc(i + 1)))
    }

    /// Shortest cycle through `a`, listed starting after `a` and ending at `a`.
    fn return_path(&self, a: u8) -> Option<Vec<u8>> {
        let mut prev = vec![usize::MAX; self.k];
        let mut queue = VecDeque::new();
        for b in self.successors(a) {
            if b == a {
                return Some(vec![a]);
            }
            if prev[b as usize] == usize::MAX {
                prev[b as usize] = a as usize;
                queue.push_back(b as usize);
            }
        }
        while let Some(u) = queue.pop_front() {
            for v in 0..self.k {
                if !self.allowed[u * self.k + v] {
                    continue;
                }
                if v == a as usize {
                    let mut path = vec![a];
                    let mut w = u;
                    while w != a as usize {
                        path.push(w as u8);
                        w = prev[w];
                    }
                    path.reverse();
                    return Some(path);
                }
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Extends a finite admissible word to an infinite one by cycling back
    /// through its last symbol.
    pub fn complete(&self, prefix: &[u8]) -> Result<Word> {
        let last = *prefix
            .last()
            .ok_or_else(|| Error::InvalidArgument("cannot complete an empty word".into()))?;
        if !self.is_admissible(prefix) {
            return Err(Error::InvalidArgument("word is not admissible".into()));
        }
        let cycle = self
            .return_path(last)
            .ok_or_else(|| Error::InvalidSystem(format!("symbol {last} lies on no cycle")))?;
        Ok(Word::new(prefix.to_vec(), cycle))
    }

    /// All admissible words of length `len`, in lexicographic order.
    pub fn words(&self, len: usize) -> Vec<Vec<u8>> {
        let mut out: Vec<Vec<u8>> = if len == 0 { vec![vec![]] } else { (0..self.k as u8).map(|a| vec![a]).collect() };
        for _ in 1..len {
            let mut next = Vec::with_capacity(out.len() * 2);
            for w in &out {
                let last = *w.last().unwrap();
                for b in self.successors(last) {
                    let mut v = w.clone();
                    v.push(b);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// Number of admissible words of length `len`.
    pub fn count_words(&self, len: usize) -> u128 {
        if len == 0 {
            return 1;
        }
        let mut ends = vec![1u128; self.k];
        for _ in 1..len {
            let mut next = vec![0u128; self.k];
            for a in 0..self.k {
                for b in self.successors(a as u8) {
                    next[b as usize] += ends[a];
                }
            }
            ends = next;
        }
        ends.iter().sum()
    }

    /// Uniform first symbol, then uniform admissible successors.
    pub fn random_word<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<u8> {
        let mut w = Vec::with_capacity(len);
        if len == 0 {
            return w;
        }
        w.push(rng.random_range(0..self.k) as u8);
        self.extend_random(&mut w, len - 1, rng);
        w
    }

    pub fn extend_random<R: Rng + ?Sized>(&self, w: &mut Vec<u8>, extra: usize, rng: &mut R) {
        for _ in 0..extra {
            let last = *w.last().expect("nonempty word");
            let succ: Vec<u8> = self.successors(last).collect();
            w.push(succ[rng.random_range(0..succ.len())]);
        }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Word {
        let w = self.random_word(len.max(1), rng);
        self.complete(&w).expect("random words are admissible")
    }
}
