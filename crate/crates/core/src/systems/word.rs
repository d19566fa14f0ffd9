use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_integer::Integer;

/// An eventually periodic symbol sequence: an explicit head followed by a
/// repeating cycle. Shifting is O(1); the backing storage is shared.
#[derive(Clone)]
pub struct Word {
    head: Arc<[u8]>,
    start: usize,
    cycle: Arc<[u8]>,
    phase: usize,
}

impl Word {
    /// # Panics
    /// If `cycle` is empty.
    pub fn new(head: Vec<u8>, cycle: Vec<u8>) -> Self {
        assert!(!cycle.is_empty(), "a word needs a nonempty repeating tail");
        Word { head: head.into(), start: 0, cycle: cycle.into(), phase: 0 }
    }

    /// `block` repeated forever.
    pub fn periodic(block: &[u8]) -> Self {
        Word::new(Vec::new(), block.to_vec())
    }

    /// `prefix` followed by `fill` forever.
    pub fn filled(prefix: &[u8], fill: u8) -> Self {
        Word::new(prefix.to_vec(), vec![fill])
    }

    /// `prefix` followed by the whole of `tail`.
    pub fn with_prefix(prefix: Vec<u8>, tail: &Word) -> Self {
        let mut head = prefix;
        head.extend_from_slice(&tail.head[tail.start..]);
        Word::new(head, tail.rotated_cycle())
    }

    /// Length of the explicit part still ahead of the cycle.
    pub fn head_len(&self) -> usize {
        self.head.len() - self.start
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    pub fn symbol(&self, i: usize) -> u8 {
        let rem = self.head_len();
        if i < rem {
            self.head[self.start + i]
        } else {
            self.cycle[(self.phase + (i - rem)) % self.cycle.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.symbol(i)).collect()
    }

    pub fn shifted(&self, n: usize) -> Word {
        let rem = self.head_len();
        let mut w = self.clone();
        if n <= rem {
            w.start += n;
        } else {
            w.start = self.head.len();
            w.phase = (self.phase + (n - rem)) % self.cycle.len();
        }
        w
    }

    /// Index of the first differing coordinate below `limit`, if any.
    pub fn first_disagreement(&self, other: &Word, limit: usize) -> Option<usize> {
        if self.same_position(other) {
            return None;
        }
        // past both heads the pair repeats with period lcm(p, q)
        let span = self
            .head_len()
            .max(other.head_len())
            .saturating_add(self.period().lcm(&other.period()));
        (0..limit.min(span)).find(|&i| self.symbol(i) != other.symbol(i))
    }

    /// Same storage read from the same offset.
    fn same_position(&self, other: &Word) -> bool {
        Arc::ptr_eq(&self.head, &other.head)
            && Arc::ptr_eq(&self.cycle, &other.cycle)
            && self.start == other.start
            && self.phase == other.phase
    }

    pub fn max_symbol(&self) -> u8 {
        let h = self.head[self.start..].iter().copied().max().unwrap_or(0);
        let c = self.cycle.iter().copied().max().unwrap_or(0);
        h.max(c)
    }

    fn rotated_cycle(&self) -> Vec<u8> {
        let p = self.cycle.len();
        (0..p).map(|i| self.cycle[(self.phase + i) % p]).collect()
    }

    /// Unique `(head, cycle)` pair describing the same sequence: primitive
    /// cycle, shortest head.
    pub fn canonical(&self) -> (Vec<u8>, Vec<u8>) {
        let mut head = self.head[self.start..].to_vec();
        let mut cycle = self.rotated_cycle();
        let p = cycle.len();
        if let Some(d) = (1..=p).find(|d| p.is_multiple_of(*d) && (0..p).all(|i| cycle[i] == cycle[i % d])) {
            cycle.truncate(d);
        }
        while head.last().is_some_and(|&a| a == *cycle.last().unwrap()) {
            head.pop();
            cycle.rotate_right(1);
        }
        (head, cycle)
    }

    pub(crate) fn explicit(&self) -> (&[u8], &[u8], usize) {
        (&self.head[self.start..], &self.cycle, self.phase)
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state);
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (h, c) = self.canonical();
        let digits = |s: &[u8]| s.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
        if h.len() > 64 {
            write!(f, "[{}..+{}]({})^", digits(&h[..64]), h.len() - 64, digits(&c))
        } else {
            write!(f, "[{}]({})^", digits(&h), digits(&c))
        }
    }
}
