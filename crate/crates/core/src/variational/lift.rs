use crate::error::{Error, Result};
use crate::measures::LocalObservable;
use crate::systems::ShiftSpace;

/// Largest number of lifted states the transfer operator will handle.
pub const MAX_LIFT_STATES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Edge {
    pub from: usize,
    pub to: usize,
    /// Observable value on the word the edge spells.
    pub value: f64,
}

/// The shift recoded on admissible words of length `max(d−1, 1)`, so that
/// a depth-`d` observable becomes a function of edges.
#[derive(Debug, Clone)]
pub(crate) struct Lift {
    pub states: Vec<Vec<u8>>,
    pub edges: Vec<Edge>,
    pub outgoing: Vec<Vec<usize>>,
    pub incoming: Vec<Vec<usize>>,
}

impl Lift {
    pub fn new(shift: &ShiftSpace, phi: &LocalObservable) -> Result<Self> {
        if phi.alphabet() != shift.alphabet_size() {
            return Err(Error::InvalidArgument(format!(
                "observable alphabet {} does not match the shift's {}",
                phi.alphabet(),
                shift.alphabet_size()
            )));
        }
        let d = phi.depth();
        let len = d.saturating_sub(1).max(1);
        let count = shift.count_words(len);
        if count > MAX_LIFT_STATES as u128 {
            return Err(Error::InvalidArgument(format!("{count} lifted states exceed {MAX_LIFT_STATES}")));
        }
        let states = shift.words(len);
        let index = |w: &[u8]| states.binary_search_by(|s| s.as_slice().cmp(w)).ok();
        let mut edges = Vec::new();
        let mut outgoing = vec![Vec::new(); states.len()];
        let mut incoming = vec![Vec::new(); states.len()];
        for (u, w) in states.iter().enumerate() {
            for b in shift.successors(w[len - 1]) {
                let mut spelled = w.clone();
                spelled.push(b);
                let v = index(&spelled[1..]).expect("suffix of an admissible word is admissible");
                outgoing[u].push(edges.len());
                incoming[v].push(edges.len());
                edges.push(Edge { from: u, to: v, value: phi.value(&spelled[..d]) });
            }
        }
        Ok(Lift { states, edges, outgoing, incoming })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn require_irreducible(&self) -> Result<()> {
        let reach = |adj: &dyn Fn(usize) -> Vec<usize>| {
            let mut seen = vec![false; self.len()];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in adj(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        let fwd = |u: usize| self.outgoing[u].iter().map(|&e| self.edges[e].to).collect();
        let bwd = |u: usize| self.incoming[u].iter().map(|&e| self.edges[e].from).collect();
        if reach(&fwd) && reach(&bwd) {
            Ok(())
        } else {
            Err(Error::InvalidSystem("lifted transition graph is reducible".into()))
        }
    }

    /// Smallest and largest mean edge value over cycles, which bound the
    /// averages attainable by invariant measures (Karp).
    pub fn mean_range(&self) -> (f64, f64) {
        (self.min_mean_cycle(1.0), -self.min_mean_cycle(-1.0))
    }

    fn min_mean_cycle(&self, sign: f64) -> f64 {
        let n = self.len();
        // dist[k][v]: least weight of a k-edge walk ending at v, from any start
        let mut dist = vec![vec![f64::INFINITY; n]; n + 1];
        dist[0].iter_mut().for_each(|x| *x = 0.0);
        for k in 1..=n {
            let (prev, cur) = dist.split_at_mut(k);
            let (prev, cur) = (&prev[k - 1], &mut cur[0]);
            for e in &self.edges {
                let w = prev[e.from] + sign * e.value;
                if w < cur[e.to] {
                    cur[e.to] = w;
                }
            }
        }
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !dist[n][v].is_finite() {
                continue;
            }
            let worst = (0..n)
                .filter(|&k| dist[k][v].is_finite())
                .map(|k| (dist[n][v] - dist[k][v]) / (n - k) as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            best = best.min(worst);
        }
        best
    }
}
