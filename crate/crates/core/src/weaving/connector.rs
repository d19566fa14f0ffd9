use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::systems::ShiftSpace;

/// A shortest transition between two partition cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Connector {
    /// Number of steps, at least one.
    pub s: usize,
    /// The source cell followed by the `s` steering symbols; its last
    /// `r` symbols spell the target cell.
    pub word: Vec<u8>,
}

impl Connector {
    /// Symbols the connector contributes to a woven word.
    pub fn symbols(&self) -> &[u8] {
        &self.word[..self.s]
    }
}

/// Lexicographically smallest among the shortest admissible paths of
/// positive length from cylinder `from` to cylinder `to`.
pub fn connector(shift: &ShiftSpace, from: &[u8], to: &[u8]) -> Result<Connector> {
    let r = from.len();
    if r == 0 || to.len() != r {
        return Err(Error::InvalidArgument("cells must be nonempty and of equal length".into()));
    }
    if !shift.is_admissible(from) || !shift.is_admissible(to) {
        return Err(Error::InvalidArgument("cells must be admissible words".into()));
    }
    // BFS tree over r-words: (word, parent, symbol). The root is not marked
    // visited so that a cell can reach itself. Successors are pushed in
    // increasing order, so the first path found is the smallest.
    let mut tree: Vec<(Vec<u8>, usize, u8)> = vec![(from.to_vec(), usize::MAX, 0)];
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let node = tree[i].0.clone();
        for b in shift.successors(node[r - 1]) {
            let mut v = node[1..].to_vec();
            v.push(b);
            if !seen.insert(v.clone()) {
                continue;
            }
            let hit = v == to;
            tree.push((v, i, b));
            if hit {
                let mut path = Vec::new();
                let mut j = tree.len() - 1;
                while j != 0 {
                    path.push(tree[j].2);
                    j = tree[j].1;
                }
                path.reverse();
                let mut word = from.to_vec();
                word.extend(&path);
                return Ok(Connector { s: path.len(), word });
            }
            queue.push_back(tree.len() - 1);
        }
    }
    Err(Error::Invariant(format!("no admissible path from cell {from:?} to {to:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_shift_needs_one_step() {
        let s = ShiftSpace::full(2).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let c = connector(&s, &[a], &[b]).unwrap();
                assert_eq!(c.s, 1);
                assert_eq!(c.word, vec![a, b]);
            }
        }
    }

    #[test]
    fn golden_mean_self_loop_goes_through_zero() {
        let g = ShiftSpace::golden_mean();
        let c = connector(&g, &[1], &[1]).unwrap();
        assert_eq!(c.s, 2);
        assert_eq!(c.word, vec![1, 0, 1]);
        assert_eq!(c.symbols(), &[1, 0]);
    }

    #[test]
    fn deeper_cells_take_up_to_r_steps() {
        let s = ShiftSpace::full(2).unwrap();
        let c = connector(&s, &[0, 0, 0], &[1, 1, 1]).unwrap();
        assert_eq!(c.s, 3);
        let c = connector(&s, &[0, 1, 1], &[1, 1, 0]).unwrap();
        assert_eq!((c.s, c.word.clone()), (1, vec![0, 1, 1, 0]));
        // ties between shortest paths go to the smaller word
        let c = connector(&s, &[0, 0], &[0, 0]).unwrap();
        assert_eq!(c.word, vec![0, 0, 0]);
        let c = connector(&s, &[1, 0], &[0, 1]).unwrap();
        assert_eq!((c.s, c.word), (1, vec![1, 0, 1]));
    }

    #[test]
    fn reducible_shift_has_no_path() {
        let s = ShiftSpace::sft(vec![vec![1, 1], vec![0, 1]]).unwrap();
        assert!(matches!(connector(&s, &[1], &[0]), Err(Error::Invariant(_))));
        assert!(connector(&s, &[0, 1], &[1, 1]).is_ok());
        assert!(connector(&s, &[0], &[0, 1]).is_err());
    }
}
