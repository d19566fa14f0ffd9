//! Exact small-instance solvers for maximum independent set and minimum
//! set cover on bitmask graphs of at most 32 vertices.

/// Largest independent set of the graph with adjacency masks `adj`.
/// Ties resolve to the first set found with vertices tried low-index first.
pub fn max_independent_set(adj: &[u32]) -> Vec<usize> {
    assert!(adj.len() <= 32, "bitmask solver handles at most 32 vertices");
    let all = if adj.len() == 32 { u32::MAX } else { (1u32 << adj.len()) - 1 };
    let mut best = 0u32;
    mis(adj, all, 0, &mut best);
    bits(best)
}

fn mis(adj: &[u32], cand: u32, cur: u32, best: &mut u32) {
    if cand == 0 {
        if cur.count_ones() > best.count_ones() {
            *best = cur;
        }
        return;
    }
    if cur.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    let v = bits(cand)
        .into_iter()
        .max_by_key(|&v| ((adj[v] & cand).count_ones(), std::cmp::Reverse(v)))
        .unwrap();
    let bit = 1u32 << v;
    mis(adj, cand & !adj[v] & !bit, cur | bit, best);
    if adj[v] & cand != 0 {
        mis(adj, cand & !bit, cur, best);
    }
}

/// Smallest family of `sets` whose union is `universe`, or `None` if the
/// sets do not cover it.
pub fn min_set_cover(sets: &[u32], universe: u32) -> Option<Vec<usize>> {
    let union = sets.iter().fold(0u32, |a, &s| a | s);
    if union & universe != universe {
        return None;
    }
    let mut best: Option<Vec<usize>> = None;
    let mut cur = Vec::new();
    cover(sets, universe, &mut cur, &mut best);
    best
}

fn cover(sets: &[u32], uncovered: u32, cur: &mut Vec<usize>, best: &mut Option<Vec<usize>>) {
    if uncovered == 0 {
        if best.as_ref().is_none_or(|b| cur.len() < b.len()) {
            *best = Some(cur.clone());
        }
        return;
    }
    let widest = sets.iter().map(|&s| (s & uncovered).count_ones()).max().unwrap_or(0);
    if widest == 0 {
        return;
    }
    let lower = uncovered.count_ones().div_ceil(widest) as usize;
    if best.as_ref().is_some_and(|b| cur.len() + lower >= b.len()) {
        return;
    }
    // branch on the element with the fewest covering sets
    let e = bits(uncovered)
        .into_iter()
        .min_by_key(|&e| sets.iter().filter(|&&s| s >> e & 1 == 1).count())
        .unwrap();
    let mut options: Vec<usize> = (0..sets.len()).filter(|&i| sets[i] >> e & 1 == 1).collect();
    options.sort_by_key(|&i| std::cmp::Reverse((sets[i] & uncovered).count_ones()));
    for i in options {
        cur.push(i);
        cover(sets, uncovered & !sets[i], cur, best);
        cur.pop();
    }
}

/// Greedy independent set: repeatedly take the vertex of least remaining
/// degree.
pub fn greedy_independent_set(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut out = Vec::new();
    loop {
        let pick = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| adj[v].iter().filter(|&&u| alive[u]).count());
        let Some(v) = pick else { break };
        out.push(v);
        alive[v] = false;
        for &u in &adj[v] {
            alive[u] = false;
        }
    }
    out.sort_unstable();
    out
}

/// Greedy cover: repeatedly take the set covering most uncovered elements.
pub fn greedy_set_cover(sets: &[Vec<usize>], universe: usize) -> Option<Vec<usize>> {
    let mut covered = vec![false; universe];
    let mut left = universe;
    let mut out = Vec::new();
    while left > 0 {
        let (i, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.iter().filter(|&&e| !covered[e]).count()))
            .max_by_key(|&(i, g)| (g, std::cmp::Reverse(i)))?;
        if gain == 0 {
            return None;
        }
        for &e in &sets[i] {
            if !covered[e] {
                covered[e] = true;
                left -= 1;
            }
        }
        out.push(i);
    }
    Some(out)
}

fn bits(mut m: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_mis(adj: &[u32]) -> usize {
        let n = adj.len();
        (0u32..1 << n)
            .filter(|&s| bits(s).iter().all(|&v| adj[v] & s == 0))
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap()
    }

    fn brute_cover(sets: &[u32], universe: u32) -> usize {
        (0u32..1 << sets.len())
            .filter(|&pick| bits(pick).iter().fold(0, |a, &i| a | sets[i]) & universe == universe)
            .map(|p| p.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn cycles_and_cliques() {
        // 5-cycle
        let c5: Vec<u32> = (0..5).map(|i| 1 << ((i + 1) % 5) | 1 << ((i + 4) % 5)).collect();
        assert_eq!(max_independent_set(&c5).len(), 2);
        let k4: Vec<u32> = (0..4).map(|i| 0b1111 & !(1 << i)).collect();
        assert_eq!(max_independent_set(&k4), vec![0]);
        assert_eq!(max_independent_set(&[0, 0, 0]).len(), 3);
    }

    #[test]
    fn solvers_match_brute_force() {
        let mut state = 12345u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..40 {
            let n = 2 + (next() % 10) as usize;
            let mut adj = vec![0u32; n];
            for a in 0..n {
                for b in (a + 1)..n {
                    if next() % 3 == 0 {
                        adj[a] |= 1 << b;
                        adj[b] |= 1 << a;
                    }
                }
            }
            let s = max_independent_set(&adj);
            assert!(s.iter().all(|&v| s.iter().all(|&u| adj[v] >> u & 1 == 0)));
            assert_eq!(s.len(), brute_mis(&adj));
            let balls: Vec<u32> = (0..n).map(|v| adj[v] | 1 << v).collect();
            let universe = (1u32 << n) - 1;
            let c = min_set_cover(&balls, universe).unwrap();
            assert_eq!(c.len(), brute_cover(&balls, universe));
        }
    }

    #[test]
    fn greedy_versions_are_valid() {
        let adj = vec![vec![1], vec![0, 2], vec![1]];
        assert_eq!(greedy_independent_set(&adj), vec![0, 2]);
        let sets = vec![vec![0, 1], vec![1, 2], vec![2]];
        assert_eq!(greedy_set_cover(&sets, 3).unwrap().len(), 2);
        assert!(greedy_set_cover(&[vec![0]], 2).is_none());
        assert!(min_set_cover(&[0b01], 0b11).is_none());
    }
}
