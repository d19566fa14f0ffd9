use super::{AtomicMeasure, TestFamily};
use crate::error::{Error, Result};
use crate::systems::{State, System};

/// One cluster of empirical measures along an orbit.
#[derive(Debug, Clone)]
pub struct LimitCluster {
    /// Empirical measure at the largest member time.
    pub representative: AtomicMeasure,
    pub n: usize,
    /// Grid times whose empirical measures fell in this cluster.
    pub members: Vec<usize>,
    /// Family integrals of the representative.
    pub integrals: Vec<f64>,
}

/// Geometric grid with ratio 1.2 from ⌈√horizon⌉ to `horizon`.
pub fn limit_grid(horizon: usize) -> Vec<usize> {
    let mut n = ((horizon as f64).sqrt().ceil() as usize).max(1);
    let mut grid = Vec::new();
    while n < horizon {
        grid.push(n);
        n = ((n as f64 * 1.2).ceil() as usize).max(n + 1);
    }
    grid.push(horizon);
    grid
}

/// Finite approximation of the set of limit points of the empirical
/// measures of `x`: single-linkage clusters under the weak* distance.
pub fn limit_measures(
    system: &System,
    x: &State,
    horizon: usize,
    family: &TestFamily,
    cluster_tol: f64,
) -> Result<Vec<LimitCluster>> {
    if horizon < 10 {
        return Err(Error::InvalidArgument(format!("horizon {horizon} is shorter than 10 steps")));
    }
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidArgument("cluster tolerance must be nonnegative".into()));
    }
    system.contains(x)?;
    let grid = limit_grid(horizon);
    let mut snaps: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut sums = vec![0.0; family.len()];
    let mut state = x.clone();
    let mut g = 0;
    for i in 0..horizon {
        family.add_eval(&state, 1.0, &mut sums)?;
        if i + 1 == grid[g] {
            snaps.push(sums.iter().map(|s| s / (i + 1) as f64).collect());
            g += 1;
        }
        if i + 1 < horizon {
            state = system.apply(&state)?;
        }
    }

    let mut parent: Vec<usize> = (0..grid.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for a in 0..grid.len() {
        for b in (a + 1)..grid.len() {
            if family.distance(&snaps[a], &snaps[b]) <= cluster_tol {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut order: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..grid.len() {
        let r = root(&mut parent, i);
        match order.iter().position(|&o| o == r) {
            Some(c) => members[c].push(i),
            None => {
                order.push(r);
                members.push(vec![i]);
            }
        }
    }
    members
        .into_iter()
        .map(|idx| {
            let last = *idx.last().unwrap();
            let n = grid[last];
            let atoms = system.orbit(x, n)?.into_iter().map(|s| (s, 1)).collect();
            Ok(LimitCluster {
                representative: AtomicMeasure::from_counts(atoms)?,
                n,
                members: idx.iter().map(|&i| grid[i]).collect(),
                integrals: snaps[last].clone(),
            })
        })
        .collect()
}
