use serde::{Deserialize, Serialize};

use super::RamseyQuery;
use crate::error::{Error, Result};

/// Largest complete graph the bitmask search handles.
const MAX_VERTICES: u32 = 64;

/// Without pruning, refuse to enumerate more than this many colorings.
const PLAIN_ENUMERATION_LIMIT_LOG2: f64 = 30.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceOptions {
    /// Edge-by-edge backtracking that abandons a partial coloring as soon as
    /// it contains a forbidden monochromatic clique.
    pub prune: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BruteForceOutcome {
    Exact(u32),
    ExceedsMax,
}

/// What the search saw at one complete-graph size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub n: u32,
    /// Colorings (plain mode) or search nodes (pruned mode) visited.
    pub visited: u64,
    /// An avoiding coloring was found, so `n` is below the Ramsey number.
    pub avoiding_coloring: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceReport {
    pub targets: Vec<u32>,
    pub max_n: u32,
    pub outcome: BruteForceOutcome,
    pub sizes: Vec<SizeRecord>,
}

/// Smallest `n <= max_n` such that every `r`-coloring of `K_n` has a
/// monochromatic `K_{i_s}` in some color `s`.
pub fn brute_force_ramsey(targets: &[u32], max_n: u32, opts: BruteForceOptions) -> Result<BruteForceReport> {
    // Colors keep the caller's order; only validation uses the canonical form.
    RamseyQuery::new(targets)?;
    let colors = targets.len();
    if colors > u8::MAX as usize {
        return Err(Error::InvalidQuery(format!("{colors} colors exceeds 255")));
    }
    if max_n > MAX_VERTICES {
        return Err(Error::Resource(format!(
            "max_n = {max_n} exceeds {MAX_VERTICES} vertices"
        )));
    }
    if !opts.prune {
        let edges = f64::from(max_n) * f64::from(max_n.saturating_sub(1)) / 2.0;
        let log2 = edges * (colors as f64).log2();
        if log2 > PLAIN_ENUMERATION_LIMIT_LOG2 {
            return Err(Error::Resource(format!(
                "{colors}^{edges} colorings of K_{max_n} exceed 2^30; enable pruning"
            )));
        }
    }
    let mut sizes = Vec::new();
    for n in 1..=max_n {
        let search = Search::new(targets, n);
        let (found, visited) = if opts.prune {
            search.backtrack()
        } else {
            search.enumerate()
        };
        let done = found.is_none();
        sizes.push(SizeRecord {
            n,
            visited,
            avoiding_coloring: found,
        });
        if done {
            return Ok(BruteForceReport {
                targets: targets.to_vec(),
                max_n,
                outcome: BruteForceOutcome::Exact(n),
                sizes,
            });
        }
    }
    Ok(BruteForceReport {
        targets: targets.to_vec(),
        max_n,
        outcome: BruteForceOutcome::ExceedsMax,
        sizes,
    })
}

struct Search<'a> {
    targets: &'a [u32],
    n: u32,
    /// Edge list in the order (0,1), (0,2), (1,2), (0,3), ...
    edges: Vec<(u32, u32)>,
}

impl<'a> Search<'a> {
    fn new(targets: &'a [u32], n: u32) -> Self {
        let edges = (1..n).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
        Self { targets, n, edges }
    }

    /// Trivially forced: a target of 1 is met by any vertex.
    fn forced_by_vertex(&self) -> bool {
        self.n >= 1 && self.targets.contains(&1)
    }

    fn enumerate(&self) -> (Option<Vec<u8>>, u64) {
        if self.forced_by_vertex() {
            return (None, 0);
        }
        let r = self.targets.len() as u64;
        let e = self.edges.len() as u32;
        let total = r.pow(e);
        let mut colors = vec![0u8; self.edges.len()];
        for index in 0..total {
            let mut x = index;
            for c in colors.iter_mut() {
                *c = (x % r) as u8;
                x /= r;
            }
            if self.avoids_all(&colors) {
                return (Some(colors), index + 1);
            }
        }
        (None, total)
    }

    fn avoids_all(&self, colors: &[u8]) -> bool {
        let mut adj = vec![vec![0u64; self.n as usize]; self.targets.len()];
        for (&(u, v), &c) in self.edges.iter().zip(colors) {
            adj[c as usize][u as usize] |= 1 << v;
            adj[c as usize][v as usize] |= 1 << u;
        }
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        self.targets
            .iter()
            .zip(&adj)
            .all(|(&size, a)| !has_clique(a, all, size))
    }

    fn backtrack(&self) -> (Option<Vec<u8>>, u64) {
        if self.forced_by_vertex() {
            return (None, 0);
        }
        let mut adj = vec![vec![0u64; self.n as usize]; self.targets.len()];
        let mut colors = vec![0u8; self.edges.len()];
        let mut visited = 0;
        let found = self.extend(0, &mut adj, &mut colors, &mut visited);
        (found.then_some(colors), visited)
    }

    fn extend(&self, idx: usize, adj: &mut [Vec<u64>], colors: &mut [u8], visited: &mut u64) -> bool {
        *visited += 1;
        let Some(&(u, v)) = self.edges.get(idx) else {
            return true;
        };
        for c in 0..self.targets.len() {
            let size = self.targets[c];
            let a = &mut adj[c];
            // A new clique must contain edge (u, v): look for K_{size-2}
            // among common neighbours in color c.
            let common = a[u as usize] & a[v as usize];
            if size <= 2 || has_clique(a, common, size - 2) {
                continue;
            }
            a[u as usize] |= 1 << v;
            a[v as usize] |= 1 << u;
            colors[idx] = c as u8;
            if self.extend(idx + 1, adj, colors, visited) {
                return true;
            }
            let a = &mut adj[c];
            a[u as usize] &= !(1 << v);
            a[v as usize] &= !(1 << u);
        }
        false
    }
}

/// Whether `cand` contains a clique of `size` vertices in `adj`.
fn has_clique(adj: &[u64], cand: u64, size: u32) -> bool {
    if size == 0 {
        return true;
    }
    if cand.count_ones() < size {
        return false;
    }
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros();
        rest &= rest - 1;
        if has_clique(adj, rest & adj[v as usize], size - 1) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(t: &[u32], max_n: u32, prune: bool) -> BruteForceOutcome {
        brute_force_ramsey(t, max_n, BruteForceOptions { prune })
            .unwrap()
            .outcome
    }

    #[test]
    fn r33_plain_enumeration() {
        let rep = brute_force_ramsey(&[3, 3], 8, BruteForceOptions::default()).unwrap();
        assert_eq!(rep.outcome, BruteForceOutcome::Exact(6));
        let k6 = rep.sizes.last().unwrap();
        assert_eq!((k6.n, k6.visited), (6, 1 << 15));
        assert!(rep.sizes[4].avoiding_coloring.is_some());
    }

    #[test]
    fn two_target_identity() {
        for l in 2..=6 {
            assert_eq!(value(&[2, l], l, false), BruteForceOutcome::Exact(l));
            assert_eq!(value(&[l, 2], l + 2, true), BruteForceOutcome::Exact(l));
        }
    }

    #[test]
    fn pruned_and_plain_agree_on_small_cases() {
        for t in [[3, 3], [2, 3], [3, 2], [1, 4]] {
            assert_eq!(value(&t, 7, false), value(&t, 7, true));
        }
    }

    #[test]
    fn r34_needs_pruning() {
        assert!(matches!(
            brute_force_ramsey(&[3, 4], 10, BruteForceOptions::default()),
            Err(Error::Resource(_))
        ));
        assert_eq!(value(&[3, 4], 10, true), BruteForceOutcome::Exact(9));
    }

    #[test]
    fn exceeds_max() {
        assert_eq!(value(&[3, 3], 5, false), BruteForceOutcome::ExceedsMax);
    }

    #[test]
    fn target_one_is_one() {
        assert_eq!(value(&[5, 1], 3, false), BruteForceOutcome::Exact(1));
    }
}
