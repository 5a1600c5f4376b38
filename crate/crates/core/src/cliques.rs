//! Monochromatic clique search on the canonical orthogonality coloring.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::states::EdgeColoring;

/// Largest clique of one color with its (lexicographically smallest) witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorClique {
    pub color: usize,
    pub size: usize,
    pub witness: Vec<usize>,
}

/// `M_j` for every color and `M = max_j M_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueSummary {
    pub per_color: Vec<ColorClique>,
    pub overall: usize,
    /// Lowest color attaining `overall`.
    pub overall_color: usize,
}

fn adjacency(c: &EdgeColoring, color: usize) -> Vec<FixedBitSet> {
    assert!(
        color < c.colors(),
        "color {color} out of range for {} colors",
        c.colors()
    );
    let n = c.n();
    let mut adj = vec![FixedBitSet::with_capacity(n); n];
    for (u, v) in c.pairs() {
        if c.canonical(u, v) == color {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    adj
}

fn vertex_set(n: usize, vertices: Option<&[usize]>) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(n);
    match vertices {
        Some(vs) => vs.iter().for_each(|&v| set.insert(v)),
        None => set.insert_range(..),
    }
    set
}

/// Number of classes in a greedy coloring of `cand`; bounds its clique number.
fn color_bound(adj: &[FixedBitSet], cand: &FixedBitSet) -> usize {
    let mut uncolored = cand.clone();
    let mut classes = 0;
    while !uncolored.is_clear() {
        classes += 1;
        let mut avail = uncolored.clone();
        while let Some(v) = avail.ones().next() {
            uncolored.set(v, false);
            avail.set(v, false);
            avail.difference_with(&adj[v]);
        }
    }
    classes
}

struct Search<'a> {
    adj: &'a [FixedBitSet],
    best: Vec<usize>,
    /// Stop as soon as a clique of this size is found.
    target: Option<usize>,
}

impl Search<'_> {
    fn goal(&self) -> usize {
        self.target.unwrap_or(self.best.len() + 1)
    }

    /// Vertices are tried in increasing order and only strictly larger cliques
    /// replace `best`, so the first maximum found is the lexicographically
    /// smallest.
    fn expand(&mut self, clique: &mut Vec<usize>, cand: FixedBitSet) -> bool {
        if clique.len() > self.best.len() {
            self.best = clique.clone();
            if self.target.is_some_and(|t| self.best.len() >= t) {
                return true;
            }
        }
        if cand.is_clear() || clique.len() + color_bound(self.adj, &cand) < self.goal() {
            return false;
        }
        let mut rest = cand.clone();
        for v in cand.ones() {
            if clique.len() + rest.count_ones(..) < self.goal() {
                break;
            }
            rest.set(v, false);
            let mut next = rest.clone();
            next.intersect_with(&self.adj[v]);
            clique.push(v);
            if self.expand(clique, next) {
                return true;
            }
            clique.pop();
        }
        false
    }
}

fn search(adj: &[FixedBitSet], cand: FixedBitSet, target: Option<usize>) -> Vec<usize> {
    let mut s = Search {
        adj,
        best: Vec::new(),
        target,
    };
    s.expand(&mut Vec::new(), cand);
    s.best
}

/// Maximum clique of canonical color `color`, exact.
///
/// # Panics
/// If `color >= c.colors()`.
pub fn mono_max_clique(c: &EdgeColoring, color: usize) -> Vec<usize> {
    let adj = adjacency(c, color);
    search(&adj, vertex_set(c.n(), None), None)
}

/// Maximum clique of canonical color `color` among `vertices`.
pub fn mono_max_clique_in(c: &EdgeColoring, color: usize, vertices: &[usize]) -> Vec<usize> {
    let adj = adjacency(c, color);
    search(&adj, vertex_set(c.n(), Some(vertices)), None)
}

/// Some clique of `m` vertices in canonical color `color`, if one exists.
pub fn find_mono_clique(c: &EdgeColoring, color: usize, m: usize) -> Option<Vec<usize>> {
    find_in(&adjacency(c, color), vertex_set(c.n(), None), m)
}

pub fn find_mono_clique_in(c: &EdgeColoring, color: usize, m: usize, vertices: &[usize]) -> Option<Vec<usize>> {
    find_in(&adjacency(c, color), vertex_set(c.n(), Some(vertices)), m)
}

fn find_in(adj: &[FixedBitSet], cand: FixedBitSet, m: usize) -> Option<Vec<usize>> {
    if m == 0 {
        return Some(Vec::new());
    }
    let best = search(adj, cand, Some(m));
    (best.len() >= m).then(|| best[..m].to_vec())
}

pub fn orthogonality_summary(c: &EdgeColoring) -> CliqueSummary {
    let per_color: Vec<ColorClique> = (0..c.colors())
        .into_par_iter()
        .map(|color| {
            let witness = mono_max_clique(c, color);
            ColorClique {
                color,
                size: witness.len(),
                witness,
            }
        })
        .collect();
    let best = per_color
        .iter()
        .rev()
        .max_by_key(|cc| cc.size)
        .expect("at least one color");
    CliqueSummary {
        overall: best.size,
        overall_color: best.color,
        per_color,
    }
}

/// Whether every pair of `vertices` has canonical color `color`.
pub fn is_mono_clique(c: &EdgeColoring, color: usize, vertices: &[usize]) -> bool {
    vertices
        .iter()
        .enumerate()
        .all(|(i, &u)| vertices[i + 1..].iter().all(|&v| u != v && c.canonical(u, v) == color))
}
