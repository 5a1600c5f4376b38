use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest party count a witness bitmask can hold.
pub const MAX_COLORS: usize = 32;

/// Orthogonality structure of `K_n`: for every vertex pair, the set of
/// subsystems (colors) in which the two states are orthogonal.
///
/// Colors and vertices are 0-based. The canonical color of a pair is its
/// lowest witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    n: usize,
    r: usize,
    /// Witness bitmask per pair, indexed by [`pair_index`].
    masks: Vec<u32>,
}

#[inline]
pub(crate) fn pair_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    b * (b - 1) / 2 + a
}

impl EdgeColoring {
    /// Builds a coloring from a witness bitmask per pair `u < v`.
    pub fn from_witness(n: usize, r: usize, mut witness: impl FnMut(usize, usize) -> u32) -> Result<Self> {
        if r == 0 || r > MAX_COLORS {
            return Err(Error::InvalidColoring(format!(
                "color count {r} outside 1..={MAX_COLORS}"
            )));
        }
        let full = if r == 32 { u32::MAX } else { (1u32 << r) - 1 };
        let mut masks = vec![0; n * n.saturating_sub(1) / 2];
        for v in 1..n {
            for u in 0..v {
                let m = witness(u, v);
                if m == 0 {
                    return Err(Error::InvalidColoring(format!("pair ({u},{v}) has no color")));
                }
                if m & !full != 0 {
                    return Err(Error::InvalidColoring(format!("pair ({u},{v}) uses a color >= {r}")));
                }
                masks[pair_index(u, v)] = m;
            }
        }
        Ok(Self { n, r, masks })
    }

    /// Single-color-per-edge coloring.
    pub fn from_colors(n: usize, r: usize, mut color: impl FnMut(usize, usize) -> usize) -> Result<Self> {
        Self::from_witness(n, r, |u, v| {
            let c = color(u, v);
            if c >= 32 {
                0
            } else {
                1 << c
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn colors(&self) -> usize {
        self.r
    }

    pub fn witness_mask(&self, u: usize, v: usize) -> u32 {
        self.masks[pair_index(u, v)]
    }

    pub fn witness(&self, u: usize, v: usize) -> Vec<usize> {
        let m = self.witness_mask(u, v);
        (0..self.r).filter(|&j| m & (1 << j) != 0).collect()
    }

    pub fn canonical(&self, u: usize, v: usize) -> usize {
        self.witness_mask(u, v).trailing_zeros() as usize
    }

    pub fn orthogonal_in(&self, u: usize, v: usize, j: usize) -> bool {
        self.witness_mask(u, v) & (1 << j) != 0
    }

    /// Pairs `(u, v)` with `u < v`, in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n).flat_map(|v| (0..v).map(move |u| (u, v)))
    }

    /// Adjacency lists of the canonical color-`j` graph.
    pub fn canonical_neighbors(&self, j: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (u, v) in self.pairs() {
            if self.canonical(u, v) == j {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        adj
    }

    pub fn to_file(&self) -> ColoringFile {
        ColoringFile {
            n: self.n,
            r: self.r,
            edges: self
                .pairs()
                .map(|(u, v)| EdgeRecord {
                    u,
                    v,
                    colors: self.witness(u, v),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &ColoringFile) -> Result<Self> {
        let n = file.n;
        let mut masks = vec![0u32; n * n.saturating_sub(1) / 2];
        for e in &file.edges {
            if e.u == e.v || e.u >= n || e.v >= n {
                return Err(Error::InvalidColoring(format!(
                    "edge ({},{}) is not a pair of K_{n}",
                    e.u, e.v
                )));
            }
            let idx = pair_index(e.u, e.v);
            if masks[idx] != 0 {
                return Err(Error::InvalidColoring(format!("edge ({},{}) listed twice", e.u, e.v)));
            }
            for &c in &e.colors {
                if c >= file.r || c >= MAX_COLORS {
                    return Err(Error::InvalidColoring(format!(
                        "edge ({},{}) has color {c}, expected < {}",
                        e.u, e.v, file.r
                    )));
                }
                masks[idx] |= 1 << c;
            }
        }
        Self::from_witness(n, file.r, |u, v| masks[pair_index(u, v)])
    }
}

/// On-disk coloring: `{"n":N,"r":r,"edges":[{"u":u,"v":v,"colors":[...]},...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringFile {
    pub n: usize,
    pub r: usize,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub colors: Vec<usize>,
}

impl Serialize for EdgeColoring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for EdgeColoring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = ColoringFile::deserialize(d)?;
        Self::from_file(&file).map_err(serde::de::Error::custom)
    }
}

/// Uniform independent color per edge, deterministic in `seed`.
pub fn random_coloring(n: usize, r: usize, seed: u64) -> Result<EdgeColoring> {
    if n < 2 || r < 2 {
        return Err(Error::InvalidColoring(format!(
            "need n >= 2 and r >= 2, got n={n}, r={r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EdgeColoring::from_colors(n, r, |_, _| rng.random_range(0..r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_dense() {
        let c = EdgeColoring::from_colors(5, 2, |_, _| 0).unwrap();
        let idx: Vec<_> = c.pairs().map(|(u, v)| pair_index(u, v)).collect();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
        assert_eq!(pair_index(3, 1), pair_index(1, 3));
    }

    #[test]
    fn canonical_is_min_witness() {
        let c = EdgeColoring::from_witness(2, 3, |_, _| 0b110).unwrap();
        assert_eq!(c.witness(0, 1), vec![1, 2]);
        assert_eq!(c.canonical(0, 1), 1);
    }

    #[test]
    fn random_coloring_single_edge() {
        for seed in 0..20 {
            let c = random_coloring(2, 2, seed).unwrap();
            assert_eq!(c.witness(0, 1).len(), 1);
        }
        assert_eq!(random_coloring(9, 3, 7).unwrap(), random_coloring(9, 3, 7).unwrap());
    }

    #[test]
    fn file_rejects_missing_and_duplicate_edges() {
        let mut f = random_coloring(4, 2, 1).unwrap().to_file();
        assert_eq!(EdgeColoring::from_file(&f).unwrap().to_file(), f);
        let e = f.edges.pop().unwrap();
        assert!(EdgeColoring::from_file(&f).is_err());
        f.edges.push(e.clone());
        f.edges.push(e);
        assert!(EdgeColoring::from_file(&f).is_err());
    }

    #[test]
    fn rejects_out_of_range_color() {
        assert!(EdgeColoring::from_colors(3, 2, |_, _| 2).is_err());
        assert!(random_coloring(1, 2, 0).is_err());
    }
}
