use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{inner, norm, EdgeColoring, ProductState, ProductStateSet, DEFAULT_GAP_TOL, DEFAULT_ZERO_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RealizeOptions {
    /// Per-subsystem dimensions; `None` means `N` everywhere.
    pub dims: Option<Vec<usize>>,
    pub zero_tol: f64,
    pub gap_tol: f64,
    /// Samples tried per (vertex, subsystem) before giving up.
    pub max_resamples: usize,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self {
            dims: None,
            zero_tol: DEFAULT_ZERO_TOL,
            gap_tol: DEFAULT_GAP_TOL,
            max_resamples: 1000,
        }
    }
}

/// Random product states whose orthogonality structure is exactly `c`.
///
/// Subsystem by subsystem, each vertex draws a Haar-random unit vector in the
/// orthogonal complement of the earlier vertices it must be orthogonal to,
/// redrawing until every other overlap clears `gap_tol`.
pub fn realize(c: &EdgeColoring, seed: u64, opts: &RealizeOptions) -> Result<ProductStateSet> {
    let n = c.n();
    let r = c.colors();
    if r < 2 {
        return Err(Error::InvalidColoring(format!("need at least 2 colors, got {r}")));
    }
    let dims = match &opts.dims {
        Some(d) => {
            if d.len() != r {
                return Err(Error::Dimension(format!("{} dims given for {r} subsystems", d.len())));
            }
            if let Some(j) = d.iter().position(|&dj| dj < n.max(2)) {
                return Err(Error::Dimension(format!(
                    "subsystem {j} has dimension {} < N = {n}",
                    d[j]
                )));
            }
            d.clone()
        }
        None => vec![n.max(2); r],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: Vec<Vec<Vec<Complex64>>> = vec![Vec::with_capacity(r); n];
    for (j, &d) in dims.iter().enumerate() {
        let mut placed: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for v in 0..n {
            let (ortho, other): (Vec<usize>, Vec<usize>) = (0..v).partition(|&u| c.orthogonal_in(u, v, j));
            let basis = orthonormalize(ortho.iter().map(|&u| placed[u].as_slice()));
            let mut accepted = None;
            for _ in 0..opts.max_resamples {
                let Some(x) = sample_in_complement(&basis, d, &mut rng) else {
                    continue;
                };
                let ok_zero = ortho.iter().all(|&u| inner(&placed[u], &x).norm() <= opts.zero_tol);
                let ok_gap = other.iter().all(|&u| inner(&placed[u], &x).norm() >= opts.gap_tol);
                if ok_zero && ok_gap {
                    accepted = Some(x);
                    break;
                }
            }
            let x = accepted.ok_or_else(|| {
                Error::RealizationFailure(format!(
                    "vertex {v} subsystem {j}: no admissible vector after {} samples",
                    opts.max_resamples
                ))
            })?;
            placed.push(x);
        }
        for (v, x) in placed.into_iter().enumerate() {
            parts[v].push(x);
        }
    }
    let states = parts.into_iter().map(|parts| ProductState { parts }).collect();
    ProductStateSet::with_tolerances(dims, states, opts.zero_tol, opts.gap_tol)
}

fn orthonormalize<'a>(vectors: impl Iterator<Item = &'a [Complex64]>) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.to_vec();
        project_out(&basis, &mut w);
        let nw = norm(&w);
        if nw > 1e-12 {
            w.iter_mut().for_each(|z| *z /= nw);
            basis.push(w);
        }
    }
    basis
}

/// Twice-applied Gram-Schmidt projection onto the complement of `basis`.
fn project_out(basis: &[Vec<Complex64>], w: &mut [Complex64]) {
    for _ in 0..2 {
        for b in basis {
            let coeff = inner(b, w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= coeff * bi;
            }
        }
    }
}

fn sample_in_complement(basis: &[Vec<Complex64>], d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Complex64>> {
    let mut x: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    project_out(basis, &mut x);
    let nx = norm(&x);
    if nx < 1e-6 {
        return None;
    }
    x.iter_mut().for_each(|z| *z /= nx);
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{extract_coloring, random_coloring};

    #[test]
    fn triangle_gram_check() {
        let c = EdgeColoring::from_colors(3, 2, |u, v| if (u, v) == (1, 2) { 1 } else { 0 }).unwrap();
        let s = realize(&c, 5, &RealizeOptions::default()).unwrap();
        assert!(s.overlap(0, 1, 0).norm() < 1e-12);
        assert!(s.overlap(0, 2, 0).norm() < 1e-12);
        assert!(s.overlap(1, 2, 1).norm() < 1e-12);
        assert!(s.overlap(1, 2, 0).norm() >= 1e-4);
        assert!(s.overlap(0, 1, 1).norm() >= 1e-4);
        assert!(s.overlap(0, 2, 1).norm() >= 1e-4);
        assert!(s.validate().is_clean());
    }

    #[test]
    fn single_color_gives_orthonormal_first_parts() {
        let c = EdgeColoring::from_colors(4, 2, |_, _| 0).unwrap();
        let s = realize(&c, 1, &RealizeOptions::default()).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                let g = s.overlap(u, v, 0).norm();
                assert!((g - f64::from(u8::from(u == v))).abs() < 1e-12);
                assert!(s.overlap(u, v, 1).norm() >= 1e-4);
            }
        }
    }

    #[test]
    fn round_trip_and_determinism() {
        for seed in 0..10 {
            let c = random_coloring(9, 3, seed).unwrap();
            let s = realize(&c, seed, &RealizeOptions::default()).unwrap();
            assert_eq!(extract_coloring(&s).unwrap(), c);
            assert_eq!(s, realize(&c, seed, &RealizeOptions::default()).unwrap());
        }
    }

    #[test]
    fn dimension_checks() {
        let c = random_coloring(5, 2, 0).unwrap();
        let small = RealizeOptions {
            dims: Some(vec![4, 5]),
            ..Default::default()
        };
        assert!(matches!(realize(&c, 0, &small), Err(Error::Dimension(_))));
        let big = RealizeOptions {
            dims: Some(vec![7, 5]),
            ..Default::default()
        };
        assert_eq!(realize(&c, 0, &big).unwrap().dims(), &[7, 5]);
    }

    #[test]
    fn budget_exhaustion() {
        let c = random_coloring(6, 2, 3).unwrap();
        let opts = RealizeOptions {
            gap_tol: 0.99,
            zero_tol: 1e-8,
            ..Default::default()
        };
        assert!(matches!(realize(&c, 0, &opts), Err(Error::RealizationFailure(_))));
    }
}
