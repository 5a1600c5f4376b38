//! Orthogonal product-state sets and their orthogonality colorings.

mod coloring;
mod realize;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use coloring::{random_coloring, ColoringFile, EdgeColoring, EdgeRecord, MAX_COLORS};
pub use realize::{realize, RealizeOptions};

pub const DEFAULT_ZERO_TOL: f64 = 1e-8;
pub const DEFAULT_GAP_TOL: f64 = 1e-4;
/// Allowed deviation of a stored vector's norm from 1.
pub const NORM_TOL: f64 = 1e-10;

/// One candidate state: a unit vector per subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    pub parts: Vec<Vec<Complex64>>,
}

/// `N` r-partite product states with the tolerances used to decide
/// orthogonality.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductStateSet {
    dims: Vec<usize>,
    states: Vec<ProductState>,
    zero_tol: f64,
    gap_tol: f64,
}

impl ProductStateSet {
    /// Checks shapes only; orthogonality and norms are reported by
    /// [`ProductStateSet::validate`].
    pub fn new(dims: Vec<usize>, states: Vec<ProductState>) -> Result<Self> {
        Self::with_tolerances(dims, states, DEFAULT_ZERO_TOL, DEFAULT_GAP_TOL)
    }

    pub fn with_tolerances(dims: Vec<usize>, states: Vec<ProductState>, zero_tol: f64, gap_tol: f64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidStateSet(format!(
                "need at least 2 parties, got {}",
                dims.len()
            )));
        }
        if dims.len() > MAX_COLORS {
            return Err(Error::InvalidStateSet(format!(
                "at most {MAX_COLORS} parties supported"
            )));
        }
        if let Some(j) = dims.iter().position(|&d| d < 2) {
            return Err(Error::InvalidStateSet(format!(
                "subsystem {j} has dimension {} < 2",
                dims[j]
            )));
        }
        if !(zero_tol >= 0.0 && gap_tol >= 0.0 && zero_tol.is_finite() && gap_tol.is_finite()) {
            return Err(Error::InvalidStateSet(format!(
                "tolerances must be finite and nonnegative (zero_tol={zero_tol}, gap_tol={gap_tol})"
            )));
        }
        if zero_tol >= gap_tol {
            return Err(Error::InvalidStateSet(format!(
                "zero_tol {zero_tol} must be below gap_tol {gap_tol}"
            )));
        }
        for (i, s) in states.iter().enumerate() {
            if s.parts.len() != dims.len() {
                return Err(Error::InvalidStateSet(format!(
                    "state {i} has {} parts, expected {}",
                    s.parts.len(),
                    dims.len()
                )));
            }
            for (j, (p, &d)) in s.parts.iter().zip(&dims).enumerate() {
                if p.len() != d {
                    return Err(Error::InvalidStateSet(format!(
                        "state {i} subsystem {j} has dimension {}, expected {d}",
                        p.len()
                    )));
                }
                if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidStateSet(format!(
                        "state {i} subsystem {j} has a non-finite entry"
                    )));
                }
            }
        }
        Ok(Self {
            dims,
            states,
            zero_tol,
            gap_tol,
        })
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ProductState] {
        &self.states
    }

    pub fn part(&self, state: usize, subsystem: usize) -> &[Complex64] {
        &self.states[state].parts[subsystem]
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn gap_tol(&self) -> f64 {
        self.gap_tol
    }

    /// `<psi_u^j | psi_v^j>`.
    pub fn overlap(&self, u: usize, v: usize, j: usize) -> Complex64 {
        inner(self.part(u, j), self.part(v, j))
    }

    /// Applies `f` to every subsystem-`j` vector. Used to check that results
    /// only depend on inner products.
    pub fn map_parts(&self, j: usize, mut f: impl FnMut(&[Complex64]) -> Vec<Complex64>) -> Result<Self> {
        let mut states = self.states.clone();
        for s in &mut states {
            s.parts[j] = f(&s.parts[j]);
        }
        let mut dims = self.dims.clone();
        dims[j] = states.first().map_or(dims[j], |s| s.parts[j].len());
        Self::with_tolerances(dims, states, self.zero_tol, self.gap_tol)
    }

    /// Restriction to the listed candidates, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let states = indices
            .iter()
            .map(|&i| {
                self.states
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidStateSet(format!("index {i} out of range")))
            })
            .collect::<Result<_>>()?;
        Self::with_tolerances(self.dims.clone(), states, self.zero_tol, self.gap_tol)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (i, s) in self.states.iter().enumerate() {
            for (j, p) in s.parts.iter().enumerate() {
                let norm = norm(p);
                if (norm - 1.0).abs() > NORM_TOL {
                    report.norm_violations.push(NormViolation {
                        state: i,
                        subsystem: j,
                        norm,
                    });
                }
            }
        }
        for v in 1..self.len() {
            for u in 0..v {
                let mut witnessed = false;
                for j in 0..self.parties() {
                    let modulus = self.overlap(u, v, j).norm();
                    if modulus <= self.zero_tol {
                        witnessed = true;
                    } else if modulus < self.gap_tol {
                        report.gap_violations.push(GapViolation {
                            u,
                            v,
                            subsystem: j,
                            modulus,
                        });
                    }
                }
                if !witnessed {
                    report.missing_witness.push((u, v));
                }
            }
        }
        report
    }

    pub fn to_file(&self) -> StateSetFile {
        StateSetFile {
            parties: self.parties(),
            dims: self.dims.clone(),
            zero_tol: self.zero_tol,
            gap_tol: self.gap_tol,
            states: self
                .states
                .iter()
                .map(|s| StateRecord {
                    parts: s
                        .parts
                        .iter()
                        .map(|p| p.iter().flat_map(|z| [z.re, z.im]).collect())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &StateSetFile) -> Result<Self> {
        if file.parties != file.dims.len() {
            return Err(Error::InvalidStateSet(format!(
                "parties = {} but {} dims given",
                file.parties,
                file.dims.len()
            )));
        }
        let states = file
            .states
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                let parts = rec
                    .parts
                    .iter()
                    .enumerate()
                    .map(|(j, flat)| {
                        if flat.len() % 2 != 0 {
                            return Err(Error::InvalidStateSet(format!(
                                "state {i} subsystem {j}: odd number of interleaved reals"
                            )));
                        }
                        Ok(flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
                    })
                    .collect::<Result<_>>()?;
                Ok(ProductState { parts })
            })
            .collect::<Result<_>>()?;
        Self::with_tolerances(file.dims.clone(), states, file.zero_tol, file.gap_tol)
    }
}

fn default_zero_tol() -> f64 {
    DEFAULT_ZERO_TOL
}

fn default_gap_tol() -> f64 {
    DEFAULT_GAP_TOL
}

/// On-disk state set with complex entries stored as interleaved `re, im`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSetFile {
    pub parties: usize,
    pub dims: Vec<usize>,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    pub states: Vec<StateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub parts: Vec<Vec<f64>>,
}

impl Serialize for ProductStateSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductStateSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = StateSetFile::deserialize(d)?;
        Self::from_file(&file).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormViolation {
    pub state: usize,
    pub subsystem: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapViolation {
    pub u: usize,
    pub v: usize,
    pub subsystem: usize,
    pub modulus: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub norm_violations: Vec<NormViolation>,
    pub missing_witness: Vec<(usize, usize)>,
    pub gap_violations: Vec<GapViolation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.norm_violations.is_empty() && self.missing_witness.is_empty() && self.gap_violations.is_empty()
    }

    /// First finding as an error, if any.
    pub fn into_result(self) -> Result<()> {
        if let Some(n) = self.norm_violations.first() {
            return Err(Error::InvalidStateSet(format!(
                "state {} subsystem {} has norm {}",
                n.state, n.subsystem, n.norm
            )));
        }
        if let Some(&(u, v)) = self.missing_witness.first() {
            return Err(Error::NotOrthogonal { u, v });
        }
        if let Some(g) = self.gap_violations.first() {
            return Err(Error::AmbiguousOrthogonality {
                u: g.u,
                v: g.v,
                subsystem: g.subsystem,
                modulus: g.modulus,
            });
        }
        Ok(())
    }
}

/// Witness structure of `s`: pair `(u, v)` gets every subsystem where the
/// overlap modulus is at most `zero_tol`.
pub fn extract_coloring(s: &ProductStateSet) -> Result<EdgeColoring> {
    let mut masks = Vec::with_capacity(s.len() * s.len().saturating_sub(1) / 2);
    for v in 1..s.len() {
        for u in 0..v {
            let mut mask = 0u32;
            for j in 0..s.parties() {
                let modulus = s.overlap(u, v, j).norm();
                if modulus <= s.zero_tol {
                    mask |= 1 << j;
                } else if modulus < s.gap_tol {
                    return Err(Error::AmbiguousOrthogonality {
                        u,
                        v,
                        subsystem: j,
                        modulus,
                    });
                }
            }
            if mask == 0 {
                return Err(Error::NotOrthogonal { u, v });
            }
            masks.push(mask);
        }
    }
    let mut it = masks.into_iter();
    EdgeColoring::from_witness(s.len(), s.parties(), |_, _| it.next().unwrap_or(0))
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Computational basis vector `|i>` in dimension `d`.
pub fn basis(d: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[i] = Complex64::new(1.0, 0.0);
    v
}
