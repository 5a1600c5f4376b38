use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{MeasurementSpec, Outcome};
use crate::states::ProductStateSet;

/// Born probabilities of one measurement for one true candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub outcomes: Vec<Outcome>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, o: Outcome) -> f64 {
        self.outcomes
            .iter()
            .position(|&x| x == o)
            .map_or(0.0, |i| self.probabilities[i])
    }
}

/// Probabilities of every outcome of `meas` when the state is `truth`.
pub fn outcome_distribution(s: &ProductStateSet, truth: usize, meas: &MeasurementSpec) -> Result<OutcomeDistribution> {
    meas.check(s)?;
    if truth >= s.len() {
        return Err(Error::InvalidMeasurement(format!("truth {truth} out of range")));
    }
    Ok(OutcomeDistribution {
        outcomes: meas.outcomes(),
        probabilities: probabilities(s, truth, meas.subsystem, &meas.projectors),
    })
}

/// `|<psi_n^j|psi_x^j>|^2` per projector, then the squared norm of the
/// residual for REST. The residual is computed directly so that states in the
/// projector span get a REST probability near 0 rather than `1 - sum` noise.
pub(crate) fn probabilities(s: &ProductStateSet, x: usize, j: usize, projectors: &[usize]) -> Vec<f64> {
    let psi = s.part(x, j);
    let mut residual: Vec<Complex64> = psi.to_vec();
    let mut out = Vec::with_capacity(projectors.len() + 1);
    for &p in projectors {
        let phi = s.part(p, j);
        let amp = s.overlap(p, x, j);
        out.push(amp.norm_sqr());
        for (r, f) in residual.iter_mut().zip(phi) {
            *r -= amp * f;
        }
    }
    out.push(residual.iter().map(Complex64::norm_sqr).sum());
    out
}

/// Probability at or below which an outcome counts as impossible.
pub(crate) fn zero_probability(s: &ProductStateSet) -> f64 {
    s.zero_tol() * s.zero_tol()
}

/// Candidates of `alive` that remain possible after observing outcome
/// number `idx` of the measurement.
pub(crate) fn survivors_after(
    s: &ProductStateSet,
    alive: &[usize],
    j: usize,
    projectors: &[usize],
    idx: usize,
) -> Vec<usize> {
    let eps = zero_probability(s);
    alive
        .iter()
        .copied()
        .filter(|&x| probabilities(s, x, j, projectors)[idx] > eps)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{basis, ProductState};

    fn spec(projectors: Vec<usize>) -> MeasurementSpec {
        MeasurementSpec {
            copy: 1,
            subsystem: 0,
            projectors,
        }
    }

    fn set(first: Vec<Vec<Complex64>>) -> ProductStateSet {
        let states = first
            .into_iter()
            .enumerate()
            .map(|(i, a)| ProductState {
                parts: vec![a, basis(4, i)],
            })
            .collect();
        ProductStateSet::new(vec![2, 4], states).unwrap()
    }

    #[test]
    fn basis_outcome_is_certain() {
        let s = set(vec![basis(2, 0), basis(2, 1)]);
        let d = outcome_distribution(&s, 0, &spec(vec![0, 1])).unwrap();
        assert_eq!(d.probabilities, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn plus_state_splits_evenly() {
        let h = 0.5f64.sqrt();
        let plus = vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
        let s = set(vec![basis(2, 0), plus]);
        let d = outcome_distribution(&s, 1, &spec(vec![0])).unwrap();
        assert!((d.probabilities[0] - 0.5).abs() < 1e-15);
        assert!((d.probability(Outcome::Rest) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_orthogonal_projectors_rejected() {
        let h = 0.5f64.sqrt();
        let plus = vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
        let s = set(vec![basis(2, 0), plus]);
        assert!(matches!(
            outcome_distribution(&s, 0, &spec(vec![0, 1])),
            Err(Error::InvalidMeasurement(_))
        ));
    }
}
