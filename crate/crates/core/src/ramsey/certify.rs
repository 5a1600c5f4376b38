use serde::{Deserialize, Serialize};

use super::{BoundInterval, Deriver, RamseyQuery};
use crate::error::{Error, Result};

/// Parameters of the single-copy exclusion inequality system: `r` parties,
/// base clique size `m`, exclusion target `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionQuery {
    pub r: usize,
    pub m: u32,
    pub k: u32,
}

impl ConditionQuery {
    pub fn new(r: usize, m: u32, k: u32) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidQuery(format!("party count r = {r} must be >= 2")));
        }
        if m < 2 {
            return Err(Error::InvalidQuery(format!("base clique size m = {m} must be >= 2")));
        }
        if k < m {
            return Err(Error::InvalidQuery(format!(
                "exclusion target k = {k} is below m = {m}"
            )));
        }
        Ok(Self { r, m, k })
    }

    /// Right-hand query for offset `t`: `R(m+1+t, k-m+1-t, ..., k-m+1-t; r)`.
    pub fn rhs(&self, t: u32) -> RamseyQuery {
        let mut targets = vec![self.k - self.m + 1 - t; self.r];
        targets[0] = self.m + 1 + t;
        RamseyQuery::new(&targets).expect("targets >= 1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Certified,
    Refuted,
    Unknown,
}

/// One inequality `R_r(m) - (m+t) >= RHS(t)` evaluated on ledger bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionLine {
    pub t: u32,
    pub rhs_query: RamseyQuery,
    /// `lower(R_r(m)) - (m+t)`.
    pub lhs_lower: i64,
    /// `upper(R_r(m)) - (m+t)` when the upper side is known.
    pub lhs_upper: Option<i64>,
    pub rhs: BoundInterval,
    /// Holds for every Ramsey value consistent with the ledger.
    pub certified: bool,
    /// Fails for every Ramsey value consistent with the ledger.
    pub refuted: bool,
}

impl ConditionLine {
    /// `"14 >= 14"` style rendering of the certifying comparison.
    pub fn render(&self) -> String {
        match self.rhs.upper {
            Some(u) => format!("{} >= {u}", self.lhs_lower),
            None => format!("{} >= ? ({})", self.lhs_lower, self.rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificationVerdict {
    pub query: ConditionQuery,
    pub status: Status,
    pub base: BoundInterval,
    pub witness: Vec<ConditionLine>,
    /// Certified upper bound of `R_r(m)`: the exclusion applies to every set
    /// of at least this many states.
    pub certified_threshold: Option<u64>,
}

/// Three-valued check of the exclusion inequalities for `(r, m, k)` against
/// the derived bounds of `deriver`'s ledger.
pub fn check_exclusion_conditions(deriver: &mut Deriver<'_>, c: ConditionQuery) -> Result<CertificationVerdict> {
    let c = ConditionQuery::new(c.r, c.m, c.k)?;
    let base = deriver.derive(&RamseyQuery::diagonal(c.m, c.r)?);
    let mut witness = Vec::with_capacity((c.k - c.m + 1) as usize);
    for t in 0..=c.k - c.m {
        let rhs_query = c.rhs(t);
        let rhs = deriver.derive(&rhs_query);
        let offset = i64::from(c.m + t);
        let lhs_lower = base.lower as i64 - offset;
        let lhs_upper = base.upper.map(|u| u as i64 - offset);
        let certified = rhs.upper.is_some_and(|u| lhs_lower >= u as i64);
        let refuted = lhs_upper.is_some_and(|lu| lu < rhs.lower as i64);
        witness.push(ConditionLine {
            t,
            rhs_query,
            lhs_lower,
            lhs_upper,
            rhs,
            certified,
            refuted,
        });
    }
    let status = if witness.iter().all(|l| l.certified) {
        Status::Certified
    } else if witness.iter().any(|l| l.refuted) {
        Status::Refuted
    } else {
        Status::Unknown
    };
    let certified_threshold = match status {
        Status::Certified => base.upper,
        _ => None,
    };
    Ok(CertificationVerdict {
        query: c,
        status,
        base,
        witness,
        certified_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramsey::Ledger;

    fn check(r: usize, m: u32, k: u32) -> CertificationVerdict {
        let ledger = Ledger::builtin();
        let mut d = Deriver::new(&ledger);
        check_exclusion_conditions(&mut d, ConditionQuery { r, m, k }).unwrap()
    }

    #[test]
    fn bipartite_four_six_certified() {
        let v = check(2, 4, 6);
        assert_eq!(v.status, Status::Certified);
        let lines: Vec<_> = v.witness.iter().map(ConditionLine::render).collect();
        assert_eq!(lines, ["14 >= 14", "13 >= 6", "12 >= 1"]);
        assert_eq!(v.certified_threshold, Some(18));
    }

    #[test]
    fn bipartite_three_four_refuted() {
        let v = check(2, 3, 4);
        assert_eq!(v.status, Status::Refuted);
        assert!(v.witness[0].refuted);
        assert_eq!(v.witness[0].lhs_upper, Some(3));
        assert_eq!(v.witness[0].rhs.lower, 4);
        assert_eq!(v.certified_threshold, None);
    }

    #[test]
    fn tripartite_three_three_certified() {
        let v = check(3, 3, 3);
        assert_eq!(v.status, Status::Certified);
        assert_eq!(v.witness[0].lhs_lower, 14);
        assert_eq!(v.witness[0].rhs.upper, Some(1));
        assert_eq!(v.certified_threshold, Some(17));
    }

    #[test]
    fn five_eight_is_unknown_on_shipped_bounds() {
        let v = check(2, 5, 8);
        assert_eq!(v.status, Status::Unknown);
        assert_eq!(v.witness[0].lhs_lower, 38);
        assert_eq!(v.witness[0].rhs.upper, Some(41));
    }

    #[test]
    fn k_below_m_rejected() {
        let ledger = Ledger::builtin();
        let mut d = Deriver::new(&ledger);
        let err = check_exclusion_conditions(&mut d, ConditionQuery { r: 2, m: 4, k: 3 });
        assert!(matches!(err, Err(Error::InvalidQuery(_))));
    }
}
