//! Ramsey-number bounds: the shipped ledger of known values, derivation of
//! tighter intervals by closure over classical inequalities, certification
//! of the single-copy exclusion inequality systems, and an exhaustive oracle
//! for tiny instances.

mod brute;
mod certify;
mod derive;
mod ledger;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use brute::{brute_force_ramsey, BruteForceOptions, BruteForceOutcome, BruteForceReport, SizeRecord};
pub use certify::{check_exclusion_conditions, CertificationVerdict, ConditionLine, ConditionQuery, Status};
pub use derive::{DeriveConfig, Deriver};
pub use ledger::{Ledger, LedgerEntry, TableSource, LEDGER_ENV};

/// Clique sizes `i_1 >= i_2 >= ... >= i_r`, one per color.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RamseyQuery(Vec<u32>);

impl RamseyQuery {
    /// Builds the canonical (non-increasing) form of `targets`.
    pub fn new(targets: &[u32]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidQuery("empty target list".into()));
        }
        if let Some(pos) = targets.iter().position(|&t| t == 0) {
            return Err(Error::InvalidQuery(format!(
                "target #{pos} is 0; clique sizes must be >= 1"
            )));
        }
        let mut sorted = targets.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self(sorted))
    }

    /// Diagonal query `R_r(m)`.
    pub fn diagonal(m: u32, colors: usize) -> Result<Self> {
        Self::new(&vec![m; colors])
    }

    pub fn targets(&self) -> &[u32] {
        &self.0
    }

    pub fn colors(&self) -> usize {
        self.0.len()
    }

    pub fn max_target(&self) -> u32 {
        self.0[0]
    }

    /// `Some(m)` when every target equals `m`.
    pub fn diagonal_size(&self) -> Option<u32> {
        let m = self.0[0];
        self.0.iter().all(|&t| t == m).then_some(m)
    }
}

impl fmt::Display for RamseyQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// Result of applying the identities `R(..., 1, ...) = 1` and
/// `R(2, i_2, ..., i_r) = R(i_2, ..., i_r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Normalized {
    pub query: RamseyQuery,
    /// Set when the identities alone determine the value.
    pub value: Option<u64>,
}

pub fn normalize_query(targets: &[u32]) -> Result<Normalized> {
    let query = RamseyQuery::new(targets)?;
    if query.0.contains(&1) {
        return Ok(Normalized { query, value: Some(1) });
    }
    let mut reduced = query.0;
    while reduced.len() > 1 && reduced.last() == Some(&2) {
        reduced.pop();
    }
    let value = (reduced.len() == 1).then(|| u64::from(reduced[0]));
    Ok(Normalized {
        query: RamseyQuery(reduced),
        value,
    })
}

/// Tag naming the table cell or inequality that produced one side of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Table1,
    Table2,
    Table3,
    Table4,
    /// `R(..,1,..) = 1`, `R(2, rest) = R(rest)`, `R(n) = n`.
    Identity,
    /// `R >= max target`.
    Trivial,
    /// Upper side with no information.
    NoEntry,
    /// `R(k,l) <= R(k-1,l) + R(k,l-1)`.
    TwoColorRecursion,
    /// `R(i_1..i_r) <= 2 - r + sum_j R(.., i_j - 1, ..)`.
    MulticolorRecursion,
    /// `R(m,m) > 2^(m/2)`.
    TwoColorExponential,
    /// `R(m,m,m) > 3^(m/2)`.
    ThreeColorExponential,
    /// `R_{a+b}(m) > (R_a(m) - 1)(R_b(m) - 1)`.
    ColorProduct,
    /// `R(m,3,..,3; s+1) <= s! m^(s+1)`.
    StarUpper,
}

impl From<TableSource> for Rule {
    fn from(s: TableSource) -> Self {
        match s {
            TableSource::Table1 => Rule::Table1,
            TableSource::Table2 => Rule::Table2,
            TableSource::Table3 => Rule::Table3,
            TableSource::Table4 => Rule::Table4,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Table1 => "Table1",
            Rule::Table2 => "Table2",
            Rule::Table3 => "Table3",
            Rule::Table4 => "Table4",
            Rule::Identity => "identity",
            Rule::Trivial => "trivial",
            Rule::NoEntry => "no table entry",
            Rule::TwoColorRecursion => "two-color recursion",
            Rule::MulticolorRecursion => "multicolor recursion",
            Rule::TwoColorExponential => "two-color exponential lower bound",
            Rule::ThreeColorExponential => "three-color exponential lower bound",
            Rule::ColorProduct => "color product lower bound",
            Rule::StarUpper => "R(m,3,..,3) upper bound",
        };
        f.write_str(s)
    }
}

/// Certified interval `[lower, upper]` for one Ramsey number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: u64,
    /// `None` means unbounded.
    pub upper: Option<u64>,
    pub exact: bool,
    pub lower_rules: Vec<Rule>,
    pub upper_rules: Vec<Rule>,
}

impl BoundInterval {
    pub fn exact(value: u64, rule: Rule) -> Self {
        Self {
            lower: value,
            upper: Some(value),
            exact: true,
            lower_rules: vec![rule],
            upper_rules: vec![rule],
        }
    }

    pub(crate) fn new(lower: u64, lower_rules: Vec<Rule>, upper: Option<u64>, upper_rules: Vec<Rule>) -> Self {
        let mut b = Self {
            lower,
            upper,
            exact: false,
            lower_rules,
            upper_rules,
        };
        b.refresh();
        b
    }

    fn refresh(&mut self) {
        self.exact = self.upper == Some(self.lower);
        if self.upper.is_none() && self.upper_rules.is_empty() {
            self.upper_rules.push(Rule::NoEntry);
        }
    }

    /// Raises the lower side if `value` is at least as good. Returns true on change.
    pub(crate) fn offer_lower(&mut self, value: u64, rule: Rule) -> bool {
        if value > self.lower {
            self.lower = value;
            self.lower_rules = vec![rule];
            self.refresh();
            true
        } else {
            if value == self.lower && !self.lower_rules.contains(&rule) {
                self.lower_rules.push(rule);
            }
            false
        }
    }

    pub(crate) fn offer_upper(&mut self, value: u64, rule: Rule) -> bool {
        match self.upper {
            Some(u) if value > u => false,
            Some(u) if value == u => {
                if !self.upper_rules.contains(&rule) {
                    self.upper_rules.push(rule);
                }
                false
            }
            _ => {
                self.upper = Some(value);
                self.upper_rules = vec![rule];
                self.refresh();
                true
            }
        }
    }

    pub fn contains(&self, value: u64) -> bool {
        value >= self.lower && self.upper.is_none_or(|u| value <= u)
    }
}

impl fmt::Display for BoundInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) if self.exact => write!(f, "{u}"),
            Some(u) => write!(f, "[{}, {u}]", self.lower),
            None => write!(f, "[{}, inf)", self.lower),
        }
    }
}
