use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundInterval, RamseyQuery, Rule};
use crate::error::{Error, Result};

/// Environment variable naming a ledger file that replaces the built-in one.
pub const LEDGER_ENV: &str = "RAMSEY_LOCC_LEDGER";

const BUILTIN: &str = include_str!("../../data/ledger.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableSource {
    Table1,
    Table2,
    Table3,
    Table4,
}

/// One table cell. Absent sides encode blank, "L" or "U" cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub targets: Vec<u32>,
    pub lower: Option<u64>,
    pub upper: Option<u64>,
    pub exact: bool,
    pub source: TableSource,
}

#[derive(Debug, Serialize, Deserialize)]
struct LedgerFile {
    version: String,
    entries: Vec<LedgerEntry>,
}

/// Immutable store of known Ramsey values and bounds keyed by canonical query.
#[derive(Debug, Clone)]
pub struct Ledger {
    version: String,
    entries: HashMap<RamseyQuery, Vec<LedgerEntry>>,
}

impl Ledger {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("built-in ledger is well formed")
    }

    /// Loads from `RAMSEY_LOCC_LEDGER` if set, else the built-in data.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(LEDGER_ENV) {
            Some(path) => Self::load(Path::new(&path)),
            None => Ok(Self::builtin()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::InvalidQuery(format!("ledger {}: {j}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LedgerFile = serde_json::from_str(text)?;
        Self::from_entries(file.version, file.entries)
    }

    pub fn from_entries(version: impl Into<String>, list: Vec<LedgerEntry>) -> Result<Self> {
        let mut entries: HashMap<RamseyQuery, Vec<LedgerEntry>> = HashMap::new();
        for e in list {
            let q = RamseyQuery::new(&e.targets)?;
            if let (Some(l), Some(u)) = (e.lower, e.upper) {
                if l > u {
                    return Err(Error::InvalidQuery(format!(
                        "ledger entry {q}: lower {l} exceeds upper {u}"
                    )));
                }
            }
            let both_equal = matches!((e.lower, e.upper), (Some(l), Some(u)) if l == u);
            if e.exact != both_equal {
                return Err(Error::InvalidQuery(format!(
                    "ledger entry {q}: exact flag disagrees with its bounds"
                )));
            }
            if e.lower.is_none() && e.upper.is_none() {
                return Err(Error::InvalidQuery(format!("ledger entry {q} carries no bound")));
            }
            entries.entry(q).or_default().push(e);
        }
        Ok(Self {
            version: version.into(),
            entries,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn queries(&self) -> impl Iterator<Item = &RamseyQuery> {
        self.entries.keys()
    }

    pub fn entries_for(&self, q: &RamseyQuery) -> &[LedgerEntry] {
        self.entries.get(q).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Same ledger without the cells matching `drop`.
    pub fn without(&self, drop: impl Fn(&LedgerEntry) -> bool) -> Self {
        let entries = self
            .entries
            .iter()
            .filter_map(|(q, es)| {
                let kept: Vec<_> = es.iter().filter(|e| !drop(e)).cloned().collect();
                (!kept.is_empty()).then(|| (q.clone(), kept))
            })
            .collect();
        Self {
            version: format!("{}-subset", self.version),
            entries,
        }
    }

    /// Table-only interval for `q`: the intersection of all cells stored for
    /// it, padded with the trivial lower bound and an unbounded upper side.
    pub fn lookup(&self, q: &RamseyQuery) -> BoundInterval {
        let trivial = if q.targets().contains(&1) {
            1
        } else {
            u64::from(q.max_target())
        };
        let mut b = BoundInterval::new(trivial, vec![Rule::Trivial], None, vec![]);
        let mut has_upper = false;
        for e in self.entries_for(q) {
            if let Some(l) = e.lower {
                b.offer_lower(l, e.source.into());
            }
            if let Some(u) = e.upper {
                if !has_upper {
                    b.upper_rules.clear();
                    has_upper = true;
                }
                b.offer_upper(u, e.source.into());
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(t: &[u32]) -> RamseyQuery {
        RamseyQuery::new(t).unwrap()
    }

    #[test]
    fn builtin_loads() {
        let l = Ledger::builtin();
        assert_eq!(l.version(), "ledger-v1");
        assert!(l.len() > 100);
    }

    #[test]
    fn lookup_examples() {
        let l = Ledger::builtin();
        let b = l.lookup(&q(&[3, 3]));
        assert!(b.exact);
        assert_eq!(b.lower, 6);
        assert_eq!(b.lower_rules, vec![Rule::Table1]);
        let b = l.lookup(&q(&[5, 5]));
        assert_eq!((b.lower, b.upper), (43, Some(48)));
        let b = l.lookup(&q(&[3, 3, 3]));
        assert_eq!((b.lower, b.upper), (17, None));
        assert_eq!(b.upper_rules, vec![Rule::NoEntry]);
    }

    #[test]
    fn one_sided_cells() {
        let l = Ledger::builtin();
        // "L" cell: only the upper side is known.
        let b = l.lookup(&q(&[6, 14]));
        assert_eq!((b.lower, b.upper), (14, Some(5033)));
        assert_eq!(b.lower_rules, vec![Rule::Trivial]);
        // "U" cell: only the lower side is known.
        let b = l.lookup(&q(&[10, 15]));
        assert_eq!((b.lower, b.upper), (1313, None));
        // blank cell
        let b = l.lookup(&q(&[9, 14]));
        assert_eq!((b.lower, b.upper), (14, None));
    }

    #[test]
    fn overlapping_tables_intersect() {
        let l = Ledger::builtin();
        let b = l.lookup(&q(&[4, 15]));
        assert_eq!((b.lower, b.upper), (158, Some(417)));
        assert_eq!(b.lower_rules, vec![Rule::Table1, Rule::Table3]);
    }

    #[test]
    fn missing_entry_is_trivial_and_unbounded() {
        let b = Ledger::builtin().lookup(&q(&[40, 40]));
        assert_eq!((b.lower, b.upper), (40, None));
    }

    #[test]
    fn rejects_inconsistent_entries() {
        let bad =
            r#"{"version":"x","entries":[{"targets":[3,3],"lower":7,"upper":6,"exact":false,"source":"Table1"}]}"#;
        assert!(Ledger::from_json(bad).is_err());
        let bad =
            r#"{"version":"x","entries":[{"targets":[3,3],"lower":6,"upper":6,"exact":false,"source":"Table1"}]}"#;
        assert!(Ledger::from_json(bad).is_err());
    }
}
