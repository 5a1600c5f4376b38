use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{normalize_query, BoundInterval, Ledger, RamseyQuery, Rule};
use crate::error::Result;

/// Limits on the recursive derivation rules. Table lookups and closed-form
/// bounds apply to every query; the recursions only run inside these caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeriveConfig {
    pub max_target: u32,
    pub max_colors: usize,
    /// Upper limit on the number of sub-queries a recursion may touch.
    pub max_closure: u64,
}

impl Default for DeriveConfig {
    fn default() -> Self {
        Self {
            max_target: 30,
            max_colors: 8,
            max_closure: 200_000,
        }
    }
}

/// Memoizing bound derivation over a ledger.
///
/// Every rule bounds a query from strictly smaller ones (smaller target sum
/// or fewer colors), so evaluating queries depth-first with memoization
/// reaches the same fixpoint as iterating the rule set to convergence.
pub struct Deriver<'a> {
    ledger: &'a Ledger,
    config: DeriveConfig,
    memo: HashMap<RamseyQuery, BoundInterval>,
    conflicts: Vec<String>,
}

impl<'a> Deriver<'a> {
    pub fn new(ledger: &'a Ledger) -> Self {
        Self::with_config(ledger, DeriveConfig::default())
    }

    pub fn with_config(ledger: &'a Ledger, config: DeriveConfig) -> Self {
        Self {
            ledger,
            config,
            memo: HashMap::new(),
            conflicts: Vec::new(),
        }
    }

    pub fn ledger(&self) -> &'a Ledger {
        self.ledger
    }

    /// Rule applications that would have produced an empty interval.
    /// Non-empty only for an inconsistent ledger.
    pub fn conflicts(&self) -> &[String] {
        &self.conflicts
    }

    pub fn derive_targets(&mut self, targets: &[u32]) -> Result<BoundInterval> {
        let n = normalize_query(targets)?;
        Ok(self.derive_normalized(n.query, n.value))
    }

    pub fn derive(&mut self, q: &RamseyQuery) -> BoundInterval {
        let n = normalize_query(q.targets()).expect("canonical queries are valid");
        self.derive_normalized(n.query, n.value)
    }

    fn derive_normalized(&mut self, q: RamseyQuery, value: Option<u64>) -> BoundInterval {
        if let Some(v) = value {
            return BoundInterval::exact(v, Rule::Identity);
        }
        if let Some(b) = self.memo.get(&q) {
            return b.clone();
        }
        let mut b = self.ledger.lookup(&q);
        self.closed_form(&q, &mut b);
        if self.within_caps(&q) {
            self.recursion_upper(&q, &mut b);
            self.product_lower(&q, &mut b);
        }
        self.memo.insert(q, b.clone());
        b
    }

    fn within_caps(&self, q: &RamseyQuery) -> bool {
        q.max_target() <= self.config.max_target
            && q.colors() <= self.config.max_colors
            && dominated_count(q.targets()) <= u128::from(self.config.max_closure)
    }

    fn offer_upper(&mut self, q: &RamseyQuery, b: &mut BoundInterval, value: u64, rule: Rule) {
        if value < b.lower {
            self.conflicts.push(format!(
                "{q}: {rule} gives upper {value} below lower {} ({:?})",
                b.lower, b.lower_rules
            ));
            return;
        }
        b.offer_upper(value, rule);
    }

    fn offer_lower(&mut self, q: &RamseyQuery, b: &mut BoundInterval, value: u64, rule: Rule) {
        if let Some(u) = b.upper {
            if value > u {
                self.conflicts.push(format!(
                    "{q}: {rule} gives lower {value} above upper {u} ({:?})",
                    b.upper_rules
                ));
                return;
            }
        }
        b.offer_lower(value, rule);
    }

    fn closed_form(&mut self, q: &RamseyQuery, b: &mut BoundInterval) {
        let t = q.targets();
        if let Some(m) = q.diagonal_size() {
            // Strict exponential bounds: R > x implies R >= floor(x) + 1.
            let base = match t.len() {
                2 => Some((2u128, Rule::TwoColorExponential)),
                3 => Some((3u128, Rule::ThreeColorExponential)),
                _ => None,
            };
            if let Some((base, rule)) = base {
                if m >= 3 {
                    if let Some(v) = base.checked_pow(m).map(|p| p.isqrt() + 1) {
                        if let Ok(v) = u64::try_from(v) {
                            self.offer_lower(q, b, v, rule);
                        }
                    }
                }
            }
        }
        // R(m, 3, ..., 3; s + 1) <= s! m^(s+1)
        if t.len() >= 2 && t[1..].iter().all(|&x| x == 3) {
            let s = (t.len() - 1) as u32;
            let m = u128::from(t[0]);
            let fact = (1..=u128::from(s)).try_fold(1u128, |acc, i| acc.checked_mul(i));
            let v = fact.and_then(|f| m.checked_pow(s + 1).and_then(|p| p.checked_mul(f)));
            if let Some(v) = v.and_then(|v| u64::try_from(v).ok()) {
                self.offer_upper(q, b, v, Rule::StarUpper);
            }
        }
    }

    fn recursion_upper(&mut self, q: &RamseyQuery, b: &mut BoundInterval) {
        let t = q.targets();
        let r = t.len() as u64;
        let mut total: u64 = 2;
        for j in 0..t.len() {
            let Some(term) = self.recursion_term(t, j) else { return };
            let Some(sum) = total.checked_add(term) else { return };
            total = sum;
        }
        if let Some(v) = total.checked_sub(r) {
            let rule = if r == 2 {
                Rule::TwoColorRecursion
            } else {
                Rule::MulticolorRecursion
            };
            self.offer_upper(q, b, v, rule);
        }
    }

    fn recursion_term(&mut self, t: &[u32], j: usize) -> Option<u64> {
        let mut sub = t.to_vec();
        sub[j] -= 1;
        let n = normalize_query(&sub).expect("decremented targets stay >= 1");
        self.derive_normalized(n.query, n.value).upper
    }

    fn product_lower(&mut self, q: &RamseyQuery, b: &mut BoundInterval) {
        let Some(m) = q.diagonal_size() else { return };
        let r = q.colors();
        for a in 1..=r / 2 {
            let la = self.diagonal_lower(m, a);
            let lb = self.diagonal_lower(m, r - a);
            let v = (la - 1).checked_mul(lb - 1).and_then(|p| p.checked_add(1));
            if let Some(v) = v {
                self.offer_lower(q, b, v, Rule::ColorProduct);
            }
        }
    }

    fn diagonal_lower(&mut self, m: u32, colors: usize) -> u64 {
        let n = normalize_query(&vec![m; colors]).expect("m >= 1");
        self.derive_normalized(n.query, n.value).lower
    }
}

impl Ledger {
    /// Tightest interval reachable from the tables and the derivation rules.
    pub fn derive_bounds(&self, q: &RamseyQuery) -> BoundInterval {
        Deriver::new(self).derive(q)
    }

    /// Consistency audit: derives every tabulated query and reports any rule
    /// that would cross a tabulated bound.
    pub fn audit(&self) -> Vec<String> {
        let mut d = Deriver::new(self);
        let mut qs: Vec<_> = self.queries().cloned().collect();
        qs.sort();
        for q in &qs {
            d.derive(q);
        }
        d.conflicts
    }
}

/// Number of non-increasing sequences `x` with `1 <= x_i <= t_i`
/// (`t` non-increasing). Upper estimate of the sub-queries reachable from `t`.
fn dominated_count(t: &[u32]) -> u128 {
    let max = t[0] as usize;
    // ways[v] = sequences so far whose last element is v
    let mut ways = vec![1u128; max + 1];
    ways[0] = 0;
    for &cap in &t[1..] {
        let cap = cap as usize;
        let mut next = vec![0u128; max + 1];
        // suffix sums: next[v] = sum_{w >= v} ways[w]
        let mut acc = 0u128;
        for w in (1..=max).rev() {
            acc = acc.saturating_add(ways[w]);
            if w <= cap {
                next[w] = acc;
            }
        }
        ways = next;
    }
    ways.iter().fold(0u128, |a, &w| a.saturating_add(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn derive(t: &[u32]) -> BoundInterval {
        Deriver::new(&Ledger::builtin()).derive_targets(t).unwrap()
    }

    #[test]
    fn r44_upper_matches_recursion_and_table() {
        let b = derive(&[4, 4]);
        assert!(b.exact);
        assert_eq!(b.lower, 18);
        assert!(b.upper_rules.contains(&Rule::Table1));
        assert!(b.upper_rules.contains(&Rule::TwoColorRecursion));
    }

    #[test]
    fn r333_exact_from_table_and_multicolor_recursion() {
        let b = derive(&[3, 3, 3]);
        assert!(b.exact);
        assert_eq!(b.lower, 17);
        assert_eq!(b.lower_rules, vec![Rule::Table4]);
        assert_eq!(b.upper_rules, vec![Rule::MulticolorRecursion]);
    }

    #[test]
    fn star_upper_rule_value() {
        // Without the recursion only the closed-form rule applies.
        let ledger = Ledger::builtin();
        let cfg = DeriveConfig {
            max_target: 0,
            ..DeriveConfig::default()
        };
        let b = Deriver::with_config(&ledger, cfg).derive_targets(&[6, 3, 3]).unwrap();
        assert_eq!(b.upper, Some(432));
        assert_eq!(b.upper_rules, vec![Rule::StarUpper]);
        let full = derive(&[6, 3, 3]);
        assert!(full.upper.unwrap() <= 432);
    }

    #[test]
    fn exponential_lower_bounds_are_strict_floors() {
        let ledger = Ledger::builtin();
        let cfg = DeriveConfig {
            max_target: 0,
            ..DeriveConfig::default()
        };
        let mut d = Deriver::with_config(&ledger, cfg);
        // 2^(25/2) = 5792.6..
        assert_eq!(d.derive_targets(&[25, 25]).unwrap().lower, 5793);
        // 2^(24/2) = 4096 exactly, strict
        assert_eq!(d.derive_targets(&[24, 24]).unwrap().lower, 4097);
        // 3^(11/2) = 420.8..
        assert_eq!(d.derive_targets(&[11, 11, 11]).unwrap().lower, 421);
    }

    #[test]
    fn color_product_lower_bound() {
        // R_4(3) >= (R_2(3)-1)^2 + 1 = 26, table says 51.
        let b = derive(&[3, 3, 3, 3]);
        assert_eq!(b.lower, 51);
        // R_8(4) has no table entry; best split is (R_2(4)-1)(R_6(4)-1)+1.
        let b = derive(&[4; 8]);
        assert_eq!(b.lower, 17 * 32005 + 1);
        assert_eq!(b.lower_rules, vec![Rule::ColorProduct]);
    }

    #[test]
    fn derived_intervals_never_widen_lookup() {
        let ledger = Ledger::builtin();
        let mut d = Deriver::new(&ledger);
        for q in ledger.queries() {
            let t = ledger.lookup(q);
            let b = d.derive(q);
            assert!(b.lower >= t.lower, "{q}");
            if let Some(u) = t.upper {
                assert!(b.upper.unwrap() <= u, "{q}");
            }
        }
    }

    #[test]
    fn audit_is_clean() {
        assert_eq!(Ledger::builtin().audit(), Vec::<String>::new());
    }

    #[test]
    fn bold_entries_stay_exact() {
        let ledger = Ledger::builtin();
        for q in ledger.queries() {
            if ledger.entries_for(q).iter().any(|e| e.exact) {
                let b = ledger.derive_bounds(q);
                let v = ledger.entries_for(q).iter().find(|e| e.exact).unwrap().lower;
                assert!(b.exact && Some(b.lower) == v, "{q}");
            }
        }
    }

    #[test]
    fn dominated_count_small() {
        assert_eq!(dominated_count(&[2, 2]), 3); // (1,1) (2,1) (2,2)
        assert_eq!(dominated_count(&[3]), 3);
        assert_eq!(dominated_count(&[3, 1]), 3);
    }

    #[test]
    fn caps_disable_recursion() {
        let b = derive(&[31, 31]);
        assert_eq!(b.upper, None);
        assert_eq!(b.lower, 46341); // floor(2^15.5) + 1
    }
}
