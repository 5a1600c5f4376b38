use crate::cliques::{mono_max_clique_in, orthogonality_summary};
use crate::error::{Error, Result};
use crate::ramsey::{CertificationVerdict, Status};
use crate::simulate::born::survivors_after;
use crate::states::{extract_coloring, EdgeColoring, ProductStateSet};

use super::tree::{MeasurementSpec, Node, ProtocolTree, Target};

/// Cap on explored subtrees per synthesized tree.
const SEARCH_BUDGET: usize = 1_000_000;

/// Single-copy exclusion search.
///
/// Each node measures a maximum canonical clique among the live candidates in
/// a subsystem not yet measured on this copy. Outcome `i` makes `i` the
/// anchor of the child: besides the plain maximum clique, the child also
/// tries the best clique avoiding the anchor, which keeps a later pair
/// measurement against the anchor available.
pub(crate) struct Synth<'a> {
    s: &'a ProductStateSet,
    coloring: &'a EdgeColoring,
    copy: usize,
    total: usize,
    k: usize,
    budget: usize,
}

impl<'a> Synth<'a> {
    pub(crate) fn new(s: &'a ProductStateSet, coloring: &'a EdgeColoring, copy: usize, total: usize, k: usize) -> Self {
        Self {
            s,
            coloring,
            copy,
            total,
            k,
            budget: SEARCH_BUDGET,
        }
    }

    pub(crate) fn run(&mut self, candidates: &[usize]) -> Result<Node> {
        match self.build(candidates.to_vec(), 0, None)? {
            Some(node) => Ok(node),
            None => Err(Error::InternalConsistency(format!(
                "no single-copy tree excludes {} of {} candidates",
                self.k, self.total
            ))),
        }
    }

    fn choices(&self, alive: &[usize], used: u32, anchor: Option<usize>) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for j in (0..self.s.parties()).filter(|j| used & (1 << j) == 0) {
            let clique = mono_max_clique_in(self.coloring, j, alive);
            if let Some(a) = anchor.filter(|a| clique.contains(a)) {
                let rest: Vec<usize> = alive.iter().copied().filter(|&x| x != a).collect();
                let other = mono_max_clique_in(self.coloring, j, &rest);
                if other.len() >= 2 {
                    out.push((j, other));
                }
            }
            if clique.len() >= 2 {
                out.push((j, clique));
            }
        }
        // Larger cliques first; the plain clique precedes the anchor-avoiding
        // one of equal size, then lower subsystems.
        out.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
        out
    }

    fn build(&mut self, alive: Vec<usize>, used: u32, anchor: Option<usize>) -> Result<Option<Node>> {
        if self.budget == 0 {
            return Err(Error::Resource("exclusion tree search budget exhausted".into()));
        }
        self.budget -= 1;
        if self.total - alive.len() >= self.k || alive.len() <= 1 {
            return Ok(Some(Node::leaf(alive)));
        }
        'choice: for (j, clique) in self.choices(&alive, used, anchor) {
            let spec = MeasurementSpec {
                copy: self.copy,
                subsystem: j,
                projectors: clique,
            };
            let outcomes = spec.outcomes();
            let mut children = Vec::with_capacity(outcomes.len());
            for (idx, o) in outcomes.iter().enumerate() {
                let next = survivors_after(self.s, &alive, j, &spec.projectors, idx);
                let child_anchor = match o {
                    super::Outcome::Candidate(i) => Some(*i),
                    super::Outcome::Rest => None,
                };
                match self.build(next, used | (1 << j), child_anchor)? {
                    Some(c) => children.push(c),
                    None => continue 'choice,
                }
            }
            return Ok(Some(Node::Measure { spec, children }));
        }
        Ok(None)
    }
}

/// Single-copy tree excluding at least `k` of `candidates` on every branch.
pub(crate) fn exclusion_tree(
    s: &ProductStateSet,
    coloring: &EdgeColoring,
    candidates: &[usize],
    k: usize,
    copy: usize,
) -> Result<Node> {
    Synth::new(s, coloring, copy, candidates.len(), k).run(candidates)
}

fn checked_coloring(s: &ProductStateSet) -> Result<EdgeColoring> {
    s.validate().into_result()?;
    extract_coloring(s)
}

/// Tree realizing a certified single-copy exclusion of `k` states.
pub fn synthesize_exclusion(s: &ProductStateSet, k: usize, cert: &CertificationVerdict) -> Result<ProtocolTree> {
    let q = cert.query;
    if cert.status != Status::Certified {
        return Err(Error::NotCertified(format!(
            "(r={}, m={}, k={}) is {:?}",
            q.r, q.m, q.k, cert.status
        )));
    }
    if q.r != s.parties() {
        return Err(Error::NotCertified(format!(
            "certificate is for {} parties, set has {}",
            q.r,
            s.parties()
        )));
    }
    if k == 0 || k > q.k as usize {
        return Err(Error::NotCertified(format!("target k = {k} outside 1..={}", q.k)));
    }
    let threshold = cert.certified_threshold.unwrap_or(u64::MAX);
    if (s.len() as u64) < threshold {
        return Err(Error::NotCertified(format!(
            "set has {} states, certificate needs at least {threshold}",
            s.len()
        )));
    }
    let coloring = checked_coloring(s)?;
    let candidates: Vec<usize> = (0..s.len()).collect();
    let root = exclusion_tree(s, &coloring, &candidates, k, 1)?;
    Ok(ProtocolTree {
        candidates,
        target: Target::Exclude(k),
        copies_used: 1,
        root,
    })
}

/// Exclusion of `M` states, `M` the largest monochromatic clique, or outright
/// identification when the whole set is one clique.
pub fn greedy_exclusion(s: &ProductStateSet) -> Result<ProtocolTree> {
    if s.len() < 2 {
        return Err(Error::TrivialInput(format!("{} state(s); nothing to exclude", s.len())));
    }
    let coloring = checked_coloring(s)?;
    let m = orthogonality_summary(&coloring).overall;
    let n = s.len();
    let (target, k) = if m >= n {
        (Target::Identify, n - 1)
    } else {
        (Target::Exclude(m), m)
    };
    let candidates: Vec<usize> = (0..n).collect();
    let root = exclusion_tree(s, &coloring, &candidates, k, 1)?;
    Ok(ProtocolTree {
        candidates,
        target,
        copies_used: 1,
        root,
    })
}
