//! Exhaustive Born-rule verification of protocol trees and strategies.

pub(crate) mod born;

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{Node, Outcome, ProtocolTree, Strategy};
use crate::states::ProductStateSet;

pub use born::{outcome_distribution, OutcomeDistribution};
use born::{probabilities, zero_probability};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub copy: usize,
    pub subsystem: usize,
    pub outcome: Outcome,
    /// Probability of this outcome for the true candidate.
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Exclusion { k: usize },
    Identification,
}

/// Worst branch seen for one true candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub truth: usize,
    pub paths: u64,
    pub worst_path: Vec<Step>,
    pub worst_survivors: Vec<usize>,
    /// Exclusion mode: fewest candidates excluded on any branch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_excluded: Option<usize>,
    /// Identification mode: most copies consumed on any branch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_copies: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub truth: usize,
    pub path: Vec<Step>,
    pub survivors: Vec<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(flatten)]
    pub mode: Mode,
    pub candidates: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    /// Identification mode: copies consumed in the worst case, and the
    /// strategy's declared bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_copies: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared_copies: Option<usize>,
    pub per_candidate: Vec<CandidateResult>,
}

fn merge_counterexample(results: &[std::result::Result<CandidateResult, Counterexample>]) -> Option<Counterexample> {
    results.iter().find_map(|r| r.as_ref().err().cloned())
}

/// Survivors after one outcome, plus the truth's probability of it.
fn branch(
    s: &ProductStateSet,
    truth: usize,
    alive: &[usize],
    j: usize,
    projectors: &[usize],
    idx: usize,
) -> (f64, Vec<usize>) {
    let eps = zero_probability(s);
    let p = probabilities(s, truth, j, projectors)[idx];
    let next = alive
        .iter()
        .copied()
        .filter(|&x| probabilities(s, x, j, projectors)[idx] > eps)
        .collect();
    (p, next)
}

fn check_leaf(truth: usize, alive: &[usize], recorded: &[usize]) -> std::result::Result<(), String> {
    if !alive.contains(&truth) {
        return Err(format!("true state {truth} was excluded"));
    }
    if let Some(x) = alive.iter().find(|x| !recorded.contains(x)) {
        return Err(format!("leaf drops candidate {x}, which is still possible"));
    }
    Ok(())
}

struct ExclusionWalk<'a> {
    s: &'a ProductStateSet,
    truth: usize,
    total: usize,
    k: usize,
    paths: u64,
    worst: Option<(usize, Vec<Step>, Vec<usize>)>,
}

impl ExclusionWalk<'_> {
    fn walk(
        &mut self,
        node: &Node,
        alive: Vec<usize>,
        path: &mut Vec<Step>,
    ) -> std::result::Result<(), Counterexample> {
        match node {
            Node::Leaf { survivors, .. } => {
                self.paths += 1;
                let fail = |reason: String| Counterexample {
                    truth: self.truth,
                    path: path.clone(),
                    survivors: survivors.clone(),
                    reason,
                };
                check_leaf(self.truth, &alive, survivors).map_err(fail)?;
                let excluded = self.total.saturating_sub(survivors.len());
                if excluded < self.k {
                    return Err(fail(format!("excludes {excluded} of {}, needs {}", self.total, self.k)));
                }
                if self.worst.as_ref().is_none_or(|w| excluded < w.0) {
                    self.worst = Some((excluded, path.clone(), survivors.clone()));
                }
                Ok(())
            }
            Node::Measure { spec, children } => {
                let eps = zero_probability(self.s);
                for (idx, (o, child)) in spec.outcomes().into_iter().zip(children).enumerate() {
                    let (p, next) = branch(self.s, self.truth, &alive, spec.subsystem, &spec.projectors, idx);
                    if p <= eps {
                        continue;
                    }
                    path.push(Step {
                        copy: spec.copy,
                        subsystem: spec.subsystem,
                        outcome: o,
                        probability: p,
                    });
                    self.walk(child, next, path)?;
                    path.pop();
                }
                Ok(())
            }
        }
    }
}

/// Checks that every positive-probability branch of `tree` excludes at least
/// `k` candidates, for every true candidate.
pub fn verify_exclusion(tree: &ProtocolTree, s: &ProductStateSet, k: usize) -> Result<VerificationReport> {
    tree.check_structure(Some(s))?;
    let total = tree.candidates.len();
    let results: Vec<_> = tree
        .candidates
        .par_iter()
        .map(|&truth| {
            let mut w = ExclusionWalk {
                s,
                truth,
                total,
                k,
                paths: 0,
                worst: None,
            };
            w.walk(&tree.root, tree.candidates.clone(), &mut Vec::new())?;
            let (excluded, path, survivors) = w.worst.unwrap_or_default();
            Ok(CandidateResult {
                truth,
                paths: w.paths,
                worst_path: path,
                worst_survivors: survivors,
                min_excluded: Some(excluded),
                max_copies: None,
            })
        })
        .collect();
    let counterexample = merge_counterexample(&results);
    Ok(VerificationReport {
        mode: Mode::Exclusion { k },
        candidates: total,
        pass: counterexample.is_none(),
        counterexample,
        max_copies: None,
        declared_copies: None,
        per_candidate: results.into_iter().filter_map(|r| r.ok()).collect(),
    })
}

/// Worst continuation from a stage: copies used and the path taken.
type Worst = (usize, Vec<Step>, Vec<usize>);

struct IdentifyWalk<'a> {
    s: &'a ProductStateSet,
    strategy: &'a Strategy,
    truth: usize,
    paths: u64,
    memo: HashMap<(usize, Vec<usize>, usize), Worst>,
}

impl IdentifyWalk<'_> {
    fn stage(&mut self, id: usize, alive: Vec<usize>, copy: usize) -> std::result::Result<Worst, Counterexample> {
        let key = (id, alive, copy);
        if let Some(w) = self.memo.get(&key) {
            return Ok(w.clone());
        }
        let tree = &self.strategy.stages[id].tree;
        let w = self.node(tree, key.1.clone(), copy)?;
        self.memo.insert(key, w.clone());
        Ok(w)
    }

    fn node(&mut self, node: &Node, alive: Vec<usize>, copy: usize) -> std::result::Result<Worst, Counterexample> {
        let truth = self.truth;
        let fail = move |path: Vec<Step>, survivors: Vec<usize>, reason: String| Counterexample {
            truth,
            path,
            survivors,
            reason,
        };
        match node {
            Node::Leaf { survivors, next } => {
                check_leaf(self.truth, &alive, survivors).map_err(|r| fail(vec![], alive.clone(), r))?;
                match next {
                    Some(id) if alive.len() > 1 => self.stage(*id, alive, copy + 1),
                    _ => {
                        self.paths += 1;
                        if alive != [self.truth] {
                            return Err(fail(vec![], alive, "strategy ends without a unique survivor".into()));
                        }
                        Ok((copy, vec![], alive))
                    }
                }
            }
            Node::Measure { spec, children } => {
                let eps = zero_probability(self.s);
                let mut worst: Option<Worst> = None;
                for (idx, (o, child)) in spec.outcomes().into_iter().zip(children).enumerate() {
                    let (p, next) = branch(self.s, self.truth, &alive, spec.subsystem, &spec.projectors, idx);
                    if p <= eps {
                        continue;
                    }
                    let step = Step {
                        copy,
                        subsystem: spec.subsystem,
                        outcome: o,
                        probability: p,
                    };
                    let (c, mut path, surv) = self.node(child, next, copy).map_err(|mut ce| {
                        ce.path.insert(0, step.clone());
                        ce
                    })?;
                    path.insert(0, step);
                    if worst.as_ref().is_none_or(|w| c > w.0) {
                        worst = Some((c, path, surv));
                    }
                }
                worst.ok_or_else(|| fail(vec![], alive, "no outcome has positive probability".into()))
            }
        }
    }
}

/// Checks that `strategy` ends with exactly the true state on every
/// positive-probability execution, within its declared copy budget.
pub fn verify_identification(strategy: &Strategy, s: &ProductStateSet) -> Result<VerificationReport> {
    if strategy.n != s.len() {
        return Err(Error::InvalidTree(format!(
            "strategy is for {} states, set has {}",
            strategy.n,
            s.len()
        )));
    }
    for st in &strategy.stages {
        st.tree.check_structure(&st.candidates, Some(s))?;
        if st.tree.max_copy() > 1 {
            return Err(Error::InvalidTree(format!("stage {} spans more than one copy", st.id)));
        }
        let mut bad_link = None;
        for leaf in st.tree.leaves() {
            if let Node::Leaf { next: Some(id), .. } = leaf {
                if *id >= strategy.stages.len() {
                    bad_link = Some(*id);
                }
            }
        }
        if let Some(id) = bad_link {
            return Err(Error::InvalidTree(format!(
                "stage {} links to missing stage {id}",
                st.id
            )));
        }
    }
    if strategy.root >= strategy.stages.len() {
        return Err(Error::InvalidTree("root stage missing".into()));
    }
    let declared = strategy.worst_case_copies;
    let results: Vec<_> = (0..s.len())
        .into_par_iter()
        .map(|truth| {
            let mut w = IdentifyWalk {
                s,
                strategy,
                truth,
                paths: 0,
                memo: HashMap::new(),
            };
            let (copies, path, survivors) = w.stage(strategy.root, (0..s.len()).collect(), 1)?;
            if copies > declared {
                return Err(Counterexample {
                    truth,
                    path,
                    survivors,
                    reason: format!("uses {copies} copies, declared at most {declared}"),
                });
            }
            Ok(CandidateResult {
                truth,
                paths: w.paths,
                worst_path: path,
                worst_survivors: survivors,
                min_excluded: None,
                max_copies: Some(copies),
            })
        })
        .collect();
    let counterexample = merge_counterexample(&results);
    let per_candidate: Vec<CandidateResult> = results.into_iter().filter_map(|r| r.ok()).collect();
    Ok(VerificationReport {
        mode: Mode::Identification,
        candidates: s.len(),
        pass: counterexample.is_none(),
        counterexample,
        max_copies: per_candidate.iter().filter_map(|c| c.max_copies).max(),
        declared_copies: Some(declared),
        per_candidate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub copy: usize,
    pub subsystem: usize,
    pub projectors: Vec<usize>,
    pub outcome: Outcome,
    pub probability: f64,
    pub survivors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub truth: usize,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    pub copies_used: usize,
    pub identified: Option<usize>,
}

/// One sampled execution of `strategy` with the state fixed to `truth`.
pub fn run_trace(strategy: &Strategy, s: &ProductStateSet, truth: usize, seed: u64) -> Result<TraceRecord> {
    if truth >= s.len() || strategy.n != s.len() {
        return Err(Error::InvalidQuery(format!(
            "truth {truth} invalid for a strategy over {} states",
            strategy.n
        )));
    }
    let eps = zero_probability(s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alive: Vec<usize> = (0..s.len()).collect();
    let mut steps = Vec::new();
    let mut stage = Some(strategy.root);
    let mut copy = 0;
    while let Some(id) = stage.take() {
        copy += 1;
        let mut node = &strategy
            .stages
            .get(id)
            .ok_or_else(|| Error::InvalidTree(format!("missing stage {id}")))?
            .tree;
        loop {
            match node {
                Node::Leaf { next, .. } => {
                    if alive.len() > 1 {
                        stage = *next;
                    }
                    break;
                }
                Node::Measure { spec, children } => {
                    let probs = probabilities(s, truth, spec.subsystem, &spec.projectors);
                    let weights: Vec<f64> = probs.iter().map(|&p| if p > eps { p } else { 0.0 }).collect();
                    let idx = WeightedIndex::new(&weights)
                        .map_err(|e| Error::InvalidMeasurement(format!("no possible outcome: {e}")))?
                        .sample(&mut rng);
                    alive.retain(|&x| probabilities(s, x, spec.subsystem, &spec.projectors)[idx] > eps);
                    steps.push(TraceStep {
                        copy,
                        subsystem: spec.subsystem,
                        projectors: spec.projectors.clone(),
                        outcome: spec.outcomes()[idx],
                        probability: probs[idx],
                        survivors: alive.clone(),
                    });
                    node = &children[idx];
                }
            }
        }
    }
    Ok(TraceRecord {
        truth,
        seed,
        steps,
        copies_used: copy,
        identified: (alive.len() == 1).then(|| alive[0]),
    })
}
