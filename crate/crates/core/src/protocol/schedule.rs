use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ramsey::{check_exclusion_conditions, ConditionQuery, Deriver, RamseyQuery, Status};
use crate::states::{extract_coloring, EdgeColoring, ProductStateSet};

use super::synth::exclusion_tree;
use super::tree::{Node, ProtocolTree, Target};

/// Largest certified threshold collected by default.
pub const DEFAULT_MAX_THRESHOLD: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageSource {
    /// Certified by the exclusion inequalities.
    Theorem,
    /// Maximum-clique exclusion, available from 3 states.
    Greedy,
    /// Two states told apart on a witness subsystem.
    Pairwise,
}

/// Any set of at least `threshold` states admits a single-copy exclusion of `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub threshold: usize,
    pub k: usize,
    pub source: StageSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

/// Every single-copy exclusion this build can guarantee for `r` parties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionSchedule {
    pub r: usize,
    pub ledger_version: String,
    pub entries: Vec<ScheduleEntry>,
}

/// Certified `(threshold, k)` pairs with threshold up to `max_threshold`,
/// plus the greedy `(3, 2)` and pairwise `(2, 1)` stages.
pub fn exclusion_schedule(deriver: &mut Deriver<'_>, r: usize, max_threshold: u64) -> Result<ExclusionSchedule> {
    if r < 2 {
        return Err(Error::InvalidQuery(format!("party count r = {r} must be >= 2")));
    }
    let mut entries = vec![
        ScheduleEntry {
            threshold: 2,
            k: 1,
            source: StageSource::Pairwise,
            m: None,
        },
        ScheduleEntry {
            threshold: 3,
            k: 2,
            source: StageSource::Greedy,
            m: None,
        },
    ];
    for m in 2u32.. {
        let base = deriver.derive(&RamseyQuery::diagonal(m, r)?);
        let Some(upper) = base.upper.filter(|&u| u <= max_threshold) else {
            break;
        };
        for k in m..upper as u32 {
            let v = check_exclusion_conditions(deriver, ConditionQuery::new(r, m, k)?)?;
            if v.status == Status::Certified {
                entries.push(ScheduleEntry {
                    threshold: upper as usize,
                    k: k as usize,
                    source: StageSource::Theorem,
                    m: Some(m),
                });
            }
            if v.witness[0].refuted {
                break;
            }
        }
    }
    entries.sort_by_key(|e| (e.threshold, e.k));
    Ok(ExclusionSchedule {
        r,
        ledger_version: deriver.ledger().version().to_string(),
        entries,
    })
}

/// One step of the worst-case trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyStage {
    pub remaining: usize,
    pub exclude: usize,
    pub source: StageSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopySchedule {
    pub n: usize,
    pub stages: Vec<CopyStage>,
    pub worst_case_copies: usize,
}

impl ExclusionSchedule {
    /// Largest exclusion applicable to `n` states (earliest entry on ties).
    pub fn stage_at(&self, n: usize) -> Option<&ScheduleEntry> {
        self.entries
            .iter()
            .filter(|e| e.threshold <= n)
            .fold(None, |best: Option<&ScheduleEntry>, e| match best {
                Some(b) if b.k >= e.k => Some(b),
                _ => Some(e),
            })
    }

    /// `g(n)` for `n = 0..=max`: `g(1) = 0` and
    /// `g(n) = 1 + min { g(w) : n - e(n) <= w < n }`, since excluding at
    /// least `e(n)` states also excludes at least any smaller number.
    pub fn guarantee_table(&self, max: usize) -> Vec<usize> {
        self.table(max).0
    }

    /// `g` together with the reduction `n - w` attaining the minimum
    /// (the largest one on ties).
    fn table(&self, max: usize) -> (Vec<usize>, Vec<usize>) {
        let mut g = vec![0; max + 1];
        let mut step = vec![0; max + 1];
        for n in 2..=max {
            let e = self.stage_at(n).expect("pairwise stage covers n >= 2").k;
            let w = (n - e..n).min_by_key(|&w| g[w]).expect("e >= 1");
            g[n] = 1 + g[w];
            step[n] = n - w;
        }
        (g, step)
    }

    pub fn guarantee_copies(&self, n: usize) -> usize {
        self.guarantee_table(n)[n]
    }

    pub fn copy_schedule(&self, n: usize) -> CopySchedule {
        let (_, step) = self.table(n);
        let mut stages = Vec::new();
        let mut left = n;
        while left > 1 {
            let e = self.stage_at(left).expect("pairwise stage covers n >= 2");
            stages.push(CopyStage {
                remaining: left,
                exclude: step[left],
                source: e.source,
            });
            left -= step[left];
        }
        CopySchedule {
            n,
            worst_case_copies: stages.len(),
            stages,
        }
    }
}

/// Convenience wrapper building the schedule from `deriver`.
pub fn guarantee_copies(deriver: &mut Deriver<'_>, n: usize, r: usize) -> Result<usize> {
    if n <= 1 {
        return Ok(0);
    }
    Ok(exclusion_schedule(deriver, r, DEFAULT_MAX_THRESHOLD)?.guarantee_copies(n))
}

/// One copy's worth of measurements in a distinguishing strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub id: usize,
    /// Candidates still possible on entry.
    pub survivors: Vec<usize>,
    /// Size guaranteed by the previous stage; `survivors.len() <= bound`.
    pub bound: usize,
    /// Survivors padded with already-excluded states up to the size whose
    /// schedule is used.
    pub candidates: Vec<usize>,
    pub exclude: usize,
    pub source: StageSource,
    /// Single-copy tree with copy index 1; leaves link to follow-up stages.
    pub tree: Node,
}

/// Adaptive multi-copy strategy: a DAG of single-copy stages, each run on a
/// fresh copy, until one candidate survives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub n: usize,
    pub parties: usize,
    pub worst_case_copies: usize,
    pub schedule: CopySchedule,
    pub root: usize,
    pub stages: Vec<Stage>,
}

impl Strategy {
    /// Unrolls the DAG into one multi-copy tree; `None` if it would exceed
    /// `max_nodes`.
    pub fn expand(&self, max_nodes: usize) -> Option<ProtocolTree> {
        let mut budget = max_nodes;
        let root = self.expand_stage(self.root, 1, &mut budget)?;
        Some(ProtocolTree {
            candidates: (0..self.n).collect(),
            target: Target::Identify,
            copies_used: root.max_copy(),
            root,
        })
    }

    fn expand_stage(&self, id: usize, copy: usize, budget: &mut usize) -> Option<Node> {
        self.expand_node(&self.stages[id].tree, copy, budget)
    }

    fn expand_node(&self, node: &Node, copy: usize, budget: &mut usize) -> Option<Node> {
        *budget = budget.checked_sub(1)?;
        match node {
            Node::Leaf { next: Some(id), .. } => self.expand_stage(*id, copy + 1, budget),
            Node::Leaf { survivors, .. } => Some(Node::leaf(survivors.clone())),
            Node::Measure { spec, children } => {
                let mut spec = spec.clone();
                spec.copy = copy;
                let children = children
                    .iter()
                    .map(|c| self.expand_node(c, copy, budget))
                    .collect::<Option<_>>()?;
                Some(Node::Measure { spec, children })
            }
        }
    }
}

struct Planner<'a> {
    s: &'a ProductStateSet,
    coloring: EdgeColoring,
    schedule: &'a ExclusionSchedule,
    g: Vec<usize>,
    step: Vec<usize>,
    stages: Vec<Option<Stage>>,
    memo: HashMap<(Vec<usize>, usize), usize>,
}

impl Planner<'_> {
    fn stage_for(&mut self, survivors: Vec<usize>, bound: usize) -> Result<usize> {
        let key = (survivors, bound);
        if let Some(&id) = self.memo.get(&key) {
            return Ok(id);
        }
        let (survivors, bound) = key;
        let n = survivors.len();
        // g is not monotone: a smaller survivor set may need more copies than
        // a larger one, so pad up to the cheapest size within the bound.
        let v = (n..=bound).min_by_key(|&v| (self.g[v], v)).expect("n <= bound");
        let mut candidates = survivors.clone();
        candidates.extend(
            (0..self.s.len())
                .filter(|x| survivors.binary_search(x).is_err())
                .take(v - n),
        );
        candidates.sort_unstable();
        let entry = self.schedule.stage_at(v).expect("v >= 2").clone();
        let mut tree = exclusion_tree(self.s, &self.coloring, &candidates, entry.k, 1)?;

        let id = self.stages.len();
        self.stages.push(None);
        self.memo.insert((survivors.clone(), bound), id);
        let next_bound = v - self.step[v];
        self.link(&mut tree, &survivors, next_bound)?;
        self.stages[id] = Some(Stage {
            id,
            survivors,
            bound,
            candidates,
            exclude: entry.k,
            source: entry.source,
            tree,
        });
        Ok(id)
    }

    fn link(&mut self, node: &mut Node, survivors: &[usize], next_bound: usize) -> Result<()> {
        match node {
            Node::Measure { children, .. } => {
                for c in children {
                    self.link(c, survivors, next_bound)?;
                }
                Ok(())
            }
            Node::Leaf { survivors: leaf, next } => {
                let real: Vec<usize> = leaf
                    .iter()
                    .copied()
                    .filter(|x| survivors.binary_search(x).is_ok())
                    .collect();
                if real.len() > next_bound {
                    return Err(Error::InternalConsistency(format!(
                        "stage leaf keeps {} candidates, more than its bound {next_bound}",
                        real.len()
                    )));
                }
                if real.len() >= 2 {
                    *next = Some(self.stage_for(real, next_bound)?);
                }
                Ok(())
            }
        }
    }
}

/// Adaptive strategy identifying the state with at most `g(N)` copies.
pub fn plan_distinguish(s: &ProductStateSet, schedule: &ExclusionSchedule) -> Result<Strategy> {
    let n = s.len();
    if n < 2 {
        return Err(Error::TrivialInput(format!("{n} state(s); nothing to distinguish")));
    }
    if schedule.r != s.parties() {
        return Err(Error::InvalidQuery(format!(
            "schedule is for {} parties, set has {}",
            schedule.r,
            s.parties()
        )));
    }
    s.validate().into_result()?;
    let coloring = extract_coloring(s)?;
    let (g, step) = schedule.table(n);
    let mut planner = Planner {
        s,
        coloring,
        schedule,
        g,
        step,
        stages: Vec::new(),
        memo: HashMap::new(),
    };
    let root = planner.stage_for((0..n).collect(), n)?;
    let stages = planner
        .stages
        .into_iter()
        .map(|st| st.expect("every reserved stage is filled"))
        .collect();
    Ok(Strategy {
        n,
        parties: s.parties(),
        worst_case_copies: planner.g[n],
        schedule: schedule.copy_schedule(n),
        root,
        stages,
    })
}
