use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ramsey::{check_exclusion_conditions, ConditionQuery, Deriver, RamseyQuery, Status};

use super::schedule::ExclusionSchedule;

/// Upper bounds on the copies needed to distinguish any `n` orthogonal
/// `r`-partite product states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub r: usize,
    /// One copy per exclusion of a single state.
    pub walgate: usize,
    /// `ceil(n/4) + 1`.
    pub shu: usize,
    /// `ceil(n/4)`, bipartite only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shu_bipartite: Option<usize>,
    /// `ceil(n/6) + 2`, bipartite only. Cited, not realized by the planner.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_f2: Option<usize>,
    /// `g(n)` of the implemented planner.
    pub scheduler: usize,
    pub best: usize,
}

pub fn bound_report(n: usize, schedule: &ExclusionSchedule) -> Result<BoundReport> {
    let r = schedule.r;
    if n < 2 {
        return Err(Error::InvalidQuery(format!("bounds need n >= 2, got {n}")));
    }
    let walgate = n - 1;
    let shu = n.div_ceil(4) + 1;
    let shu_bipartite = (r == 2).then(|| n.div_ceil(4));
    let paper_f2 = (r == 2).then(|| n.div_ceil(6) + 2);
    let scheduler = schedule.guarantee_copies(n);
    let best = [Some(walgate), Some(shu), shu_bipartite, paper_f2, Some(scheduler)]
        .into_iter()
        .flatten()
        .min()
        .expect("non-empty");
    Ok(BoundReport {
        n,
        r,
        walgate,
        shu,
        shu_bipartite,
        paper_f2,
        scheduler,
        best,
    })
}

/// Default upper end of the `N0` scan.
pub const DEFAULT_SCAN_MAX: u64 = 10_000;

/// Copy-count schedule showing `f_r(N) <= ceil(eps N)` for all large `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    /// Exact value of epsilon as `p/q`.
    pub epsilon: String,
    pub r: usize,
    pub m: u32,
    /// Certified upper bound of `R_r(m)` used in place of its exact value.
    pub threshold_proxy: u64,
    pub q0: u64,
    pub r0: u64,
    pub m_eps: i64,
    /// `(q0 + 1)(m + 1)`: the schedule's bound holds from here on.
    pub start: u64,
    /// First `N >= start` from which the bound is at most `ceil(eps N)`
    /// throughout the scanned range; absent if it fails at `scan_max`.
    pub n0: Option<u64>,
    pub scan_max: u64,
    /// Whether this build certifies the single-copy exclusion of `m + 1`
    /// states that the schedule relies on.
    pub exclusion_status: Status,
}

impl EpsilonSchedule {
    /// `(N div (m+1)) - q0 + ceil((q0+1)(m+1)/4) + 1`.
    pub fn bound(&self, n: u64) -> i64 {
        (n / (u64::from(self.m) + 1)) as i64 + self.m_eps
    }
}

fn ceil_mul(eps: Ratio<u64>, n: u64) -> u64 {
    (eps.numer() * n).div_ceil(*eps.denom())
}

/// Parses a decimal or `p/q` string into an exact positive rational.
pub fn parse_epsilon(text: &str) -> Result<Ratio<u64>> {
    let bad = || Error::InvalidQuery(format!("epsilon {text:?} is not a positive decimal or fraction"));
    let text = text.trim();
    let eps = if let Some((p, q)) = text.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        Ratio::new(p, q)
    } else {
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        if frac.len() > 12 || (int.is_empty() && frac.is_empty()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let p: u64 = digits.parse().map_err(|_| bad())?;
        Ratio::new(p, 10u64.pow(frac.len() as u32))
    };
    if *eps.numer() == 0 {
        return Err(bad());
    }
    Ok(eps)
}

pub fn epsilon_schedule(
    deriver: &mut Deriver<'_>,
    eps: Ratio<u64>,
    r: usize,
    scan_max: u64,
) -> Result<EpsilonSchedule> {
    if *eps.numer() == 0 {
        return Err(Error::InvalidQuery("epsilon must be positive".into()));
    }
    if r < 2 {
        return Err(Error::InvalidQuery(format!("party count r = {r} must be >= 2")));
    }
    // Smallest m with 1/(m+1) < eps is floor(1/eps).
    let m = (eps.denom() / eps.numer()).max(4);
    let m = u32::try_from(m).map_err(|_| Error::Uncertifiable(format!("epsilon {eps} needs m = {m}")))?;
    let q = RamseyQuery::diagonal(m, r)?;
    let base = deriver.derive(&q);
    let threshold_proxy = base
        .upper
        .ok_or_else(|| Error::Uncertifiable(format!("no finite certified upper bound for {q}")))?;
    let width = u64::from(m) + 1;
    let q0 = threshold_proxy / width;
    let r0 = threshold_proxy % width;
    let m_eps = ((q0 + 1) * width).div_ceil(4) as i64 + 1 - q0 as i64;
    let start = (q0 + 1) * width;
    let mut sched = EpsilonSchedule {
        epsilon: eps.to_string(),
        r,
        m,
        threshold_proxy,
        q0,
        r0,
        m_eps,
        start,
        n0: None,
        scan_max,
        exclusion_status: check_exclusion_conditions(deriver, ConditionQuery::new(r, m, m + 1)?)?.status,
    };
    let last_failure = (start..=scan_max)
        .rev()
        .find(|&n| sched.bound(n) > ceil_mul(eps, n) as i64);
    sched.n0 = match last_failure {
        None => Some(start),
        Some(f) if f < scan_max => Some(f + 1),
        Some(_) => None,
    };
    Ok(sched)
}
