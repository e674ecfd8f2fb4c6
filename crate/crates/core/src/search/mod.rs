//! Search engines: minimal UPB sizes, constrained UPB discovery, and the
//! pair-configuration searches behind the extension rule.
//!
//! All searches count expanded nodes against a [`SearchBudget`]. Running out
//! of budget is reported as [`Outcome::Exhausted`]; a search never reports
//! "none" unless its enumeration completed.

mod find;
mod min_upb;
mod pairs;

use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};

pub use find::{find_upb, FindPartial, FindResult, UpbConstraints};
pub use min_upb::{exhaustive_min_upb, paired_layouts, MinUpbPartial, MinUpbResult, MinUpbVerdict};
pub use pairs::{
    pair_config_max_parties, violates_extension_rule, AnchorConstraint, MaxParties, Pair,
    PairSearchOptions, PairSearchPartial, PairSearchResult, PairSystem, Violation,
};

pub type ProgressSink = Arc<dyn Fn(&ProgressEvent) + Send + Sync>;

/// One progress record, emitted every `progress_interval` nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProgressEvent {
    pub search: &'static str,
    pub nodes: u64,
    pub depth: usize,
    pub best: Option<usize>,
}

impl ProgressEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("progress events serialize")
    }
}

/// Limits and seed shared by every search.
#[derive(Clone)]
pub struct SearchBudget {
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
    pub seed: u64,
    /// Node allowance per randomized restart; `None` runs one complete pass.
    pub restart_nodes: Option<u64>,
    pub progress: Option<ProgressSink>,
    pub progress_interval: u64,
}

impl fmt::Debug for SearchBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchBudget")
            .field("node_limit", &self.node_limit)
            .field("time_limit", &self.time_limit)
            .field("seed", &self.seed)
            .field("restart_nodes", &self.restart_nodes)
            .field("progress", &self.progress.is_some())
            .field("progress_interval", &self.progress_interval)
            .finish()
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            node_limit: u64::MAX,
            time_limit: None,
            seed: 0,
            restart_nodes: None,
            progress: None,
            progress_interval: 1 << 20,
        }
    }
}

impl SearchBudget {
    pub fn with_node_limit(mut self, n: u64) -> Self {
        self.node_limit = n;
        self
    }

    pub fn with_time_limit(mut self, t: Duration) -> Self {
        self.time_limit = Some(t);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restart_nodes(mut self, n: u64) -> Self {
        self.restart_nodes = Some(n);
        self
    }

    pub fn with_progress(mut self, sink: ProgressSink, interval: u64) -> Self {
        self.progress = Some(sink);
        self.progress_interval = interval.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_limit == 0 {
            return Err(Error::Parameter("node limit must be positive".into()));
        }
        if self.time_limit.is_some_and(|t| t.is_zero()) {
            return Err(Error::Parameter("time limit must be positive".into()));
        }
        if self.restart_nodes == Some(0) {
            return Err(Error::Parameter(
                "restart allowance must be positive".into(),
            ));
        }
        if self.progress_interval == 0 {
            return Err(Error::Parameter(
                "progress interval must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a search that may run out of budget.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<T, P> {
    Complete(T),
    Exhausted(P),
}

impl<T, P> Outcome<T, P> {
    pub fn complete(self) -> Option<T> {
        match self {
            Outcome::Complete(t) => Some(t),
            Outcome::Exhausted(_) => None,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Outcome::Exhausted(_))
    }
}

/// Raised through the search recursion when the budget runs out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Stopped;

const NO_BEST: usize = usize::MAX;

/// Shared node counter and stop flag.
pub(crate) struct Meter<'a> {
    budget: &'a SearchBudget,
    search: &'static str,
    start: Instant,
    limit: u64,
    nodes: AtomicU64,
    stopped: AtomicBool,
    best: AtomicUsize,
}

impl<'a> Meter<'a> {
    pub(crate) fn new(budget: &'a SearchBudget, search: &'static str) -> Self {
        Self::with_limit(budget, search, budget.node_limit)
    }

    pub(crate) fn with_limit(budget: &'a SearchBudget, search: &'static str, limit: u64) -> Self {
        Meter {
            budget,
            search,
            start: Instant::now(),
            limit,
            nodes: AtomicU64::new(0),
            stopped: AtomicBool::new(false),
            best: AtomicUsize::new(NO_BEST),
        }
    }

    pub(crate) fn tick(&self, depth: usize) -> std::result::Result<(), Stopped> {
        if self.stopped.load(Ordering::Relaxed) {
            return Err(Stopped);
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.limit {
            self.stopped.store(true, Ordering::Relaxed);
            return Err(Stopped);
        }
        if n.is_multiple_of(1024) {
            if let Some(t) = self.budget.time_limit {
                if self.start.elapsed() >= t {
                    self.stopped.store(true, Ordering::Relaxed);
                    return Err(Stopped);
                }
            }
        }
        if let Some(sink) = &self.budget.progress {
            if n.is_multiple_of(self.budget.progress_interval) {
                let best = self.best.load(Ordering::Relaxed);
                sink(&ProgressEvent {
                    search: self.search,
                    nodes: n,
                    depth,
                    best: (best != NO_BEST).then_some(best),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn record_best(&self, value: usize) {
        let _ = self
            .best
            .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |b| {
                (b == NO_BEST || value > b).then_some(value)
            });
    }

    pub(crate) fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed).min(self.limit)
    }

    pub(crate) fn stopped(&self) -> bool {
        self.stopped.load(Ordering::Relaxed)
    }
}

/// Whether some selection of at most one region per party, using the
/// `must` party, covers at least `target` more vertices than parties used.
///
/// Regions are vertex bitmasks. Regions of size one never raise the
/// difference, so only larger regions are tried.
pub(crate) fn rule_holds_with(parties: &[Vec<u64>], must: usize, target: i64) -> bool {
    if target <= 0 {
        return true;
    }
    let gains: Vec<i64> = parties
        .iter()
        .map(|regions| {
            regions
                .iter()
                .map(|m| m.count_ones() as i64 - 1)
                .max()
                .unwrap_or(0)
                .max(0)
        })
        .collect();
    let order: Vec<usize> = std::iter::once(must)
        .chain((0..parties.len()).filter(|&j| j != must))
        .collect();
    let mut suffix = vec![0i64; order.len() + 1];
    for t in (0..order.len()).rev() {
        suffix[t] = suffix[t + 1] + gains[order[t]];
    }
    fn go(
        parties: &[Vec<u64>],
        order: &[usize],
        suffix: &[i64],
        t: usize,
        covered: u64,
        value: i64,
        target: i64,
    ) -> bool {
        if value >= target {
            return true;
        }
        if t == order.len() || value + suffix[t] < target {
            return false;
        }
        for &m in &parties[order[t]] {
            if m.count_ones() < 2 {
                continue;
            }
            let fresh = (m & !covered).count_ones() as i64;
            if fresh >= 2
                && go(
                    parties,
                    order,
                    suffix,
                    t + 1,
                    covered | m,
                    value + fresh - 1,
                    target,
                )
            {
                return true;
            }
        }
        t > 0 && go(parties, order, suffix, t + 1, covered, value, target)
    }
    go(parties, &order, &suffix, 0, 0, 0, target)
}

/// Index of edge `(a, b)`, `a < b`, in a packed `u128` over `s <= 16` states.
#[inline]
pub(crate) fn edge_bit(s: usize, a: usize, b: usize) -> u128 {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let idx = a * (2 * s - a - 1) / 2 + (b - a - 1);
    1u128 << idx
}

pub(crate) fn full_edges(s: usize) -> u128 {
    let n = s * s.saturating_sub(1) / 2;
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Edge mask of a complete bipartite block between two vertex masks.
pub(crate) fn block_edges(s: usize, a: u64, b: u64) -> u128 {
    let mut out = 0;
    for x in bits(a) {
        for y in bits(b) {
            out |= edge_bit(s, x, y);
        }
    }
    out
}

pub(crate) fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            v
        })
    })
}

/// Largest state count the bitmask edge sets support.
pub const MAX_SEARCH_STATES: usize = 16;
