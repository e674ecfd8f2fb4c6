//! Backtracking search for a UPB with a given number of states and parties.
//!
//! The search runs in two phases. Whether a configuration is extendible
//! depends only on each party's regions, not on how they are paired, so the
//! first phase picks region partitions that keep every selection of `i`
//! parties below `i + (s - p)` covered states and that could still produce
//! enough edges. The second phase pairs the regions of each party so that
//! the edges cover the complete graph. Both phases are exhaustive; seeded
//! shuffles of the candidate order give randomized restarts.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    bits, block_edges, rule_holds_with, Meter, Outcome, SearchBudget, Stopped, MAX_SEARCH_STATES,
};
use crate::constructions::{verify_certificate, Certificate, Provenance, VerifyOptions};
use crate::error::{Error, Result};
use crate::model::{max_party_edges, Configuration, PartyLayout, RegionSizeProfile};
use crate::states::SymbolicAssignment;

/// Structural limits on every party's regions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UpbConstraints {
    /// Largest allowed region.
    pub max_region_size: Option<usize>,
    /// Most regions of size two on any one party.
    pub max_two_regions: Option<usize>,
    /// `(value, count)`: exactly `count` parties have `value` regions of
    /// size two.
    pub two_region_parties: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FindResult {
    Found(Certificate),
    /// The complete search space holds no UPB.
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FindPartial {
    pub nodes: u64,
    pub restarts: u64,
}

/// A candidate region partition for one party.
#[derive(Clone, Debug)]
struct Partition {
    regions: Vec<u64>,
    twos: usize,
    capacity: usize,
}

fn partitions(s: usize, constraints: &UpbConstraints) -> Result<Vec<Partition>> {
    let max_size = constraints.max_region_size.unwrap_or(s).max(1);
    let max_twos = constraints.max_two_regions.unwrap_or(s);
    let mut raw = Vec::new();
    fn go(
        free: u64,
        max_size: usize,
        max_twos: usize,
        twos: usize,
        cur: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        if free == 0 {
            out.push(cur.clone());
            return;
        }
        let v = free.trailing_zeros();
        let rest = free & !(1u64 << v);
        let mut members = rest;
        loop {
            let size = members.count_ones() as usize + 1;
            let t = twos + usize::from(size == 2);
            if size <= max_size && t <= max_twos {
                cur.push(members | (1u64 << v));
                go(rest & !members, max_size, max_twos, t, cur, out);
                cur.pop();
            }
            if members == 0 {
                break;
            }
            members = (members - 1) & rest;
        }
    }
    go(
        (1u64 << s) - 1,
        max_size,
        max_twos,
        0,
        &mut Vec::new(),
        &mut raw,
    );
    let mut caps: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut out = Vec::new();
    for mut regions in raw {
        if regions.len() % 2 == 1 {
            continue;
        }
        regions.sort_unstable_by_key(|m| m.trailing_zeros());
        let sizes: Vec<usize> = regions.iter().map(|m| m.count_ones() as usize).collect();
        let twos = sizes.iter().filter(|&&n| n == 2).count();
        let profile = RegionSizeProfile::new(sizes)?;
        let capacity = match caps.get(profile.sizes()) {
            Some(&c) => c,
            None => {
                let c = max_party_edges(s, &profile)?;
                caps.insert(profile.sizes().to_vec(), c);
                c
            }
        };
        out.push(Partition {
            regions,
            twos,
            capacity,
        });
    }
    Ok(out)
}

/// One representative partition per size profile, regions filled with
/// consecutive states in decreasing size.
fn representatives(cands: &[Partition]) -> Vec<Partition> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for c in cands {
        let mut sizes: Vec<u32> = c.regions.iter().map(|m| m.count_ones()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        if !seen.insert(sizes.clone()) {
            continue;
        }
        let mut next = 0;
        let regions = sizes
            .iter()
            .map(|&n| {
                let m = ((1u64 << n) - 1) << next;
                next += n;
                m
            })
            .collect();
        out.push(Partition {
            regions,
            twos: c.twos,
            capacity: c.capacity,
        });
    }
    out
}

struct FindSearch<'a> {
    s: usize,
    p: usize,
    total_edges: usize,
    target: i64,
    /// Candidate list for each party index.
    class_of: Vec<usize>,
    classes: Vec<Vec<Partition>>,
    class_best: Vec<usize>,
    meter: &'a Meter<'a>,
}

impl FindSearch<'_> {
    fn phase_one(
        &self,
        chosen: &mut Vec<Partition>,
        last_index: &mut Vec<usize>,
        capacity: usize,
    ) -> std::result::Result<Option<Vec<PartyLayout>>, Stopped> {
        let depth = chosen.len();
        self.meter.tick(depth)?;
        if depth == self.p {
            return self.phase_two(chosen);
        }
        let class = self.class_of[depth];
        let start = match depth.checked_sub(1) {
            Some(prev) if self.class_of[prev] == class && prev > 0 => last_index[prev],
            _ => 0,
        };
        let rest_best: usize = self.class_of[depth + 1..]
            .iter()
            .map(|&c| self.class_best[c])
            .sum();
        for i in start..self.classes[class].len() {
            let cand = &self.classes[class][i];
            if capacity + cand.capacity + rest_best < self.total_edges {
                continue;
            }
            chosen.push(cand.clone());
            let masks: Vec<Vec<u64>> = chosen.iter().map(|c| c.regions.clone()).collect();
            if !rule_holds_with(&masks, depth, self.target) {
                last_index.push(i);
                let found = self.phase_one(chosen, last_index, capacity + cand.capacity);
                last_index.pop();
                if let Some(parties) = found? {
                    return Ok(Some(parties));
                }
            }
            chosen.pop();
        }
        Ok(None)
    }

    fn phase_two(
        &self,
        chosen: &[Partition],
    ) -> std::result::Result<Option<Vec<PartyLayout>>, Stopped> {
        let options: Vec<Vec<PairingOption>> = chosen
            .iter()
            .map(|c| pairings(self.s, &c.regions))
            .collect();
        let mut order: Vec<usize> = (0..chosen.len()).collect();
        order.sort_by_key(|&j| std::cmp::Reverse(chosen[j].capacity));
        let mut suffix = vec![0usize; order.len() + 1];
        for t in (0..order.len()).rev() {
            suffix[t] = suffix[t + 1] + chosen[order[t]].capacity;
        }
        let mut picks = vec![0usize; chosen.len()];
        if !self.cover(&options, &order, &suffix, 0, 0, &mut picks)? {
            return Ok(None);
        }
        let parties = chosen
            .iter()
            .zip(&picks)
            .enumerate()
            .map(|(j, (c, &k))| {
                let regions: Vec<Vec<usize>> =
                    c.regions.iter().map(|&m| bits(m).collect()).collect();
                PartyLayout::new(self.s, regions, &options[j][k].1).expect("valid pairing")
            })
            .collect();
        Ok(Some(parties))
    }

    fn cover(
        &self,
        options: &[Vec<PairingOption>],
        order: &[usize],
        suffix: &[usize],
        t: usize,
        covered: u128,
        picks: &mut [usize],
    ) -> std::result::Result<bool, Stopped> {
        self.meter.tick(self.p + t)?;
        let have = covered.count_ones() as usize;
        if t == order.len() {
            return Ok(have == self.total_edges);
        }
        if have + suffix[t] < self.total_edges {
            return Ok(false);
        }
        let j = order[t];
        for (k, (edges, _)) in options[j].iter().enumerate() {
            let next = covered | edges;
            if next.count_ones() as usize + suffix[t + 1] < self.total_edges {
                // options are sorted by size, but overlap varies; keep scanning
                continue;
            }
            picks[j] = k;
            if self.cover(options, order, suffix, t + 1, next, picks)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Edges of one pairing with the region pairs that produce them.
type PairingOption = (u128, Vec<(usize, usize)>);

/// Every perfect matching of the regions with its edge mask, largest first.
fn pairings(s: usize, regions: &[u64]) -> Vec<PairingOption> {
    fn go(
        s: usize,
        regions: &[u64],
        free: &[usize],
        edges: u128,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<(u128, Vec<(usize, usize)>)>,
    ) {
        let Some((&first, rest)) = free.split_first() else {
            out.push((edges, cur.clone()));
            return;
        };
        for (i, &other) in rest.iter().enumerate() {
            let mut left = rest.to_vec();
            left.remove(i);
            cur.push((first, other));
            go(
                s,
                regions,
                &left,
                edges | block_edges(s, regions[first], regions[other]),
                cur,
                out,
            );
            cur.pop();
        }
    }
    let idx: Vec<usize> = (0..regions.len()).collect();
    let mut out = Vec::new();
    go(s, regions, &idx, 0, &mut Vec::new(), &mut out);
    out.sort_by_key(|(e, _)| std::cmp::Reverse(e.count_ones()));
    out
}

/// Searches for a UPB of `s` states on `p` parties within the constraints.
///
/// Each restart shuffles the candidate order with a generator seeded from
/// `budget.seed` plus the restart number and runs until it finishes or uses
/// up `budget.restart_nodes`. A restart that finishes settles the answer.
/// Returned certificates have passed [`verify_certificate`].
pub fn find_upb(
    p: usize,
    s: usize,
    constraints: &UpbConstraints,
    budget: &SearchBudget,
) -> Result<Outcome<FindResult, FindPartial>> {
    budget.validate()?;
    if p == 0 || s == 0 {
        return Err(Error::Parameter(
            "parties and states must be positive".into(),
        ));
    }
    if s > MAX_SEARCH_STATES {
        return Err(Error::Parameter(format!(
            "the search supports at most {MAX_SEARCH_STATES} states"
        )));
    }
    if let Some((_, count)) = constraints.two_region_parties {
        if count > p {
            return Err(Error::Parameter(format!(
                "{count} constrained parties but only {p} parties"
            )));
        }
    }
    if s <= p {
        return Ok(Outcome::Complete(FindResult::NotFound));
    }
    let all = partitions(s, constraints)?;
    let (classes, class_of) = match constraints.two_region_parties {
        Some((value, count)) => {
            let (a, b): (Vec<Partition>, Vec<Partition>) =
                all.into_iter().partition(|c| c.twos == value);
            let class_of = (0..p).map(|j| usize::from(j >= count)).collect();
            (vec![a, b], class_of)
        }
        None => (vec![all], vec![0; p]),
    };
    let started = Instant::now();
    let mut used = 0u64;
    for restart in 0u64.. {
        let remaining = budget.node_limit.saturating_sub(used);
        let limit = budget.restart_nodes.map_or(remaining, |r| r.min(remaining));
        if limit == 0 {
            return Ok(Outcome::Exhausted(FindPartial {
                nodes: used,
                restarts: restart,
            }));
        }
        let mut this = budget.clone();
        if let Some(t) = budget.time_limit {
            match t.checked_sub(started.elapsed()) {
                Some(left) if !left.is_zero() => this.time_limit = Some(left),
                _ => {
                    return Ok(Outcome::Exhausted(FindPartial {
                        nodes: used,
                        restarts: restart,
                    }))
                }
            }
        }
        let meter = Meter::with_limit(&this, "find-upb", limit);
        let seed = budget.seed.wrapping_add(restart);
        let result = run_once(p, s, &classes, &class_of, seed, &meter);
        used += meter.nodes();
        match result {
            Ok(Some(parties)) => {
                let config = Configuration::new(s, parties)?;
                let cert = Certificate {
                    assignment: SymbolicAssignment::standard(&config),
                    config,
                    provenance: Provenance {
                        note: format!("constrained search, {p} parties, {s} states"),
                        seed: Some(seed),
                    },
                };
                let report = verify_certificate(&cert, VerifyOptions::default());
                if !report.passed() {
                    return Err(Error::InvalidConfiguration(format!(
                        "search produced a certificate that fails verification: {report:?}"
                    )));
                }
                return Ok(Outcome::Complete(FindResult::Found(cert)));
            }
            Ok(None) => return Ok(Outcome::Complete(FindResult::NotFound)),
            Err(Stopped) => {
                let out_of_time = budget.time_limit.is_some_and(|t| started.elapsed() >= t);
                if budget.restart_nodes.is_none() || used >= budget.node_limit || out_of_time {
                    return Ok(Outcome::Exhausted(FindPartial {
                        nodes: used,
                        restarts: restart + 1,
                    }));
                }
            }
        }
    }
    unreachable!("restart loop returns")
}

fn run_once(
    p: usize,
    s: usize,
    classes: &[Vec<Partition>],
    class_of: &[usize],
    seed: u64,
    meter: &Meter,
) -> std::result::Result<Option<Vec<PartyLayout>>, Stopped> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = classes.to_vec();
    for class in &mut classes {
        class.shuffle(&mut rng);
    }
    let class_best = classes
        .iter()
        .map(|c| c.iter().map(|x| x.capacity).max().unwrap_or(0))
        .collect();
    let search = FindSearch {
        s,
        p,
        total_edges: s * (s - 1) / 2,
        target: s as i64 - p as i64,
        class_of: class_of.to_vec(),
        classes,
        class_best,
        meter,
    };
    // any party of the first class may be relabeled to its profile's
    // representative
    let mut reps = representatives(&search.classes[class_of[0]]);
    reps.shuffle(&mut rng);
    for rep in reps {
        let mut chosen = vec![rep.clone()];
        let mut last_index = vec![0];
        if rule_holds_with(std::slice::from_ref(&rep.regions), 0, search.target) {
            continue;
        }
        if let Some(parties) = search.phase_one(&mut chosen, &mut last_index, rep.capacity)? {
            return Ok(Some(parties));
        }
    }
    Ok(None)
}
