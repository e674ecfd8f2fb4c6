//! Smallest UPB on a given number of qubits by exhaustive enumeration.
//!
//! Only layouts with every region paired are generated, since a UPB has
//! no unpaired region. A layout is then a set of blocks `{A, B}`, each a
//! pairing of two regions, partitioning the states. Two layouts lie in the
//! same relabeling orbit exactly when their multisets of block shapes
//! `{|A|, |B|}` agree.
//!
//! Any configuration can be relabeled so that the party whose orbit comes
//! first in generation order is that orbit's representative. The remaining
//! parties are interchangeable, so they are enumerated as a nondecreasing
//! sequence of layout indices, each at least the representative's.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    bits, block_edges, full_edges, rule_holds_with, Meter, Outcome, SearchBudget, Stopped,
    MAX_SEARCH_STATES,
};
use crate::constructions::{verify_certificate, Certificate, Provenance, VerifyOptions};
use crate::error::{Error, Result};
use crate::model::{Configuration, PartyLayout};
use crate::states::SymbolicAssignment;

/// A layout with its region masks and edges precomputed.
#[derive(Clone, Debug)]
struct LayoutInfo {
    blocks: Vec<(u64, u64)>,
    regions: Vec<u64>,
    edges: u128,
    edge_count: u32,
    shape: Vec<(usize, usize)>,
}

impl LayoutInfo {
    fn new(s: usize, blocks: Vec<(u64, u64)>) -> Self {
        let mut regions = Vec::with_capacity(2 * blocks.len());
        let mut edges = 0;
        let mut shape = Vec::with_capacity(blocks.len());
        for &(a, b) in &blocks {
            regions.push(a);
            regions.push(b);
            edges |= block_edges(s, a, b);
            let (x, y) = (a.count_ones() as usize, b.count_ones() as usize);
            shape.push((x.min(y), x.max(y)));
        }
        shape.sort_unstable();
        LayoutInfo {
            blocks,
            regions,
            edges,
            edge_count: edges.count_ones(),
            shape,
        }
    }

    fn layout(&self, s: usize) -> PartyLayout {
        let blocks: Vec<(Vec<usize>, Vec<usize>)> = self
            .blocks
            .iter()
            .map(|&(a, b)| (bits(a).collect(), bits(b).collect()))
            .collect();
        PartyLayout::from_blocks(s, &blocks)
            .expect("generated blocks partition the states")
            .canonical()
    }
}

/// Every layout on `s` states with all regions paired, each exactly once.
///
/// The lowest unplaced state opens a new block on side `A`; any nonempty
/// subset of the other unplaced states then forms side `B` or joins `A`.
pub fn paired_layouts(s: usize) -> Result<Vec<PartyLayout>> {
    if s > MAX_SEARCH_STATES {
        return Err(Error::Parameter(format!(
            "layout enumeration supports at most {MAX_SEARCH_STATES} states"
        )));
    }
    Ok(layout_infos(s).iter().map(|l| l.layout(s)).collect())
}

fn layout_infos(s: usize) -> Vec<LayoutInfo> {
    fn go(s: usize, free: u64, blocks: &mut Vec<(u64, u64)>, out: &mut Vec<LayoutInfo>) {
        if free == 0 {
            out.push(LayoutInfo::new(s, blocks.clone()));
            return;
        }
        let v = free.trailing_zeros();
        let rest = free & !(1u64 << v);
        // subsets of `rest`: the block's other members
        let mut members = rest;
        loop {
            if members != 0 {
                // nonempty side B within members
                let mut b = members;
                loop {
                    let a = (1u64 << v) | (members & !b);
                    blocks.push((a, b));
                    go(s, rest & !members, blocks, out);
                    blocks.pop();
                    b = (b - 1) & members;
                    if b == 0 {
                        break;
                    }
                }
            }
            if members == 0 {
                break;
            }
            members = (members - 1) & rest;
        }
    }
    let mut out = Vec::new();
    if s >= 2 {
        go(s, (1u64 << s) - 1, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MinUpbVerdict {
    /// The smallest UPB size with one witness of that size.
    Found { size: usize },
    /// No UPB with at most `s_max` states.
    NoneUpTo { s_max: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinUpbResult {
    pub parties: usize,
    pub verdict: MinUpbVerdict,
    pub witness: Option<Certificate>,
    pub nodes: u64,
}

/// Sizes ruled out before the budget ran out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinUpbPartial {
    pub parties: usize,
    pub none_up_to: usize,
    pub nodes: u64,
}

struct MinSearch<'a> {
    s: usize,
    p: usize,
    layouts: &'a [LayoutInfo],
    /// Largest edge count among layouts at index `>= i`.
    best_edges_from: Vec<u32>,
    full: u128,
    target: i64,
    meter: &'a Meter<'a>,
}

impl MinSearch<'_> {
    fn dfs(&self, chosen: &mut Vec<usize>, covered: u128) -> std::result::Result<bool, Stopped> {
        self.meter.tick(chosen.len())?;
        let depth = chosen.len();
        if depth == self.p {
            return Ok(covered == self.full);
        }
        let from = *chosen.last().expect("first party is fixed");
        for i in from..self.layouts.len() {
            let info = &self.layouts[i];
            let covered_next = covered | info.edges;
            let remaining = (self.p - depth - 1) as u32;
            let room = remaining * self.best_edges_from[i];
            if covered_next.count_ones() + room < self.full.count_ones() {
                continue;
            }
            chosen.push(i);
            let masks: Vec<Vec<u64>> = chosen
                .iter()
                .map(|&k| self.layouts[k].regions.clone())
                .collect();
            let ok =
                !rule_holds_with(&masks, depth, self.target) && self.dfs(chosen, covered_next)?;
            if ok {
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }
}

/// The smallest UPB on `p` qubits with at most `s_max` states.
pub fn exhaustive_min_upb(
    p: usize,
    s_max: usize,
    budget: &SearchBudget,
) -> Result<Outcome<MinUpbResult, MinUpbPartial>> {
    budget.validate()?;
    if p == 0 || s_max == 0 {
        return Err(Error::Parameter(
            "parties and state bound must be positive".into(),
        ));
    }
    if s_max > MAX_SEARCH_STATES {
        return Err(Error::Parameter(format!(
            "exhaustive search supports at most {MAX_SEARCH_STATES} states"
        )));
    }
    let meter = Meter::new(budget, "min-upb");
    for s in 1..=s_max {
        // With s <= p each party covers one state, so nothing is unextendible.
        if s <= p {
            meter.record_best(s);
            continue;
        }
        let layouts = layout_infos(s);
        let mut best_edges_from = vec![0u32; layouts.len() + 1];
        for i in (0..layouts.len()).rev() {
            best_edges_from[i] = best_edges_from[i + 1].max(layouts[i].edge_count);
        }
        let mut seen: HashMap<&[(usize, usize)], ()> = HashMap::new();
        let reps: Vec<usize> = (0..layouts.len())
            .filter(|&i| seen.insert(&layouts[i].shape, ()).is_none())
            .collect();
        let search = MinSearch {
            s,
            p,
            layouts: &layouts,
            best_edges_from,
            full: full_edges(s),
            target: s as i64 - p as i64,
            meter: &meter,
        };
        let hit = reps
            .par_iter()
            .map(|&r| {
                search.meter.tick(0)?;
                let info = &search.layouts[r];
                if info.edge_count + (p as u32 - 1) * search.best_edges_from[r]
                    < search.full.count_ones()
                {
                    return Ok(None);
                }
                let mut chosen = vec![r];
                if rule_holds_with(std::slice::from_ref(&info.regions), 0, search.target) {
                    return Ok(None);
                }
                Ok(search.dfs(&mut chosen, info.edges)?.then_some(chosen))
            })
            .find_map_first(
                |r: std::result::Result<Option<Vec<usize>>, Stopped>| match r {
                    Ok(None) => None,
                    other => Some(other),
                },
            );
        match hit {
            Some(Ok(Some(chosen))) => {
                let cert = certificate_for(&search, &chosen)?;
                return Ok(Outcome::Complete(MinUpbResult {
                    parties: p,
                    verdict: MinUpbVerdict::Found { size: s },
                    witness: Some(cert),
                    nodes: meter.nodes(),
                }));
            }
            Some(Err(Stopped)) => {
                return Ok(Outcome::Exhausted(MinUpbPartial {
                    parties: p,
                    none_up_to: s - 1,
                    nodes: meter.nodes(),
                }))
            }
            Some(Ok(None)) | None => {}
        }
        if meter.stopped() {
            return Ok(Outcome::Exhausted(MinUpbPartial {
                parties: p,
                none_up_to: s - 1,
                nodes: meter.nodes(),
            }));
        }
        meter.record_best(s);
    }
    Ok(Outcome::Complete(MinUpbResult {
        parties: p,
        verdict: MinUpbVerdict::NoneUpTo { s_max },
        witness: None,
        nodes: meter.nodes(),
    }))
}

fn certificate_for(search: &MinSearch, chosen: &[usize]) -> Result<Certificate> {
    let parties = chosen
        .iter()
        .map(|&i| search.layouts[i].layout(search.s))
        .collect();
    let config = Configuration::new(search.s, parties)?;
    let cert = Certificate {
        assignment: SymbolicAssignment::standard(&config),
        config,
        provenance: Provenance {
            note: format!("exhaustive minimal UPB search, {} parties", search.p),
            seed: None,
        },
    };
    let report = verify_certificate(&cert, VerifyOptions::default());
    if !report.passed() {
        return Err(Error::InvalidConfiguration(format!(
            "search produced a certificate that fails verification: {report:?}"
        )));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_product_basis, is_unextendible};

    /// Every partition of `0..s` into regions, with every partial pairing,
    /// and no symmetry reduction.
    fn all_layouts(s: usize) -> Vec<PartyLayout> {
        fn partitions(
            s: usize,
            v: usize,
            cur: &mut Vec<Vec<usize>>,
            out: &mut Vec<Vec<Vec<usize>>>,
        ) {
            if v == s {
                out.push(cur.clone());
                return;
            }
            for i in 0..cur.len() {
                cur[i].push(v);
                partitions(s, v + 1, cur, out);
                cur[i].pop();
            }
            cur.push(vec![v]);
            partitions(s, v + 1, cur, out);
            cur.pop();
        }
        fn matchings(
            free: &[usize],
            cur: &mut Vec<(usize, usize)>,
            out: &mut Vec<Vec<(usize, usize)>>,
        ) {
            let Some((&first, rest)) = free.split_first() else {
                out.push(cur.clone());
                return;
            };
            matchings(rest, cur, out);
            for (i, &other) in rest.iter().enumerate() {
                let mut left = rest.to_vec();
                left.remove(i);
                cur.push((first, other));
                matchings(&left, cur, out);
                cur.pop();
            }
        }
        let mut parts = Vec::new();
        partitions(s, 0, &mut Vec::new(), &mut parts);
        let mut out = Vec::new();
        for regions in parts {
            let idx: Vec<usize> = (0..regions.len()).collect();
            let mut ms = Vec::new();
            matchings(&idx, &mut Vec::new(), &mut ms);
            for m in ms {
                out.push(PartyLayout::new(s, regions.clone(), &m).unwrap());
            }
        }
        out
    }

    fn naive_min(p: usize, s_max: usize) -> Option<usize> {
        for s in 1..=s_max {
            let layouts = all_layouts(s);
            let mut idx = vec![0usize; p];
            loop {
                let parties = idx.iter().map(|&i| layouts[i].clone()).collect();
                let c = Configuration::new(s, parties).unwrap();
                if is_product_basis(&c).is_product_basis && is_unextendible(&c) {
                    return Some(s);
                }
                let mut j = 0;
                while j < p {
                    idx[j] += 1;
                    if idx[j] < layouts.len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == p {
                    break;
                }
            }
        }
        None
    }

    #[test]
    fn layout_counts() {
        // set partitions into blocks of size >= 2, weighted by 2^(g-1) - 1 splits
        let counts: Vec<usize> = (1..=6).map(|s| layout_infos(s).len()).collect();
        assert_eq!(counts, vec![0, 1, 3, 10, 45, 241]);
        let all = paired_layouts(4).unwrap();
        for (i, a) in all.iter().enumerate() {
            assert!(a
                .regions()
                .iter()
                .enumerate()
                .all(|(r, _)| a.partner(r).is_some()));
            assert!(all[i + 1..].iter().all(|b| b != a));
        }
    }

    #[test]
    fn naive_oracle_agrees() {
        let b = SearchBudget::default();
        for p in 1..=2 {
            let fast = exhaustive_min_upb(p, 4, &b).unwrap().complete().unwrap();
            let size = match fast.verdict {
                MinUpbVerdict::Found { size } => Some(size),
                MinUpbVerdict::NoneUpTo { .. } => None,
            };
            assert_eq!(size, naive_min(p, 4), "p = {p}");
        }
    }

    #[test]
    fn small_minima() {
        let b = SearchBudget::default();
        let r1 = exhaustive_min_upb(1, 2, &b).unwrap().complete().unwrap();
        assert_eq!(r1.verdict, MinUpbVerdict::Found { size: 2 });
        let r3 = exhaustive_min_upb(3, 4, &b).unwrap().complete().unwrap();
        assert_eq!(r3.verdict, MinUpbVerdict::Found { size: 4 });
        let w = r3.witness.unwrap();
        assert!(verify_certificate(&w, VerifyOptions::default()).passed());
        let r2 = exhaustive_min_upb(2, 3, &b).unwrap().complete().unwrap();
        assert_eq!(r2.verdict, MinUpbVerdict::NoneUpTo { s_max: 3 });
    }

    #[test]
    fn exhaustion_is_not_none() {
        let b = SearchBudget::default().with_node_limit(1);
        let out = exhaustive_min_upb(4, 5, &b).unwrap();
        assert!(out.is_exhausted());
        assert!(exhaustive_min_upb(0, 4, &b).is_err());
        assert!(exhaustive_min_upb(2, 17, &b).is_err());
    }
}
