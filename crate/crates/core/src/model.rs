//! The combinatorial picture of a set of qubit product states.
//!
//! On each party the states split into regions of states that are equal up
//! to phase. Two regions may be paired, meaning their vectors form an
//! orthonormal basis of the qubit; every state in one region is then
//! orthogonal to every state in the other on that party. A party's
//! orthogonality graph is therefore a disjoint union of complete bipartite
//! blocks, one per pairing.
//!
//! The set is a product basis when the union of all parties' graphs is the
//! complete graph, and it is extendible exactly when some choice of at most
//! one region per party covers every state.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{complete_graph, EdgeSet};

/// Largest number of states a configuration may hold; vertex sets are
/// packed into a `u64`.
pub const MAX_STATES: usize = 64;

#[inline]
pub(crate) fn mask_of(vertices: &[usize]) -> u64 {
    vertices.iter().fold(0u64, |m, &v| m | (1u64 << v))
}

#[inline]
pub(crate) fn full_mask(s: usize) -> u64 {
    if s == 64 {
        u64::MAX
    } else {
        (1u64 << s) - 1
    }
}

/// One party's partition of the states into regions, plus a partial
/// pairing of those regions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartyLayout {
    num_states: usize,
    regions: Vec<Vec<usize>>,
    partner: Vec<Option<usize>>,
}

impl PartyLayout {
    /// Validates and builds a layout. Each region is sorted; region order is
    /// kept as given so that region indices in `pairs` stay meaningful.
    pub fn new(
        num_states: usize,
        regions: Vec<Vec<usize>>,
        pairs: &[(usize, usize)],
    ) -> Result<Self> {
        if num_states > MAX_STATES {
            return Err(Error::InvalidLayout(format!(
                "{num_states} states exceeds the supported maximum of {MAX_STATES}"
            )));
        }
        let mut seen = vec![false; num_states];
        let mut regions = regions;
        for (r, region) in regions.iter_mut().enumerate() {
            if region.is_empty() {
                return Err(Error::InvalidLayout(format!("region {r} is empty")));
            }
            region.sort_unstable();
            for &v in region.iter() {
                if v >= num_states {
                    return Err(Error::InvalidLayout(format!(
                        "region {r} contains vertex {v} outside 0..{num_states}"
                    )));
                }
                if seen[v] {
                    return Err(Error::InvalidLayout(format!(
                        "vertex {v} lies in two regions"
                    )));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidLayout(format!("vertex {v} is in no region")));
        }
        let mut partner = vec![None; regions.len()];
        for &(a, b) in pairs {
            if a >= regions.len() || b >= regions.len() {
                return Err(Error::InvalidLayout(format!(
                    "pair ({a}, {b}) references a missing region"
                )));
            }
            if a == b {
                return Err(Error::InvalidLayout(format!(
                    "region {a} is paired with itself"
                )));
            }
            if partner[a].is_some() || partner[b].is_some() {
                return Err(Error::InvalidLayout(format!(
                    "pair ({a}, {b}) reuses an already paired region"
                )));
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        Ok(PartyLayout {
            num_states,
            regions,
            partner,
        })
    }

    /// Every state in its own region, nothing paired.
    pub fn singletons(num_states: usize) -> Result<Self> {
        PartyLayout::new(num_states, (0..num_states).map(|v| vec![v]).collect(), &[])
    }

    /// Builds a layout from paired blocks `(A, B)` that together cover all
    /// states; every region is paired.
    pub fn from_blocks(num_states: usize, blocks: &[(Vec<usize>, Vec<usize>)]) -> Result<Self> {
        let mut regions = Vec::with_capacity(2 * blocks.len());
        let mut pairs = Vec::with_capacity(blocks.len());
        for (a, b) in blocks {
            pairs.push((regions.len(), regions.len() + 1));
            regions.push(a.clone());
            regions.push(b.clone());
        }
        PartyLayout::new(num_states, regions, &pairs)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn partner(&self, region: usize) -> Option<usize> {
        self.partner.get(region).copied().flatten()
    }

    /// Paired regions as `(low, high)` index pairs, in increasing order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(a, p)| p.filter(|&b| a < b).map(|b| (a, b)))
            .collect()
    }

    /// Index of the region containing `v`.
    pub fn region_of(&self, v: usize) -> Option<usize> {
        self.regions
            .iter()
            .position(|r| r.binary_search(&v).is_ok())
    }

    pub fn region_mask(&self, region: usize) -> u64 {
        mask_of(&self.regions[region])
    }

    pub fn region_masks(&self) -> Vec<u64> {
        self.regions.iter().map(|r| mask_of(r)).collect()
    }

    pub fn size_profile(&self) -> RegionSizeProfile {
        RegionSizeProfile::from_sizes(self.regions.iter().map(Vec::len).collect())
    }

    /// Same layout with regions ordered by their smallest vertex.
    pub fn canonical(&self) -> PartyLayout {
        let mut order: Vec<usize> = (0..self.regions.len()).collect();
        order.sort_by_key(|&r| self.regions[r][0]);
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let regions = order.iter().map(|&r| self.regions[r].clone()).collect();
        let partner = order
            .iter()
            .map(|&r| self.partner[r].map(|q| new_index[q]))
            .collect();
        PartyLayout {
            num_states: self.num_states,
            regions,
            partner,
        }
    }

    /// The layout with one pairing dissolved (both regions left unpaired).
    pub fn without_pair(&self, region: usize) -> PartyLayout {
        let mut out = self.clone();
        if let Some(q) = out.partner[region] {
            out.partner[q] = None;
            out.partner[region] = None;
        }
        out
    }
}

/// A set of `s` product states on `p` qubit parties, in combinatorial form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    num_states: usize,
    parties: Vec<PartyLayout>,
}

impl Configuration {
    pub fn new(num_states: usize, parties: Vec<PartyLayout>) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidConfiguration(
                "needs at least one state".into(),
            ));
        }
        if parties.is_empty() {
            return Err(Error::InvalidConfiguration(
                "needs at least one party".into(),
            ));
        }
        if let Some((j, l)) = parties
            .iter()
            .enumerate()
            .find(|(_, l)| l.num_states != num_states)
        {
            return Err(Error::InvalidConfiguration(format!(
                "party {j} is laid out over {} states, expected {num_states}",
                l.num_states
            )));
        }
        Ok(Configuration {
            num_states,
            parties,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn parties(&self) -> &[PartyLayout] {
        &self.parties
    }

    pub fn party(&self, j: usize) -> Option<&PartyLayout> {
        self.parties.get(j)
    }

    /// Each party with its regions in canonical order; two configurations
    /// that differ only by region order have equal canonical forms.
    pub fn canonical(&self) -> Configuration {
        Configuration {
            num_states: self.num_states,
            parties: self.parties.iter().map(PartyLayout::canonical).collect(),
        }
    }

    pub fn without_party(&self, j: usize) -> Result<Configuration> {
        if j >= self.parties.len() {
            return Err(Error::Parameter(format!("party {j} out of range")));
        }
        let mut parties = self.parties.clone();
        parties.remove(j);
        Configuration::new(self.num_states, parties)
    }

    pub fn with_party(&self, j: usize, layout: PartyLayout) -> Result<Configuration> {
        let mut parties = self.parties.clone();
        *parties
            .get_mut(j)
            .ok_or_else(|| Error::Parameter(format!("party {j} out of range")))? = layout;
        Configuration::new(self.num_states, parties)
    }

    /// Union of all parties' orthogonality graphs.
    pub fn edge_union(&self) -> EdgeSet {
        let mut out = EdgeSet::empty(self.num_states);
        for layout in &self.parties {
            out.extend_from(&party_edges(layout))
                .expect("parties share the configuration's universe");
        }
        out
    }
}

/// The orthogonality graph of one party: all cross edges of every paired
/// region pair.
pub fn party_edges(layout: &PartyLayout) -> EdgeSet {
    let mut out = EdgeSet::empty(layout.num_states);
    for (a, b) in layout.pairs() {
        for &u in &layout.regions[a] {
            for &v in &layout.regions[b] {
                out.insert(u, v).expect("validated layout");
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductBasisVerdict {
    pub is_product_basis: bool,
    /// Pairs of states not orthogonal on any party.
    pub missing: EdgeSet,
}

/// Whether every pair of states is orthogonal on at least one party.
pub fn is_product_basis(c: &Configuration) -> ProductBasisVerdict {
    let union = c.edge_union();
    let missing = complete_graph(c.num_states)
        .difference(&union)
        .expect("same universe");
    ProductBasisVerdict {
        is_product_basis: missing.is_empty(),
        missing,
    }
}

/// At most one chosen region per party.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtensionWitness {
    pub choices: Vec<Option<usize>>,
}

impl ExtensionWitness {
    /// Vertices covered by the chosen regions.
    pub fn covered_mask(&self, c: &Configuration) -> Result<u64> {
        if self.choices.len() != c.num_parties() {
            return Err(Error::InvalidWitness(format!(
                "{} choices for {} parties",
                self.choices.len(),
                c.num_parties()
            )));
        }
        let mut mask = 0;
        for (j, choice) in self.choices.iter().enumerate() {
            if let Some(r) = *choice {
                let layout = &c.parties[j];
                if r >= layout.num_regions() {
                    return Err(Error::InvalidWitness(format!(
                        "party {j} has no region {r}"
                    )));
                }
                mask |= layout.region_mask(r);
            }
        }
        Ok(mask)
    }

    pub fn validate(&self, c: &Configuration) -> Result<()> {
        let mask = self.covered_mask(c)?;
        if mask != full_mask(c.num_states) {
            let missing = (0..c.num_states)
                .find(|v| mask & (1 << v) == 0)
                .unwrap_or(0);
            return Err(Error::InvalidWitness(format!(
                "vertex {missing} is not covered"
            )));
        }
        Ok(())
    }
}

struct CoverSearch<'a> {
    masks: Vec<Vec<u64>>,
    config: &'a Configuration,
}

impl CoverSearch<'_> {
    fn new(config: &Configuration) -> CoverSearch<'_> {
        CoverSearch {
            masks: config
                .parties
                .iter()
                .map(PartyLayout::region_masks)
                .collect(),
            config,
        }
    }

    fn best_gain(&self, party: usize, uncovered: u64) -> u32 {
        self.masks[party]
            .iter()
            .map(|m| (m & uncovered).count_ones())
            .max()
            .unwrap_or(0)
    }

    /// Depth-first on the lowest uncovered vertex.
    fn extend(&self, uncovered: u64, used: &mut [Option<usize>]) -> bool {
        if uncovered == 0 {
            return true;
        }
        let need = uncovered.count_ones();
        let capacity: u32 = (0..used.len())
            .filter(|&j| used[j].is_none())
            .map(|j| self.best_gain(j, uncovered))
            .sum();
        if capacity < need {
            return false;
        }
        let v = uncovered.trailing_zeros() as usize;
        for j in 0..used.len() {
            if used[j].is_some() {
                continue;
            }
            let Some(r) = self.config.parties[j].region_of(v) else {
                continue;
            };
            used[j] = Some(r);
            if self.extend(uncovered & !self.masks[j][r], used) {
                return true;
            }
            used[j] = None;
        }
        false
    }
}

/// Searches for a choice of at most one region per party covering every
/// state. The search is exact and deterministic: it branches on which
/// unused party covers the lowest uncovered vertex, parties in index order,
/// and prunes when the best possible gain of the unused parties falls short
/// of the uncovered count.
pub fn find_extension(c: &Configuration) -> Option<ExtensionWitness> {
    let search = CoverSearch::new(c);
    let mut used = vec![None; c.num_parties()];
    search
        .extend(full_mask(c.num_states), &mut used)
        .then_some(ExtensionWitness { choices: used })
}

pub fn is_unextendible(c: &Configuration) -> bool {
    find_extension(c).is_none()
}

/// The largest number of states a single region selection can cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxCover {
    pub covered: usize,
    pub witness: ExtensionWitness,
}

/// Branch and bound for the region selection covering the most states.
pub fn max_cover(c: &Configuration) -> MaxCover {
    let search = CoverSearch::new(c);
    let p = c.num_parties();
    // Large-region parties first so that the bound tightens early.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(search.best_gain(j, u64::MAX)));

    struct State<'s> {
        search: &'s CoverSearch<'s>,
        order: Vec<usize>,
        best: u32,
        best_choice: Vec<Option<usize>>,
        current: Vec<Option<usize>>,
        all: u64,
    }

    fn rec(st: &mut State<'_>, depth: usize, covered: u64) {
        let count = covered.count_ones();
        if count > st.best {
            st.best = count;
            st.best_choice = st.current.clone();
        }
        if depth == st.order.len() || covered == st.all {
            return;
        }
        let uncovered = st.all & !covered;
        let bound: u32 = count
            + st.order[depth..]
                .iter()
                .map(|&j| st.search.best_gain(j, uncovered))
                .sum::<u32>();
        if bound.min(st.all.count_ones()) <= st.best {
            return;
        }
        let j = st.order[depth];
        let mut options: Vec<(u32, usize)> = st.search.masks[j]
            .iter()
            .enumerate()
            .map(|(r, m)| ((m & uncovered).count_ones(), r))
            .filter(|&(gain, _)| gain > 0)
            .collect();
        options.sort_by_key(|&(gain, r)| (std::cmp::Reverse(gain), r));
        if options.is_empty() {
            // nothing new on this party; choosing a region is dominated
            rec(st, depth + 1, covered);
        }
        for (_, r) in options {
            st.current[j] = Some(r);
            rec(st, depth + 1, covered | st.search.masks[j][r]);
            st.current[j] = None;
        }
    }

    let mut st = State {
        search: &search,
        order,
        best: 0,
        best_choice: vec![None; p],
        current: vec![None; p],
        all: full_mask(c.num_states),
    };
    rec(&mut st, 0, 0);
    MaxCover {
        covered: st.best as usize,
        witness: ExtensionWitness {
            choices: st.best_choice,
        },
    }
}

/// A necessary condition for unextendibility that failed on one party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairingViolation {
    /// A region with no orthogonal partner on its party.
    UnpairedRegion { party: usize, region: usize },
    /// A party with an odd number of regions.
    OddRegionCount { party: usize, count: usize },
}

/// Every region of a UPB has a partner on its party, so every party has an
/// even number of regions. Returns all failures; empty means the
/// (necessary, not sufficient) condition holds.
pub fn check_pairings(c: &Configuration) -> Vec<PairingViolation> {
    let mut out = Vec::new();
    for (j, layout) in c.parties.iter().enumerate() {
        for r in 0..layout.num_regions() {
            if layout.partner(r).is_none() {
                out.push(PairingViolation::UnpairedRegion {
                    party: j,
                    region: r,
                });
            }
        }
        if layout.num_regions() % 2 == 1 {
            out.push(PairingViolation::OddRegionCount {
                party: j,
                count: layout.num_regions(),
            });
        }
    }
    out
}

/// Region-size statistics of one party: the largest region and the number
/// of regions of each size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyStats {
    pub max_region: usize,
    pub counts: BTreeMap<usize, usize>,
}

impl PartyStats {
    /// Number of regions with exactly `n` states.
    pub fn count(&self, n: usize) -> usize {
        self.counts.get(&n).copied().unwrap_or(0)
    }
}

pub fn party_stats(c: &Configuration, j: usize) -> Result<PartyStats> {
    let layout = c.party(j).ok_or_else(|| {
        Error::Parameter(format!("party {j} out of range (p = {})", c.num_parties()))
    })?;
    Ok(stats_of(layout))
}

pub(crate) fn stats_of(layout: &PartyLayout) -> PartyStats {
    let mut counts = BTreeMap::new();
    for r in layout.regions() {
        *counts.entry(r.len()).or_insert(0) += 1;
    }
    PartyStats {
        max_region: counts.keys().next_back().copied().unwrap_or(0),
        counts,
    }
}

/// The multiset of region sizes on one party, largest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionSizeProfile(Vec<usize>);

impl RegionSizeProfile {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::Parameter("region sizes must be positive".into()));
        }
        Ok(RegionSizeProfile::from_sizes(sizes))
    }

    fn from_sizes(mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        RegionSizeProfile(sizes)
    }

    /// `count` regions of `size` states each, appended to this profile.
    pub fn with(mut self, size: usize, count: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Parameter("region sizes must be positive".into()));
        }
        self.0.extend(std::iter::repeat_n(size, count));
        Ok(RegionSizeProfile::from_sizes(self.0))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// The most edges any pairing of regions with this profile can produce,
/// i.e. a maximum-weight matching on regions with weight `|A| * |B|`.
/// Computed exactly by memoized search over the multiset of sizes.
pub fn max_party_edges(s: usize, profile: &RegionSizeProfile) -> Result<usize> {
    if profile.total() != s {
        return Err(Error::Parameter(format!(
            "profile sums to {}, expected {s}",
            profile.total()
        )));
    }
    fn best(sizes: &[usize], memo: &mut HashMap<Vec<usize>, usize>) -> usize {
        let Some((&first, rest)) = sizes.split_first() else {
            return 0;
        };
        if let Some(&v) = memo.get(sizes) {
            return v;
        }
        let mut value = best(rest, memo);
        let mut last = None;
        for (i, &other) in rest.iter().enumerate() {
            if last == Some(other) {
                continue;
            }
            last = Some(other);
            let mut remaining = rest.to_vec();
            remaining.remove(i);
            value = value.max(first * other + best(&remaining, memo));
        }
        memo.insert(sizes.to_vec(), value);
        value
    }
    Ok(best(profile.sizes(), &mut HashMap::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{seven_state, two_qubit_basis};
    use crate::testing::arb_configuration;
    use proptest::prelude::*;

    #[test]
    fn layout_validation() {
        assert!(PartyLayout::new(3, vec![vec![0, 1], vec![2]], &[(0, 1)]).is_ok());
        assert!(PartyLayout::new(3, vec![vec![0, 1]], &[]).is_err());
        assert!(PartyLayout::new(3, vec![vec![0, 1], vec![1, 2]], &[]).is_err());
        assert!(PartyLayout::new(3, vec![vec![0, 1, 2], vec![]], &[]).is_err());
        assert!(PartyLayout::new(3, vec![vec![0, 1], vec![2]], &[(0, 0)]).is_err());
        assert!(PartyLayout::new(3, vec![vec![0, 1], vec![2]], &[(0, 2)]).is_err());
        assert!(PartyLayout::new(
            4,
            vec![vec![0], vec![1], vec![2], vec![3]],
            &[(0, 1), (1, 2)]
        )
        .is_err());
        assert!(PartyLayout::new(3, vec![vec![0, 1], vec![3]], &[]).is_err());
    }

    #[test]
    fn party_edges_of_seven_state_fixture() {
        let c = seven_state();
        let e1 = party_edges(&c.parties()[0]);
        assert_eq!(e1.len(), 12);
        let e2 = party_edges(&c.parties()[1]);
        assert_eq!(e2.len(), 6);
        let expected2 =
            EdgeSet::from_pairs(7, [(1, 0), (1, 2), (3, 5), (3, 6), (4, 5), (4, 6)]).unwrap();
        assert_eq!(e2, expected2);
        let e3 = party_edges(&c.parties()[2]);
        let expected3 = EdgeSet::from_pairs(7, [(0, 2), (1, 3), (3, 4), (5, 6)]).unwrap();
        assert_eq!(e3, expected3);

        let single = PartyLayout::new(2, vec![vec![0], vec![1]], &[(0, 1)]).unwrap();
        assert_eq!(party_edges(&single).len(), 1);
    }

    #[test]
    fn product_basis_verdicts() {
        let c = seven_state();
        assert!(is_product_basis(&c).is_product_basis);

        let dropped = c.without_party(0).unwrap();
        let verdict = is_product_basis(&dropped);
        assert!(!verdict.is_product_basis);
        // Party 0's K_{3,4} minus whatever the other two parties cover.
        let mut expected = party_edges(&c.parties()[0]);
        for l in dropped.parties() {
            expected = expected.difference(&party_edges(l)).unwrap();
        }
        assert_eq!(verdict.missing, expected);
        assert!(verdict.missing.contains(0, 3));

        for p in 1..4 {
            let c1 = Configuration::new(1, vec![PartyLayout::singletons(1).unwrap(); p]).unwrap();
            assert!(is_product_basis(&c1).is_product_basis);
        }
    }

    #[test]
    fn seven_state_extension_matches_caption() {
        let c = seven_state();
        let w = find_extension(&c).expect("extendible");
        w.validate(&c).unwrap();
        let chosen: Vec<Vec<usize>> = w
            .choices
            .iter()
            .enumerate()
            .map(|(j, r)| c.parties()[j].regions()[r.unwrap()].clone())
            .collect();
        assert_eq!(chosen[0], vec![3, 4, 5, 6]);
        assert_eq!(chosen[1], vec![0, 2]);
        assert!(chosen[2].contains(&1));
        assert!(!is_unextendible(&c));
    }

    #[test]
    fn two_qubit_basis_is_unextendible() {
        let c = two_qubit_basis();
        assert!(is_product_basis(&c).is_product_basis);
        // Brute force over every (region or nothing) pair of choices.
        let mut covering = 0;
        for a in 0..=c.parties()[0].num_regions() {
            for b in 0..=c.parties()[1].num_regions() {
                let w = ExtensionWitness {
                    choices: vec![
                        (a < c.parties()[0].num_regions()).then_some(a),
                        (b < c.parties()[1].num_regions()).then_some(b),
                    ],
                };
                if w.validate(&c).is_ok() {
                    covering += 1;
                }
            }
        }
        assert_eq!(covering, 0);
        assert!(find_extension(&c).is_none());
    }

    #[test]
    fn single_state_single_party_is_extendible() {
        let c = Configuration::new(1, vec![PartyLayout::singletons(1).unwrap()]).unwrap();
        assert!(!is_unextendible(&c));
        assert_eq!(find_extension(&c).unwrap().choices, vec![Some(0)]);
    }

    #[test]
    fn pairing_violations() {
        let c = seven_state();
        assert!(check_pairings(&c).is_empty());

        let broken = c.with_party(2, c.parties()[2].without_pair(2)).unwrap();
        let v = check_pairings(&broken);
        assert!(v.contains(&PairingViolation::UnpairedRegion {
            party: 2,
            region: 2
        }));
        assert!(v.contains(&PairingViolation::UnpairedRegion {
            party: 2,
            region: 3
        }));
        assert_eq!(v.len(), 2);

        let odd = Configuration::new(
            3,
            vec![PartyLayout::new(3, vec![vec![0], vec![1], vec![2]], &[(0, 1)]).unwrap()],
        )
        .unwrap();
        let v = check_pairings(&odd);
        assert!(v.contains(&PairingViolation::UnpairedRegion {
            party: 0,
            region: 2
        }));
        assert!(v.contains(&PairingViolation::OddRegionCount { party: 0, count: 3 }));
    }

    #[test]
    fn stats_of_seven_state_parties() {
        let c = seven_state();
        let s1 = party_stats(&c, 0).unwrap();
        assert_eq!(s1.max_region, 4);
        assert_eq!((s1.count(3), s1.count(4)), (1, 1));
        let s2 = party_stats(&c, 1).unwrap();
        assert_eq!(s2.max_region, 2);
        assert_eq!((s2.count(1), s2.count(2)), (1, 3));
        let s3 = party_stats(&c, 2).unwrap();
        assert_eq!(s3.max_region, 2);
        assert_eq!((s3.count(1), s3.count(2)), (5, 1));
        assert!(party_stats(&c, 3).is_err());

        let single = Configuration::new(5, vec![PartyLayout::singletons(5).unwrap()]).unwrap();
        let st = party_stats(&single, 0).unwrap();
        assert_eq!(st.max_region, 1);
        assert_eq!(st.count(1), 5);
    }

    #[test]
    fn max_party_edges_named_profiles() {
        let p = |v: Vec<usize>| RegionSizeProfile::new(v).unwrap();
        // k = 2: two K_{2,2} plus one K_{1,1}
        assert_eq!(max_party_edges(10, &p(vec![2, 2, 2, 2, 1, 1])).unwrap(), 9);
        assert_eq!(max_party_edges(10, &p(vec![2, 2, 2, 2, 2])).unwrap(), 8);
        let k = 3;
        let mut v = vec![3, 2];
        v.extend([1; 10]);
        assert_eq!(max_party_edges(15, &p(v)).unwrap(), 2 * k + 5);
        let mut v = vec![2, 2, 2];
        v.extend([1; 9]);
        assert_eq!(max_party_edges(15, &p(v)).unwrap(), 2 * k + 4);
        assert_eq!(max_party_edges(2, &p(vec![1, 1])).unwrap(), 1);
        assert!(max_party_edges(3, &p(vec![1, 1])).is_err());
        assert!(RegionSizeProfile::new(vec![0, 2]).is_err());
    }

    #[test]
    fn max_cover_of_fixtures() {
        let c = seven_state();
        assert_eq!(max_cover(&c).covered, 7);
        let b = two_qubit_basis();
        let mc = max_cover(&b);
        assert_eq!(mc.covered, 3);
        assert_eq!(mc.witness.covered_mask(&b).unwrap().count_ones(), 3);
    }

    /// Tries every combination of (region or nothing) per party.
    fn exhaustive_extendible(c: &Configuration) -> bool {
        fn rec(c: &Configuration, j: usize, mask: u64) -> bool {
            if j == c.num_parties() {
                return mask == full_mask(c.num_states());
            }
            if rec(c, j + 1, mask) {
                return true;
            }
            (0..c.parties()[j].num_regions())
                .any(|r| rec(c, j + 1, mask | c.parties()[j].region_mask(r)))
        }
        rec(c, 0, 0)
    }

    /// All set partitions of `0..n` into blocks of size at most two; the
    /// value is the best total over pairs of `sizes[a] * sizes[b]`.
    fn brute_force_pairing(sizes: &[usize]) -> usize {
        fn rec(sizes: &[usize], free: Vec<usize>) -> usize {
            let Some((&a, rest)) = free.split_first() else {
                return 0;
            };
            let mut best = rec(sizes, rest.to_vec());
            for (i, &b) in rest.iter().enumerate() {
                let mut next = rest.to_vec();
                next.remove(i);
                best = best.max(sizes[a] * sizes[b] + rec(sizes, next));
            }
            best
        }
        rec(sizes, (0..sizes.len()).collect())
    }

    fn integer_partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in (1..=max.min(n)).rev() {
            for mut rest in integer_partitions(n - first, first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn max_party_edges_matches_brute_force_up_to_ten() {
        for s in 1..=10 {
            for sizes in integer_partitions(s, s) {
                let profile = RegionSizeProfile::new(sizes.clone()).unwrap();
                assert_eq!(
                    max_party_edges(s, &profile).unwrap(),
                    brute_force_pairing(&sizes),
                    "profile {sizes:?}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn find_extension_is_exact(c in arb_configuration(8, 4)) {
            let found = find_extension(&c);
            if let Some(w) = &found {
                prop_assert!(w.validate(&c).is_ok());
            }
            prop_assert_eq!(found.is_some(), exhaustive_extendible(&c));
        }

        #[test]
        fn party_edges_bounded_by_profile(c in arb_configuration(10, 3)) {
            for layout in c.parties() {
                let bound = max_party_edges(c.num_states(), &layout.size_profile()).unwrap();
                prop_assert!(party_edges(layout).len() <= bound);
            }
        }

        #[test]
        fn max_cover_is_full_iff_extendible(c in arb_configuration(8, 4)) {
            let mc = max_cover(&c);
            prop_assert_eq!(mc.witness.covered_mask(&c).unwrap().count_ones() as usize, mc.covered);
            prop_assert_eq!(mc.covered == c.num_states(), !is_unextendible(&c));
        }
    }
}
