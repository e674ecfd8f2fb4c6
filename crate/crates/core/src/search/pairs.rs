//! Systems of pairs on parties and the largest systems that avoid the
//! extension rule.
//!
//! A system assigns each party a set of pairwise-disjoint vertex pairs. It
//! violates the rule with excess `e` when some `i` distinct parties each
//! contribute one pair and together cover at least `i + e` vertices. Taking
//! one pair from each connected piece of such a selection shows this is the
//! same as a rainbow matching (disjoint pairs from distinct parties) of
//! size `e`, which is what the search looks for.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::{Meter, Outcome, SearchBudget, Stopped};
use crate::error::{Error, Result};

pub type Pair = (usize, usize);

/// Pairs per party plus the rule's excess, labeled canonically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PairSystem {
    parties: Vec<Vec<Pair>>,
    excess: usize,
}

impl PairSystem {
    /// Validates and relabels so that vertices are `0..n` introduced in
    /// first-use order, with each party's pairs sorted.
    pub fn new(parties: Vec<Vec<Pair>>, excess: usize) -> Result<Self> {
        for (j, party) in parties.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &(a, b) in party {
                if a == b {
                    return Err(Error::Parameter(format!(
                        "party {j}: pair ({a}, {a}) is a loop"
                    )));
                }
                if !seen.insert(a) || !seen.insert(b) {
                    return Err(Error::Parameter(format!(
                        "party {j}: pairs are not disjoint"
                    )));
                }
            }
        }
        Ok(Self::canonical_with_map(&parties, excess).0)
    }

    fn canonical_with_map(
        parties: &[Vec<Pair>],
        excess: usize,
    ) -> (Self, std::collections::HashMap<usize, usize>) {
        let (parties, map) = canonical_labels(parties);
        (PairSystem { parties, excess }, map)
    }

    pub fn parties(&self) -> &[Vec<Pair>] {
        &self.parties
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn excess(&self) -> usize {
        self.excess
    }

    pub fn num_vertices(&self) -> usize {
        self.parties
            .iter()
            .flatten()
            .map(|&(a, b)| a.max(b) + 1)
            .max()
            .unwrap_or(0)
    }
}

fn canonical_labels(
    parties: &[Vec<Pair>],
) -> (Vec<Vec<Pair>>, std::collections::HashMap<usize, usize>) {
    let mut map = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(parties.len());
    for party in parties {
        // Order pairs by their already-labeled endpoint, then by first
        // appearance, and label new vertices as they are met.
        let mut pending: Vec<Pair> = party.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let key = |p: &Pair, map: &std::collections::HashMap<usize, usize>| {
            let la = map.get(&p.0).copied();
            let lb = map.get(&p.1).copied();
            match (la, lb) {
                (Some(x), Some(y)) => (0, x.min(y)),
                (Some(x), None) | (None, Some(x)) => (1, x),
                (None, None) => (2, 0),
            }
        };
        pending.sort_by_key(|p| key(p, &map));
        for &(a, b) in &pending {
            for v in [a, b] {
                let next = map.len();
                map.entry(v).or_insert(next);
            }
        }
        let mut labeled: Vec<Pair> = pending
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (map[&a], map[&b]);
                (x.min(y), x.max(y))
            })
            .collect();
        labeled.sort_unstable();
        out.push(labeled);
    }
    (out, map)
}

/// One pair from each of `i` distinct parties covering at least
/// `i + excess` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub choices: Vec<(usize, Pair)>,
}

impl Violation {
    pub fn covered(&self) -> usize {
        let vs: BTreeSet<usize> = self
            .choices
            .iter()
            .flat_map(|&(_, (a, b))| [a, b])
            .collect();
        vs.len()
    }
}

fn pair_mask(p: Pair) -> u128 {
    (1u128 << p.0) | (1u128 << p.1)
}

/// Rainbow matching of size `need` avoiding `blocked`, parties taken in
/// index order from `from`. Writes the picks into `picked`.
fn rainbow(
    parties: &[Vec<Pair>],
    from: usize,
    need: usize,
    blocked: u128,
    picked: &mut Vec<(usize, Pair)>,
) -> bool {
    if need == 0 {
        return true;
    }
    for j in from..parties.len() {
        if parties.len() - j < need {
            return false;
        }
        for &p in &parties[j] {
            let m = pair_mask(p);
            if blocked & m != 0 {
                continue;
            }
            picked.push((j, p));
            if rainbow(parties, j + 1, need - 1, blocked | m, picked) {
                return true;
            }
            picked.pop();
        }
    }
    false
}

/// Exact check for a violating selection; returns the first one found in
/// party-then-pair order.
pub fn violates_extension_rule(ps: &PairSystem) -> Option<Violation> {
    let mut picked = Vec::new();
    rainbow(&ps.parties, 0, ps.excess, 0, &mut picked).then_some(Violation { choices: picked })
}

/// Each pair of every party contains exactly one anchor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnchorConstraint {
    anchors: BTreeSet<usize>,
}

impl AnchorConstraint {
    pub fn new(anchors: impl IntoIterator<Item = usize>) -> Self {
        AnchorConstraint {
            anchors: anchors.into_iter().collect(),
        }
    }

    /// Anchors `0..n`, the labels the search uses.
    pub fn first(n: usize) -> Self {
        Self::new(0..n)
    }

    pub fn anchors(&self) -> &BTreeSet<usize> {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn admits(&self, ps: &PairSystem) -> bool {
        ps.parties
            .iter()
            .flatten()
            .all(|&(a, b)| self.anchors.contains(&a) != self.anchors.contains(&b))
    }
}

/// The largest party count, or a lower bound when the search hit the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MaxParties {
    Exact(usize),
    AtLeast(usize),
}

impl MaxParties {
    pub fn value(self) -> usize {
        match self {
            MaxParties::Exact(m) | MaxParties::AtLeast(m) => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSearchResult {
    pub max_parties: MaxParties,
    pub witness: PairSystem,
    /// The anchors in the witness's labels, for anchored searches.
    pub witness_anchors: Option<AnchorConstraint>,
    pub nodes: u64,
}

/// Best system seen before the budget ran out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSearchPartial {
    pub best_so_far: usize,
    pub nodes: u64,
}

struct PairSearch<'a> {
    ppp: usize,
    excess: usize,
    anchored: bool,
    distinct: bool,
    cap: usize,
    meter: Meter<'a>,
}

/// Best `(party count, first system reaching it)` below a node.
type Best = (usize, Vec<Vec<Pair>>);

impl PairSearch<'_> {
    /// Pairs `e` over `0..n + 2 * ppp` such that no rainbow matching of size
    /// `excess - 1` avoids `e`: exactly the pairs a new party may use.
    fn allowed_pairs(&self, system: &[Vec<Pair>], n: usize) -> Vec<Pair> {
        let pool = n + 2 * self.ppp;
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        for a in 0..pool {
            for b in a + 1..pool {
                if a >= n && b >= n && b != a + 1 {
                    continue;
                }
                if self.anchored && (a < self.ppp) == (b < self.ppp) {
                    continue;
                }
                scratch.clear();
                if !rainbow(system, 0, self.excess - 1, pair_mask((a, b)), &mut scratch) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// New parties from allowed pairs: fresh vertices (`>= n`) must appear
    /// in increasing order in the sorted pair list, and the party's key must
    /// not precede `min_key`.
    fn children(&self, system: &[Vec<Pair>], min_key: &[Pair]) -> Vec<Vec<Pair>> {
        let n = vertex_count(system);
        let allowed = self.allowed_pairs(system, n);
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(self.ppp);
        self.choose(&allowed, 0, 0, n, &mut current, min_key, system, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        &self,
        allowed: &[Pair],
        from: usize,
        used: u128,
        n: usize,
        current: &mut Vec<Pair>,
        min_key: &[Pair],
        system: &[Vec<Pair>],
        out: &mut Vec<Vec<Pair>>,
    ) {
        if current.len() == self.ppp {
            if fresh_canonical(current, n)
                && party_key(current, &system[0]).as_slice() >= min_key
                && !(self.distinct && system.contains(current))
            {
                out.push(current.clone());
            }
            return;
        }
        for i in from..allowed.len() {
            let p = allowed[i];
            let m = pair_mask(p);
            if used & m != 0 {
                continue;
            }
            current.push(p);
            self.choose(allowed, i + 1, used | m, n, current, min_key, system, out);
            current.pop();
        }
    }

    fn dfs(&self, system: &mut Vec<Vec<Pair>>) -> std::result::Result<Best, Stopped> {
        self.meter.tick(system.len())?;
        let mut best: Best = (system.len(), system.clone());
        self.meter.record_best(system.len());
        if system.len() >= self.cap {
            return Ok(best);
        }
        let min_key = match system.len() {
            1 => Vec::new(),
            _ => party_key(system.last().expect("nonempty"), &system[0]),
        };
        for child in self.children(system, &min_key) {
            system.push(child);
            let below = self.dfs(system);
            system.pop();
            let below = below?;
            if below.0 > best.0 {
                best = below;
            }
            if best.0 >= self.cap {
                break;
            }
        }
        Ok(best)
    }
}

fn vertex_count(system: &[Vec<Pair>]) -> usize {
    system
        .iter()
        .flatten()
        .map(|&(_, b)| b + 1)
        .max()
        .unwrap_or(0)
}

/// Fresh vertices `n, n+1, ...` are used contiguously and first appear in
/// increasing order when reading the sorted pairs.
fn fresh_canonical(pairs: &[Pair], n: usize) -> bool {
    let mut next = n;
    for &(a, b) in pairs {
        for v in [a, b] {
            if v >= n {
                if v > next {
                    return false;
                }
                if v == next {
                    next += 1;
                }
            }
        }
    }
    true
}

/// How a party meets the first party: each pair's endpoints, with vertices
/// outside the first party collapsed to one symbol, sorted.
fn party_key(party: &[Pair], first: &[Pair]) -> Vec<Pair> {
    let outside = usize::MAX;
    let in_first: BTreeSet<usize> = first.iter().flat_map(|&(a, b)| [a, b]).collect();
    let label = |v: usize| if in_first.contains(&v) { v } else { outside };
    let mut key: Vec<Pair> = party
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (label(a), label(b));
            (x.min(y), x.max(y))
        })
        .collect();
    key.sort_unstable();
    key
}

/// Options for [`pair_config_max_parties`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairSearchOptions {
    /// Restrict every pair to contain exactly one anchor. Only the size of
    /// the anchor set matters; results name the anchors in witness labels.
    pub anchors: Option<AnchorConstraint>,
    /// Forbid two parties with the same set of pairs.
    pub distinct_parties: bool,
    /// Stop once this many parties fit and report [`MaxParties::AtLeast`].
    pub max_parties: usize,
}

impl Default for PairSearchOptions {
    fn default() -> Self {
        PairSearchOptions {
            anchors: None,
            distinct_parties: false,
            max_parties: 12,
        }
    }
}

/// The largest number of parties, each holding `pairs_per_party` disjoint
/// pairs, that avoid the extension rule with the given excess.
///
/// Exhaustive over canonical systems: the first party is fixed, new
/// vertices enter in first-use order, and later parties are generated in
/// nondecreasing order of how they meet the first party.
pub fn pair_config_max_parties(
    pairs_per_party: usize,
    excess: usize,
    options: &PairSearchOptions,
    budget: &SearchBudget,
) -> Result<Outcome<PairSearchResult, PairSearchPartial>> {
    budget.validate()?;
    let max_parties = options.max_parties;
    let anchors = options.anchors.as_ref();
    if pairs_per_party == 0 || excess == 0 {
        return Err(Error::Parameter(
            "pairs per party and excess must be at least 1".into(),
        ));
    }
    if max_parties == 0 {
        return Err(Error::Parameter("party cap must be at least 1".into()));
    }
    if let Some(a) = anchors {
        if a.len() != pairs_per_party {
            return Err(Error::Parameter(format!(
                "{} anchors for {pairs_per_party} pairs per party",
                a.len()
            )));
        }
    }
    if 2 * pairs_per_party * max_parties > 128 {
        return Err(Error::Parameter(format!(
            "{max_parties} parties of {pairs_per_party} pairs exceed 128 vertices"
        )));
    }
    let search = PairSearch {
        ppp: pairs_per_party,
        excess,
        anchored: anchors.is_some(),
        distinct: options.distinct_parties,
        cap: max_parties,
        meter: Meter::new(budget, "pair-config"),
    };
    let first: Vec<Pair> = if search.anchored {
        (0..pairs_per_party)
            .map(|i| (i, pairs_per_party + i))
            .collect()
    } else {
        (0..pairs_per_party).map(|i| (2 * i, 2 * i + 1)).collect()
    };
    let finish = |best: Best, search: &PairSearch| {
        let max_parties = if best.0 >= search.cap {
            MaxParties::AtLeast(search.cap)
        } else {
            MaxParties::Exact(best.0)
        };
        let (witness, map) = PairSystem::canonical_with_map(&best.1, excess);
        let witness_anchors = search
            .anchored
            .then(|| AnchorConstraint::new((0..search.ppp).filter_map(|a| map.get(&a).copied())));
        Outcome::Complete(PairSearchResult {
            max_parties,
            witness,
            witness_anchors,
            nodes: search.meter.nodes(),
        })
    };
    if excess <= 1 {
        // a single pair already covers one more vertex than parties used
        return Ok(finish((0, Vec::new()), &search));
    }
    let root = vec![first];
    if search.cap == 1 {
        return Ok(finish((1, root), &search));
    }
    if search.meter.tick(1).is_err() {
        return Ok(Outcome::Exhausted(PairSearchPartial {
            best_so_far: 1,
            nodes: search.meter.nodes(),
        }));
    }
    let children = search.children(&root, &[]);
    let results: Vec<std::result::Result<Best, Stopped>> = children
        .into_par_iter()
        .map(|child| {
            let mut system = root.clone();
            system.push(child);
            search.dfs(&mut system)
        })
        .collect();
    let mut best: Best = (1, root);
    let mut stopped = false;
    for r in results {
        match r {
            Ok(b) if b.0 > best.0 => best = b,
            Ok(_) => {}
            Err(Stopped) => stopped = true,
        }
        if best.0 >= search.cap {
            break;
        }
    }
    if stopped && best.0 < search.cap {
        return Ok(Outcome::Exhausted(PairSearchPartial {
            best_so_far: best.0,
            nodes: search.meter.nodes(),
        }));
    }
    Ok(finish(best, &search))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn system(parties: &[&[Pair]], excess: usize) -> PairSystem {
        PairSystem::new(parties.iter().map(|p| p.to_vec()).collect(), excess).unwrap()
    }

    /// Every selection of one pair from each of some set of parties.
    fn naive_violation(ps: &PairSystem) -> bool {
        fn go(ps: &PairSystem, j: usize, covered: &BTreeSet<usize>, used: usize) -> bool {
            if covered.len() >= used + ps.excess() {
                return true;
            }
            if j == ps.num_parties() {
                return false;
            }
            if go(ps, j + 1, covered, used) {
                return true;
            }
            ps.parties()[j].iter().any(|&(a, b)| {
                let mut c = covered.clone();
                c.insert(a);
                c.insert(b);
                go(ps, j + 1, &c, used + 1)
            })
        }
        go(ps, 0, &BTreeSet::new(), 0)
    }

    fn arb_pair_system() -> impl Strategy<Value = PairSystem> {
        (
            1usize..=5,
            1usize..=3,
            1usize..=4,
            4usize..=10,
            any::<u64>(),
        )
            .prop_map(|(m, ppp, excess, n, seed)| {
                let mut rng = StdRng::seed_from_u64(seed);
                let n = n.max(2 * ppp);
                let parties = (0..m)
                    .map(|_| {
                        let mut vs: Vec<usize> = (0..n).collect();
                        vs.shuffle(&mut rng);
                        (0..ppp).map(|i| (vs[2 * i], vs[2 * i + 1])).collect()
                    })
                    .collect();
                PairSystem::new(parties, excess).unwrap()
            })
    }

    #[test]
    fn canonical_labels_follow_first_use() {
        let ps = system(&[&[(5, 9), (1, 2)], &[(2, 7), (9, 3)]], 2);
        assert_eq!(ps.parties()[0], vec![(0, 1), (2, 3)]);
        assert_eq!(ps.parties()[1], vec![(1, 4), (3, 5)]);
        assert_eq!(ps.num_vertices(), 6);
        assert!(PairSystem::new(vec![vec![(0, 1), (1, 2)]], 1).is_err());
        assert!(PairSystem::new(vec![vec![(3, 3)]], 1).is_err());
    }

    #[test]
    fn rule_examples() {
        let three = system(&[&[(0, 1)], &[(2, 3)], &[(4, 5)]], 3);
        let v = violates_extension_rule(&three).unwrap();
        assert_eq!(v.choices.len(), 3);
        assert_eq!(v.covered(), 6);
        let two = system(&[&[(0, 1)], &[(2, 3)]], 2);
        assert!(violates_extension_rule(&two).is_some());
        // the three perfect matchings of K4 on four vertices
        let k4 = system(
            &[&[(0, 1), (2, 3)], &[(0, 2), (1, 3)], &[(0, 3), (1, 2)]],
            2,
        );
        assert!(violates_extension_rule(&k4).is_none());
        assert!(!naive_violation(&k4));
    }

    #[test]
    fn searched_maxima() {
        let b = SearchBudget::default();
        let run = |ppp, e, anchored: bool| {
            let options = PairSearchOptions {
                anchors: anchored.then(|| AnchorConstraint::first(ppp)),
                max_parties: 8,
                ..Default::default()
            };
            pair_config_max_parties(ppp, e, &options, &b)
                .unwrap()
                .complete()
                .unwrap()
        };
        assert_eq!(run(2, 2, false).max_parties, MaxParties::Exact(3));
        assert_eq!(run(1, 1, false).max_parties, MaxParties::Exact(0));
        assert_eq!(run(1, 2, false).max_parties, MaxParties::AtLeast(8));
        assert_eq!(run(3, 2, false).max_parties, MaxParties::Exact(1));
        let r = run(2, 2, false);
        assert!(violates_extension_rule(&r.witness).is_none());
        assert_eq!(r.witness.num_parties(), 3);
    }

    fn max_of(ppp: usize, e: usize, anchored: bool, distinct: bool) -> MaxParties {
        let options = PairSearchOptions {
            anchors: anchored.then(|| AnchorConstraint::first(ppp)),
            distinct_parties: distinct,
            max_parties: 6,
        };
        pair_config_max_parties(ppp, e, &options, &SearchBudget::default())
            .unwrap()
            .complete()
            .unwrap()
            .max_parties
    }

    #[test]
    fn distinct_party_maxima() {
        assert_eq!(max_of(3, 3, false, true), MaxParties::Exact(4));
        assert_eq!(max_of(3, 3, true, true), MaxParties::Exact(2));
        assert_eq!(max_of(2, 2, false, true), MaxParties::Exact(3));
        // a repeated party admits one more anchored party
        assert_eq!(max_of(3, 3, true, false), MaxParties::Exact(4));
    }

    #[test]
    fn maxima_are_monotone() {
        let rank = |m: MaxParties| match m {
            MaxParties::Exact(v) => (v, 0),
            MaxParties::AtLeast(v) => (v, 1),
        };
        for ppp in 1..=3 {
            for distinct in [false, true] {
                let mut prev = None;
                for e in 1..=3 {
                    let free = rank(max_of(ppp, e, false, distinct));
                    let anchored = rank(max_of(ppp, e, true, distinct));
                    assert!(anchored <= free, "ppp {ppp} e {e}");
                    if let Some(p) = prev {
                        assert!(free >= p, "ppp {ppp} e {e}");
                    }
                    prev = Some(free);
                    if distinct {
                        assert!(free <= rank(max_of(ppp, e, false, false)));
                    }
                }
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let b = SearchBudget::default().with_node_limit(5);
        let free = PairSearchOptions::default();
        let out = pair_config_max_parties(3, 3, &free, &b).unwrap();
        assert!(out.is_exhausted());
        assert!(pair_config_max_parties(0, 3, &free, &b).is_err());
        let wrong = PairSearchOptions {
            anchors: Some(AnchorConstraint::first(2)),
            ..free
        };
        assert!(pair_config_max_parties(3, 3, &wrong, &b).is_err());
    }

    #[test]
    fn anchored_witness_obeys_anchors() {
        let options = PairSearchOptions {
            anchors: Some(AnchorConstraint::first(2)),
            ..Default::default()
        };
        let r = pair_config_max_parties(2, 2, &options, &SearchBudget::default())
            .unwrap()
            .complete()
            .unwrap();
        assert!(r.witness_anchors.as_ref().unwrap().admits(&r.witness));
        assert!(violates_extension_rule(&r.witness).is_none());
        assert!(r.max_parties.value() <= 3, "{r:?}");
    }

    proptest! {
        #[test]
        fn rule_matches_naive_selection(ps in arb_pair_system()) {
            let fast = violates_extension_rule(&ps);
            prop_assert_eq!(fast.is_some(), naive_violation(&ps));
            if let Some(v) = fast {
                let parties: BTreeSet<usize> = v.choices.iter().map(|c| c.0).collect();
                prop_assert_eq!(parties.len(), v.choices.len());
                prop_assert!(v.covered() >= v.choices.len() + ps.excess());
            }
        }

        #[test]
        fn rule_is_symmetric(ps in arb_pair_system(), seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = ps.num_vertices();
            let mut relabel: Vec<usize> = (0..n).collect();
            relabel.shuffle(&mut rng);
            let mut parties: Vec<Vec<Pair>> = ps
                .parties()
                .iter()
                .map(|p| p.iter().map(|&(a, b)| (relabel[a], relabel[b])).collect())
                .collect();
            parties.shuffle(&mut rng);
            let moved = PairSystem::new(parties, ps.excess()).unwrap();
            prop_assert_eq!(
                violates_extension_rule(&ps).is_some(),
                violates_extension_rule(&moved).is_some()
            );
        }

        #[test]
        fn canonical_form_is_idempotent(ps in arb_pair_system()) {
            let again = PairSystem::new(ps.parties().to_vec(), ps.excess()).unwrap();
            prop_assert_eq!(again, ps);
        }
    }
}
