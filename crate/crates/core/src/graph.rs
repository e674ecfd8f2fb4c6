//! Vertex and edge-set arithmetic on labeled simple graphs.
//!
//! Every graph here lives on a fixed universe `0..n` of vertices. Edges are
//! unordered pairs stored with the smaller endpoint first, so two edge sets
//! compare equal exactly when they contain the same pairs.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// An unordered vertex pair, stored as `(min, max)`.
pub type Edge = (usize, usize);

/// Normalizes an unordered pair to `(min, max)`.
#[inline]
pub fn edge(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A set of edges over the vertices `0..universe_size`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct EdgeSet {
    universe_size: usize,
    edges: BTreeSet<Edge>,
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EdgeSet")
            .field("n", &self.universe_size)
            .field("edges", &self.edges)
            .finish()
    }
}

impl EdgeSet {
    pub fn empty(universe_size: usize) -> Self {
        EdgeSet {
            universe_size,
            edges: BTreeSet::new(),
        }
    }

    /// Builds an edge set from pairs, rejecting self-loops and out-of-range
    /// endpoints. Duplicate pairs (in either orientation) collapse.
    pub fn from_pairs<I>(universe_size: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = EdgeSet::empty(universe_size);
        for (a, b) in pairs {
            set.insert(a, b)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, a: usize, b: usize) -> Result<bool> {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        for v in [a, b] {
            if v >= self.universe_size {
                return Err(Error::VertexOutOfRange {
                    vertex: v,
                    size: self.universe_size,
                });
            }
        }
        Ok(self.edges.insert(edge(a, b)))
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&edge(a, b))
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges in canonical (lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.universe_size == other.universe_size && self.edges.is_subset(&other.edges)
    }

    /// Edges of `self` that are not in `other`.
    pub fn difference(&self, other: &EdgeSet) -> Result<EdgeSet> {
        check_same_universe(self, other)?;
        Ok(EdgeSet {
            universe_size: self.universe_size,
            edges: self.edges.difference(&other.edges).copied().collect(),
        })
    }

    pub fn intersection(&self, other: &EdgeSet) -> Result<EdgeSet> {
        check_same_universe(self, other)?;
        Ok(EdgeSet {
            universe_size: self.universe_size,
            edges: self.edges.intersection(&other.edges).copied().collect(),
        })
    }

    /// In-place union with another set on the same universe.
    pub fn extend_from(&mut self, other: &EdgeSet) -> Result<()> {
        check_same_universe(self, other)?;
        self.edges.extend(other.edges.iter().copied());
        Ok(())
    }

    /// Vertex degree within this edge set.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }
}

impl<'a> IntoIterator for &'a EdgeSet {
    type Item = Edge;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, Edge>>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter().copied()
    }
}

fn check_same_universe(a: &EdgeSet, b: &EdgeSet) -> Result<()> {
    if a.universe_size != b.universe_size {
        return Err(Error::UniverseMismatch(a.universe_size, b.universe_size));
    }
    Ok(())
}

/// A set of pairwise disjoint edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    universe_size: usize,
    pairs: Vec<Edge>,
}

impl Matching {
    /// Builds a matching, checking that pairs are in range and pairwise
    /// disjoint. Pairs are normalized but kept in the given order.
    pub fn new(universe_size: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = vec![false; universe_size];
        let mut out = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            for v in [a, b] {
                if v >= universe_size {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        size: universe_size,
                    });
                }
                if seen[v] {
                    return Err(Error::Parameter(format!(
                        "vertex {v} appears twice in a matching"
                    )));
                }
                seen[v] = true;
            }
            out.push(edge(a, b));
        }
        Ok(Matching {
            universe_size,
            pairs: out,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn pairs(&self) -> &[Edge] {
        &self.pairs
    }

    pub fn is_perfect(&self) -> bool {
        2 * self.pairs.len() == self.universe_size
    }

    pub fn to_edge_set(&self) -> EdgeSet {
        EdgeSet {
            universe_size: self.universe_size,
            edges: self.pairs.iter().copied().collect(),
        }
    }
}

/// `K_n`: every pair of distinct vertices in `0..n`.
pub fn complete_graph(n: usize) -> EdgeSet {
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.insert((a, b));
        }
    }
    EdgeSet {
        universe_size: n,
        edges,
    }
}

/// All edges between `left` and `right` on a universe of `n` vertices.
pub fn complete_bipartite(n: usize, left: &[usize], right: &[usize]) -> Result<EdgeSet> {
    let mut set = EdgeSet::empty(n);
    for &a in left {
        for &b in right {
            set.insert(a, b)?;
        }
    }
    Ok(set)
}

/// Union of edge sets sharing one universe. An empty slice has no universe
/// to speak of and yields the empty set on zero vertices.
pub fn union_edges(parts: &[EdgeSet]) -> Result<EdgeSet> {
    let Some(first) = parts.first() else {
        return Ok(EdgeSet::empty(0));
    };
    let mut out = EdgeSet::empty(first.universe_size);
    for part in parts {
        out.extend_from(part)?;
    }
    Ok(out)
}

/// Edges of `K_n` missing from `g`.
pub fn complement_edges(g: &EdgeSet) -> EdgeSet {
    let n = g.universe_size;
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            if !g.edges.contains(&(a, b)) {
                edges.insert((a, b));
            }
        }
    }
    EdgeSet {
        universe_size: n,
        edges,
    }
}

/// Two disjoint copies of `K_{2k+2}` on `4k + 4` vertices: block one is
/// `0..2k+2`, block two is `2k+2..4k+4`.
pub fn double_complete_graph(k: usize) -> Result<EdgeSet> {
    if k < 1 {
        return Err(Error::Parameter(format!(
            "double complete graph needs k >= 1, got {k}"
        )));
    }
    let half = 2 * k + 2;
    let n = 2 * half;
    let mut edges = BTreeSet::new();
    for offset in [0, half] {
        for a in 0..half {
            for b in a + 1..half {
                edges.insert((offset + a, offset + b));
            }
        }
    }
    Ok(EdgeSet {
        universe_size: n,
        edges,
    })
}

/// Round-robin (circle method) 1-factorization of `K_n` for even `n`.
///
/// Vertex `n - 1` stays fixed while `0..n-1` rotate. Factor `r` pairs `r`
/// with `n - 1` and `(r + i) mod (n - 1)` with `(r - i) mod (n - 1)` for
/// `i = 1..n/2`. The output is fully deterministic.
pub fn one_factorize_complete(n: usize) -> Result<Vec<Matching>> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddFactorization(n));
    }
    let m = n - 1;
    let mut factors = Vec::with_capacity(m);
    for r in 0..m {
        let mut pairs = Vec::with_capacity(n / 2);
        pairs.push((r, n - 1));
        for i in 1..n / 2 {
            let a = (r + i) % m;
            let b = (r + m - i) % m;
            pairs.push((a, b));
        }
        factors.push(Matching::new(n, pairs)?);
    }
    Ok(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    /// Enumerates every perfect matching of `K_n` by always matching the
    /// lowest free vertex.
    fn brute_force_perfect_matchings(n: usize) -> Vec<BTreeSet<Edge>> {
        fn rec(free: &mut Vec<usize>, current: &mut Vec<Edge>, out: &mut Vec<BTreeSet<Edge>>) {
            if free.is_empty() {
                out.push(current.iter().copied().collect());
                return;
            }
            let a = free.remove(0);
            for idx in 0..free.len() {
                let b = free.remove(idx);
                current.push((a, b));
                rec(free, current, out);
                current.pop();
                free.insert(idx, b);
            }
            free.insert(0, a);
        }
        let mut out = Vec::new();
        rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn complete_graph_sizes() {
        assert_eq!(complete_graph(11).len(), 55);
        assert_eq!(complete_graph(1).len(), 0);
        assert_eq!(complete_graph(0).len(), 0);
        let k = 3;
        assert_eq!(complete_graph(15).len(), 8 * k * k + 10 * k + 3);
    }

    #[test]
    fn union_identity_and_mismatch() {
        let x = EdgeSet::from_pairs(5, [(0, 1), (3, 2)]).unwrap();
        assert_eq!(union_edges(&[x.clone(), EdgeSet::empty(5)]).unwrap(), x);
        assert!(matches!(
            union_edges(&[x, EdgeSet::empty(6)]),
            Err(Error::UniverseMismatch(5, 6))
        ));
    }

    #[test]
    fn edge_set_rejects_bad_pairs() {
        assert!(matches!(
            EdgeSet::from_pairs(3, [(1, 1)]),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            EdgeSet::from_pairs(3, [(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, size: 3 })
        ));
        let s = EdgeSet::from_pairs(3, [(2, 0), (0, 2)]).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(0, 2)]);
    }

    #[test]
    fn complement_basics() {
        assert!(complement_edges(&complete_graph(6)).is_empty());
        assert_eq!(complement_edges(&EdgeSet::empty(4)), complete_graph(4));

        // complement of K_{6,6} is two disjoint K_6
        let left: Vec<usize> = (0..6).collect();
        let right: Vec<usize> = (6..12).collect();
        let kb = complete_bipartite(12, &left, &right).unwrap();
        assert_eq!(kb.len(), 36);
        let comp = complement_edges(&kb);
        assert_eq!(comp.len(), 30);
        assert_eq!(comp, double_complete_graph(2).unwrap());
    }

    #[test]
    fn double_complete_graph_shapes() {
        assert_eq!(double_complete_graph(1).unwrap().len(), 12);
        assert_eq!(double_complete_graph(2).unwrap().len(), 30);
        assert!(double_complete_graph(0).is_err());
        for k in 1..=6 {
            let half = 2 * k + 2;
            let left: Vec<usize> = (0..half).collect();
            let right: Vec<usize> = (half..2 * half).collect();
            let kb = complete_bipartite(2 * half, &left, &right).unwrap();
            let dbl = double_complete_graph(k).unwrap();
            assert_eq!(union_edges(&[dbl, kb]).unwrap(), complete_graph(2 * half));
        }
    }

    #[test]
    fn factorization_small_cases() {
        let f2 = one_factorize_complete(2).unwrap();
        assert_eq!(f2.len(), 1);
        assert_eq!(f2[0].pairs(), &[(0, 1)]);

        let f6 = one_factorize_complete(6).unwrap();
        assert_eq!(f6.len(), 5);
        assert!(f6.iter().all(|m| m.pairs().len() == 3 && m.is_perfect()));
        let union = union_edges(&f6.iter().map(Matching::to_edge_set).collect::<Vec<_>>()).unwrap();
        assert_eq!(union, complete_graph(6));

        assert!(one_factorize_complete(5).is_err());
        assert!(one_factorize_complete(0).is_err());
    }

    #[test]
    fn factorization_of_k4_matches_brute_force() {
        let oracle: BTreeSet<BTreeSet<Edge>> =
            brute_force_perfect_matchings(4).into_iter().collect();
        assert_eq!(oracle.len(), 3);
        let ours: BTreeSet<BTreeSet<Edge>> = one_factorize_complete(4)
            .unwrap()
            .iter()
            .map(|m| m.pairs().iter().copied().collect())
            .collect();
        assert_eq!(ours, oracle);
    }

    #[test]
    fn factorization_invariants_up_to_24() {
        for n in (2..=24).step_by(2) {
            let factors = one_factorize_complete(n).unwrap();
            assert_eq!(factors.len(), n - 1);
            let mut seen = BTreeSet::new();
            for m in &factors {
                assert!(m.is_perfect());
                for &e in m.pairs() {
                    assert!(seen.insert(e), "edge {e:?} repeated for n={n}");
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    fn arb_edge_set(max_n: usize) -> impl Strategy<Value = EdgeSet> {
        (0..=max_n).prop_flat_map(|n| {
            let pairs: Vec<Edge> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .collect();
            let len = pairs.len();
            proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
                EdgeSet::from_pairs(
                    n,
                    pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| *e),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn complement_is_involution(g in arb_edge_set(16)) {
            prop_assert_eq!(complement_edges(&complement_edges(&g)), g);
        }

        #[test]
        fn union_is_order_insensitive(
            parts in proptest::collection::vec(arb_edge_set(9), 1..5),
            seed in any::<u64>(),
        ) {
            let n = parts[0].universe_size();
            let parts: Vec<EdgeSet> = parts
                .into_iter()
                .map(|p| EdgeSet::from_pairs(n, p.iter().filter(|&(_, b)| b < n)).unwrap())
                .collect();
            let mut shuffled = parts.clone();
            shuffled.shuffle(&mut StdRng::seed_from_u64(seed));
            let u1 = union_edges(&parts).unwrap();
            let u2 = union_edges(&shuffled).unwrap();
            prop_assert_eq!(&u1, &u2);
            prop_assert_eq!(union_edges(&[u1.clone(), u1.clone()]).unwrap(), u1);
        }
    }
}
