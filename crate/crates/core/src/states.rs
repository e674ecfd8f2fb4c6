//! Concrete qubit product states for configurations, and the way back.
//!
//! A configuration is realized by giving every region a vector from a
//! family of orthonormal qubit bases `{b_i, b_i_perp}`: paired regions get
//! the two halves of one basis. [`recover_orthogonality_graph`] reads the
//! regions and pairings back off a list of states.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, ExtensionWitness, PartyLayout};

/// Inner products at or below this magnitude count as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-9;

/// Angle of the vector used on parties a witness leaves unconstrained. It
/// lies outside the quarter-turn that holds every family angle.
pub const FRESH_ANGLE: f64 = PI / 3.0;

const NORM_TOL: f64 = 1e-12;

/// A unit vector in C^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qubit {
    pub a0: Complex64,
    pub a1: Complex64,
}

impl Qubit {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = a0.norm_sqr() + a1.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Parameter(format!(
                "qubit has squared norm {norm}, expected 1"
            )));
        }
        Ok(Qubit { a0, a1 })
    }

    /// `(cos t, sin t)`.
    pub fn from_angle(theta: f64) -> Self {
        Qubit {
            a0: Complex64::new(theta.cos(), 0.0),
            a1: Complex64::new(theta.sin(), 0.0),
        }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Qubit) -> Complex64 {
        self.a0.conj() * other.a0 + self.a1.conj() * other.a1
    }

    pub fn overlap(&self, other: &Qubit) -> f64 {
        self.inner(other).norm()
    }

    /// The orthogonal complement `(-conj a1, conj a0)`.
    pub fn perp(&self) -> Qubit {
        Qubit {
            a0: -self.a1.conj(),
            a1: self.a0.conj(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }
}

/// Which half of an orthonormal basis a region uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Perp,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Perp,
            Side::Perp => Side::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub basis: usize,
    pub side: Side,
}

impl BasisLabel {
    pub fn plus(basis: usize) -> Self {
        BasisLabel {
            basis,
            side: Side::Plus,
        }
    }

    pub fn perp(basis: usize) -> Self {
        BasisLabel {
            basis,
            side: Side::Perp,
        }
    }

    pub fn opposite(self) -> Self {
        BasisLabel {
            basis: self.basis,
            side: self.side.opposite(),
        }
    }
}

/// `N` real orthonormal bases with angles `theta_i = (i + 1) pi / (4 (N + 1))`.
///
/// All angles sit in `(0, pi/4)` and differ pairwise, so vectors from
/// different bases are never equal or orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisFamily {
    angles: Vec<f64>,
}

pub fn make_basis_family(n: usize) -> Result<BasisFamily> {
    if n < 1 {
        return Err(Error::Parameter(
            "a basis family needs at least one basis".into(),
        ));
    }
    let step = PI / (4.0 * (n as f64 + 1.0));
    Ok(BasisFamily {
        angles: (0..n).map(|i| (i as f64 + 1.0) * step).collect(),
    })
}

impl BasisFamily {
    pub fn count(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn vector(&self, label: BasisLabel) -> Result<Qubit> {
        let theta = *self.angles.get(label.basis).ok_or_else(|| {
            Error::InvalidAssignment(format!(
                "basis {} requested from a family of {}",
                label.basis,
                self.angles.len()
            ))
        })?;
        Ok(match label.side {
            Side::Plus => Qubit::from_angle(theta),
            Side::Perp => Qubit::from_angle(theta + PI / 2.0),
        })
    }
}

/// A basis label for every region of every party.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolicAssignment {
    parties: Vec<Vec<BasisLabel>>,
}

impl SymbolicAssignment {
    pub fn new(parties: Vec<Vec<BasisLabel>>) -> Self {
        SymbolicAssignment { parties }
    }

    /// Default labels: on each party the `r`-th pair uses basis `r`, lower
    /// region `Plus`; unpaired regions get further fresh bases.
    pub fn standard(c: &Configuration) -> Self {
        let parties = c
            .parties()
            .iter()
            .map(|layout| {
                let mut labels = vec![BasisLabel::plus(0); layout.num_regions()];
                let mut next = 0;
                for (a, b) in layout.pairs() {
                    labels[a] = BasisLabel::plus(next);
                    labels[b] = BasisLabel::perp(next);
                    next += 1;
                }
                for (r, label) in labels.iter_mut().enumerate() {
                    if layout.partner(r).is_none() {
                        *label = BasisLabel::plus(next);
                        next += 1;
                    }
                }
                labels
            })
            .collect();
        SymbolicAssignment { parties }
    }

    pub fn parties(&self) -> &[Vec<BasisLabel>] {
        &self.parties
    }

    pub fn label(&self, party: usize, region: usize) -> Option<BasisLabel> {
        self.parties.get(party)?.get(region).copied()
    }

    /// Number of bases a family must hold to realize this assignment.
    pub fn bases_needed(&self) -> usize {
        self.parties
            .iter()
            .flatten()
            .map(|l| l.basis + 1)
            .max()
            .unwrap_or(0)
    }

    /// Checks shape and consistency with the configuration's pairings.
    ///
    /// Labels on one party are distinct, paired regions share a basis with
    /// opposite sides, and two halves of one basis never sit on unpaired
    /// regions (that would be an orthogonality the configuration lacks).
    pub fn validate(&self, c: &Configuration) -> Result<()> {
        if self.parties.len() != c.num_parties() {
            return Err(Error::InvalidAssignment(format!(
                "{} parties labeled, configuration has {}",
                self.parties.len(),
                c.num_parties()
            )));
        }
        for (j, (labels, layout)) in self.parties.iter().zip(c.parties()).enumerate() {
            check_party_labels(j, labels, layout)?;
        }
        Ok(())
    }

    /// Reorders regions alongside [`Configuration::canonical`].
    pub fn canonical_for(&self, c: &Configuration) -> SymbolicAssignment {
        let parties = self
            .parties
            .iter()
            .zip(c.parties())
            .map(|(labels, layout)| {
                let mut order: Vec<usize> = (0..layout.num_regions()).collect();
                order.sort_by_key(|&r| layout.regions()[r][0]);
                order.iter().map(|&r| labels[r]).collect()
            })
            .collect();
        SymbolicAssignment { parties }
    }
}

fn check_party_labels(j: usize, labels: &[BasisLabel], layout: &PartyLayout) -> Result<()> {
    if labels.len() != layout.num_regions() {
        return Err(Error::InvalidAssignment(format!(
            "party {j}: {} labels for {} regions",
            labels.len(),
            layout.num_regions()
        )));
    }
    let mut seen = HashSet::new();
    for (r, label) in labels.iter().enumerate() {
        if !seen.insert(*label) {
            return Err(Error::InvalidAssignment(format!(
                "party {j}: label {label:?} used twice"
            )));
        }
        match layout.partner(r) {
            Some(q) if labels[q] != label.opposite() => {
                return Err(Error::InvalidAssignment(format!(
                    "party {j}: paired regions {r} and {q} are not opposite halves of one basis"
                )));
            }
            None if labels.contains(&label.opposite()) => {
                return Err(Error::InvalidAssignment(format!(
                    "party {j}: unpaired region {r} is orthogonal to another region"
                )));
            }
            _ => {}
        }
    }
    Ok(())
}

/// One qubit per party.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    pub qubits: Vec<Qubit>,
}

impl ProductState {
    pub fn num_parties(&self) -> usize {
        self.qubits.len()
    }

    /// Per-party overlaps `|<a_j|b_j>|`.
    pub fn party_overlaps(&self, other: &ProductState) -> Vec<f64> {
        self.qubits
            .iter()
            .zip(&other.qubits)
            .map(|(a, b)| a.overlap(b))
            .collect()
    }

    /// Full inner product, the product of the per-party inner products.
    pub fn inner(&self, other: &ProductState) -> Complex64 {
        self.qubits
            .iter()
            .zip(&other.qubits)
            .map(|(a, b)| a.inner(b))
            .product()
    }
}

/// Turns a configuration into concrete product states, one per vertex.
pub fn realize_configuration(
    c: &Configuration,
    a: &SymbolicAssignment,
    f: &BasisFamily,
) -> Result<Vec<ProductState>> {
    a.validate(c)?;
    if a.bases_needed() > f.count() {
        return Err(Error::InvalidAssignment(format!(
            "assignment needs {} bases, family has {}",
            a.bases_needed(),
            f.count()
        )));
    }
    let mut states = vec![
        ProductState {
            qubits: Vec::with_capacity(c.num_parties())
        };
        c.num_states()
    ];
    for (j, layout) in c.parties().iter().enumerate() {
        for (r, region) in layout.regions().iter().enumerate() {
            let q = f.vector(a.parties[j][r])?;
            for &v in region {
                states[v].qubits.push(q);
            }
        }
    }
    Ok(states)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalityVerdict {
    pub orthonormal: bool,
    /// Pairs `(a, b)`, `a < b`, with no orthogonal party.
    pub offending: Vec<(usize, usize)>,
}

/// Checks that every pair of distinct states is orthogonal on some party.
pub fn pairwise_orthogonality_check(
    states: &[ProductState],
    tol: f64,
) -> Result<OrthogonalityVerdict> {
    check_equal_lengths(states)?;
    let mut offending = Vec::new();
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            let orthogonal = states[a]
                .qubits
                .iter()
                .zip(&states[b].qubits)
                .any(|(x, y)| x.overlap(y) <= tol);
            if !orthogonal {
                offending.push((a, b));
            }
        }
    }
    Ok(OrthogonalityVerdict {
        orthonormal: offending.is_empty(),
        offending,
    })
}

fn check_equal_lengths(states: &[ProductState]) -> Result<usize> {
    let p = states.first().map_or(0, ProductState::num_parties);
    if let Some(i) = states.iter().position(|s| s.num_parties() != p) {
        return Err(Error::Parameter(format!(
            "state {i} has {} parties, expected {p}",
            states[i].num_parties()
        )));
    }
    Ok(p)
}

/// Groups each party's vectors into equal-up-to-phase classes and links
/// classes whose vectors are orthogonal.
///
/// Two vectors are equal when their overlap is at least `1 - tol` and
/// distinct when it is at most `1 - 10 tol`; anything between is reported
/// as [`Error::AmbiguousGrouping`]. Regions come out ordered by smallest
/// vertex.
pub fn recover_orthogonality_graph(states: &[ProductState], tol: f64) -> Result<Configuration> {
    let p = check_equal_lengths(states)?;
    let s = states.len();
    let mut parties = Vec::with_capacity(p);
    for j in 0..p {
        let mut reps: Vec<usize> = Vec::new();
        let mut regions: Vec<Vec<usize>> = Vec::new();
        for v in 0..s {
            let mut home = None;
            for (r, &rep) in reps.iter().enumerate() {
                let overlap = states[v].qubits[j].overlap(&states[rep].qubits[j]);
                if overlap >= 1.0 - tol {
                    home = Some(r);
                    break;
                }
                if overlap > 1.0 - 10.0 * tol {
                    return Err(Error::AmbiguousGrouping {
                        party: j,
                        a: rep,
                        b: v,
                        overlap,
                    });
                }
            }
            match home {
                Some(r) => regions[r].push(v),
                None => {
                    reps.push(v);
                    regions.push(vec![v]);
                }
            }
        }
        let mut pairs = Vec::new();
        let mut partnered = vec![false; reps.len()];
        for a in 0..reps.len() {
            for b in a + 1..reps.len() {
                if states[reps[a]].qubits[j].overlap(&states[reps[b]].qubits[j]) <= tol {
                    if partnered[a] || partnered[b] {
                        return Err(Error::AmbiguousGrouping {
                            party: j,
                            a: reps[a],
                            b: reps[b],
                            overlap: 0.0,
                        });
                    }
                    partnered[a] = true;
                    partnered[b] = true;
                    pairs.push((a, b));
                }
            }
        }
        parties.push(PartyLayout::new(s, regions, &pairs)?);
    }
    Configuration::new(s, parties)
}

/// A product state orthogonal to every realized member, built from an
/// extension witness: the complement of the chosen region's vector on each
/// party with a choice, and the fixed fresh vector elsewhere.
pub fn realize_witness(
    c: &Configuration,
    w: &ExtensionWitness,
    a: &SymbolicAssignment,
    f: &BasisFamily,
) -> Result<ProductState> {
    w.validate(c)?;
    a.validate(c)?;
    let mut qubits = Vec::with_capacity(c.num_parties());
    for (j, choice) in w.choices.iter().enumerate() {
        let q = match choice {
            Some(r) => f.vector(a.parties[j][*r])?.perp(),
            None => Qubit::from_angle(FRESH_ANGLE),
        };
        qubits.push(q);
    }
    Ok(ProductState { qubits })
}

/// One state per line; each qubit contributes `re(a0) im(a0) re(a1) im(a1)`
/// in scientific notation with 17 significant digits.
pub fn export_states_text(states: &[ProductState]) -> String {
    let mut out = String::new();
    for state in states {
        let mut first = true;
        for q in &state.qubits {
            for x in [q.a0.re, q.a0.im, q.a1.re, q.a1.im] {
                if !first {
                    out.push(' ');
                }
                first = false;
                write!(out, "{x:.16e}").expect("writing to a String");
            }
        }
        out.push('\n');
    }
    out
}
