//! Explicit UPB constructions and certificate verification.
//!
//! The `4k + 4` state family on `4k` qubits uses vertices
//! `{v_i, w_i, x_i, y_i : 0 <= i <= k}` numbered as
//!
//! | role | vertex id      |
//! |------|----------------|
//! | v_i  | i              |
//! | w_i  | (k + 1) + i    |
//! | x_i  | (2k + 2) + i   |
//! | y_i  | (3k + 3) + i   |
//!
//! so that `{v, w}` form block one (`0..2k+2`) and `{x, y}` block two of
//! the double complete graph. Parties are numbered from zero:
//!
//! * `0, 1, 2`: the shifted bipartite graphs `B_{0,k}, B_{1,k}, B_{2,k}`,
//!   each on a single qubit with two-state regions;
//! * `3 .. 2k - 2`: `B_{j,k}` for `j = 3..=k`, each spread over two qubits
//!   with singleton regions;
//! * `2k - 1 .. 4k - 1`: one party per perfect matching of the round-robin
//!   1-factorization, factor `t` of both blocks on party `2k - 1 + t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{one_factorize_complete, EdgeSet};
use crate::model::{
    check_pairings, find_extension, is_product_basis, Configuration, ExtensionWitness,
    PairingViolation, PartyLayout, ProductBasisVerdict,
};
use crate::states::{
    make_basis_family, pairwise_orthogonality_check, realize_configuration,
    recover_orthogonality_graph, BasisLabel, SymbolicAssignment, ORTHOGONAL_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    V,
    W,
    X,
    Y,
}

/// A named vertex `v_i`, `w_i`, `x_i` or `y_i` of the `4k + 4` family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RoleIndex {
    pub role: Role,
    pub index: usize,
}

impl RoleIndex {
    pub fn new(role: Role, index: usize) -> Self {
        RoleIndex { role, index }
    }

    pub fn vertex(self, k: usize) -> usize {
        let block = match self.role {
            Role::V => 0,
            Role::W => 1,
            Role::X => 2,
            Role::Y => 3,
        };
        block * (k + 1) + self.index
    }

    pub fn from_vertex(k: usize, v: usize) -> Option<Self> {
        let n = k + 1;
        let role = match v / n {
            0 => Role::V,
            1 => Role::W,
            2 => Role::X,
            3 => Role::Y,
            _ => return None,
        };
        Some(RoleIndex { role, index: v % n })
    }
}

fn vid(role: Role, index: usize, k: usize) -> usize {
    RoleIndex::new(role, index).vertex(k)
}

/// Where a certificate came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A configuration, the basis labels that realize it, and its origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub config: Configuration,
    pub assignment: SymbolicAssignment,
    pub provenance: Provenance,
}

impl Certificate {
    pub fn num_states(&self) -> usize {
        self.config.num_states()
    }

    pub fn num_parties(&self) -> usize {
        self.config.num_parties()
    }
}

/// Edge set of `B_{j,k}`: `v_i, w_i` joined to `x_m, y_m` with
/// `m = (i + j) mod (k + 1)`.
pub fn b_graph_edges(j: usize, k: usize) -> Result<EdgeSet> {
    if k < 1 || j > k {
        return Err(Error::Parameter(format!(
            "B graph needs 0 <= j <= k, k >= 1; got j={j}, k={k}"
        )));
    }
    let n = 4 * k + 4;
    let mut out = EdgeSet::empty(n);
    for i in 0..=k {
        let m = (i + j) % (k + 1);
        for left in [Role::V, Role::W] {
            for right in [Role::X, Role::Y] {
                out.insert(vid(left, i, k), vid(right, m, k))?;
            }
        }
    }
    Ok(out)
}

/// The single-qubit party realizing `B_{j,k}` for `j` in `{0, 1, 2}`.
///
/// Regions `0..=k` are `{v_i, w_i}` labeled `b_i`; regions `k+1..` are
/// `{x_m, y_m}` labeled `b_{(m - j) mod (k+1)}` perp.
pub fn single_qubit_party(j: usize, k: usize) -> Result<(PartyLayout, Vec<BasisLabel>)> {
    if j > 2 || k < 1 {
        return Err(Error::Parameter(format!(
            "single-qubit parties exist for j in 0..=2 and k >= 1; got j={j}, k={k}"
        )));
    }
    let n = k + 1;
    let mut regions = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for i in 0..n {
        regions.push(vec![vid(Role::V, i, k), vid(Role::W, i, k)]);
        labels.push(BasisLabel::plus(i));
    }
    for m in 0..n {
        regions.push(vec![vid(Role::X, m, k), vid(Role::Y, m, k)]);
        labels.push(BasisLabel::perp((m + n - j % n) % n));
    }
    let pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, n + (i + j) % n)).collect();
    Ok((PartyLayout::new(4 * k + 4, regions, &pairs)?, labels))
}

/// The two singleton-region parties that together realize `B_{j,k}` for
/// `3 <= j <= k`.
///
/// First party: `v_i = b_i`, `w_i = b_{i+k+1}`, `x_m = b_{m-j}` perp,
/// `y_m = b_{m-j+k+1}` perp. Second party swaps the labels of `x` and `y`.
/// Region `r` is the singleton `{r}`.
pub fn two_qubit_parties(j: usize, k: usize) -> Result<[(PartyLayout, Vec<BasisLabel>); 2]> {
    if j < 3 || j > k {
        return Err(Error::Parameter(format!(
            "two-qubit parties exist for 3 <= j <= k; got j={j}, k={k}"
        )));
    }
    let n = k + 1;
    let size = 4 * n;
    let regions: Vec<Vec<usize>> = (0..size).map(|v| vec![v]).collect();
    let build = |swap: bool| -> Result<(PartyLayout, Vec<BasisLabel>)> {
        let mut labels = vec![BasisLabel::plus(0); size];
        let mut pairs = Vec::with_capacity(2 * n);
        for i in 0..n {
            let m = (i + j) % n;
            let base = (m + n - j % n) % n;
            labels[vid(Role::V, i, k)] = BasisLabel::plus(i);
            labels[vid(Role::W, i, k)] = BasisLabel::plus(i + n);
            let (x_basis, y_basis) = if swap {
                (base + n, base)
            } else {
                (base, base + n)
            };
            labels[vid(Role::X, m, k)] = BasisLabel::perp(x_basis);
            labels[vid(Role::Y, m, k)] = BasisLabel::perp(y_basis);
            if swap {
                pairs.push((vid(Role::V, i, k), vid(Role::Y, m, k)));
                pairs.push((vid(Role::W, i, k), vid(Role::X, m, k)));
            } else {
                pairs.push((vid(Role::V, i, k), vid(Role::X, m, k)));
                pairs.push((vid(Role::W, i, k), vid(Role::Y, m, k)));
            }
        }
        Ok((PartyLayout::new(size, regions.clone(), &pairs)?, labels))
    };
    Ok([build(false)?, build(true)?])
}

/// The `2k + 1` matching parties covering both `K_{2k+2}` blocks.
///
/// Party `t` carries factor `t` of the round-robin factorization on each
/// block; its `r`-th matched pair (block one first) uses basis `r`, lower
/// vertex `Plus`.
pub fn matching_parties(k: usize) -> Result<Vec<(PartyLayout, Vec<BasisLabel>)>> {
    if k < 1 {
        return Err(Error::Parameter(format!(
            "matching parties need k >= 1, got {k}"
        )));
    }
    let half = 2 * k + 2;
    let size = 2 * half;
    let factors = one_factorize_complete(half)?;
    let regions: Vec<Vec<usize>> = (0..size).map(|v| vec![v]).collect();
    factors
        .iter()
        .map(|factor| {
            let mut labels = vec![BasisLabel::plus(0); size];
            let mut pairs = Vec::with_capacity(half);
            for offset in [0, half] {
                for &(a, b) in factor.pairs() {
                    let r = pairs.len();
                    labels[offset + a] = BasisLabel::plus(r);
                    labels[offset + b] = BasisLabel::perp(r);
                    pairs.push((offset + a, offset + b));
                }
            }
            Ok((PartyLayout::new(size, regions.clone(), &pairs)?, labels))
        })
        .collect()
}

/// The `4k + 4` state UPB on `4k` qubits, `k >= 2`.
pub fn construct_upb_4k4(k: usize) -> Result<Certificate> {
    if k < 2 {
        return Err(Error::Parameter(format!(
            "the 4k+4 construction needs k >= 2, got {k}"
        )));
    }
    let mut parties = Vec::with_capacity(4 * k);
    let mut labels = Vec::with_capacity(4 * k);
    for j in 0..=2 {
        let (layout, l) = single_qubit_party(j, k)?;
        parties.push(layout);
        labels.push(l);
    }
    for j in 3..=k {
        for (layout, l) in two_qubit_parties(j, k)? {
            parties.push(layout);
            labels.push(l);
        }
    }
    for (layout, l) in matching_parties(k)? {
        parties.push(layout);
        labels.push(l);
    }
    debug_assert_eq!(parties.len(), 4 * k);
    Ok(Certificate {
        config: Configuration::new(4 * k + 4, parties)?,
        assignment: SymbolicAssignment::new(labels),
        provenance: Provenance {
            note: format!("4k+4 construction, k = {k}"),
            seed: None,
        },
    })
}

const UPB_8_11: &str = include_str!("../fixtures/upb_8_11.json");

/// The embedded 11-state UPB on 8 qubits, found by [`crate::search::find_upb`].
pub fn upb_8_11_certificate() -> Certificate {
    crate::document::certificate_from_str(UPB_8_11).expect("embedded certificate parses")
}

/// Tolerance for the numeric part of [`verify_certificate`]; `None` skips it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub numeric_tol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            numeric_tol: Some(ORTHOGONAL_TOL),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericReport {
    pub tol: f64,
    /// Realization failed before any check could run.
    pub realization_error: Option<String>,
    pub orthonormal: bool,
    pub offending: Vec<(usize, usize)>,
    /// The realized states recover to the same configuration.
    pub round_trip: bool,
}

impl NumericReport {
    pub fn passed(&self) -> bool {
        self.realization_error.is_none() && self.orthonormal && self.round_trip
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub num_states: usize,
    pub num_parties: usize,
    pub product_basis: ProductBasisVerdict,
    pub covered_edges: usize,
    /// A covering region selection, if the set is extendible.
    pub extension: Option<ExtensionWitness>,
    pub pairing_violations: Vec<PairingViolation>,
    pub numeric: Option<NumericReport>,
}

impl VerificationReport {
    pub fn unextendible(&self) -> bool {
        self.extension.is_none()
    }

    pub fn passed(&self) -> bool {
        self.product_basis.is_product_basis
            && self.unextendible()
            && self.pairing_violations.is_empty()
            && self.numeric.as_ref().is_none_or(NumericReport::passed)
    }
}

/// Runs every check on a certificate; failures are recorded, not raised.
pub fn verify_certificate(cert: &Certificate, options: VerifyOptions) -> VerificationReport {
    let c = &cert.config;
    let product_basis = is_product_basis(c);
    let covered_edges = c.edge_union().len();
    let numeric = options.numeric_tol.map(|tol| numeric_check(cert, tol));
    VerificationReport {
        num_states: c.num_states(),
        num_parties: c.num_parties(),
        product_basis,
        covered_edges,
        extension: find_extension(c),
        pairing_violations: check_pairings(c),
        numeric,
    }
}

fn numeric_check(cert: &Certificate, tol: f64) -> NumericReport {
    let failed = |e: Error| NumericReport {
        tol,
        realization_error: Some(e.to_string()),
        orthonormal: false,
        offending: Vec::new(),
        round_trip: false,
    };
    let family = match make_basis_family(cert.assignment.bases_needed().max(1)) {
        Ok(f) => f,
        Err(e) => return failed(e),
    };
    let states = match realize_configuration(&cert.config, &cert.assignment, &family) {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    let verdict = match pairwise_orthogonality_check(&states, tol) {
        Ok(v) => v,
        Err(e) => return failed(e),
    };
    let round_trip = recover_orthogonality_graph(&states, tol)
        .map(|back| back.canonical() == cert.config.canonical())
        .unwrap_or(false);
    NumericReport {
        tol,
        realization_error: None,
        orthonormal: verdict.orthonormal,
        offending: verdict.offending,
        round_trip,
    }
}
