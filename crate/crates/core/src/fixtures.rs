//! Small hand-transcribed configurations used in tests, docs and the CLI.

use crate::model::{Configuration, PartyLayout};
use crate::states::{BasisLabel, Side, SymbolicAssignment};

/// Seven states on three qubits that form a product basis but are
/// extendible.
///
/// Party 0: `{0,1,2} | {3,4,5,6}`.
/// Party 1: `{1} | {0,2}` and `{3,4} | {5,6}`.
/// Party 2: `{3} | {1,4}`, `{0} | {2}` and `{5} | {6}`.
pub fn seven_state() -> Configuration {
    seven_state_certificate().0
}

/// The seven-state configuration with a basis assignment mirroring the
/// `|0>, |1>, |+>, |->, |b>, |b_perp>` realization.
pub fn seven_state_certificate() -> (Configuration, SymbolicAssignment) {
    use Side::{Perp, Plus};
    let l = |basis, side| BasisLabel { basis, side };
    let p0 = PartyLayout::from_blocks(7, &[(vec![0, 1, 2], vec![3, 4, 5, 6])]).unwrap();
    let p1 =
        PartyLayout::from_blocks(7, &[(vec![1], vec![0, 2]), (vec![3, 4], vec![5, 6])]).unwrap();
    let p2 = PartyLayout::from_blocks(
        7,
        &[
            (vec![3], vec![1, 4]),
            (vec![0], vec![2]),
            (vec![5], vec![6]),
        ],
    )
    .unwrap();
    let config = Configuration::new(7, vec![p0, p1, p2]).unwrap();
    let assignment = SymbolicAssignment::new(vec![
        vec![l(0, Plus), l(0, Perp)],
        vec![l(0, Perp), l(0, Plus), l(1, Plus), l(1, Perp)],
        vec![
            l(1, Perp),
            l(1, Plus),
            l(0, Plus),
            l(0, Perp),
            l(2, Plus),
            l(2, Perp),
        ],
    ]);
    (config, assignment)
}

/// The computational basis `|00>, |01>, |10>, |11>` of two qubits.
pub fn two_qubit_basis() -> Configuration {
    let a = PartyLayout::from_blocks(4, &[(vec![0, 1], vec![2, 3])]).unwrap();
    let b = PartyLayout::from_blocks(4, &[(vec![0, 2], vec![1, 3])]).unwrap();
    Configuration::new(4, vec![a, b]).unwrap()
}
