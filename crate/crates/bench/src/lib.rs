//! Benchmark fixtures for the invariant engine.

use moduli_core::invariants::{inv_sheaf, inv_sheaf_via_regsum, volume_fd};

/// (genus, rank, degree) triples timed by the benches.
pub const SHEAF_CASES: &[(u16, i64, i64)] = &[(2, 2, 1), (2, 3, 1), (3, 2, 1), (3, 3, 1)];

pub const VOLUME_CASES: &[(u16, i64, i64)] = &[(2, 2, 1), (3, 2, 1), (3, 3, 1)];

pub fn closed_form(case: (u16, i64, i64)) -> usize {
    inv_sheaf(case.0, case.1, case.2).expect("closed form").rep.len()
}

pub fn via_regsum(case: (u16, i64, i64)) -> usize {
    inv_sheaf_via_regsum(case.0, case.1, case.2).expect("regularized sum").rep.len()
}

pub fn volume(case: (u16, i64, i64)) -> String {
    volume_fd(case.0, case.1, case.2).expect("volume").to_string()
}
