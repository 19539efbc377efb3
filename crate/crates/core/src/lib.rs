//! Certificates and numerical checks for Clarkson–McCarthy type matrix
//! inequalities over unitary and isometry orbits.

// Domain guards are written as `!(x > 0.0)` on purpose: the negation also
// rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod checks;
pub mod harness;
pub mod hermitian;
pub mod search;
pub mod tol;
