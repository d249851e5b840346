//! Elliptic root systems, the elliptic Weyl group acting on the period domain,
//! bigraded Weyl-invariant functions, and a numerical verifier for Frobenius
//! manifold structures and their conformal deformations.

pub mod exact;
pub mod rootsys;
pub mod weyl;
pub mod domain;
pub mod tensors;
pub mod invariants;
pub mod poly;
pub mod frobenius;
pub mod suite;
pub mod cli;
