//! Numerical oracles for the symbolic claims: Fourier decay scans,
//! scaling checks, regularized quadrature of smeared string factors and the
//! closed-form identities behind differential renormalization.

pub mod checks;
pub mod decay;
pub mod quad;
pub mod richardson;
pub mod smeared_q;
