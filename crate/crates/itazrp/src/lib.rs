//! Exact steady states of the n-species inhomogeneous totally asymmetric
//! zero range process (n-iTAZRP) on a periodic chain.
//!
//! Particles of species 1..n occupy the sites of a ring of length L with no
//! exclusion and hop one site to the left; when several particles leave a
//! site together the larger species have priority and the transition rate is
//! the rate parameter `w` of the *smallest* species that moved. The
//! stationary distribution of each conserved sector is, after a global
//! normalization, a vector of homogeneous polynomials in `w1..wn` with
//! nonnegative integer coefficients.
//!
//! The crate computes that polynomial steady state by three independent
//! routes and cross-verifies them:
//!
//! * [`mpf::steady_state_matrix_product`] — traces of truncated bosonic
//!   site operators, evaluated through a recursion over the species count;
//! * [`multiline::steady_state_multiline`] — a combinatorial pairing
//!   algorithm that projects multiline states and accumulates monomial
//!   weights;
//! * [`markov::solve_kernel`] — exact rational Gaussian elimination of the
//!   Markov generator at fixed numeric rates.
//!
//! [`gillespie`] adds a continuous-time stochastic simulation for
//! statistical cross-checks, and [`fock::check_hat_relation`] certifies the
//! operator identity that makes the matrix-product representation work.
//!
//! All symbolic computation is exact: integer coefficients are arbitrary
//! precision and numeric solves use rationals throughout.

pub mod fock;
pub mod gillespie;
pub mod markov;
pub mod mpf;
pub mod multiline;
pub mod polyring;
pub mod states;

pub use polyring::{PolyError, Polynomial};
pub use states::{Configuration, LocalState, MultilineState, Sector, StateError};
