//! Existence checks for martingale densities and martingale measures in
//! multi-dimensional diffusion markets, with Monte Carlo cross-validation.

pub mod dsl;
pub mod envelopes;
pub mod model;
pub mod rng;
pub mod simulate;
pub mod quadrature;
pub mod criteria;
pub mod verdict;
