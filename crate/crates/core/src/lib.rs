//! Heat kernels on weighted graphs with intrinsic metrics.
//!
//! The crate builds Laplacians and Dirichlet Laplacians of weighted graphs
//! `(V, μ, m)`, evaluates the heat semigroup and its kernels, and checks the
//! Davies-Gaffney-Grigor'yan off-diagonal bound
//!
//! ```text
//! Σ_{x∈A} Σ_{y∈B} m_x m_y p_t(x, y) ≤ √(m(A) m(B)) · exp(−λt − ζ_s(t, ρ(A, B)))
//! ```
//!
//! together with its functional form, the pointwise bound for the
//! normalized Laplacian and the integral maximum principle behind them.
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | weighted graphs, vertex sets and functions, generators |
//! | [`metric`] | pseudo metrics, intrinsic certification, Lipschitz constants |
//! | [`operators`] | Laplacians, Dirichlet Laplacians, spectra |
//! | [`heat`] | heat semigroup, kernels, exhaustion, weighted energy |
//! | [`dgg`] | rate function `ζ_s` and the inequality checkers |
//! | [`oracles`] | Bessel functions, lattice kernel, decay slopes |
//! | [`io`] | JSON and CSV formats |
//! | [`cli`] | command-line front end |

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dgg;
pub mod error;
pub mod ext;
pub mod graph;
pub mod heat;
pub mod io;
pub mod metric;
pub mod operators;
pub mod oracles;

pub use error::{Error, Result};
pub use ext::{Ext, ExtHops, ExtReal};
pub use graph::{VertexFunction, VertexSet, WeightedGraph};
