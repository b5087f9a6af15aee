//! Petz Rényi divergences and mutual informations of finite-dimensional
//! bipartite quantum states, the alternating fixed-point solver for the
//! doubly minimized mutual information, direct error exponents of
//! correlation detection, and desk-scale hypothesis tests built on the
//! universal permutation invariant state.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod divergences;
pub mod error;
pub mod exponents;
pub mod hermitian;
pub mod hypothesis;
pub mod oracle;
pub mod prmi;
pub mod states;

pub use divergences::{DivergenceValue, RenyiOrder};
pub use error::{Error, Result};
pub use hermitian::{CMatrix, HermitianOperator};
pub use prmi::{FixedPointConfig, PrmiSolution};
pub use states::{BipartiteState, DensityOperator, Pmf, StateKind};
