//! Finite multi-floor determinantal point processes: correlation kernels,
//! Fredholm determinants, Janossy kernels and brute-force oracles.
//!
//! Floors and nodes are indexed from 0.

pub mod ensemble;
pub mod error;
pub mod janossy;
pub mod kernels;
pub mod linalg;
pub mod measure_space;
pub mod models;
pub mod oracle;
pub mod verify;

pub use ensemble::{ChainEnsemble, EnsembleOptions, GramKind, GramMatrix, GramVariant};
pub use error::{Error, Result};
pub use janossy::{
    biorthogonal_janossy_recipe, count_probability, gap_probability, janossy_density, janossy_kernel_explicit,
    kth_extreme_distribution, ExtremeCurve, JanossyKernel,
};
pub use kernels::{correlation_kernel, BlockKernel, KernelKind, RestrictedOperator};
pub use linalg::C64;
pub use measure_space::{DiscretizedSpace, SpaceSpec, Window, WindowFamily, WindowSpec};
pub use models::ChainModelSpec;
pub use oracle::{enumerate_density, quad_oracle_m1, EnumeratedDistribution, OracleRecord};
