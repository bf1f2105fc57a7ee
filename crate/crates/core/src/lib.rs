//! Corrector-enriched two-layer physics-informed networks for 1D singularly
//! perturbed boundary value problems.
//!
//! The network `u(x) = W2 sigma(W1 x + b1)` is combined with closed-form
//! boundary-layer correctors so the trained part only has to represent the
//! smooth outer solution. All derivatives, spatial and parametric, are
//! computed in closed form.
//!
//! Module map:
//! - [`net2`]: the network, its spatial jets and parameter gradients
//! - [`correctors`]: layer profiles and the Burgers limit solution
//! - [`problems`]: problem catalogue, ansatz families, residuals
//! - [`training`]: collocation, loss, exact gradients, Adam
//! - [`reference`]: closed forms, the finite-difference oracle, L2 errors
//! - [`experiment`]: config files, runs, sweeps and the error table

pub mod config;
pub mod correctors;
pub mod error;
pub mod experiment;
pub mod forcing;
pub mod linalg;
pub mod net2;
pub mod problems;
pub mod reference;
pub mod spline;
pub mod training;

pub use error::{Error, Result};
pub use forcing::Forcing;
pub use net2::{init_params, NetJet, NetParams};
pub use problems::{Ansatz, ProblemKind, ProblemSpec};
pub use reference::{oracle_solve, rel_l2_error, ReferenceSolution, Truth};
pub use training::{train, CollocationSet, Sampling, TrainConfig, TrainReport};
