//! Shannon transforms of fading-power distributions and stochastic-order
//! verdicts between channel models.
//!
//! The crate evaluates the ergodic capacity `C_X(ρ) = E[ln(1 + ρX)]` of a
//! nonnegative fading power `X` by four independent routes (density
//! quadrature, the Stieltjes form over the complementary CDF, the Laplace
//! form over `1 − E[e^{-uX}]`, and Monte Carlo), then compares channels in
//! the ergodic-capacity order and the Laplace-transform order.
//!
//! All capacities are in nats. SNR values are linear unless a name says
//! `_db`. Every ordering verdict is restricted to the grid it was evaluated
//! on: a `FirstDominated` result certifies `C_X ≤ C_Y` at those points only.
//!
//! Modules:
//! - [`specfun`]: `ln Γ`, scaled `I₀`, `E₁`, Marcum `Q₁`.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature on finite and half-infinite ranges.
//! - [`models`]: parametric fading-power distributions.
//! - [`transform`]: Shannon-transform engines and [`transform::CapacityCurve`].
//! - [`ordering`]: capacity and Laplace-transform order verdicts.
//! - [`calculus`]: Frullani identity, complete-monotonicity checks, Bernstein/TBF evaluation.
//! - [`composite`]: MRC, EGC, multi-hop amplify-and-forward and MAC regions.
//! - [`mimo`]: random Gram-matrix ensembles and the log-det capacity order.

pub mod calculus;
pub mod composite;
mod error;
pub mod mc;
pub mod mimo;
pub mod models;
pub mod ordering;
pub mod quad;
pub mod selftest;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
pub use models::FadingModel;

pub use ordering::{OrderVerdict, Relation, SnrGrid};
pub use transform::{CapacityCurve, Engine};
