//! Catalyst-style acceleration: an accelerated proximal envelope with an adaptive
//! search over its regularization parameter, wrapped around
//! non-accelerated inner solvers.
//!
//! The envelope is the Monteiro–Svaiter accelerated proximal method. Each
//! outer iteration picks a regularization `L`, forms an extrapolated centre
//! `x`, and asks an inner solver for a point `y` with
//! `‖∇F(y)‖ ≤ (L/2)‖y − x‖`, where `F(y) = f(y) + (L/2)‖y − x‖²`. The
//! number of inner iterations each trial `L` needed decides whether to keep
//! shrinking `L`.
//!
//! Modules:
//! - [`numkit`]: dense vectors/matrices, the seeded RNG, QR, Cholesky, power iteration
//! - [`oracle`]: problem interface, call accounting and the proximal wrapper
//! - [`solvers`]: gradient descent, steepest descent, RACDM, alternating minimization
//! - [`envelope`]: the accelerated outer loop and its certificates
//! - [`problems`]: the synthetic quadratic, logistic regression, LIBSVM parsing
//! - [`bench`]: run configuration, execution and CSV traces

pub mod bench;
pub mod envelope;
pub mod error;
pub mod numkit;
pub mod oracle;
pub mod problems;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
