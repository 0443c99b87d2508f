//! Bellman function for the uniform convexity of `L^p`.
//!
//! For a pair `φ, ψ ∈ L^p` with prescribed `‖φ‖^p`, `‖ψ‖^p` and `‖φ − ψ‖^p`,
//! the Bellman function `B₃` is the largest possible value of `‖φ + ψ‖^p`.
//! It is the minimal concave function on the cone `Ω₃` with known boundary
//! values, and its restriction to the symmetry axis yields the sharp modulus
//! of convexity `δ(ε)` of `L^p`.
//!
//! The crate is organised as follows:
//!
//! * [`lp_domain`]: the exponent, the cone `Ω₃`, its planar section `Ω` and
//!   the homogeneity reduction between them.
//! * [`boundary`]: parametrisation of `∂Ω`, boundary values and torsion of the
//!   lifted boundary curves.
//! * [`envelope`]: minimal concave majorant of boundary data as the upper
//!   surface of a 3-D convex hull, plus a brute-force chord oracle.
//! * [`foliation`]: exact chord structure of the graph of `B` for `p ≠ 2`.
//! * [`bellman`]: the evaluator for `B` and `B₃`.
//! * [`modulus`]: `δ(ε)` by closed form and by the Bellman route.
//! * [`oracle`]: step-function models, Hanner/Clarkson verifiers and
//!   randomized lower bounds for `B₃`.
//! * [`cli`]: the command-line front end.

pub mod bellman;
pub mod boundary;
pub mod cli;
pub mod envelope;
mod error;
pub mod foliation;
pub mod lp_domain;
pub mod modulus;
pub mod oracle;

pub use bellman::{b3_unit, eval_b, eval_b3, BellmanValue, Mode};
pub use boundary::{Arc, BoundaryParam, TorsionValue};
pub use envelope::{BoundarySample, HullSurface};
pub use error::{Error, Result};
pub use foliation::Chord;
pub use lp_domain::{ConePoint, Exponent, Regime, SectionPoint};
pub use modulus::{Method, ModulusPoint};
