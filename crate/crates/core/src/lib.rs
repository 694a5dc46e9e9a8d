//! Quantized vortex dynamics of the complex Ginzburg-Landau equation on the
//! unit torus (R/Z)^2.
//!
//! The crate evaluates the torus renormalized energy
//! W(a; q) = -pi sum_{j != k} d_j d_k F(a_j - a_k) + |q|^2/2 (F the torus
//! Green function), integrates the reduced vortex law
//! (I - lambda d_j J) da_j/dt = -(1/pi) grad_j W, and cross-validates the
//! reduced law against a direct split-step spectral solve of the CGL
//! equation with phase-winding vortex tracking.
//!
//! Modules map onto the pipeline:
//! - [`torus`]: wrapping, minimum-image arithmetic, lifts, configurations;
//! - [`green`]: the Green function F (tabulated evaluator + slow oracle);
//! - [`energy`]: W, its gradient, W_eps, and q bookkeeping;
//! - [`dynamics`]: the reduced ODE, first integrals, symmetric reductions;
//! - [`field`]: discrete densities, canonical harmonic maps, initial data,
//!   ring energies, and the core-energy constant;
//! - [`pde`]: the CGL solver, vortex tracking, and the eps-sweep comparison.
//!
//! Grid loops are data-parallel through rayon when the default `parallel`
//! feature is enabled; disabling it yields a dependency-free sequential
//! build with identical results.

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod exec;
pub mod field;
pub mod green;
pub mod pde;
pub mod special;
pub mod spectral;
pub mod torus;

pub use dynamics::{OdeParams, StopReason, TrajectoryRecord};
pub use energy::EnergyReport;
pub use error::{Error, Result};
pub use field::{ComplexField, FieldDiagnostics};
pub use green::GreenTable;
pub use pde::{PdeParams, PdeRun};
pub use torus::{LiftedPoint, TorusPoint, VortexConfiguration};
