//! Action, winding numbers and intersection numbers of compactly supported
//! area-preserving maps of the unit disk.
//!
//! Maps are generated by time-periodic Hamiltonians ([`hamiltonian`]) and
//! integrated with a fixed-step RK4 scheme ([`flow`]). On top of the flow
//! sit the action and its composition rules ([`action`]), pair winding
//! numbers ([`winding`]), signed intersection numbers of a flow line with
//! the ruled surface spanned by another flow line and a boundary anchor
//! ([`intersection`]), Birkhoff averages of all of these ([`ergodic`]) and
//! three independent evaluations of the Calabi invariant ([`calabi`]).
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix the
//! scalar to `f64`, which is what the tolerances in the docs refer to.

pub mod action;
pub mod calabi;
pub mod ergodic;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod hamiltonian;
pub mod intersection;
pub mod oneform;
pub mod quadrature;
pub mod scalar;
pub mod winding;

pub use error::{Error, Result};
pub use flow::FlowConfig;
pub use quadrature::{QuadratureKind, QuadratureSpec};
pub use scalar::Scalar;

pub type Vector = geometry::Vec2<f64>;
pub type Point = geometry::Point2<f64>;
pub type Hamiltonian = hamiltonian::HamiltonianSpec<f64>;
pub type OneForm = oneform::PrimitiveOneForm<f64>;
pub type Gauge = oneform::GaugeFunction<f64>;
pub type Trajectory = flow::Trajectory<f64>;
pub type Estimate = quadrature::Estimate<f64>;
pub type ActionValue = action::ActionValue<f64>;
pub type WindingResult = winding::WindingResult<f64>;
pub type IntersectionResult = intersection::IntersectionResult<f64>;
pub type BirkhoffEstimate = ergodic::BirkhoffEstimate<f64>;
pub type CalabiReport = calabi::CalabiReport<f64>;
