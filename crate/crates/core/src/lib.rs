//! Modal solvers for two plasmonic transmission problems in the plane, with
//! independent numerical verifiers.
//!
//! * [`problem1`]: core-shell Dirichlet problem in `B_R`, permittivity
//!   `-1 + iδ` in the unit disk.
//! * [`problem2`]: whole-plane source problem with the same core.
//! * [`oracle`]: brute-force re-derivations used to check the closed forms.

pub mod error;
pub mod fourier;
pub mod kelvin;
pub mod oracle;
pub mod presets;
pub mod problem1;
pub mod problem2;
pub mod quadrature;
pub mod rate;

pub use error::{Error, Result};
pub use fourier::{h_half_norm, AnnularPiece, HarmonicField, ModalCoefficients, PolarPoint};
pub use kelvin::{ExtendedPoint, KelvinMap};
pub use num_complex::Complex64;
pub use problem1::{
    classify_compatibility, localized_resonance_gap, solve_modes, CompatibilityVerdict, CoreShellSolution,
    SolverConfig, TailDescriptor, Verdict,
};
pub use problem2::{PlaneProblem, PlaneSolution, RadialProfiles, SourceSpec};
pub use quadrature::{QuadratureGrid, Region};
pub use rate::RateFit;
