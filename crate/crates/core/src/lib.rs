//! Inverse mass problem for relative equilibria made of nested regular
//! polygons.
//!
//! `L` concentric regular `N`-gons (optionally lifted to heights) under the
//! interaction `Σ m_i m_j / |q_i − q_j|^{a−2}` (`a = 2`: point vortices). The
//! equilibrium equations split into circulant blocks; diagonalizing them by the
//! Fourier basis reduces the problem to one small system per mode, of which
//! only the all-ones mode admits real masses.
//!
//! ```
//! use polyring::{solve_equal_masses, PolygonStack};
//!
//! let stack = PolygonStack::planar(4, vec![1.0, 2.0], 3.0).unwrap();
//! let sol = solve_equal_masses(&stack, 1.0).unwrap();
//! assert!(sol.residual < 1e-10);
//! ```

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circulant;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod numeric;
pub mod series;
pub mod solver;
pub mod spectra;
pub mod verify;

pub use circulant::{BlockSystem, CirculantMatrix, Family};
pub use dynamics::{drift_report, init_rotating, integrate, DriftReport, SimState, Trajectory};
pub use error::{Error, Result};
pub use model::{build_positions, center_of_mass, Configuration, MassAssignment, PolygonStack};
pub use series::{certify_nonpositive, series_eval, SeriesCertificate, SeriesVerdict};
pub use solver::{
    cramer_two_polygon, mass_sign_threshold, mode_exclusion_report, solve_equal_masses,
    solve_nonplanar, MassSolution, ModeExclusionReport, NonplanarSolution,
};
pub use spectra::{
    f_p, mode_determinant, mode_matrix, xi_p, DeterminantReport, ModeMatrix, Verdict,
};
pub use verify::{cc_residual, full_matrix_residual, ResidualReport};
