//! Inverse problem: masses that make a nested polygon stack a relative
//! equilibrium.
//!
//! Only the all-ones mode `p = N` admits real solutions, so the masses are
//! constant on each polygon and solve the `L × L` system
//! `[λ_N(A_TS)] x = ν² (r_1, …, r_L)`. That mode carries no `ν²/M` term, so
//! the total mass is computed after solving. For `a = 2` the stack rotates
//! with angular velocity `ν²` under the vortex flow; the solver itself only
//! sees `ν²`.

use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circulant::Family;
use crate::error::{Error, Result};
use crate::model::{build_positions, MassAssignment, PolygonStack};
use crate::spectra::{classify_determinant, f_p, mode_determinant, mode_matrix, xi_p, Verdict};
use crate::verify::cc_residual;

/// Condition number above which a mode-`N` solve is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative bracket width at which the threshold bisection stops.
pub const THRESHOLD_TOLERANCE: f64 = 1e-10;

/// Tolerance (relative to `max(1, ν² max|coordinate|)`) for calling a
/// non-planar candidate consistent.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Where the inner radius of a two-polygon stack sits relative to `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdSide {
    /// `r_inner < δ`: both masses share the sign of `ν²`.
    Below,
    /// `r_inner > δ`: the masses have opposite signs.
    Above,
    At,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPosition {
    pub delta: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub side: ThresholdSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub signs: Vec<Sign>,
    /// Present for two-polygon planar stacks.
    pub threshold: Option<ThresholdPosition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSolution {
    pub per_polygon_masses: Vec<f64>,
    pub nu: f64,
    /// `M = N Σ_T m_T`.
    pub total_mass: f64,
    /// Max-norm defect of the defining equation.
    pub residual: f64,
    pub sign_report: SignReport,
}

impl MassSolution {
    /// One mass per body, `n` copies of each polygon mass.
    pub fn to_assignment(&self, n: usize) -> MassAssignment {
        MassAssignment::from_polygon_masses(&self.per_polygon_masses, n, self.nu)
    }
}

/// 1-norm of a square matrix (max column sum).
fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve `[λ_N(A_TS)] x = ν² r` with the singularity checks.
fn solve_mode_n(stack: &PolygonStack, nu: f64) -> Result<Vec<f64>> {
    let n = stack.n();
    let m = mode_matrix(stack, n, Family::A, 0.0)?.entries;
    let l = stack.l();
    let lu = m.clone().lu();
    let det = lu.determinant();
    let verdict = classify_determinant(det, m.norm(), l);
    let condition = m
        .clone()
        .try_inverse()
        .map_or(f64::INFINITY, |inv| norm1(&m) * norm1(&inv));
    debug!("mode-N solve: det = {det:e}, condition = {condition:e}");
    if !verdict.is_nonzero() || !(condition <= MAX_CONDITION) {
        return Err(Error::NumericallySingular { det, condition });
    }
    let nu2 = nu * nu;
    let rhs = DVector::from_iterator(l, stack.radii().iter().map(|r| nu2 * r));
    let x = lu
        .solve(&rhs)
        .ok_or(Error::NumericallySingular { det, condition })?;
    Ok(x.iter().copied().collect())
}

fn sign_report(stack: &PolygonStack, masses: &[f64]) -> Result<SignReport> {
    let threshold = if stack.l() == 2 && stack.is_planar() {
        let (r1, r2) = (stack.radius(1), stack.radius(2));
        let (inner, outer) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let delta = mass_sign_threshold(outer, stack.n(), stack.a())?;
        let side = if inner < delta {
            ThresholdSide::Below
        } else if inner > delta {
            ThresholdSide::Above
        } else {
            ThresholdSide::At
        };
        Some(ThresholdPosition {
            delta,
            inner_radius: inner,
            outer_radius: outer,
            side,
        })
    } else {
        None
    };
    Ok(SignReport {
        signs: masses.iter().map(|&m| Sign::of(m)).collect(),
        threshold,
    })
}

fn finish(stack: &PolygonStack, nu: f64, masses: Vec<f64>) -> Result<MassSolution> {
    let n = stack.n();
    let assignment = MassAssignment::from_polygon_masses(&masses, n, nu);
    let residual = cc_residual(&build_positions(stack), &assignment, stack.a())?.max_residual;
    Ok(MassSolution {
        total_mass: n as f64 * masses.iter().sum::<f64>(),
        sign_report: sign_report(stack, &masses)?,
        per_polygon_masses: masses,
        nu,
        residual,
    })
}

/// Equal-per-polygon masses of a planar stack.
pub fn solve_equal_masses(stack: &PolygonStack, nu: f64) -> Result<MassSolution> {
    if !stack.is_planar() {
        return Err(Error::InvalidArgument(
            "stack has nonzero heights; use the non-planar solver".into(),
        ));
    }
    if !nu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "nu must be finite, got {nu}"
        )));
    }
    let masses = solve_mode_n(stack, nu)?;
    finish(stack, nu, masses)
}

/// Two-polygon masses by Cramer's rule on the mode-`N` system.
pub fn cramer_two_polygon(r1: f64, r2: f64, nu: f64, n: usize, a: f64) -> Result<(f64, f64)> {
    if r1 == r2 {
        return Err(Error::SingularGeometry(
            "two polygons with equal radii coincide".into(),
        ));
    }
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radii must be positive, got {r1}, {r2}"
        )));
    }
    let p = n as i64;
    let (xi1, xi2) = (xi_p(r1, n, a, p)?, xi_p(r2, n, a, p)?);
    let (f12, f21) = (f_p(r1, r2, n, a, p)?, f_p(r2, r1, n, a, p)?);
    let det = xi1 * xi2 - f12 * f21;
    let frob = (xi1 * xi1 + xi2 * xi2 + f12 * f12 + f21 * f21).sqrt();
    if classify_determinant(det, frob, 2) != Verdict::Positive {
        return Err(Error::NumericallySingular {
            det,
            condition: f64::INFINITY,
        });
    }
    let nu2 = nu * nu;
    Ok((
        nu2 * (r1 * xi2 - r2 * f12) / det,
        nu2 * (r2 * xi1 - r1 * f21) / det,
    ))
}

/// `g(r1) = ξ_N(r1) r2 − r1 f_N(r2, r1)`, the numerator of the inner mass.
pub fn threshold_function(r1: f64, r2: f64, n: usize, a: f64) -> Result<f64> {
    let p = n as i64;
    Ok(xi_p(r1, n, a, p)? * r2 - r1 * f_p(r2, r1, n, a, p)?)
}

/// Radius `δ ∈ (0, r2)` where the inner mass of a two-polygon stack changes
/// sign; `g` decreases from `+∞` to `−∞` on `(0, r2)`.
pub fn mass_sign_threshold(r2: f64, n: usize, a: f64) -> Result<f64> {
    if !(r2 > 0.0 && r2.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "outer radius must be positive, got {r2}"
        )));
    }
    let g = |r1: f64| threshold_function(r1, r2, n, a);
    let mut lo = 1e-8 * r2;
    let mut hi = (1.0 - 1e-8) * r2;
    let mut samples = Vec::new();
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    for _ in 0..20 {
        if g_lo > 0.0 && g_hi < 0.0 {
            break;
        }
        samples.push((lo, g_lo));
        samples.push((hi, g_hi));
        if g_lo <= 0.0 {
            lo *= 0.1;
            g_lo = g(lo)?;
        }
        if g_hi >= 0.0 {
            hi = r2 - 0.1 * (r2 - hi);
            g_hi = g(hi)?;
        }
    }
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Bracketing { samples });
    }
    while hi - lo > THRESHOLD_TOLERANCE * lo {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonplanarSolution {
    pub solution: MassSolution,
    /// Max defect of the in-plane mode-`N` system.
    pub a_mode_residual: f64,
    /// Max defect of the height mode-`N` system with `ν²/M` from the candidate.
    pub b_mode_residual: f64,
    /// Both mode systems and the defining equation hold at tolerance.
    pub consistent: bool,
}

/// Candidate masses for a stack with heights: solve the in-plane system, then
/// test the height system that the same masses must also satisfy.
pub fn solve_nonplanar(stack: &PolygonStack, nu: f64) -> Result<NonplanarSolution> {
    let h0 = stack.height(1);
    if stack.heights().iter().all(|&h| h == h0) {
        let flat = PolygonStack::planar(stack.n(), stack.radii().to_vec(), stack.a())?;
        let solution = solve_equal_masses(&flat, nu)?;
        let tol = consistency_scale(stack, nu);
        return Ok(NonplanarSolution {
            a_mode_residual: 0.0,
            b_mode_residual: 0.0,
            consistent: solution.residual <= tol,
            solution,
        });
    }
    if !nu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "nu must be finite, got {nu}"
        )));
    }
    let n = stack.n();
    let masses = solve_mode_n(stack, nu)?;
    let x = DVector::from_column_slice(&masses);
    let nu2 = nu * nu;
    let a_m = mode_matrix(stack, n, Family::A, 0.0)?.entries;
    let a_mode_residual = (&a_m * &x
        - DVector::from_iterator(masses.len(), stack.radii().iter().map(|r| nu2 * r)))
    .amax();
    let total = n as f64 * masses.iter().sum::<f64>();
    let nu2_over_m = if nu2 == 0.0 {
        0.0
    } else if total == 0.0 {
        return Err(Error::ZeroTotalMass);
    } else {
        nu2 / total
    };
    let b_m = mode_matrix(stack, n, Family::B, nu2_over_m)?.entries;
    let b_mode_residual = (&b_m * &x
        - DVector::from_iterator(masses.len(), stack.heights().iter().map(|h| nu2 * h)))
    .amax();
    let solution = finish(stack, nu, masses)?;
    let tol = consistency_scale(stack, nu);
    Ok(NonplanarSolution {
        consistent: solution.residual <= tol && b_mode_residual <= tol && a_mode_residual <= tol,
        a_mode_residual,
        b_mode_residual,
        solution,
    })
}

fn consistency_scale(stack: &PolygonStack, nu: f64) -> f64 {
    let coord = stack
        .radii()
        .iter()
        .chain(stack.heights())
        .fold(0.0f64, |m, c| m.max(c.abs()));
    CONSISTENCY_TOLERANCE * (nu * nu * coord).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    /// Mode `N − 1`: its eigenvectors are not real, so no real masses live there.
    ComplexEigenvector,
    /// Odd number of polygons: the height mode matrix is skew-symmetric.
    OddSkewSymmetric,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub p: usize,
    pub family: Family,
    pub det: f64,
    pub reduced: Option<f64>,
    pub verdict: Verdict,
    pub reason: ExclusionReason,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeExclusionReport {
    pub entries: Vec<ModeEntry>,
}

impl ModeExclusionReport {
    pub fn entry(&self, p: usize, family: Family) -> Option<&ModeEntry> {
        self.entries.iter().find(|e| e.p == p && e.family == family)
    }
}

/// Determinant verdicts of every mode matrix without the `ν²/M` terms
/// (in-plane family, plus the height family for non-planar stacks).
pub fn mode_exclusion_report(stack: &PolygonStack) -> Result<ModeExclusionReport> {
    let n = stack.n();
    let l = stack.l();
    let mut families = vec![Family::A];
    if !stack.is_planar() {
        families.push(Family::B);
    }
    let mut entries = Vec::new();
    for family in families {
        for p in 1..=n {
            let rep = mode_determinant(stack, p, family, 0.0)?;
            let reason = match family {
                Family::A if p == n - 1 => ExclusionReason::ComplexEigenvector,
                Family::B if rep.verdict == Verdict::StructurallyZero => {
                    ExclusionReason::OddSkewSymmetric
                }
                _ => ExclusionReason::None,
            };
            let note = if family == Family::A && l == 1 && n % 2 == 1 && p == (n - 1) / 2 {
                Some("single polygon, odd n: ξ_p vanishes at p = (n-1)/2".to_string())
            } else {
                None
            };
            entries.push(ModeEntry {
                p,
                family,
                det: rep.det,
                reduced: rep.reduced,
                verdict: rep.verdict,
                reason,
                note,
            });
        }
    }
    Ok(ModeExclusionReport { entries })
}
