//! Independent checks: the defining relative-equilibrium residual, the full
//! block-matrix residual and a dense projection for circulant eigenvalues.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circulant::{BlockSystem, CirculantMatrix, Family};
use crate::error::{Error, Result};
use crate::model::{weighted_center, Configuration, MassAssignment, PolygonStack};
use crate::numeric::CompensatedSum;
use crate::solver::MassSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquationForm {
    DefiningEquation,
    BlockMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub per_body: Vec<f64>,
    pub equation_form: EquationForm,
}

impl ResidualReport {
    fn from_defects(per_body: Vec<f64>, equation_form: EquationForm) -> Self {
        let max_residual = per_body.iter().copied().fold(0.0, f64::max);
        Self {
            max_residual,
            per_body,
            equation_form,
        }
    }
}

/// Per-body defect `‖ν²(q_i − q_G) − Σ_{j≠i} m_j (q_i − q_j)/|q_i − q_j|^a‖`.
///
/// With `ν = 0` the center of mass drops out, so a zero total mass is only an
/// error when `ν ≠ 0`.
pub fn cc_residual(
    config: &Configuration,
    masses: &MassAssignment,
    a: f64,
) -> Result<ResidualReport> {
    let q = config.points();
    if masses.masses.len() != q.len() {
        return Err(Error::InvalidArgument(format!(
            "{} masses for {} bodies",
            masses.masses.len(),
            q.len()
        )));
    }
    let nu2 = masses.nu * masses.nu;
    let center = if nu2 == 0.0 {
        [0.0; 3]
    } else {
        weighted_center(q, &masses.masses)?
    };
    let dim = config.dimension();
    let mut per_body = Vec::with_capacity(q.len());
    for (i, qi) in q.iter().enumerate() {
        let mut force = [
            CompensatedSum::new(),
            CompensatedSum::new(),
            CompensatedSum::new(),
        ];
        for (j, qj) in q.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = [qi[0] - qj[0], qi[1] - qj[1], qi[2] - qj[2]];
            let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if r2 == 0.0 {
                return Err(Error::SingularGeometry(format!(
                    "bodies {i} and {j} coincide"
                )));
            }
            let w = masses.masses[j] / r2.powf(a / 2.0);
            for c in 0..3 {
                force[c].add(w * d[c]);
            }
        }
        let defect: f64 = (0..dim)
            .map(|c| {
                let v = nu2 * (qi[c] - center[c]) - force[c].value();
                v * v
            })
            .sum();
        per_body.push(defect.sqrt());
    }
    Ok(ResidualReport::from_defects(
        per_body,
        EquationForm::DefiningEquation,
    ))
}

/// Block-matrix residual of a solved instance.
pub fn full_matrix_residual(
    stack: &PolygonStack,
    solution: &MassSolution,
) -> Result<ResidualReport> {
    full_matrix_residual_masses(stack, &solution.to_assignment(stack.n()))
}

/// Block-matrix residual `Σ_S A_TS m_S − ν² r_T 1` (and the height system
/// when the stack is not planar), with `ν²/M` taken from `masses`.
pub fn full_matrix_residual_masses(
    stack: &PolygonStack,
    masses: &MassAssignment,
) -> Result<ResidualReport> {
    let nu2 = masses.nu * masses.nu;
    let nu2_over_m = if nu2 == 0.0 {
        0.0
    } else {
        let total = masses.total_mass();
        if total == 0.0 {
            return Err(Error::ZeroTotalMass);
        }
        nu2 / total
    };
    let a_defects =
        BlockSystem::assemble(stack, Family::A, masses.nu, nu2_over_m)?.defects(&masses.masses)?;
    let b_defects = if stack.is_planar() {
        vec![Complex64::new(0.0, 0.0); a_defects.len()]
    } else {
        BlockSystem::assemble(stack, Family::B, masses.nu, nu2_over_m)?.defects(&masses.masses)?
    };
    let per_body = a_defects
        .iter()
        .zip(&b_defects)
        .map(|(da, db)| (da.norm_sqr() + db.norm_sqr()).sqrt())
        .collect();
    Ok(ResidualReport::from_defects(
        per_body,
        EquationForm::BlockMatrix,
    ))
}

/// Eigenvalues of a circulant obtained by expanding it densely and taking the
/// Rayleigh quotient with each Fourier vector, aligned to `p = 1..=n`.
pub fn dense_circulant_eigen(m: &CirculantMatrix) -> Vec<Complex64> {
    let n = m.order();
    let dense: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| m.entry(i, j)).collect())
        .collect();
    (1..=n)
        .map(|p| {
            let v: Vec<Complex64> = (0..n)
                .map(|k| {
                    Complex64::from_polar(
                        1.0,
                        2.0 * std::f64::consts::PI * (p * k) as f64 / n as f64,
                    )
                })
                .collect();
            let mut num = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let row: Complex64 = (0..n).map(|j| dense[i][j] * v[j]).sum();
                num += v[i].conj() * row;
            }
            num / n as f64
        })
        .collect()
}
