//! Circulant matrices and the block system of a polygon stack.
//!
//! A circulant matrix is stored by its first row; entry `(i, j)` (1-based) is
//! `first_row[(j - i) mod n]`. Every circulant shares the Fourier eigenbasis
//! `v_p = (1, ω_p, …, ω_p^{n-1})`, `ω_p = e^{2πip/n}`, with eigenvalue
//! `Σ_j c_{1,j} ω_p^{j-1}` on `v_p`.
//!
//! The relative-equilibrium equations of a stack split into an `l × l` array of
//! such blocks: the A-family (in-plane coordinate) and the B-family (height).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{check_mode, PolygonStack};
use crate::numeric::{sin_turn, unit_root, CompensatedComplexSum};

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantMatrix {
    first_row: Vec<Complex64>,
}

impl CirculantMatrix {
    pub fn new(first_row: Vec<Complex64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::InvalidArgument("circulant matrix of order 0".into()));
        }
        Ok(Self { first_row })
    }

    pub fn from_real(first_row: &[f64]) -> Result<Self> {
        Self::new(first_row.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        row[0] = Complex64::new(1.0, 0.0);
        Self { first_row: row }
    }

    /// The cyclic shift `W` with ones below the diagonal and in the top-right
    /// corner, i.e. first row `(0, …, 0, 1)`.
    pub fn shift(n: usize) -> Self {
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        row[n - 1] = Complex64::new(1.0, 0.0);
        Self { first_row: row }
    }

    pub fn order(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[Complex64] {
        &self.first_row
    }

    /// Entry `(i, j)`, zero-based.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let n = self.order();
        self.first_row[(j + n - i % n) % n]
    }

    /// Multiply by a vector.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.order();
        (0..n)
            .map(|i| {
                let mut acc = CompensatedComplexSum::default();
                for (j, xj) in x.iter().enumerate() {
                    acc.add(self.entry(i, j) * xj);
                }
                acc.value()
            })
            .collect()
    }
}

/// `v_p = (1, ω_p, …, ω_p^{n-1})`; `v_n` is the all-ones vector.
pub fn eigen_basis_vector(n: usize, p: usize) -> Result<Vec<Complex64>> {
    check_mode(p, n)?;
    Ok((0..n)
        .map(|k| unit_root((p * k) as i64, n as i64))
        .collect())
}

/// Eigenvalue of `m` on `v_p`: `Σ_j c_{1,j} ω_p^{j-1}`.
pub fn circulant_eigenvalue(m: &CirculantMatrix, p: usize) -> Result<Complex64> {
    let n = m.order();
    check_mode(p, n)?;
    let mut acc = CompensatedComplexSum::default();
    for (j, c) in m.first_row().iter().enumerate() {
        acc.add(c * unit_root((p * j) as i64, n as i64));
    }
    Ok(acc.value())
}

/// Squared distance between vertex 1 of polygon `t` and vertex `j + 1` of
/// polygon `s` (zero-based offset `j`), written without cancellation and
/// symmetric in `(t, s)` bit for bit.
pub(crate) fn offset_distance_sq(r_t: f64, r_s: f64, dh: f64, j: i64, n: i64) -> f64 {
    // |r_t - r_s ω_j|² = (r_t - r_s)² + 4 r_t r_s sin²(πj/n)
    let half = sin_turn(j, 2 * n);
    let dr = r_t - r_s;
    dr * dr + 4.0 * (r_t * r_s) * (half * half) + dh * dh
}

fn block_indices(stack: &PolygonStack, t: usize, s: usize) -> Result<()> {
    stack.check_polygon(t)?;
    stack.check_polygon(s)
}

/// First row of the in-plane block `A_{TS}` (polygons 1-based).
///
/// Off the block diagonal, or off the diagonal of a diagonal block, the entry
/// at column `j` is `(r_T - r_S ω_{j-1}) / |(r_T, h_T) - (r_S ω_{j-1}, h_S)|^a
/// + (ν²/M) r_S ω_{j-1}`; the diagonal entry of a diagonal block is `(ν²/M) r_T`.
pub fn assemble_a_block(
    stack: &PolygonStack,
    t: usize,
    s: usize,
    nu2_over_m: f64,
) -> Result<CirculantMatrix> {
    block_indices(stack, t, s)?;
    let n = stack.n() as i64;
    let a = stack.a();
    let (r_t, r_s) = (stack.radius(t), stack.radius(s));
    let dh = stack.height(t) - stack.height(s);
    let mut row = Vec::with_capacity(n as usize);
    for j in 0..n {
        if t == s && j == 0 {
            row.push(Complex64::new(nu2_over_m * r_t, 0.0));
            continue;
        }
        let w = unit_root(j, n);
        let d2 = offset_distance_sq(r_t, r_s, dh, j, n);
        if d2 == 0.0 {
            return Err(Error::SingularGeometry(format!(
                "vertex 1 of polygon {t} coincides with vertex {} of polygon {s}",
                j + 1
            )));
        }
        let diff = Complex64::new(r_t, 0.0) - w * r_s;
        row.push(diff / d2.powf(a / 2.0) + w * (nu2_over_m * r_s));
    }
    CirculantMatrix::new(row)
}

/// First row of the height block `B_{TS}`: `(h_T - h_S)/|…|^a + (ν²/M) h_S`,
/// with diagonal `(ν²/M) h_T` on diagonal blocks.
pub fn assemble_b_block(
    stack: &PolygonStack,
    t: usize,
    s: usize,
    nu2_over_m: f64,
) -> Result<CirculantMatrix> {
    block_indices(stack, t, s)?;
    let n = stack.n() as i64;
    let a = stack.a();
    let (r_t, r_s) = (stack.radius(t), stack.radius(s));
    let (h_t, h_s) = (stack.height(t), stack.height(s));
    let dh = h_t - h_s;
    let mut row = Vec::with_capacity(n as usize);
    for j in 0..n {
        if t == s && j == 0 {
            row.push(Complex64::new(nu2_over_m * h_t, 0.0));
            continue;
        }
        let d2 = offset_distance_sq(r_t, r_s, dh, j, n);
        if d2 == 0.0 {
            return Err(Error::SingularGeometry(format!(
                "vertex 1 of polygon {t} coincides with vertex {} of polygon {s}",
                j + 1
            )));
        }
        row.push(Complex64::new(
            dh / d2.powf(a / 2.0) + nu2_over_m * h_s,
            0.0,
        ));
    }
    CirculantMatrix::new(row)
}

/// Which coordinate family a block system or mode matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Family {
    /// In-plane equations (right-hand side `ν² r_T`).
    A,
    /// Height equations (right-hand side `ν² h_T`).
    B,
}

/// The full `l × l` array of circulant blocks together with its right-hand side.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub family: Family,
    pub blocks: Vec<Vec<CirculantMatrix>>,
    /// One value per block row: `ν² r_T` (A) or `ν² h_T` (B).
    pub rhs: Vec<f64>,
    pub nu2_over_m: f64,
}

impl BlockSystem {
    pub fn assemble(
        stack: &PolygonStack,
        family: Family,
        nu: f64,
        nu2_over_m: f64,
    ) -> Result<Self> {
        let l = stack.l();
        let mut blocks = Vec::with_capacity(l);
        for t in 1..=l {
            let row = (1..=l)
                .map(|s| match family {
                    Family::A => assemble_a_block(stack, t, s, nu2_over_m),
                    Family::B => assemble_b_block(stack, t, s, nu2_over_m),
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(row);
        }
        let coords = match family {
            Family::A => stack.radii(),
            Family::B => stack.heights(),
        };
        let rhs = coords.iter().map(|c| nu * nu * c).collect();
        Ok(Self {
            family,
            blocks,
            rhs,
            nu2_over_m,
        })
    }

    pub fn l(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.blocks[0][0].order()
    }

    /// Row defects `Σ_S A_TS m_S − rhs_T 1`, one complex value per body.
    pub fn defects(&self, masses: &[f64]) -> Result<Vec<Complex64>> {
        let (l, n) = (self.l(), self.n());
        if masses.len() != l * n {
            return Err(Error::InvalidArgument(format!(
                "{} masses for a system of {} bodies",
                masses.len(),
                l * n
            )));
        }
        let mut out = Vec::with_capacity(l * n);
        for t in 0..l {
            for k in 0..n {
                let mut acc = CompensatedComplexSum::default();
                for s in 0..l {
                    let block = &self.blocks[t][s];
                    for j in 0..n {
                        acc.add(block.entry(k, j) * masses[s * n + j]);
                    }
                }
                acc.add(Complex64::new(-self.rhs[t], 0.0));
                out.push(acc.value());
            }
        }
        Ok(out)
    }
}
