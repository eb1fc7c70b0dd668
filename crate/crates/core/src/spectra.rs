//! Closed-form mode eigenvalues of the block system and the `l × l` mode
//! matrices built from them.
//!
//! All blocks of a stack share the eigenbasis `v_1..v_n`, so the full system
//! decouples into one `l × l` system per mode `p`. For the in-plane family the
//! entries are
//!
//! ```text
//! off-diagonal  f_p(r_T, r_S) = Σ_{j=1}^{n} [r_T cos(jθp) − r_S cos(jθ(p+1))] / (r_T² − 2 r_T r_S cos(jθ) + r_S² + Δh²)^{a/2}
//! diagonal      ξ_p(r_T)      = (2 r_T)^{1−a} Σ_{j=1}^{n−1} sin(jθ(2p+1)/2) · sin^{1−a}(jθ/2)
//! ```
//!
//! plus `δ_{p,n−1} r_S (ν²/M) n`. The height family carries
//! `(h_T − h_S) Σ_j cos(jθp) / (…)^{a/2}` off the diagonal and only the
//! `δ_{p,n} h_S (ν²/M) n` term on it. Both `f_p` and `ξ_p` are homogeneous of
//! degree `1 − a` in the radii.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circulant::{offset_distance_sq, Family};
use crate::error::{Error, Result};
use crate::model::PolygonStack;
use crate::numeric::{cos_turn, sin_turn, CompensatedSum};
use crate::series;

/// Relative threshold below which a determinant is reported as numerically
/// singular: `|det| <= SINGULAR_RELATIVE_THRESHOLD · ‖M‖_F^l`.
pub const SINGULAR_RELATIVE_THRESHOLD: f64 = 1e-9;

/// Relative radius gap below which `f_p` logs a conditioning warning.
pub const NEAR_COINCIDENT_GAP: f64 = 1e-6;

/// `true` when two coplanar radii are close enough for the `j = n` term of
/// `f_p` to dominate.
pub fn is_near_coincident(r_t: f64, r_s: f64, dh: f64) -> bool {
    dh == 0.0 && ((r_t - r_s) / r_t).abs() < NEAR_COINCIDENT_GAP
}

/// Planar inter-polygon eigenvalue `f_p(r_T, r_S)`; `p` is reduced mod `n`.
pub fn f_p(r_t: f64, r_s: f64, n: usize, a: f64, p: i64) -> Result<f64> {
    f_p_lifted(r_t, r_s, 0.0, n, a, p)
}

/// `f_p` with the polygons at height offset `dh = h_T − h_S`.
pub fn f_p_lifted(r_t: f64, r_s: f64, dh: f64, n: usize, a: f64, p: i64) -> Result<f64> {
    if !(r_t > 0.0 && r_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radii must be positive, got ({r_t}, {r_s})"
        )));
    }
    if r_t == r_s && dh == 0.0 {
        return Err(Error::SingularGeometry(format!(
            "f_p needs distinct radii or heights, got r_T = r_S = {r_t}"
        )));
    }
    if is_near_coincident(r_t, r_s, dh) {
        log::debug!("f_p: radii {r_t} and {r_s} nearly coincide; the j = n term dominates");
    }
    let n = n as i64;
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        let num = r_t * cos_turn(j * p, n) - r_s * cos_turn(j * (p + 1), n);
        let d2 = offset_distance_sq(r_t, r_s, dh, j, n);
        acc.add(num / d2.powf(a / 2.0));
    }
    Ok(acc.value())
}

/// Intra-polygon eigenvalue `ξ_p(r)`; `p` is reduced mod `n`.
pub fn xi_p(r: f64, n: usize, a: f64, p: i64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {r}"
        )));
    }
    let two_n = 2 * n as i64;
    let mut acc = CompensatedSum::new();
    for j in 1..n as i64 {
        let s = sin_turn(j * (2 * p + 1), two_n);
        if s == 0.0 {
            continue;
        }
        acc.add(s * sin_turn(j, two_n).powf(1.0 - a));
    }
    Ok((2.0 * r).powf(1.0 - a) * acc.value())
}

/// Height-family kernel `Σ_{j=1}^{n} cos(jθp) / (…)^{a/2}`, symmetric in `(T, S)`.
pub(crate) fn height_kernel(r_t: f64, r_s: f64, dh: f64, n: usize, a: f64, p: i64) -> f64 {
    let n = n as i64;
    let mut acc = CompensatedSum::new();
    for j in 1..=n {
        let d2 = offset_distance_sq(r_t, r_s, dh, j, n);
        acc.add(cos_turn(j * p, n) / d2.powf(a / 2.0));
    }
    acc.value()
}

fn check_indices(stack: &PolygonStack, p: usize, t: usize, s: usize) -> Result<()> {
    stack.check_mode(p)?;
    stack.check_polygon(t)?;
    stack.check_polygon(s)
}

/// Eigenvalue `λ_p(A_TS)` of an in-plane block (indices 1-based).
pub fn lambda_a(
    stack: &PolygonStack,
    p: usize,
    t: usize,
    s: usize,
    nu2_over_m: f64,
) -> Result<f64> {
    check_indices(stack, p, t, s)?;
    let (n, a) = (stack.n(), stack.a());
    let base = if t == s {
        xi_p(stack.radius(t), n, a, p as i64)?
    } else {
        f_p_lifted(
            stack.radius(t),
            stack.radius(s),
            stack.height(t) - stack.height(s),
            n,
            a,
            p as i64,
        )?
    };
    let nu_term = if p == n - 1 {
        stack.radius(s) * nu2_over_m * n as f64
    } else {
        0.0
    };
    Ok(base + nu_term)
}

/// Eigenvalue `λ_p(B_TS)` of a height block (indices 1-based).
pub fn lambda_b(
    stack: &PolygonStack,
    p: usize,
    t: usize,
    s: usize,
    nu2_over_m: f64,
) -> Result<f64> {
    check_indices(stack, p, t, s)?;
    let n = stack.n();
    let nu_term = if p == n {
        stack.height(s) * nu2_over_m * n as f64
    } else {
        0.0
    };
    if t == s {
        return Ok(nu_term);
    }
    let (h_t, h_s) = (stack.height(t), stack.height(s));
    let dh = h_t - h_s;
    if dh == 0.0 {
        return Ok(nu_term);
    }
    let kernel = height_kernel(stack.radius(t), stack.radius(s), dh, n, stack.a(), p as i64);
    Ok(dh * kernel + nu_term)
}

/// The `l × l` matrix `[λ_p(·_TS)]` of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatrix {
    pub p: usize,
    pub family: Family,
    pub entries: DMatrix<f64>,
    /// Whether the ν²/M Kronecker term (mode n−1 for A, mode n for B) is present.
    pub contains_nu_term: bool,
}

impl ModeMatrix {
    pub fn l(&self) -> usize {
        self.entries.nrows()
    }

    /// Exact skew-symmetry (bitwise `m_ts == -m_st`).
    pub fn is_skew_symmetric(&self) -> bool {
        let l = self.l();
        (0..l).all(|t| (0..l).all(|s| self.entries[(t, s)] == -self.entries[(s, t)]))
    }
}

/// Assemble the mode matrix of `family` for mode `p`.
pub fn mode_matrix(
    stack: &PolygonStack,
    p: usize,
    family: Family,
    nu2_over_m: f64,
) -> Result<ModeMatrix> {
    stack.check_mode(p)?;
    let l = stack.l();
    let mut entries = DMatrix::zeros(l, l);
    for t in 1..=l {
        for s in 1..=l {
            entries[(t - 1, s - 1)] = match family {
                Family::A => lambda_a(stack, p, t, s, nu2_over_m)?,
                Family::B => lambda_b(stack, p, t, s, nu2_over_m)?,
            };
        }
    }
    let nu_mode = match family {
        Family::A => stack.n() - 1,
        Family::B => stack.n(),
    };
    Ok(ModeMatrix {
        p,
        family,
        entries,
        contains_nu_term: p == nu_mode && nu2_over_m != 0.0,
    })
}

/// Sign verdict of a determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Positive,
    Negative,
    /// Below the relative singularity threshold.
    NumericallySingular,
    /// Zero by structure (odd-order skew-symmetric matrix).
    StructurallyZero,
}

impl Verdict {
    pub fn is_nonzero(self) -> bool {
        matches!(self, Verdict::Positive | Verdict::Negative)
    }
}

/// Classify `det` of an `l × l` matrix with Frobenius norm `frobenius`.
pub fn classify_determinant(det: f64, frobenius: f64, l: usize) -> Verdict {
    if det.abs() > SINGULAR_RELATIVE_THRESHOLD * frobenius.powi(l as i32) {
        if det > 0.0 {
            Verdict::Positive
        } else {
            Verdict::Negative
        }
    } else {
        Verdict::NumericallySingular
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminantReport {
    pub p: usize,
    pub family: Family,
    pub det: f64,
    /// `det / (r_1⋯r_l)^{1−a}`; only for the in-plane family without the ν-term.
    pub reduced: Option<f64>,
    pub frobenius: f64,
    pub verdict: Verdict,
}

/// Determinant of a mode matrix with its verdict and, when meaningful, the
/// homogeneity-reduced determinant.
pub fn mode_determinant(
    stack: &PolygonStack,
    p: usize,
    family: Family,
    nu2_over_m: f64,
) -> Result<DeterminantReport> {
    let m = mode_matrix(stack, p, family, nu2_over_m)?;
    let l = m.l();
    let frobenius = m.entries.norm();
    let structurally_zero =
        family == Family::B && p != stack.n() && l % 2 == 1 && m.is_skew_symmetric();
    let (det, verdict) = if structurally_zero {
        (0.0, Verdict::StructurallyZero)
    } else {
        let det = m.entries.determinant();
        (det, classify_determinant(det, frobenius, l))
    };
    let reduced = (family == Family::A && !m.contains_nu_term).then(|| {
        let scale: f64 = stack
            .radii()
            .iter()
            .map(|r| r.powf(1.0 - stack.a()))
            .product();
        det / scale
    });
    Ok(DeterminantReport {
        p,
        family,
        det,
        reduced,
        frobenius,
        verdict,
    })
}

/// In-plane mode matrix written in radius ratios: `ξ_p(1)` on the diagonal and
/// `f_p(1, r_S/r_T)` off it. Its determinant is the reduced determinant.
pub fn reduced_mode_matrix(radii: &[f64], n: usize, a: f64, p: i64) -> Result<DMatrix<f64>> {
    let l = radii.len();
    let xi1 = xi_p(1.0, n, a, p)?;
    let mut m = DMatrix::zeros(l, l);
    for t in 0..l {
        for s in 0..l {
            m[(t, s)] = if t == s {
                xi1
            } else {
                f_p(1.0, radii[s] / radii[t], n, a, p)?
            };
        }
    }
    Ok(m)
}

/// Which adjacent pair of polygons is shrunk in a scaled-block limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerPair {
    /// The last two polygons shrink (outer block first).
    #[default]
    Trailing,
    /// The first two polygons shrink.
    Leading,
}

impl InnerPair {
    fn indices(self, l: usize) -> [usize; 2] {
        match self {
            InnerPair::Trailing => [l - 2, l - 1],
            InnerPair::Leading => [0, 1],
        }
    }
}

fn check_scaled(stack: &PolygonStack, p: usize) -> Result<()> {
    stack.check_mode(p)?;
    let l = stack.l();
    if l < 2 || !l.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "scaled-block limit needs an even number of polygons, got {l}"
        )));
    }
    if p == stack.n() - 1 {
        return Err(Error::InvalidArgument(
            "mode n-1 carries the ν²/M term and has no reduced determinant".into(),
        ));
    }
    Ok(())
}

/// Reduced determinant of the in-plane mode-`p` matrix after multiplying the
/// trailing pair of radii by `alpha`.
pub fn scaled_block_limit(stack: &PolygonStack, p: usize, alpha: f64) -> Result<f64> {
    scaled_block_limit_with(stack, p, alpha, InnerPair::Trailing)
}

pub fn scaled_block_limit_with(
    stack: &PolygonStack,
    p: usize,
    alpha: f64,
    pair: InnerPair,
) -> Result<f64> {
    check_scaled(stack, p)?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let mut radii = stack.radii().to_vec();
    for i in pair.indices(radii.len()) {
        radii[i] *= alpha;
    }
    Ok(reduced_mode_matrix(&radii, stack.n(), stack.a(), p as i64)?.determinant())
}

/// `α → 0⁺` value of [`scaled_block_limit_with`]: the product of the reduced
/// determinants of the remaining block and of the shrunk pair.
pub fn block_limit_product(stack: &PolygonStack, p: usize, pair: InnerPair) -> Result<f64> {
    check_scaled(stack, p)?;
    let l = stack.l();
    let inner = pair.indices(l);
    let radii = stack.radii();
    let inner_radii: Vec<f64> = inner.iter().map(|&i| radii[i]).collect();
    let outer_radii: Vec<f64> = (0..l)
        .filter(|i| !inner.contains(i))
        .map(|i| radii[i])
        .collect();
    let (n, a) = (stack.n(), stack.a());
    let inner_det = reduced_mode_matrix(&inner_radii, n, a, p as i64)?.determinant();
    let outer_det = if outer_radii.is_empty() {
        1.0
    } else {
        reduced_mode_matrix(&outer_radii, n, a, p as i64)?.determinant()
    };
    Ok(outer_det * inner_det)
}

/// `−λ_p(A_12) λ_p(A_21)` for a two-polygon stack, without the `ν²/M` term:
/// the negated product of the secondary diagonal of the in-plane mode matrix.
/// In the plane it is positive for `p ≠ N − 1`; with heights it may change sign.
pub fn secondary_product(stack: &PolygonStack, p: usize) -> Result<f64> {
    if stack.l() != 2 {
        return Err(Error::InvalidArgument(format!(
            "secondary product needs two polygons, got {}",
            stack.l()
        )));
    }
    Ok(-lambda_a(stack, p, 1, 2, 0.0)? * lambda_a(stack, p, 2, 1, 0.0)?)
}

/// Ratio below which cross entries are taken from the series.
const SERIES_RATIO: f64 = 0.25;

/// `f_p(1, y)` keeping relative accuracy for widely separated radii.
fn cross_entry(y: f64, n: usize, a: f64, p: i64) -> Result<f64> {
    if y <= SERIES_RATIO {
        // f_p(1, y) = -f_{N-p-1}(y, 1)
        Ok(-series::f_small_ratio(n as i64 - p - 1, n, a, y)?)
    } else if y >= 1.0 / SERIES_RATIO {
        Ok(y.powf(1.0 - a) * series::f_small_ratio(p, n, a, 1.0 / y)?)
    } else {
        f_p(1.0, y, n, a, p)
    }
}

/// `det(α) − det(outer)·det(inner)` for a scaled-block limit.
///
/// Only the cross blocks `Q`, `R` depend on `α`, so with the diagonal blocks
/// `P` (outer) and `S` (inner pair) the gap is
/// `det P · [det(S − R P⁻¹ Q) − det S]`, expanded for the 2×2 inner block so
/// that no two O(1) quantities are subtracted.
pub fn scaled_block_gap_with(
    stack: &PolygonStack,
    p: usize,
    alpha: f64,
    pair: InnerPair,
) -> Result<f64> {
    check_scaled(stack, p)?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let (n, a, pi) = (stack.n(), stack.a(), p as i64);
    let l = stack.l();
    let radii = stack.radii();
    let inner = pair.indices(l);
    let outer: Vec<usize> = (0..l).filter(|i| !inner.contains(i)).collect();
    let sub = |idx: &[usize]| {
        reduced_mode_matrix(&idx.iter().map(|&i| radii[i]).collect::<Vec<_>>(), n, a, pi)
    };
    let s_blk = sub(&inner)?;
    if outer.is_empty() {
        return Ok(0.0);
    }
    let p_blk = sub(&outer)?;
    let k = outer.len();
    let mut q = DMatrix::zeros(k, 2);
    let mut r = DMatrix::zeros(2, k);
    for (i, &o) in outer.iter().enumerate() {
        for (j, &m) in inner.iter().enumerate() {
            q[(i, j)] = cross_entry(alpha * radii[m] / radii[o], n, a, pi)?;
            r[(j, i)] = cross_entry(radii[o] / (alpha * radii[m]), n, a, pi)?;
        }
    }
    let lu = p_blk.clone().lu();
    let det_p = lu.determinant();
    let pq = lu.solve(&q).ok_or_else(|| {
        Error::SingularGeometry("outer block of the scaled limit is singular".into())
    })?;
    let e = &r * pq;
    let (s11, s12, s21, s22) = (s_blk[(0, 0)], s_blk[(0, 1)], s_blk[(1, 0)], s_blk[(1, 1)]);
    let (e11, e12, e21, e22) = (e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
    let det_e = e11 * e22 - e12 * e21;
    Ok(det_p * (det_e - (s11 * e22 + s22 * e11 - s12 * e21 - s21 * e12)))
}
