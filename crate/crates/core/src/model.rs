//! Problem instances: stacks of concentric regular polygons and the explicit
//! body positions they generate.
//!
//! Bodies are stored polygon by polygon: body `(j - 1) * n + (k - 1)`
//! (zero-based) is vertex `k` of polygon `j`, placed at angle `2πk/n` on the
//! circle of radius `r_j` and at height `h_j`. Planar stacks simply carry
//! zero heights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{cos_turn, sin_turn};

/// `l` regular `n`-gons with radii `radii`, heights `heights`, and potential
/// exponent `a`, with no relative twist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonStack {
    n: usize,
    radii: Vec<f64>,
    heights: Vec<f64>,
    a: f64,
}

impl PolygonStack {
    /// Build a stack, checking every structural constraint.
    pub fn new(n: usize, radii: Vec<f64>, heights: Vec<f64>, a: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidStack(format!(
                "need n >= 3 vertices per polygon, got {n}"
            )));
        }
        if radii.is_empty() {
            return Err(Error::InvalidStack("need at least one polygon".into()));
        }
        if heights.len() != radii.len() {
            return Err(Error::InvalidStack(format!(
                "{} radii but {} heights",
                radii.len(),
                heights.len()
            )));
        }
        if !a.is_finite() || a < 2.0 {
            return Err(Error::InvalidStack(format!(
                "potential exponent must satisfy a >= 2, got {a}"
            )));
        }
        for (t, &r) in radii.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::InvalidStack(format!(
                    "radius r_{} = {r} is not strictly positive",
                    t + 1
                )));
            }
        }
        if let Some((t, h)) = heights.iter().enumerate().find(|(_, h)| !h.is_finite()) {
            return Err(Error::InvalidStack(format!(
                "height h_{} = {h} is not finite",
                t + 1
            )));
        }
        let planar = heights.iter().all(|&h| h == 0.0);
        for s in 0..radii.len() {
            for t in 0..s {
                if radii[s] == radii[t] && heights[s] == heights[t] {
                    let msg = if planar {
                        format!(
                            "radii must be pairwise distinct in a planar stack (r_{} = r_{} = {})",
                            t + 1,
                            s + 1,
                            radii[s]
                        )
                    } else {
                        format!(
                            "polygons {} and {} coincide: equal radii {} need distinct heights",
                            t + 1,
                            s + 1,
                            radii[s]
                        )
                    };
                    return Err(Error::InvalidStack(msg));
                }
            }
        }
        Ok(Self {
            n,
            radii,
            heights,
            a,
        })
    }

    /// A planar stack (all heights zero).
    pub fn planar(n: usize, radii: Vec<f64>, a: f64) -> Result<Self> {
        let heights = vec![0.0; radii.len()];
        Self::new(n, radii, heights, a)
    }

    /// Vertices per polygon.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of polygons.
    pub fn l(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn is_planar(&self) -> bool {
        self.heights.iter().all(|&h| h == 0.0)
    }

    /// Radius of polygon `t` (1-based).
    pub fn radius(&self, t: usize) -> f64 {
        self.radii[t - 1]
    }

    /// Height of polygon `t` (1-based).
    pub fn height(&self, t: usize) -> f64 {
        self.heights[t - 1]
    }

    /// Same stack with every radius and height multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.radii.iter().map(|r| r * factor).collect(),
            self.heights.iter().map(|h| h * factor).collect(),
            self.a,
        )
    }

    pub(crate) fn check_polygon(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.l() {
            Err(Error::PolygonOutOfRange {
                index: t,
                l: self.l(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_mode(&self, p: usize) -> Result<()> {
        check_mode(p, self.n)
    }
}

pub(crate) fn check_mode(p: usize, n: usize) -> Result<()> {
    if p == 0 || p > n {
        Err(Error::ModeOutOfRange { p, n })
    } else {
        Ok(())
    }
}

/// Explicit positions of all `l * n` bodies of a stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<[f64; 3]>,
    stack: PolygonStack,
}

impl Configuration {
    /// Positions as 3-vectors; the third coordinate is zero for planar stacks.
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn stack(&self) -> &PolygonStack {
        &self.stack
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether every body lies in the plane `z = 0`.
    pub fn is_planar(&self) -> bool {
        self.stack.is_planar()
    }

    /// Planar positions; `None` when any height is nonzero.
    pub fn planar_points(&self) -> Option<Vec<[f64; 2]>> {
        self.is_planar()
            .then(|| self.points.iter().map(|q| [q[0], q[1]]).collect())
    }

    /// Spatial dimension the configuration lives in (2 or 3).
    pub fn dimension(&self) -> usize {
        if self.is_planar() {
            2
        } else {
            3
        }
    }
}

/// Body masses (or vorticities) together with the angular parameter `nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassAssignment {
    pub masses: Vec<f64>,
    pub nu: f64,
}

impl MassAssignment {
    pub fn new(masses: Vec<f64>, nu: f64) -> Self {
        Self { masses, nu }
    }

    /// Expand per-polygon masses to one mass per body (`n` copies each).
    pub fn from_polygon_masses(polygon_masses: &[f64], n: usize, nu: f64) -> Self {
        let masses = polygon_masses
            .iter()
            .flat_map(|&m| std::iter::repeat_n(m, n))
            .collect();
        Self { masses, nu }
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Positions of every body, polygon by polygon, vertex `k` at angle `2πk/n`.
pub fn build_positions(stack: &PolygonStack) -> Configuration {
    let n = stack.n();
    let mut points = Vec::with_capacity(n * stack.l());
    for (&r, &h) in stack.radii().iter().zip(stack.heights()) {
        for k in 1..=n {
            let (c, s) = (cos_turn(k as i64, n as i64), sin_turn(k as i64, n as i64));
            points.push([r * c, r * s, h]);
        }
    }
    Configuration {
        points,
        stack: stack.clone(),
    }
}

/// `Σ m_j q_j / M` in three coordinates.
pub fn center_of_mass(config: &Configuration, masses: &MassAssignment) -> Result<[f64; 3]> {
    weighted_center(config.points(), &masses.masses)
}

pub(crate) fn weighted_center(points: &[[f64; 3]], masses: &[f64]) -> Result<[f64; 3]> {
    if points.len() != masses.len() {
        return Err(Error::InvalidArgument(format!(
            "{} masses for {} bodies",
            masses.len(),
            points.len()
        )));
    }
    let total: f64 = masses.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroTotalMass);
    }
    let mut c = [0.0; 3];
    for (q, &m) in points.iter().zip(masses) {
        for d in 0..3 {
            c[d] += m * q[d];
        }
    }
    Ok(c.map(|x| x / total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3]) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn square_vertices_in_order() {
        let stack = PolygonStack::planar(4, vec![1.0], 3.0).unwrap();
        let cfg = build_positions(&stack);
        let expected = [
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [1.0, 0.0, 0.0],
        ];
        assert_eq!(cfg.len(), 4);
        for (q, e) in cfg.points().iter().zip(expected) {
            assert!(close(*q, e), "{q:?} vs {e:?}");
        }
    }

    #[test]
    fn concentric_polygons_are_homothetic() {
        let stack = PolygonStack::planar(3, vec![1.0, 2.0], 3.0).unwrap();
        let cfg = build_positions(&stack);
        assert_eq!(cfg.len(), 6);
        for k in 0..3 {
            let (inner, outer) = (cfg.points()[k], cfg.points()[3 + k]);
            assert_eq!(outer, inner.map(|x| 2.0 * x));
        }
    }

    #[test]
    fn nonplanar_heights_follow_polygons() {
        let stack = PolygonStack::new(4, vec![1.0, 3.0], vec![0.25, 2.0], 3.0).unwrap();
        let cfg = build_positions(&stack);
        let z: Vec<f64> = cfg.points().iter().map(|q| q[2]).collect();
        assert_eq!(z, vec![0.25, 0.25, 0.25, 0.25, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(cfg.dimension(), 3);
        assert!(cfg.planar_points().is_none());
    }

    #[test]
    fn invariant_violations_are_named() {
        let err = PolygonStack::planar(2, vec![1.0], 3.0).unwrap_err();
        assert!(err.to_string().contains("n >= 3"));
        let err = PolygonStack::planar(4, vec![1.0, -1.0], 3.0).unwrap_err();
        assert!(err.to_string().contains("strictly positive"));
        let err = PolygonStack::planar(4, vec![1.0, 1.0], 3.0).unwrap_err();
        assert!(err.to_string().contains("pairwise distinct"));
        let err = PolygonStack::new(4, vec![1.0, 1.0], vec![0.5, 0.5], 3.0).unwrap_err();
        assert!(err.to_string().contains("distinct heights"));
        let err = PolygonStack::planar(4, vec![1.0], 1.5).unwrap_err();
        assert!(err.to_string().contains("a >= 2"));
        // equal radii are fine when heights differ
        assert!(PolygonStack::new(4, vec![1.0, 1.0], vec![0.0, 0.5], 3.0).is_ok());
    }

    #[test]
    fn center_of_mass_cases() {
        let stack = PolygonStack::planar(5, vec![1.0], 3.0).unwrap();
        let cfg = build_positions(&stack);
        let c = center_of_mass(&cfg, &MassAssignment::new(vec![1.0; 5], 1.0)).unwrap();
        assert!(close(c, [0.0; 3]));

        let stack = PolygonStack::planar(6, vec![1.0, 2.5, 4.0], 3.0).unwrap();
        let cfg = build_positions(&stack);
        let m = MassAssignment::from_polygon_masses(&[1.0, 0.3, 2.0], 6, 1.0);
        let c = center_of_mass(&cfg, &m).unwrap();
        assert!(close(c, [0.0; 3]));

        let c = weighted_center(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], &[1.0, 3.0]).unwrap();
        assert!(close(c, [-0.5, 0.0, 0.0]));

        let m = MassAssignment::new(vec![1.0, -1.0, 0.0, 0.0, 0.0], 1.0);
        let cfg = build_positions(&PolygonStack::planar(5, vec![1.0], 3.0).unwrap());
        assert_eq!(center_of_mass(&cfg, &m), Err(Error::ZeroTotalMass));
    }

    #[test]
    fn positions_are_homogeneous_and_rotation_permutes() {
        let stack = PolygonStack::new(7, vec![0.7, 1.9], vec![0.1, -0.4], 3.0).unwrap();
        let cfg = build_positions(&stack);
        let scaled = build_positions(&stack.scaled(2.5).unwrap());
        for (q, s) in cfg.points().iter().zip(scaled.points()) {
            assert!(close(q.map(|x| 2.5 * x), *s));
        }
        let th = 2.0 * std::f64::consts::PI / 7.0;
        let (c, s) = (th.cos(), th.sin());
        for poly in 0..2 {
            for k in 0..7 {
                let q = cfg.points()[poly * 7 + k];
                let rotated = [c * q[0] - s * q[1], s * q[0] + c * q[1], q[2]];
                let next = cfg.points()[poly * 7 + (k + 1) % 7];
                assert!(close(rotated, next));
            }
        }
    }
}
