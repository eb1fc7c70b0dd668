//! Direct integration of the rotating solutions.
//!
//! For `a > 2` bodies follow `q̈_i = Σ_j m_j (q_j − q_i)/|q_j − q_i|^a`, and the
//! relative equilibrium starts with velocities `ν J(q_i − q_G)` (`J` a quarter
//! turn). For `a = 2` the bodies are point vortices,
//! `q̇_i = i Σ_j m_j (q_i − q_j)/|q_i − q_j|²`; substituting `q(t) = e^{iΩt} q(0)`
//! reproduces the equilibrium equation with `ν² = Ω`, so vortex stacks rotate
//! at angular velocity `ν²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{weighted_center, Configuration, MassAssignment};

/// Guard distance as a fraction of the smallest initial pair distance.
pub const COLLISION_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub positions: Vec<[f64; 2]>,
    /// Unused (zero) for vortex dynamics.
    pub velocities: Vec<[f64; 2]>,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<SimState>,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub max_relative_distance_drift: f64,
    /// Largest of the two first-integral drifts below.
    pub conserved_quantity_drift: f64,
    /// Energy (`a > 2`) or interaction Hamiltonian (`a = 2`).
    pub energy_drift: f64,
    /// Angular momentum (`a > 2`) or moment of vorticity `Σ m_i |q_i|²` (`a = 2`).
    pub momentum_drift: f64,
    /// Largest distance from the exact rigid rotation of the first sample about
    /// the center of mass, relative to the largest initial radius.
    pub rotation_deviation: f64,
    pub steps: usize,
    pub dt: f64,
}

fn is_vortex(a: f64) -> bool {
    a == 2.0
}

/// Period of the rigid rotation: `2π/ν` for `a > 2`, `2π/ν²` for vortices.
pub fn rotation_period(nu: f64, a: f64) -> f64 {
    2.0 * std::f64::consts::PI / angular_velocity(nu, a).abs()
}

/// Initial state of the uniformly rotating solution.
pub fn init_rotating(config: &Configuration, masses: &MassAssignment, a: f64) -> Result<SimState> {
    let points = config.planar_points().ok_or_else(|| {
        Error::Unsupported("dynamics are defined for planar configurations only".into())
    })?;
    if masses.masses.len() != points.len() {
        return Err(Error::InvalidArgument(format!(
            "{} masses for {} bodies",
            masses.masses.len(),
            points.len()
        )));
    }
    let velocities = if is_vortex(a) || masses.nu == 0.0 {
        vec![[0.0; 2]; points.len()]
    } else {
        let g = weighted_center(config.points(), &masses.masses)?;
        points
            .iter()
            .map(|q| [-masses.nu * (q[1] - g[1]), masses.nu * (q[0] - g[0])])
            .collect()
    };
    Ok(SimState {
        positions: points,
        velocities,
        time: 0.0,
    })
}

/// `Σ_j m_j (q_j − q_i)/|q_j − q_i|^a` for every body.
fn accelerations(q: &[[f64; 2]], m: &[f64], a: f64) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; q.len()];
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let d = [q[j][0] - q[i][0], q[j][1] - q[i][1]];
            let w = (d[0] * d[0] + d[1] * d[1]).powf(-a / 2.0);
            out[i][0] += m[j] * w * d[0];
            out[i][1] += m[j] * w * d[1];
            out[j][0] -= m[i] * w * d[0];
            out[j][1] -= m[i] * w * d[1];
        }
    }
    out
}

/// Vortex velocities `i Σ_j m_j (q_i − q_j)/|q_i − q_j|²`.
fn vortex_velocities(q: &[[f64; 2]], m: &[f64]) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; q.len()];
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let d = [q[i][0] - q[j][0], q[i][1] - q[j][1]];
            let w = 1.0 / (d[0] * d[0] + d[1] * d[1]);
            // i·(x + iy) = −y + ix
            out[i][0] -= m[j] * w * d[1];
            out[i][1] += m[j] * w * d[0];
            out[j][0] += m[i] * w * d[1];
            out[j][1] -= m[i] * w * d[0];
        }
    }
    out
}

fn axpy(y: &[[f64; 2]], h: f64, x: &[[f64; 2]]) -> Vec<[f64; 2]> {
    y.iter()
        .zip(x)
        .map(|(u, v)| [u[0] + h * v[0], u[1] + h * v[1]])
        .collect()
}

fn combine(y: &[[f64; 2]], h: f64, k: [&[[f64; 2]]; 4]) -> Vec<[f64; 2]> {
    (0..y.len())
        .map(|i| {
            let mut out = y[i];
            for c in 0..2 {
                out[c] += h / 6.0 * (k[0][i][c] + 2.0 * k[1][i][c] + 2.0 * k[2][i][c] + k[3][i][c]);
            }
            out
        })
        .collect()
}

fn rk4_step(state: &SimState, m: &[f64], a: f64, dt: f64) -> SimState {
    let q = &state.positions;
    if is_vortex(a) {
        let k1 = vortex_velocities(q, m);
        let k2 = vortex_velocities(&axpy(q, dt / 2.0, &k1), m);
        let k3 = vortex_velocities(&axpy(q, dt / 2.0, &k2), m);
        let k4 = vortex_velocities(&axpy(q, dt, &k3), m);
        return SimState {
            positions: combine(q, dt, [&k1, &k2, &k3, &k4]),
            velocities: state.velocities.clone(),
            time: state.time + dt,
        };
    }
    let v = &state.velocities;
    let a1 = accelerations(q, m, a);
    let v1 = v.clone();
    let q2 = axpy(q, dt / 2.0, &v1);
    let v2 = axpy(v, dt / 2.0, &a1);
    let a2 = accelerations(&q2, m, a);
    let q3 = axpy(q, dt / 2.0, &v2);
    let v3 = axpy(v, dt / 2.0, &a2);
    let a3 = accelerations(&q3, m, a);
    let q4 = axpy(q, dt, &v3);
    let v4 = axpy(v, dt, &a3);
    let a4 = accelerations(&q4, m, a);
    SimState {
        positions: combine(q, dt, [&v1, &v2, &v3, &v4]),
        velocities: combine(v, dt, [&a1, &a2, &a3, &a4]),
        time: state.time + dt,
    }
}

fn closest_pair(q: &[[f64; 2]]) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let d = (q[i][0] - q[j][0]).hypot(q[i][1] - q[j][1]);
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    best
}

/// Fixed-step fourth-order Runge–Kutta integration, keeping every
/// `stride`-th state (and the last one).
pub fn integrate(
    state: &SimState,
    masses: &MassAssignment,
    a: f64,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    if !(a >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "exponent a must be at least 2, got {a}"
        )));
    }
    let m = &masses.masses;
    if m.len() != state.positions.len() || state.velocities.len() != state.positions.len() {
        return Err(Error::InvalidArgument(
            "state and masses disagree in size".into(),
        ));
    }
    let guard = COLLISION_GUARD * closest_pair(&state.positions).0;
    let mut current = state.clone();
    let mut samples = vec![current.clone()];
    for step in 1..=steps {
        current = rk4_step(&current, m, a, dt);
        let (d, i, j) = closest_pair(&current.positions);
        if !(d >= guard) {
            return Err(Error::Collision {
                time: current.time,
                i,
                j,
            });
        }
        if step % stride == 0 || step == steps {
            samples.push(current.clone());
        }
    }
    Ok(Trajectory {
        samples,
        dt,
        steps,
        stride,
    })
}

fn pair_distances(q: &[[f64; 2]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(q.len() * q.len().saturating_sub(1) / 2);
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            out.push((q[i][0] - q[j][0]).hypot(q[i][1] - q[j][1]));
        }
    }
    out
}

/// `(value, scale)` of the energy-like first integral. The scale is used when
/// the value itself is too close to zero to normalize by.
fn energy_like(s: &SimState, m: &[f64], a: f64) -> (f64, f64) {
    let q = &s.positions;
    let mut pot = 0.0;
    let mut pot_scale = 0.0;
    for i in 0..q.len() {
        for j in (i + 1)..q.len() {
            let r = (q[i][0] - q[j][0]).hypot(q[i][1] - q[j][1]);
            let mm = m[i] * m[j];
            if is_vortex(a) {
                pot += mm * r.ln();
                pot_scale += mm.abs();
            } else {
                let u = mm * r.powf(2.0 - a) / (a - 2.0);
                pot += u;
                pot_scale += u.abs();
            }
        }
    }
    if is_vortex(a) {
        return (pot, pot_scale);
    }
    let kin: f64 = m
        .iter()
        .zip(&s.velocities)
        .map(|(mi, v)| 0.5 * mi * (v[0] * v[0] + v[1] * v[1]))
        .sum();
    let kin_scale: f64 = m
        .iter()
        .zip(&s.velocities)
        .map(|(mi, v)| 0.5 * (mi * (v[0] * v[0] + v[1] * v[1])).abs())
        .sum();
    (kin - pot, kin_scale + pot_scale)
}

fn momentum_like(s: &SimState, m: &[f64], a: f64) -> (f64, f64) {
    let terms: Vec<f64> = if is_vortex(a) {
        m.iter()
            .zip(&s.positions)
            .map(|(mi, q)| mi * (q[0] * q[0] + q[1] * q[1]))
            .collect()
    } else {
        m.iter()
            .zip(s.positions.iter().zip(&s.velocities))
            .map(|(mi, (q, v))| mi * (q[0] * v[1] - q[1] * v[0]))
            .collect()
    };
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// Largest `|v(t) − v(0)|` over the samples, relative to `|v(0)|`, or to the
/// magnitude scale when `v(0)` is too close to zero (or `use_scale` is set).
fn relative_drift(values: &[(f64, f64)], use_scale: bool) -> f64 {
    let Some(&(v0, scale0)) = values.first() else {
        return 0.0;
    };
    let denom = if !use_scale && v0.abs() > 1e-3 * scale0 {
        v0.abs()
    } else {
        scale0.max(v0.abs())
    };
    if denom == 0.0 {
        return 0.0;
    }
    values
        .iter()
        .map(|(v, _)| (v - v0).abs() / denom)
        .fold(0.0, f64::max)
}

/// Angular velocity of the rotating solution: `ν`, or `ν²` for vortices.
pub fn angular_velocity(nu: f64, a: f64) -> f64 {
    if is_vortex(a) {
        nu * nu
    } else {
        nu
    }
}

fn rotation_deviation(trajectory: &Trajectory, masses: &MassAssignment, omega: f64) -> f64 {
    let q0 = &trajectory.samples[0].positions;
    let lifted: Vec<[f64; 3]> = q0.iter().map(|q| [q[0], q[1], 0.0]).collect();
    let g = weighted_center(&lifted, &masses.masses).unwrap_or([0.0; 3]);
    let scale = q0
        .iter()
        .map(|q| (q[0] - g[0]).hypot(q[1] - g[1]))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for s in &trajectory.samples {
        let (sin, cos) = (omega * s.time).sin_cos();
        for (p, q) in s.positions.iter().zip(q0) {
            let (x, y) = (q[0] - g[0], q[1] - g[1]);
            let e = [g[0] + cos * x - sin * y, g[1] + sin * x + cos * y];
            worst = worst.max((p[0] - e[0]).hypot(p[1] - e[1]) / scale);
        }
    }
    worst
}

/// Drift of pairwise distances and first integrals along a trajectory.
pub fn drift_report(
    trajectory: &Trajectory,
    masses: &MassAssignment,
    a: f64,
) -> Result<DriftReport> {
    let first = trajectory
        .samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let m = &masses.masses;
    if m.len() != first.positions.len() {
        return Err(Error::InvalidArgument(
            "trajectory and masses disagree in size".into(),
        ));
    }
    let d0 = pair_distances(&first.positions);
    let mut dist = 0.0f64;
    for s in &trajectory.samples {
        for (d, r0) in pair_distances(&s.positions).iter().zip(&d0) {
            dist = dist.max((d - r0).abs() / r0);
        }
    }
    let energy: Vec<(f64, f64)> = trajectory
        .samples
        .iter()
        .map(|s| energy_like(s, m, a))
        .collect();
    let momentum: Vec<(f64, f64)> = trajectory
        .samples
        .iter()
        .map(|s| momentum_like(s, m, a))
        .collect();
    // the vortex Hamiltonian shifts by ln λ Σ m_i m_j under a change of length
    // unit, so it is measured against Σ |m_i m_j| rather than its own value
    let energy_drift = relative_drift(&energy, is_vortex(a));
    let momentum_drift = relative_drift(&momentum, false);
    Ok(DriftReport {
        max_relative_distance_drift: dist,
        conserved_quantity_drift: energy_drift.max(momentum_drift),
        energy_drift,
        momentum_drift,
        rotation_deviation: rotation_deviation(trajectory, masses, angular_velocity(masses.nu, a)),
        steps: trajectory.steps,
        dt: trajectory.dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_positions, PolygonStack};
    use crate::solver::solve_equal_masses;

    fn solved(n: usize, radii: Vec<f64>, a: f64, nu: f64) -> (Configuration, MassAssignment) {
        let stack = PolygonStack::planar(n, radii, a).unwrap();
        let sol = solve_equal_masses(&stack, nu).unwrap();
        (build_positions(&stack), sol.to_assignment(n))
    }

    #[test]
    fn two_body_circular_orbit() {
        // equal unit masses at ±1: |F| = 1/4 = v²/1, so v = 1/2 and ν = 1/2
        let state = SimState {
            positions: vec![[1.0, 0.0], [-1.0, 0.0]],
            velocities: vec![[0.0, 0.5], [0.0, -0.5]],
            time: 0.0,
        };
        let m = MassAssignment::new(vec![1.0, 1.0], 0.5);
        let period = rotation_period(0.5, 3.0);
        let traj = integrate(&state, &m, 3.0, period / 1e4, 10_000, 10).unwrap();
        let rep = drift_report(&traj, &m, 3.0).unwrap();
        assert!(rep.max_relative_distance_drift < 1e-8);
        let last = traj.samples.last().unwrap();
        assert!((last.positions[0][0] - 1.0).abs() < 1e-8 && last.positions[0][1].abs() < 1e-8);
    }

    #[test]
    fn initial_velocities_are_tangent() {
        let (cfg, m) = solved(5, vec![1.0], 3.0, 0.8);
        let s = init_rotating(&cfg, &m, 3.0).unwrap();
        for (q, v) in s.positions.iter().zip(&s.velocities) {
            assert!((v[0].hypot(v[1]) - 0.8).abs() < 1e-14);
            assert!((q[0] * v[0] + q[1] * v[1]).abs() < 1e-14);
        }
        let (cfg, m) = solved(4, vec![1.0, 2.0], 3.0, 1.0);
        let s = init_rotating(&cfg, &m, 3.0).unwrap();
        for (q, v) in s.positions.iter().zip(&s.velocities) {
            assert!((q[0] * v[0] + q[1] * v[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn static_when_nu_zero() {
        let stack = PolygonStack::planar(4, vec![1.0, 2.0], 3.0).unwrap();
        let m = MassAssignment::from_polygon_masses(&[0.0, 0.0], 4, 0.0);
        let s = init_rotating(&build_positions(&stack), &m, 3.0).unwrap();
        let t = integrate(&s, &m, 3.0, 0.1, 10, 1).unwrap();
        assert_eq!(t.samples.last().unwrap().positions, s.positions);
    }

    #[test]
    fn rejects_bad_input() {
        let stack = PolygonStack::new(4, vec![1.0, 2.0], vec![0.0, 1.0], 3.0).unwrap();
        let m = MassAssignment::from_polygon_masses(&[1.0, 1.0], 4, 1.0);
        assert!(matches!(
            init_rotating(&build_positions(&stack), &m, 3.0),
            Err(Error::Unsupported(_))
        ));
        let (cfg, m) = solved(4, vec![1.0], 3.0, 1.0);
        let s = init_rotating(&cfg, &m, 3.0).unwrap();
        assert!(integrate(&s, &m, 3.0, 0.0, 10, 1).is_err());
        assert!(integrate(&s, &m, 3.0, -1.0, 10, 1).is_err());
    }

    #[test]
    fn analytic_rotation_has_no_drift() {
        let (cfg, m) = solved(4, vec![1.0, 2.0], 3.0, 1.0);
        let s0 = init_rotating(&cfg, &m, 3.0).unwrap();
        let samples = (0..50)
            .map(|k| {
                let th = 0.1 * k as f64;
                let (c, s) = (th.cos(), th.sin());
                let rot = |p: &[f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
                SimState {
                    positions: s0.positions.iter().map(rot).collect(),
                    velocities: s0.velocities.iter().map(rot).collect(),
                    time: th,
                }
            })
            .collect();
        let traj = Trajectory {
            samples,
            dt: 0.1,
            steps: 49,
            stride: 1,
        };
        let rep = drift_report(&traj, &m, 3.0).unwrap();
        assert!(rep.max_relative_distance_drift < 1e-14);
        assert!(rep.conserved_quantity_drift < 1e-14);
        assert!(rep.rotation_deviation < 1e-14);
    }

    #[test]
    fn vortex_stack_rotates_rigidly() {
        let (cfg, m) = solved(4, vec![1.0, 2.0], 2.0, 1.0);
        let s = init_rotating(&cfg, &m, 2.0).unwrap();
        let period = rotation_period(1.0, 2.0);
        let traj = integrate(&s, &m, 2.0, period / 2000.0, 2000, 100).unwrap();
        let rep = drift_report(&traj, &m, 2.0).unwrap();
        assert!(rep.max_relative_distance_drift < 1e-8);
        assert!(rep.conserved_quantity_drift < 1e-8);
        // one full turn at Ω = ν² brings every vortex back
        let last = traj.samples.last().unwrap();
        for (p, q) in last.positions.iter().zip(&s.positions) {
            assert!((p[0] - q[0]).abs() < 1e-7 && (p[1] - q[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        for a in [3.0, 2.0] {
            let (cfg, m) = solved(4, vec![1.0, 2.0], a, 1.0);
            let s = init_rotating(&cfg, &m, a).unwrap();
            let period = rotation_period(1.0, a);
            let dev = |steps: usize| {
                let t = integrate(&s, &m, a, 2.0 * period / steps as f64, steps, 1).unwrap();
                drift_report(&t, &m, a).unwrap().rotation_deviation
            };
            let ratio = dev(200) / dev(400);
            assert!((8.0..=32.0).contains(&ratio), "a={a} ratio {ratio}");
        }
    }

    #[test]
    fn perturbed_masses_deform() {
        let (cfg, m) = solved(4, vec![1.0, 2.0], 3.0, 1.0);
        let s = init_rotating(&cfg, &m, 3.0).unwrap();
        let mut pert = m.clone();
        for (k, x) in pert.masses.iter_mut().enumerate() {
            *x *= 1.0 + 0.05 * if k % 3 == 0 { 1.0 } else { -1.0 };
        }
        let period = rotation_period(1.0, 3.0);
        let traj = integrate(&s, &pert, 3.0, period / 2000.0, 2000, 10).unwrap();
        let rep = drift_report(&traj, &pert, 3.0).unwrap();
        assert!(rep.max_relative_distance_drift > 1e-3);
    }

    #[test]
    fn center_stays_at_origin() {
        let (cfg, m) = solved(5, vec![1.0, 2.5], 3.0, 1.0);
        let s = init_rotating(&cfg, &m, 3.0).unwrap();
        let traj = integrate(&s, &m, 3.0, 1e-3, 3000, 3000).unwrap();
        let last = traj.samples.last().unwrap();
        let total = m.total_mass();
        for c in 0..2 {
            let g: f64 = last
                .positions
                .iter()
                .zip(&m.masses)
                .map(|(q, mi)| mi * q[c])
                .sum::<f64>()
                / total;
            assert!(g.abs() < 1e-10);
        }
    }

    #[test]
    fn collision_guard_trips() {
        // massless bodies drift into each other and meet exactly at t = 1
        let state = SimState {
            positions: vec![[1.0, 0.0], [-1.0, 0.0]],
            velocities: vec![[-1.0, 0.0], [1.0, 0.0]],
            time: 0.0,
        };
        let m = MassAssignment::new(vec![0.0, 0.0], 0.0);
        let err = integrate(&state, &m, 3.0, 0.25, 8, 1).unwrap_err();
        assert_eq!(
            err,
            Error::Collision {
                time: 1.0,
                i: 0,
                j: 1
            }
        );
        assert!(matches!(err, Error::Collision { .. }));
    }
}
