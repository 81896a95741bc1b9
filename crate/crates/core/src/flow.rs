//! Fixed-step RK4 integration of the non-autonomous Hamiltonian flow.

use crate::error::{Error, Result};
use crate::geometry::{Point2, Vec2};
use crate::hamiltonian::HamiltonianSpec;
use crate::scalar::Scalar;

/// Points with `|z| >= 1 - SUPPORT_SLACK` are treated as boundary points and
/// never move.
pub const SUPPORT_SLACK: f64 = 1e-12;

/// Radius beyond which a node counts as having left the disk.
pub const ESCAPE_RADIUS: f64 = 1.0 + 1e-9;

pub const DEFAULT_STEPS_PER_UNIT_TIME: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    CubicHermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowConfig {
    pub steps_per_unit_time: usize,
    pub integrator: Integrator,
    pub interpolation: Interpolation,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self::with_steps(DEFAULT_STEPS_PER_UNIT_TIME)
    }
}

impl FlowConfig {
    pub fn with_steps(steps_per_unit_time: usize) -> Self {
        Self {
            steps_per_unit_time,
            integrator: Integrator::Rk4,
            interpolation: Interpolation::CubicHermite,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.steps_per_unit_time;
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "steps_per_unit_time must be even and >= 16, got {n}"
            )));
        }
        Ok(())
    }

    /// The same configuration at twice the resolution.
    pub fn refined(&self) -> Self {
        Self::with_steps(self.steps_per_unit_time * 2)
    }
}

/// A flow line sampled on a uniform time grid.
///
/// `velocities[j]` is the right-hand limit of the vector field at node `j`
/// and `left_velocities[j]` the left-hand limit; they differ only where the
/// Hamiltonian jumps in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    t0: T,
    dt: T,
    points: Vec<Point2<T>>,
    velocities: Vec<Vec2<T>>,
    left_velocities: Vec<Vec2<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Builds a trajectory from externally computed samples.
    ///
    /// Without velocities the trajectory supports geometric queries only.
    pub fn from_samples(
        t0: T,
        dt: T,
        points: Vec<Point2<T>>,
        velocities: Option<Vec<Vec2<T>>>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("trajectory needs at least one node".into()));
        }
        let velocities = velocities.unwrap_or_default();
        if !velocities.is_empty() && velocities.len() != points.len() {
            return Err(Error::InvalidArgument(
                "velocity count must match node count".into(),
            ));
        }
        Ok(Self {
            t0,
            dt,
            points,
            left_velocities: velocities.clone(),
            velocities,
        })
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn t1(&self) -> T {
        self.time(self.n_steps())
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn time(&self, j: usize) -> T {
        self.t0 + self.dt * T::of_usize(j)
    }

    #[inline]
    pub fn point(&self, j: usize) -> Point2<T> {
        self.points[j]
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn start(&self) -> Point2<T> {
        self.points[0]
    }

    pub fn end(&self) -> Point2<T> {
        self.points[self.points.len() - 1]
    }

    pub fn has_velocities(&self) -> bool {
        !self.velocities.is_empty()
    }

    pub fn velocities(&self) -> &[Vec2<T>] {
        &self.velocities
    }

    pub fn left_velocities(&self) -> &[Vec2<T>] {
        &self.left_velocities
    }

    #[inline]
    pub fn velocity(&self, j: usize) -> Vec2<T> {
        self.velocities[j]
    }

    #[inline]
    pub fn left_velocity(&self, j: usize) -> Vec2<T> {
        self.left_velocities[j]
    }

    /// Cubic Hermite interpolant on step `j` at fraction `theta ∈ [0, 1]`;
    /// returns position and velocity. Requires velocity data.
    #[inline]
    pub fn dense(&self, j: usize, theta: T) -> (Point2<T>, Vec2<T>) {
        let p0 = self.points[j];
        let p1 = self.points[j + 1];
        let v0 = self.velocities[j];
        let v1 = self.left_velocities[j + 1];
        let h = self.dt;
        let t = theta;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        let p = p0.scale(h00) + v0.scale(h10 * h) + p1.scale(h01) + v1.scale(h11 * h);
        let six = T::of(6.0);
        let dp = (p1 - p0).scale((six * t - six * t2) / h)
            + v0.scale(three * t2 - T::of(4.0) * t + T::one())
            + v1.scale(three * t2 - two * t);
        (p, dp)
    }

    /// Position at time `t` by dense output (linear if no velocities).
    pub fn at_time(&self, t: T) -> Result<Point2<T>> {
        let rel = (t - self.t0) / self.dt;
        let n = self.n_steps();
        if !(rel >= T::zero() && rel <= T::of_usize(n)) {
            return Err(Error::InvalidArgument(format!(
                "time {} outside trajectory span",
                t.as_f64()
            )));
        }
        if n == 0 {
            return Ok(self.points[0]);
        }
        let j = rel.floor().to_usize().unwrap_or(0).min(n - 1);
        let theta = rel - T::of_usize(j);
        if self.has_velocities() {
            Ok(self.dense(j, theta).0)
        } else {
            Ok(self.points[j].lerp(self.points[j + 1], theta))
        }
    }
}

/// An integrator bound to one Hamiltonian and one resolution.
#[derive(Debug, Clone)]
pub struct Flow<'a, T> {
    spec: &'a HamiltonianSpec<T>,
    steps: usize,
    dt: T,
    jump_at_phase: Vec<bool>,
}

impl<'a, T: Scalar> Flow<'a, T> {
    pub fn new(spec: &'a HamiltonianSpec<T>, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let steps = cfg.steps_per_unit_time;
        let mut jump_at_phase = vec![false; steps];
        for phase in spec.breakpoints() {
            let idx = phase * steps as f64;
            let rounded = idx.round();
            if (idx - rounded).abs() > 1e-9 || (rounded as usize) % 2 != 0 {
                return Err(Error::MisalignedBreakpoint { phase });
            }
            jump_at_phase[rounded as usize % steps] = true;
        }
        Ok(Self {
            spec,
            steps,
            dt: T::one() / T::of_usize(steps),
            jump_at_phase,
        })
    }

    pub fn spec(&self) -> &HamiltonianSpec<T> {
        self.spec
    }

    pub fn steps_per_unit_time(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Grid index of time `t`, or `OffGrid`.
    pub fn grid_index(&self, t: T) -> Result<usize> {
        let idx = t.as_f64() * self.steps as f64;
        let rounded = idx.round();
        if rounded < 0.0 || (idx - rounded).abs() > 1e-9 {
            return Err(Error::OffGrid {
                time: t.as_f64(),
                steps_per_unit: self.steps,
            });
        }
        Ok(rounded as usize)
    }

    #[inline]
    fn grid_time(&self, index: usize) -> T {
        T::of_usize(index) / T::of_usize(self.steps)
    }

    /// Vector field at a step-interior anchor.
    #[inline]
    pub fn field(&self, z: Point2<T>, t: T, anchor: T) -> Vec2<T> {
        self.spec.x_at(z, t, anchor)
    }

    /// Integrates from `z` at grid time `t0` to grid time `t1`.
    pub fn advance(&self, z: Point2<T>, t0: T, t1: T) -> Result<Trajectory<T>> {
        let i0 = self.grid_index(t0)?;
        let i1 = self.grid_index(t1)?;
        if i1 <= i0 {
            return Err(Error::InvalidArgument("advance requires t1 > t0".into()));
        }
        self.advance_steps(z, i0, i1 - i0)
    }

    /// Integrates `n_steps` steps starting at grid node `start`.
    pub fn advance_steps(&self, z: Point2<T>, start: usize, n_steps: usize) -> Result<Trajectory<T>> {
        let t0 = self.grid_time(start);
        if z.norm() >= T::one() - T::of(SUPPORT_SLACK) {
            return Ok(Trajectory {
                t0,
                dt: self.dt,
                points: vec![z; n_steps + 1],
                velocities: vec![Vec2::zero(); n_steps + 1],
                left_velocities: vec![Vec2::zero(); n_steps + 1],
            });
        }
        let dt = self.dt;
        let half = dt * T::of(0.5);
        let sixth = dt / T::of(6.0);
        let two = T::of(2.0);
        let escape = T::of(ESCAPE_RADIUS * ESCAPE_RADIUS);

        let mut points = Vec::with_capacity(n_steps + 1);
        let mut velocities = Vec::with_capacity(n_steps + 1);
        let mut left_velocities = Vec::with_capacity(n_steps + 1);

        let mut z = z;
        let mut k1 = self.field(z, t0, t0 + half);
        points.push(z);
        velocities.push(k1);
        left_velocities.push(k1);

        for j in 0..n_steps {
            let t = self.grid_time(start + j);
            let anchor = t + half;
            let k2 = self.field(z + k1.scale(half), anchor, anchor);
            let k3 = self.field(z + k2.scale(half), anchor, anchor);
            let k4 = self.field(z + k3.scale(dt), t + dt, anchor);
            z = z + (k1 + (k2 + k3).scale(two) + k4).scale(sixth);
            let t_next = self.grid_time(start + j + 1);
            if !(z.norm_sq() <= escape) {
                return Err(Error::EscapedDisk {
                    time: t_next.as_f64(),
                    radius: z.norm().as_f64(),
                });
            }
            let last = j + 1 == n_steps;
            let next = if last {
                self.field(z, t_next, anchor)
            } else {
                self.field(z, t_next, t_next + half)
            };
            let left = if !last && self.jump_at_phase[(start + j + 1) % self.steps] {
                self.field(z, t_next, anchor)
            } else {
                next
            };
            points.push(z);
            velocities.push(next);
            left_velocities.push(left);
            k1 = next;
        }
        Ok(Trajectory {
            t0,
            dt,
            points,
            velocities,
            left_velocities,
        })
    }

    /// Whether grid node `index` sits on a time discontinuity of `H`.
    pub fn jumps_at(&self, index: usize) -> bool {
        self.jump_at_phase[index % self.steps]
    }

    /// `H` at node `j` of `traj`, as (left limit, right limit).
    pub fn hamiltonian_at_node(&self, traj: &Trajectory<T>, j: usize) -> (T, T) {
        let t = traj.time(j);
        let half = self.dt * T::of(0.5);
        let z = traj.point(j);
        let right = self.spec.h_at(z, t, t + half);
        let index = self.grid_index(t).unwrap_or(0);
        if j > 0 && self.jumps_at(index) {
            (self.spec.h_at(z, t, t - half), right)
        } else {
            (right, right)
        }
    }
}

/// `φ^t(z)` for `t ∈ [t0, t1]`.
pub fn advance<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    z: Point2<T>,
    t0: T,
    t1: T,
    cfg: &FlowConfig,
) -> Result<Trajectory<T>> {
    Flow::new(spec, cfg)?.advance(z, t0, t1)
}

/// The orbit `φ⁰(z), …, φⁿ(z)` of the time-one map.
pub fn iterate_map<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    z: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<Vec<Point2<T>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("iterate_map needs n >= 1".into()));
    }
    let flow = Flow::new(spec, cfg)?;
    let traj = flow.advance_steps(z, 0, n * flow.steps_per_unit_time())?;
    Ok((0..=n)
        .map(|k| traj.point(k * flow.steps_per_unit_time()))
        .collect())
}

/// Determinant of the central finite-difference Jacobian of the time-one map.
pub fn jacobian_determinant<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    z: Point2<T>,
    cfg: &FlowConfig,
    h_fd: T,
) -> Result<T> {
    let h = h_fd.as_f64();
    if !(1e-7..=1e-4).contains(&h) {
        return Err(Error::InvalidArgument(format!("h_fd {h} outside [1e-7, 1e-4]")));
    }
    let flow = Flow::new(spec, cfg)?;
    let one = |p: Point2<T>| -> Result<Point2<T>> {
        Ok(flow.advance_steps(p, 0, flow.steps_per_unit_time())?.end())
    };
    let ex = Vec2::new(h_fd, T::zero());
    let ey = Vec2::new(T::zero(), h_fd);
    let inv = T::one() / (h_fd + h_fd);
    let cx = (one(z + ex)? - one(z - ex)?).scale(inv);
    let cy = (one(z + ey)? - one(z - ey)?).scale(inv);
    Ok(cx.x * cy.y - cy.x * cx.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::TimeProfile;

    type P = Point2<f64>;

    fn radial(a: f64) -> HamiltonianSpec<f64> {
        HamiltonianSpec::radial(vec![1.0], a)
    }

    fn perturbed() -> HamiltonianSpec<f64> {
        radial(1.0).plus(HamiltonianSpec::perturbation(2, TimeProfile::Cos, 0.1))
    }

    #[test]
    fn trivial_flow_is_constant() {
        let h = HamiltonianSpec::<f64>::trivial();
        let z = P::new(0.3, -0.4);
        let tr = advance(&h, z, 0.0, 1.0, &FlowConfig::default()).unwrap();
        assert!(tr.points().iter().all(|&p| p == z));
    }

    #[test]
    fn radial_flow_is_rotation() {
        // h = A(1-s)², ω = -2h'(r²) = 4A(1 - r²)
        for a in [0.5, 1.0, 2.0] {
            let h = radial(a);
            for r in [0.1, 0.45, 0.8, 0.97] {
                let tr = advance(&h, P::new(r, 0.0), 0.0, 1.0, &FlowConfig::default()).unwrap();
                let alpha = 4.0 * a * (1.0 - r * r);
                let expected = P::polar(r, alpha);
                let tol = if a < 2.0 { 1e-9 } else { 1e-8 };
                assert!((tr.end() - expected).norm() < tol, "a={a} r={r}");
                assert!(tr.points().iter().all(|p| (p.norm() - r).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn boundary_points_are_fixed() {
        let h = perturbed();
        for k in 0..20 {
            let z = P::polar(1.0, 0.31 * k as f64);
            let tr = advance(&h, z, 0.0, 1.0, &FlowConfig::default()).unwrap();
            assert_eq!(tr.end(), z);
        }
    }

    #[test]
    fn flow_property_over_consecutive_periods() {
        let h = perturbed();
        let cfg = FlowConfig::default();
        let flow = Flow::new(&h, &cfg).unwrap();
        let z = P::new(0.35, 0.2);
        let a = flow.advance(z, 0.0, 1.0).unwrap();
        let b = flow.advance(a.end(), 1.0, 2.0).unwrap();
        let c = flow.advance(z, 0.0, 2.0).unwrap();
        assert!((b.end() - c.end()).norm() < 1e-9);
    }

    #[test]
    fn periodic_orbit_of_rational_rotation() {
        // ω(r) = 4(1 - r²) = 2π/5
        let h = radial(1.0);
        let r = (1.0 - std::f64::consts::TAU / 5.0 / 4.0f64).sqrt();
        let z = P::new(r, 0.0);
        let orbit = iterate_map(&h, z, 5, &FlowConfig::default()).unwrap();
        assert_eq!(orbit.len(), 6);
        assert!((orbit[5] - z).norm() < 1e-7);
        assert!(orbit.iter().all(|p| (p.norm() - r).abs() < 1e-9));
    }

    #[test]
    fn velocities_are_field_evaluations() {
        let h = perturbed();
        let tr = advance(&h, P::new(0.2, 0.5), 0.0, 1.0, &FlowConfig::default()).unwrap();
        for j in (0..tr.len()).step_by(37) {
            assert_eq!(tr.velocity(j), h.eval_x(tr.point(j), tr.time(j)));
        }
    }

    #[test]
    fn dense_output_interpolates_nodes_and_is_accurate() {
        let h = radial(1.0);
        let r = 0.6;
        let tr = advance(&h, P::new(r, 0.0), 0.0, 1.0, &FlowConfig::with_steps(64)).unwrap();
        let omega = 4.0 * (1.0 - r * r);
        for j in [0, 10, 63] {
            assert_eq!(tr.dense(j, 0.0).0, tr.point(j));
            assert!((tr.dense(j, 1.0).0 - tr.point(j + 1)).norm() < 1e-15);
            let t = tr.time(j) + 0.37 * tr.dt();
            let (p, v) = tr.dense(j, 0.37);
            // RK4 node error plus the h⁴ r ω⁴ / 384 Hermite bound
            let node_err = (tr.point(j + 1) - P::polar(r, omega * tr.time(j + 1))).norm();
            assert!((p - P::polar(r, omega * t)).norm() < node_err + 1e-8);
            assert!((v - h.eval_x(p, t)).norm() < 1e-5);
        }
    }

    #[test]
    fn concatenation_jump_is_resolved() {
        let h1 = radial(1.0);
        let h2 = radial(-0.5);
        let c = HamiltonianSpec::concat(h1.clone(), h2.clone());
        let cfg = FlowConfig::default();
        let z = P::new(0.5, 0.1);
        let one = advance(&c, z, 0.0, 1.0, &cfg).unwrap().end();
        let mid = advance(&h1, z, 0.0, 1.0, &cfg).unwrap().end();
        let two = advance(&h2, mid, 0.0, 1.0, &cfg).unwrap().end();
        assert!((one - two).norm() < 1e-9);
        let tr = advance(&c, z, 0.0, 1.0, &cfg).unwrap();
        assert_ne!(tr.velocity(256), tr.left_velocity(256));
    }

    #[test]
    fn jacobian_is_unimodular() {
        let cfg = FlowConfig::default();
        for (k, h) in [HamiltonianSpec::trivial(), radial(1.0), perturbed()].iter().enumerate() {
            for i in 0..10 {
                let z = P::polar(0.09 * i as f64, 0.7 * i as f64 + k as f64);
                let det = jacobian_determinant(h, z, &cfg, 1e-5).unwrap();
                assert!((det - 1.0).abs() < 1e-4, "det={det}");
            }
        }
        assert!(jacobian_determinant(&radial(1.0), P::zero(), &cfg, 1e-3).is_err());
    }

    #[test]
    fn fourth_order_convergence() {
        let h = perturbed();
        let z = P::new(0.3, 0.4);
        let end = |n: usize| advance(&h, z, 0.0, 1.0, &FlowConfig::with_steps(n)).unwrap().end();
        let reference = end(4096);
        let e1 = (end(64) - reference).norm();
        let e2 = (end(128) - reference).norm();
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn rejects_bad_configs() {
        let h = radial(1.0);
        assert!(Flow::new(&h, &FlowConfig::with_steps(8)).is_err());
        assert!(Flow::new(&h, &FlowConfig::with_steps(17)).is_err());
        let flow = Flow::new(&h, &FlowConfig::default()).unwrap();
        assert!(matches!(flow.advance(P::zero(), 0.0, 0.1), Err(Error::OffGrid { .. })));
        assert!(flow.advance(P::zero(), 1.0, 1.0).is_err());
        let nested = HamiltonianSpec::concat(HamiltonianSpec::concat(h.clone(), h.clone()), h.clone());
        assert!(Flow::new(&nested, &FlowConfig::with_steps(18)).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let h = HamiltonianSpec::<f32>::radial(vec![1.0], 1.0);
        let tr = advance(&h, Point2::new(0.5f32, 0.0), 0.0, 1.0, &FlowConfig::default()).unwrap();
        let expected = Point2::polar(0.5f32, 3.0);
        assert!((tr.end() - expected).norm() < 1e-4);
    }
}
