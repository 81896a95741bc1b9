//! Winding numbers of pairs of flow lines.

use crate::error::{Error, Result};
use crate::flow::{Flow, FlowConfig, Trajectory};
use crate::geometry::{AngleLift, Point2, Vec2};
use crate::hamiltonian::HamiltonianSpec;
use crate::scalar::Scalar;

/// Pairs closer than this are refused.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Bisection depth limit for a single base step.
pub const MAX_REFINEMENT_LEVELS: usize = 20;

/// Per-iterate tolerance of the Birkhoff-sum cross-check.
pub const ITERATE_CROSS_CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult<T> {
    /// Turns, i.e. total angle / 2π.
    pub value: T,
    pub min_separation: T,
    pub substeps_used: usize,
}

/// Adaptive bisection of base steps on dense output.
///
/// A piece is accepted once the vector turns by less than π/2 across it,
/// which keeps every angle update away from the branch cut.
pub(crate) struct StepWalker<T> {
    pub min_separation: T,
    pub substeps: usize,
}

impl<T: Scalar> StepWalker<T> {
    pub fn new() -> Self {
        Self {
            min_separation: T::infinity(),
            substeps: 0,
        }
    }

    /// Records a separation and fails below [`MIN_SEPARATION`].
    #[inline]
    pub fn observe(&mut self, separation: T, time: T) -> Result<()> {
        if separation < self.min_separation {
            self.min_separation = separation;
        }
        if !(separation >= T::of(MIN_SEPARATION)) {
            return Err(Error::SeparationUnderflow {
                time: time.as_f64(),
                separation: separation.as_f64(),
            });
        }
        Ok(())
    }

    /// Splits the step `[t, t + dt]` with end vectors `a`, `b` until every
    /// piece turns by less than π/2, calling `visit(θa, va, θb, vb)` on the
    /// pieces in order. `eval(θ)` returns the vector and the separation at
    /// step fraction `θ`.
    #[inline]
    pub fn step<E, V>(&mut self, t: T, dt: T, a: Vec2<T>, b: Vec2<T>, eval: &E, visit: &mut V) -> Result<()>
    where
        E: Fn(T) -> (Vec2<T>, T),
        V: FnMut(T, Vec2<T>, T, Vec2<T>) -> Result<()>,
    {
        if a.dot(b) > T::zero() {
            return visit(T::zero(), a, T::one(), b);
        }
        self.bisect(t, dt, T::zero(), a, T::one(), b, 1, eval, visit)
    }

    #[allow(clippy::too_many_arguments)]
    fn bisect<E, V>(
        &mut self,
        t: T,
        dt: T,
        ta: T,
        a: Vec2<T>,
        tb: T,
        b: Vec2<T>,
        level: usize,
        eval: &E,
        visit: &mut V,
    ) -> Result<()>
    where
        E: Fn(T) -> (Vec2<T>, T),
        V: FnMut(T, Vec2<T>, T, Vec2<T>) -> Result<()>,
    {
        if a.dot(b) > T::zero() {
            return visit(ta, a, tb, b);
        }
        if level > MAX_REFINEMENT_LEVELS {
            return Err(Error::SubstepLimit {
                time: (t + dt * ta).as_f64(),
                levels: MAX_REFINEMENT_LEVELS as u32,
            });
        }
        let tm = (ta + tb) * T::of(0.5);
        let (m, sep) = eval(tm);
        self.substeps += 1;
        self.observe(sep, t + dt * tm)?;
        self.bisect(t, dt, ta, a, tm, m, level + 1, eval, visit)?;
        self.bisect(t, dt, tm, m, tb, b, level + 1, eval, visit)
    }
}

pub(crate) fn check_aligned<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<()> {
    if a.len() != b.len() || a.t0() != b.t0() || a.dt() != b.dt() {
        return Err(Error::InvalidArgument("trajectories are not on a shared grid".into()));
    }
    if !a.has_velocities() || !b.has_velocities() {
        return Err(Error::MissingVelocities);
    }
    Ok(())
}

/// Winding of `ty - tx` over the whole span, plus the cumulative winding
/// at every multiple of `every` nodes (when given).
pub fn winding_with_prefixes<T: Scalar>(
    tx: &Trajectory<T>,
    ty: &Trajectory<T>,
    every: Option<usize>,
) -> Result<(WindingResult<T>, Vec<T>)> {
    check_aligned(tx, ty)?;
    let mut walker = StepWalker::new();
    let mut d = ty.point(0) - tx.point(0);
    walker.observe(d.norm(), tx.t0())?;
    let mut lift = AngleLift::new(d);
    let mut prefixes = Vec::new();
    let two_pi = T::two_pi();
    let dt = tx.dt();
    for j in 0..tx.n_steps() {
        let next = ty.point(j + 1) - tx.point(j + 1);
        let t = tx.time(j);
        walker.observe(next.norm(), t + dt)?;
        let eval = |theta: T| {
            let v = ty.dense(j, theta).0 - tx.dense(j, theta).0;
            (v, v.norm())
        };
        walker.step(t, dt, d, next, &eval, &mut |_, _, _, b| {
            lift.push(b);
            Ok(())
        })?;
        d = next;
        if let Some(k) = every {
            if (j + 1) % k == 0 {
                prefixes.push(lift.total() / two_pi);
            }
        }
    }
    Ok((
        WindingResult {
            value: lift.total() / two_pi,
            min_separation: walker.min_separation,
            substeps_used: walker.substeps,
        },
        prefixes,
    ))
}

/// Winding of `ty - tx` over the whole shared span.
pub fn winding_between<T: Scalar>(tx: &Trajectory<T>, ty: &Trajectory<T>) -> Result<WindingResult<T>> {
    Ok(winding_with_prefixes(tx, ty, None)?.0)
}

fn distinct<T: Scalar>(x: Point2<T>, y: Point2<T>) -> Result<()> {
    let sep = (y - x).norm();
    if !(sep >= T::of(MIN_SEPARATION)) {
        return Err(Error::SeparationUnderflow {
            time: 0.0,
            separation: sep.as_f64(),
        });
    }
    Ok(())
}

/// `W_φ(x, y)`.
pub fn winding<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    y: Point2<T>,
    cfg: &FlowConfig,
) -> Result<WindingResult<T>> {
    distinct(x, y)?;
    let flow = Flow::new(spec, cfg)?;
    let n = flow.steps_per_unit_time();
    winding_between(&flow.advance_steps(x, 0, n)?, &flow.advance_steps(y, 0, n)?)
}

/// `W_{φⁿ}(x, y)` over the concatenated isotopy, cross-checked against the
/// sum of one-period windings along the orbit recomputed at twice the
/// resolution.
pub fn winding_iterate<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    y: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<WindingResult<T>> {
    Ok(winding_iterate_with_prefixes(spec, x, y, n, cfg)?.0)
}

/// As [`winding_iterate`], also returning `W_{φʲ}(x, y)` for `j = 1..=n`.
pub fn winding_iterate_with_prefixes<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    y: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<(WindingResult<T>, Vec<T>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("winding_iterate needs n >= 1".into()));
    }
    distinct(x, y)?;
    let flow = Flow::new(spec, cfg)?;
    let steps = flow.steps_per_unit_time();
    let tx = flow.advance_steps(x, 0, n * steps)?;
    let ty = flow.advance_steps(y, 0, n * steps)?;
    let (result, prefixes) = winding_with_prefixes(&tx, &ty, Some(steps))?;

    let fine_cfg = cfg.refined();
    let fine = Flow::new(spec, &fine_cfg)?;
    let fs = fine.steps_per_unit_time();
    let mut sum = T::zero();
    for j in 0..n {
        let a = fine.advance_steps(tx.point(j * steps), 0, fs)?;
        let b = fine.advance_steps(ty.point(j * steps), 0, fs)?;
        sum = sum + winding_between(&a, &b)?.value;
    }
    let gap = (sum - result.value).abs().as_f64();
    let tolerance = n as f64 * ITERATE_CROSS_CHECK_TOL;
    if gap > tolerance {
        return Err(Error::CrossCheckFailed {
            what: "iterated winding",
            gap,
            tolerance,
        });
    }
    Ok((result, prefixes))
}

/// Where the ray from `x` in direction `dir` (unit) leaves the disk.
#[inline]
pub fn boundary_projection<T: Scalar>(x: Point2<T>, dir: Vec2<T>) -> Point2<T> {
    let b = x.dot(dir);
    let c = T::one() - x.norm_sq();
    let disc = (b * b + c).max(T::zero());
    // stable root of s² + 2bs - c = 0 with s > 0
    let s = if b <= T::zero() {
        -b + disc.sqrt()
    } else {
        c / (b + disc.sqrt())
    };
    x + dir.scale(s)
}

/// Winding of the boundary point hit by the ray from `φᵗ(x)` through
/// `φᵗ(y)`, on a shared pair of trajectories.
pub fn boundary_winding_between<T: Scalar>(tx: &Trajectory<T>, ty: &Trajectory<T>) -> Result<WindingResult<T>> {
    check_aligned(tx, ty)?;
    let project = |p: Point2<T>, q: Point2<T>| {
        let d = q - p;
        let sep = d.norm();
        (boundary_projection(p, d.scale(T::one() / sep)), sep)
    };
    let mut walker = StepWalker::new();
    let (mut b, sep) = project(tx.point(0), ty.point(0));
    walker.observe(sep, tx.t0())?;
    if !(tx.point(0).norm() < T::one()) {
        return Err(Error::InvalidArgument("boundary winding needs an interior x".into()));
    }
    let mut lift = AngleLift::new(b);
    let dt = tx.dt();
    for j in 0..tx.n_steps() {
        let t = tx.time(j);
        let (next, sep) = project(tx.point(j + 1), ty.point(j + 1));
        walker.observe(sep, t + dt)?;
        let eval = |theta: T| project(tx.dense(j, theta).0, ty.dense(j, theta).0);
        walker.step(t, dt, b, next, &eval, &mut |_, _, _, v| {
            lift.push(v);
            Ok(())
        })?;
        b = next;
    }
    Ok(WindingResult {
        value: lift.total() / T::two_pi(),
        min_separation: walker.min_separation,
        substeps_used: walker.substeps,
    })
}

/// `w_φ(x, y)`: winding of the radial projection of `φᵗ(y)` from `φᵗ(x)`
/// onto the boundary circle.
pub fn boundary_winding<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    y: Point2<T>,
    cfg: &FlowConfig,
) -> Result<T> {
    distinct(x, y)?;
    if !(x.norm() < T::one()) {
        return Err(Error::InvalidArgument("boundary winding needs an interior x".into()));
    }
    let flow = Flow::new(spec, cfg)?;
    let n = flow.steps_per_unit_time();
    Ok(boundary_winding_between(&flow.advance_steps(x, 0, n)?, &flow.advance_steps(y, 0, n)?)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::TimeProfile;
    use std::f64::consts::PI;

    type P = Point2<f64>;

    fn radial(a: f64) -> HamiltonianSpec<f64> {
        HamiltonianSpec::radial(vec![1.0], a)
    }

    fn perturbed() -> HamiltonianSpec<f64> {
        radial(1.0).plus(HamiltonianSpec::perturbation(2, TimeProfile::Cos, 0.1))
    }

    /// `-h'(r²)/π` for `h = A(1-s)²`.
    fn center_winding(a: f64, r: f64) -> f64 {
        2.0 * a * (1.0 - r * r) / PI
    }

    /// Brute-force oracle: atan2 unwrapping at a fine uniform sampling of the
    /// exact rotation flow.
    fn rotation_oracle(a: f64, x: P, y: P, samples: usize) -> f64 {
        let rot = |p: P, t: f64| {
            let r = p.norm();
            let w = 4.0 * a * (1.0 - r * r);
            P::polar(r, p.arg() + w * t)
        };
        let mut prev = rot(y, 0.0) - rot(x, 0.0);
        let mut total = 0.0;
        for i in 1..=samples {
            let t = i as f64 / samples as f64;
            let d = rot(y, t) - rot(x, t);
            let mut inc = d.arg() - prev.arg();
            while inc > PI {
                inc -= 2.0 * PI;
            }
            while inc <= -PI {
                inc += 2.0 * PI;
            }
            total += inc;
            prev = d;
        }
        total / (2.0 * PI)
    }

    #[test]
    fn trivial_winding_is_zero() {
        let w = winding(&HamiltonianSpec::trivial(), P::new(0.1, 0.2), P::new(-0.3, 0.4), &FlowConfig::default())
            .unwrap();
        assert_eq!(w.value, 0.0);
        assert_eq!(w.substeps_used, 0);
    }

    #[test]
    fn center_winding_closed_form() {
        let cfg = FlowConfig::default();
        for a in [0.5, 1.0, 2.0] {
            for k in 1..10 {
                let r = 0.1 * k as f64;
                let y = P::polar(r, k as f64);
                let w = winding(&radial(a), P::zero(), y, &cfg).unwrap();
                assert!((w.value - center_winding(a, r)).abs() < 1e-8, "a={a} r={r}");
            }
        }
    }

    #[test]
    fn radial_pairs_match_dense_sampling_and_bound() {
        let cfg = FlowConfig::default();
        let a = 2.0;
        let bound = 4.0 * a / (2.0 * PI);
        for k in 0..12 {
            let x = P::polar(0.05 + 0.07 * k as f64, 0.3 * k as f64);
            let y = P::polar(0.1 + 0.075 * k as f64, 2.0 + 0.9 * k as f64);
            let w = winding(&radial(a), x, y, &cfg).unwrap();
            let oracle = rotation_oracle(a, x, y, 100_000);
            assert!((w.value - oracle).abs() < 1e-6, "k={k}: {} vs {oracle}", w.value);
            assert!(w.value.abs() <= bound + 1e-9);
        }
    }

    #[test]
    fn symmetry_and_additivity() {
        let cfg = FlowConfig::default();
        let h = perturbed();
        let flow = Flow::new(&h, &cfg).unwrap();
        for k in 0..10 {
            let x = P::polar(0.08 * k as f64, 0.5 * k as f64);
            let y = P::polar(0.9 - 0.07 * k as f64, 1.0 + 1.3 * k as f64);
            let a = winding(&h, x, y, &cfg).unwrap().value;
            let b = winding(&h, y, x, &cfg).unwrap().value;
            assert!((a - b).abs() < 1e-9);

            let tx = flow.advance_steps(x, 0, 1024).unwrap();
            let ty = flow.advance_steps(y, 0, 1024).unwrap();
            let two = winding_between(&tx, &ty).unwrap().value;
            let second = winding(&h, tx.point(512), ty.point(512), &cfg).unwrap().value;
            assert!((two - a - second).abs() < 1e-8);
        }
    }

    #[test]
    fn iterated_winding() {
        let cfg = FlowConfig::default();
        let h = perturbed();
        let x = P::new(0.2, -0.1);
        let y = P::new(-0.5, 0.3);
        let one = winding(&h, x, y, &cfg).unwrap().value;
        assert!((winding_iterate(&h, x, y, 1, &cfg).unwrap().value - one).abs() < 1e-12);
        let (w, prefixes) = winding_iterate_with_prefixes(&h, x, y, 6, &cfg).unwrap();
        assert_eq!(prefixes.len(), 6);
        assert_eq!(*prefixes.last().unwrap(), w.value);
        for n in [1, 4, 9] {
            let r = 0.55;
            let w = winding_iterate(&radial(1.0), P::zero(), P::new(0.0, r), n, &cfg).unwrap();
            assert!((w.value - n as f64 * center_winding(1.0, r)).abs() < n as f64 * 1e-8);
            let z = winding_iterate(&HamiltonianSpec::trivial(), x, y, n, &cfg).unwrap();
            assert_eq!(z.value, 0.0);
        }
    }

    #[test]
    fn refinement_resolves_half_turn_steps() {
        // a unit circle sampled every half turn: only dense output can tell
        // which way the difference vector went
        let tau = 2.0 * PI;
        let pts = vec![P::new(1.0, 0.0), P::new(-1.0, 0.0), P::new(1.0, 0.0)];
        let vel = vec![P::new(0.0, tau), P::new(0.0, -tau), P::new(0.0, tau)];
        let ty = Trajectory::from_samples(0.0, 0.5, pts, Some(vel)).unwrap();
        let tx = Trajectory::from_samples(0.0, 0.5, vec![P::zero(); 3], Some(vec![P::zero(); 3])).unwrap();
        let w = winding_between(&tx, &ty).unwrap();
        assert!((w.value - 1.0).abs() < 1e-15);
        assert!(w.substeps_used >= 2);
        let back = winding_between(&ty, &tx).unwrap();
        assert!((back.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_are_refused() {
        let cfg = FlowConfig::default();
        let p = P::new(0.3, 0.3);
        assert!(matches!(winding(&perturbed(), p, p, &cfg), Err(Error::SeparationUnderflow { .. })));
    }

    #[test]
    fn boundary_projection_lands_on_circle() {
        for k in 0..50 {
            let x = P::polar(0.019 * k as f64, 0.4 * k as f64);
            let dir = P::polar(1.0, 1.1 * k as f64);
            let b = boundary_projection(x, dir);
            assert!((b.norm() - 1.0).abs() < 1e-14);
            assert!((b - x).dot(dir) > 0.0);
        }
    }

    #[test]
    fn boundary_winding_properties() {
        let cfg = FlowConfig::default();
        for a in [0.5, 2.0] {
            let y = P::new(0.3, 0.4);
            let w = boundary_winding(&radial(a), P::zero(), y, &cfg).unwrap();
            assert!((w - center_winding(a, 0.5)).abs() < 1e-8);
        }
        assert_eq!(
            boundary_winding(&HamiltonianSpec::trivial(), P::new(0.1, 0.0), P::new(0.0, 0.5), &cfg).unwrap(),
            0.0
        );
        let h = perturbed();
        for k in 0..20 {
            let x = P::polar(0.045 * k as f64, 0.77 * k as f64);
            let y = P::polar(0.95 - 0.04 * k as f64, 2.0 * k as f64 + 0.4);
            let w = boundary_winding(&h, x, y, &cfg).unwrap();
            let big_w = winding(&h, x, y, &cfg).unwrap().value;
            assert!((w - big_w).abs() <= 0.5);
        }
    }
}
