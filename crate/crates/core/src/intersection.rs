//! Signed intersections of the flow line of `y` with the ruled surface
//! swept by the segments from `φᵗ(x)` to a boundary anchor `e`.
//!
//! `φᵗ(y)` lies on the surface exactly when `φᵗ(y) − φᵗ(x)` is a positive
//! multiple of `e − φᵗ(x)`, so crossings are the passages of the relative
//! vector `q = (y − x)·conj(e − x)` over the positive real axis. A
//! counterclockwise passage is a positive crossing.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::{Flow, FlowConfig, Trajectory};
use crate::geometry::{positive_axis_passage, Point2, Vec2};
use crate::hamiltonian::HamiltonianSpec;
use crate::quadrature::{disk_quadrature, weighted_estimate, Estimate, QuadratureKind, QuadratureSpec};
use crate::scalar::Scalar;
use crate::winding::{check_aligned, StepWalker};

/// Minimum `|dθ/dt|` (rad per unit time) at an accepted crossing.
pub const TRANSVERSALITY_TOL: f64 = 1e-6;

/// Time resolution of located crossings.
pub const CROSSING_TIME_TOL: f64 = 1e-10;

/// Relative angle below which an endpoint counts as touching the surface's
/// boundary curves.
pub const ENDPOINT_GRAZE_TOL: f64 = 1e-9;

pub const MAX_ANCHOR_RETRIES: usize = 8;

/// Rotation of the anchor per retry, in radians.
pub const ANCHOR_ROTATION_STEP: f64 = 1e-4;

/// Samples closer than this to `x` contribute zero to the integral.
pub const DIAGONAL_TUBE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingEvent<T> {
    pub time: T,
    pub sign: i32,
    pub angle_rate: T,
    /// `|φᵗ(y) − φᵗ(x)| / |e − φᵗ(x)|` at the crossing.
    pub radial_fraction: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionResult<T> {
    pub value: i64,
    pub crossings: Vec<CrossingEvent<T>>,
    /// Smallest `|angle_rate|` over the crossings (infinite if none).
    pub min_angle_rate: T,
}

/// Angle of `yt − xt` measured from `e − xt`, in `(−π, π]`.
pub fn relative_angle<T: Scalar>(xt: Point2<T>, yt: Point2<T>, e: Point2<T>) -> Result<T> {
    let d = yt - xt;
    let u = e - xt;
    for v in [d, u] {
        let norm = v.norm();
        if !(norm.as_f64() >= crate::geometry::ZERO_NORM) {
            return Err(Error::ZeroVector { norm: norm.as_f64() });
        }
    }
    Ok(d.mul_conj(u).arg())
}

/// `e` rotated by `alpha` radians about the origin.
pub fn rotate_anchor<T: Scalar>(e: Point2<T>, alpha: T) -> Point2<T> {
    let (s, c) = alpha.sin_cos();
    Vec2::new(e.x * c - e.y * s, e.x * s + e.y * c)
}

fn check_anchor<T: Scalar>(e: Point2<T>) -> Result<()> {
    if !((e.norm() - T::one()).abs().as_f64() <= 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "anchor must lie on the unit circle, |e| = {}",
            e.norm().as_f64()
        )));
    }
    Ok(())
}

/// `I^e` over the full span of a pair of trajectories of `flow`.
pub fn intersection_between<T: Scalar>(
    flow: &Flow<'_, T>,
    tx: &Trajectory<T>,
    ty: &Trajectory<T>,
    e: Point2<T>,
) -> Result<IntersectionResult<T>> {
    check_aligned(tx, ty)?;
    let dt = tx.dt();
    let half = dt * T::of(0.5);
    let graze = T::of(ENDPOINT_GRAZE_TOL);
    let tol = T::of(TRANSVERSALITY_TOL);

    let relative = |px: Point2<T>, py: Point2<T>| {
        let d = py - px;
        (d.mul_conj(e - px), d.norm())
    };
    // angle rate of q from the vector field, anchored inside step j
    let rate_at = |px: Point2<T>, py: Point2<T>, time: T, anchor: T| {
        let vx = flow.field(px, time, anchor);
        let vy = flow.field(py, time, anchor);
        let d = py - px;
        let u = e - px;
        d.cross(vy - vx) / d.norm_sq() + u.cross(vx) / u.norm_sq()
    };
    let endpoint = |j: usize, anchor: T| -> Result<()> {
        let (q, _) = relative(tx.point(j), ty.point(j));
        if q.x > T::zero() && q.y.abs() <= graze * q.norm() {
            return Err(Error::TransversalityFailure {
                time: tx.time(j).as_f64(),
                rate: rate_at(tx.point(j), ty.point(j), tx.time(j), anchor).as_f64(),
            });
        }
        Ok(())
    };
    if !(tx.point(0).norm() < T::one()) {
        return Err(Error::InvalidArgument("intersection needs an interior x".into()));
    }
    endpoint(0, tx.t0() + half)?;
    let last = tx.n_steps();
    if last > 0 {
        endpoint(last, tx.time(last) - half)?;
    }

    let mut walker = StepWalker::new();
    let (mut q, sep) = relative(tx.point(0), ty.point(0));
    walker.observe(sep, tx.t0())?;
    let mut crossings = Vec::new();
    let mut min_rate = T::infinity();

    for j in 0..last {
        let t = tx.time(j);
        let (next, sep) = relative(tx.point(j + 1), ty.point(j + 1));
        walker.observe(sep, t + dt)?;
        let at = |theta: T| {
            let px = tx.dense(j, theta).0;
            let py = ty.dense(j, theta).0;
            (px, py)
        };
        let eval = |theta: T| {
            let (px, py) = at(theta);
            relative(px, py)
        };
        walker.step(t, dt, q, next, &eval, &mut |ta, qa, tb, qb| {
            let passage = positive_axis_passage(qa, qb);
            if passage == 0 {
                return Ok(());
            }
            let a_up = qa.y >= T::zero();
            let (mut lo, mut hi) = (ta, tb);
            while (hi - lo) * dt > T::of(CROSSING_TIME_TOL) {
                let mid = (lo + hi) * T::of(0.5);
                if (eval(mid).0.y >= T::zero()) == a_up {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let theta = (lo + hi) * T::of(0.5);
            let (px, py) = at(theta);
            let time = t + dt * theta;
            let fraction = (py - px).norm() / (e - px).norm();
            if !(fraction < T::one()) {
                return Ok(());
            }
            let rate = rate_at(px, py, time, t + half);
            let sign = if rate > T::zero() { 1 } else { -1 };
            if !(rate.abs() >= tol) || sign as i64 != passage {
                return Err(Error::TransversalityFailure {
                    time: time.as_f64(),
                    rate: rate.as_f64(),
                });
            }
            min_rate = min_rate.min(rate.abs());
            crossings.push(CrossingEvent {
                time,
                sign,
                angle_rate: rate,
                radial_fraction: fraction,
            });
            Ok(())
        })?;
        q = next;
    }
    Ok(IntersectionResult {
        value: crossings.iter().map(|c| c.sign as i64).sum(),
        crossings,
        min_angle_rate: min_rate,
    })
}

/// [`intersection_between`], rotating the anchor by `ANCHOR_ROTATION_STEP·k`
/// for `k = 1..=MAX_ANCHOR_RETRIES` after transversality failures. Returns
/// the result and the number of retries used.
pub fn intersection_with_retries<T: Scalar>(
    flow: &Flow<'_, T>,
    tx: &Trajectory<T>,
    ty: &Trajectory<T>,
    e: Point2<T>,
) -> Result<(IntersectionResult<T>, usize)> {
    let mut k = 0;
    loop {
        let anchor = rotate_anchor(e, T::of(ANCHOR_ROTATION_STEP * k as f64));
        match intersection_between(flow, tx, ty, anchor) {
            Ok(r) => return Ok((r, k)),
            Err(Error::TransversalityFailure { .. }) if k < MAX_ANCHOR_RETRIES => k += 1,
            Err(err) => return Err(err),
        }
    }
}

/// `I^e_{φⁿ}(x, y)` over the time-periodic isotopy on `[0, n]`.
pub fn intersection_number<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    y: Point2<T>,
    e: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<IntersectionResult<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("intersection_number needs n >= 1".into()));
    }
    check_anchor(e)?;
    let flow = Flow::new(spec, cfg)?;
    let steps = n * flow.steps_per_unit_time();
    intersection_between(&flow, &flow.advance_steps(x, 0, steps)?, &flow.advance_steps(y, 0, steps)?, e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionIntegral<T> {
    /// `∫_𝔻 I^e_{φⁿ}(x, y) ω₀(y)`.
    pub estimate: Estimate<T>,
    /// Samples that needed a rotated anchor.
    pub retried: usize,
}

/// `∫_𝔻 I^e_{φⁿ}(x, y) ω₀(y)` for each `x` in `xs`, sharing the sample
/// trajectories between all `x`.
pub fn intersection_integrals<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    xs: &[Point2<T>],
    e: Point2<T>,
    n: usize,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Vec<IntersectionIntegral<T>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("intersection_integral needs n >= 1".into()));
    }
    check_anchor(e)?;
    let flow = Flow::new(spec, cfg)?;
    let steps = n * flow.steps_per_unit_time();
    for x in xs {
        if !(x.norm() < T::one()) {
            return Err(Error::InvalidArgument("intersection needs an interior x".into()));
        }
    }
    let x_traj = xs
        .iter()
        .map(|&x| flow.advance_steps(x, 0, steps))
        .collect::<Result<Vec<_>>>()?;
    let samples = disk_quadrature::<T>(quad)?;
    let tube = T::of(DIAGONAL_TUBE);
    let per_sample: Vec<Vec<(T, bool)>> = samples
        .par_iter()
        .map(|s| {
            let ty = flow.advance_steps(s.point, 0, steps)?;
            x_traj
                .iter()
                .map(|tx| {
                    if (s.point - tx.start()).norm() < tube {
                        return Ok((T::zero(), false));
                    }
                    let (r, k) = intersection_with_retries(&flow, tx, &ty, e)?;
                    Ok((T::of(r.value as f64), k > 0))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<T> = samples.iter().map(|s| s.weight).collect();
    let mc = quad.kind == QuadratureKind::MonteCarlo;
    Ok((0..xs.len())
        .map(|i| {
            let values: Vec<T> = per_sample.iter().map(|row| row[i].0).collect();
            IntersectionIntegral {
                estimate: weighted_estimate(&weights, &values, mc),
                retried: per_sample.iter().filter(|row| row[i].1).count(),
            }
        })
        .collect())
}

/// `∫_𝔻 I^e_{φⁿ}(x, y) ω₀(y)`.
pub fn intersection_integral<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    e: Point2<T>,
    n: usize,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<IntersectionIntegral<T>> {
    Ok(intersection_integrals(spec, &[x], e, n, quad, cfg)?[0])
}
