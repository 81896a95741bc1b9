//! Birkhoff averages: asymptotic action, asymptotic winding and the
//! finite-n form of the action/winding identity.

use rayon::prelude::*;

use crate::action::{check_birkhoff_sum, unit_actions};
use crate::error::{Error, Result};
use crate::flow::{Flow, FlowConfig};
use crate::geometry::Point2;
use crate::hamiltonian::HamiltonianSpec;
use crate::oneform::{segment_integral, BasePrimitive, PrimitiveOneForm};
use crate::quadrature::{
    disk_quadrature, pair_quadrature, weighted_estimate, Estimate, QuadratureKind, QuadratureSpec,
};
use crate::scalar::Scalar;
use crate::winding::{winding_iterate_with_prefixes, winding_with_prefixes};

/// Return distance accepted by [`periodic_average_action`].
pub const PERIODIC_RETURN_TOL: f64 = 1e-6;

/// Slack added to the primitive-independence bound.
pub const PRIMITIVE_GAP_SLACK: f64 = 1e-6;

/// `|W − I^e| ≤ 3/2` pointwise, integrated over the disk.
pub const WINDING_INTERSECTION_GAP: f64 = 1.5 * std::f64::consts::PI;

/// Gauss–Legendre order for the segment terms of the theorem budget.
pub const SEGMENT_ORDER: usize = 16;

/// Samples closer than this to `x` contribute zero to winding integrals.
pub const DIAGONAL_TUBE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffEstimate<T> {
    pub value: T,
    pub n: usize,
    /// Averages after `n/4`, `n/2`, `3n/4` and `n` iterates.
    pub partial_averages: Vec<T>,
    /// Gap between the last two partial averages.
    pub cauchy_gap: T,
}

impl<T: Scalar> BirkhoffEstimate<T> {
    /// From cumulative sums `sums[j-1] = Σ_{i<j} f(φⁱ z)`, `j = 1..=n`.
    pub fn from_cumulative(sums: &[T]) -> Self {
        let n = sums.len();
        let marks = [(n / 4).max(1), (n / 2).max(1), (3 * n / 4).max(1), n];
        let partial_averages: Vec<T> = marks.iter().map(|&m| sums[m - 1] / T::of_usize(m)).collect();
        let cauchy_gap = (partial_averages[3] - partial_averages[2]).abs();
        Self {
            value: partial_averages[3],
            n,
            partial_averages,
            cauchy_gap,
        }
    }
}

fn require_n(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("birkhoff averages need n >= 4, got {n}")));
    }
    Ok(())
}

fn cumulative<T: Scalar>(values: impl Iterator<Item = T>) -> Vec<T> {
    let mut acc = T::zero();
    values
        .map(|v| {
            acc = acc + v;
            acc
        })
        .collect()
}

/// A primitive differing from `form` by an exact form: a different base,
/// without the gauge.
pub fn companion_primitive<T: Scalar>(form: &PrimitiveOneForm<T>) -> PrimitiveOneForm<T> {
    let base = match form.base {
        BasePrimitive::Radial => BasePrimitive::Vertical,
        _ => BasePrimitive::Radial,
    };
    PrimitiveOneForm::new(base)
}

/// `(1/n) Σ_{j<n} a_{φ,λ}(φʲ z)` with `λ′ = companion_primitive(λ)` as a
/// second primitive.
pub fn asymptotic_action<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    z: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<BirkhoffEstimate<T>> {
    asymptotic_action_with(spec, form, &companion_primitive(form), z, n, cfg)
}

/// As [`asymptotic_action`] with an explicit second primitive `other`; the
/// two averages must agree within `2·sup|u|/n + 1e-6` where `du = λ − λ′`.
pub fn asymptotic_action_with<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    other: &PrimitiveOneForm<T>,
    z: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<BirkhoffEstimate<T>> {
    require_n(n)?;
    let flow = Flow::new(spec, cfg)?;
    let traj = flow.advance_steps(z, 0, n * flow.steps_per_unit_time())?;
    let first = unit_actions(&flow, form, &traj)?;
    let second = unit_actions(&flow, other, &traj)?;
    let est = BirkhoffEstimate::from_cumulative(&cumulative(first.iter().map(|a| a.value)));
    let alt = BirkhoffEstimate::from_cumulative(&cumulative(second.iter().map(|a| a.value)));

    let gap = (est.value - alt.value).abs().as_f64();
    let tolerance = 2.0 * form.potential_gap_bound(other).as_f64() / n as f64 + PRIMITIVE_GAP_SLACK;
    if gap > tolerance {
        return Err(Error::CrossCheckFailed {
            what: "primitive independence",
            gap,
            tolerance,
        });
    }
    check_birkhoff_sum(spec, form, z, n, cfg, est.value)?;
    Ok(est)
}

/// `W_{φⁿ}(x, y)/n` with partial averages from the prefixes.
pub fn asymptotic_winding<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    y: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<BirkhoffEstimate<T>> {
    require_n(n)?;
    let (_, prefixes) = winding_iterate_with_prefixes(spec, x, y, n, cfg)?;
    Ok(BirkhoffEstimate::from_cumulative(&prefixes))
}

/// For every `x` in `xs` and every `m` in `marks`, the quadrature of
/// `y ↦ W_{φᵐ}(x, y)/m`. Indexed `[x][mark]`.
pub fn winding_integrals<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    xs: &[Point2<T>],
    marks: &[usize],
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Vec<Vec<Estimate<T>>>> {
    let table = winding_table(spec, xs, marks, quad, cfg)?;
    let samples = disk_quadrature::<T>(quad)?;
    let weights: Vec<T> = samples.iter().map(|s| s.weight).collect();
    let mc = quad.kind == QuadratureKind::MonteCarlo;
    Ok((0..xs.len())
        .map(|i| {
            marks
                .iter()
                .enumerate()
                .map(|(k, &m)| {
                    let values: Vec<T> = table.iter().map(|row| row[i][k] / T::of_usize(m)).collect();
                    weighted_estimate(&weights, &values, mc)
                })
                .collect()
        })
        .collect())
}

/// `W_{φᵐ}(x, y)` for each quadrature sample `y`, each `x` and each mark;
/// indexed `[sample][x][mark]`. Samples inside the diagonal tube around `x`
/// give zero.
pub fn winding_table<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    xs: &[Point2<T>],
    marks: &[usize],
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Vec<Vec<Vec<T>>>> {
    let n_max = marks.iter().copied().max().unwrap_or(0);
    if marks.contains(&0) || n_max == 0 {
        return Err(Error::InvalidArgument("marks must be positive".into()));
    }
    let flow = Flow::new(spec, cfg)?;
    let steps = flow.steps_per_unit_time();
    let x_traj = xs
        .iter()
        .map(|&x| flow.advance_steps(x, 0, n_max * steps))
        .collect::<Result<Vec<_>>>()?;
    let samples = disk_quadrature::<T>(quad)?;
    let tube = T::of(DIAGONAL_TUBE);
    samples
        .par_iter()
        .map(|s| {
            let ty = flow.advance_steps(s.point, 0, n_max * steps)?;
            x_traj
                .iter()
                .map(|tx| {
                    if (s.point - tx.start()).norm() < tube {
                        return Ok(vec![T::zero(); marks.len()]);
                    }
                    let (_, prefixes) = winding_with_prefixes(tx, &ty, Some(steps))?;
                    Ok(marks.iter().map(|&m| prefixes[m - 1]).collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// `∫_𝔻 W_{φⁿ}(x, y)/n ω₀(y)` for each `x`.
pub fn asymptotic_winding_integrals<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    xs: &[Point2<T>],
    n: usize,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Vec<Estimate<T>>> {
    Ok(winding_integrals(spec, xs, &[n], quad, cfg)?
        .into_iter()
        .map(|v| v[0])
        .collect())
}

/// `∫_𝔻 W_{φⁿ}(x, y)/n ω₀(y)`.
pub fn asymptotic_winding_integral<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    n: usize,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Estimate<T>> {
    Ok(asymptotic_winding_integrals(spec, &[x], n, quad, cfg)?[0])
}

/// Asymptotic action against the winding integral at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport<T> {
    pub x: Point2<T>,
    pub action: BirkhoffEstimate<T>,
    pub winding_integral: Estimate<T>,
    pub residual: T,
    /// `|∫_{[e,x]} λ| + |∫_{[e,φⁿ(x)]} λ|`.
    pub segment_bound: T,
    /// `((3/2)π + segment_bound)/n + 3·standard error`.
    pub budget: T,
    pub pass: bool,
}

/// Residual of the action/winding identity at finite `n` for each `x`,
/// against the budget `((3/2)π + |∫_{[e,x]}λ| + |∫_{[e,φⁿx]}λ|)/n + 3σ`.
pub fn verify_main_theorem_batch<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    xs: &[Point2<T>],
    form: &PrimitiveOneForm<T>,
    e: Point2<T>,
    n: usize,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Vec<TheoremReport<T>>> {
    require_n(n)?;
    let flow = Flow::new(spec, cfg)?;
    let integrals = asymptotic_winding_integrals(spec, xs, n, quad, cfg)?;
    xs.iter()
        .zip(integrals)
        .map(|(&x, integral)| {
            if !(x.norm() < T::one()) {
                return Err(Error::InvalidArgument("verify_main_theorem needs an interior x".into()));
            }
            let action = asymptotic_action(spec, form, x, n, cfg)?;
            let fx = flow.advance_steps(x, 0, n * flow.steps_per_unit_time())?.end();
            let segment_bound = segment_integral(form, e, x, SEGMENT_ORDER)?.abs()
                + segment_integral(form, e, fx, SEGMENT_ORDER)?.abs();
            let residual = (action.value - integral.value).abs();
            let budget = (T::of(WINDING_INTERSECTION_GAP) + segment_bound) / T::of_usize(n)
                + T::of(3.0) * integral.error;
            Ok(TheoremReport {
                x,
                pass: residual <= budget,
                action,
                winding_integral: integral,
                residual,
                segment_bound,
                budget,
            })
        })
        .collect()
}

/// [`verify_main_theorem_batch`] at a single point with anchor `e = (1, 0)`.
pub fn verify_main_theorem<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    form: &PrimitiveOneForm<T>,
    n: usize,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<TheoremReport<T>> {
    let e = Point2::new(T::one(), T::zero());
    Ok(verify_main_theorem_batch(spec, &[x], form, e, n, quad, cfg)?.remove(0))
}

/// Average action over a `k`-periodic orbit.
pub fn periodic_average_action<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    z: Point2<T>,
    k: usize,
    cfg: &FlowConfig,
) -> Result<T> {
    if k == 0 {
        return Err(Error::InvalidArgument("period must be >= 1".into()));
    }
    let flow = Flow::new(spec, cfg)?;
    let traj = flow.advance_steps(z, 0, k * flow.steps_per_unit_time())?;
    let distance = (traj.end() - z).norm().as_f64();
    if distance > PERIODIC_RETURN_TOL {
        return Err(Error::NotPeriodic { distance, period: k });
    }
    let actions = unit_actions(&flow, form, &traj)?;
    Ok(actions.iter().map(|a| a.value).fold(T::zero(), |a, b| a + b) / T::of_usize(k))
}

/// Quadratures of a Birkhoff average and of the underlying observable on
/// the same samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceAverage<T> {
    /// `∫ A_n f`.
    pub averaged: Estimate<T>,
    /// `∫ f`.
    pub single: Estimate<T>,
    /// `∫ (A_n f − f)` with its paired standard error.
    pub difference: Estimate<T>,
    /// `max |f|` over the samples.
    pub sup: T,
}

fn space_average<T: Scalar>(weights: &[T], pairs: &[(T, T)], mc: bool) -> SpaceAverage<T> {
    let avg: Vec<T> = pairs.iter().map(|p| p.0).collect();
    let one: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<T> = pairs.iter().map(|p| p.0 - p.1).collect();
    SpaceAverage {
        averaged: weighted_estimate(weights, &avg, mc),
        single: weighted_estimate(weights, &one, mc),
        difference: weighted_estimate(weights, &diff, mc),
        sup: one.iter().fold(T::zero(), |m, v| m.max(v.abs())),
    }
}

/// `∫_𝔻 (1/n) Σ_{j<n} a_{φ,λ}∘φʲ` against `∫_𝔻 a_{φ,λ}`.
pub fn action_space_average<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    n: usize,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<SpaceAverage<T>> {
    let flow = Flow::new(spec, cfg)?;
    let steps = flow.steps_per_unit_time();
    let samples = disk_quadrature::<T>(quad)?;
    let pairs = samples
        .par_iter()
        .map(|s| {
            let traj = flow.advance_steps(s.point, 0, n * steps)?;
            let actions = unit_actions(&flow, form, &traj)?;
            let sum = actions.iter().map(|a| a.value).fold(T::zero(), |a, b| a + b);
            Ok((sum / T::of_usize(n), actions[0].value))
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<T> = samples.iter().map(|s| s.weight).collect();
    Ok(space_average(&weights, &pairs, quad.kind == QuadratureKind::MonteCarlo))
}

/// `∫∫ W_{φⁿ}/n` against `∫∫ W_φ` over off-diagonal pairs.
pub fn winding_space_average<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    n: usize,
    pair_quad: &QuadratureSpec,
    min_separation: f64,
    cfg: &FlowConfig,
) -> Result<SpaceAverage<T>> {
    let flow = Flow::new(spec, cfg)?;
    let steps = flow.steps_per_unit_time();
    let quad = pair_quadrature::<T>(pair_quad, min_separation)?;
    let pairs = quad
        .samples
        .par_iter()
        .map(|s| {
            let tx = flow.advance_steps(s.x, 0, n * steps)?;
            let ty = flow.advance_steps(s.y, 0, n * steps)?;
            let (w, prefixes) = winding_with_prefixes(&tx, &ty, Some(steps))?;
            Ok((w.value / T::of_usize(n), prefixes[0]))
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<T> = quad.samples.iter().map(|s| s.weight).collect();
    Ok(space_average(&weights, &pairs, true))
}

/// For each `n` in `ns`, the disk average over `y` of
/// `|W_{φⁿ}(x,y)/n − W_{φ²ⁿ}(x,y)/(2n)|`.
pub fn cauchy_gaps<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    x: Point2<T>,
    ns: &[usize],
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Vec<T>> {
    let mut marks: Vec<usize> = ns.iter().flat_map(|&n| [n, 2 * n]).collect();
    marks.sort_unstable();
    marks.dedup();
    let table = winding_table(spec, &[x], &marks, quad, cfg)?;
    let samples = disk_quadrature::<T>(quad)?;
    let weights: Vec<T> = samples.iter().map(|s| s.weight).collect();
    let area = weights.iter().fold(T::zero(), |a, &b| a + b);
    let col = |m: usize| marks.iter().position(|&v| v == m).unwrap_or(0);
    Ok(ns
        .iter()
        .map(|&n| {
            let (a, b) = (col(n), col(2 * n));
            let values: Vec<T> = table
                .iter()
                .map(|row| (row[0][a] / T::of_usize(n) - row[0][b] / T::of_usize(2 * n)).abs())
                .collect();
            weighted_estimate(&weights, &values, false).value / area
        })
        .collect())
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
