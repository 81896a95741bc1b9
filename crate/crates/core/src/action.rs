//! The action `a_{φ,λ}(z) = ∫_{t↦φᵗ(z)} λ + ∫₀¹ H_t(φᵗ(z)) dt`.

use crate::error::{Error, Result};
use crate::flow::{Flow, FlowConfig, Trajectory};
use crate::geometry::Point2;
use crate::hamiltonian::HamiltonianSpec;
use crate::oneform::{path_integral_range, PrimitiveOneForm};
use crate::quadrature::piecewise_simpson;
use crate::scalar::Scalar;

/// Per-iterate tolerance of the Birkhoff-sum cross-check.
pub const BIRKHOFF_CROSS_CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActionValue<T> {
    pub value: T,
    pub path_term: T,
    pub hamiltonian_term: T,
}

impl<T: Scalar> ActionValue<T> {
    fn new(path_term: T, hamiltonian_term: T) -> Self {
        Self {
            value: path_term + hamiltonian_term,
            path_term,
            hamiltonian_term,
        }
    }
}

/// `∫ H_t(φᵗ(z)) dt` between two nodes of a trajectory of `flow`.
pub fn hamiltonian_integral<T: Scalar>(
    flow: &Flow<'_, T>,
    traj: &Trajectory<T>,
    from: usize,
    to: usize,
) -> T {
    let values: Vec<(T, T)> = (from..=to).map(|j| flow.hamiltonian_at_node(traj, j)).collect();
    piecewise_simpson(to - from, traj.dt(), |j| values[j].1, |j| values[j].0)
}

/// Action accumulated along the node range `[from, to]` of a trajectory.
pub fn window_action<T: Scalar>(
    flow: &Flow<'_, T>,
    form: &PrimitiveOneForm<T>,
    traj: &Trajectory<T>,
    from: usize,
    to: usize,
) -> Result<ActionValue<T>> {
    let path = path_integral_range(form, traj, from, to)?;
    Ok(ActionValue::new(path, hamiltonian_integral(flow, traj, from, to)))
}

/// Actions `a_{φ,λ}(φʲ(z))` of every unit-time window of `traj`, which must
/// start at an integer time.
pub fn unit_actions<T: Scalar>(
    flow: &Flow<'_, T>,
    form: &PrimitiveOneForm<T>,
    traj: &Trajectory<T>,
) -> Result<Vec<ActionValue<T>>> {
    let n = flow.steps_per_unit_time();
    if traj.n_steps() % n != 0 {
        return Err(Error::InvalidArgument(
            "trajectory does not cover whole periods".into(),
        ));
    }
    (0..traj.n_steps() / n)
        .map(|k| window_action(flow, form, traj, k * n, (k + 1) * n))
        .collect()
}

/// `a_{φ,λ}(z)` for the time-one map.
pub fn action<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    z: Point2<T>,
    cfg: &FlowConfig,
) -> Result<ActionValue<T>> {
    let flow = Flow::new(spec, cfg)?;
    let traj = flow.advance_steps(z, 0, flow.steps_per_unit_time())?;
    window_action(&flow, form, &traj, 0, traj.n_steps())
}

/// `(1/n) Σ_{j<n} a_{φ,λ}(φʲ(z))`, cross-checked against `a_{φⁿ,λ}(z)/n`
/// computed in one pass over `[0, n]` at twice the resolution.
pub fn action_birkhoff_sum<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    z: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidArgument("birkhoff sum needs n >= 1".into()));
    }
    let flow = Flow::new(spec, cfg)?;
    let traj = flow.advance_steps(z, 0, n * flow.steps_per_unit_time())?;
    let windows = unit_actions(&flow, form, &traj)?;
    let birkhoff = windows.iter().map(|a| a.value).fold(T::zero(), |a, b| a + b) / T::of_usize(n);

    check_birkhoff_sum(spec, form, z, n, cfg, birkhoff)?;
    Ok(birkhoff)
}

/// Compares the Birkhoff average `birkhoff` against `a_{φⁿ,λ}(z)/n` computed in
/// one pass over `[0, n]` at twice the resolution of `cfg`.
pub fn check_birkhoff_sum<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    z: Point2<T>,
    n: usize,
    cfg: &FlowConfig,
    birkhoff: T,
) -> Result<()> {
    let fine_cfg = cfg.refined();
    let fine = Flow::new(spec, &fine_cfg)?;
    let long = fine.advance_steps(z, 0, n * fine.steps_per_unit_time())?;
    let direct = window_action(&fine, form, &long, 0, long.n_steps())?.value;
    // compare sums: the tolerance is per iterate
    let gap = (birkhoff * T::of_usize(n) - direct).abs().as_f64();
    let tolerance = n as f64 * BIRKHOFF_CROSS_CHECK_TOL;
    if gap > tolerance {
        return Err(Error::CrossCheckFailed {
            what: "action birkhoff sum",
            gap,
            tolerance,
        });
    }
    Ok(())
}
