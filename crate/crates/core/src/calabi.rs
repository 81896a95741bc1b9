//! The Calabi invariant by three routes: the disk integral of the action,
//! twice the space-time integral of `H`, and the pair integral of `W_φ`.

use rayon::prelude::*;

use crate::action::{hamiltonian_integral, window_action};
use crate::error::Result;
use crate::flow::{Flow, FlowConfig};
use crate::geometry::Point2;
use crate::hamiltonian::HamiltonianSpec;
use crate::oneform::PrimitiveOneForm;
use crate::quadrature::{
    disk_quadrature, pair_quadrature, weighted_estimate, Estimate, QuadratureKind, QuadratureSpec,
    DEFAULT_MIN_SEPARATION,
};
use crate::scalar::Scalar;
use crate::winding::winding_between;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalabiReport<T> {
    pub via_action: Estimate<T>,
    pub via_hamiltonian: Estimate<T>,
    pub via_winding: Estimate<T>,
    pub max_pairwise_gap: T,
}

impl<T: Scalar> CalabiReport<T> {
    pub fn new(via_action: Estimate<T>, via_hamiltonian: Estimate<T>, via_winding: Estimate<T>) -> Self {
        let v = [via_action.value, via_hamiltonian.value, via_winding.value];
        let mut gap = T::zero();
        for i in 0..3 {
            for j in i + 1..3 {
                gap = gap.max((v[i] - v[j]).abs());
            }
        }
        Self {
            via_action,
            via_hamiltonian,
            via_winding,
            max_pairwise_gap: gap,
        }
    }

    pub fn error_sum(&self) -> T {
        self.via_action.error + self.via_hamiltonian.error + self.via_winding.error
    }
}

/// Disk quadrature of per-point values; grid rules report the change
/// against the coarsened grid as their error.
fn disk_estimate<T: Scalar, F>(quad: &QuadratureSpec, f: F) -> Result<Estimate<T>>
where
    F: Fn(Point2<T>) -> Result<T> + Sync,
{
    let run = |q: &QuadratureSpec| -> Result<Estimate<T>> {
        let samples = disk_quadrature::<T>(q)?;
        let values = samples.par_iter().map(|s| f(s.point)).collect::<Result<Vec<T>>>()?;
        let weights: Vec<T> = samples.iter().map(|s| s.weight).collect();
        Ok(weighted_estimate(&weights, &values, q.kind == QuadratureKind::MonteCarlo))
    };
    let fine = run(quad)?;
    match quad.kind {
        QuadratureKind::MonteCarlo => Ok(fine),
        QuadratureKind::PolarGrid => {
            let coarse = run(&quad.coarsened())?;
            Ok(Estimate {
                value: fine.value,
                error: (fine.value - coarse.value).abs(),
            })
        }
    }
}

/// `∫_𝔻 a_{φ,λ} ω₀`.
pub fn calabi_via_action<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Estimate<T>> {
    let flow = Flow::new(spec, cfg)?;
    let steps = flow.steps_per_unit_time();
    disk_estimate(quad, |z| {
        let traj = flow.advance_steps(z, 0, steps)?;
        Ok(window_action(&flow, form, &traj, 0, steps)?.value)
    })
}

/// `2 ∫_{𝔻×[0,1]} H ω₀∧dt`, with Simpson's rule in time on the grid of `cfg`.
pub fn calabi_via_hamiltonian<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Estimate<T>> {
    let flow = Flow::new(spec, cfg)?;
    let steps = flow.steps_per_unit_time();
    let est = disk_estimate(quad, |z| {
        // a constant trajectory carries the sample point through time
        let still = crate::flow::Trajectory::from_samples(T::zero(), flow.dt(), vec![z; steps + 1], None)?;
        Ok(hamiltonian_integral(&flow, &still, 0, steps))
    })?;
    let two = T::of(2.0);
    Ok(Estimate {
        value: two * est.value,
        error: two * est.error,
    })
}

/// `∫∫_{𝔻×𝔻∖Δ} W_φ ω₀∧ω₀` by Monte Carlo over pairs.
pub fn calabi_via_winding<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    pair_quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<Estimate<T>> {
    let flow = Flow::new(spec, cfg)?;
    let steps = flow.steps_per_unit_time();
    let quad = pair_quadrature::<T>(pair_quad, DEFAULT_MIN_SEPARATION)?;
    let values = quad
        .samples
        .par_iter()
        .map(|s| {
            let tx = flow.advance_steps(s.x, 0, steps)?;
            let ty = flow.advance_steps(s.y, 0, steps)?;
            Ok(winding_between(&tx, &ty)?.value)
        })
        .collect::<Result<Vec<T>>>()?;
    let weights: Vec<T> = quad.samples.iter().map(|s| s.weight).collect();
    Ok(weighted_estimate(&weights, &values, true))
}

/// All three routes.
pub fn calabi_report<T: Scalar>(
    spec: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    quad: &QuadratureSpec,
    pair_quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<CalabiReport<T>> {
    Ok(CalabiReport::new(
        calabi_via_action(spec, form, quad, cfg)?,
        calabi_via_hamiltonian(spec, quad, cfg)?,
        calabi_via_winding(spec, pair_quad, cfg)?,
    ))
}

/// `2π ∫₀¹ h(s) ds` for radial specs, `None` otherwise.
pub fn radial_calabi<T: Scalar>(spec: &HamiltonianSpec<T>) -> Option<T> {
    spec.radial_profile().map(|h| T::two_pi() * h.integral_from_zero(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomomorphismReport<T> {
    /// `𝒞(ψ∘φ) − 𝒞(φ) − 𝒞(ψ)` via the Hamiltonian route.
    pub via_hamiltonian: Estimate<T>,
    /// The same via the action route, with a paired standard error.
    pub via_action: Estimate<T>,
}

/// Additivity of the Calabi invariant under composition, with `phi` run
/// first. Residuals are computed per sample, so their errors are paired.
pub fn homomorphism_check<T: Scalar>(
    phi: &HamiltonianSpec<T>,
    psi: &HamiltonianSpec<T>,
    form: &PrimitiveOneForm<T>,
    quad: &QuadratureSpec,
    cfg: &FlowConfig,
) -> Result<HomomorphismReport<T>> {
    let both = HamiltonianSpec::concat(phi.clone(), psi.clone());
    let flows = [Flow::new(&both, cfg)?, Flow::new(phi, cfg)?, Flow::new(psi, cfg)?];
    let steps = cfg.steps_per_unit_time;
    let signs = [T::one(), -T::one(), -T::one()];
    let two = T::of(2.0);

    let ham = disk_estimate(quad, |z| {
        let still = crate::flow::Trajectory::from_samples(T::zero(), flows[0].dt(), vec![z; steps + 1], None)?;
        Ok(flows
            .iter()
            .zip(signs)
            .map(|(f, s)| s * two * hamiltonian_integral(f, &still, 0, steps))
            .fold(T::zero(), |a, b| a + b))
    })?;
    let act = disk_estimate(quad, |z| {
        let mut total = T::zero();
        for (f, s) in flows.iter().zip(signs) {
            let traj = f.advance_steps(z, 0, steps)?;
            total = total + s * window_action(f, form, &traj, 0, steps)?.value;
        }
        Ok(total)
    })?;
    Ok(HomomorphismReport {
        via_hamiltonian: ham,
        via_action: act,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::TimeProfile;
    use crate::oneform::BasePrimitive;
    use std::f64::consts::PI;

    fn radial(a: f64) -> HamiltonianSpec<f64> {
        HamiltonianSpec::radial(vec![1.0], a)
    }

    fn perturbed() -> HamiltonianSpec<f64> {
        radial(1.0).plus(HamiltonianSpec::perturbation(2, TimeProfile::Cos, 0.1))
    }

    #[test]
    fn radial_symbolic_value() {
        // 2π ∫₀¹ A(1−s)² ds = 2πA/3
        assert!((radial_calabi(&radial(1.5)).unwrap() - PI).abs() < 1e-14);
        assert!(radial_calabi(&perturbed()).is_none());
    }

    #[test]
    fn trivial_routes_vanish() {
        let cfg = FlowConfig::with_steps(32);
        let h = HamiltonianSpec::<f64>::trivial();
        let lam = PrimitiveOneForm::radial();
        let r = calabi_report(&h, &lam, &QuadratureSpec::polar_grid(8, 8), &QuadratureSpec::monte_carlo(64, 1), &cfg)
            .unwrap();
        assert_eq!(r.max_pairwise_gap, 0.0);
        assert_eq!(r.error_sum(), 0.0);
    }

    #[test]
    fn hamiltonian_and_action_routes_agree_on_radial() {
        let cfg = FlowConfig::with_steps(64);
        let grid = QuadratureSpec::polar_grid(64, 16);
        for a in [0.5, 2.0] {
            let exact = radial_calabi(&radial(a)).unwrap();
            let h = calabi_via_hamiltonian(&radial(a), &grid, &cfg).unwrap();
            let s = calabi_via_action(&radial(a), &PrimitiveOneForm::radial(), &grid, &cfg).unwrap();
            let v = calabi_via_action(&radial(a), &PrimitiveOneForm::new(BasePrimitive::Vertical), &grid, &cfg).unwrap();
            for est in [h, s, v] {
                assert!((est.value - exact).abs() <= 3.0 * est.error + 1e-9, "{est:?} vs {exact}");
            }
            assert!((s.value - v.value).abs() <= 2.0 * (s.error + v.error) + 1e-9);
        }
    }

    #[test]
    fn zero_mean_perturbation_adds_nothing() {
        let cfg = FlowConfig::with_steps(64);
        let grid = QuadratureSpec::polar_grid(32, 16);
        let base = calabi_via_hamiltonian(&radial(1.0), &grid, &cfg).unwrap();
        let pert = calabi_via_hamiltonian(&perturbed(), &grid, &cfg).unwrap();
        assert!((base.value - pert.value).abs() < 1e-12);
    }

    #[test]
    fn winding_route_matches_reference_on_radial() {
        let cfg = FlowConfig::with_steps(64);
        let est = calabi_via_winding(&radial(1.0), &QuadratureSpec::monte_carlo(4000, 17), &cfg).unwrap();
        let exact = radial_calabi(&radial(1.0)).unwrap();
        assert!((est.value - exact).abs() <= 3.0 * est.error, "{est:?} vs {exact}");
        assert!(est.value > 0.0);
    }

    #[test]
    fn homomorphism_residuals() {
        let cfg = FlowConfig::default();
        let grid = QuadratureSpec::polar_grid(16, 16);
        let lam = PrimitiveOneForm::radial();
        let t = homomorphism_check(&radial(1.0), &HamiltonianSpec::trivial(), &lam, &grid, &cfg).unwrap();
        assert!(t.via_hamiltonian.value.abs() < 1e-12);
        assert!(t.via_action.value.abs() < 1e-6);
        let m = homomorphism_check(&radial(0.5), &perturbed(), &lam, &QuadratureSpec::monte_carlo(200, 2), &cfg).unwrap();
        assert!(m.via_hamiltonian.value.abs() <= 3.0 * m.via_hamiltonian.error + 1e-9);
        assert!(m.via_action.value.abs() <= 3.0 * m.via_action.error + 1e-6);
    }
}
