//! Compactly supported time-dependent Hamiltonians with exact gradients.
//!
//! Every term carries the cutoff `χ(s) = (1 - s)²` on `s = x² + y²`, so `H`
//! and `∇H` vanish on the unit circle and are extended by zero outside. The
//! Hamiltonian vector field is `X = (∂H/∂y, -∂H/∂x)`, the solution of
//! `ω₀(X, ·) = dH` for `ω₀ = dx∧dy`.

use crate::geometry::{Point2, Vec2};
use crate::scalar::Scalar;

/// Time factor `τ(t)` of a perturbation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeProfile {
    Constant,
    Cos,
    Sin,
}

impl TimeProfile {
    #[inline]
    pub fn eval<T: Scalar>(self, t: T) -> T {
        match self {
            TimeProfile::Constant => T::one(),
            TimeProfile::Cos => (T::two_pi() * t).cos(),
            TimeProfile::Sin => (T::two_pi() * t).sin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianTerm<T> {
    /// `A · p(s) · χ(s)` with `p(s) = Σ coeffs[i] sⁱ`.
    Radial { coeffs: Vec<T>, amplitude: T },
    /// `A · χ(s) · Re((x + iy)^k) · τ(t)`, `k >= 1`.
    Perturbation {
        k: u32,
        tau: TimeProfile,
        amplitude: T,
    },
    /// `first` on `[0, ½]` then `second` on `[½, 1]`, both at double speed.
    /// The time-one map is `second ∘ first`.
    Concatenation {
        first: HamiltonianSpec<T>,
        second: HamiltonianSpec<T>,
    },
}

/// A sum of terms, periodic in time with period one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HamiltonianSpec<T> {
    pub terms: Vec<HamiltonianTerm<T>>,
}

#[inline]
fn cutoff<T: Scalar>(s: T) -> (T, T) {
    if s >= T::one() {
        (T::zero(), T::zero())
    } else {
        let u = T::one() - s;
        (u * u, -(u + u))
    }
}

#[inline]
fn horner<T: Scalar>(coeffs: &[T], s: T) -> (T, T) {
    let mut p = T::zero();
    let mut dp = T::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * s + p;
        p = p * s + c;
    }
    (p, dp)
}

/// `z^k` as a complex number.
#[inline]
fn complex_pow<T: Scalar>(z: Vec2<T>, k: u32) -> Vec2<T> {
    let mut w = Vec2::new(T::one(), T::zero());
    for _ in 0..k {
        w = Vec2::new(w.x * z.x - w.y * z.y, w.x * z.y + w.y * z.x);
    }
    w
}

impl<T: Scalar> HamiltonianSpec<T> {
    /// `H ≡ 0`.
    pub fn trivial() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn radial(coeffs: Vec<T>, amplitude: T) -> Self {
        Self {
            terms: vec![HamiltonianTerm::Radial { coeffs, amplitude }],
        }
    }

    pub fn perturbation(k: u32, tau: TimeProfile, amplitude: T) -> Self {
        Self {
            terms: vec![HamiltonianTerm::Perturbation { k, tau, amplitude }],
        }
    }

    /// Isotopy running `first` and then `second`; its time-one map is
    /// `second ∘ first`.
    pub fn concat(first: Self, second: Self) -> Self {
        Self {
            terms: vec![HamiltonianTerm::Concatenation { first, second }],
        }
    }

    /// Sum of two Hamiltonians.
    pub fn plus(mut self, other: Self) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.iter().all(|t| match t {
            HamiltonianTerm::Radial { coeffs, amplitude } => {
                *amplitude == T::zero() || coeffs.iter().all(|c| *c == T::zero())
            }
            HamiltonianTerm::Perturbation { amplitude, .. } => *amplitude == T::zero(),
            HamiltonianTerm::Concatenation { first, second } => {
                first.is_trivial() && second.is_trivial()
            }
        })
    }

    /// `H(z, t)`, with `t` reduced mod 1. At a time discontinuity of a
    /// concatenation the right-hand limit is returned.
    pub fn eval_h(&self, z: Point2<T>, t: T) -> T {
        self.h_at(z, t, t)
    }

    /// `X(z, t) = (∂H/∂y, -∂H/∂x)`.
    pub fn eval_x(&self, z: Point2<T>, t: T) -> Vec2<T> {
        self.x_at(z, t, t)
    }

    /// `∇H(z, t)`.
    pub fn gradient(&self, z: Point2<T>, t: T) -> Vec2<T> {
        self.grad_at(z, t, t)
    }

    /// `H` at time `t` using the time piece selected by `anchor`.
    ///
    /// Integrators pass an anchor strictly inside the current step so that
    /// stage evaluations at step ends see the one-sided limit of the piece
    /// the step belongs to.
    pub fn h_at(&self, z: Point2<T>, t: T, anchor: T) -> T {
        let period = anchor.floor();
        self.h_local(z, t - period, anchor - period)
    }

    pub fn x_at(&self, z: Point2<T>, t: T, anchor: T) -> Vec2<T> {
        let g = self.grad_at(z, t, anchor);
        Vec2::new(g.y, -g.x)
    }

    pub fn grad_at(&self, z: Point2<T>, t: T, anchor: T) -> Vec2<T> {
        let period = anchor.floor();
        self.grad_local(z, t - period, anchor - period)
    }

    fn h_local(&self, z: Point2<T>, t: T, anchor: T) -> T {
        let s = z.norm_sq();
        let mut h = T::zero();
        for term in &self.terms {
            h = h + match term {
                HamiltonianTerm::Radial { coeffs, amplitude } => {
                    let (chi, _) = cutoff(s);
                    *amplitude * horner(coeffs, s).0 * chi
                }
                HamiltonianTerm::Perturbation { k, tau, amplitude } => {
                    let (chi, _) = cutoff(s);
                    *amplitude * chi * complex_pow(z, *k).x * tau.eval(t)
                }
                HamiltonianTerm::Concatenation { first, second } => {
                    let two = T::of(2.0);
                    if anchor < T::of(0.5) {
                        two * first.h_at(z, two * t, two * anchor)
                    } else {
                        two * second.h_at(z, two * t - T::one(), two * anchor - T::one())
                    }
                }
            };
        }
        h
    }

    fn grad_local(&self, z: Point2<T>, t: T, anchor: T) -> Vec2<T> {
        let s = z.norm_sq();
        let mut g = Vec2::zero();
        for term in &self.terms {
            match term {
                HamiltonianTerm::Radial { coeffs, amplitude } => {
                    let (chi, dchi) = cutoff(s);
                    let (p, dp) = horner(coeffs, s);
                    let dh = *amplitude * (dp * chi + p * dchi);
                    g += z.scale(dh + dh);
                }
                HamiltonianTerm::Perturbation { k, tau, amplitude } => {
                    let (chi, dchi) = cutoff(s);
                    let w = complex_pow(z, *k - 1);
                    let re_zk = w.x * z.x - w.y * z.y;
                    let a = *amplitude * tau.eval(t);
                    let kk = T::of(*k as f64);
                    // ∇Re(z^k) = k (Re z^{k-1}, -Im z^{k-1})
                    let radial = z.scale((dchi + dchi) * re_zk);
                    let angular = Vec2::new(w.x, -w.y).scale(chi * kk);
                    g += (radial + angular).scale(a);
                }
                HamiltonianTerm::Concatenation { first, second } => {
                    let two = T::of(2.0);
                    let inner = if anchor < T::of(0.5) {
                        first.grad_at(z, two * t, two * anchor)
                    } else {
                        second.grad_at(z, two * t - T::one(), two * anchor - T::one())
                    };
                    g += inner.scale(two);
                }
            }
        }
        g
    }

    /// Phases in `[0, 1)` at which `H` may jump in time.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for term in &self.terms {
            if let HamiltonianTerm::Concatenation { first, second } = term {
                out.push(0.0);
                out.push(0.5);
                out.extend(first.breakpoints().into_iter().map(|b| b / 2.0));
                out.extend(second.breakpoints().into_iter().map(|b| 0.5 + b / 2.0));
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// `H̃(z, t) = -H(z, 1 - t)`, whose time-one map is the inverse map.
    pub fn time_reversed(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|term| match term {
                HamiltonianTerm::Radial { coeffs, amplitude } => HamiltonianTerm::Radial {
                    coeffs: coeffs.clone(),
                    amplitude: -*amplitude,
                },
                HamiltonianTerm::Perturbation { k, tau, amplitude } => {
                    // cos(2π(1-t)) = cos 2πt, sin(2π(1-t)) = -sin 2πt
                    let amplitude = match tau {
                        TimeProfile::Sin => *amplitude,
                        TimeProfile::Constant | TimeProfile::Cos => -*amplitude,
                    };
                    HamiltonianTerm::Perturbation {
                        k: *k,
                        tau: *tau,
                        amplitude,
                    }
                }
                HamiltonianTerm::Concatenation { first, second } => {
                    HamiltonianTerm::Concatenation {
                        first: second.time_reversed(),
                        second: first.time_reversed(),
                    }
                }
            })
            .collect();
        Self { terms }
    }

    /// The profile `h(s)` with `H(z) = h(|z|²)` when every term is a
    /// time-independent radial term.
    pub fn radial_profile(&self) -> Option<Polynomial<T>> {
        let mut total = Polynomial::zero();
        for term in &self.terms {
            match term {
                HamiltonianTerm::Radial { coeffs, amplitude } => {
                    let p = Polynomial::new(coeffs.clone());
                    let chi = Polynomial::new(vec![T::one(), -T::of(2.0), T::one()]);
                    total = total.add(&p.mul(&chi).scaled(*amplitude));
                }
                HamiltonianTerm::Perturbation { amplitude, .. } if *amplitude == T::zero() => {}
                _ => return None,
            }
        }
        Some(total)
    }
}

/// Dense polynomial `Σ cᵢ sⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn eval(&self, s: T) -> T {
        horner(&self.coeffs, s).0
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * T::of_usize(i))
                .collect(),
        )
    }

    /// `∫₀ᵇ p(s) ds`.
    pub fn integral_from_zero(&self, b: T) -> T {
        let mut acc = T::zero();
        let mut pow = b;
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc = acc + c * pow / T::of_usize(i + 1);
            pow = pow * b;
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or_else(T::zero)
                        + o.coeffs.get(i).copied().unwrap_or_else(T::zero)
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::zero();
        }
        let mut c = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] = c[i + j] + a * b;
            }
        }
        Self::new(c)
    }

    pub fn scaled(&self, k: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = Point2<f64>;

    fn perturbed() -> HamiltonianSpec<f64> {
        HamiltonianSpec::radial(vec![1.0], 1.0).plus(HamiltonianSpec::perturbation(
            2,
            TimeProfile::Cos,
            0.1,
        ))
    }

    fn zoo() -> Vec<HamiltonianSpec<f64>> {
        vec![
            HamiltonianSpec::radial(vec![1.0], 1.0),
            HamiltonianSpec::radial(vec![0.5, -1.0, 2.0], 0.7),
            perturbed(),
            HamiltonianSpec::perturbation(1, TimeProfile::Constant, 0.3),
            HamiltonianSpec::perturbation(3, TimeProfile::Sin, -0.2),
            HamiltonianSpec::concat(perturbed(), HamiltonianSpec::radial(vec![1.0], 2.0)),
        ]
    }

    fn fd_gradient(h: &HamiltonianSpec<f64>, z: P, t: f64) -> Vec2<f64> {
        let e = 1e-6;
        let dx = (h.h_at(P::new(z.x + e, z.y), t, t) - h.h_at(P::new(z.x - e, z.y), t, t)) / (2.0 * e);
        let dy = (h.h_at(P::new(z.x, z.y + e), t, t) - h.h_at(P::new(z.x, z.y - e), t, t)) / (2.0 * e);
        Vec2::new(dx, dy)
    }

    #[test]
    fn vanishes_on_boundary() {
        for h in zoo() {
            for k in 0..32 {
                let z = P::polar(1.0, k as f64 * 0.2);
                for t in [0.0, 0.3, 0.7] {
                    // |z| = 1 up to one ulp
                    assert!(h.eval_h(z, t).abs() < 1e-14);
                    assert!(h.eval_x(z, t).norm() < 1e-12);
                }
                // extended by zero outside
                assert_eq!(h.eval_h(z.scale(1.01), 0.2), 0.0);
            }
        }
    }

    #[test]
    fn radial_centre_value() {
        let h = HamiltonianSpec::radial(vec![1.0], 1.0);
        assert_eq!(h.eval_h(P::zero(), 0.0), 1.0);
    }

    #[test]
    fn concatenation_runs_at_double_speed() {
        let h1 = perturbed();
        let h2 = HamiltonianSpec::perturbation(3, TimeProfile::Sin, 0.4);
        let c = HamiltonianSpec::concat(h1.clone(), h2.clone());
        let z = P::new(0.3, -0.2);
        assert!((c.eval_h(z, 0.25) - 2.0 * h1.eval_h(z, 0.5)).abs() < 1e-15);
        assert!((c.eval_h(z, 0.625) - 2.0 * h2.eval_h(z, 0.25)).abs() < 1e-15);
        // right-continuous at the junction; left limit via the anchor
        assert!((c.eval_h(z, 0.5) - 2.0 * h2.eval_h(z, 0.0)).abs() < 1e-15);
        assert!((c.h_at(z, 0.5, 0.49) - 2.0 * h1.eval_h(z, 1.0)).abs() < 1e-15);
        assert_eq!(c.breakpoints(), vec![0.0, 0.5]);
    }

    #[test]
    fn trivial_field_is_zero() {
        let h = HamiltonianSpec::<f64>::trivial();
        assert!(h.is_trivial());
        assert_eq!(h.eval_x(P::new(0.2, 0.1), 0.4), Vec2::zero());
    }

    #[test]
    fn radial_field_is_tangent_and_matches_profile() {
        let h = HamiltonianSpec::radial(vec![0.5, -1.0, 2.0], 0.7);
        let prof = h.radial_profile().unwrap();
        let dprof = prof.derivative();
        for k in 0..50 {
            let z = P::polar(0.02 * k as f64, 0.37 * k as f64);
            let x = h.eval_x(z, 0.0);
            assert!(x.dot(z).abs() < 1e-12);
            let s = z.norm_sq();
            let expected = Vec2::new(z.y, -z.x).scale(2.0 * dprof.eval(s));
            assert!((x - expected).norm() < 1e-12);
            assert!((h.eval_h(z, 0.0) - prof.eval(s)).abs() < 1e-14);
        }
        assert!(perturbed().radial_profile().is_none());
    }

    #[test]
    fn perturbation_gradient_at_origin() {
        let h = HamiltonianSpec::perturbation(1, TimeProfile::Constant, 0.3);
        let g = h.gradient(P::zero(), 0.0);
        let fd = fd_gradient(&h, P::zero(), 0.0);
        assert!((g - fd).norm() < 1e-6);
        let x = h.eval_x(P::zero(), 0.0);
        assert!((x - Vec2::new(fd.y, -fd.x)).norm() < 1e-6);
    }

    #[test]
    fn time_reversal_negates_and_flips_time() {
        for h in zoo() {
            let r = h.time_reversed();
            for k in 0..20 {
                let z = P::polar(0.045 * k as f64, 1.3 * k as f64);
                let t = 0.05 * k as f64 + 0.013;
                let expected = -h.eval_h(z, 1.0 - t);
                assert!((r.eval_h(z, t) - expected).abs() < 1e-13, "{h:?} at t={t}");
            }
        }
    }

    #[test]
    fn polynomial_calculus() {
        let p = Polynomial::<f64>::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative().coeffs, vec![2.0, 6.0]);
        assert!((p.integral_from_zero(1.0) - 3.0).abs() < 1e-15);
        assert_eq!(p.mul(&Polynomial::new(vec![0.0, 1.0])).coeffs, vec![0.0, 1.0, 2.0, 3.0]);
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(r in 0.0f64..0.98, a in 0.0f64..6.3, t in 0.0f64..1.0, idx in 0usize..6) {
            let h = &zoo()[idx];
            // stay away from the concatenation junctions
            prop_assume!((t - 0.5).abs() > 1e-5 && t > 1e-5);
            let z = P::polar(r, a);
            let g = h.gradient(z, t);
            let fd = fd_gradient(h, z, t);
            prop_assert!((g - fd).norm() < 1e-6, "{:?} vs {:?}", g, fd);
        }

        #[test]
        fn sign_convention_omega_x_equals_dh(r in 0.0f64..0.99, a in 0.0f64..6.3, t in 0.0f64..1.0,
                                             vx in -1.0f64..1.0, vy in -1.0f64..1.0, idx in 0usize..6) {
            let h = &zoo()[idx];
            let z = P::polar(r, a);
            let v = Vec2::new(vx, vy);
            let x = h.eval_x(z, t);
            prop_assert!((x.cross(v) - h.gradient(z, t).dot(v)).abs() < 1e-10);
        }

        #[test]
        fn field_is_divergence_free(r in 0.0f64..0.97, a in 0.0f64..6.3, t in 0.01f64..0.49, idx in 0usize..6) {
            let h = &zoo()[idx];
            let z = P::polar(r, a);
            let e = 1e-5;
            let div = (h.eval_x(P::new(z.x + e, z.y), t).x - h.eval_x(P::new(z.x - e, z.y), t).x
                + h.eval_x(P::new(z.x, z.y + e), t).y - h.eval_x(P::new(z.x, z.y - e), t).y) / (2.0 * e);
            prop_assert!(div.abs() < 1e-6);
        }
    }
}
