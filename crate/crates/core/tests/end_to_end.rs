//! End-to-end checks through the public API against oracles that do not
//! share code with the library: polygon areas, exact rotations, and
//! closed-form integrals of the radial profile.

use diskdyn::action::action;
use diskdyn::flow::{advance, iterate_map};
use diskdyn::hamiltonian::{HamiltonianSpec, TimeProfile};
use diskdyn::intersection::intersection_integral;
use diskdyn::oneform::PrimitiveOneForm;
use diskdyn::{FlowConfig, Hamiltonian, Point, QuadratureSpec};

fn perturbed() -> Hamiltonian {
    HamiltonianSpec::radial(vec![1.0], 1.0).plus(HamiltonianSpec::perturbation(2, TimeProfile::Cos, 0.1))
}

fn shoelace(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() / 2.0
}

#[test]
fn time_one_map_preserves_polygon_area() {
    let cfg = FlowConfig::default();
    let spec = perturbed();
    let centre = Point::new(0.2, -0.35);
    let ring: Vec<Point> = (0..400)
        .map(|k| centre + Point::polar(0.05, std::f64::consts::TAU * k as f64 / 400.0))
        .collect();
    let image: Vec<Point> = ring
        .iter()
        .map(|&z| iterate_map(&spec, z, 1, &cfg).unwrap()[1])
        .collect();
    let (before, after) = (shoelace(&ring), shoelace(&image));
    // both polygons carry the same O(1/400²) chord error
    assert!((after / before - 1.0).abs() < 1e-4, "{before} -> {after}");
}

#[test]
fn reversed_hamiltonian_undoes_the_map() {
    let cfg = FlowConfig::default();
    let spec = perturbed();
    let back = spec.time_reversed();
    for z in [Point::new(0.1, 0.7), Point::new(-0.45, -0.3), Point::new(0.0, 0.0)] {
        let w = advance(&spec, z, 0.0, 1.0, &cfg).unwrap().end();
        let r = advance(&back, w, 0.0, 1.0, &cfg).unwrap().end();
        assert!((r - z).norm() < 1e-9, "{z:?} -> {r:?}");
    }
}

#[test]
fn radial_map_is_the_exact_rotation() {
    let cfg = FlowConfig::default();
    let spec = HamiltonianSpec::radial(vec![1.0], 0.5);
    for r in [0.1, 0.5, 0.9] {
        let z = Point::new(r, 0.0);
        let w = advance(&spec, z, 0.0, 1.0, &cfg).unwrap().end();
        // rotation by -2h'(r²) = 4A(1 - r²)
        let expected = Point::polar(r, 2.0 * (1.0 - r * r));
        assert!((w - expected).norm() < 1e-9);
    }
}

#[test]
fn intersection_integral_at_a_fixed_point_is_the_action() {
    // the origin is fixed by a radial map, where ∫ I(0, y) dy = a(0) = h(0)
    let cfg = FlowConfig::with_steps(128);
    let spec = HamiltonianSpec::radial(vec![1.0], 1.0);
    let quad = QuadratureSpec::monte_carlo(3000, 11);
    let est = intersection_integral(&spec, Point::zero(), Point::new(0.0, -1.0), 1, &quad, &cfg).unwrap();
    let a = action(&spec, &PrimitiveOneForm::radial(), Point::zero(), &cfg).unwrap().value;
    assert!((a - 1.0).abs() < 1e-12);
    assert!((est.estimate.value - a).abs() <= 3.0 * est.estimate.error, "{est:?}");
}
