//! Quadrature results must not depend on the size of the worker pool.

use diskdyn::calabi::calabi_via_winding;
use diskdyn::ergodic::winding_integrals;
use diskdyn::hamiltonian::{HamiltonianSpec, TimeProfile};
use diskdyn::intersection::intersection_integrals;
use diskdyn::{FlowConfig, Point, QuadratureSpec};

fn bits(threads: usize) -> Vec<u64> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let spec = HamiltonianSpec::radial(vec![1.0, 0.5], 0.8).plus(HamiltonianSpec::perturbation(3, TimeProfile::Sin, 0.2));
        let cfg = FlowConfig::with_steps(64);
        let quad = QuadratureSpec::monte_carlo(200, 3);
        let xs = [Point::new(0.1, 0.1), Point::new(-0.6, 0.2)];
        let mut out = Vec::new();
        for i in intersection_integrals(&spec, &xs, Point::new(1.0, 0.0), 2, &quad, &cfg).unwrap() {
            out.extend([i.estimate.value.to_bits(), i.estimate.error.to_bits()]);
        }
        for row in winding_integrals(&spec, &xs, &[1, 3], &quad, &cfg).unwrap() {
            out.extend(row.iter().map(|e| e.value.to_bits()));
        }
        let c = calabi_via_winding(&spec, &quad, &cfg).unwrap();
        out.extend([c.value.to_bits(), c.error.to_bits()]);
        out
    })
}

#[test]
fn bit_identical_across_pools() {
    let one = bits(1);
    assert_eq!(one, bits(2));
    assert_eq!(one, bits(5));
}
