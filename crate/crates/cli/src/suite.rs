//! The acceptance suite: criteria AC1–AC11 evaluated on the standard
//! Hamiltonians, one table row per check.
//!
//! Every row is `value <relation> tolerance` together with a note saying
//! where the tolerance comes from. Rows are deterministic for a given seed
//! and scale; timings are kept out of the table and reported separately.

use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use diskdyn::action::window_action;
use diskdyn::calabi::{calabi_report, homomorphism_check, radial_calabi};
use diskdyn::ergodic::{
    action_space_average, cauchy_gaps, log_log_slope, verify_main_theorem_batch, winding_integrals,
    winding_space_average,
};
use diskdyn::flow::{jacobian_determinant, Flow};
use diskdyn::hamiltonian::{HamiltonianSpec, TimeProfile};
use diskdyn::intersection::{intersection_between, intersection_integrals, rotate_anchor};
use diskdyn::oneform::{segment_integral, BasePrimitive, GaugeFunction, Monomial, PrimitiveOneForm};
use diskdyn::quadrature::{
    domain, keyed_rng, uniform_circle_point, uniform_disk_point, DEFAULT_MIN_SEPARATION,
};
use diskdyn::winding::{boundary_winding_between, winding_between, ITERATE_CROSS_CHECK_TOL};
use diskdyn::{Error, FlowConfig, Hamiltonian, OneForm, Point, QuadratureSpec};

use crate::report::{num, Table};

pub const CRITERIA: [&str; 11] = [
    "AC1", "AC2", "AC3", "AC4", "AC5", "AC6", "AC7", "AC8", "AC9", "AC10", "AC11",
];

/// Wall-clock limits stated with the criteria, in seconds.
pub fn runtime_limit(id: &str) -> Option<f64> {
    match id {
        "AC1" => Some(10.0),
        "AC2" => Some(60.0),
        "AC5" => Some(300.0),
        "AC6" => Some(900.0),
        "AC7" => Some(600.0),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Multiplies every Monte Carlo and grid sample count; 1 is full scale.
    pub scale: f64,
    pub flow: FlowConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            scale: 1.0,
            flow: FlowConfig::default(),
        }
    }
}

impl SuiteOptions {
    fn scaled(&self, n: usize, min: usize) -> usize {
        ((n as f64 * self.scale).round() as usize).max(min)
    }

    /// Grid side lengths scale with the square root so the node count scales linearly.
    fn scaled_grid(&self, n: usize) -> usize {
        ((n as f64 * self.scale.sqrt()).round() as usize).max(4)
    }

    /// Seed of an independent Monte Carlo stream for `(criterion, sub)`.
    fn stream_seed(&self, criterion: u64, sub: u64) -> u64 {
        keyed_rng(self.seed, domain::DISK.rotate_left(7), (criterion << 32) | sub).next_u64()
    }

    /// `count` uniform points of the disk scaled by `radius`.
    fn points(&self, criterion: u64, sub: u64, count: usize, radius: f64) -> Vec<Point> {
        (0..count)
            .map(|i| {
                let mut rng = keyed_rng(self.seed, domain::POINTS, (criterion << 40) | (sub << 20) | i as u64);
                uniform_disk_point::<f64, _>(&mut rng).scale(radius)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub criterion: &'static str,
    pub check: String,
    pub spec: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: String,
}

fn at_most(criterion: &'static str, check: &str, spec: &str, value: f64, tolerance: f64, provenance: String) -> Check {
    Check {
        criterion,
        check: check.into(),
        spec: spec.into(),
        value,
        relation: Relation::AtMost,
        tolerance,
        pass: value <= tolerance,
        provenance,
    }
}

fn at_least(criterion: &'static str, check: &str, spec: &str, value: f64, tolerance: f64, provenance: String) -> Check {
    Check {
        relation: Relation::AtLeast,
        pass: value >= tolerance,
        ..at_most(criterion, check, spec, value, tolerance, provenance)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionRun {
    pub id: &'static str,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub seconds: f64,
    pub runtime_limit: Option<f64>,
}

impl CriterionRun {
    /// All checks pass and the criterion ran to completion.
    pub fn pass(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn runtime_ok(&self) -> bool {
        self.runtime_limit.is_none_or(|l| self.seconds < l)
    }
}

#[derive(Debug, Clone)]
pub struct NamedSpec {
    pub name: &'static str,
    pub spec: Hamiltonian,
}

/// `H ≡ 0`; `A(1−s)²` for `A ∈ {0.5, 1, 2}`; the `A = 1` profile plus
/// `0.1·χ(s)·Re(z²)·cos 2πt`.
pub fn standard_suite() -> Vec<NamedSpec> {
    let radial = |a: f64| HamiltonianSpec::radial(vec![1.0], a);
    vec![
        NamedSpec { name: "trivial", spec: HamiltonianSpec::trivial() },
        NamedSpec { name: "radial-A0.5", spec: radial(0.5) },
        NamedSpec { name: "radial-A1", spec: radial(1.0) },
        NamedSpec { name: "radial-A2", spec: radial(2.0) },
        NamedSpec {
            name: "perturbed",
            spec: radial(1.0).plus(HamiltonianSpec::perturbation(2, TimeProfile::Cos, 0.1)),
        },
    ]
}

type Checks = Result<Vec<Check>, Error>;

pub fn run_criterion(id: &'static str, opts: &SuiteOptions) -> CriterionRun {
    let start = Instant::now();
    let result = match id {
        "AC1" => ac1(opts),
        "AC2" => ac2(opts),
        "AC3" => ac3(opts),
        "AC4" => ac4(opts),
        "AC5" => ac5(opts),
        "AC6" => ac6(opts),
        "AC7" => ac7(opts),
        "AC8" => ac8(opts),
        "AC9" => ac9(opts),
        "AC10" => ac10(opts),
        "AC11" => ac11(opts),
        _ => Err(Error::InvalidArgument(format!("unknown criterion {id}"))),
    };
    let (checks, error) = match result {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionRun {
        id,
        checks,
        error,
        seconds: start.elapsed().as_secs_f64(),
        runtime_limit: runtime_limit(id),
    }
}

pub fn run_all(opts: &SuiteOptions) -> Vec<CriterionRun> {
    CRITERIA.iter().map(|id| run_criterion(id, opts)).collect()
}

/// The deterministic pass/fail table.
pub fn table(runs: &[CriterionRun]) -> Table {
    let mut t = Table::new(&["criterion", "check", "spec", "value", "relation", "tolerance", "pass", "provenance"]);
    for run in runs {
        for c in &run.checks {
            t.push(vec![
                c.criterion.into(),
                c.check.clone(),
                c.spec.clone(),
                num(c.value),
                c.relation.symbol().into(),
                num(c.tolerance),
                c.pass.to_string(),
                c.provenance.clone(),
            ]);
        }
        if let Some(e) = &run.error {
            t.push(vec![
                run.id.into(),
                "computation".into(),
                "".into(),
                "NaN".into(),
                "<=".into(),
                num(0.0),
                "false".into(),
                format!("computation failed: {e}"),
            ]);
        }
    }
    t
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Time-one action and endpoint.
fn action_and_end(flow: &Flow<'_, f64>, form: &OneForm, z: Point) -> Result<(f64, Point), Error> {
    let steps = flow.steps_per_unit_time();
    let traj = flow.advance_steps(z, 0, steps)?;
    Ok((window_action(flow, form, &traj, 0, steps)?.value, traj.end()))
}

fn ac1(opts: &SuiteOptions) -> Checks {
    let radial = PrimitiveOneForm::radial();
    let vertical = PrimitiveOneForm::new(BasePrimitive::Vertical);
    let mut out = Vec::new();
    for (si, named) in standard_suite().iter().enumerate() {
        let Some(h) = named.spec.radial_profile() else { continue };
        let dh = h.derivative();
        let flow = Flow::new(&named.spec, &opts.flow)?;
        let zs = opts.points(1, si as u64, 50, 1.0);
        let errs = zs
            .par_iter()
            .map(|&z| {
                let s = z.norm_sq();
                let closed = h.eval(s) - s * dh.eval(s);
                // exact time-one map: rotation by −2h′(r²)
                let fz = rotate_anchor(z, -2.0 * dh.eval(s));
                let u = |p: Point| 0.5 * p.x * p.y;
                let (a, _) = action_and_end(&flow, &radial, z)?;
                let (b, _) = action_and_end(&flow, &vertical, z)?;
                Ok(((a - closed).abs(), (b - (closed + u(fz) - u(z))).abs()))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        out.push(at_most(
            "AC1",
            "max |a - (h - r^2 h')|, radial primitive",
            named.name,
            max_of(errs.iter().map(|e| e.0)),
            1e-6,
            "AC1: 1e-6 over 50 random z".into(),
        ));
        out.push(at_most(
            "AC1",
            "max |a - (h - r^2 h' + u(phi z) - u(z))|, vertical primitive",
            named.name,
            max_of(errs.iter().map(|e| e.1)),
            1e-5,
            "AC1: 1e-5 over 50 random z; x dy = radial + d(xy/2), so the oracle carries the gauge term of u = xy/2 under the exact rotation".into(),
        ));
    }
    Ok(out)
}

/// Fixed gauge used by the identity checks.
fn test_gauge() -> GaugeFunction<f64> {
    let m = |i, j, c| Monomial { i, j, c };
    GaugeFunction::new(vec![m(1, 1, 0.3), m(2, 1, -0.2), m(0, 3, 0.1), m(4, 0, 0.05)]).expect("degree <= 4")
}

fn ac2(opts: &SuiteOptions) -> Checks {
    let suite = standard_suite();
    let lam = PrimitiveOneForm::radial();
    let gauge = test_gauge();
    let lam_u = PrimitiveOneForm::radial().with_gauge(gauge.clone());
    let mut out = Vec::new();
    for (si, named) in suite.iter().enumerate() {
        let psi = &suite[(si + 1) % suite.len()];
        let both = HamiltonianSpec::concat(named.spec.clone(), psi.spec.clone());
        let inverse = named.spec.time_reversed();
        let f_phi = Flow::new(&named.spec, &opts.flow)?;
        let f_psi = Flow::new(&psi.spec, &opts.flow)?;
        let f_both = Flow::new(&both, &opts.flow)?;
        let f_inv = Flow::new(&inverse, &opts.flow)?;

        let zs = opts.points(2, si as u64, 150, 1.0);
        let gaps = zs
            .par_iter()
            .enumerate()
            .map(|(k, &z)| -> Result<f64, Error> {
                Ok(match k % 3 {
                    0 => {
                        let (a, fz) = action_and_end(&f_phi, &lam, z)?;
                        let (b, _) = action_and_end(&f_phi, &lam_u, z)?;
                        (b - a - (gauge.value(fz) - gauge.value(z))).abs()
                    }
                    1 => {
                        let (c, _) = action_and_end(&f_both, &lam, z)?;
                        let (a, fz) = action_and_end(&f_phi, &lam, z)?;
                        let (b, _) = action_and_end(&f_psi, &lam, fz)?;
                        (c - a - b).abs()
                    }
                    _ => {
                        let (ainv, w) = action_and_end(&f_inv, &lam, z)?;
                        let (a, _) = action_and_end(&f_phi, &lam, w)?;
                        (ainv + a).abs()
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let worst = |r: usize| max_of(gaps.iter().skip(r).step_by(3).copied());
        out.push(at_most(
            "AC2",
            "gauge: max |a[l+du] - a[l] - (u o phi - u)|",
            named.name,
            worst(0),
            1e-6,
            "AC2: 1e-6 at 50 random points; u = 0.3xy - 0.2x^2y + 0.1y^3 + 0.05x^4".into(),
        ));
        out.push(at_most(
            "AC2",
            "composition: max |a[psi o phi] - a[phi] - a[psi] o phi|",
            named.name,
            worst(1),
            1e-6,
            format!("AC2: 1e-6 at 50 random points; psi = {}", psi.name),
        ));
        out.push(at_most(
            "AC2",
            "inverse: max |a[phi^-1] + a[phi] o phi^-1|",
            named.name,
            worst(2),
            1e-6,
            "AC2: 1e-6 at 50 random points; phi^-1 from the time-reversed Hamiltonian".into(),
        ));
    }
    Ok(out)
}

fn ac3(opts: &SuiteOptions) -> Checks {
    let mut out = Vec::new();
    for (si, named) in standard_suite().iter().enumerate() {
        let flow = Flow::new(&named.spec, &opts.flow)?;
        let steps = flow.steps_per_unit_time();
        if let Some(h) = named.spec.radial_profile() {
            let dh = h.derivative();
            let origin = flow.advance_steps(Point::zero(), 0, steps)?;
            let errs = (0..50)
                .into_par_iter()
                .map(|i| {
                    let r = (i as f64 + 0.5) / 50.0;
                    let mut rng = keyed_rng(opts.seed, domain::ANCHORS, (3 << 40) | ((si as u64) << 20) | i as u64);
                    let y = uniform_circle_point::<f64, _>(&mut rng).scale(r);
                    let w = winding_between(&origin, &flow.advance_steps(y, 0, steps)?)?.value;
                    Ok((w + dh.eval(r * r) / std::f64::consts::PI).abs())
                })
                .collect::<Result<Vec<_>, Error>>()?;
            out.push(at_most(
                "AC3",
                "max |W(0,y) + h'(r^2)/pi|",
                named.name,
                max_of(errs),
                1e-7,
                "AC3: 1e-7 at 50 radii (i+1/2)/50".into(),
            ));
        }
        let xs = opts.points(3, 2 * si as u64, 200, 1.0);
        let ys = opts.points(3, 2 * si as u64 + 1, 200, 1.0);
        let gaps = xs
            .par_iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let tx = flow.advance_steps(x, 0, steps)?;
                let ty = flow.advance_steps(y, 0, steps)?;
                let w_xy = winding_between(&tx, &ty)?.value;
                let w_yx = winding_between(&ty, &tx)?.value;
                let b_xy = boundary_winding_between(&tx, &ty)?.value;
                let b_yx = boundary_winding_between(&ty, &tx)?.value;
                Ok(((b_xy - w_xy).abs().max((b_yx - w_yx).abs()), (w_xy - w_yx).abs()))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        out.push(at_most(
            "AC3",
            "max |w(x,y) - W(x,y)|",
            named.name,
            max_of(gaps.iter().map(|g| g.0)),
            0.5,
            "AC3: 1/2 over 200 random pairs, both orders".into(),
        ));
        out.push(at_most(
            "AC3",
            "max |W(x,y) - W(y,x)|",
            named.name,
            max_of(gaps.iter().map(|g| g.1)),
            1e-9,
            "AC3: 1e-9 over 200 random pairs".into(),
        ));
    }
    Ok(out)
}

/// Anchors redrawn at most this many times when a triple is not transversal.
const AC4_ANCHOR_REDRAWS: usize = 32;

fn ac4(opts: &SuiteOptions) -> Checks {
    let suite = standard_suite();
    let per_spec = 2000 / suite.len();
    let mut out = Vec::new();
    for n in [1usize, 8] {
        let mut overall = 0.0f64;
        let mut violations = 0usize;
        for (si, named) in suite.iter().enumerate() {
            let flow = Flow::new(&named.spec, &opts.flow)?;
            let steps = n * flow.steps_per_unit_time();
            let sub = (si as u64) * 16 + n as u64;
            let xs = opts.points(4, 2 * sub, per_spec, 1.0);
            let ys = opts.points(4, 2 * sub + 1, per_spec, 1.0);
            let rows = (0..per_spec)
                .into_par_iter()
                .map(|i| {
                    let tx = flow.advance_steps(xs[i], 0, steps)?;
                    let ty = flow.advance_steps(ys[i], 0, steps)?;
                    let w = winding_between(&tx, &ty)?.value;
                    let mut rng = keyed_rng(opts.seed, domain::ANCHORS, (4 << 40) | (sub << 20) | i as u64);
                    let mut redraws = 0;
                    loop {
                        let e = uniform_circle_point::<f64, _>(&mut rng);
                        match intersection_between(&flow, &tx, &ty, e) {
                            Ok(r) => return Ok(((w - r.value as f64).abs(), redraws)),
                            Err(Error::TransversalityFailure { .. }) if redraws < AC4_ANCHOR_REDRAWS => redraws += 1,
                            Err(err) => return Err(err),
                        }
                    }
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let gap = max_of(rows.iter().map(|r| r.0));
            let redrawn: usize = rows.iter().map(|r| r.1).sum();
            violations += rows.iter().filter(|r| r.0 > 1.5).count();
            overall = overall.max(gap);
            out.push(at_most(
                "AC4",
                &format!("max |W - I| over {per_spec} triples, n = {n}"),
                named.name,
                gap,
                1.5,
                format!("AC4: 3/2 with zero violations; {redrawn} non-transversal anchors redrawn"),
            ));
        }
        out.push(at_most(
            "AC4",
            &format!("violations of |W - I| <= 3/2 over 2000 triples, n = {n}"),
            "suite",
            violations as f64,
            0.0,
            format!("AC4: zero violations; max observed gap {}", num(overall)),
        ));
    }
    Ok(out)
}

const AC5_STEPS: usize = 128;

fn ac5(opts: &SuiteOptions) -> Checks {
    let lam = PrimitiveOneForm::radial();
    let e = Point::new(1.0, 0.0);
    let n_base = opts.scaled(8192, 64);
    // every x integrates its own y-stream, so the flow cost is 20x that of a
    // shared stream; at 128 steps the residuals move by < 1e-7 against
    // standard errors of ~1e-2
    let fc = FlowConfig {
        steps_per_unit_time: opts.flow.steps_per_unit_time.min(AC5_STEPS),
        ..opts.flow.clone()
    };
    let mut out = Vec::new();
    let (mut sq_base, mut sq_four, mut count) = (0.0, 0.0, 0usize);
    for (si, named) in standard_suite().iter().enumerate() {
        let flow = Flow::new(&named.spec, &fc)?;
        let xs = opts.points(5, si as u64, 20, 1.0);
        let boundary_terms = xs
            .iter()
            .map(|&x| {
                let (a, fx) = action_and_end(&flow, &lam, x)?;
                Ok(a + segment_integral(&lam, e, x, 16)? - segment_integral(&lam, e, fx, 16)?)
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        // one independent y-stream per x, so residuals of different x are
        // independent and the pooled RMS has the noise the ratio test assumes
        let residuals = |samples: usize, sub: u64| -> Result<Vec<(f64, f64)>, Error> {
            xs.iter()
                .zip(&boundary_terms)
                .enumerate()
                .map(|(k, (&x, b))| {
                    let quad = QuadratureSpec::monte_carlo(samples, opts.stream_seed(5, (sub << 8) | k as u64));
                    let i = intersection_integrals(&named.spec, &[x], e, 1, &quad, &fc)?[0];
                    Ok((i.estimate.value - b, i.estimate.error))
                })
                .collect()
        };
        let base = residuals(n_base, 2 * si as u64)?;
        let four = residuals(4 * n_base, 2 * si as u64 + 1)?;
        // one sample carries weight π/N and I is integer valued: below that the
        // rule cannot resolve anything, and a zero sample SE means nothing
        let floor = std::f64::consts::PI / n_base as f64;
        let worst = max_of(base.iter().map(|(r, se)| r.abs() / (3.0 * se).max(floor)));
        out.push(at_most(
            "AC5",
            &format!("max |residual| / max(3 SE, pi/N), {n_base} samples"),
            named.name,
            worst,
            1.0,
            format!("AC5: 3 MC standard errors over 20 random x, each with its own y-stream, e = (1,0), {} steps; floored at one sample weight pi/N", fc.steps_per_unit_time),
        ));
        if !named.spec.is_trivial() {
            sq_base += base.iter().map(|r| r.0 * r.0).sum::<f64>();
            sq_four += four.iter().map(|r| r.0 * r.0).sum::<f64>();
            count += base.len();
        }
    }
    let (rms_base, rms_four) = ((sq_base / count as f64).sqrt(), (sq_four / count as f64).sqrt());
    out.push(at_most(
        "AC5",
        &format!("RMS residual ratio, {} vs {n_base} samples", 4 * n_base),
        "non-trivial specs",
        rms_four / rms_base,
        0.7,
        format!(
            "AC5: ideal 1/2 for 4x samples, 0.7 allows for noise; independent streams; RMS {} -> {} over {count} points",
            num(rms_base),
            num(rms_four)
        ),
    ));
    Ok(out)
}

fn ac6(opts: &SuiteOptions) -> Checks {
    let lam = PrimitiveOneForm::radial();
    let e = Point::new(1.0, 0.0);
    let n = 64;
    let samples = opts.scaled(4096, 32);
    let mut out = Vec::new();
    for (si, named) in standard_suite().iter().enumerate() {
        let xs = opts.points(6, si as u64, 20, 1.0);
        let quad = QuadratureSpec::monte_carlo(samples, opts.stream_seed(6, si as u64));
        let reports = verify_main_theorem_batch(&named.spec, &xs, &lam, e, n, &quad, &opts.flow)?;
        out.push(at_most(
            "AC6",
            &format!("max residual / budget, n = {n}, {samples} samples"),
            named.name,
            max_of(reports.iter().map(|r| r.residual / r.budget)),
            1.0,
            "AC6: budget (3/2)pi/n + (|int_[e,x] l| + |int_[e,phi^n x] l|)/n + 3 SE over 20 random x".into(),
        ));
        if let Some(h) = named.spec.radial_profile() {
            let dh = h.derivative();
            let closed = |x: Point| {
                let s = x.norm_sq();
                h.eval(s) - s * dh.eval(s)
            };
            out.push(at_most(
                "AC6",
                "max |asymptotic action - (h - r^2 h')|",
                named.name,
                max_of(reports.iter().map(|r| (r.action.value - closed(r.x)).abs())),
                1e-4,
                "AC6: 1e-4 against the closed form".into(),
            ));
            out.push(at_most(
                "AC6",
                "max |winding integral - (h - r^2 h')| / (1e-4 + 3 SE)",
                named.name,
                max_of(reports.iter().map(|r| {
                    (r.winding_integral.value - closed(r.x)).abs() / (1e-4 + 3.0 * r.winding_integral.error)
                })),
                1.0,
                "AC6: 1e-4 + 3 MC standard errors against the closed form".into(),
            ));
        }
    }
    Ok(out)
}

fn ac7(opts: &SuiteOptions) -> Checks {
    let lam = PrimitiveOneForm::radial();
    let grid = QuadratureSpec::polar_grid(opts.scaled_grid(100), opts.scaled_grid(200));
    let pairs = opts.scaled(20_000, 64);
    let mut out = Vec::new();
    for (si, named) in standard_suite().iter().enumerate() {
        let pq = QuadratureSpec::monte_carlo(pairs, opts.stream_seed(7, si as u64));
        let r = calabi_report(&named.spec, &lam, &grid, &pq, &opts.flow)?;
        out.push(at_most(
            "AC7",
            &format!("max pairwise gap, {}x{} grid, {pairs} pairs", grid.n_r, grid.n_theta),
            named.name,
            r.max_pairwise_gap,
            3.0 * r.error_sum() + 1e-12,
            format!(
                "AC7: 3 x (sum of route errors) + 1e-12; routes action {} hamiltonian {} winding {}",
                num(r.via_action.value),
                num(r.via_hamiltonian.value),
                num(r.via_winding.value)
            ),
        ));
        if let Some(exact) = radial_calabi(&named.spec) {
            for (route, est) in [("action", r.via_action), ("hamiltonian", r.via_hamiltonian), ("winding", r.via_winding)] {
                out.push(at_most(
                    "AC7",
                    &format!("|{route} route - 2 pi int h|"),
                    named.name,
                    (est.value - exact).abs(),
                    3.0 * est.error + 1e-9,
                    format!("AC7: 3 x route error + 1e-9 against the symbolic value {}", num(exact)),
                ));
            }
        }
    }
    Ok(out)
}

fn ac8(opts: &SuiteOptions) -> Checks {
    let suite = standard_suite();
    let by_name = |n: &str| suite.iter().find(|s| s.name == n).expect("standard spec").clone();
    let pairs = [
        (by_name("radial-A1"), by_name("trivial")),
        (by_name("radial-A0.5"), by_name("radial-A2")),
        (by_name("perturbed"), by_name("radial-A2")),
    ];
    let lam = PrimitiveOneForm::radial();
    let grid = QuadratureSpec::polar_grid(opts.scaled_grid(64), opts.scaled_grid(64));
    let mut out = Vec::new();
    for (phi, psi) in &pairs {
        let label = format!("{} then {}", phi.name, psi.name);
        let r = homomorphism_check(&phi.spec, &psi.spec, &lam, &grid, &opts.flow)?;
        for (route, est) in [("hamiltonian", r.via_hamiltonian), ("action", r.via_action)] {
            out.push(at_most(
                "AC8",
                &format!("|C(psi o phi) - C(phi) - C(psi)|, {route} route"),
                &label,
                est.value.abs(),
                3.0 * est.error + 1e-9,
                format!("AC8: 3 x grid refinement delta + 1e-9, {}x{} grid", grid.n_r, grid.n_theta),
            ));
        }
    }
    Ok(out)
}

fn ac9(opts: &SuiteOptions) -> Checks {
    let mut out = Vec::new();
    let suite = standard_suite();
    let per_spec = 100 / suite.len();
    for (si, named) in suite.iter().enumerate() {
        let zs = opts.points(9, si as u64, per_spec, 1.0);
        let dets = zs
            .par_iter()
            .map(|&z| Ok((jacobian_determinant(&named.spec, z, &opts.flow, 1e-5)? - 1.0).abs()))
            .collect::<Result<Vec<f64>, Error>>()?;
        out.push(at_most(
            "AC9",
            &format!("max |det D phi - 1| over {per_spec} points"),
            named.name,
            max_of(dets),
            1e-4,
            "AC9: 1e-4; central differences with h = 1e-5".into(),
        ));

        let flow = Flow::new(&named.spec, &opts.flow)?;
        let drift = (0..100)
            .into_par_iter()
            .map(|i| {
                let z = Point::polar(1.0, std::f64::consts::TAU * i as f64 / 100.0);
                Ok((flow.advance_steps(z, 0, flow.steps_per_unit_time())?.end() - z).norm())
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        out.push(at_most(
            "AC9",
            "max |phi(z) - z| on 100 boundary points",
            named.name,
            max_of(drift),
            1e-12,
            "AC9: boundary fixity 1e-12".into(),
        ));

        if named.spec.is_trivial() {
            continue;
        }
        let starts = opts.points(9, 100 + si as u64, 10, 0.9);
        let ends = [64usize, 128, 256]
            .iter()
            .map(|&m| {
                let f = Flow::new(&named.spec, &FlowConfig::with_steps(m))?;
                starts.iter().map(|&z| Ok(f.advance_steps(z, 0, m)?.end())).collect::<Result<Vec<_>, Error>>()
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let diff = |a: &[Point], b: &[Point]| a.iter().zip(b).map(|(p, q)| (*p - *q).norm()).sum::<f64>();
        let (d1, d2) = (diff(&ends[0], &ends[1]), diff(&ends[1], &ends[2]));
        out.push(at_least(
            "AC9",
            "observed RK4 order log2(|p64 - p128| / |p128 - p256|)",
            named.name,
            (d1 / d2).log2(),
            3.8,
            "AC9: order >= 3.8 by step halving, summed over 10 random points".into(),
        ));
    }
    Ok(out)
}

fn ac10(opts: &SuiteOptions) -> Checks {
    let lam = PrimitiveOneForm::radial();
    let samples = opts.scaled(1024, 16);
    let mut out = Vec::new();
    for (si, named) in standard_suite().iter().enumerate() {
        for n in [16usize, 64] {
            let sub = (si as u64) * 256 + n as u64;
            let quad = QuadratureSpec::monte_carlo(samples, opts.stream_seed(10, 2 * sub));
            let a = action_space_average(&named.spec, &lam, n, &quad, &opts.flow)?;
            let c = 2.0 * a.sup;
            out.push(at_most(
                "AC10",
                &format!("|int A_n a - int a|, n = {n}, {samples} samples"),
                named.name,
                a.difference.value.abs(),
                c / n as f64 + 3.0 * a.difference.error,
                format!("AC10: C/n + 3 paired SE with C = 2 max|a| = {}", num(c)),
            ));
            let pq = QuadratureSpec::monte_carlo(samples, opts.stream_seed(10, 2 * sub + 1));
            let w = winding_space_average(&named.spec, n, &pq, DEFAULT_MIN_SEPARATION, &opts.flow)?;
            let c = 2.0 * w.sup;
            out.push(at_most(
                "AC10",
                &format!("|int W_n/n - int W|, n = {n}, {samples} pairs"),
                named.name,
                w.difference.value.abs(),
                c / n as f64 + 3.0 * w.difference.error,
                format!("AC10: C/n + 3 paired SE with C = 2 max|W| = {}", num(c)),
            ));
        }

        let ns = [16usize, 32, 64, 128];
        let cauchy = opts.scaled(512, 8);
        let quad = QuadratureSpec::monte_carlo(cauchy, opts.stream_seed(10, 1 << 20 | si as u64));
        let gaps = cauchy_gaps(&named.spec, Point::zero(), &ns, &quad, &opts.flow)?;
        let listed = gaps.iter().map(|g| num(*g)).collect::<Vec<_>>().join(" ");
        if named.spec.radial_profile().is_some() {
            // x = 0 is fixed and every y rotates rigidly: W_n/n does not depend
            // on n, so the gaps are zero up to integrator drift
            out.push(at_most(
                "AC10",
                "max Cauchy gap at x = 0 (identically zero for a rotation)",
                named.name,
                max_of(gaps.iter().copied()),
                ITERATE_CROSS_CHECK_TOL,
                format!("AC10: nothing to decay; per-iterate winding integrator tolerance; gaps {listed}"),
            ));
        } else {
            let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
            out.push(at_most(
                "AC10",
                &format!("log-log slope of Cauchy gaps at x = 0, n = 16..128, {cauchy} samples"),
                named.name,
                log_log_slope(&xs, &gaps),
                -0.8,
                format!("AC10: decay at rate >= 0.8/n; gaps {listed}"),
            ));
        }
    }
    Ok(out)
}

/// A small mixed workload whose every output bit is compared across pools.
fn determinism_probe(opts: &SuiteOptions) -> Result<Vec<u64>, Error> {
    let spec = &standard_suite()[4].spec;
    let lam = PrimitiveOneForm::radial();
    let xs = opts.points(11, 0, 3, 1.0);
    let quad = QuadratureSpec::monte_carlo(96, opts.stream_seed(11, 0));
    let mut bits = Vec::new();
    let r = calabi_report(spec, &lam, &QuadratureSpec::polar_grid(8, 8), &quad, &opts.flow)?;
    bits.extend([r.via_action.value, r.via_winding.value, r.via_winding.error].map(f64::to_bits));
    for i in intersection_integrals(spec, &xs, Point::new(1.0, 0.0), 2, &quad, &opts.flow)? {
        bits.extend([i.estimate.value, i.estimate.error].map(f64::to_bits));
    }
    for row in winding_integrals(spec, &xs, &[1, 4], &quad, &opts.flow)? {
        bits.extend(row.iter().flat_map(|e| [e.value.to_bits(), e.error.to_bits()]));
    }
    let a = action_space_average(spec, &lam, 4, &quad, &opts.flow)?;
    bits.extend([a.averaged.value, a.difference.error].map(f64::to_bits));
    Ok(bits)
}

fn ac11(opts: &SuiteOptions) -> Checks {
    let run = |threads: usize| -> Result<Vec<u64>, Error> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| determinism_probe(opts))
    };
    let one = run(1)?;
    let many = run(4)?;
    let mismatches = one.iter().zip(&many).filter(|(a, b)| a != b).count() + one.len().abs_diff(many.len());
    Ok(vec![at_most(
        "AC11",
        &format!("differing output bits, 1 vs 4 workers, {} values", one.len()),
        "perturbed",
        mismatches as f64,
        0.0,
        "AC11: bit-identical; the full CSV comparison across --threads runs the binary twice".into(),
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_has_five_specs() {
        let s = standard_suite();
        assert_eq!(s.len(), 5);
        assert!(s[0].spec.is_trivial());
        assert!(s[4].spec.radial_profile().is_none());
    }

    #[test]
    fn points_are_reproducible_and_inside() {
        let o = SuiteOptions::default();
        let a = o.points(1, 2, 30, 1.0);
        assert_eq!(a, o.points(1, 2, 30, 1.0));
        assert_ne!(a, o.points(1, 3, 30, 1.0));
        assert!(a.iter().all(|p| p.norm() < 1.0));
    }

    #[test]
    fn failed_criterion_becomes_a_row() {
        let run = CriterionRun {
            id: "AC1",
            checks: Vec::new(),
            error: Some("boom".into()),
            seconds: 0.0,
            runtime_limit: None,
        };
        assert!(!run.pass());
        let bytes = table(&[run]).to_bytes().unwrap();
        assert!(String::from_utf8(bytes).unwrap().contains("computation failed: boom"));
    }

    #[test]
    fn relations() {
        assert!(at_most("AC1", "", "", 1.0, 1.0, String::new()).pass);
        assert!(!at_most("AC1", "", "", f64::NAN, 1.0, String::new()).pass);
        assert!(at_least("AC9", "", "", 4.0, 3.8, String::new()).pass);
        assert!(!at_least("AC9", "", "", 3.0, 3.8, String::new()).pass);
    }
}
