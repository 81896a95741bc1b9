//! Quadrature over the unit disk and over pairs of disk points.
//!
//! Monte Carlo samples come from counter-based ChaCha streams keyed by
//! `(seed, sample index)`, so a sample's value never depends on which worker
//! drew it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scalar::{pairwise_sum, Scalar};

/// Default radius of the diagonal tube excluded from pair sampling.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Midpoint rule in `(r², θ)`, all weights equal.
    PolarGrid,
    /// Independent uniform samples.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub kind: QuadratureKind,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn polar_grid(n_r: usize, n_theta: usize) -> Self {
        Self {
            kind: QuadratureKind::PolarGrid,
            n_r,
            n_theta,
            n_samples: n_r * n_theta,
            seed: 0,
        }
    }

    pub fn monte_carlo(n_samples: usize, seed: u64) -> Self {
        Self {
            kind: QuadratureKind::MonteCarlo,
            n_r: 1,
            n_theta: 1,
            n_samples,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            QuadratureKind::PolarGrid if self.n_r == 0 || self.n_theta == 0 => Err(
                Error::InvalidArgument("polar grid needs n_r >= 1 and n_theta >= 1".into()),
            ),
            QuadratureKind::MonteCarlo if self.n_samples == 0 => Err(Error::InvalidArgument(
                "monte carlo needs n_samples >= 1".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Number of nodes the rule produces.
    pub fn len(&self) -> usize {
        match self.kind {
            QuadratureKind::PolarGrid => self.n_r * self.n_theta,
            QuadratureKind::MonteCarlo => self.n_samples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The same rule at half resolution, used for refinement error estimates.
    pub fn coarsened(&self) -> Self {
        Self {
            n_r: (self.n_r / 2).max(1),
            n_theta: (self.n_theta / 2).max(1),
            n_samples: (self.n_samples / 2).max(1),
            ..*self
        }
    }

    /// The same rule with an independent sample stream.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSample<T> {
    pub point: Point2<T>,
    pub weight: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample<T> {
    pub x: Point2<T>,
    pub y: Point2<T>,
    pub weight: T,
}

#[derive(Debug, Clone)]
pub struct PairQuadrature<T> {
    pub samples: Vec<PairSample<T>>,
    /// Rejected draws divided by total draws.
    pub resample_fraction: f64,
}

/// Domain tags keep independent uses of one seed from sharing streams.
pub mod domain {
    pub const DISK: u64 = 0x6469_736b_0000_0001;
    pub const PAIRS: u64 = 0x7061_6972_0000_0002;
    pub const ANCHORS: u64 = 0x616e_6368_0000_0003;
    pub const POINTS: u64 = 0x706f_696e_0000_0004;
}

/// Counter-based generator for sample `index` of stream `(seed, domain)`.
pub fn keyed_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.rotate_left(17));
    rng.set_stream(index);
    rng
}

/// Uniform point in the disk from two uniforms, `r = √u`, `θ = 2πv`.
pub fn uniform_disk_point<T: Scalar, R: Rng>(rng: &mut R) -> Point2<T> {
    let u: f64 = rng.gen();
    let v: f64 = rng.gen();
    Point2::polar(T::of(u.sqrt()), T::of(std::f64::consts::TAU * v))
}

/// Uniform point on the unit circle.
pub fn uniform_circle_point<T: Scalar, R: Rng>(rng: &mut R) -> Point2<T> {
    let v: f64 = rng.gen();
    Point2::polar(T::one(), T::of(std::f64::consts::TAU * v))
}

/// Nodes and weights of a rule for `∫_𝔻 f ω₀`.
pub fn disk_quadrature<T: Scalar>(spec: &QuadratureSpec) -> Result<Vec<WeightedSample<T>>> {
    spec.validate()?;
    match spec.kind {
        QuadratureKind::PolarGrid => {
            let weight = T::PI() / T::of_usize(spec.n_r * spec.n_theta);
            let mut out = Vec::with_capacity(spec.n_r * spec.n_theta);
            for i in 0..spec.n_r {
                let s = (T::of_usize(i) + T::of(0.5)) / T::of_usize(spec.n_r);
                let r = s.sqrt();
                for j in 0..spec.n_theta {
                    let theta =
                        T::two_pi() * (T::of_usize(j) + T::of(0.5)) / T::of_usize(spec.n_theta);
                    out.push(WeightedSample {
                        point: Point2::polar(r, theta),
                        weight,
                    });
                }
            }
            Ok(out)
        }
        QuadratureKind::MonteCarlo => {
            let weight = T::PI() / T::of_usize(spec.n_samples);
            Ok((0..spec.n_samples)
                .map(|i| {
                    let mut rng = keyed_rng(spec.seed, domain::DISK, i as u64);
                    WeightedSample {
                        point: uniform_disk_point(&mut rng),
                        weight,
                    }
                })
                .collect())
        }
    }
}

/// Independent uniform pairs in `𝔻 × 𝔻` with `|x - y| >= min_separation`.
///
/// Always Monte Carlo (the grid fields of `spec` are ignored); draws that
/// fall inside the diagonal tube are redrawn from the same stream.
pub fn pair_quadrature<T: Scalar>(
    spec: &QuadratureSpec,
    min_separation: f64,
) -> Result<PairQuadrature<T>> {
    if !(0.0..1e-3).contains(&min_separation) {
        return Err(Error::InvalidArgument(format!(
            "min_separation {min_separation} outside [0, 1e-3)"
        )));
    }
    let n = spec.n_samples;
    if n == 0 {
        return Err(Error::InvalidArgument("pair quadrature needs n_samples >= 1".into()));
    }
    let weight = T::PI() * T::PI() / T::of_usize(n);
    let mut rejected = 0usize;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = keyed_rng(spec.seed, domain::PAIRS, i as u64);
        loop {
            let x: Point2<T> = uniform_disk_point(&mut rng);
            let y: Point2<T> = uniform_disk_point(&mut rng);
            if (y - x).norm().as_f64() >= min_separation {
                samples.push(PairSample { x, y, weight });
                break;
            }
            rejected += 1;
        }
    }
    Ok(PairQuadrature {
        samples,
        resample_fraction: rejected as f64 / (rejected + n) as f64,
    })
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate<T> {
    pub value: T,
    /// Monte Carlo standard error, or a refinement delta for grid rules.
    pub error: T,
}

impl<T: Scalar> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            error: T::zero(),
        }
    }
}

/// `Σ wᵢ fᵢ` with a standard error when the weights are Monte Carlo weights.
///
/// For equal weights `w = |Ω|/N` the standard error is `|Ω|·s/√N` with `s`
/// the sample standard deviation; `monte_carlo = false` reports zero error.
pub fn weighted_estimate<T: Scalar>(weights: &[T], values: &[T], monte_carlo: bool) -> Estimate<T> {
    assert_eq!(weights.len(), values.len());
    let terms: Vec<T> = weights.iter().zip(values).map(|(&w, &f)| w * f).collect();
    let value = pairwise_sum(&terms);
    let n = values.len();
    if !monte_carlo || n < 2 {
        return Estimate {
            value,
            error: T::zero(),
        };
    }
    let measure = pairwise_sum(weights);
    let mean = pairwise_sum(values) / T::of_usize(n);
    let sq: Vec<T> = values.iter().map(|&f| (f - mean) * (f - mean)).collect();
    let var = pairwise_sum(&sq) / T::of_usize(n - 1);
    Estimate {
        value,
        error: measure * (var / T::of_usize(n)).sqrt(),
    }
}

/// Composite Simpson rule over `n_steps` uniform intervals of width `dt`.
///
/// `right(j)` and `left(j)` give the integrand's one-sided values at node
/// `j`; panels start with the right value and end with the left value, so a
/// jump at an even node is integrated exactly piecewise. An odd interval
/// count closes with a Simpson 3/8 panel.
pub fn piecewise_simpson<T: Scalar>(
    n_steps: usize,
    dt: T,
    right: impl Fn(usize) -> T,
    left: impl Fn(usize) -> T,
) -> T {
    match n_steps {
        0 => return T::zero(),
        1 => return (right(0) + left(1)) * dt * T::of(0.5),
        _ => {}
    }
    let (simpson_steps, tail) = if n_steps % 2 == 0 {
        (n_steps, false)
    } else {
        (n_steps - 3, true)
    };
    let mut panels = Vec::with_capacity(simpson_steps / 2 + 1);
    for m in (0..simpson_steps).step_by(2) {
        panels.push(right(m) + T::of(4.0) * right(m + 1) + left(m + 2));
    }
    let mut total = pairwise_sum(&panels) * dt / T::of(3.0);
    if tail {
        let m = simpson_steps;
        let w = T::of(3.0) * dt / T::of(8.0);
        total = total + w * (right(m) + T::of(3.0) * (right(m + 1) + right(m + 2)) + left(m + 3));
    }
    total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}
