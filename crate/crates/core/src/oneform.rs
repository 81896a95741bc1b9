//! Primitives of `ω₀ = dx∧dy` and their line integrals.

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::geometry::{Point2, Vec2};
use crate::quadrature::{gauss_legendre, piecewise_simpson};
use crate::scalar::Scalar;

/// Gauge polynomials are limited to this total degree.
pub const MAX_GAUGE_DEGREE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasePrimitive {
    /// `(x dy - y dx) / 2`
    #[default]
    Radial,
    /// `x dy`
    Vertical,
    /// `-y dx`
    Horizontal,
}

impl BasePrimitive {
    pub const ALL: [BasePrimitive; 3] = [
        BasePrimitive::Radial,
        BasePrimitive::Vertical,
        BasePrimitive::Horizontal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasePrimitive::Radial => "radial",
            BasePrimitive::Vertical => "vertical",
            BasePrimitive::Horizontal => "horizontal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    /// Each base equals the radial form plus `c · d(xy/2)`; returns `c`.
    fn offset_from_radial(self) -> f64 {
        match self {
            BasePrimitive::Radial => 0.0,
            BasePrimitive::Vertical => 1.0,
            BasePrimitive::Horizontal => -1.0,
        }
    }
}

/// One monomial `c · xⁱ yʲ` of a gauge polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial<T> {
    pub i: u32,
    pub j: u32,
    pub c: T,
}

/// Smooth gauge `u(x, y) = Σ c xⁱ yʲ` of degree at most four.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GaugeFunction<T> {
    terms: Vec<Monomial<T>>,
}

impl<T: Scalar> GaugeFunction<T> {
    pub fn new(terms: Vec<Monomial<T>>) -> Result<Self> {
        if let Some(m) = terms.iter().find(|m| m.i + m.j > MAX_GAUGE_DEGREE) {
            return Err(Error::InvalidArgument(format!(
                "gauge monomial x^{} y^{} exceeds degree {MAX_GAUGE_DEGREE}",
                m.i, m.j
            )));
        }
        Ok(Self { terms })
    }

    /// `u = c · x y`.
    pub fn xy(c: T) -> Self {
        Self {
            terms: vec![Monomial { i: 1, j: 1, c }],
        }
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn value(&self, z: Point2<T>) -> T {
        self.terms
            .iter()
            .map(|m| m.c * z.x.powi(m.i as i32) * z.y.powi(m.j as i32))
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn gradient(&self, z: Point2<T>) -> Vec2<T> {
        let mut g = Vec2::zero();
        for m in &self.terms {
            if m.i > 0 {
                g.x = g.x + m.c * T::of(m.i as f64) * z.x.powi(m.i as i32 - 1) * z.y.powi(m.j as i32);
            }
            if m.j > 0 {
                g.y = g.y + m.c * T::of(m.j as f64) * z.x.powi(m.i as i32) * z.y.powi(m.j as i32 - 1);
            }
        }
        g
    }

    /// `max |u|` over the closed disk, bounded by `Σ |c|`.
    pub fn sup_bound(&self) -> T {
        self.terms.iter().map(|m| m.c.abs()).fold(T::zero(), |a, b| a + b)
    }
}

/// A primitive `λ = λ_base + du` of `ω₀`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrimitiveOneForm<T> {
    pub base: BasePrimitive,
    pub gauge: Option<GaugeFunction<T>>,
}

impl<T: Scalar> PrimitiveOneForm<T> {
    pub fn new(base: BasePrimitive) -> Self {
        Self { base, gauge: None }
    }

    pub fn radial() -> Self {
        Self::new(BasePrimitive::Radial)
    }

    pub fn with_gauge(mut self, gauge: GaugeFunction<T>) -> Self {
        self.gauge = Some(gauge);
        self
    }

    /// `λ_z(v)`.
    #[inline]
    pub fn eval(&self, z: Point2<T>, v: Vec2<T>) -> T {
        let base = match self.base {
            BasePrimitive::Radial => z.cross(v) * T::of(0.5),
            BasePrimitive::Vertical => z.x * v.y,
            BasePrimitive::Horizontal => -(z.y * v.x),
        };
        match &self.gauge {
            Some(u) => base + u.gradient(z).dot(v),
            None => base,
        }
    }

    /// A function `P` with `λ = (x dy - y dx)/2 + dP`.
    pub fn potential(&self, z: Point2<T>) -> T {
        let offset = T::of(self.base.offset_from_radial()) * z.x * z.y * T::of(0.5);
        offset + self.gauge.as_ref().map_or(T::zero(), |u| u.value(z))
    }

    /// Bound on `sup |P_self - P_other|` over the disk, where the two forms
    /// differ by `d(P_self - P_other)`.
    pub fn potential_gap_bound(&self, other: &Self) -> T {
        let base = (self.base.offset_from_radial() - other.base.offset_from_radial()).abs() * 0.25;
        let gauges = self.gauge.as_ref().map_or(T::zero(), |u| u.sup_bound())
            + other.gauge.as_ref().map_or(T::zero(), |u| u.sup_bound());
        T::of(base) + gauges
    }
}

/// `∫_{[a,b]} λ` by Gauss–Legendre with `order` nodes.
pub fn segment_integral<T: Scalar>(
    form: &PrimitiveOneForm<T>,
    a: Point2<T>,
    b: Point2<T>,
    order: usize,
) -> Result<T> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("segment order {order} < 2")));
    }
    let dir = b - a;
    let half = T::of(0.5);
    Ok(gauss_legendre(order)
        .into_iter()
        .map(|(x, w)| {
            let s = (T::of(x) + T::one()) * half;
            T::of(w) * half * form.eval(a + dir.scale(s), dir)
        })
        .fold(T::zero(), |acc, v| acc + v))
}

/// `∫ λ(φ̇) dt` over the whole trajectory.
pub fn path_integral<T: Scalar>(form: &PrimitiveOneForm<T>, traj: &Trajectory<T>) -> Result<T> {
    path_integral_range(form, traj, 0, traj.n_steps())
}

/// `∫ λ(φ̇) dt` between nodes `from` and `to` of the trajectory.
pub fn path_integral_range<T: Scalar>(
    form: &PrimitiveOneForm<T>,
    traj: &Trajectory<T>,
    from: usize,
    to: usize,
) -> Result<T> {
    if !traj.has_velocities() {
        return Err(Error::MissingVelocities);
    }
    if from > to || to > traj.n_steps() {
        return Err(Error::InvalidArgument("invalid node range".into()));
    }
    Ok(piecewise_simpson(
        to - from,
        traj.dt(),
        |j| form.eval(traj.point(from + j), traj.velocity(from + j)),
        |j| form.eval(traj.point(from + j), traj.left_velocity(from + j)),
    ))
}
