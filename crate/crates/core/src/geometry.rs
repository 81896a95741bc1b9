//! Planar vectors, angle increments and continuous angle lifts.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Slack allowed on `|z| <= 1` for points that should lie in the closed disk.
pub const DISK_SLACK: f64 = 1e-12;

/// Norm below which a direction vector is treated as degenerate.
pub const ZERO_NORM: f64 = 1e-14;

/// A vector (or point) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

/// Points and vectors share a representation.
pub type Point2<T> = Vec2<T>;

impl<T: Scalar> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// The unit vector at angle `theta`.
    #[inline]
    pub fn polar(r: T, theta: T) -> Self {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// The scalar `self.x * o.y - self.y * o.x`, i.e. `dx∧dy(self, o)`.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    /// Counterclockwise rotation by a quarter turn (multiplication by `i`).
    #[inline]
    pub fn rotate90(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Complex product `self * conj(o)`; its argument is `arg(self) - arg(o)`.
    #[inline]
    pub fn mul_conj(self, o: Self) -> Self {
        Self::new(o.dot(self), o.cross(self))
    }

    /// Argument in `(-π, π]`, with `-0.0` in the y slot treated as `+0.0`.
    #[inline]
    pub fn arg(self) -> T {
        (self.y + T::zero()).atan2(self.x)
    }

    #[inline]
    pub fn lerp(self, o: Self, s: T) -> Self {
        self + (o - self).scale(s)
    }

    pub fn cast<U: Scalar>(self) -> Vec2<U> {
        Vec2::new(U::of(self.x.as_f64()), U::of(self.y.as_f64()))
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x = self.x + o.x;
        self.y = self.y + o.y;
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Counterclockwise quarter-turn rotation `(x, y) -> (-y, x)`.
#[inline]
pub fn rotate90<T: Scalar>(v: Vec2<T>) -> Vec2<T> {
    v.rotate90()
}

/// Signed angle `δ ∈ (-π, π]` that rotates `prev` onto the direction of `next`.
pub fn angle_increment<T: Scalar>(prev: Vec2<T>, next: Vec2<T>) -> Result<T> {
    let tiny = T::of(ZERO_NORM);
    for v in [prev, next] {
        let n = v.norm();
        if !(n >= tiny) {
            return Err(Error::ZeroVector { norm: n.as_f64() });
        }
    }
    Ok((prev.cross(next) + T::zero()).atan2(prev.dot(next)))
}

/// Continuous lift of the argument of a sequence of nonzero vectors.
///
/// Consecutive vectors must be less than π apart in angle; callers refine
/// their sampling until every step turns by under π/2. The lift itself is
/// computed without per-step trigonometry: it counts signed passages of the
/// negative real axis and evaluates `atan2` only at the two ends.
#[derive(Debug, Clone, Copy)]
pub struct AngleLift<T> {
    start_arg: T,
    last: Vec2<T>,
    wraps: i64,
}

impl<T: Scalar> AngleLift<T> {
    pub fn new(first: Vec2<T>) -> Self {
        Self {
            start_arg: first.arg(),
            last: first,
            wraps: 0,
        }
    }

    /// Appends the next vector of the sequence.
    #[inline]
    pub fn push(&mut self, next: Vec2<T>) {
        self.wraps += negative_axis_passage(self.last, next);
        self.last = next;
    }

    /// Most recently pushed vector.
    #[inline]
    pub fn last(&self) -> Vec2<T> {
        self.last
    }

    /// Total turning angle since the first vector, in radians.
    pub fn total(&self) -> T {
        self.last.arg() - self.start_arg + T::two_pi() * T::of(self.wraps as f64)
    }

    /// Current value of the lift, starting from `arg(first)`.
    pub fn value(&self) -> T {
        self.last.arg() + T::two_pi() * T::of(self.wraps as f64)
    }
}

/// `+1` if the step `a -> b` passes the negative real axis counterclockwise,
/// `-1` if clockwise, `0` otherwise. Points with `y >= 0` (including `-0.0`)
/// count as the upper half-plane, matching [`Vec2::arg`].
#[inline]
pub(crate) fn negative_axis_passage<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> i64 {
    let a_up = a.y >= T::zero();
    let b_up = b.y >= T::zero();
    if a_up == b_up {
        return 0;
    }
    // chord crosses y = 0 at x = cross(a, b) / (b.y - a.y)
    let c = a.cross(b);
    if a_up {
        if c > T::zero() {
            1
        } else {
            0
        }
    } else if c < T::zero() {
        -1
    } else {
        0
    }
}

/// `+1` if the step `a -> b` passes the positive real axis counterclockwise,
/// `-1` if clockwise, `0` otherwise. Same half-plane convention as above.
#[inline]
pub(crate) fn positive_axis_passage<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> i64 {
    let a_up = a.y >= T::zero();
    let b_up = b.y >= T::zero();
    if a_up == b_up {
        return 0;
    }
    let c = a.cross(b);
    if a_up {
        // upper -> lower through positive axis is clockwise
        if c < T::zero() {
            -1
        } else {
            0
        }
    } else if c > T::zero() {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    type V = Vec2<f64>;

    #[test]
    fn rotate90_examples() {
        assert_eq!(rotate90(V::new(1.0, 0.0)), V::new(0.0, 1.0));
        assert_eq!(rotate90(V::new(0.0, 1.0)), V::new(-1.0, 0.0));
        assert_eq!(rotate90(V::new(3.0, 4.0)), V::new(-4.0, 3.0));
    }

    #[test]
    fn angle_increment_examples() {
        let e1 = V::new(1.0, 0.0);
        assert!((angle_increment(e1, V::new(0.0, 1.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_increment(e1, e1).unwrap(), 0.0);
        let d = angle_increment(e1, V::new(0.3f64.cos(), 0.3f64.sin())).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
        // branch: exactly opposite gives +π
        assert_eq!(angle_increment(e1, V::new(-1.0, 0.0)).unwrap(), PI);
    }

    #[test]
    fn angle_increment_rejects_zero() {
        let err = angle_increment(V::new(1e-15, 0.0), V::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::ZeroVector { .. }));
    }

    #[test]
    fn closed_convex_loop_sums_to_full_turn() {
        // ellipse traversed counterclockwise, not centred on the origin
        let n = 1000;
        let pts: Vec<V> = (0..=n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                V::new(0.3 + 2.0 * t.cos(), -0.1 + 0.7 * t.sin())
            })
            .collect();
        let total: f64 = pts
            .windows(2)
            .map(|w| angle_increment(w[0], w[1]).unwrap())
            .sum();
        // the loop of position vectors around the origin turns once
        assert!((total - TAU).abs() < n as f64 * 1e-10);
    }

    fn vec_strategy() -> impl Strategy<Value = V> {
        (0.1f64..3.0, -PI..PI).prop_map(|(r, a)| V::polar(r, a))
    }

    proptest! {
        #[test]
        fn increment_is_antisymmetric(a in vec_strategy(), b in vec_strategy()) {
            let ab = angle_increment(a, b).unwrap();
            let ba = angle_increment(b, a).unwrap();
            prop_assume!(ab != PI && ba != PI);
            prop_assert!((ab + ba).abs() < 1e-12);
        }

        #[test]
        fn lift_matches_summed_increments(
            start in -PI..PI,
            steps in prop::collection::vec((-1.5f64..1.5, 0.2f64..2.0), 1..200),
        ) {
            let mut angle = start;
            let mut prev = V::polar(1.0, angle);
            let mut lift = AngleLift::new(prev);
            let mut summed = 0.0;
            for (d, r) in steps {
                angle += d;
                let next = V::polar(r, angle);
                summed += angle_increment(prev, next).unwrap();
                lift.push(next);
                prev = next;
            }
            prop_assert!((lift.total() - summed).abs() < 1e-9);
        }
    }

    #[test]
    fn lift_handles_negative_zero_on_axis() {
        let mut lift = AngleLift::new(V::new(-1.0, 0.1));
        lift.push(V::new(-1.0, -0.0));
        lift.push(V::new(-1.0, -0.1));
        let expected = 2.0 * (0.1f64).atan();
        assert!((lift.total() - expected).abs() < 1e-14);
    }

    #[test]
    fn positive_axis_passages_are_signed() {
        assert_eq!(positive_axis_passage(V::new(1.0, -0.1), V::new(1.0, 0.1)), 1);
        assert_eq!(positive_axis_passage(V::new(1.0, 0.1), V::new(1.0, -0.1)), -1);
        assert_eq!(positive_axis_passage(V::new(-1.0, -0.1), V::new(-1.0, 0.1)), 0);
        assert_eq!(negative_axis_passage(V::new(-1.0, 0.1), V::new(-1.0, -0.1)), 1);
    }
}
