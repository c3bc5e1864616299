//! Scalar abstraction for the pointwise forms.
//!
//! Everything evaluated at a quadrature point (kinematics, stresses, the
//! grouped weak-form integrands) is written once against [`Scalar`] and
//! instantiated with `f64` for residuals and with [`Dual`] for exact
//! directional derivatives (state Jacobians, cross-step operators, control
//! sensitivities, functional derivatives).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Float, FromPrimitive, Num, One, Zero};

/// Field type accepted by the pointwise forms.
pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + FromPrimitive
{
    /// Lifts a floating point constant.
    fn constant(value: f64) -> Self;

    /// Real (non-infinitesimal) part as `f64`.
    fn re(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn constant(value: f64) -> Self {
        value
    }

    #[inline]
    fn re(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn constant(value: f64) -> Self {
        value as f32
    }

    #[inline]
    fn re(self) -> f64 {
        self as f64
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Float> Dual<T> {
    #[inline]
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    /// A constant (zero tangent).
    #[inline]
    pub fn cst(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    /// An independent variable seeded with unit tangent.
    #[inline]
    pub fn var(re: T) -> Self {
        Self { re, eps: T::one() }
    }
}

impl<T: Float> PartialOrd for Dual<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<T: Float> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Float> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Float> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<T: Float> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = T::one() / rhs.re;
        Self::new(
            self.re * inv,
            (self.eps * rhs.re - self.re * rhs.eps) * inv * inv,
        )
    }
}

impl<T: Float> Rem for Dual<T> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = (self.re / rhs.re).trunc();
        Self::new(self.re % rhs.re, self.eps - q * rhs.eps)
    }
}

impl<T: Float> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Float> AddAssign for Dual<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Float> SubAssign for Dual<T> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Float> MulAssign for Dual<T> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<T: Float> DivAssign for Dual<T> {
    #[inline]
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl<T: Float> Zero for Dual<T> {
    fn zero() -> Self {
        Self::cst(T::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl<T: Float> One for Dual<T> {
    fn one() -> Self {
        Self::cst(T::one())
    }
}

impl<T: Float> Num for Dual<T> {
    type FromStrRadixErr = T::FromStrRadixErr;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Self::cst)
    }
}

impl<T: Float + FromPrimitive> FromPrimitive for Dual<T> {
    fn from_i64(n: i64) -> Option<Self> {
        T::from_i64(n).map(Self::cst)
    }

    fn from_u64(n: u64) -> Option<Self> {
        T::from_u64(n).map(Self::cst)
    }

    fn from_f64(n: f64) -> Option<Self> {
        T::from_f64(n).map(Self::cst)
    }
}

impl<T: Float + FromPrimitive + Debug + Scalar> Scalar for Dual<T> {
    #[inline]
    fn constant(value: f64) -> Self {
        Self::cst(T::constant(value))
    }

    #[inline]
    fn re(self) -> f64 {
        self.re.re()
    }
}

/// Tangent part of a dual-valued quantity, `0` for plain scalars.
pub trait Tangent {
    fn tangent(self) -> f64;
}

impl Tangent for Dual<f64> {
    #[inline]
    fn tangent(self) -> f64 {
        self.eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic<T: Scalar>(x: T) -> T {
        let three = T::constant(3.0);
        x * x * x - three * x / (x + T::one())
    }

    #[test]
    fn dual_derivative_matches_closed_form() {
        let x = 1.7_f64;
        let d = cubic(Dual::var(x));
        let exact = 3.0 * x * x - 3.0 / ((x + 1.0) * (x + 1.0));
        assert!((d.re - cubic(x)).abs() < 1e-15);
        assert!((d.eps - exact).abs() < 1e-13);
    }

    #[test]
    fn f32_instantiation() {
        let v = cubic(2.0_f32);
        assert!((v.re() - cubic(2.0_f64)).abs() < 1e-5);
    }

    #[test]
    fn ordering_uses_real_part() {
        assert!(Dual::new(1.0, 100.0) < Dual::new(2.0, -5.0));
    }
}
