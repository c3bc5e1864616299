//! Small fixed-size 2D vectors and matrices over a [`Scalar`].

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2<T>(pub [T; 2]);

/// Row-major 2×2 matrix: `m.0[i][j]` is row `i`, column `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Scalar> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self([x, y])
    }

    #[inline]
    pub fn zero() -> Self {
        Self([T::zero(); 2])
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Self([self.0[0] * s, self.0[1] * s])
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Vec2<U> {
        Vec2([f(self.0[0]), f(self.0[1])])
    }
}

impl<T: Scalar> Mat2<T> {
    #[inline]
    pub fn new(a00: T, a01: T, a10: T, a11: T) -> Self {
        Self([[a00, a01], [a10, a11]])
    }

    #[inline]
    pub fn zero() -> Self {
        Self([[T::zero(); 2]; 2])
    }

    #[inline]
    pub fn identity() -> Self {
        Self([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    #[inline]
    pub fn diag(a: T, b: T) -> Self {
        Self([[a, T::zero()], [T::zero(), b]])
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    #[inline]
    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    #[inline]
    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1]
    }

    /// Cofactor-based inverse; the caller is responsible for `det != 0`.
    #[inline]
    pub fn inverse_with_det(&self, det: T) -> Self {
        let m = &self.0;
        let inv = T::one() / det;
        Self([
            [m[1][1] * inv, -m[0][1] * inv],
            [-m[1][0] * inv, m[0][0] * inv],
        ])
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        let m = &self.0;
        Self([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Frobenius product `A : B`.
    #[inline]
    pub fn ddot(&self, other: &Self) -> T {
        let (a, b) = (&self.0, &other.0);
        a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vec2<T>) -> Vec2<T> {
        let m = &self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat2<U> {
        let m = &self.0;
        Mat2([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    /// Frobenius norm of the real part.
    pub fn norm_re(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|x| x.re() * x.re())
            .sum::<f64>()
            .sqrt()
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, r: Self) -> Self {
        Self([self.0[0] + r.0[0], self.0[1] + r.0[1]])
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, r: Self) -> Self {
        Self([self.0[0] - r.0[0], self.0[1] - r.0[1]])
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1]])
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, r: Self) {
        self.0[0] += r.0[0];
        self.0[1] += r.0[1];
    }
}

impl<T> Index<usize> for Vec2<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec2<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;
    #[inline]
    fn add(self, r: Self) -> Self {
        let (a, b) = (&self.0, &r.0);
        Self([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, r: Self) -> Self {
        let (a, b) = (&self.0, &r.0);
        Self([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl<T: Scalar> Neg for Mat2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Scalar> AddAssign for Mat2<T> {
    #[inline]
    fn add_assign(&mut self, r: Self) {
        *self = *self + r;
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, r: Self) -> Self {
        let (a, b) = (&self.0, &r.0);
        Self([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl<T> Index<(usize, usize)> for Mat2<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat2<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}
