//! Integrands of the four form groups at one quadrature point.
//!
//! A [`Jet`] packs the pointwise state: values and gradients of v, u, w and
//! the pressure (19 slots). A flux is laid out the same way: the residual
//! contribution of a test function φ is `Σ_s flux[s]·φ[s]`, where `φ[s]` is
//! the test function's own jet.

use super::kinematics::{fluid_stress_split, kinematics, solid_pk1, Degenerate, Kinematics};
use crate::scalar::Scalar;
use crate::tensor::{Mat2, Vec2};

pub const SLOTS: usize = 19;
pub const V: usize = 0;
pub const GRAD_V: usize = 2;
pub const U: usize = 6;
pub const GRAD_U: usize = 8;
pub const W: usize = 12;
pub const GRAD_W: usize = 14;
pub const P: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T>(pub [T; SLOTS]);

impl<T: Scalar> Jet<T> {
    pub fn zero() -> Self {
        Jet([T::zero(); SLOTS])
    }

    #[inline]
    pub fn vec(&self, at: usize) -> Vec2<T> {
        Vec2([self.0[at], self.0[at + 1]])
    }

    /// Gradient block: entry `(i, j)` is `∂_j (field)_i` at slot `at + 2i + j`.
    #[inline]
    pub fn mat(&self, at: usize) -> Mat2<T> {
        let s = &self.0;
        Mat2([[s[at], s[at + 1]], [s[at + 2], s[at + 3]]])
    }

    #[inline]
    fn add_vec(&mut self, at: usize, v: Vec2<T>) {
        self.0[at] += v[0];
        self.0[at + 1] += v[1];
    }

    #[inline]
    fn add_mat(&mut self, at: usize, m: Mat2<T>) {
        self.0[at] += m[(0, 0)];
        self.0[at + 1] += m[(0, 1)];
        self.0[at + 2] += m[(1, 0)];
        self.0[at + 3] += m[(1, 1)];
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(T) -> S) -> Jet<S> {
        Jet(self.0.map(f))
    }
}

/// `w_t·A_T,k(U, U_old) + w_i·A_I(U) + w_p·A_P(U) + w_e·A_E(U) + w_eo·A_E(U_old)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub time: f64,
    pub implicit: f64,
    pub pressure: f64,
    pub explicit_new: f64,
    pub explicit_old: f64,
}

impl Weights {
    pub fn one_step_theta(theta: f64, k: f64) -> Self {
        Self {
            time: 1.0,
            implicit: k,
            pressure: k,
            explicit_new: theta * k,
            explicit_old: (1.0 - theta) * k,
        }
    }

    pub const NONE: Weights = Weights {
        time: 0.0,
        implicit: 0.0,
        pressure: 0.0,
        explicit_new: 0.0,
        explicit_old: 0.0,
    };

    pub fn group(group: Group) -> Self {
        let mut w = Self::NONE;
        match group {
            Group::Time => w.time = 1.0,
            Group::Implicit => w.implicit = 1.0,
            Group::Pressure => w.pressure = 1.0,
            Group::Explicit => w.explicit_new = 1.0,
        }
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    /// A_T,k: time-difference terms (already multiplied by k).
    Time,
    /// A_I: mesh motion and incompressibility.
    Implicit,
    /// A_P: pressure stress.
    Pressure,
    /// A_E: convection, viscous and solid stresses.
    Explicit,
}

/// Coefficients at a point; μ and λ are generic so the control can be seeded.
#[derive(Clone, Copy, Debug)]
pub struct Coefficients<T> {
    pub rho_f: f64,
    pub nu_f: f64,
    pub rho_s: f64,
    pub alpha: f64,
    pub mu: T,
    pub lambda: T,
}

fn c<T: Scalar>(x: f64) -> T {
    T::constant(x)
}

fn fluid_explicit<T: Scalar>(
    jet: &Jet<T>,
    kin: &Kinematics<T>,
    co: &Coefficients<T>,
    weight: f64,
    out: &mut Jet<T>,
) {
    let gv = jet.mat(GRAD_V);
    let conv = (gv * kin.f_inv).mul_vec(&jet.vec(V));
    out.add_vec(V, conv.scale(c::<T>(co.rho_f * weight) * kin.j));
    let (vu, _) = fluid_stress_split(gv, T::zero(), kin, c(co.rho_f * co.nu_f));
    out.add_mat(GRAD_V, (vu * kin.f_inv_t).scale(c::<T>(weight) * kin.j));
}

/// Fluid-cell flux. Fails if `J ≤ 0` for a state that enters with non-zero
/// weight.
pub fn fluid_flux<T: Scalar>(
    cur: &Jet<T>,
    old: &Jet<T>,
    w: &Weights,
    co: &Coefficients<T>,
) -> Result<Jet<T>, Degenerate> {
    let mut out = Jet::zero();
    let kin = kinematics(cur.mat(GRAD_U))?;
    let gv = cur.mat(GRAD_V);
    if w.time != 0.0 {
        let j_old = (Mat2::identity() + old.mat(GRAD_U)).det();
        let j_avg = c::<T>(0.5) * (kin.j + j_old);
        let dv = cur.vec(V) - old.vec(V);
        let du = cur.vec(U) - old.vec(U);
        let mesh_conv = (gv * kin.f_inv).mul_vec(&du);
        let rho = c::<T>(co.rho_f * w.time);
        out.add_vec(V, dv.scale(rho * j_avg) - mesh_conv.scale(rho * kin.j));
    }
    if w.implicit != 0.0 {
        let a = c::<T>(w.implicit * co.alpha);
        out.add_mat(GRAD_U, cur.mat(GRAD_W).scale(a));
        out.add_vec(W, cur.vec(W).scale(a));
        out.add_mat(GRAD_W, cur.mat(GRAD_U).scale(-a));
        out.0[P] += c::<T>(w.implicit) * kin.j * (gv * kin.f_inv).trace();
    }
    if w.pressure != 0.0 {
        let (_, sp) = fluid_stress_split(gv, cur.0[P], &kin, T::zero());
        out.add_mat(GRAD_V, (sp * kin.f_inv_t).scale(c::<T>(w.pressure) * kin.j));
    }
    if w.explicit_new != 0.0 {
        fluid_explicit(cur, &kin, co, w.explicit_new, &mut out);
    }
    if w.explicit_old != 0.0 {
        let kin_old = kinematics(old.mat(GRAD_U))?;
        fluid_explicit(old, &kin_old, co, w.explicit_old, &mut out);
    }
    Ok(out)
}

fn solid_explicit<T: Scalar>(jet: &Jet<T>, co: &Coefficients<T>, weight: f64, out: &mut Jet<T>) {
    let pk1 = solid_pk1(jet.mat(GRAD_U), co.mu, co.lambda);
    out.add_mat(GRAD_V, pk1.scale(c(weight)));
    out.add_vec(U, jet.vec(V).scale(c(-co.rho_s * weight)));
}

/// Solid-cell flux.
pub fn solid_flux<T: Scalar>(
    cur: &Jet<T>,
    old: &Jet<T>,
    w: &Weights,
    co: &Coefficients<T>,
) -> Jet<T> {
    let mut out = Jet::zero();
    if w.time != 0.0 {
        let rho = c::<T>(co.rho_s * w.time);
        out.add_vec(V, (cur.vec(V) - old.vec(V)).scale(rho));
        out.add_vec(U, (cur.vec(U) - old.vec(U)).scale(rho));
    }
    if w.implicit != 0.0 {
        let a = c::<T>(w.implicit * co.alpha);
        out.add_vec(W, cur.vec(W).scale(a));
        out.add_mat(GRAD_W, cur.mat(GRAD_U).scale(-a));
    }
    if w.explicit_new != 0.0 {
        solid_explicit(cur, co, w.explicit_new, &mut out);
    }
    if w.explicit_old != 0.0 {
        solid_explicit(old, co, w.explicit_old, &mut out);
    }
    out
}

/// Do-nothing correction on the outflow boundary, `−ρν J (F⁻ᵀ∇vᵀ) F⁻ᵀ n`
/// tested with ψ^v (only the explicit weights apply).
pub fn outflow_flux<T: Scalar>(
    cur: &Jet<T>,
    old: &Jet<T>,
    normal: [f64; 2],
    w: &Weights,
    co: &Coefficients<T>,
) -> Result<Jet<T>, Degenerate> {
    let mut out = Jet::zero();
    let n = Vec2([c::<T>(normal[0]), c::<T>(normal[1])]);
    for (jet, weight) in [(cur, w.explicit_new), (old, w.explicit_old)] {
        if weight == 0.0 {
            continue;
        }
        let kin = kinematics(jet.mat(GRAD_U))?;
        let t = kin.f_inv_t * jet.mat(GRAD_V).transpose() * kin.f_inv_t;
        let s = c::<T>(-co.rho_f * co.nu_f * weight) * kin.j;
        out.add_vec(V, t.mul_vec(&n).scale(s));
    }
    Ok(out)
}
