//! ALE kinematics and constitutive laws at a quadrature point.

use crate::scalar::Scalar;
use crate::tensor::Mat2;

/// `F = I + ∇u`, `J = det F`, `F⁻¹` and `F⁻ᵀ`.
#[derive(Clone, Copy, Debug)]
pub struct Kinematics<T> {
    pub f: Mat2<T>,
    pub j: T,
    pub f_inv: Mat2<T>,
    pub f_inv_t: Mat2<T>,
}

/// `J ≤ 0`: the ALE map is not invertible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Degenerate(pub f64);

pub fn kinematics<T: Scalar>(grad_u: Mat2<T>) -> Result<Kinematics<T>, Degenerate> {
    let f = Mat2::identity() + grad_u;
    let j = f.det();
    if !(j.re() > 0.0) {
        return Err(Degenerate(j.re()));
    }
    let f_inv = f.inverse_with_det(j);
    Ok(Kinematics {
        f,
        j,
        f_inv,
        f_inv_t: f_inv.transpose(),
    })
}

/// `δ(F⁻¹) = −F⁻¹ δF F⁻¹` for `δF = ∇δu`.
pub fn d_f_inv(kin: &Kinematics<f64>, d_grad_u: Mat2<f64>) -> Mat2<f64> {
    -(kin.f_inv * d_grad_u * kin.f_inv)
}

/// `δJ = J tr(F⁻¹ δF)`.
pub fn d_jacobian(kin: &Kinematics<f64>, d_grad_u: Mat2<f64>) -> f64 {
    kin.j * (kin.f_inv * d_grad_u).trace()
}

/// Fluid stress split `(σ_vu, σ_p)` with
/// `σ_vu = ρν(∇v F⁻¹ + F⁻ᵀ ∇vᵀ)` and `σ_p = −p I`.
pub fn fluid_stress_split<T: Scalar>(
    grad_v: Mat2<T>,
    p: T,
    kin: &Kinematics<T>,
    rho_nu: T,
) -> (Mat2<T>, Mat2<T>) {
    let a = grad_v * kin.f_inv;
    let vu = (a + kin.f_inv_t * grad_v.transpose()).scale(rho_nu);
    (vu, Mat2::identity().scale(-p))
}

/// Green-Lagrange strain `E = ½(FᵀF − I)`.
pub fn green_lagrange<T: Scalar>(grad_u: Mat2<T>) -> Mat2<T> {
    let f = Mat2::identity() + grad_u;
    (f.transpose() * f - Mat2::identity()).scale(T::constant(0.5))
}

/// St. Venant-Kirchhoff second Piola-Kirchhoff stress `Σ = 2μE + λ tr(E) I`.
pub fn svk_stress<T: Scalar>(grad_u: Mat2<T>, mu: T, lambda: T) -> Mat2<T> {
    let e = green_lagrange(grad_u);
    e.scale(T::constant(2.0) * mu) + Mat2::identity().scale(lambda * e.trace())
}

/// First Piola-Kirchhoff stress `FΣ`.
pub fn solid_pk1<T: Scalar>(grad_u: Mat2<T>, mu: T, lambda: T) -> Mat2<T> {
    (Mat2::identity() + grad_u) * svk_stress(grad_u, mu, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Mat2<f64>, b: Mat2<f64>, tol: f64) -> bool {
        (a - b).norm_re() <= tol
    }

    #[test]
    fn identity_state() {
        let k = kinematics(Mat2::<f64>::zero()).unwrap();
        assert_eq!(k.j, 1.0);
        assert_eq!(k.f, Mat2::identity());
        assert_eq!(k.f_inv, Mat2::identity());
    }

    #[test]
    fn diagonal_gradient_determinant() {
        let k = kinematics(Mat2::<f64>::diag(0.1, 0.2)).unwrap();
        assert!((k.j - 1.32).abs() < 1e-15);
    }

    #[test]
    fn collapsed_map_is_flagged() {
        assert_eq!(kinematics(Mat2::diag(-1.0, 0.0)).unwrap_err(), Degenerate(0.0));
        assert!(kinematics(Mat2::diag(-1.5, 0.0)).is_err());
    }

    #[test]
    fn stress_split_examples() {
        let k = kinematics(Mat2::<f64>::zero()).unwrap();
        let (vu, p) = fluid_stress_split(Mat2::zero(), 1.0, &k, 1e-3);
        assert_eq!(vu, Mat2::zero());
        assert_eq!(p, Mat2::identity().scale(-1.0));
        let (vu, _) = fluid_stress_split(Mat2::new(0.0, 1.0, 0.0, 0.0), 0.0, &k, 1e-3);
        assert!(close(vu, Mat2::new(0.0, 1e-3, 1e-3, 0.0), 1e-18));
    }

    #[test]
    fn svk_hand_value() {
        let mu = 0.5e6;
        let nu: f64 = 0.4;
        let lambda = 2.0 * mu * nu / (1.0 - 2.0 * nu);
        assert!((lambda - 2.0e6).abs() < 1e-6);
        let p = solid_pk1(Mat2::diag(0.1, 0.0), mu, lambda);
        assert!(close(p, Mat2::diag(3.465e5, 2.1e5), 1e-8), "{p:?}");
        assert_eq!(solid_pk1(Mat2::zero(), mu, lambda), Mat2::zero());
    }

    #[test]
    fn svk_stress_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let g = Mat2::new(
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
            );
            let s: Mat2<f64> = svk_stress(g, 1.3, 2.7);
            assert!((s[(0, 1)] - s[(1, 0)]).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_and_determinant_derivatives_agree_with_dual_numbers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let g: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.3..0.3));
            let d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let gm = Mat2::new(g[0], g[1], g[2], g[3]);
            let dm = Mat2::new(d[0], d[1], d[2], d[3]);
            let kin = kinematics(gm).unwrap();
            let dual = Mat2::new(
                Dual::new(g[0], d[0]),
                Dual::new(g[1], d[1]),
                Dual::new(g[2], d[2]),
                Dual::new(g[3], d[3]),
            );
            let kd = kinematics(dual).unwrap();
            assert!((kd.j.eps - d_jacobian(&kin, dm)).abs() < 1e-13);
            let dfi = d_f_inv(&kin, dm);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((kd.f_inv[(i, j)].eps - dfi[(i, j)]).abs() < 1e-13);
                }
            }
        }
    }
}
