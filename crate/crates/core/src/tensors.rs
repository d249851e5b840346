//! The constant metric I_D on D, its restriction to D², the induced form on the
//! a-section D¹_a, their duals, and equivariance residuals.
//!
//! Tangent vectors at a point of D are identified with covectors on F²_ℂ, so
//! they share the coordinate layout of [`DomainPoint`]. Cotangent vectors are
//! vectors of F²_ℂ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::domain::{dual_gram, sample_d2, DomainError, DomainPoint};
use crate::rootsys::EllipticRootSystem;

/// Relative tangency tolerance.
pub const TOL_TANGENT: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("not tangent to the quadric (residual {0:e})")]
    NotTangent(f64),
    #[error("not on the a-section (⟨a,x⟩ = {0})")]
    NotOnSection(Complex64),
    #[error("vector has a nonzero ⟨a,·⟩ component")]
    NotInSectionTangent,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

pub type CVec = DVector<Complex64>;
type CMat = DMatrix<Complex64>;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn bilinear(m: &CMat, v: &CVec, w: &CVec) -> Complex64 {
    (v.transpose() * m * w)[(0, 0)]
}

/// `I*_{F²}(v, w) = vᵀ G⁻¹ w`; the point only records where the value is taken.
pub fn eval_i_d(sys: &EllipticRootSystem, _x: &DomainPoint, v: &CVec, w: &CVec) -> Complex64 {
    bilinear(&dual_gram(sys), v, w)
}

pub fn tangency_residual(sys: &EllipticRootSystem, x: &DomainPoint, v: &CVec) -> f64 {
    let r = bilinear(&dual_gram(sys), &x.coords, v).norm();
    r / (x.norm() * v.norm()).max(f64::MIN_POSITIVE)
}

pub fn eval_i_d2(sys: &EllipticRootSystem, x: &DomainPoint, v: &CVec, w: &CVec) -> Result<Complex64, TensorError> {
    for u in [v, w] {
        let r = tangency_residual(sys, x, u);
        if r > TOL_TANGENT {
            return Err(TensorError::NotTangent(r));
        }
    }
    Ok(eval_i_d(sys, x, v, w))
}

/// Basis of the tangent space `{v : I*(x, v) = 0}` as matrix columns.
pub fn tangent_basis(sys: &EllipticRootSystem, x: &DomainPoint) -> CMat {
    let n = x.dim();
    let grad = dual_gram(sys) * &x.coords;
    let k = (0..n).max_by(|&i, &j| grad[i].norm().total_cmp(&grad[j].norm())).unwrap();
    let mut basis = CMat::zeros(n, n - 1);
    for (col, j) in (0..n).filter(|&j| j != k).enumerate() {
        basis[(j, col)] = Complex64::new(1.0, 0.0);
        basis[(k, col)] = -grad[j] / grad[k];
    }
    basis
}

/// Projects `v` onto the tangent space along the basis direction with the
/// largest dual-form pairing against `x`.
pub fn project_tangent(sys: &EllipticRootSystem, x: &DomainPoint, v: &CVec) -> CVec {
    let grad = dual_gram(sys) * &x.coords;
    let k = (0..x.dim()).max_by(|&i, &j| grad[i].norm().total_cmp(&grad[j].norm())).unwrap();
    let mut out = v.clone();
    out[k] -= grad.dot(v) / grad[k];
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RadicalReport {
    /// Dimension of the radical of I_D restricted to T_x D².
    pub radical_dim: usize,
    /// Distance of the normalized radical direction from the line ℂx.
    pub fiber_residual: f64,
    pub singular_gap: f64,
}

pub fn radical_of_i_d2(sys: &EllipticRootSystem, x: &DomainPoint) -> RadicalReport {
    let t = tangent_basis(sys, x);
    let r = t.transpose() * dual_gram(sys) * &t;
    let svd = r.clone().svd(true, true);
    let mut sv: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    sv.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top = sv[0].0;
    let radical_dim = sv.iter().filter(|(s, _)| *s < 1e-10 * top).count();
    let smallest = sv[sv.len() - 1];
    let second = sv[sv.len() - 2].0;
    // the null vector is the right-singular vector of the smallest singular value
    let v_t = svd.v_t.expect("requested");
    let null: CVec = v_t.row(smallest.1).adjoint().into_owned();
    let dir = &t * null;
    let xn = &x.coords / Complex64::new(x.norm(), 0.0);
    let dn = &dir / Complex64::new(dir.norm(), 0.0);
    let overlap = xn.dotc(&dn);
    let fiber_residual = (&dn - &xn * overlap).norm();
    RadicalReport { radical_dim, fiber_residual, singular_gap: second / smallest.0.max(f64::MIN_POSITIVE) }
}

/// Dual of the quotient form on covectors `ξ` with `⟨ξ, x⟩ = 0`, computed by
/// inverting I_D on a complement of ℂx inside the tangent space.
pub fn dual_i_d2_numeric(sys: &EllipticRootSystem, x: &DomainPoint, xi: &CVec, eta: &CVec) -> Complex64 {
    let n = x.dim();
    let t = tangent_basis(sys, x);
    // complement of ℂx: drop the basis column best aligned with x after
    // re-expressing x in the basis
    let coeffs = t.clone().svd(true, true).solve(&x.coords, 1e-14).expect("svd solve");
    let drop = (0..n - 1).max_by(|&i, &j| coeffs[i].norm().total_cmp(&coeffs[j].norm())).unwrap();
    let mut comp = CMat::zeros(n, n - 2);
    let mut c = 0;
    for j in 0..n - 1 {
        if j != drop {
            comp.set_column(c, &t.column(j));
            c += 1;
        }
    }
    let r = comp.transpose() * dual_gram(sys) * &comp;
    let r_inv = r.try_inverse().expect("quotient form is nondegenerate");
    // ξ restricted to the complement basis
    let xi_c = comp.transpose() * xi;
    let eta_c = comp.transpose() * eta;
    bilinear(&r_inv, &xi_c, &eta_c)
}

/// Closed form `ξᵀ G η` of the same dual.
pub fn dual_i_d2_closed(sys: &EllipticRootSystem, xi: &CVec, eta: &CVec) -> Complex64 {
    bilinear(&sys.gram().to_complex(), xi, eta)
}

fn check_section(x: &DomainPoint) -> Result<(), TensorError> {
    if (x.pair_a() - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(TensorError::NotOnSection(x.pair_a()));
    }
    Ok(())
}

/// Indices `(finite, b, b*)` carrying the coordinates of T D²_a.
pub fn section_indices(sys: &EllipticRootSystem) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sys.l).collect();
    idx.push(sys.idx_b());
    idx.push(sys.idx_b_dual());
    idx
}

/// Lifts reduced coordinates on `(finite, b, b*)` to a D²_a-tangent vector:
/// `⟨a,·⟩`-component zero and the `a*` component fixed by tangency.
pub fn lift_section_tangent(sys: &EllipticRootSystem, x: &DomainPoint, reduced: &CVec) -> CVec {
    let n = x.dim();
    let mut v = CVec::zeros(n);
    for (k, &i) in section_indices(sys).iter().enumerate() {
        v[i] = reduced[k];
    }
    let grad = dual_gram(sys) * &x.coords;
    let ia = sys.idx_a_dual();
    v[ia] = czero();
    v[ia] = -grad.dot(&v) / grad[ia];
    v
}

/// I*_{D¹_a} on tangent vectors of D²_a, through their D²-lifts.
pub fn eval_i_d1a(sys: &EllipticRootSystem, x: &DomainPoint, v: &CVec, w: &CVec) -> Result<Complex64, TensorError> {
    check_section(x)?;
    for u in [v, w] {
        if u[sys.idx_a()].norm() > 1e-12 * u.norm().max(1.0) {
            return Err(TensorError::NotInSectionTangent);
        }
    }
    eval_i_d2(sys, x, v, w)
}

/// Same value from reduced coordinates, via the exact inverse of the Gram
/// matrix of F^a/ℂa on the classes of `(finite, b, b*)`.
pub fn eval_i_d1a_reduced(sys: &EllipticRootSystem, x: &DomainPoint, v: &CVec, w: &CVec) -> Result<Complex64, TensorError> {
    check_section(x)?;
    let idx = section_indices(sys);
    let g = sys.gram();
    let quot = crate::exact::RatMatrix::from_fn(idx.len(), idx.len(), |i, j| g[(idx[i], idx[j])].clone());
    let q_inv = quot.inverse().expect("F^a/ℂa is nondegenerate").to_complex();
    let vr = CVec::from_iterator(idx.len(), idx.iter().map(|&i| v[i]));
    let wr = CVec::from_iterator(idx.len(), idx.iter().map(|&i| w[i]));
    Ok(bilinear(&q_inv, &vr, &wr))
}

/// Induced form on `F^a_ℂ / ℂa` for vectors of `F^a = a^⊥`; `a` lies in its radical.
pub fn quotient_form(sys: &EllipticRootSystem, u: &CVec, w: &CVec) -> Complex64 {
    debug_assert!(u[sys.idx_a_dual()].norm() < 1e-12 && w[sys.idx_a_dual()].norm() < 1e-12);
    bilinear(&sys.gram().to_complex(), u, w)
}

/// The tensor whose equivariance is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TensorId {
    /// I_D on tangent vectors.
    ID,
    /// I_{D²} on tangent vectors of the quadric.
    ID2,
    /// Dual of I_D on cotangent vectors.
    DualID,
    /// Dual of I_{D²} on cotangent vectors annihilating x.
    DualID2,
}

/// A transformation of D: φ(g) for a linear map, or ψ(α).
#[derive(Clone, Debug)]
pub enum Transformation {
    Phi(CMat),
    Psi(Complex64),
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceResult {
    pub tensor: TensorId,
    pub max_residual: f64,
    pub samples: usize,
}

fn random_cvec<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Random cotangent vector with `⟨ξ, x⟩ = 0`.
pub fn random_annihilator<R: Rng>(rng: &mut R, x: &DomainPoint) -> CVec {
    let mut xi = random_cvec(rng, x.dim());
    let k = (0..x.dim()).max_by(|&i, &j| x.coords[i].norm().total_cmp(&x.coords[j].norm())).unwrap();
    xi[k] = czero();
    xi[k] = -x.coords.dot(&xi) / x.coords[k];
    xi
}

/// Pushes `(x, v, w)` or `(x, ξ, η)` forward and compares with the expected weight.
pub fn check_equivariance(sys: &EllipticRootSystem, tensor: TensorId, transformation: &Transformation, samples: usize, seed: u64) -> Result<EquivarianceResult, TensorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.dim();
    let mut max_residual: f64 = 0.0;
    for s in 0..samples {
        let x = sample_d2(sys, seed.wrapping_mul(1000).wrapping_add(s as u64))?;
        let (val, pushed, weight) = match tensor {
            TensorId::ID | TensorId::ID2 => {
                let (mut v, mut w) = (random_cvec(&mut rng, n), random_cvec(&mut rng, n));
                if tensor == TensorId::ID2 {
                    v = project_tangent(sys, &x, &v);
                    w = project_tangent(sys, &x, &w);
                }
                let (y, pv, pw, weight) = push_tangent(transformation, &x, &v, &w)?;
                let val = if tensor == TensorId::ID { eval_i_d(sys, &x, &v, &w) } else { eval_i_d2(sys, &x, &v, &w)? };
                let pushed = if tensor == TensorId::ID { eval_i_d(sys, &y, &pv, &pw) } else { eval_i_d2(sys, &y, &pv, &pw)? };
                (val, pushed, weight)
            }
            TensorId::DualID | TensorId::DualID2 => {
                let (xi, eta) = if tensor == TensorId::DualID2 {
                    (random_annihilator(&mut rng, &x), random_annihilator(&mut rng, &x))
                } else {
                    (random_cvec(&mut rng, n), random_cvec(&mut rng, n))
                };
                let (y, pxi, peta, weight) = push_cotangent(transformation, &x, &xi, &eta)?;
                let (val, pushed) = if tensor == TensorId::DualID {
                    (dual_i_d2_closed(sys, &xi, &eta), dual_i_d2_closed(sys, &pxi, &peta))
                } else {
                    (dual_i_d2_numeric(sys, &x, &xi, &eta), dual_i_d2_numeric(sys, &y, &pxi, &peta))
                };
                (val, pushed, weight)
            }
        };
        let r = (pushed - weight * val).norm() / val.norm().max(1.0);
        max_residual = max_residual.max(r);
    }
    Ok(EquivarianceResult { tensor, max_residual, samples })
}

/// Tangent pushforward: φ(g)_* v = (g⁻¹)ᵀ v, ψ(α)_* v = α v. Returns the weight of I_D.
fn push_tangent(tr: &Transformation, x: &DomainPoint, v: &CVec, w: &CVec) -> Result<(DomainPoint, CVec, CVec, Complex64), TensorError> {
    match tr {
        Transformation::Phi(g) => {
            let it = g.clone().try_inverse().ok_or(DomainError::NotInvertible)?.transpose();
            let y = crate::domain::act_with(&it, x);
            Ok((y, &it * v, &it * w, Complex64::new(1.0, 0.0)))
        }
        Transformation::Psi(al) => {
            let y = crate::domain::scale(*al, x)?;
            Ok((y, v * *al, w * *al, al * al))
        }
    }
}

/// Cotangent transport: φ(g) sends ξ to gξ, ψ(α) sends ξ to ξ/α.
fn push_cotangent(tr: &Transformation, x: &DomainPoint, xi: &CVec, eta: &CVec) -> Result<(DomainPoint, CVec, CVec, Complex64), TensorError> {
    match tr {
        Transformation::Phi(g) => {
            let it = g.clone().try_inverse().ok_or(DomainError::NotInvertible)?.transpose();
            let y = crate::domain::act_with(&it, x);
            Ok((y, g * xi, g * eta, Complex64::new(1.0, 0.0)))
        }
        Transformation::Psi(al) => {
            let y = crate::domain::scale(*al, x)?;
            let inv = Complex64::new(1.0, 0.0) / al;
            Ok((y, xi * inv, eta * inv, inv * inv))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{normalize, SectionSpec};
    use crate::exact::rat;
    use crate::rootsys::{build_system, BaseType, Root};
    use crate::weyl::{reflect, rho, LinearAction};

    fn a1() -> EllipticRootSystem {
        build_system(BaseType::A, 1).unwrap()
    }

    fn unit(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn hyperbolic_slot_pairing() {
        let sys = a1();
        let x = sample_d2(&sys, 1).unwrap();
        // the dual of a hyperbolic plane is hyperbolic with the same off-diagonal 1
        let val = eval_i_d(&sys, &x, &unit(5, sys.idx_a()), &unit(5, sys.idx_a_dual()));
        assert!((val - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let zz = eval_i_d(&sys, &x, &unit(5, 0), &unit(5, 0));
        assert!((zz - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fiber_direction_is_the_radical() {
        let sys = build_system(BaseType::A, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..10 {
            let x = sample_d2(&sys, seed).unwrap();
            let w = project_tangent(&sys, &x, &random_cvec(&mut rng, x.dim()));
            assert!(eval_i_d2(&sys, &x, &x.coords, &w).unwrap().norm() < 1e-12);
            let rep = radical_of_i_d2(&sys, &x);
            assert_eq!(rep.radical_dim, 1);
            assert!(rep.fiber_residual < 1e-10);
        }
    }

    #[test]
    fn non_tangent_is_rejected() {
        let sys = a1();
        let x = sample_d2(&sys, 2).unwrap();
        let v = unit(5, sys.idx_a_dual());
        assert!(matches!(eval_i_d2(&sys, &x, &v, &v), Err(TensorError::NotTangent(_))));
    }

    #[test]
    fn dual_two_routes_agree() {
        let sys = build_system(BaseType::A, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..10 {
            let x = sample_d2(&sys, seed).unwrap();
            let xi = random_annihilator(&mut rng, &x);
            let eta = random_annihilator(&mut rng, &x);
            let a = dual_i_d2_numeric(&sys, &x, &xi, &eta);
            let b = dual_i_d2_closed(&sys, &xi, &eta);
            assert!((a - b).norm() < 1e-10 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn section_form_routes_and_invariance() {
        let sys = a1();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..20 {
            let x = normalize(&SectionSpec::a(), &sample_d2(&sys, seed).unwrap()).unwrap();
            let v = lift_section_tangent(&sys, &x, &random_cvec(&mut rng, 3));
            let w = lift_section_tangent(&sys, &x, &random_cvec(&mut rng, 3));
            let a = eval_i_d1a(&sys, &x, &v, &w).unwrap();
            let b = eval_i_d1a_reduced(&sys, &x, &v, &w).unwrap();
            assert!((a - b).norm() < 1e-12);
            for beta in [Root::new(vec![rat(1)], 0, 0), Root::new(vec![rat(1)], 1, 0)] {
                let g = reflect(&sys, &beta).unwrap().complex_matrix();
                let it = g.clone().try_inverse().unwrap().transpose();
                let y = crate::domain::act_with(&it, &x);
                let c = eval_i_d1a(&sys, &y, &(&it * &v), &(&it * &w)).unwrap();
                assert!((c - a).norm() < 1e-10);
            }
        }
        let a_vec = unit(5, sys.idx_a());
        let other = unit(5, 0) + unit(5, sys.idx_b_dual());
        assert_eq!(quotient_form(&sys, &a_vec, &other), czero());
        let x = sample_d2(&sys, 1).unwrap();
        assert!(matches!(eval_i_d1a(&sys, &x, &a_vec, &a_vec), Err(TensorError::NotOnSection(_))));
    }

    #[test]
    fn equivariance_laws() {
        let sys = a1();
        let w = reflect(&sys, &Root::new(vec![rat(1)], 1, -1)).unwrap().complex_matrix();
        let r = rho(&sys, &rat(-1), Complex64::new(0.4, 0.3)).matrix;
        for tensor in [TensorId::ID, TensorId::ID2, TensorId::DualID, TensorId::DualID2] {
            for tr in [Transformation::Phi(w.clone()), Transformation::Phi(r.clone()), Transformation::Psi(Complex64::new(2.0, 0.0)), Transformation::Psi(Complex64::new(0.5, -0.8))] {
                let res = check_equivariance(&sys, tensor, &tr, 20, 4).unwrap();
                assert!(res.max_residual < 1e-10, "{tensor:?} {tr:?}: {}", res.max_residual);
            }
        }
        let exact = check_equivariance(&sys, TensorId::ID, &Transformation::Psi(Complex64::new(2.0, 0.0)), 5, 1).unwrap();
        assert_eq!(exact.max_residual, 0.0);
    }
}
