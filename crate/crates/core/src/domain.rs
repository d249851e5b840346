//! Points of the period domains D ⊃ D² ⊃ D̊², the ℂ*-action ψ, the group
//! action φ, and section normalizations.
//!
//! A point is a covector on F²_ℂ stored through its values on the basis
//! `(α_1, …, α_l, a, b, a*, b*)`; so `u_a = ⟨a, x⟩`, `u_b = ⟨b, x⟩`,
//! `s_a = ⟨a*, x⟩`, `s_b = ⟨b*, x⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rootsys::{enumerate_roots, EllipticRootSystem};
use crate::weyl::LinearAction;

/// Sign σ in the central weight: the seed `exp(2πi·m·σ·⟨b*, y⟩/c)` picks up
/// `e^{−2πimt}` under ρ(t). Pinned by the sign-sweep test in `invariants`.
pub const RHO_SIGN: f64 = -1.0;

/// Default relative tolerance for the dual-Gram quadric.
pub const TOL_QUADRIC: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("not invertible")]
    NotInvertible,
    #[error("scalar {0} is not in ℂ*")]
    NotInCStar(Complex64),
    #[error("point on the removed divisor {{f = 0}}")]
    OnDivisor,
    #[error("sampling failed after {0} retries")]
    SamplingFailed(usize),
    #[error("coordinate vector has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainPoint {
    pub coords: DVector<Complex64>,
    /// Rank of the finite block; fixes the slot positions.
    pub l: usize,
}

impl DomainPoint {
    pub fn new(l: usize, coords: Vec<Complex64>) -> Result<Self, DomainError> {
        if coords.len() != l + 4 {
            return Err(DomainError::WrongLength { expected: l + 4, got: coords.len() });
        }
        Ok(Self { coords: DVector::from_vec(coords), l })
    }

    pub fn dim(&self) -> usize {
        self.l + 4
    }

    pub fn pair_a(&self) -> Complex64 {
        self.coords[self.l]
    }

    pub fn pair_b(&self) -> Complex64 {
        self.coords[self.l + 1]
    }

    pub fn s_a(&self) -> Complex64 {
        self.coords[self.l + 2]
    }

    pub fn s_b(&self) -> Complex64 {
        self.coords[self.l + 3]
    }

    pub fn tau(&self) -> Complex64 {
        self.pair_b() / self.pair_a()
    }

    /// `⟨v, x⟩` for a vector `v` of F²_ℂ in basis coordinates.
    pub fn pair(&self, v: &[Complex64]) -> Complex64 {
        v.iter().zip(self.coords.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &DomainPoint) -> f64 {
        (&self.coords - &other.coords).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Coordinates as `[re, im]` pairs in basis order.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        complex_pairs(self.coords.as_slice())
    }
}

pub fn complex_pairs(zs: &[Complex64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

/// Radical functional `x ↦ p⟨a,x⟩ + q⟨b,x⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionSpec {
    pub p: Complex64,
    pub q: Complex64,
}

impl SectionSpec {
    pub fn new(p: Complex64, q: Complex64) -> Self {
        assert!(p != Complex64::new(0.0, 0.0) || q != Complex64::new(0.0, 0.0), "section functional must be nonzero");
        Self { p, q }
    }

    pub fn a() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn b() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn eval(&self, x: &DomainPoint) -> Complex64 {
        self.p * x.pair_a() + self.q * x.pair_b()
    }
}

/// Dual quadratic form `I*(x, y) = xᵀ G⁻¹ y` on covectors.
pub fn dual_gram(sys: &EllipticRootSystem) -> DMatrix<Complex64> {
    sys.gram().inverse().expect("2-extension Gram is nondegenerate").to_complex()
}

pub fn quadric(sys: &EllipticRootSystem, x: &DomainPoint) -> Complex64 {
    quadric_with(&dual_gram(sys), x)
}

fn quadric_with(ginv: &DMatrix<Complex64>, x: &DomainPoint) -> Complex64 {
    (x.coords.transpose() * ginv * &x.coords)[(0, 0)]
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub in_d: bool,
    pub in_d2: bool,
    pub in_d2_open: bool,
    pub quadric_residual: [f64; 2],
    pub radius: usize,
    /// Smallest `|⟨β, x⟩|` over the truncated roots.
    pub min_root_pairing: f64,
}

pub fn classify(sys: &EllipticRootSystem, x: &DomainPoint, radius: usize) -> Classification {
    classify_with_tol(sys, x, radius, TOL_QUADRIC)
}

pub fn classify_with_tol(sys: &EllipticRootSystem, x: &DomainPoint, radius: usize, tol: f64) -> Classification {
    let scale = x.norm().max(f64::MIN_POSITIVE);
    let (ua, ub) = (x.pair_a(), x.pair_b());
    let in_d = ua.norm() > tol * scale && ub.norm() > tol * scale && x.tau().im > 0.0;
    let q = quadric(sys, x);
    let in_d2 = in_d && q.norm() < tol * scale * scale;
    let min_root_pairing = enumerate_roots(sys, radius)
        .iter()
        .map(|r| {
            let v: Vec<Complex64> = sys.root_vector(r).iter().map(|c| Complex64::new(crate::exact::to_f64(c), 0.0)).collect();
            x.pair(&v).norm()
        })
        .fold(f64::INFINITY, f64::min);
    Classification {
        in_d,
        in_d2,
        in_d2_open: in_d2 && min_root_pairing > tol * scale,
        quadric_residual: [q.re, q.im],
        radius,
        min_root_pairing,
    }
}

/// Left action `x ↦ x ∘ g⁻¹`, i.e. coordinates `(g⁻¹)ᵀ x`.
pub fn act<G: LinearAction + ?Sized>(g: &G, x: &DomainPoint) -> Result<DomainPoint, DomainError> {
    let m = g.complex_matrix();
    let inv = m.try_inverse().ok_or(DomainError::NotInvertible)?;
    Ok(DomainPoint { coords: inv.transpose() * &x.coords, l: x.l })
}

/// Action through an already-inverted transposed matrix (hot loops).
pub fn act_with(inv_transpose: &DMatrix<Complex64>, x: &DomainPoint) -> DomainPoint {
    DomainPoint { coords: inv_transpose * &x.coords, l: x.l }
}

/// ψ(α): multiply every coordinate by α.
pub fn scale(alpha: Complex64, x: &DomainPoint) -> Result<DomainPoint, DomainError> {
    if alpha.norm() == 0.0 {
        return Err(DomainError::NotInCStar(alpha));
    }
    Ok(DomainPoint { coords: &x.coords * alpha, l: x.l })
}

/// Representative with `⟨f, x⟩ = 1`.
pub fn normalize(f: &SectionSpec, x: &DomainPoint) -> Result<DomainPoint, DomainError> {
    let v = f.eval(x);
    if v.norm() <= f64::EPSILON * x.norm() {
        return Err(DomainError::OnDivisor);
    }
    scale(Complex64::new(1.0, 0.0) / v, x)
}

/// Fills in `s_a` so that the dual quadric vanishes (it is affine in `s_a`).
pub fn solve_s_a(sys: &EllipticRootSystem, x: &mut DomainPoint) -> Result<(), DomainError> {
    let ginv = dual_gram(sys);
    let ia = sys.idx_a_dual();
    x.coords[ia] = Complex64::new(0.0, 0.0);
    let q0 = quadric_with(&ginv, x);
    let lin = 2.0 * (ginv.row(ia) * &x.coords)[(0, 0)];
    if lin.norm() < 1e-300 {
        return Err(DomainError::SamplingFailed(0));
    }
    x.coords[ia] = -q0 / lin;
    Ok(())
}

fn uniform_disc<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let th = std::f64::consts::TAU * rng.gen::<f64>();
    Complex64::from_polar(r, th)
}

/// Pseudorandom point of D²: finite coordinates in the unit polydisc,
/// `|u_a| ∈ [1/2, 3/2]`, `τ = i + (disc of radius 1/2)`, `s_b` in the unit disc,
/// and `s_a` from the quadric.
pub fn sample_d2(sys: &EllipticRootSystem, seed: u64) -> Result<DomainPoint, DomainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = Complex64::new(0.0, 1.0) + uniform_disc(&mut rng, 0.5);
    sample_d2_rng(sys, &mut rng, tau)
}

/// Same distribution with a prescribed τ.
pub fn sample_d2_with_tau(sys: &EllipticRootSystem, seed: u64, tau: Complex64) -> Result<DomainPoint, DomainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_d2_rng(sys, &mut rng, tau)
}

pub fn sample_d2_rng<R: Rng>(sys: &EllipticRootSystem, rng: &mut R, tau: Complex64) -> Result<DomainPoint, DomainError> {
    const RETRIES: usize = 100;
    let l = sys.l;
    for _ in 0..RETRIES {
        let mut coords = vec![Complex64::new(0.0, 0.0); l + 4];
        for c in coords.iter_mut().take(l) {
            *c = uniform_disc(rng, 1.0);
        }
        let ua = Complex64::from_polar(rng.gen_range(0.5..1.5), std::f64::consts::TAU * rng.gen::<f64>());
        if ua.norm() < 1e-12 {
            continue;
        }
        coords[l] = ua;
        coords[l + 1] = tau * ua;
        coords[l + 3] = uniform_disc(rng, 1.0);
        let mut x = DomainPoint::new(l, coords)?;
        if solve_s_a(sys, &mut x).is_ok() {
            return Ok(x);
        }
    }
    Err(DomainError::SamplingFailed(RETRIES))
}

/// Residual of the weight-transfer identity
/// `F(ι(g)x) = (⟨f,x⟩/⟨g,x⟩)^k F(ι(f)x)` for `F` homogeneous of degree `k`.
pub fn weight_transfer_residual<F>(func: F, k: i32, f: &SectionSpec, g: &SectionSpec, x: &DomainPoint) -> Result<f64, DomainError>
where
    F: Fn(&DomainPoint) -> Complex64,
{
    let lhs = func(&normalize(g, x)?);
    let rhs = (f.eval(x) / g.eval(x)).powi(k) * func(&normalize(f, x)?);
    Ok((lhs - rhs).norm() / rhs.norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::rootsys::{build_system, BaseType, Root};
    use crate::weyl::{reflect, rho};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn a1() -> EllipticRootSystem {
        build_system(BaseType::A, 1).unwrap()
    }

    fn boundary_point() -> DomainPoint {
        DomainPoint::new(1, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn boundary_point_is_in_d2_but_not_open() {
        let sys = a1();
        let x = boundary_point();
        assert!(quadric(&sys, &x).norm() < 1e-15);
        let cl = classify(&sys, &x, 3);
        assert!(cl.in_d && cl.in_d2);
        assert!(!cl.in_d2_open);
        assert_eq!(cl.min_root_pairing, 0.0);
    }

    #[test]
    fn zero_u_a_is_outside_d() {
        let sys = a1();
        let mut x = boundary_point();
        x.coords[1] = c(0.0, 0.0);
        assert!(!classify(&sys, &x, 1).in_d);
    }

    #[test]
    fn quadric_formula_for_a1() {
        let sys = a1();
        let x = DomainPoint::new(1, vec![c(0.3, 0.1), c(1.1, 0.2), c(-0.4, 0.9), c(0.5, 0.5), c(0.2, -0.7)]).unwrap();
        let [z, ua, ub, sa, sb] = [0, 1, 2, 3, 4].map(|i| x.coords[i]);
        let expected = -z * z / 2.0 + 2.0 * ua * sa + 2.0 * ub * sb;
        assert!((quadric(&sys, &x) - expected).norm() < 1e-15);
    }

    #[test]
    fn reflection_negates_alpha_slot() {
        let sys = a1();
        let x = sample_d2(&sys, 3).unwrap();
        let y = act(&reflect(&sys, &sys.simple_root(0)).unwrap(), &x).unwrap();
        assert!((y.coords[0] + x.coords[0]).norm() < 1e-15);
        assert_eq!(y.pair_a(), x.pair_a());
        assert_eq!(y.pair_b(), x.pair_b());
    }

    #[test]
    fn rho_shifts_s_b() {
        let sys = a1();
        let x = sample_d2(&sys, 4).unwrap();
        let coeff = rat(-1);
        let t = c(0.3, 0.2);
        let y = act(&rho(&sys, &coeff, t), &x).unwrap();
        assert!((y.pair_a() - x.pair_a()).norm() < 1e-15);
        assert!((y.pair_b() - x.pair_b()).norm() < 1e-15);
        assert!((y.s_b() - (x.s_b() + t * -1.0 * x.pair_a())).norm() < 1e-14);
        assert!((y.s_a() - (x.s_a() - t * -1.0 * x.pair_b())).norm() < 1e-14);
    }

    #[test]
    fn scaling_and_normalization() {
        let sys = a1();
        let x = sample_d2(&sys, 5).unwrap();
        let al = c(0.7, -1.3);
        let y = scale(al, &x).unwrap();
        assert!((y.tau() - x.tau()).norm() < 1e-14);
        assert!((quadric(&sys, &y) - al * al * quadric(&sys, &x)).norm() < 1e-14);
        assert_eq!(scale(c(0.0, 0.0), &x), Err(DomainError::NotInCStar(c(0.0, 0.0))));

        let na = normalize(&SectionSpec::a(), &x).unwrap();
        assert!((na.pair_a() - c(1.0, 0.0)).norm() < 1e-15);
        let nb = normalize(&SectionSpec::b(), &x).unwrap();
        assert!((nb.pair_b() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((nb.pair_a() - c(1.0, 0.0) / x.tau()).norm() < 1e-14);
        let twice = normalize(&SectionSpec::a(), &na).unwrap();
        assert!(twice.distance(&na) < 1e-15);

        let f = SectionSpec::new(x.pair_b(), -x.pair_a());
        assert_eq!(normalize(&f, &x), Err(DomainError::OnDivisor));
    }

    #[test]
    fn sampling_is_deterministic_and_on_quadric() {
        let sys = build_system(BaseType::A, 2).unwrap();
        assert_eq!(sample_d2(&sys, 9).unwrap(), sample_d2(&sys, 9).unwrap());
        for seed in 0..100 {
            let x = sample_d2(&sys, seed).unwrap();
            assert!(quadric(&sys, &x).norm() < 1e-12);
            assert!(classify(&sys, &x, 1).in_d2);
        }
    }

    #[test]
    fn weight_transfer() {
        let sys = a1();
        let x = sample_d2(&sys, 11).unwrap();
        let f = SectionSpec::new(c(1.0, 0.5), c(0.2, 0.0));
        let g = SectionSpec::new(c(-0.3, 0.0), c(1.0, 1.0));
        // homogeneous of degree 3
        let func = |p: &DomainPoint| p.coords[0] * p.pair_a() * p.s_b() + p.pair_b().powi(3);
        assert!(weight_transfer_residual(func, 3, &f, &g, &x).unwrap() < 1e-12);
        let shifted = Root::new(vec![rat(1)], 1, 0);
        let y = act(&reflect(&sys, &shifted).unwrap(), &x).unwrap();
        assert!(classify(&sys, &y, 1).in_d2);
    }
}
