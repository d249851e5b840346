//! Bigraded W²-invariant functions on D²: radical-linear functions, their
//! inverses, theta orbit sums and products, plus the Euler degree operator.
//!
//! Bidegree `(k, m)` means `ψ(α)*f = α^{−k} f`, `φ(ρ(t))*f = e^{−2πimt} f` and
//! `φ(g)*f = f` for `g ∈ W²`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use thiserror::Error;

use crate::domain::{act, scale, solve_s_a, DomainError, DomainPoint, RHO_SIGN};
use crate::exact::{format_rational, to_f64, RatMatrix, RatVector, Rational};
use crate::rootsys::{EllipticRootSystem, Root};
use crate::weyl::{reflect, rho};

/// Default translation truncation.
pub const DEFAULT_N: usize = 20;

/// Retained terms may not exceed the partial sum by more than this factor.
pub const DIVERGENCE_RATIO: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("non-convergent truncation (N = {n}, largest term / |sum| = {ratio:e})")]
    NonConvergent { n: usize, ratio: f64 },
    #[error("Im τ = {0} is below 0.1")]
    TauTooSmall(f64),
    #[error("theta orbit sums need m ≥ 1")]
    ThetaIndex,
    #[error("indeterminate rank (gap ratio {gap:.3} below 10, singular values {singular_values:?})")]
    IndeterminateRank { gap: f64, singular_values: Vec<f64> },
    #[error("radical functional vanishes at the point")]
    OnDivisor,
    #[error("weight vector has length {got}, expected {expected}")]
    WeightLength { expected: usize, got: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum InvariantKind {
    RadicalLinear { p: Complex64, q: Complex64 },
    RadicalInverse { p: Complex64, q: Complex64 },
    ThetaOrbit {
        /// Finite-block weight in simple-root coordinates.
        #[serde(serialize_with = "crate::exact::ser_rationals")]
        lambda: RatVector,
        m: u32,
        n: usize,
    },
    Constant(Complex64),
    Product(Vec<GradedInvariant>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradedInvariant {
    pub bidegree: (i64, i64),
    pub kind: InvariantKind,
}

impl GradedInvariant {
    pub fn radical_linear(p: Complex64, q: Complex64) -> Self {
        Self { bidegree: (-1, 0), kind: InvariantKind::RadicalLinear { p, q } }
    }

    pub fn radical_inverse(p: Complex64, q: Complex64) -> Self {
        Self { bidegree: (1, 0), kind: InvariantKind::RadicalInverse { p, q } }
    }

    pub fn theta_orbit(lambda: RatVector, m: u32, n: usize) -> Result<Self, InvariantError> {
        if m == 0 {
            return Err(InvariantError::ThetaIndex);
        }
        Ok(Self { bidegree: (0, m as i64), kind: InvariantKind::ThetaOrbit { lambda, m, n } })
    }

    pub fn constant(c: Complex64) -> Self {
        Self { bidegree: (0, 0), kind: InvariantKind::Constant(c) }
    }

    /// The same invariant with every theta truncation replaced by `n`.
    pub fn with_truncation(&self, n: usize) -> Self {
        let kind = match &self.kind {
            InvariantKind::ThetaOrbit { lambda, m, .. } => InvariantKind::ThetaOrbit { lambda: lambda.clone(), m: *m, n },
            InvariantKind::Product(fs) => InvariantKind::Product(fs.iter().map(|f| f.with_truncation(n)).collect()),
            other => other.clone(),
        };
        Self { bidegree: self.bidegree, kind }
    }
}

/// Product with additive bidegree.
pub fn multiply(f: &GradedInvariant, g: &GradedInvariant) -> GradedInvariant {
    let mut factors = Vec::new();
    for h in [f, g] {
        match &h.kind {
            InvariantKind::Product(fs) => factors.extend(fs.iter().cloned()),
            _ => factors.push(h.clone()),
        }
    }
    GradedInvariant {
        bidegree: (f.bidegree.0 + g.bidegree.0, f.bidegree.1 + g.bidegree.1),
        kind: InvariantKind::Product(factors),
    }
}

/// Deterministic pairwise (tree) summation.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::zero(),
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Evaluation context: the system, the generator coefficient `c` of g₀ and the sign σ.
#[derive(Clone, Debug)]
pub struct InvariantContext {
    pub sys: EllipticRootSystem,
    pub g0: Rational,
    pub sigma: f64,
}

impl InvariantContext {
    pub fn new(sys: EllipticRootSystem, g0: Rational) -> Self {
        Self { sys, g0, sigma: RHO_SIGN }
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        Self { sigma, ..self.clone() }
    }

    pub fn eval(&self, inv: &GradedInvariant, x: &DomainPoint) -> Result<Complex64, InvariantError> {
        match &inv.kind {
            InvariantKind::RadicalLinear { p, q } => Ok(p * x.pair_a() + q * x.pair_b()),
            InvariantKind::RadicalInverse { p, q } => {
                let v = p * x.pair_a() + q * x.pair_b();
                if v.norm() == 0.0 {
                    return Err(InvariantError::OnDivisor);
                }
                Ok(Complex64::new(1.0, 0.0) / v)
            }
            InvariantKind::ThetaOrbit { lambda, m, n } => self.theta(lambda, *m, *n, x),
            InvariantKind::Constant(c) => Ok(*c),
            InvariantKind::Product(fs) => fs.iter().try_fold(Complex64::new(1.0, 0.0), |acc, f| Ok(acc * self.eval(f, x)?)),
        }
    }

    /// `Σ_{μ ∈ W_f λ} Σ_{β} h_{μ,m}(φ(T_β) x)` over b-direction translations
    /// `T_β = Π_i T_{α_i, m_i b}`, `β = Σ m_i α_i`, `|m_i| ≤ N`.
    ///
    /// With `y = x/⟨a,x⟩` the translation acts by `z_j ↦ z_j + I(α_j, β)τ`,
    /// `s_b ↦ s_b − ⟨β, z⟩ − ½I(β, β)τ`.
    fn theta(&self, lambda: &[Rational], m: u32, n: usize, x: &DomainPoint) -> Result<Complex64, InvariantError> {
        let sys = &self.sys;
        let l = sys.l;
        if lambda.len() != l {
            return Err(InvariantError::WeightLength { expected: l, got: lambda.len() });
        }
        let ua = x.pair_a();
        let tau = x.tau();
        if tau.im < 0.1 {
            return Err(InvariantError::TauTooSmall(tau.im));
        }
        let z: Vec<Complex64> = (0..l).map(|j| x.coords[j] / ua).collect();
        let sb = x.s_b() / ua;
        let orbit: Vec<Vec<f64>> = weyl_orbit(&sys.cartan, lambda).iter().map(|w| w.iter().map(to_f64).collect()).collect();
        let gram_f: Vec<Vec<f64>> = (0..l).map(|i| (0..l).map(|j| to_f64(&sys.gram()[(i, j)])).collect()).collect();
        let weight = m as f64 * self.sigma / to_f64(&self.g0);
        let side = 2 * n + 1;
        let count = side.pow(l as u32);
        let terms: Vec<Complex64> = (0..count)
            .into_par_iter()
            .map(|idx| {
                let mut beta = vec![0.0; l];
                let mut r = idx;
                for b in beta.iter_mut() {
                    *b = (r % side) as f64 - n as f64;
                    r /= side;
                }
                // I(α_j, β)
                let shift: Vec<f64> = (0..l).map(|j| (0..l).map(|k| gram_f[j][k] * beta[k]).sum()).collect();
                let norm: f64 = (0..l).map(|j| beta[j] * shift[j]).sum();
                let zt: Vec<Complex64> = (0..l).map(|j| z[j] + tau * shift[j]).collect();
                let beta_z: Complex64 = (0..l).map(|j| z[j] * beta[j]).sum();
                let sbt = sb - beta_z - tau * (0.5 * norm);
                let mut acc = Vec::with_capacity(orbit.len());
                for mu in &orbit {
                    let lin: Complex64 = (0..l).map(|j| zt[j] * mu[j]).sum();
                    let phase = lin + sbt * weight;
                    acc.push((Complex64::new(0.0, 2.0 * PI) * phase).exp());
                }
                pairwise_sum(&acc)
            })
            .collect();
        let sum = pairwise_sum(&terms);
        let largest = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if !sum.norm().is_finite() || !largest.is_finite() || largest > DIVERGENCE_RATIO * sum.norm() {
            return Err(InvariantError::NonConvergent { n, ratio: largest / sum.norm() });
        }
        Ok(sum)
    }
}

/// Finite Weyl orbit of a weight in simple-root coordinates (sorted).
pub fn weyl_orbit(cartan: &RatMatrix, lambda: &[Rational]) -> Vec<RatVector> {
    let l = cartan.rows();
    let mut seen: BTreeSet<RatVector> = BTreeSet::new();
    let mut stack = vec![lambda.to_vec()];
    seen.insert(lambda.to_vec());
    while let Some(v) = stack.pop() {
        let cv = cartan.apply(&v);
        for i in 0..l {
            let mut w = v.clone();
            w[i] -= &cv[i];
            if seen.insert(w.clone()) {
                stack.push(w);
            }
        }
    }
    seen.into_iter().collect()
}

/// Fundamental weight `ω_i` in simple-root coordinates (row `i` of C⁻¹).
pub fn fundamental_weight(sys: &EllipticRootSystem, i: usize) -> RatVector {
    let inv = sys.cartan.inverse().expect("Cartan matrices are invertible");
    inv.row(i).to_vec()
}

#[derive(Clone, Debug, Serialize)]
pub struct BidegreeResiduals {
    pub r_w: f64,
    pub r_rho: f64,
    pub r_psi: f64,
}

/// Roots probed for W-invariance: shifts of every simple root, including a
/// few far b-shifts that exercise the orbit truncation.
pub fn probe_roots(sys: &EllipticRootSystem) -> Vec<Root> {
    let shifts = [(0, 0), (1, 0), (0, 1), (1, 1), (-2, 3), (3, -5), (0, 20), (5, -20)];
    let mut out = Vec::new();
    for i in 0..sys.l {
        for (n, m) in shifts {
            out.push(Root::new(sys.simple_root(i).finite, n, m));
        }
    }
    out
}

/// Running maximum that lets a non-finite residual win.
fn worst(acc: f64, r: f64) -> f64 {
    if r.is_nan() {
        f64::INFINITY
    } else {
        acc.max(r)
    }
}

/// Residuals of the three defining conditions, relative to `max(1, |f(x)|)`.
pub fn check_bidegree(ctx: &InvariantContext, inv: &GradedInvariant, x: &DomainPoint, trials: usize, seed: u64) -> Result<BidegreeResiduals, InvariantError> {
    let sys = &ctx.sys;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = ctx.eval(inv, x)?;
    let denom = f0.norm().max(1.0);
    let (k, m) = inv.bidegree;

    let mut roots = probe_roots(sys);
    for _ in 0..trials {
        roots.push(crate::weyl::random_root(sys, &mut rng, 6));
    }
    let mut r_w: f64 = 0.0;
    for beta in &roots {
        let g = reflect(sys, beta).expect("roots are anisotropic");
        let y = act(&g, x)?;
        r_w = worst(r_w, (ctx.eval(inv, &y)? - f0).norm() / denom);
    }

    let mut r_rho: f64 = 0.0;
    let mut r_psi: f64 = 0.0;
    for _ in 0..trials.max(1) {
        let t = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2));
        let y = act(&rho(sys, &ctx.g0, t), x)?;
        let expected = (Complex64::new(0.0, -2.0 * PI * m as f64) * t).exp() * f0;
        r_rho = worst(r_rho, (ctx.eval(inv, &y)? - expected).norm() / denom);

        let alpha = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        let y = scale(alpha, x)?;
        let expected = alpha.powi(-k as i32) * f0;
        r_psi = worst(r_psi, (ctx.eval(inv, &y)? - expected).norm() / denom);
    }
    Ok(BidegreeResiduals { r_w, r_rho, r_psi })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub gap_ratio: f64,
    pub singular_values: Vec<f64>,
    pub candidates: usize,
    pub samples: usize,
    pub truncation: usize,
}

/// Candidate weights `Σ r_i ω_i` with `0 ≤ r_i < 2m`.
pub fn candidate_weights(sys: &EllipticRootSystem, m: u32) -> Vec<RatVector> {
    let l = sys.l;
    let side = 2 * m as usize;
    let omegas: Vec<RatVector> = (0..l).map(|i| fundamental_weight(sys, i)).collect();
    let mut out = Vec::new();
    for idx in 0..side.pow(l as u32) {
        let mut w = crate::exact::zero_vector(l);
        let mut r = idx;
        for om in &omegas {
            let coeff = Rational::from_integer(((r % side) as i64).into());
            r /= side;
            w = crate::exact::vec_add(&w, &crate::exact::vec_scale(&coeff, om));
        }
        out.push(w);
    }
    out
}

/// Numerical dimension of the span of the index-`m` candidates at fixed
/// `(τ, s_b)`, sampled over the finite coordinates.
pub fn invariant_space_dim(ctx: &InvariantContext, m: u32, basis_size: usize, samples: usize, n: usize, seed: u64) -> Result<RankReport, InvariantError> {
    let sys = &ctx.sys;
    let candidates: Vec<GradedInvariant> = if m == 0 {
        [1.0, -2.5, 0.75].iter().map(|&c| GradedInvariant::constant(Complex64::new(c, 0.5 * c))).collect()
    } else {
        candidate_weights(sys, m)
            .into_iter()
            .map(|w| GradedInvariant::theta_orbit(w, m, n))
            .collect::<Result<_, _>>()?
    };
    let candidates: Vec<GradedInvariant> = candidates.into_iter().take(basis_size.max(1)).collect();
    let rows = samples.max(2 * candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = Complex64::new(0.1, 1.0);
    let sb = Complex64::new(0.3, -0.2);
    let l = sys.l;
    let mut mat = DMatrix::<Complex64>::zeros(rows, candidates.len());
    for r in 0..rows {
        let mut coords = vec![Complex64::zero(); l + 4];
        for c in coords.iter_mut().take(l) {
            *c = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        }
        coords[l] = Complex64::new(1.0, 0.0);
        coords[l + 1] = tau;
        coords[l + 3] = sb;
        let mut x = DomainPoint::new(l, coords)?;
        solve_s_a(sys, &mut x)?;
        for (c, f) in candidates.iter().enumerate() {
            mat[(r, c)] = ctx.eval(f, &x)?;
        }
    }
    let mut sv: Vec<f64> = mat.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv[0];
    let rank = sv.iter().filter(|&&s| s > 1e-6 * top).count();
    let gap_ratio = if rank < sv.len() { sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE) } else { f64::INFINITY };
    if gap_ratio < 10.0 {
        return Err(InvariantError::IndeterminateRank { gap: gap_ratio, singular_values: sv });
    }
    Ok(RankReport { rank, gap_ratio, singular_values: sv, candidates: candidates.len(), samples: rows, truncation: n })
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerReport {
    #[serde(serialize_with = "crate::exact::ser_rational")]
    pub eigenvalue: Rational,
    pub finite_difference: [f64; 2],
    pub relative_disagreement: f64,
    pub flagged: bool,
    pub step: f64,
}

/// `E f = (−1/c¹)(1/2πi) d/dt φ(ρ(t))*f |_{t=0}`: analytic eigenvalue `m/c¹`,
/// cross-checked by a fourth-order central difference.
pub fn euler_apply(ctx: &InvariantContext, inv: &GradedInvariant, c1: &Rational, x: &DomainPoint, h: f64) -> Result<(EulerReport, GradedInvariant), InvariantError> {
    let m = inv.bidegree.1;
    let eigenvalue = Rational::from_integer(m.into()) / c1;
    let f = |t: f64| -> Result<Complex64, InvariantError> {
        let y = act(&rho(&ctx.sys, &ctx.g0, Complex64::new(t, 0.0)), x)?;
        ctx.eval(inv, &y)
    };
    let d = (8.0 * (f(h)? - f(-h)?) - (f(2.0 * h)? - f(-2.0 * h)?)) / (12.0 * h);
    let f0 = ctx.eval(inv, x)?;
    let c1f = c1.to_f64().unwrap_or(f64::NAN);
    let estimate = -d / (Complex64::new(0.0, 2.0 * PI) * c1f) / f0;
    let exact = to_f64(&eigenvalue);
    let relative_disagreement = (estimate - exact).norm() / exact.abs().max(1.0);
    let scaled = multiply(&GradedInvariant::constant(Complex64::new(exact, 0.0)), inv);
    let report = EulerReport {
        eigenvalue,
        finite_difference: [estimate.re, estimate.im],
        relative_disagreement,
        flagged: relative_disagreement > 1e-5,
        step: h,
    };
    Ok((report, scaled))
}

pub fn describe_weight(lambda: &[Rational]) -> Vec<String> {
    lambda.iter().map(format_rational).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{sample_d2, sample_d2_with_tau};
    use crate::exact::{rat, ratio};
    use crate::rootsys::{build_system, BaseType};

    fn ctx() -> InvariantContext {
        InvariantContext::new(build_system(BaseType::A, 1).unwrap(), rat(-1))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radical_functions() {
        let ctx = ctx();
        let x = sample_d2(&ctx.sys, 2).unwrap();
        let a = GradedInvariant::radical_linear(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(ctx.eval(&a, &x).unwrap(), x.pair_a());
        let ainv = GradedInvariant::radical_inverse(c(1.0, 0.0), c(0.0, 0.0));
        let prod = multiply(&a, &ainv);
        assert_eq!(prod.bidegree, (0, 0));
        assert!((ctx.eval(&prod, &x).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let r = check_bidegree(&ctx, &a, &x, 5, 1).unwrap();
        assert_eq!(r.r_w, 0.0);
        assert_eq!(r.r_rho, 0.0);
        assert!(r.r_psi < 1e-15);
    }

    #[test]
    fn bidegrees_add() {
        let th = GradedInvariant::theta_orbit(vec![rat(0)], 1, 5).unwrap();
        assert_eq!(multiply(&th, &th).bidegree, (0, 2));
        let a = GradedInvariant::radical_linear(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(multiply(&a, &th).bidegree, (-1, 1));
        assert_eq!(GradedInvariant::theta_orbit(vec![rat(0)], 0, 5), Err(InvariantError::ThetaIndex));
    }

    #[test]
    fn closed_form_translation_matches_matrix_action() {
        // one-term orbit sum against the seed evaluated at the matrix image
        let ctx = ctx();
        let sys = &ctx.sys;
        let x = sample_d2(sys, 6).unwrap();
        let mb = 2;
        let t = reflect(sys, &Root::new(vec![rat(1)], 0, mb)).unwrap().compose(&reflect(sys, &Root::new(vec![rat(1)], 0, 0)).unwrap());
        let y = act(&t, &x).unwrap();
        let ua = x.pair_a();
        let (z, tau, sb) = (x.coords[0] / ua, x.tau(), x.s_b() / ua);
        let beta = mb as f64;
        assert!((y.coords[0] / ua - (z - 2.0 * beta * tau)).norm() < 1e-12);
        assert!((y.s_b() / ua - (sb - beta * z + beta * beta * tau)).norm() < 1e-12);
    }

    #[test]
    fn theta_converges_and_is_invariant() {
        let ctx = ctx();
        let x = sample_d2_with_tau(&ctx.sys, 3, c(0.0, 2.0)).unwrap();
        let th20 = GradedInvariant::theta_orbit(vec![rat(0)], 1, 20).unwrap();
        let v20 = ctx.eval(&th20, &x).unwrap();
        let v30 = ctx.eval(&th20.with_truncation(30), &x).unwrap();
        assert!((v20 - v30).norm() < 1e-9);
        let r = check_bidegree(&ctx, &th20.with_truncation(25), &x, 5, 2).unwrap();
        assert!(r.r_psi < 1e-12, "{r:?}");
        assert!(r.r_rho < 1e-10, "{r:?}");
        assert!(r.r_w < 1e-6, "{r:?}");
    }

    #[test]
    fn theta_for_a2() {
        let sys = build_system(BaseType::A, 2).unwrap();
        let ctx = InvariantContext::new(sys.clone(), rat(-1));
        let x = sample_d2_with_tau(&sys, 5, c(0.2, 1.3)).unwrap();
        let th = GradedInvariant::theta_orbit(fundamental_weight(&sys, 0), 1, 25).unwrap();
        let r = check_bidegree(&ctx, &th, &x, 3, 9).unwrap();
        assert!(r.r_w < 1e-6 && r.r_rho < 1e-10 && r.r_psi < 1e-12, "{r:?}");
    }

    #[test]
    fn wrong_sign_breaks_central_weight() {
        let ctx = ctx();
        let x = sample_d2_with_tau(&ctx.sys, 3, c(0.0, 1.5)).unwrap();
        let th = GradedInvariant::theta_orbit(vec![rat(0)], 1, 25).unwrap();
        let good = check_bidegree(&ctx, &th, &x, 5, 2).unwrap();
        let bad = check_bidegree(&ctx.with_sigma(-RHO_SIGN), &th, &x, 5, 2);
        assert!(good.r_rho < 1e-10);
        // the flipped seed is not even convergent as a b-orbit sum
        match bad {
            Ok(r) => assert!(r.r_rho > 1e-2, "{r:?}"),
            Err(e) => assert!(matches!(e, InvariantError::NonConvergent { .. }), "{e}"),
        }
    }

    #[test]
    fn weyl_orbits_and_weights() {
        let sys = build_system(BaseType::A, 2).unwrap();
        let omega = fundamental_weight(&sys, 0);
        assert_eq!(omega, vec![ratio(2, 3), ratio(1, 3)]);
        assert_eq!(weyl_orbit(&sys.cartan, &omega).len(), 3);
        assert_eq!(candidate_weights(&sys, 1).len(), 4);
    }

    #[test]
    fn dimension_counts_for_a1() {
        let ctx = ctx();
        assert_eq!(invariant_space_dim(&ctx, 0, 3, 6, 10, 1).unwrap().rank, 1);
        assert_eq!(invariant_space_dim(&ctx, 1, 8, 12, 20, 1).unwrap().rank, 2);
        assert_eq!(invariant_space_dim(&ctx, 2, 8, 16, 20, 1).unwrap().rank, 3);
    }

    #[test]
    fn euler_eigenvalues() {
        let ctx = ctx();
        let x = sample_d2_with_tau(&ctx.sys, 1, c(0.1, 1.2)).unwrap();
        let one = GradedInvariant::constant(c(1.0, 0.0));
        assert_eq!(euler_apply(&ctx, &one, &rat(5), &x, 1e-3).unwrap().0.eigenvalue, rat(0));
        let th = GradedInvariant::theta_orbit(vec![rat(0)], 1, 20).unwrap();
        let (rep, _) = euler_apply(&ctx, &th, &rat(1), &x, 1e-3).unwrap();
        assert_eq!(rep.eigenvalue, rat(1));
        assert!(rep.relative_disagreement < 1e-6, "{rep:?}");
        let cube = multiply(&multiply(&th, &th), &th);
        let (rep, _) = euler_apply(&ctx, &cube, &rat(3), &x, 1e-3).unwrap();
        assert_eq!(rep.eigenvalue, rat(1));
        assert!(!rep.flagged);
    }
}
