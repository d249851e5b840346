//! Conformal deformations `g = σ²η` of the flat metric, curvature checks, and
//! good sections of the trivial ℂ*-bundle over a Frobenius chart.
//!
//! Deformations are specified by `s = σ⁻¹`, a polynomial in the flat
//! coordinates, so `g = η / s²`.

use num_complex::Complex64 as C;
use serde::Serialize;

use super::{
    check_frobenius, christoffel_fd, cr, cz, i3, i4, intersection_form, max_abs, riemann_fd_adaptive, AxiomReport,
    CMat, Euler, FrobeniusChart, FrobeniusError, FrobeniusStructure,
};
use crate::poly::Poly;

/// Default tolerance for algebraic identities.
pub const TOL_IDENTITY: f64 = 1e-8;
/// Default tolerance for curvature residuals.
pub const TOL_CURVATURE: f64 = 1e-6;
const TOL_SINGULAR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct DeformationSpec {
    pub label: String,
    pub sigma_inverse: Poly<C>,
}

impl DeformationSpec {
    pub fn new(label: impl Into<String>, sigma_inverse: Poly<C>) -> Self {
        Self { label: label.into(), sigma_inverse }
    }

    /// Constant `σ⁻¹ = c`.
    pub fn constant(n: usize, c: C) -> Self {
        Self::new("constant", Poly::constant(n, c))
    }

    /// `σ⁻¹ = Σ η_ij (t^i − c^i)(t^j − c^j)`.
    pub fn quadratic(eta: &CMat, center: &[C]) -> Self {
        let n = eta.nrows();
        let shifted: Vec<Poly<C>> = (0..n).map(|i| &Poly::var(n, i) - &Poly::constant(n, center[i])).collect();
        let mut s = Poly::zero(n);
        for i in 0..n {
            for j in 0..n {
                s = &s + &(&shifted[i] * &shifted[j]).scale(&eta[(i, j)]);
            }
        }
        Self::new("quadratic", s)
    }

    /// `σ⁻¹ = b₀ + Σ bᵢ tⁱ`.
    pub fn affine(b0: C, b: &[C]) -> Self {
        let n = b.len();
        let mut s = Poly::constant(n, b0);
        for (i, bi) in b.iter().enumerate() {
            s = &s + &Poly::var(n, i).scale(bi);
        }
        Self::new("affine", s)
    }

    /// `η*(ds, ds)` for affine `s` (`None` when `s` is not affine).
    pub fn affine_norm(&self, eta_inv: &CMat) -> Option<C> {
        if self.sigma_inverse.degree() > 1 {
            return None;
        }
        let n = self.sigma_inverse.nvars();
        let b: Vec<C> = (0..n).map(|i| self.sigma_inverse.deriv(i).eval(&vec![cz(); n])).collect();
        Some((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| eta_inv[(i, j)] * b[i] * b[j]).sum())
    }
}

/// Best `λ` with `E(s) ≈ λs` over coefficient vectors, and the coefficient residual.
pub fn homogeneity_fit(euler: &Euler, s: &Poly<C>) -> (C, f64) {
    let es = euler.apply_poly(s);
    let mut num = cz();
    let mut den = 0.0;
    for (e, c) in s.terms() {
        let other = es.terms().find(|(e2, _)| *e2 == e).map(|(_, c2)| *c2).unwrap_or(cz());
        num += c.conj() * other;
        den += c.norm_sqr();
    }
    let lambda = if den > 0.0 { num / den } else { cz() };
    (lambda, (&es - &s.scale(&lambda)).max_abs_coeff())
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    /// Least-squares `c` in `d(σ⁻¹) = c·η(e, ·)`.
    pub c_fit: C,
    pub proportionality_residual: f64,
    pub lambda: C,
    pub homogeneity_residual: f64,
    pub homogeneous: bool,
    pub passes: bool,
}

/// Least-squares fit of `c` in `w(t) = c·v` over all points and components.
fn fit_multiple(samples: &[Vec<C>], v: &[C]) -> (C, f64) {
    let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>() * samples.len() as f64;
    let num: C = samples.iter().flat_map(|w| w.iter().zip(v).map(|(a, b)| b.conj() * a)).sum();
    let c = if vv > 0.0 { num / vv } else { cz() };
    let res = samples.iter().flat_map(|w| w.iter().zip(v).map(move |(a, b)| (a - c * b).norm())).fold(0.0, f64::max);
    (c, res)
}

/// `d(σ⁻¹) ∝ η(e, ·)` at the points and `σ` E-homogeneous.
pub fn deformation_criterion(base: &FrobeniusChart, spec: &DeformationSpec, points: &[Vec<C>]) -> CriterionReport {
    let s = &spec.sigma_inverse;
    let ds: Vec<Poly<C>> = (0..base.n).map(|i| s.deriv(i)).collect();
    let grads: Vec<Vec<C>> = points.iter().map(|t| ds.iter().map(|p| p.eval(t)).collect()).collect();
    let (c_fit, proportionality_residual) = fit_multiple(&grads, &base.j_of_unit());
    let (lambda, homogeneity_residual) = homogeneity_fit(&base.euler, s);
    let homogeneous = homogeneity_residual < 1e-12;
    CriterionReport {
        c_fit,
        proportionality_residual,
        lambda,
        homogeneity_residual,
        homogeneous,
        passes: proportionality_residual < TOL_IDENTITY && homogeneous,
    }
}

/// `(∘, e, E, σ²η)` on a flat chart.
#[derive(Clone, Debug)]
pub struct DeformedStructure {
    pub base: FrobeniusChart,
    pub s: Poly<C>,
    ds: Vec<Poly<C>>,
    dds: Vec<Vec<Poly<C>>>,
    /// Weight `D − 2λ` with `λ` the homogeneity fit of `σ⁻¹`.
    pub weight_d: C,
    metric_exact_residual: f64,
}

impl DeformedStructure {
    pub fn new(base: &FrobeniusChart, s: Poly<C>) -> Self {
        let n = base.n;
        let ds: Vec<Poly<C>> = (0..n).map(|i| s.deriv(i)).collect();
        let dds = ds.iter().map(|d| (0..n).map(|j| d.deriv(j)).collect()).collect();
        let (lambda, _) = homogeneity_fit(&base.euler, &s);
        let weight_d = base.weight_d - lambda * 2.0;
        // Lie_E(η/s²) − D'η/s² = (η/s³)·((D − D')s − 2E(s))
        let bracket = &s.scale(&(base.weight_d - weight_d)) - &base.euler.apply_poly(&s).scale(&cr(2.0));
        let coeff_max = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| base.eta[(i, j)].norm()).fold(0.0, f64::max);
        let metric_exact_residual = bracket.max_abs_coeff() * coeff_max + base.metric_homogeneity_residual();
        Self { base: base.clone(), s, ds, dds, weight_d, metric_exact_residual }
    }

    pub fn sigma_inverse_at(&self, t: &[C]) -> C {
        self.s.eval(t)
    }

    /// `α = −ds/s` and `U = η⁻¹α`.
    fn alpha_u(&self, t: &[C]) -> (Vec<C>, Vec<C>) {
        let n = self.base.n;
        let sv = self.s.eval(t);
        let alpha: Vec<C> = self.ds.iter().map(|d| -d.eval(t) / sv).collect();
        let u = (0..n).map(|l| (0..n).map(|k| self.base.eta_inv[(l, k)] * alpha[k]).sum()).collect();
        (alpha, u)
    }

    /// Closed-form curvature of `σ²η` for flat `η`:
    /// `R(X,Y) = −(B(X)∧Y + X∧B(Y))` with `B(X) = −α(X)U + ∇_X U + ½α(U)X`
    /// and `(X∧Y)Z = η(Y,Z)X − η(X,Z)Y`; stored as `R^l_{kij}` at `i4(n, l, k, i, j)`.
    pub fn closed_form_riemann(&self, t: &[C]) -> Vec<C> {
        let n = self.base.n;
        let eta = &self.base.eta;
        let sv = self.s.eval(t);
        let (alpha, u) = self.alpha_u(t);
        let dsv: Vec<C> = self.ds.iter().map(|d| d.eval(t)).collect();
        // ∂_i α_k
        let dalpha: Vec<Vec<C>> =
            (0..n).map(|i| (0..n).map(|k| -self.dds[i][k].eval(t) / sv + dsv[i] * dsv[k] / (sv * sv)).collect()).collect();
        let alpha_u: C = (0..n).map(|k| alpha[k] * u[k]).sum();
        // B_i^l
        let b: Vec<Vec<C>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|l| {
                        let du: C = (0..n).map(|k| self.base.eta_inv[(l, k)] * dalpha[i][k]).sum();
                        let delta = if i == l { alpha_u * 0.5 } else { cz() };
                        -alpha[i] * u[l] + du + delta
                    })
                    .collect()
            })
            .collect();
        let eta_b = |i: usize, k: usize| -> C { (0..n).map(|l| b[i][l] * eta[(l, k)]).sum() };
        let mut r = vec![cz(); n.pow(4)];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let dl_j = if l == j { cr(1.0) } else { cz() };
                        let dl_i = if l == i { cr(1.0) } else { cz() };
                        let v = eta[(j, k)] * b[i][l] - eta_b(i, k) * dl_j + eta_b(j, k) * dl_i - eta[(i, k)] * b[j][l];
                        r[i4(n, l, k, i, j)] = -v;
                    }
                }
            }
        }
        r
    }

    fn check_nonvanishing(&self, points: &[Vec<C>]) -> Result<(), FrobeniusError> {
        let min = points.iter().map(|t| self.s.eval(t).norm()).fold(f64::INFINITY, f64::min);
        if min < TOL_SINGULAR {
            return Err(FrobeniusError::DeformationSingular(min));
        }
        Ok(())
    }
}

impl FrobeniusStructure for DeformedStructure {
    fn dim(&self) -> usize {
        self.base.n
    }

    fn metric(&self, t: &[C]) -> CMat {
        let s = self.s.eval(t);
        self.base.eta.map(|x| x / (s * s))
    }

    fn christoffel(&self, t: &[C]) -> Vec<C> {
        let n = self.base.n;
        let (alpha, u) = self.alpha_u(t);
        let mut g = vec![cz(); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = -self.base.eta[(i, j)] * u[l];
                    if l == i {
                        v += alpha[j];
                    }
                    if l == j {
                        v += alpha[i];
                    }
                    g[i3(n, l, i, j)] = v;
                }
            }
        }
        g
    }

    fn structure(&self, t: &[C]) -> Vec<C> {
        self.base.structure(t)
    }

    fn structure_derivative(&self, t: &[C]) -> Vec<C> {
        self.base.structure_derivative(t)
    }

    fn unit(&self) -> Vec<C> {
        self.base.unit.clone()
    }

    fn euler(&self) -> &Euler {
        &self.base.euler
    }

    fn weight(&self) -> C {
        self.weight_d
    }

    fn flat_coordinates(&self) -> bool {
        self.ds.iter().all(|d| d.is_zero())
    }

    fn curvature(&self, t: &[C], h: f64) -> Result<f64, FrobeniusError> {
        let (r, _, _) = riemann_fd_adaptive(&|p: &[C]| self.metric(p), t, h)?;
        Ok(max_abs(&r))
    }

    fn exact_homogeneity(&self) -> Option<(f64, f64)> {
        let (mult, _) = self.base.exact_homogeneity()?;
        Some((mult, self.metric_exact_residual))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub max_riemann: f64,
    /// `max |R_fd − R_closed| / max(1, max |R_closed|)`.
    pub closed_form_discrepancy: f64,
    pub converged: bool,
}

/// Finite-difference curvature of `σ²η` compared with the closed form.
pub fn curvature_report(st: &DeformedStructure, points: &[Vec<C>], h: f64) -> Result<CurvatureReport, FrobeniusError> {
    let mut rep = CurvatureReport { max_riemann: 0.0, closed_form_discrepancy: 0.0, converged: true };
    for t in points {
        let (fd, _, conv) = riemann_fd_adaptive(&|p: &[C]| st.metric(p), t, h)?;
        let cf = st.closed_form_riemann(t);
        let scale = max_abs(&cf).max(1.0);
        let gap = fd.iter().zip(&cf).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        rep.max_riemann = rep.max_riemann.max(max_abs(&fd));
        rep.closed_form_discrepancy = rep.closed_form_discrepancy.max(gap);
        rep.converged &= conv;
    }
    Ok(rep)
}

impl AxiomReport {
    pub fn passes_with(&self, identity_tol: f64, curvature_tol: f64) -> bool {
        let [inv, pot, flat, unit, assoc, hom] = self.six();
        [inv, pot, unit, assoc, hom].iter().all(|&r| r < identity_tol) && flat < curvature_tol
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformReport {
    pub label: String,
    pub j_ee_zero: bool,
    pub criterion: CriterionReport,
    pub axioms: AxiomReport,
    pub axioms_pass: bool,
    pub curvature: CurvatureReport,
    pub weight_d: C,
    pub new_weight_d: C,
    /// `2 − D`, or `D` when `σ` is constant.
    pub expected_weight_d: C,
    pub weight_rule_residual: f64,
    /// Criterion verdict equals axiom verdict.
    pub iff_consistent: bool,
}

pub fn conformal_deform(base: &FrobeniusChart, spec: &DeformationSpec, points: &[Vec<C>], h: f64) -> Result<DeformReport, FrobeniusError> {
    if base.n < 3 {
        return Err(FrobeniusError::DimensionTooSmall(base.n));
    }
    let st = DeformedStructure::new(base, spec.sigma_inverse.clone());
    st.check_nonvanishing(points)?;
    let criterion = deformation_criterion(base, spec, points);
    let axioms = check_frobenius(&st, points, h)?;
    let axioms_pass = axioms.passes_with(TOL_IDENTITY, TOL_CURVATURE);
    let curvature = curvature_report(&st, points, h)?;
    let constant = st.flat_coordinates();
    let expected = if constant { base.weight_d } else { cr(2.0) - base.weight_d };
    Ok(DeformReport {
        label: spec.label.clone(),
        j_ee_zero: base.j_ee().norm() < TOL_IDENTITY,
        iff_consistent: criterion.passes == axioms_pass,
        criterion,
        axioms,
        axioms_pass,
        curvature,
        weight_d: base.weight_d,
        new_weight_d: st.weight_d,
        expected_weight_d: expected,
        weight_rule_residual: (st.weight_d - expected).norm(),
    })
}

/// Trivial ℂ*-bundle over a flat chart: `(p*∘, p*e, p*E, λ²p*η)` in fiber coordinate `λ`.
#[derive(Clone, Debug)]
pub struct BundleChart {
    pub base: FrobeniusChart,
}

/// Fiber weights of `(∘, e, E, J)`.
pub const STRUCTURE_WEIGHTS: [f64; 4] = [0.0, 0.0, 0.0, 2.0];

impl BundleChart {
    pub fn new(base: FrobeniusChart) -> Self {
        Self { base }
    }

    /// `(c_ij^k, e, E, J)` at base point `t` and fiber coordinate `lambda`.
    pub fn tuple_at(&self, t: &[C], lambda: C) -> [Vec<C>; 4] {
        let j = self.base.eta.map(|x| x * lambda * lambda);
        [self.base.structure(t), self.base.unit.clone(), self.base.euler.eval(t), j.as_slice().to_vec()]
    }

    /// Weights `k` with `T(αλ) = α^k T(λ)`, measured from the tuple.
    pub fn measured_weights(&self, t: &[C]) -> [f64; 4] {
        let alpha = 3.0;
        let lo = self.tuple_at(t, cr(1.0));
        let hi = self.tuple_at(t, cr(alpha));
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = (max_abs(&hi[k]) / max_abs(&lo[k])).ln() / alpha.ln();
        }
        out
    }

    /// Structure pulled back along the section `λ = 1/g` (the base is `g = 1`).
    pub fn section_structure(&self, g: &Poly<C>) -> DeformedStructure {
        DeformedStructure::new(&self.base, g.clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodSectionReport {
    pub good: bool,
    pub c_fit: C,
    pub residual: f64,
}

/// Criterion `d(g/f) = c·η(e, ·)/f²`, fitted by least squares over the points.
pub fn good_section_test(bundle: &BundleChart, f: &Poly<C>, g: &Poly<C>, points: &[Vec<C>]) -> Result<GoodSectionReport, FrobeniusError> {
    let n = bundle.base.n;
    let mut rows = Vec::with_capacity(points.len());
    for t in points {
        let (fv, gv) = (f.eval(t), g.eval(t));
        if fv.norm() < TOL_SINGULAR || gv.norm() < TOL_SINGULAR {
            return Err(FrobeniusError::RatioSingular);
        }
        // f²·d(g/f) = f dg − g df
        rows.push((0..n).map(|i| fv * g.deriv(i).eval(t) - gv * f.deriv(i).eval(t)).collect::<Vec<C>>());
    }
    let (c_fit, residual) = fit_multiple(&rows, &bundle.base.j_of_unit());
    Ok(GoodSectionReport { good: residual < TOL_IDENTITY, c_fit, residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionCheck {
    pub label: String,
    pub good: GoodSectionReport,
    pub axioms: AxiomReport,
    pub axioms_pass: bool,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConformalStructureReport {
    pub weights: [f64; 4],
    pub weights_match: bool,
    pub sections: Vec<SectionCheck>,
    /// max |I*(rescaled) − I*| with `c = 2`.
    pub rescaling_gap: f64,
    pub passes: bool,
}

/// Weight table, per-section criterion plus full axiom check, and rescaling identity.
pub fn check_conformal_structure(
    bundle: &BundleChart,
    sections: &[(String, Poly<C>)],
    points: &[Vec<C>],
    h: f64,
) -> Result<ConformalStructureReport, FrobeniusError> {
    let n = bundle.base.n;
    let weights = bundle.measured_weights(&points[0]);
    let weights_match = weights.iter().zip(STRUCTURE_WEIGHTS).all(|(a, b)| (a - b).abs() < 1e-12);
    let one = Poly::constant(n, cr(1.0));
    let mut checks = Vec::new();
    for (label, g) in sections {
        let good = good_section_test(bundle, &one, g, points)?;
        let st = bundle.section_structure(g);
        st.check_nonvanishing(points)?;
        let axioms = check_frobenius(&st, points, h)?;
        let axioms_pass = axioms.passes_with(TOL_IDENTITY, TOL_CURVATURE);
        checks.push(SectionCheck { label: label.clone(), consistent: good.good == axioms_pass, good, axioms, axioms_pass });
    }
    let resc = bundle.base.rescaled(cr(2.0));
    let mut rescaling_gap: f64 = 0.0;
    for t in points {
        let a = intersection_form(&bundle.base, t)?;
        let b = intersection_form(&resc, t)?;
        rescaling_gap = rescaling_gap.max((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let passes = weights_match && rescaling_gap == 0.0 && checks.iter().all(|c| c.consistent);
    Ok(ConformalStructureReport { weights, weights_match, sections: checks, rescaling_gap, passes })
}

/// Christoffel symbols of a metric evaluator by central differences (exposed for diagnostics).
pub fn christoffel_numeric(st: &DeformedStructure, t: &[C], h: f64) -> Result<Vec<C>, FrobeniusError> {
    christoffel_fd(&|p: &[C]| st.metric(p), t, h)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn pts(chart: &FrobeniusChart, k: usize) -> Vec<Vec<C>> {
        chart.sample_points(k, 11)
    }

    #[test]
    fn christoffel_closed_form_matches_numeric() {
        let base = a3();
        let st = DeformedStructure::new(&base, &Poly::var(3, 1) + &Poly::constant(3, cr(0.5)));
        for t in pts(&base, 3) {
            let a = st.christoffel(&t);
            let b = christoffel_numeric(&st, &t, 1e-3).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-8));
        }
    }

    #[test]
    fn curvature_closed_form_sign() {
        let base = a3();
        let st = DeformedStructure::new(&base, &Poly::var(3, 1) + &Poly::constant(3, cr(0.5)));
        let rep = curvature_report(&st, &pts(&base, 3), 2e-3).unwrap();
        assert!(rep.max_riemann > 1e-3);
        assert!(rep.closed_form_discrepancy < 1e-5, "{rep:?}");
    }

    #[test]
    fn a3_null_affine_deformation() {
        let base = a3();
        let spec = DeformationSpec::affine(cz(), &[cz(), cz(), cr(1.3)]);
        assert_eq!(spec.affine_norm(&base.eta_inv), Some(cz()));
        let rep = conformal_deform(&base, &spec, &pts(&base, 6), 2e-3).unwrap();
        assert!(rep.criterion.passes && rep.axioms_pass, "{rep:?}");
        assert!(rep.curvature.max_riemann < 1e-6);
        assert_eq!(rep.new_weight_d, cr(0.5));
        assert_eq!(rep.weight_rule_residual, 0.0);
    }

    #[test]
    fn a3_generic_deformation_fails() {
        let base = a3();
        let spec = DeformationSpec::affine(cz(), &[cz(), cr(1.0), cz()]);
        let rep = conformal_deform(&base, &spec, &pts(&base, 6), 2e-3).unwrap();
        assert!(!rep.criterion.passes && !rep.axioms_pass && rep.iff_consistent);
        assert!(rep.axioms.potentiality.max(rep.axioms.flatness) > 1e-3);
    }

    #[test]
    fn vanishing_sigma_is_singular() {
        let base = a3();
        let spec = DeformationSpec::affine(cz(), &[cz(), cz(), cr(1.0)]);
        let err = conformal_deform(&base, &spec, &[vec![cz(); 3]], 1e-3).unwrap_err();
        assert!(matches!(err, FrobeniusError::DeformationSingular(_)));
    }

    #[test]
    fn trivial_sections() {
        let bundle = BundleChart::new(elliptic_cusp(1.0));
        let one = Poly::constant(3, cr(1.0));
        let p = pts(&bundle.base, 5);
        let r = good_section_test(&bundle, &one, &one, &p).unwrap();
        assert!(r.good && r.c_fit == cz());
        let r = good_section_test(&bundle, &one, &Poly::constant(3, cr(2.5)), &p).unwrap();
        assert!(r.good && r.c_fit == cz());
        let w = bundle.measured_weights(&p[0]);
        assert!(w.iter().zip(STRUCTURE_WEIGHTS).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
