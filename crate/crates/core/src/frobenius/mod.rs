//! Numerical verifier for Frobenius manifold structures given in flat
//! coordinates, their intersection forms, and (in [`deform`]) conformal
//! deformations of the flat metric and good sections of a trivial ℂ*-bundle.
//!
//! Index conventions: `c_ij^k` is stored at `(i·n + j)·n + k`, Christoffel
//! symbols `Γ^l_ij` at `(l·n + i)·n + j`, and derivatives `∂_l c_ij^k` at
//! `((l·n + i)·n + j)·n + k`.

pub mod chart_file;
pub mod deform;
pub mod fixtures;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::poly::Poly;

pub type CMat = DMatrix<Complex64>;
type C = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrobeniusError {
    #[error("metric degenerate")]
    MetricDegenerate,
    #[error("metric singular at sample")]
    MetricSingular,
    #[error("deformation singular on box (min |σ⁻¹| = {0:e})")]
    DeformationSingular(f64),
    #[error("ratio singular")]
    RatioSingular,
    #[error("conformal deformation needs n ≥ 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("{0}")]
    Format(String),
}

pub fn cz() -> C {
    C::new(0.0, 0.0)
}

pub fn cr(x: f64) -> C {
    C::new(x, 0.0)
}

#[inline]
pub fn i3(n: usize, i: usize, j: usize, k: usize) -> usize {
    (i * n + j) * n + k
}

#[inline]
pub fn i4(n: usize, l: usize, i: usize, j: usize, k: usize) -> usize {
    ((l * n + i) * n + j) * n + k
}

/// Linear Euler field `E = Σ (d_i t^i + r_i) ∂_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Euler {
    pub d: Vec<C>,
    pub r: Vec<C>,
}

impl Euler {
    pub fn diagonal(d: &[f64]) -> Self {
        Self { d: d.iter().map(|&x| cr(x)).collect(), r: vec![cz(); d.len()] }
    }

    pub fn eval(&self, t: &[C]) -> Vec<C> {
        (0..t.len()).map(|i| self.d[i] * t[i] + self.r[i]).collect()
    }

    pub fn scaled(&self, s: C) -> Self {
        Self { d: self.d.iter().map(|x| x * s).collect(), r: self.r.iter().map(|x| x * s).collect() }
    }

    /// `E(p)` for a polynomial `p`.
    pub fn apply_poly(&self, p: &Poly<C>) -> Poly<C> {
        let n = p.nvars();
        let mut out = Poly::zero(n);
        for m in 0..n {
            let coeff = &Poly::var(n, m).scale(&self.d[m]) + &Poly::constant(n, self.r[m]);
            out = &out + &(&coeff * &p.deriv(m));
        }
        out
    }
}

pub type LoweredFn = Arc<dyn Fn(&[C]) -> Vec<C> + Send + Sync>;

/// Totally symmetric `C_ijk(t)` supplied directly, flattened as `n³` values.
#[derive(Clone)]
pub struct RawMultiplication {
    pub label: String,
    pub lowered: LoweredFn,
}

impl std::fmt::Debug for RawMultiplication {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RawMultiplication({})", self.label)
    }
}

#[derive(Clone, Debug)]
pub enum Multiplication {
    Potential(Poly<C>),
    Raw(RawMultiplication),
}

/// Frobenius data in flat coordinates of the constant metric `eta`.
#[derive(Clone, Debug)]
pub struct FrobeniusChart {
    pub n: usize,
    pub eta: CMat,
    pub eta_inv: CMat,
    pub mult: Multiplication,
    pub unit_index: usize,
    /// Unit field as a constant vector (a multiple of `∂_{unit_index}`).
    pub unit: Vec<C>,
    pub euler: Euler,
    pub weight_d: C,
    pub sample_center: Vec<C>,
    pub sample_radius: f64,
    third: Vec<Poly<C>>,
    fourth: Vec<Poly<C>>,
}

impl FrobeniusChart {
    pub fn new(eta: CMat, mult: Multiplication, unit_index: usize, euler: Euler, weight_d: C) -> Result<Self, FrobeniusError> {
        let n = eta.nrows();
        if eta.ncols() != n || unit_index >= n || euler.d.len() != n || euler.r.len() != n {
            return Err(FrobeniusError::Format("dimension mismatch between eta, unit_index and euler".into()));
        }
        let eta_inv = eta.clone().try_inverse().ok_or(FrobeniusError::MetricDegenerate)?;
        if eta_inv.iter().any(|z| !z.is_finite()) {
            return Err(FrobeniusError::MetricDegenerate);
        }
        let (third, fourth) = match &mult {
            Multiplication::Potential(f) => {
                if f.nvars() != n {
                    return Err(FrobeniusError::Format(format!("potential has {} variables, expected {n}", f.nvars())));
                }
                let mut third = Vec::with_capacity(n * n * n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            third.push(f.deriv(i).deriv(j).deriv(k));
                        }
                    }
                }
                let mut fourth = Vec::with_capacity(n.pow(4));
                for l in 0..n {
                    fourth.extend(third.iter().map(|p| p.deriv(l)));
                }
                (third, fourth)
            }
            Multiplication::Raw(_) => (Vec::new(), Vec::new()),
        };
        let mut unit = vec![cz(); n];
        unit[unit_index] = cr(1.0);
        Ok(Self {
            n,
            eta,
            eta_inv,
            mult,
            unit_index,
            unit,
            euler,
            weight_d,
            sample_center: vec![cr(0.7); n],
            sample_radius: 0.25,
            third,
            fourth,
        })
    }

    pub fn with_sample_box(mut self, center: Vec<C>, radius: f64) -> Self {
        assert_eq!(center.len(), self.n);
        self.sample_center = center;
        self.sample_radius = radius;
        self
    }

    pub fn with_euler(&self, euler: Euler) -> Self {
        Self { euler, ..self.clone() }
    }

    pub fn potential(&self) -> Option<&Poly<C>> {
        match &self.mult {
            Multiplication::Potential(p) => Some(p),
            Multiplication::Raw(_) => None,
        }
    }

    /// `C_ijk = ∂_i∂_j∂_k F` (or the raw values).
    pub fn lowered(&self, t: &[C]) -> Vec<C> {
        match &self.mult {
            Multiplication::Potential(_) => self.third.iter().map(|p| p.eval(t)).collect(),
            Multiplication::Raw(raw) => (raw.lowered)(t),
        }
    }

    /// `c_ij^k = η^{kl} C_ijl`.
    pub fn raise(&self, lowered: &[C]) -> Vec<C> {
        let n = self.n;
        let mut out = vec![cz(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i3(n, i, j, k)] = (0..n).map(|l| self.eta_inv[(k, l)] * lowered[i3(n, i, j, l)]).sum();
                }
            }
        }
        out
    }

    /// `η(e, ·)` as a covector.
    pub fn j_of_unit(&self) -> Vec<C> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.unit[i] * self.eta[(i, j)]).sum()).collect()
    }

    pub fn j_ee(&self) -> C {
        (0..self.n).map(|j| self.j_of_unit()[j] * self.unit[j]).sum()
    }

    /// Exact polynomial `c_ij^k`, for potential input.
    pub fn structure_polys(&self) -> Option<Vec<Poly<C>>> {
        self.potential()?;
        let n = self.n;
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut p = Poly::zero(n);
                    for l in 0..n {
                        p = &p + &self.third[i3(n, i, j, l)].scale(&self.eta_inv[(k, l)]);
                    }
                    out.push(p.chop(0.0));
                }
            }
        }
        Some(out)
    }

    /// `(c⁻¹∘, c·e, E, c⁻¹J)`: η → η/c, F → F/c², e → c·e.
    pub fn rescaled(&self, c: C) -> Self {
        let inv = C::new(1.0, 0.0) / c;
        let mult = match &self.mult {
            Multiplication::Potential(f) => Multiplication::Potential(f.scale(&(inv * inv))),
            Multiplication::Raw(raw) => {
                let inner = raw.lowered.clone();
                let s = inv * inv;
                Multiplication::Raw(RawMultiplication {
                    label: format!("{} rescaled", raw.label),
                    lowered: Arc::new(move |t: &[C]| inner(t).into_iter().map(|v| v * s).collect()),
                })
            }
        };
        let mut out = FrobeniusChart::new(self.eta.map(|z| z * inv), mult, self.unit_index, self.euler.clone(), self.weight_d)
            .expect("rescaling keeps the metric invertible");
        out.unit = self.unit.iter().map(|u| u * c).collect();
        out.sample_center = self.sample_center.clone();
        out.sample_radius = self.sample_radius;
        out
    }

    /// Deterministic sample points in the polydisc around `sample_center`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<C>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.sample_center
                    .iter()
                    .map(|c| {
                        let r = self.sample_radius * rng.gen::<f64>().sqrt();
                        c + C::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
                    })
                    .collect()
            })
            .collect()
    }
}

/// A Frobenius-type structure `(∘, e, E, g)` in some coordinate chart.
pub trait FrobeniusStructure: Sync {
    fn dim(&self) -> usize;
    fn metric(&self, t: &[C]) -> CMat;
    /// `Γ^l_ij`.
    fn christoffel(&self, t: &[C]) -> Vec<C>;
    /// `c_ij^k`.
    fn structure(&self, t: &[C]) -> Vec<C>;
    /// `∂_l c_ij^k`.
    fn structure_derivative(&self, t: &[C]) -> Vec<C>;
    fn unit(&self) -> Vec<C>;
    fn euler(&self) -> &Euler;
    fn weight(&self) -> C;
    /// Potentiality holds identically (potential input in flat coordinates).
    fn potentiality_exact(&self) -> bool {
        false
    }
    /// Constant metric in these coordinates.
    fn flat_coordinates(&self) -> bool;
    /// Max |Riemann| at `t`.
    fn curvature(&self, t: &[C], h: f64) -> Result<f64, FrobeniusError>;
    /// Exact `(Lie_E ∘ − ∘, Lie_E g − D g)` coefficient residuals for polynomial data.
    fn exact_homogeneity(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Five-point central derivative of a vector-valued map along coordinate `dir`.
pub fn central_derivative<F>(f: F, t: &[C], dir: usize, h: f64) -> Vec<C>
where
    F: Fn(&[C]) -> Vec<C>,
{
    let shifted = |s: f64| {
        let mut p = t.to_vec();
        p[dir] += cr(s);
        f(&p)
    };
    let (p1, m1, p2, m2) = (shifted(h), shifted(-h), shifted(2.0 * h), shifted(-2.0 * h));
    (0..p1.len()).map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h)).collect()
}

/// Levi-Civita symbols from central differences of the metric.
pub fn christoffel_fd<F>(metric: &F, t: &[C], h: f64) -> Result<Vec<C>, FrobeniusError>
where
    F: Fn(&[C]) -> CMat,
{
    let n = t.len();
    let g = metric(t);
    let g_inv = g.try_inverse().ok_or(FrobeniusError::MetricSingular)?;
    let flat = |p: &[C]| metric(p).as_slice().to_vec();
    // dg[m][(i, j)] = ∂_m g_ij (column-major storage of nalgebra)
    let dg: Vec<Vec<C>> = (0..n).map(|m| central_derivative(flat, t, m, h)).collect();
    let d = |m: usize, i: usize, j: usize| dg[m][i + j * n];
    let mut gamma = vec![cz(); n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[i3(n, l, i, j)] = (0..n).map(|k| g_inv[(l, k)] * (d(i, k, j) + d(j, k, i) - d(k, i, j))).sum::<C>() * 0.5;
            }
        }
    }
    Ok(gamma)
}

/// `R^l_{kij} = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_imΓ^m_jk − Γ^l_jmΓ^m_ik`, stored at `i4(n, l, k, i, j)`.
pub fn riemann_from<G>(gamma_at: &G, t: &[C], h: f64) -> Result<Vec<C>, FrobeniusError>
where
    G: Fn(&[C]) -> Result<Vec<C>, FrobeniusError>,
{
    let n = t.len();
    let gamma = gamma_at(t)?;
    let mut dgam: Vec<Vec<C>> = Vec::with_capacity(n);
    for dir in 0..n {
        let mut pts = Vec::new();
        for s in [h, -h, 2.0 * h, -2.0 * h] {
            let mut p = t.to_vec();
            p[dir] += cr(s);
            pts.push(gamma_at(&p)?);
        }
        dgam.push((0..n * n * n).map(|i| (8.0 * (pts[0][i] - pts[1][i]) - (pts[2][i] - pts[3][i])) / (12.0 * h)).collect());
    }
    let mut r = vec![cz(); n.pow(4)];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = dgam[i][i3(n, l, j, k)] - dgam[j][i3(n, l, i, k)];
                    for m in 0..n {
                        v += gamma[i3(n, l, i, m)] * gamma[i3(n, m, j, k)] - gamma[i3(n, l, j, m)] * gamma[i3(n, m, i, k)];
                    }
                    r[i4(n, l, k, i, j)] = v;
                }
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessReport {
    pub max_riemann: f64,
    /// Step accepted by the halving loop.
    pub h: f64,
    pub converged: bool,
}

/// Max |Riemann component| of a metric from nested central differences; the
/// step is halved until successive estimates agree to 1e−4 relative.
pub fn flatness_residual<F>(metric: &F, t: &[C], h: f64) -> Result<FlatnessReport, FrobeniusError>
where
    F: Fn(&[C]) -> CMat,
{
    let (r, h, converged) = riemann_fd_adaptive(metric, t, h)?;
    Ok(FlatnessReport { max_riemann: max_abs(&r), h, converged })
}

pub fn riemann_fd_adaptive<F>(metric: &F, t: &[C], h0: f64) -> Result<(Vec<C>, f64, bool), FrobeniusError>
where
    F: Fn(&[C]) -> CMat,
{
    let riemann = |h: f64| riemann_from(&|p: &[C]| christoffel_fd(metric, p, h * 0.5), t, h);
    let mut h = h0;
    let mut prev = riemann(h)?;
    for _ in 0..6 {
        let next = riemann(h * 0.5)?;
        let diff = prev.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff <= 1e-4 * max_abs(&next).max(1.0) {
            return Ok((next, h * 0.5, true));
        }
        prev = next;
        h *= 0.5;
    }
    Ok((prev, h, false))
}

pub fn max_abs(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl FrobeniusStructure for FrobeniusChart {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric(&self, _t: &[C]) -> CMat {
        self.eta.clone()
    }

    fn christoffel(&self, _t: &[C]) -> Vec<C> {
        vec![cz(); self.n.pow(3)]
    }

    fn structure(&self, t: &[C]) -> Vec<C> {
        self.raise(&self.lowered(t))
    }

    fn structure_derivative(&self, t: &[C]) -> Vec<C> {
        let n = self.n;
        match &self.mult {
            Multiplication::Potential(_) => {
                let lowered: Vec<C> = self.fourth.iter().map(|p| p.eval(t)).collect();
                let mut out = Vec::with_capacity(n.pow(4));
                for l in 0..n {
                    out.extend(self.raise(&lowered[l * n * n * n..(l + 1) * n * n * n]));
                }
                out
            }
            Multiplication::Raw(_) => {
                let mut out = Vec::with_capacity(n.pow(4));
                for l in 0..n {
                    out.extend(central_derivative(|p| self.structure(p), t, l, 1e-3));
                }
                out
            }
        }
    }

    fn unit(&self) -> Vec<C> {
        self.unit.clone()
    }

    fn euler(&self) -> &Euler {
        &self.euler
    }

    fn weight(&self) -> C {
        self.weight_d
    }

    fn potentiality_exact(&self) -> bool {
        matches!(self.mult, Multiplication::Potential(_))
    }

    fn flat_coordinates(&self) -> bool {
        true
    }

    fn curvature(&self, _t: &[C], _h: f64) -> Result<f64, FrobeniusError> {
        Ok(0.0)
    }

    fn exact_homogeneity(&self) -> Option<(f64, f64)> {
        let polys = self.structure_polys()?;
        Some((lie_structure_residual(&self.euler, &polys, self.n), self.metric_homogeneity_residual()))
    }
}

impl FrobeniusChart {
    /// `max |(d_i + d_j − D) η_ij|` (constant metric, linear E).
    pub fn metric_homogeneity_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max(((self.euler.d[i] + self.euler.d[j] - self.weight_d) * self.eta[(i, j)]).norm());
            }
        }
        worst
    }
}

/// Exact `Lie_E c − c` for polynomial `c_ij^k` and linear diagonal-plus-shift E:
/// `Lie_E c_ij^k = E(c_ij^k) − d_k c_ij^k + d_i c_ij^k + d_j c_ij^k`.
pub fn lie_structure_residual(euler: &Euler, polys: &[Poly<C>], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = &polys[i3(n, i, j, k)];
                let lie = &euler.apply_poly(c) + &c.scale(&(euler.d[i] + euler.d[j] - euler.d[k]));
                worst = worst.max((&lie - c).max_abs_coeff());
            }
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AxiomReport {
    pub invariance: f64,
    pub potentiality: f64,
    pub flatness: f64,
    pub unit: f64,
    pub unit_flat: f64,
    pub associativity: f64,
    pub homogeneity_mult: f64,
    pub homogeneity_metric: f64,
    pub homogeneity_exact: bool,
    pub samples: usize,
}

impl AxiomReport {
    /// The six axiom groups: invariance, potentiality, flatness, unit (incl. ∇e),
    /// associativity, homogeneity (multiplication and metric).
    pub fn six(&self) -> [f64; 6] {
        [
            self.invariance,
            self.potentiality,
            self.flatness,
            self.unit.max(self.unit_flat),
            self.associativity,
            self.homogeneity_mult.max(self.homogeneity_metric),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.six().iter().fold(0.0, |a, &b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

/// Evaluates every axiom residual at the given points.
pub fn check_frobenius(s: &dyn FrobeniusStructure, points: &[Vec<C>], h: f64) -> Result<AxiomReport, FrobeniusError> {
    let n = s.dim();
    let e = s.unit();
    let euler = s.euler().clone();
    let exact = s.exact_homogeneity();
    let mut rep = AxiomReport {
        invariance: 0.0,
        potentiality: 0.0,
        flatness: 0.0,
        unit: 0.0,
        unit_flat: 0.0,
        associativity: 0.0,
        homogeneity_mult: 0.0,
        homogeneity_metric: 0.0,
        homogeneity_exact: exact.is_some(),
        samples: points.len(),
    };
    if let Some((hm, hg)) = exact {
        rep.homogeneity_mult = hm;
        rep.homogeneity_metric = hg;
    }
    let upd = |acc: &mut f64, v: f64| {
        *acc = if v.is_nan() { f64::INFINITY } else { acc.max(v) };
    };
    for t in points {
        let g = s.metric(t);
        if g.clone().try_inverse().is_none() {
            return Err(FrobeniusError::MetricSingular);
        }
        let c = s.structure(t);
        let gam = s.christoffel(t);
        let cc = |i, j, k| c[i3(n, i, j, k)];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let lhs: C = (0..n).map(|m| cc(i, j, m) * g[(m, k)]).sum();
                    let rhs: C = (0..n).map(|m| cc(j, k, m) * g[(i, m)]).sum();
                    upd(&mut rep.invariance, (lhs - rhs).norm());
                    for l in 0..n {
                        let a: C = (0..n).map(|m| cc(i, j, m) * cc(m, k, l)).sum();
                        let b: C = (0..n).map(|m| cc(j, k, m) * cc(i, m, l)).sum();
                        upd(&mut rep.associativity, (a - b).norm());
                    }
                }
                let ec: C = (0..n).map(|i2| e[i2] * cc(i2, i, j)).sum();
                let delta = if i == j { cr(1.0) } else { cz() };
                upd(&mut rep.unit, (ec - delta).norm());
                // ∇_i e^l = Γ^l_ij e^j (e is constant)
                let ne: C = (0..n).map(|m| gam[i3(n, j, i, m)] * e[m]).sum();
                upd(&mut rep.unit_flat, ne.norm());
            }
        }

        let needs_dc = !s.potentiality_exact() || exact.is_none();
        let dc = if needs_dc { s.structure_derivative(t) } else { Vec::new() };
        if !s.potentiality_exact() {
            // ∇_l c_ij^k, compare l ↔ i
            let nabla = |l: usize, i: usize, j: usize, k: usize| -> C {
                let mut v = dc[i4(n, l, i, j, k)];
                for m in 0..n {
                    v += gam[i3(n, k, l, m)] * cc(i, j, m) - gam[i3(n, m, l, i)] * cc(m, j, k) - gam[i3(n, m, l, j)] * cc(i, m, k);
                }
                v
            };
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            upd(&mut rep.potentiality, (nabla(l, i, j, k) - nabla(i, l, j, k)).norm());
                        }
                    }
                }
            }
        }
        if !s.flat_coordinates() {
            upd(&mut rep.flatness, s.curvature(t, h)?);
        }
        if exact.is_none() {
            let ev = euler.eval(t);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut lie: C = (0..n).map(|m| ev[m] * dc[i4(n, m, i, j, k)]).sum();
                        lie += cc(i, j, k) * (euler.d[i] + euler.d[j] - euler.d[k]);
                        upd(&mut rep.homogeneity_mult, (lie - cc(i, j, k)).norm());
                    }
                }
            }
            let dg: Vec<Vec<C>> = if s.flat_coordinates() {
                vec![vec![cz(); n * n]; n]
            } else {
                (0..n).map(|m| central_derivative(|p| s.metric(p).as_slice().to_vec(), t, m, h)).collect()
            };
            for i in 0..n {
                for j in 0..n {
                    let lie: C = (0..n).map(|m| ev[m] * dg[m][i + j * n]).sum::<C>() + g[(i, j)] * (euler.d[i] + euler.d[j]);
                    upd(&mut rep.homogeneity_metric, (lie - s.weight() * g[(i, j)]).norm());
                }
            }
        }
    }
    Ok(rep)
}

/// `I*(dt^i, dt^j) = g(E, g*(dt^i) ∘ g*(dt^j)) = g_ab E^a g^{ip} g^{jq} c_pq^b`.
pub fn intersection_form(s: &dyn FrobeniusStructure, t: &[C]) -> Result<CMat, FrobeniusError> {
    let n = s.dim();
    let g = s.metric(t);
    let g_inv = g.clone().try_inverse().ok_or(FrobeniusError::MetricSingular)?;
    let c = s.structure(t);
    let ev = s.euler().eval(t);
    // w_b = g_ab E^a
    let w: Vec<C> = (0..n).map(|b| (0..n).map(|a| g[(a, b)] * ev[a]).sum()).collect();
    // m_pq = c_pq^b w_b
    let m = CMat::from_fn(n, n, |p, q| (0..n).map(|b| c[i3(n, p, q, b)] * w[b]).sum());
    Ok(&g_inv * m * g_inv.transpose())
}

pub fn symmetry_residual(m: &CMat) -> f64 {
    (m - m.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct EShiftReport {
    /// max |e·I* − J*| over sample points and all index pairs.
    pub first: f64,
    /// max |e²·I*|.
    pub second: f64,
    /// max |D(h) − D(h/2)| of the first-derivative estimates.
    pub richardson_gap: f64,
    pub h: f64,
}

/// Central differences of `I*` along the unit field, compared with `J* = η⁻¹`.
pub fn check_e_shift(chart: &FrobeniusChart, points: &[Vec<C>], h: f64) -> Result<EShiftReport, FrobeniusError> {
    let along = |t: &[C], s: f64| -> Result<CMat, FrobeniusError> {
        let p: Vec<C> = t.iter().zip(&chart.unit).map(|(x, e)| x + e * s).collect();
        intersection_form(chart, &p)
    };
    let first_at = |t: &[C], h: f64| -> Result<CMat, FrobeniusError> {
        Ok(((along(t, h)? - along(t, -h)?) * cr(8.0) - (along(t, 2.0 * h)? - along(t, -2.0 * h)?)) / cr(12.0 * h))
    };
    let mut rep = EShiftReport { first: 0.0, second: 0.0, richardson_gap: 0.0, h: h * 0.5 };
    for t in points {
        let d_h = first_at(t, h)?;
        let d_half = first_at(t, h * 0.5)?;
        rep.richardson_gap = rep.richardson_gap.max((&d_h - &d_half).iter().map(|z| z.norm()).fold(0.0, f64::max));
        rep.first = rep.first.max((&d_half - &chart.eta_inv).iter().map(|z| z.norm()).fold(0.0, f64::max));
        let hh = h * 0.5;
        let second = (along(t, 2.0 * hh)? * cr(-1.0) + along(t, hh)? * cr(16.0) - along(t, 0.0)? * cr(30.0) + along(t, -hh)? * cr(16.0) - along(t, -2.0 * hh)?) / cr(12.0 * hh * hh);
        rep.second = rep.second.max(second.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn one_dimensional_chart() {
        let chart = one_dim();
        let pts = chart.sample_points(10, 1);
        let rep = check_frobenius(&chart, &pts, 1e-3).unwrap();
        assert_eq!(rep.max_residual(), 0.0, "{rep:?}");
        for t in &pts {
            let i = intersection_form(&chart, t).unwrap();
            assert!((i[(0, 0)] - t[0]).norm() < 1e-15);
        }
        let es = check_e_shift(&chart, &pts, 1e-2).unwrap();
        assert!(es.first < 1e-12 && es.second < 1e-9, "{es:?}");
    }

    #[test]
    fn a3_chart_passes() {
        let chart = a3();
        let pts = chart.sample_points(50, 2);
        let rep = check_frobenius(&chart, &pts, 1e-3).unwrap();
        assert!(rep.passes(1e-9), "{rep:?}");
        assert!(rep.homogeneity_exact);
    }

    #[test]
    fn negative_controls_fail() {
        for chart in [a3_perturbed_potential(), a3_wrong_euler(), a3_perturbed_metric()] {
            let pts = chart.sample_points(20, 3);
            let rep = check_frobenius(&chart, &pts, 1e-3).unwrap();
            assert!(rep.max_residual() > 1e-3, "{rep:?}");
        }
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let eta = CMat::zeros(2, 2);
        let f = Poly::zero(2);
        let err = FrobeniusChart::new(eta, Multiplication::Potential(f), 0, Euler::diagonal(&[1.0, 1.0]), cr(1.0)).unwrap_err();
        assert_eq!(err, FrobeniusError::MetricDegenerate);
    }

    #[test]
    fn intersection_form_identities() {
        let chart = a3();
        let pts = chart.sample_points(20, 4);
        for t in &pts {
            assert_eq!(symmetry_residual(&intersection_form(&chart, t).unwrap()), 0.0);
        }
        let es = check_e_shift(&chart, &pts, 1e-2).unwrap();
        assert!(es.first < 1e-7 && es.second < 1e-7, "{es:?}");
        let doubled = chart.with_euler(chart.euler.scaled(cr(2.0)));
        let es2 = check_e_shift(&doubled, &pts, 1e-2).unwrap();
        assert!((es2.first - 1.0).abs() < 1e-6, "{es2:?}");
        let resc = chart.rescaled(cr(2.0));
        for t in &pts {
            let a = intersection_form(&chart, t).unwrap();
            let b = intersection_form(&resc, t).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn raw_elliptic_chart_passes() {
        let chart = elliptic_e2();
        let pts = chart.sample_points(10, 5);
        let rep = check_frobenius(&chart, &pts, 1e-3).unwrap();
        assert!(rep.passes(1e-7), "{rep:?}");
        assert!(!rep.homogeneity_exact);
    }
}
