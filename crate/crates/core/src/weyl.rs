//! Lifted reflections, the elliptic Weyl group W² on F²_ℂ, Eichler–Siegel
//! transformations, the integral central kernel and its one-parameter center ρ.
//!
//! Group elements act on column vectors in the fixed basis of F²; a product
//! `g·h` applies `h` first.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{format_rational, rat, vec_scale, RatMatrix, RatVector, Rational};
use crate::rootsys::{EllipticRootSystem, Root};

/// Stored witness words never exceed this many letters.
pub const MAX_WORD_STORAGE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error("isotropic vector has no reflection")]
    Isotropic,
    #[error("element does not preserve F")]
    FlagViolation,
    #[error("budget exhausted: no nontrivial kernel element up to word length {0}")]
    BudgetExhausted(usize),
}

/// Anything that acts linearly on F²_ℂ.
pub trait LinearAction {
    fn complex_matrix(&self) -> DMatrix<Complex64>;
}

/// Exact element of O(F²) together with an optional generating word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalElement {
    pub matrix: RatMatrix,
    pub word: Option<Vec<String>>,
}

impl OrthogonalElement {
    pub fn identity(n: usize) -> Self {
        Self { matrix: RatMatrix::identity(n), word: Some(Vec::new()) }
    }

    pub fn from_matrix(matrix: RatMatrix) -> Self {
        Self { matrix, word: None }
    }

    /// `self · other` (other applied first). Words concatenate while short enough.
    pub fn compose(&self, other: &OrthogonalElement) -> OrthogonalElement {
        let word = match (&self.word, &other.word) {
            (Some(x), Some(y)) if x.len() + y.len() <= MAX_WORD_STORAGE => {
                let mut w = x.clone();
                w.extend(y.iter().cloned());
                Some(w)
            }
            _ => None,
        };
        OrthogonalElement { matrix: self.matrix.mul(&other.matrix), word }
    }

    /// Inverse through orthogonality, `g⁻¹ = G⁻¹ gᵀ G`; falls back to elimination.
    pub fn inverse(&self, gram: &RatMatrix) -> Option<OrthogonalElement> {
        let matrix = if self.is_orthogonal(gram) {
            gram.inverse()?.mul(&self.matrix.transpose()).mul(gram)
        } else {
            self.matrix.inverse()?
        };
        let word = self.word.as_ref().map(|w| w.iter().rev().cloned().collect());
        Some(OrthogonalElement { matrix, word })
    }

    pub fn apply(&self, v: &[Rational]) -> RatVector {
        self.matrix.apply(v)
    }

    pub fn is_orthogonal(&self, gram: &RatMatrix) -> bool {
        self.matrix.transpose().mul(gram).mul(&self.matrix) == *gram
    }

    /// `g(F) ⊆ F` and `g(rad) ⊆ rad` in the fixed basis (rank `l`).
    pub fn preserves_flag(&self, l: usize) -> bool {
        let n = self.matrix.rows();
        let f_dim = l + 2;
        let f_ok = (0..f_dim).all(|j| (f_dim..n).all(|i| self.matrix[(i, j)].is_zero()));
        let rad_ok = (l..l + 2).all(|j| (0..n).filter(|i| !(l..l + 2).contains(i)).all(|i| self.matrix[(i, j)].is_zero()));
        f_ok && rad_ok
    }

    /// Determinant of the restriction to rad I_F.
    pub fn radical_determinant(&self, l: usize) -> Rational {
        let m = &self.matrix;
        &m[(l, l)] * &m[(l + 1, l + 1)] - &m[(l, l + 1)] * &m[(l + 1, l)]
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }
}

impl LinearAction for OrthogonalElement {
    fn complex_matrix(&self) -> DMatrix<Complex64> {
        self.matrix.to_complex()
    }
}

/// Complex linear map on F²_ℂ (used for ρ(t) with t ∈ ℂ).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexElement {
    pub matrix: DMatrix<Complex64>,
}

impl ComplexElement {
    pub fn compose(&self, other: &ComplexElement) -> ComplexElement {
        ComplexElement { matrix: &self.matrix * &other.matrix }
    }

    /// `max |gᵀ G g − G|`.
    pub fn orthogonality_residual(&self, gram: &RatMatrix) -> f64 {
        let g = gram.to_complex();
        let d = self.matrix.transpose() * &g * &self.matrix - g;
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance_to(&self, other: &DMatrix<Complex64>) -> f64 {
        (&self.matrix - other).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl LinearAction for ComplexElement {
    fn complex_matrix(&self) -> DMatrix<Complex64> {
        self.matrix.clone()
    }
}

/// Human-readable root label such as `alpha1+alpha2+a-2b`.
pub fn root_label(root: &Root) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (i, c) in root.finite.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let name = format!("alpha{}", i + 1);
        parts.push(signed_term(c, &name, parts.is_empty()));
    }
    for (k, name) in [(root.n, "a"), (root.m, "b")] {
        if k != 0 {
            parts.push(signed_term(&rat(k), name, parts.is_empty()));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.concat()
    }
}

fn signed_term(c: &Rational, name: &str, first: bool) -> String {
    let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
    let mag = c.abs();
    if mag.is_one() {
        format!("{sign}{name}")
    } else {
        format!("{sign}{}{name}", format_rational(&mag))
    }
}

/// Matrix of `u ↦ u − I(u, β^∨) β` for an arbitrary non-isotropic vector β.
pub fn reflection_matrix(sys: &EllipticRootSystem, beta: &[Rational]) -> Result<RatMatrix, WeylError> {
    let gram = sys.gram();
    let norm = gram.bilinear(beta, beta);
    if norm.is_zero() {
        return Err(WeylError::Isotropic);
    }
    // I(u, β^∨) = (2/I(β,β)) (Gβ)ᵀu
    let g_beta = vec_scale(&(rat(2) / norm), &gram.apply(beta));
    Ok(RatMatrix::identity(sys.dim()).sub(&RatMatrix::outer(beta, &g_beta)))
}

pub fn reflect(sys: &EllipticRootSystem, beta: &Root) -> Result<OrthogonalElement, WeylError> {
    let m = reflection_matrix(sys, &sys.root_vector(beta))?;
    Ok(OrthogonalElement { matrix: m, word: Some(vec![root_label(beta)]) })
}

/// Tensor `Σ uᵢ ⊗ vᵢ` in F² ⊗ F²; equality is equality of the canonical matrix.
#[derive(Clone, Debug)]
pub struct ESTensor {
    pub terms: Vec<(RatVector, RatVector)>,
    pub canonical_form: RatMatrix,
}

impl PartialEq for ESTensor {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_form == other.canonical_form
    }
}

impl Eq for ESTensor {}

impl ESTensor {
    pub fn zero(n: usize) -> Self {
        Self { terms: Vec::new(), canonical_form: RatMatrix::zeros(n, n) }
    }

    pub fn new(n: usize, terms: Vec<(RatVector, RatVector)>) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for (u, v) in &terms {
            m = m.add(&RatMatrix::outer(u, v));
        }
        Self { terms, canonical_form: m }
    }

    /// Single-term-per-column decomposition of a given matrix.
    pub fn from_canonical(m: RatMatrix) -> Self {
        let n = m.rows();
        let terms = (0..m.cols())
            .filter(|&j| !m.column(j).iter().all(|x| x.is_zero()))
            .map(|j| (m.column(j), crate::exact::unit_vector(n, j)))
            .collect();
        Self { terms, canonical_form: m }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let terms = self.terms.iter().map(|(u, v)| (vec_scale(s, u), v.clone())).collect();
        Self { terms, canonical_form: self.canonical_form.scale(s) }
    }

    /// `a ⊗ b − b ⊗ a`.
    pub fn radical_wedge(sys: &EllipticRootSystem) -> Self {
        let (a, b) = (sys.vec_a(), sys.vec_b());
        Self::new(sys.dim(), vec![(a.clone(), b.clone()), (vec_scale(&rat(-1), &b), a)])
    }
}

/// `u ↦ u − Σ uᵢ I(u, vᵢ)`, i.e. the matrix `1 − M G`.
pub fn es(sys: &EllipticRootSystem, t: &ESTensor) -> OrthogonalElement {
    let m = RatMatrix::identity(sys.dim()).sub(&t.canonical_form.mul(sys.gram()));
    OrthogonalElement::from_matrix(m)
}

/// Semigroup product with `es(t1 ∘ t2) = es(t1) · es(t2)`.
pub fn es_product(sys: &EllipticRootSystem, t1: &ESTensor, t2: &ESTensor) -> ESTensor {
    let mut terms = t1.terms.clone();
    terms.extend(t2.terms.iter().cloned());
    for (u, v) in &t1.terms {
        for (w, x) in &t2.terms {
            let p = sys.pairing(v, w);
            if !p.is_zero() {
                terms.push((vec_scale(&-p, u), x.clone()));
            }
        }
    }
    let canonical = t1
        .canonical_form
        .add(&t2.canonical_form)
        .sub(&t1.canonical_form.mul(sys.gram()).mul(&t2.canonical_form));
    debug_assert_eq!(ESTensor::new(sys.dim(), terms.clone()).canonical_form, canonical);
    ESTensor { terms, canonical_form: canonical }
}

/// Restriction to F and the kernel flag `g|_F = id`.
pub fn pi2_restrict(sys: &EllipticRootSystem, g: &OrthogonalElement) -> Result<(RatMatrix, bool), WeylError> {
    let f_dim = sys.l + 2;
    let n = sys.dim();
    for j in 0..f_dim {
        for i in f_dim..n {
            if !g.matrix[(i, j)].is_zero() {
                return Err(WeylError::FlagViolation);
            }
        }
    }
    let block = g.matrix.submatrix(0..f_dim, 0..f_dim);
    let flag = block.is_identity();
    Ok((block, flag))
}

/// Coefficient `c` with `g = es(c·(a⊗b − b⊗a))`, or `None` if `g` is not of that form.
pub fn radical_wedge_coefficient(sys: &EllipticRootSystem, g: &RatMatrix) -> Option<Rational> {
    let (ia, ib) = (sys.idx_a(), sys.idx_b_dual());
    // es(c(a⊗b − b⊗a))(b*) = b* − c·I(b*, b)·a
    let scale = sys.pairing(&sys.vec_b_dual(), &sys.vec_b());
    let c = -g[(ia, ib)].clone() / scale;
    let candidate = es(sys, &ESTensor::radical_wedge(sys).scale(&c));
    (candidate.matrix == *g).then_some(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct G0Result {
    /// `c` with `g₀ = c·(a⊗b − b⊗a)`.
    #[serde(serialize_with = "crate::exact::ser_rational")]
    pub coefficient: Rational,
    /// `c / sgn(I_F)`, the generator as a positive multiple of `sgn(I_F)(a⊗b − b⊗a)`.
    #[serde(serialize_with = "crate::exact::ser_rational")]
    pub positive_multiple: Rational,
    /// Every distinct positive multiple met in the search, ascending.
    #[serde(serialize_with = "crate::exact::ser_rationals")]
    pub multiples: Vec<Rational>,
    pub all_integer_multiples: bool,
    pub witness_word: Vec<String>,
    pub kernel_elements: usize,
    pub ball_size: usize,
    pub budget: usize,
}

/// Generating reflections `w̃_{α+na+mb}` for positive finite roots α and n, m ∈ {0, 1}.
pub fn generating_roots(sys: &EllipticRootSystem) -> Vec<Root> {
    let mut out = Vec::new();
    for alpha in &sys.finite_roots {
        let height: Rational = alpha.iter().sum();
        if !height.is_positive() {
            continue;
        }
        for (n, m) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            out.push(Root::new(alpha.clone(), n, m));
        }
    }
    out
}

struct BallEntry {
    matrix: Vec<i64>,
    word: Vec<u16>,
}

fn int_mul(x: &[i64], y: &[i64], n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for k in 0..n {
            let a = x[i * n + k];
            if a == 0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += a * y[k * n + j];
            }
        }
    }
    out
}

/// All distinct elements with word length ≤ radius, each with a shortest word.
fn word_ball(gens: &[Vec<i64>], n: usize, radius: usize) -> Vec<BallEntry> {
    let mut identity = vec![0i64; n * n];
    for i in 0..n {
        identity[i * n + i] = 1;
    }
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut ball = vec![BallEntry { matrix: identity.clone(), word: Vec::new() }];
    index.insert(identity, 0);
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &e in &frontier {
            for (gi, g) in gens.iter().enumerate() {
                let m = int_mul(&ball[e].matrix, g, n);
                if index.contains_key(&m) {
                    continue;
                }
                let mut word = ball[e].word.clone();
                word.push(gi as u16);
                index.insert(m.clone(), ball.len());
                next.push(ball.len());
                ball.push(BallEntry { matrix: m, word });
            }
        }
        frontier = next;
    }
    ball
}

/// Searches reflection words of length ≤ `max_word_length` for nontrivial
/// elements of the kernel of π² and returns the minimal positive multiple.
///
/// Translation-pair commutators are tried first; the exhaustive part is a
/// meet-in-the-middle search: every word of length ≤ L factors as `u·v⁻¹`
/// with `|u|, |v| ≤ ⌈L/2⌉` and `π²(u) = π²(v)`.
pub fn compute_g0(sys: &EllipticRootSystem, max_word_length: usize) -> Result<G0Result, WeylError> {
    let n = sys.dim();
    let l = sys.l;
    let sign = Rational::from_integer(sys.form_sign().into());
    let roots = generating_roots(sys);
    let labels: Vec<String> = roots.iter().map(root_label).collect();
    let gens: Vec<Vec<i64>> = roots
        .iter()
        .map(|r| {
            reflect(sys, r)
                .and_then(|g| g.matrix.to_i64().ok_or(WeylError::FlagViolation))
        })
        .collect::<Result<_, _>>()?;

    // (positive multiple, word)
    let mut found: Vec<(Rational, Vec<String>)> = Vec::new();
    let to_rat = |m: &[i64]| RatMatrix::from_integers(n, n, m);
    let record = |m: &[i64], word: Vec<String>, found: &mut Vec<(Rational, Vec<String>)>| {
        if let Some(c) = radical_wedge_coefficient(sys, &to_rat(m)) {
            if !c.is_zero() {
                found.push((c.abs(), word));
            }
        }
    };

    // translation commutators [w̃_{β+a}w̃_β, w̃_{β+b}w̃_β], word length 8
    if max_word_length >= 8 {
        for (k, _) in roots.iter().enumerate().step_by(4) {
            let (w0, wa, wb) = (&gens[k], &gens[k + 1], &gens[k + 2]);
            let ta = int_mul(wa, w0, n);
            let tb = int_mul(wb, w0, n);
            let ta_inv = int_mul(w0, wa, n);
            let tb_inv = int_mul(w0, wb, n);
            let comm = int_mul(&int_mul(&ta, &tb, n), &int_mul(&ta_inv, &tb_inv, n), n);
            let idx = [k + 1, k, k + 2, k, k, k + 1, k, k + 2];
            record(&comm, idx.iter().map(|&i| labels[i].clone()).collect(), &mut found);
        }
    }

    let radius = max_word_length.div_ceil(2);
    let ball = word_ball(&gens, n, radius);
    let f_dim = l + 2;
    let mut classes: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, e) in ball.iter().enumerate() {
        let key: Vec<i64> = (0..f_dim)
            .flat_map(|r| (0..f_dim).map(move |c| (r, c)))
            .map(|(r, c)| e.matrix[r * n + c])
            .collect();
        classes.entry(key).or_default().push(i);
    }
    let mut identity = vec![0i64; n * n];
    for i in 0..n {
        identity[i * n + i] = 1;
    }
    let mut keys: Vec<&Vec<i64>> = classes.keys().collect();
    keys.sort();
    for key in keys {
        let members = &classes[key];
        for &u in members {
            for &v in members {
                if u == v || ball[u].word.len() + ball[v].word.len() > max_word_length {
                    continue;
                }
                // v⁻¹ = reversed word, generators being involutions
                let inv = ball[v]
                    .word
                    .iter()
                    .rev()
                    .fold(identity.clone(), |acc, &gi| int_mul(&acc, &gens[gi as usize], n));
                let g = int_mul(&ball[u].matrix, &inv, n);
                let mut word: Vec<String> = ball[u].word.iter().map(|&i| labels[i as usize].clone()).collect();
                word.extend(ball[v].word.iter().rev().map(|&i| labels[i as usize].clone()));
                record(&g, word, &mut found);
            }
        }
    }

    if found.is_empty() {
        return Err(WeylError::BudgetExhausted(max_word_length));
    }
    // deterministic choice: smallest multiple, then shortest word, then lexicographic
    found.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.len().cmp(&y.1.len())).then(x.1.cmp(&y.1)));
    let minimal = found[0].0.clone();
    let mut multiples: Vec<Rational> = found.iter().map(|(c, _)| c.clone()).collect();
    multiples.dedup();
    let all_integer_multiples = multiples.iter().all(|c| (c / &minimal).is_integer());
    let mut witness_word = found[0].1.clone();
    witness_word.truncate(MAX_WORD_STORAGE);
    Ok(G0Result {
        coefficient: &minimal * &sign,
        positive_multiple: minimal,
        multiples,
        all_integer_multiples,
        witness_word,
        kernel_elements: found.len(),
        ball_size: ball.len(),
        budget: max_word_length,
    })
}

/// `ρ(t) = es(t·c·(a⊗b − b⊗a))` with complex `t`.
pub fn rho(sys: &EllipticRootSystem, c: &Rational, t: Complex64) -> ComplexElement {
    let wedge = ESTensor::radical_wedge(sys).scale(c).canonical_form.to_complex();
    let g = sys.gram().to_complex();
    let n = sys.dim();
    ComplexElement { matrix: DMatrix::identity(n, n) - wedge * g * t }
}

/// Closed-form multiple `(I_R : I)(l_max + 1)/m_max` for A₁, reported for comparison only.
pub fn closed_form_a1_multiple(index_ratio: &Rational) -> Rational {
    let (l_max, m_max) = (rat(1), rat(1));
    index_ratio * (l_max + Rational::one()) / m_max
}

/// Random reflection word of length in `1..=max_len` over roots with `|n|, |m| ≤ radius`.
pub fn random_word<R: Rng>(sys: &EllipticRootSystem, rng: &mut R, max_len: usize, radius: i64) -> OrthogonalElement {
    let len = rng.gen_range(1..=max_len);
    let mut g = OrthogonalElement::identity(sys.dim());
    for _ in 0..len {
        let beta = random_root(sys, rng, radius);
        g = g.compose(&reflect(sys, &beta).expect("roots are anisotropic"));
    }
    g
}

pub fn random_root<R: Rng>(sys: &EllipticRootSystem, rng: &mut R, radius: i64) -> Root {
    let alpha = sys.finite_roots[rng.gen_range(0..sys.finite_roots.len())].clone();
    Root::new(alpha, rng.gen_range(-radius..=radius), rng.gen_range(-radius..=radius))
}

/// Random rational tensor with `terms` summands and small numerators/denominators.
pub fn random_tensor<R: Rng>(sys: &EllipticRootSystem, rng: &mut R, terms: usize) -> ESTensor {
    let n = sys.dim();
    let mut draw = || -> RatVector {
        (0..n)
            .map(|_| Rational::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into()))
            .collect()
    };
    let terms = (0..terms).map(|_| (draw(), draw())).collect();
    ESTensor::new(n, terms)
}

/// `g·w̃_β·g⁻¹ = w̃_{g(β)}`, exactly.
pub fn conjugation_covariant(sys: &EllipticRootSystem, g: &OrthogonalElement, beta: &Root) -> bool {
    let Some(g_inv) = g.inverse(sys.gram()) else {
        return false;
    };
    let w = reflect(sys, beta).expect("roots are anisotropic");
    let lhs = g.compose(&w).compose(&g_inv);
    let image = g.apply(&sys.root_vector(beta));
    match reflection_matrix(sys, &image) {
        Ok(rhs) => lhs.matrix == rhs,
        Err(_) => false,
    }
}

/// Image of a root under `g`, checked to be a root again.
pub fn image_root(sys: &EllipticRootSystem, g: &OrthogonalElement, beta: &Root) -> Option<Root> {
    let v = g.apply(&sys.root_vector(beta));
    let l = sys.l;
    if !v[l + 2].is_zero() || !v[l + 3].is_zero() || !v[l].is_integer() || !v[l + 1].is_integer() {
        return None;
    }
    let finite = v[..l].to_vec();
    if !sys.finite_roots.contains(&finite) {
        return None;
    }
    Some(Root::new(finite, v[l].to_integer().to_i64()?, v[l + 1].to_integer().to_i64()?))
}

/// Difference `es(t1∘t2) − es(t1)es(t2)` is zero.
pub fn es_homomorphic(sys: &EllipticRootSystem, t1: &ESTensor, t2: &ESTensor) -> bool {
    es(sys, &es_product(sys, t1, t2)).matrix == es(sys, t1).matrix.mul(&es(sys, t2).matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ratio, vec_sub};
    use crate::rootsys::{build_system, BaseType};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a1() -> EllipticRootSystem {
        build_system(BaseType::A, 1).unwrap()
    }

    #[test]
    fn reflection_fixes_radical_and_negates_alpha() {
        let sys = a1();
        let w = reflect(&sys, &sys.simple_root(0)).unwrap();
        let alpha = sys.root_vector(&sys.simple_root(0));
        assert_eq!(w.apply(&alpha), vec_scale(&rat(-1), &alpha));
        assert_eq!(w.apply(&sys.vec_a()), sys.vec_a());
        assert_eq!(w.apply(&sys.vec_a_dual()), sys.vec_a_dual());
        assert!(w.compose(&w).is_identity());
        assert!(w.is_orthogonal(sys.gram()));
    }

    #[test]
    fn shifted_reflection_on_a_dual() {
        let sys = a1();
        let beta = Root::new(vec![rat(1)], 1, 0);
        let w = reflect(&sys, &beta).unwrap();
        let expected = crate::exact::vec_add(&sys.vec_a_dual(), &sys.root_vector(&beta));
        assert_eq!(w.apply(&sys.vec_a_dual()), expected);
    }

    #[test]
    fn isotropic_vectors_are_rejected() {
        let sys = a1();
        assert_eq!(reflection_matrix(&sys, &sys.vec_a()), Err(WeylError::Isotropic));
    }

    #[test]
    fn es_hand_values() {
        let sys = a1();
        let n = sys.dim();
        assert!(es(&sys, &ESTensor::zero(n)).is_identity());
        let ab = ESTensor::new(n, vec![(sys.vec_a(), sys.vec_b())]);
        let g = es(&sys, &ab);
        assert_eq!(g.apply(&sys.vec_b_dual()), vec_sub(&sys.vec_b_dual(), &sys.vec_a()));
        for i in 0..sys.l + 2 {
            assert_eq!(g.apply(&sys.basis_vector(i)), sys.basis_vector(i));
        }
        let wedge = es(&sys, &ESTensor::radical_wedge(&sys));
        assert_eq!(wedge.apply(&sys.vec_a_dual()), crate::exact::vec_add(&sys.vec_a_dual(), &sys.vec_b()));
        assert_eq!(wedge.apply(&sys.vec_b_dual()), vec_sub(&sys.vec_b_dual(), &sys.vec_a()));
    }

    #[test]
    fn es_product_hand_values() {
        let sys = a1();
        let n = sys.dim();
        let ab = ESTensor::new(n, vec![(sys.vec_a(), sys.vec_b())]);
        let ba = ESTensor::new(n, vec![(sys.vec_b(), sys.vec_a())]);
        assert_eq!(es_product(&sys, &ab, &ESTensor::zero(n)), ab);
        let sum = ESTensor::new(n, vec![(sys.vec_a(), sys.vec_b()), (sys.vec_b(), sys.vec_a())]);
        assert_eq!(es_product(&sys, &ab, &ba), sum);
        let t1 = ESTensor::new(n, vec![(sys.vec_a_dual(), sys.vec_a())]);
        let t2 = ESTensor::new(n, vec![(sys.vec_a(), sys.vec_a_dual())]);
        let expected = ESTensor::new(n, vec![(sys.vec_a_dual(), sys.vec_a()), (sys.vec_a(), sys.vec_a_dual())]);
        assert_eq!(es_product(&sys, &t1, &t2), expected);
        assert!(es_homomorphic(&sys, &t1, &t2));
    }

    #[test]
    fn restriction_flags() {
        let sys = a1();
        let w = reflect(&sys, &sys.simple_root(0)).unwrap();
        assert!(!pi2_restrict(&sys, &w).unwrap().1);
        let k = es(&sys, &ESTensor::radical_wedge(&sys).scale(&ratio(3, 2)));
        assert!(pi2_restrict(&sys, &k).unwrap().1);
        assert!(pi2_restrict(&sys, &OrthogonalElement::identity(sys.dim())).unwrap().1);
        let bad = es(&sys, &ESTensor::new(sys.dim(), vec![(sys.vec_a_dual(), sys.vec_a_dual())]));
        assert_eq!(pi2_restrict(&sys, &bad), Err(WeylError::FlagViolation));
    }

    #[test]
    fn commutator_lies_in_the_kernel() {
        let sys = a1();
        let r = |n, m| reflect(&sys, &Root::new(vec![rat(1)], n, m)).unwrap();
        let ta = r(1, 0).compose(&r(0, 0));
        let tb = r(0, 1).compose(&r(0, 0));
        let comm = ta
            .compose(&tb)
            .compose(&ta.inverse(sys.gram()).unwrap())
            .compose(&tb.inverse(sys.gram()).unwrap());
        assert!(pi2_restrict(&sys, &comm).unwrap().1);
        let c = radical_wedge_coefficient(&sys, &comm.matrix).unwrap();
        assert_eq!(c, rat(-2));
    }

    #[test]
    fn g0_for_a1() {
        let sys = a1();
        assert_eq!(compute_g0(&sys, 3).unwrap_err(), WeylError::BudgetExhausted(3));
        let r8 = compute_g0(&sys, 8).unwrap();
        assert_eq!(r8.coefficient, rat(-1));
        assert_eq!(r8.positive_multiple, rat(1));
        assert!(r8.all_integer_multiples);
        // shortest kernel words have length 4, e.g. w̃_{α+a+b}w̃_{α+b}w̃_{α}w̃_{α+a}
        assert_eq!(r8.witness_word.len(), 4);
        let r4 = compute_g0(&sys, 4).unwrap();
        assert_eq!(r4.positive_multiple, rat(1));
    }

    #[test]
    fn rho_is_a_one_parameter_group() {
        let sys = a1();
        let c = rat(-1);
        let s = Complex64::new(0.3, -1.1);
        let t = Complex64::new(-0.7, 0.4);
        let lhs = rho(&sys, &c, s).compose(&rho(&sys, &c, t));
        assert!(lhs.distance_to(&rho(&sys, &c, s + t).matrix) < 1e-14);
        assert!(rho(&sys, &c, Complex64::new(0.0, 0.0)).distance_to(&DMatrix::identity(5, 5)) < 1e-15);
        let img = rho(&sys, &c, t).matrix.column(sys.idx_b_dual()).into_owned();
        let expect_a = -t * -1.0;
        assert!((img[sys.idx_a()] - expect_a).norm() < 1e-15);
        assert!(rho(&sys, &c, t).orthogonality_residual(sys.gram()) < 1e-14);
    }

    #[test]
    fn rho_independent_of_gram_scale() {
        let sys = a1();
        let c1 = compute_g0(&sys, 8).unwrap().coefficient;
        let t = Complex64::new(0.25, 0.5);
        for lam in [ratio(1, 2), rat(2), rat(3)] {
            let scaled = sys.with_gram_scale(&lam);
            let c = compute_g0(&scaled, 8).unwrap().coefficient;
            assert_eq!(c, &c1 / &lam);
            assert_eq!(rho(&scaled, &c, t).matrix, rho(&sys, &c1, t).matrix);
        }
    }

    #[test]
    fn words_preserve_flag_and_covary() {
        let sys = build_system(BaseType::A, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let g = random_word(&sys, &mut rng, 6, 2);
            assert!(g.is_orthogonal(sys.gram()));
            assert!(g.preserves_flag(sys.l));
            assert!(g.radical_determinant(sys.l).is_one());
            let beta = random_root(&sys, &mut rng, 2);
            assert!(conjugation_covariant(&sys, &g, &beta));
            assert!(image_root(&sys, &g, &beta).is_some());
        }
    }

    #[test]
    fn labels() {
        assert_eq!(root_label(&Root::new(vec![rat(1), rat(1)], 1, -2)), "alpha1+alpha2+a-2b");
        assert_eq!(root_label(&Root::new(vec![rat(-1)], 0, 0)), "-alpha1");
    }
}
