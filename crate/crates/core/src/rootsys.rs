//! Elliptic root systems of type X_l^(1,1) over a simply-laced base and their
//! 2-extensions.
//!
//! Basis order of F² is fixed throughout the crate:
//! `(α_1, …, α_l, a, b, a*, b*)`. The first `l + 2` vectors span F, the pair
//! `(a, b)` spans the radical of I_F and `(a*, b*)` are the isotropic duals
//! added by the 2-extension.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{format_rational, rat, vec_scale, zero_vector, RatMatrix, RatVector, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootSystemError {
    #[error("unsupported base type: {0}")]
    UnsupportedType(String),
    #[error("invalid rank {rank} for base type {base}")]
    InvalidRank { base: BaseType, rank: usize },
    #[error("radius must be at least {min}, got {got}")]
    RadiusTooSmall { min: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseType {
    A,
    D,
    E,
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BaseType::A => "A",
            BaseType::D => "D",
            BaseType::E => "E",
        };
        f.write_str(s)
    }
}

impl FromStr for BaseType {
    type Err = RootSystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(BaseType::A),
            "D" | "d" => Ok(BaseType::D),
            "E" | "e" => Ok(BaseType::E),
            other => Err(RootSystemError::UnsupportedType(other.to_string())),
        }
    }
}

impl BaseType {
    fn valid_rank(self, l: usize) -> bool {
        match self {
            BaseType::A => l >= 1,
            BaseType::D => l >= 4,
            BaseType::E => (6..=8).contains(&l),
        }
    }

    /// Cartan matrix of the finite simply-laced system (Bourbaki labelling).
    pub fn cartan_matrix(self, l: usize) -> Result<RatMatrix, RootSystemError> {
        if !self.valid_rank(l) {
            return Err(RootSystemError::InvalidRank { base: self, rank: l });
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        match self {
            BaseType::A => edges.extend((1..l).map(|i| (i - 1, i))),
            BaseType::D => {
                edges.extend((1..l - 1).map(|i| (i - 1, i)));
                edges.push((l - 3, l - 1));
            }
            BaseType::E => {
                edges.push((0, 2));
                edges.push((1, 3));
                edges.extend((3..l).map(|i| (i - 1, i)));
            }
        }
        let mut c = RatMatrix::identity(l).scale(&rat(2));
        for (i, j) in edges {
            c[(i, j)] = rat(-1);
            c[(j, i)] = rat(-1);
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub plus: usize,
    pub zero: usize,
    pub minus: usize,
}

impl Signature {
    pub fn as_triple(&self) -> (usize, usize, usize) {
        (self.plus, self.zero, self.minus)
    }
}

/// Finite-rank space with an exact symmetric Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearSpace {
    pub dim: usize,
    pub basis_labels: Vec<String>,
    pub gram: RatMatrix,
    pub signature: Signature,
}

impl BilinearSpace {
    pub fn new(basis_labels: Vec<String>, gram: RatMatrix) -> Self {
        assert!(gram.is_symmetric(), "Gram matrix must be symmetric");
        assert_eq!(basis_labels.len(), gram.rows());
        let (plus, zero, minus) = gram.inertia();
        Self {
            dim: gram.rows(),
            basis_labels,
            gram,
            signature: Signature { plus, zero, minus },
        }
    }

    pub fn pairing(&self, u: &[Rational], v: &[Rational]) -> Rational {
        self.gram.bilinear(u, v)
    }

    /// Restriction to the first `k` basis vectors.
    pub fn leading_block(&self, k: usize) -> BilinearSpace {
        BilinearSpace::new(self.basis_labels[..k].to_vec(), self.gram.submatrix(0..k, 0..k))
    }
}

/// A root `α + n·a + m·b` with `α` given in simple-root coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Root {
    pub finite: RatVector,
    pub n: i64,
    pub m: i64,
}

impl Root {
    pub fn new(finite: RatVector, n: i64, m: i64) -> Self {
        Self { finite, n, m }
    }
}

/// Elliptic root system `R = R_f + ℤa + ℤb` together with its 2-extension.
#[derive(Clone, Debug)]
pub struct EllipticRootSystem {
    pub base_type: BaseType,
    pub l: usize,
    pub cartan: RatMatrix,
    /// Finite roots in simple-root coordinates.
    pub finite_roots: Vec<RatVector>,
    pub space: BilinearSpace,
    /// Oriented basis of the radical, as basis indices `(a, b)`.
    pub orientation: (usize, usize),
}

pub fn build_system(base_type: BaseType, l: usize) -> Result<EllipticRootSystem, RootSystemError> {
    let cartan = base_type.cartan_matrix(l)?;
    let n = l + 4;
    let mut gram = RatMatrix::zeros(n, n);
    for i in 0..l {
        for j in 0..l {
            gram[(i, j)] = -cartan[(i, j)].clone();
        }
    }
    // hyperbolic pairs (a, a*) and (b, b*)
    gram[(l, l + 2)] = Rational::one();
    gram[(l + 2, l)] = Rational::one();
    gram[(l + 1, l + 3)] = Rational::one();
    gram[(l + 3, l + 1)] = Rational::one();

    let mut labels: Vec<String> = (1..=l).map(|i| format!("alpha{i}")).collect();
    labels.extend(["a", "b", "a*", "b*"].map(String::from));

    let finite_roots = finite_roots_from_cartan(&cartan);
    Ok(EllipticRootSystem {
        base_type,
        l,
        cartan,
        finite_roots,
        space: BilinearSpace::new(labels, gram),
        orientation: (l, l + 1),
    })
}

/// Weyl-orbit closure of the simple roots, in simple-root coordinates.
fn finite_roots_from_cartan(cartan: &RatMatrix) -> Vec<RatVector> {
    let l = cartan.rows();
    let mut seen: HashSet<RatVector> = HashSet::new();
    let mut queue: VecDeque<RatVector> = VecDeque::new();
    for i in 0..l {
        let e = crate::exact::unit_vector(l, i);
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(v) = queue.pop_front() {
        let cv = cartan.apply(&v);
        for (i, coeff) in cv.iter().enumerate() {
            let mut w = v.clone();
            w[i] -= coeff;
            if seen.insert(w.clone()) {
                queue.push_back(w);
            }
        }
    }
    let mut roots: Vec<RatVector> = seen.into_iter().collect();
    roots.sort_by_key(|v| root_order(v));
    roots
}

fn root_order(v: &[Rational]) -> (bool, Rational, Vec<Rational>) {
    let height: Rational = v.iter().sum();
    (height.is_negative(), height.abs(), v.to_vec())
}

impl EllipticRootSystem {
    pub fn dim(&self) -> usize {
        self.l + 4
    }

    pub fn idx_a(&self) -> usize {
        self.l
    }

    pub fn idx_b(&self) -> usize {
        self.l + 1
    }

    pub fn idx_a_dual(&self) -> usize {
        self.l + 2
    }

    pub fn idx_b_dual(&self) -> usize {
        self.l + 3
    }

    pub fn gram(&self) -> &RatMatrix {
        &self.space.gram
    }

    pub fn pairing(&self, u: &[Rational], v: &[Rational]) -> Rational {
        self.space.pairing(u, v)
    }

    /// `I(u, β^∨) = 2 I(u, β) / I(β, β)`; `None` for isotropic `β`.
    pub fn coroot_pairing(&self, u: &[Rational], beta: &[Rational]) -> Option<Rational> {
        let norm = self.pairing(beta, beta);
        if norm.is_zero() {
            return None;
        }
        Some(rat(2) * self.pairing(u, beta) / norm)
    }

    /// The (F, I_F) block: finite simple roots plus the radical.
    pub fn f_block(&self) -> BilinearSpace {
        self.space.leading_block(self.l + 2)
    }

    pub fn basis_vector(&self, i: usize) -> RatVector {
        crate::exact::unit_vector(self.dim(), i)
    }

    pub fn vec_a(&self) -> RatVector {
        self.basis_vector(self.idx_a())
    }

    pub fn vec_b(&self) -> RatVector {
        self.basis_vector(self.idx_b())
    }

    pub fn vec_a_dual(&self) -> RatVector {
        self.basis_vector(self.idx_a_dual())
    }

    pub fn vec_b_dual(&self) -> RatVector {
        self.basis_vector(self.idx_b_dual())
    }

    /// Embeds a finite-block vector (simple-root coordinates) into F².
    pub fn embed_finite(&self, finite: &[Rational]) -> RatVector {
        let mut v = zero_vector(self.dim());
        v[..self.l].clone_from_slice(finite);
        v
    }

    pub fn root_vector(&self, root: &Root) -> RatVector {
        let mut v = self.embed_finite(&root.finite);
        v[self.idx_a()] = rat(root.n);
        v[self.idx_b()] = rat(root.m);
        v
    }

    /// Simple root `α_i` (zero-based).
    pub fn simple_root(&self, i: usize) -> Root {
        Root::new(crate::exact::unit_vector(self.l, i), 0, 0)
    }

    /// Gram matrix multiplied by a nonzero scalar; basis and roots unchanged.
    pub fn with_gram_scale(&self, lambda: &Rational) -> EllipticRootSystem {
        assert!(!lambda.is_zero());
        let mut out = self.clone();
        out.space = BilinearSpace::new(self.space.basis_labels.clone(), self.space.gram.scale(lambda));
        out
    }

    /// Same space with a replaced finite root list (used to probe the axiom checks).
    pub fn with_finite_roots(&self, roots: Vec<RatVector>) -> EllipticRootSystem {
        let mut out = self.clone();
        out.finite_roots = roots;
        out
    }

    /// Sign of I_F on F: −1 for the negative semi-definite convention used here.
    pub fn form_sign(&self) -> i32 {
        let sig = self.f_block().signature;
        if sig.plus == 0 {
            -1
        } else {
            1
        }
    }
}

/// All roots `α + n·a + m·b` with `|n|, |m| ≤ radius`.
pub fn enumerate_roots(sys: &EllipticRootSystem, radius: usize) -> Vec<Root> {
    let r = radius as i64;
    let mut out = Vec::with_capacity(sys.finite_roots.len() * (2 * radius + 1).pow(2));
    for alpha in &sys.finite_roots {
        for n in -r..=r {
            for m in -r..=r {
                out.push(Root::new(alpha.clone(), n, m));
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct AxiomReport {
    pub radius: usize,
    /// Axiom 1: the truncated roots span F.
    pub lattice_full: bool,
    pub lattice_rank: usize,
    /// Axiom 2: `I(α, β^∨) ∈ ℤ` on all truncated pairs.
    pub integrality: bool,
    /// Axiom 3: reflections map roots to roots (inside the window).
    pub closure: bool,
    pub closure_checked: usize,
    pub closure_skipped: usize,
    /// Axiom 4: the finite pairing graph is connected.
    pub irreducible: bool,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.lattice_full && self.integrality && self.closure && self.irreducible
    }
}

/// Decomposes a vector of F² into (finite part, n, m) if it lies in F with
/// integral radical coordinates.
fn decompose(sys: &EllipticRootSystem, v: &[Rational]) -> Option<(RatVector, i64, i64)> {
    if !v[sys.idx_a_dual()].is_zero() || !v[sys.idx_b_dual()].is_zero() {
        return None;
    }
    let n = &v[sys.idx_a()];
    let m = &v[sys.idx_b()];
    if !n.is_integer() || !m.is_integer() {
        return None;
    }
    let to_i64 = |q: &Rational| num_traits::ToPrimitive::to_i64(q.numer());
    Some((v[..sys.l].to_vec(), to_i64(n)?, to_i64(m)?))
}

pub fn check_axioms(sys: &EllipticRootSystem, radius: usize) -> Result<AxiomReport, RootSystemError> {
    if radius < 1 {
        return Err(RootSystemError::RadiusTooSmall { min: 1, got: radius });
    }
    let roots = enumerate_roots(sys, radius);
    let vectors: Vec<RatVector> = roots.iter().map(|r| sys.root_vector(r)).collect();
    let f_dim = sys.l + 2;

    let span = RatMatrix::from_fn(vectors.len(), f_dim, |i, j| vectors[i][j].clone());
    let lattice_rank = span.rank();
    let lattice_full = lattice_rank == f_dim;

    // Gβ and I(β, β) once per root.
    let g_vectors: Vec<RatVector> = vectors.iter().map(|v| sys.gram().apply(v)).collect();
    let norms: Vec<Rational> = vectors
        .iter()
        .zip(&g_vectors)
        .map(|(v, gv)| dot(v, gv))
        .collect();
    let coroot = |u: &[Rational], j: usize| -> Option<Rational> {
        if norms[j].is_zero() {
            None
        } else {
            Some(rat(2) * dot(u, &g_vectors[j]) / &norms[j])
        }
    };

    let mut integrality = true;
    for u in &vectors {
        for j in 0..vectors.len() {
            match coroot(u, j) {
                Some(p) if p.is_integer() => {}
                _ => {
                    integrality = false;
                    break;
                }
            }
        }
        if !integrality {
            break;
        }
    }

    let finite_set: HashSet<&RatVector> = sys.finite_roots.iter().collect();
    let r = radius as i64;
    let (mut closure, mut checked, mut skipped) = (true, 0usize, 0usize);
    for (j, beta) in vectors.iter().enumerate() {
        for u in &vectors {
            let Some(p) = coroot(u, j) else {
                closure = false;
                continue;
            };
            let image = crate::exact::vec_sub(u, &vec_scale(&p, beta));
            match decompose(sys, &image) {
                Some((finite, n, m)) => {
                    if n.abs() > r || m.abs() > r {
                        skipped += 1;
                        continue;
                    }
                    checked += 1;
                    if !finite_set.contains(&finite) {
                        closure = false;
                    }
                }
                None => {
                    checked += 1;
                    closure = false;
                }
            }
        }
    }

    let irreducible = pairing_graph_connected(sys);
    Ok(AxiomReport {
        radius,
        lattice_full,
        lattice_rank,
        integrality,
        closure,
        closure_checked: checked,
        closure_skipped: skipped,
        irreducible,
    })
}

fn dot(x: &[Rational], y: &[Rational]) -> Rational {
    x.iter().zip(y).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

fn pairing_graph_connected(sys: &EllipticRootSystem) -> bool {
    let vecs: Vec<RatVector> = sys.finite_roots.iter().map(|r| sys.embed_finite(r)).collect();
    if vecs.is_empty() {
        return false;
    }
    let mut seen = vec![false; vecs.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..vecs.len() {
            if !seen[j] && !sys.pairing(&vecs[i], &vecs[j]).is_zero() {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Signed-marking predicate for `v = p·a + q·b`.
///
/// True iff `(p, q)` is primitive and the image of the truncated root set in
/// `F/ℝv` contains no pair `(β, cβ)` with `c ∉ {±1}`.
pub fn is_signed_marking(sys: &EllipticRootSystem, v: (i64, i64), radius: usize) -> bool {
    let (p, q) = v;
    if (p, q) == (0, 0) || p.gcd(&q) != 1 {
        return false;
    }
    // F/ℝv ≅ (finite block) ⊕ ℝ, with the radical coordinate n·a + m·b ↦ q·n − p·m.
    let mut rays: BTreeMap<RatVector, Vec<Rational>> = BTreeMap::new();
    let mut seen: HashSet<RatVector> = HashSet::new();
    for root in enumerate_roots(sys, radius) {
        let mut image = root.finite.clone();
        image.push(rat(q * root.n - p * root.m));
        if !seen.insert(image.clone()) {
            continue;
        }
        let Some(lead) = image.iter().find(|c| !c.is_zero()).cloned() else {
            continue;
        };
        let key = vec_scale(&(Rational::one() / &lead), &image);
        rays.entry(key).or_default().push(lead);
    }
    rays.values().all(|scalars| {
        let first = scalars[0].abs();
        scalars.iter().all(|s| s.abs() == first)
    })
}

/// JSON-friendly summary used by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct SystemDescription {
    pub base: String,
    pub rank: usize,
    pub dim: usize,
    pub signature: Signature,
    pub finite_root_count: usize,
    pub root_count: usize,
    pub radius: usize,
    pub gram: Vec<Vec<String>>,
    pub axioms: AxiomReport,
}

pub fn describe(sys: &EllipticRootSystem, radius: usize) -> Result<SystemDescription, RootSystemError> {
    let axioms = check_axioms(sys, radius.max(1))?;
    let gram = (0..sys.dim())
        .map(|i| sys.gram().row(i).iter().map(format_rational).collect())
        .collect();
    Ok(SystemDescription {
        base: sys.base_type.to_string(),
        rank: sys.l,
        dim: sys.dim(),
        signature: sys.space.signature,
        finite_root_count: sys.finite_roots.len(),
        root_count: enumerate_roots(sys, radius).len(),
        radius,
        gram,
        axioms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_vector;

    #[test]
    fn a1_gram_and_signature() {
        let sys = build_system(BaseType::A, 1).unwrap();
        assert_eq!(sys.dim(), 5);
        assert_eq!(sys.gram()[(0, 0)], rat(-2));
        assert_eq!(sys.gram()[(1, 3)], rat(1));
        assert_eq!(sys.gram()[(2, 4)], rat(1));
        assert_eq!(sys.space.signature.as_triple(), (2, 0, 3));
        assert_eq!(sys.f_block().signature.as_triple(), (0, 2, 1));
    }

    #[test]
    fn a2_has_six_roots() {
        let sys = build_system(BaseType::A, 2).unwrap();
        assert_eq!(sys.finite_roots.len(), 6);
        assert_eq!(sys.space.signature.as_triple(), (2, 0, 4));
    }

    #[test]
    fn exceptional_root_counts() {
        for (l, count) in [(6, 72), (7, 126), (8, 240)] {
            let sys = build_system(BaseType::E, l).unwrap();
            assert_eq!(sys.finite_roots.len(), count, "E{l}");
            assert_eq!(sys.space.signature.as_triple(), (2, 0, l + 2));
        }
        assert_eq!(build_system(BaseType::D, 5).unwrap().finite_roots.len(), 40);
    }

    #[test]
    fn rejects_bad_types_and_ranks() {
        assert_eq!(
            "B".parse::<BaseType>(),
            Err(RootSystemError::UnsupportedType("B".into()))
        );
        assert!(matches!(
            build_system(BaseType::E, 5),
            Err(RootSystemError::InvalidRank { .. })
        ));
        assert!(build_system(BaseType::A, 0).is_err());
        assert!(build_system(BaseType::D, 3).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let a1 = build_system(BaseType::A, 1).unwrap();
        assert_eq!(enumerate_roots(&a1, 0).len(), 2);
        assert_eq!(enumerate_roots(&a1, 1).len(), 18);
        let a2 = build_system(BaseType::A, 2).unwrap();
        assert_eq!(enumerate_roots(&a2, 2).len(), 150);
    }

    #[test]
    fn axioms_hold_for_a1() {
        let sys = build_system(BaseType::A, 1).unwrap();
        let report = check_axioms(&sys, 2).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert!(report.closure_skipped > 0);
        assert!(check_axioms(&sys, 0).is_err());
    }

    #[test]
    fn tripled_root_breaks_integrality() {
        let sys = build_system(BaseType::A, 1).unwrap();
        let bad = sys.with_finite_roots(vec![
            rat_vector(&[1]),
            rat_vector(&[-1]),
            rat_vector(&[3]),
            rat_vector(&[-3]),
        ]);
        let report = check_axioms(&bad, 1).unwrap();
        // I(α, (3α)^∨) = 2/3
        assert!(!report.integrality);
    }

    #[test]
    fn doubled_root_is_integral_but_not_reduced() {
        let sys = build_system(BaseType::A, 1).unwrap();
        let doubled = sys.with_finite_roots(vec![
            rat_vector(&[1]),
            rat_vector(&[-1]),
            rat_vector(&[2]),
            rat_vector(&[-2]),
        ]);
        let report = check_axioms(&doubled, 1).unwrap();
        // I(α, (2α)^∨) = 1 and I(2α, α^∨) = 4: a BC-type pairing table is integral.
        assert!(report.integrality);
        assert!(!is_signed_marking(&doubled, (1, 0), 2));
    }

    #[test]
    fn signed_markings_on_a1() {
        let sys = build_system(BaseType::A, 1).unwrap();
        assert!(is_signed_marking(&sys, (1, 0), 3));
        assert!(!is_signed_marking(&sys, (2, 0), 3));
        assert!(is_signed_marking(&sys, (3, 5), 6));
        assert!(is_signed_marking(&sys, (-3, -5), 6));
        assert!(!is_signed_marking(&sys, (0, 0), 1));
    }

    #[test]
    fn radical_rows_vanish_on_f() {
        let sys = build_system(BaseType::D, 4).unwrap();
        for idx in [sys.idx_a(), sys.idx_b()] {
            for j in 0..sys.l + 2 {
                assert!(sys.gram()[(idx, j)].is_zero());
            }
        }
    }
}
