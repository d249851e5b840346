//! Exact rational vectors and matrices.
//!
//! Group identities in the Weyl module are checked with zero tolerance, so
//! everything here is backed by arbitrary-precision rationals.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `p/q` form, or just `p` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde helper: rationals serialize as `"p/q"` strings.
pub fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

pub fn ser_rationals<S: serde::Serializer>(qs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(format_rational))
}

pub type RatVector = Vec<Rational>;

pub fn rat_vector(entries: &[i64]) -> RatVector {
    entries.iter().map(|&e| rat(e)).collect()
}

pub fn zero_vector(n: usize) -> RatVector {
    vec![Rational::zero(); n]
}

pub fn unit_vector(n: usize, i: usize) -> RatVector {
    let mut v = zero_vector(n);
    v[i] = Rational::one();
    v
}

pub fn vec_add(x: &[Rational], y: &[Rational]) -> RatVector {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn vec_sub(x: &[Rational], y: &[Rational]) -> RatVector {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn vec_scale(s: &Rational, x: &[Rational]) -> RatVector {
    x.iter().map(|a| s * a).collect()
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_integers(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| rat(entries[i * cols + j]))
    }

    /// `u vᵀ`.
    pub fn outer(u: &[Rational], v: &[Rational]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| &u[i] * &v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> RatVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn apply(&self, v: &[Rational]) -> RatVector {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Bilinear form `xᵀ M y`.
    pub fn bilinear(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let my = self.apply(y);
        x.iter().zip(&my).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|e| e.is_integer())
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> RatMatrix {
        let c0 = cols.start;
        let r0 = rows.start;
        RatMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let t = &f * &a[(col, j)];
                    a[(r, j)] -= t;
                    let t = &f * &inv[(col, j)];
                    inv[(r, j)] -= t;
                }
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Rational {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)].clone();
            det *= &p;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &p;
                for j in col..n {
                    let t = &f * &a[(col, j)];
                    a[(r, j)] -= t;
                }
            }
        }
        det
    }

    /// Rank over ℚ.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            let Some(pivot) = (rank..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(pivot, rank);
            let p = a[(rank, col)].clone();
            for r in rank + 1..a.rows {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] / &p;
                for j in col..a.cols {
                    let t = &f * &a[(rank, j)];
                    a[(r, j)] -= t;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inertia `(n_plus, n_zero, n_minus)` of a symmetric matrix, by exact
    /// congruence diagonalisation.
    pub fn inertia(&self) -> (usize, usize, usize) {
        assert!(self.is_symmetric(), "inertia needs a symmetric matrix");
        let mut a = self.clone();
        let n = a.rows;
        let (mut plus, mut minus) = (0, 0);
        let mut k = 0;
        while k < n {
            if a[(k, k)].is_zero() {
                if let Some(r) = (k + 1..n).find(|&r| !a[(r, r)].is_zero()) {
                    a.swap_rows(r, k);
                    a.swap_cols(r, k);
                } else if let Some(r) = (k + 1..n).find(|&r| !a[(k, r)].is_zero()) {
                    // e_k <- e_k + e_r makes the diagonal 2·a_kr (a_rr = 0 here).
                    for j in 0..n {
                        let t = a[(r, j)].clone();
                        a[(k, j)] += t;
                    }
                    for i in 0..n {
                        let t = a[(i, r)].clone();
                        a[(i, k)] += t;
                    }
                } else {
                    k += 1;
                    continue;
                }
            }
            let p = a[(k, k)].clone();
            if p.is_positive() {
                plus += 1;
            } else {
                minus += 1;
            }
            for r in k + 1..n {
                if a[(r, k)].is_zero() {
                    continue;
                }
                let f = &a[(r, k)] / &p;
                for j in 0..n {
                    let t = &f * &a[(k, j)];
                    a[(r, j)] -= t;
                }
                for i in 0..n {
                    let t = &f * &a[(i, k)];
                    a[(i, r)] -= t;
                }
            }
            k += 1;
        }
        (plus, n - plus - minus, minus)
    }

    pub fn to_complex(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| Complex64::new(to_f64(&self[(i, j)]), 0.0))
    }

    /// Integer entries as `i64`, or `None` if some entry is fractional or too large.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.data
            .iter()
            .map(|e| if e.is_integer() { e.numer().to_i64() } else { None })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = RatMatrix::from_integers(3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert_eq!(m.determinant(), rat(18));
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = RatMatrix::from_integers(2, 2, &[1, 2, 2, 4]);
        assert!(m.inverse().is_none());
        assert_eq!(m.rank(), 1);
        assert!(m.determinant().is_zero());
    }

    #[test]
    fn inertia_of_hyperbolic_plane() {
        let h = RatMatrix::from_integers(2, 2, &[0, 1, 1, 0]);
        assert_eq!(h.inertia(), (1, 0, 1));
        let d = RatMatrix::from_integers(3, 3, &[-2, 1, 0, 1, -2, 0, 0, 0, 0]);
        assert_eq!(d.inertia(), (0, 1, 2));
    }

    #[test]
    fn formats_fractions() {
        assert_eq!(format_rational(&ratio(-3, 6)), "-1/2");
        assert_eq!(format_rational(&rat(4)), "4");
    }
}
