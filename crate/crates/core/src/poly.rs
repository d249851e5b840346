//! Sparse multivariate polynomials over an exact or floating coefficient ring.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::exact::Rational;

/// Coefficient ring.
pub trait Coeff: Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn from_int(i: i64) -> Self;
}

impl Coeff for Complex64 {
    fn from_int(i: i64) -> Self {
        Complex64::new(i as f64, 0.0)
    }
}

impl Coeff for Rational {
    fn from_int(i: i64) -> Self {
        Rational::from_integer(i.into())
    }
}

#[derive(Clone, PartialEq)]
pub struct Poly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Coeff> Poly<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::monomial(nvars, c, vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, T::one(), e)
    }

    pub fn monomial(nvars: usize, c: T, exponents: Vec<u32>) -> Self {
        assert_eq!(exponents.len(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(exponents, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (T, Vec<u32>)>) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: T) {
        let entry = self.terms.entry(e).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(e, c)| (c.clone() * s.clone(), e.clone())))
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c.clone() * T::from_int(e[i] as i64));
        }
        out
    }

    pub fn eval(&self, t: &[T]) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in t.iter().zip(e) {
                for _ in 0..k {
                    term = term * x.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }
}

impl Poly<Complex64> {
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients with modulus below `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(e, c)| (*c, e.clone())))
    }
}

impl<T: Coeff> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<T: Coeff> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

#[allow(clippy::suspicious_arithmetic_impl)] // exponents add under multiplication
impl<T: Coeff> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<T: Coeff + fmt::Debug> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| format!("{c:?}·t^{e:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    #[test]
    fn derivative_and_eval() {
        // p = t0² t1 / 2 + 3 t1
        let p = Poly::from_terms(2, [(ratio(1, 2), vec![2, 1]), (rat(3), vec![0, 1])]);
        assert_eq!(p.deriv(0), Poly::monomial(2, rat(1), vec![1, 1]));
        assert_eq!(p.eval(&[rat(2), rat(5)]), rat(25));
        assert_eq!(p.degree(), 3);
        assert!(p.deriv(0).deriv(0).deriv(0).is_zero());
    }

    #[test]
    fn ring_operations() {
        let x = Poly::<Rational>::var(2, 0);
        let y = Poly::<Rational>::var(2, 1);
        let s = &x + &y;
        let d = &x - &y;
        let prod = &s * &d;
        let expected = &(&x * &x) - &(&y * &y);
        assert_eq!(prod, expected);
        assert!((&prod - &expected).is_zero());
    }

    #[test]
    fn complex_coefficients() {
        let p = Poly::from_terms(1, [(Complex64::new(0.0, 1.0), vec![2])]);
        let v = p.eval(&[Complex64::new(1.0, 1.0)]);
        assert!((v - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
        assert_eq!(p.chop(2.0).terms().count(), 0);
    }
}
