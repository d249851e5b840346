//! Exact rational WDVV check of the A₃ fixture data, independent of the
//! floating-point verifier.

use ellwk::exact::{rat, ratio, Rational};
use ellwk::poly::Poly;

fn a3_potential(quintic_den: i64) -> Poly<Rational> {
    Poly::from_terms(
        3,
        [
            (ratio(1, 2), vec![2, 0, 1]),
            (ratio(1, 2), vec![1, 2, 0]),
            (ratio(1, 4), vec![0, 2, 2]),
            (ratio(1, quintic_den), vec![0, 0, 5]),
        ],
    )
}

/// `c_ij^k` for the antidiagonal metric (its own inverse).
fn structure(f: &Poly<Rational>) -> Vec<Poly<Rational>> {
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out.push(f.deriv(i).deriv(j).deriv(2 - k));
            }
        }
    }
    out
}

fn associator(c: &[Poly<Rational>]) -> Vec<Poly<Rational>> {
    let idx = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut p = Poly::zero(3);
                    for m in 0..3 {
                        p = &p + &(&c[idx(i, j, m)] * &c[idx(m, k, l)]);
                        p = &p - &(&c[idx(j, k, m)] * &c[idx(i, m, l)]);
                    }
                    out.push(p);
                }
            }
        }
    }
    out
}

#[test]
fn a3_potential_solves_wdvv_exactly() {
    let c = structure(&a3_potential(60));
    assert!(associator(&c).iter().all(|p| p.is_zero()));
    // e = ∂₁ is the unit
    for j in 0..3 {
        for k in 0..3 {
            let expected = if j == k { Poly::constant(3, rat(1)) } else { Poly::zero(3) };
            assert_eq!(c[j * 3 + k], expected);
        }
    }
}

#[test]
fn perturbed_quintic_breaks_wdvv() {
    let c = structure(&a3_potential(59));
    assert!(associator(&c).iter().any(|p| !p.is_zero()));
}

#[test]
fn a3_potential_is_quasi_homogeneous() {
    // E(F) = (5/2)F for E = t₁∂₁ + ¾t₂∂₂ + ½t₃∂₃, matching D = 3/2
    let f = a3_potential(60);
    let weights = [rat(1), ratio(3, 4), ratio(1, 2)];
    let mut ef = Poly::zero(3);
    for (i, w) in weights.iter().enumerate() {
        ef = &ef + &(&Poly::var(3, i) * &f.deriv(i)).scale(w);
    }
    assert_eq!(ef, f.scale(&ratio(5, 2)));
}

/// Brute-force search for the quintic coefficient over small rationals: only
/// 1/60 solves WDVV.
#[test]
fn quintic_coefficient_is_unique() {
    let mut solutions = Vec::new();
    for den in 1..=120i64 {
        for num in [-1i64, 1] {
            let f = Poly::from_terms(
                3,
                [(ratio(1, 2), vec![2, 0, 1]), (ratio(1, 2), vec![1, 2, 0]), (ratio(1, 4), vec![0, 2, 2]), (ratio(num, den), vec![0, 0, 5])],
            );
            if associator(&structure(&f)).iter().all(|p| p.is_zero()) {
                solutions.push(ratio(num, den));
            }
        }
    }
    assert_eq!(solutions, vec![ratio(1, 60)]);
}
