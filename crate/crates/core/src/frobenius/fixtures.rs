//! Reference charts: a trivial one-dimensional structure, the A₃ polynomial
//! structure with broken variants, and two three-dimensional charts of
//! conformal dimension one.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{cr, cz, i3, CMat, Euler, FrobeniusChart, Multiplication, RawMultiplication};
use crate::poly::Poly;
use num_complex::Complex64 as C;

fn antidiagonal3() -> CMat {
    CMat::from_fn(3, 3, |i, j| if i + j == 2 { cr(1.0) } else { cz() })
}

fn potential(terms: &[(f64, [u32; 3])]) -> Poly<C> {
    Poly::from_terms(3, terms.iter().map(|(c, e)| (cr(*c), e.to_vec())))
}

/// `F = t³/6`, `η = 1`, `E = t∂`, `D = 2`.
pub fn one_dim() -> FrobeniusChart {
    let f = Poly::from_terms(1, [(cr(1.0 / 6.0), vec![3])]);
    FrobeniusChart::new(CMat::from_element(1, 1, cr(1.0)), Multiplication::Potential(f), 0, Euler::diagonal(&[1.0]), cr(2.0))
        .unwrap()
        .with_sample_box(vec![cr(0.5)], 0.4)
}

fn a3_terms(quintic: f64) -> Vec<(f64, [u32; 3])> {
    vec![(0.5, [2, 0, 1]), (0.5, [1, 2, 0]), (0.25, [0, 2, 2]), (1.0 / quintic, [0, 0, 5])]
}

/// A₃ polynomial structure: `F = ½t₁²t₃ + ½t₁t₂² + ¼t₂²t₃² + t₃⁵/60`,
/// `E = t₁∂₁ + ¾t₂∂₂ + ½t₃∂₃`, `D = 3/2`.
pub fn a3() -> FrobeniusChart {
    a3_with(potential(&a3_terms(60.0)), Euler::diagonal(&[1.0, 0.75, 0.5]), antidiagonal3())
}

/// Quintic coefficient `1/59`: WDVV fails.
pub fn a3_perturbed_potential() -> FrobeniusChart {
    a3_with(potential(&a3_terms(59.0)), Euler::diagonal(&[1.0, 0.75, 0.5]), antidiagonal3())
}

/// Euler field with the wrong weights.
pub fn a3_wrong_euler() -> FrobeniusChart {
    a3_with(potential(&a3_terms(60.0)), Euler::diagonal(&[1.0, 0.5, 0.5]), antidiagonal3())
}

/// Metric entry `η₂₂` perturbed: unit and associativity fail.
pub fn a3_perturbed_metric() -> FrobeniusChart {
    let mut eta = antidiagonal3();
    eta[(1, 1)] = cr(1.1);
    a3_with(potential(&a3_terms(60.0)), Euler::diagonal(&[1.0, 0.75, 0.5]), eta)
}

fn a3_with(f: Poly<C>, euler: Euler, eta: CMat) -> FrobeniusChart {
    FrobeniusChart::new(eta, Multiplication::Potential(f), 0, euler, cr(1.5))
        .unwrap()
        .with_sample_box(vec![cr(0.7), cr(0.7), cr(1.0)], 0.25)
}

/// `F = ½t₁²t₃ + ½t₁t₂² + κt₂⁴`, `E = t₁∂₁ + ½t₂∂₂`, `D = 1`.
pub fn elliptic_cusp(kappa: f64) -> FrobeniusChart {
    let f = potential(&[(0.5, [2, 0, 1]), (0.5, [1, 2, 0]), (kappa, [0, 4, 0])]);
    FrobeniusChart::new(antidiagonal3(), Multiplication::Potential(f), 0, Euler::diagonal(&[1.0, 0.5, 0.0]), cr(1.0))
        .unwrap()
        .with_sample_box(vec![cr(0.7), cr(0.7), cr(1.0)], 0.25)
}

fn sigma1(n: u64) -> f64 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).sum::<u64>() as f64
}

/// k-th derivative of the quasi-modular `E₂(τ) = 1 − 24 Σ σ₁(n) qⁿ`.
pub fn e2_derivative(tau: C, k: u32) -> C {
    let q = (C::new(0.0, 2.0 * PI) * tau).exp();
    let mut acc = cz();
    let mut qn = q;
    for n in 1..=60u64 {
        let w = C::new(0.0, 2.0 * PI * n as f64).powu(k);
        acc += w * sigma1(n) * qn;
        qn *= q;
    }
    let head = if k == 0 { cr(1.0) } else { cz() };
    head - acc * 24.0
}

/// `F = ½t₁²t₃ + ½t₁t₂² + γ(t₃)t₂⁴` with `γ = −πi E₂(t₃)/48`, given by its
/// third derivatives; WDVV reduces to the Chazy equation for γ.
pub fn elliptic_e2() -> FrobeniusChart {
    let lowered = |t: &[C]| -> Vec<C> {
        let g: Vec<C> = (0..4).map(|k| e2_derivative(t[2], k) * C::new(0.0, -PI / 48.0)).collect();
        let x = t[1];
        let mut c = vec![cz(); 27];
        let mut set = |i: usize, j: usize, k: usize, v: C| {
            for (a, b, d) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                c[i3(3, a, b, d)] = v;
            }
        };
        set(0, 0, 2, cr(1.0));
        set(0, 1, 1, cr(1.0));
        set(1, 1, 1, g[0] * x * 24.0);
        set(1, 1, 2, g[1] * x * x * 12.0);
        set(1, 2, 2, g[2] * x.powu(3) * 4.0);
        set(2, 2, 2, g[3] * x.powu(4));
        c
    };
    let raw = RawMultiplication { label: "elliptic E2 chart".into(), lowered: Arc::new(lowered) };
    FrobeniusChart::new(antidiagonal3(), Multiplication::Raw(raw), 0, Euler::diagonal(&[1.0, 0.5, 0.0]), cr(1.0))
        .unwrap()
        .with_sample_box(vec![cr(0.3), cr(0.3), C::new(0.0, 1.0)], 0.2)
}

/// Fixture by name, for the command line.
pub fn by_name(name: &str) -> Option<FrobeniusChart> {
    Some(match name {
        "one-dim" => one_dim(),
        "a3" => a3(),
        "a3-perturbed-potential" => a3_perturbed_potential(),
        "a3-wrong-euler" => a3_wrong_euler(),
        "a3-perturbed-metric" => a3_perturbed_metric(),
        "elliptic-cusp" => elliptic_cusp(1.0),
        "elliptic-e2" => elliptic_e2(),
        _ => return None,
    })
}

pub const FIXTURE_NAMES: &[&str] =
    &["one-dim", "a3", "a3-perturbed-potential", "a3-wrong-euler", "a3-perturbed-metric", "elliptic-cusp", "elliptic-e2"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chazy_holds_for_e2_gamma() {
        // WDVV for γ(t₃)t₂⁴: γ''' = 144γ'² − 96γγ''
        let tau = C::new(0.1, 1.1);
        let g: Vec<C> = (0..4).map(|k| e2_derivative(tau, k) * C::new(0.0, -PI / 48.0)).collect();
        let r = g[3] - (g[1] * g[1] * 144.0 - g[0] * g[2] * 96.0);
        assert!(r.norm() < 1e-10 * g[3].norm().max(1.0), "{r}");
    }

    #[test]
    fn names_resolve() {
        for n in FIXTURE_NAMES {
            assert!(by_name(n).is_some());
        }
        assert!(by_name("nope").is_none());
    }
}
