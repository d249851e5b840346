//! Property tests for the algebraic invariants of each layer.

use ellwk::domain::{act, quadric, sample_d2, scale};
use ellwk::exact::{rat, ratio, Rational};
use ellwk::frobenius::fixtures::a3;
use ellwk::frobenius::{check_frobenius, intersection_form, symmetry_residual};
use ellwk::invariants::{multiply, GradedInvariant};
use ellwk::poly::Poly;
use ellwk::rootsys::{build_system, BaseType, EllipticRootSystem, Root};
use ellwk::weyl::{es, es_homomorphic, es_product, random_tensor, random_word, reflect, rho, ESTensor};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn system(rank: usize) -> EllipticRootSystem {
    build_system(BaseType::A, rank).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn es_is_a_semigroup_homomorphism(seed in any::<u64>(), rank in 1usize..=2) {
        let sys = system(rank);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t1 = random_tensor(&sys, &mut rng, 2);
        let t2 = random_tensor(&sys, &mut rng, 2);
        prop_assert!(es_homomorphic(&sys, &t1, &t2));
    }

    #[test]
    fn es_product_is_associative(seed in any::<u64>()) {
        let sys = system(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, d) = (random_tensor(&sys, &mut rng, 1), random_tensor(&sys, &mut rng, 1), random_tensor(&sys, &mut rng, 1));
        prop_assert_eq!(es_product(&sys, &es_product(&sys, &a, &b), &d), es_product(&sys, &a, &es_product(&sys, &b, &d)));
    }

    #[test]
    fn reflections_are_orthogonal_involutions(n in -6i64..=6, m in -6i64..=6, k in 0usize..3, rank in 1usize..=2) {
        let sys = system(rank);
        let alpha = sys.finite_roots[k % sys.finite_roots.len()].clone();
        let w = reflect(&sys, &Root::new(alpha.clone(), n, m)).unwrap();
        prop_assert!(w.is_orthogonal(sys.gram()));
        prop_assert!(w.preserves_flag(sys.l));
        prop_assert!(w.compose(&w).is_identity());
        // the root itself is negated
        let v = sys.root_vector(&Root::new(alpha, n, m));
        let neg: Vec<Rational> = v.iter().map(|x| -x.clone()).collect();
        prop_assert_eq!(w.apply(&v), neg);
    }

    #[test]
    fn random_words_are_conjugation_covariant(seed in any::<u64>()) {
        let sys = system(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_word(&sys, &mut rng, 5, 3);
        let beta = ellwk::weyl::random_root(&sys, &mut rng, 3);
        prop_assert!(ellwk::weyl::conjugation_covariant(&sys, &g, &beta));
    }

    #[test]
    fn rho_is_a_one_parameter_group(s in -2.0f64..2.0, t in -2.0f64..2.0, u in -1.0f64..1.0) {
        let sys = system(1);
        let cf = rat(-1);
        let lhs = rho(&sys, &cf, c(s, u)).compose(&rho(&sys, &cf, c(t, -u)));
        prop_assert!(lhs.distance_to(&rho(&sys, &cf, c(s + t, 0.0)).matrix) < 1e-12);
    }

    #[test]
    fn gram_rescaling_keeps_the_centre(num in 1i64..6, den in 1i64..6) {
        let sys = system(1);
        let lambda = ratio(num, den);
        let scaled = sys.with_gram_scale(&lambda);
        let cf = rat(-1);
        let a = es(&sys, &ESTensor::radical_wedge(&sys).scale(&cf));
        let b = es(&scaled, &ESTensor::radical_wedge(&scaled).scale(&(cf / lambda)));
        prop_assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn group_and_scaling_preserve_the_quadric(seed in 0u64..10_000, mag in 0.3f64..3.0, arg in 0.0f64..std::f64::consts::TAU) {
        let sys = system(1);
        let x = sample_d2(&sys, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_word(&sys, &mut rng, 4, 2);
        let y = act(&g, &x).unwrap();
        prop_assert!(quadric(&sys, &y).norm() < 1e-10 * y.norm().powi(2).max(1.0));
        let alpha = Complex64::from_polar(mag, arg);
        let z = scale(alpha, &x).unwrap();
        prop_assert!((quadric(&sys, &z) - alpha * alpha * quadric(&sys, &x)).norm() < 1e-12 * z.norm().powi(2).max(1.0));
    }

    #[test]
    fn bidegrees_are_additive(m1 in 1u32..4, m2 in 1u32..4, p in -2.0f64..2.0) {
        let f = GradedInvariant::theta_orbit(vec![rat(0)], m1, 5).unwrap();
        let g = GradedInvariant::theta_orbit(vec![rat(0)], m2, 5).unwrap();
        let a = GradedInvariant::radical_linear(c(1.0, p), c(p, 0.0));
        prop_assert_eq!(multiply(&f, &g).bidegree, (0, (m1 + m2) as i64));
        prop_assert_eq!(multiply(&multiply(&f, &a), &a).bidegree, (-2, m1 as i64));
    }

    #[test]
    fn polynomial_product_rule(a in -3i64..3, b in -3i64..3, e0 in 0u32..4, e1 in 0u32..4) {
        let p = Poly::from_terms(2, [(rat(a), vec![e0, 1]), (rat(1), vec![0, e1])]);
        let q = Poly::from_terms(2, [(rat(b), vec![1, e1]), (rat(2), vec![e0, 0])]);
        for i in 0..2 {
            let lhs = (&p * &q).deriv(i);
            let rhs = &(&p.deriv(i) * &q) + &(&p * &q.deriv(i));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn a3_structure_holds_anywhere(x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0, w in -1.0f64..1.0) {
        let chart = a3();
        let t = vec![c(x, w), c(y, -w), c(z, 0.5 * w)];
        let rep = check_frobenius(&chart, std::slice::from_ref(&t), 1e-3).unwrap();
        prop_assert!(rep.associativity < 1e-9 * (1.0 + z.abs().powi(4)));
        prop_assert!(rep.unit == 0.0 && rep.invariance < 1e-12);
        let form = intersection_form(&chart, &t).unwrap();
        prop_assert_eq!(symmetry_residual(&form), 0.0);
    }

    #[test]
    fn intersection_form_is_rescaling_invariant(re in 0.2f64..3.0, im in -2.0f64..2.0) {
        let chart = a3();
        let cst = c(re, im);
        let resc = chart.rescaled(cst);
        for t in chart.sample_points(3, 7) {
            let a = intersection_form(&chart, &t).unwrap();
            let b = intersection_form(&resc, &t).unwrap();
            let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!((a - b).iter().all(|d| d.norm() < 1e-12 * scale));
        }
    }
}
