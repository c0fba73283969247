use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use projector_core::dynamics::{steady_state, superop_exp};
use projector_core::linalg::{dagger, max_abs, random_complex, random_density, random_hermitian, trace};
use projector_core::liouvillian::{assemble_static, build_projector, LindbladTerm};
use projector_core::reductions::{sideband_spectral, sideband_rates, OptomechParams, Sideband};
use projector_core::superop::{
    devectorize, kron, partial_trace, trace_distance, vectorize, DensityMatrix, SuperOperator, TensorSpace,
};

fn random_generator(seed: u64, d: usize, norm: f64) -> SuperOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_hermitian(&mut rng, d, norm / 2.0);
    let jump = random_complex(&mut rng, d, d);
    let scale = norm / (4.0 * projector_core::linalg::norm_one(&jump).powi(2));
    let terms = [LindbladTerm::new(jump, scale).unwrap()];
    assemble_static(&h, &terms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponential_is_a_semigroup(seed in any::<u64>(), s in 0.0f64..1.5, t in 0.0f64..1.5) {
        let l = random_generator(seed, 3, 5.0);
        let lhs = superop_exp(&l, s + t).unwrap();
        let rhs = superop_exp(&l, s).unwrap().compose(&superop_exp(&l, t).unwrap());
        prop_assert!(max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-10);
    }

    #[test]
    fn lindblad_generators_preserve_trace_and_hermiticity(seed in any::<u64>(), d in 2usize..5) {
        let l = random_generator(seed, d, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let x = random_hermitian(&mut rng, d, 1.0);
        let y = l.apply(&x).unwrap();
        prop_assert!(trace(&y).norm() < 1e-12);
        prop_assert!(max_abs(&(&y - &dagger(&y))) < 1e-12);
    }

    #[test]
    fn evolved_states_stay_states(seed in any::<u64>(), t in 0.0f64..3.0) {
        let l = random_generator(seed, 3, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let rho = random_density(&mut rng, 3);
        let out = superop_exp(&l, t).unwrap().apply(&rho).unwrap();
        prop_assert!(DensityMatrix::new(out).is_ok());
    }

    #[test]
    fn vectorization_matches_kronecker_rule(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_complex(&mut rng, d, d);
        let b = random_complex(&mut rng, d, d);
        let x = random_complex(&mut rng, d, d);
        let lhs = vectorize(&a.dot(&x).dot(&b)).unwrap();
        let rhs = kron(&b.t().to_owned(), &a).dot(&vectorize(&x).unwrap());
        prop_assert!(lhs.iter().zip(rhs.iter()).all(|(p, q)| (p - q).norm() < 1e-10));
        prop_assert_eq!(devectorize(&vectorize(&x).unwrap(), d).unwrap(), x);
    }

    #[test]
    fn partial_trace_undoes_tensor(seed in any::<u64>(), ds in 1usize..4, db in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rs = DensityMatrix::new(random_density(&mut rng, ds)).unwrap();
        let rb = DensityMatrix::new(random_density(&mut rng, db)).unwrap();
        let space = TensorSpace::bipartite(ds, db).unwrap();
        let joint = rs.tensor(&rb);
        let s = partial_trace(&joint, &space, 0).unwrap();
        let b = partial_trace(&joint, &space, 1).unwrap();
        prop_assert!(max_abs(&(s.matrix() - rs.matrix())) < 1e-12);
        prop_assert!(max_abs(&(b.matrix() - rb.matrix())) < 1e-12);
    }

    #[test]
    fn projector_pair_is_complementary(seed in any::<u64>(), ds in 1usize..4, db in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rb = DensityMatrix::new(random_density(&mut rng, db)).unwrap();
        let space = TensorSpace::bipartite(ds, db).unwrap();
        let pair = build_projector(&rb, &space).unwrap();
        let (p, q) = (pair.p.matrix(), pair.q.matrix());
        prop_assert!(max_abs(&(p.dot(p) - p)) < 1e-12);
        prop_assert!(max_abs(&(q.dot(q) - q)) < 1e-12);
        prop_assert!(max_abs(&p.dot(q)) < 1e-12);
        let x = random_complex(&mut rng, ds * db, ds * db);
        let px = pair.project(&x).unwrap();
        let rs = partial_trace_of(&x, &space);
        prop_assert!(max_abs(&(px - kron(&rs, rb.matrix()))) < 1e-12);
    }

    #[test]
    fn trace_distance_is_a_bounded_metric(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DensityMatrix::new(random_density(&mut rng, d)).unwrap();
        let b = DensityMatrix::new(random_density(&mut rng, d)).unwrap();
        let ab = trace_distance(&a, &b).unwrap();
        let ba = trace_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn sidebands_swap_under_frequency_reflection(
        delta in -20.0f64..20.0, kappa in 0.01f64..5.0, omega in -20.0f64..20.0,
    ) {
        let plus = sideband_spectral(delta, kappa, omega, Sideband::Plus);
        let minus = sideband_spectral(delta, kappa, -omega, Sideband::Minus);
        prop_assert!((plus - minus).norm() <= 1e-12 * plus.norm());
        let conj = sideband_spectral(delta, kappa, -omega, Sideband::Minus).conj();
        prop_assert!((plus.re - conj.re).abs() <= 1e-12 * plus.norm());
    }

    #[test]
    fn resonant_cooling_rate(g_re in -1.0f64..1.0, g_im in -1.0f64..1.0, kappa in 0.05f64..5.0, om in 1.0f64..50.0) {
        let p = OptomechParams {
            omega_m: om, delta: om, kappa, gamma_m: 1e-3, nbar: 1.0,
            g: C64::new(g_re, g_im), n_cav: 2, n_mech: 2,
        };
        let expected = 4.0 * p.g.norm_sqr() / kappa;
        let r = sideband_rates(&p);
        prop_assert!((r.gamma_c - expected).abs() <= 1e-12 * expected.max(1e-300));
    }
}

fn partial_trace_of(x: &Array2<C64>, space: &TensorSpace) -> Array2<C64> {
    projector_core::superop::partial_trace_matrix(x, space, 0).unwrap()
}

#[test]
fn generic_generators_have_a_unique_steady_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let l = random_generator(rng.random(), 4, 3.0);
        let ss = steady_state(&l).unwrap();
        let r = l.apply(ss.matrix()).unwrap();
        assert!(max_abs(&r) < 1e-10);
    }
}
