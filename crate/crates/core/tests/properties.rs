mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use pcinterp::blocking::Interval;
use pcinterp::interp::verify_orthogonality;
use pcinterp::linalg::inverse;
use pcinterp::minimax::{class_deviation, ClassConstraint};
use pcinterp::spectral::{coefficient_residual, spectral_factorize, DEFAULT_MAX_ITER};
use pcinterp::*;
use proptest::prelude::*;
use rand::Rng;

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn random_pattern<R: Rng>(r: &mut R) -> MissingPattern {
    let period = r.random_range(1..=4);
    let n = r.random_range(1..=3);
    let mut intervals = Vec::new();
    let mut start = 1 + period as i64 * r.random_range(-3..=3);
    for _ in 0..n {
        let len = period * r.random_range(1..=3);
        intervals.push(Interval { start, len });
        start += (len + period * r.random_range(1..=3)) as i64;
    }
    MissingPattern::new(period, intervals).unwrap()
}

/// Blocked functional on `{0, …}` with a dominant lead coefficient, plus a class matrix.
fn random_minimax<R: Rng>(r: &mut R, contiguous: bool) -> (CMatrix, VectorFunctional) {
    let t = r.random_range(1..=3);
    let p = random_hpd(r, t, 1.0, 2.0);
    let kmax = r.random_range(1..=3);
    let mut idx: Vec<i64> = vec![0];
    idx.extend((1..=kmax).filter(|_| contiguous || r.random_bool(0.7)));
    let shift = CVector::from_element(t, c(2.0, 0.0));
    let a0 = random_vector(r, t, 1.0) + shift;
    let small = 0.15 / idx.len() as f64;
    let coeffs = idx
        .iter()
        .map(|&k| (k, if k == 0 { a0.clone() } else { random_vector(r, t, small) }))
        .collect();
    (p, VectorFunctional::new(t, coeffs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn density_values_are_hermitian(seed in any::<u64>(), lambda in -PI..PI) {
        let mut r = rng(seed);
        let t = r.random_range(1..=4);
        let f = random_rational(&mut r, t, 0.9);
        let v = f.evaluate(lambda).unwrap();
        prop_assert!(max_entry(&(&v - v.adjoint())) <= 1e-12 * max_entry(&v));
    }

    #[test]
    fn moving_average_coefficients(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=3);
        let q = r.random_range(0..=4usize);
        let theta: Vec<CMatrix> = (0..=q).map(|_| random_matrix(&mut r, t, t, 1.0)).collect();
        let f = DensitySpec::MovingAverage(theta);
        let qc = quad();
        let ev = |l: f64| f.evaluate(l);
        for lag in 0..=(q as i64 + 3) {
            let plus = fourier_coeff(ev, lag, &qc).unwrap();
            let minus = fourier_coeff(ev, -lag, &qc).unwrap();
            prop_assert!(max_entry(&(&minus - plus.adjoint())) <= 1e-12);
            if lag > q as i64 {
                prop_assert!(max_entry(&plus) <= 1e-12);
            }
        }
    }

    #[test]
    fn factorization_reconstructs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=4);
        let deg = r.random_range(0..=6);
        let q: Vec<CMatrix> = (0..=deg).map(|_| random_matrix(&mut r, t, t, 1.0)).collect();
        let p = CausalFactor::new(q).unwrap().product();
        let factor = spectral_factorize(&p, 1e-8, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(coefficient_residual(&p, &factor.product()) <= 1e-8);
        let q0 = &factor.coeffs()[0];
        for i in 0..t {
            prop_assert!(q0[(i, i)].im.abs() <= 1e-12 && q0[(i, i)].re > 0.0);
            for j in i + 1..t {
                prop_assert!(q0[(i, j)].norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn coefficients_stable_under_grid_doubling(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=3);
        let f = random_rational(&mut r, t, 0.8);
        let ev = |l: f64| f.evaluate(l);
        for lag in -4..=4 {
            let coarse = fourier_coeff(ev, lag, &QuadratureConfig::new(1024).unwrap()).unwrap();
            let fine = fourier_coeff(ev, lag, &QuadratureConfig::new(2048).unwrap()).unwrap();
            prop_assert!(max_entry(&(coarse - fine)) < 1e-9);
        }
    }

    #[test]
    fn series_blocking_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let period = r.random_range(1..=5);
        let blocks = r.random_range(1..=20);
        let origin = 1 + period as i64 * r.random_range(-5..=5);
        let values = (0..period * blocks).map(|_| rc(&mut r, 1.0)).collect();
        let x = Series { origin, values };
        let v = block_series(&x, period).unwrap();
        prop_assert_eq!(v.len(), blocks);
        for n in 0..blocks as i64 {
            let n = v.origin + n;
            for p in 0..period {
                prop_assert_eq!(v.get(n).unwrap()[p], x.get(n * period as i64 + p as i64 + 1).unwrap());
            }
        }
        prop_assert_eq!(unblock_series(&v), x);
    }

    #[test]
    fn pattern_blocking_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pattern = random_pattern(&mut r);
        let blocked = block_pattern(&pattern).unwrap();
        prop_assert_eq!(blocked.reconstruct(), pattern.clone());
        prop_assert_eq!(blocked.indices().len() * pattern.period(), pattern.size());
    }

    #[test]
    fn blocking_preserves_functional_value(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pattern = random_pattern(&mut r);
        let period = pattern.period();
        let given: Vec<(i64, Complex64)> = pattern.indices().into_iter().map(|j| (j, rc(&mut r, 1.0))).collect();
        let scalar = ScalarFunctional::on_pattern(&pattern, &given).unwrap();
        let blocked = block_functional(&scalar, &pattern).unwrap();

        let idx = pattern.indices();
        let origin = idx[0];
        let len = (idx[idx.len() - 1] - origin + 1) as usize;
        let x = Series { origin, values: (0..len).map(|_| rc(&mut r, 1.0)).collect() };
        let direct: Complex64 = scalar.iter().map(|(j, a)| a * x.get(j).unwrap()).sum();
        let via_blocks = blocked.apply(&block_series(&x, period).unwrap()).unwrap();
        prop_assert!((direct - via_blocks).norm() <= 1e-14 * (1.0 + direct.norm()) * len as f64);
    }

    #[test]
    fn lift_scales_norm_by_period(seed in any::<u64>()) {
        let mut r = rng(seed);
        let period = r.random_range(1..=6);
        let pairs: Vec<(i64, Complex64)> = random_indices(&mut r, 2).into_iter().map(|j| (j, rc(&mut r, 1.0))).collect();
        let scalar = ScalarFunctional::from_pairs(&pairs).unwrap();
        let lifted = lift_functional(&scalar, period).unwrap();
        for (j, v) in lifted.coeffs() {
            let expected = period as f64 * scalar.get(*j).norm_sqr();
            prop_assert!((v.norm_squared() - expected).abs() <= 1e-12 * (1.0 + expected));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn optimum_beats_finite_window_regression(seed in any::<u64>(), noisy in any::<bool>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=2);
        let s = r.random_range(1..=3);
        let inst = random_instance(seed, t, s, noisy);
        let sol = interpolate(&inst.f, inst.g.as_ref(), &inst.a, &quad()).unwrap();
        let window = r.random_range(1..=8);
        let brute = brute_force_mse(&inst.f, inst.g.as_ref(), &inst.a, window);
        prop_assert!(sol.delta <= brute + 1e-10 * (1.0 + brute), "delta {} > brute {}", sol.delta, brute);
    }

    #[test]
    fn perturbed_filters_do_worse(seed in any::<u64>(), noisy in any::<bool>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=3);
        let s = r.random_range(1..=3);
        let inst = random_instance(seed, t, s, noisy);
        let q = quad();
        let sol = interpolate(&inst.f, inst.g.as_ref(), &inst.a, &q).unwrap();
        let at_optimum = filter_mse(&inst.f, inst.g.as_ref(), &inst.a, &sol.taps, &q).unwrap();
        prop_assert!((at_optimum - sol.delta).abs() <= 1e-9 * (1.0 + sol.delta));

        let idx = inst.a.indices();
        let eps = r.random_range(1e-4..1.0);
        let dc = random_vector(&mut r, t * idx.len(), eps);
        let perturbed = VectorFunctional::new(
            t,
            idx.iter().enumerate().map(|(p, &j)| (j, sol.c.rows(p * t, t) + dc.rows(p * t, t))).collect(),
        ).unwrap();
        let taps = spectral_characteristic(&inst.f, inst.g.as_ref(), &inst.a, &perturbed, &q).unwrap().without(&idx);
        let worse = filter_mse(&inst.f, inst.g.as_ref(), &inst.a, &taps, &q).unwrap();
        prop_assert!(worse >= sol.delta - 1e-10 * (1.0 + sol.delta));

        let lag = idx[idx.len() - 1] + r.random_range(1..=5);
        let shifted = sol.taps.perturbed(lag, &random_vector(&mut r, t, eps));
        let worse = filter_mse(&inst.f, inst.g.as_ref(), &inst.a, &shifted, &q).unwrap();
        prop_assert!(worse >= sol.delta - 1e-10 * (1.0 + sol.delta));
    }

    #[test]
    fn characteristic_forms_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=3);
        let s = r.random_range(1..=3);
        let inst = random_instance(seed, t, s, true);
        let sol = interpolate(&inst.f, inst.g.as_ref(), &inst.a, &quad()).unwrap();
        let h = SpectralCharacteristic { f: &inst.f, g: inst.g.as_ref(), a: &inst.a, c: &sol.coefficients };
        for _ in 0..64 {
            let l = r.random_range(-PI..PI);
            let (u, v) = (h.evaluate(l).unwrap(), h.evaluate_g_form(l).unwrap());
            prop_assert!((u - v).camax() <= 1e-10);
        }
    }

    #[test]
    fn noiseless_error_forms_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=3);
        let s = r.random_range(1..=3);
        let inst = random_instance(seed, t, s, false);
        let sol = interpolate(&inst.f, None, &inst.a, &quad()).unwrap();
        let alt = sol.delta_noiseless.unwrap();
        prop_assert!((sol.delta - alt).abs() <= 1e-10 * (1.0 + sol.delta));
    }

    #[test]
    fn single_value_error_is_diagonal_of_inverse(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=3);
        let s = r.random_range(1..=3);
        let inst = random_instance(seed, t, s, false);
        let idx = inst.a.indices();
        let pick = r.random_range(0..idx.len());
        let comp = r.random_range(0..t);
        let coeffs = idx
            .iter()
            .enumerate()
            .map(|(p, &j)| {
                let mut v = CVector::zeros(t);
                if p == pick {
                    v[comp] = c(1.0, 0.0);
                }
                (j, v)
            })
            .collect();
        let a = VectorFunctional::new(t, coeffs).unwrap();
        let sol = interpolate(&inst.f, None, &a, &quad()).unwrap();
        let binv = inverse(&sol.blocks.b).unwrap();
        let k = pick * t + comp;
        prop_assert!((sol.c.clone() - binv.column(k)).camax() <= 1e-9 * (1.0 + binv.column(k).camax()));
        prop_assert!((sol.delta - binv[(k, k)].re).abs() <= 1e-9 * (1.0 + sol.delta));
    }

    #[test]
    fn orthogonality_detects_wrong_coefficients(seed in any::<u64>(), noisy in any::<bool>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=3);
        let s = r.random_range(1..=3);
        let inst = random_instance(seed, t, s, noisy);
        let q = quad();
        let sol = interpolate(&inst.f, inst.g.as_ref(), &inst.a, &q).unwrap();
        let idx = inst.a.indices();
        let h = SpectralCharacteristic { f: &inst.f, g: inst.g.as_ref(), a: &inst.a, c: &sol.coefficients };
        prop_assert!(verify_orthogonality(|l| h.evaluate(l), t, &idx, &q).unwrap().passes(1e-7));

        let eps = CVector::from_element(t, c(1e-3, 0.0));
        let bumped = VectorFunctional::new(
            t,
            sol.coefficients.coeffs().iter().map(|(j, v)| (*j, v + &eps)).collect(),
        ).unwrap();
        let h = SpectralCharacteristic { f: &inst.f, g: inst.g.as_ref(), a: &inst.a, c: &bumped };
        prop_assert!(!verify_orthogonality(|l| h.evaluate(l), t, &idx, &q).unwrap().passes(1e-7));
    }

    #[test]
    fn least_favorable_d0_meets_constraints(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, a) = random_minimax(&mut r, false);
        let class = ClassD0::new(p).unwrap();
        let q = quad();
        let sol = least_favorable_d0(&class, &a, None, &q).unwrap();
        prop_assert!(class_deviation(&sol.f0, &ClassConstraint::D0(&class), &q).unwrap() <= 1e-8);
        prop_assert!(sol.multiplier_residual <= 1e-8);
        let again = interpolate(&sol.f0, None, &a, &q).unwrap();
        prop_assert!((again.delta - sol.delta).abs() <= 1e-10 * (1.0 + sol.delta));
        prop_assert!(coefficient_residual(&sol.r, &sol.factor.product()) <= 1e-8);
        prop_assert!(coefficient_residual(&sol.r, &sol.ar.gram()) <= 1e-8);
    }

    #[test]
    fn least_favorable_dg_meets_constraints(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, a) = random_minimax(&mut r, true);
        let t = p.nrows();
        let kmax = *a.indices().last().unwrap() as usize;
        let g = r.random_range(0..=kmax + 1);
        let mut coeffs = vec![p.scale(4.0)];
        for _ in 0..g {
            let x = random_matrix(&mut r, t, t, 0.2 / (g as f64 + 1.0));
            coeffs.push((&x + x.adjoint()).scale(0.5));
        }
        let class = ClassDG::new(coeffs).unwrap();
        let q = quad();
        match least_favorable_dg(&class, &a, &q) {
            Ok(sol) => {
                prop_assert!(class_deviation(&sol.f0, &ClassConstraint::DG(&class), &q).unwrap() <= 1e-8);
                prop_assert!(sol.multiplier_residual <= 1e-8);
                let again = interpolate(&sol.f0, None, &a, &q).unwrap();
                prop_assert!((again.delta - sol.delta).abs() <= 1e-10 * (1.0 + sol.delta));
            }
            Err(e) => prop_assert!(
                matches!(e, Error::HypothesisViolated { .. } | Error::UnderdeterminedSystem { .. }),
                "unexpected error {e}"
            ),
        }
    }

    #[test]
    fn dg_of_order_zero_is_d0(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, a) = random_minimax(&mut r, false);
        let q = quad();
        let d0 = least_favorable_d0(&ClassD0::new(p.clone()).unwrap(), &a, None, &q).unwrap();
        let dg = least_favorable_dg(&ClassDG::new(vec![p]).unwrap(), &a, &q).unwrap();
        prop_assert!(coefficient_residual(&d0.r, &dg.r) <= 1e-8);
        prop_assert!((d0.delta - dg.delta).abs() <= 1e-8);
    }
}

fn example_d0() -> (ClassD0, VectorFunctional) {
    let p = CMatrix::from_row_slice(2, 2, &[c(23.0, 0.0), c(22.0, 0.0), c(22.0, 0.0), c(23.0, 0.0)]);
    let v = |x: f64| CVector::from_element(2, c(x, 0.0));
    (ClassD0::new(p).unwrap(), VectorFunctional::new(2, vec![(0, v(5.0)), (2, v(2.0))]).unwrap())
}

#[test]
fn in_class_excess_is_quadratic_in_perturbation() {
    use pcinterp::minimax::perturbed_candidate;
    let (class, a) = example_d0();
    let q = quad();
    let sol = least_favorable_d0(&class, &a, None, &q).unwrap();
    let mut r = rng(77);
    for _ in 0..5 {
        let mut z: Vec<CMatrix> = (0..4).map(|_| random_matrix(&mut r, 2, 2, 1.0)).collect();
        z[0] = CMatrix::zeros(2, 2);
        let excess = |eps: f64| {
            let f = perturbed_candidate(&sol.r, &z, 0, eps).unwrap();
            filter_mse(&f, None, &a, &sol.solution.taps, &q).unwrap() - sol.delta
        };
        let (e1, e2) = (excess(0.01), excess(0.02));
        assert!(e1 > 0.0);
        assert!((e2 / e1 - 4.0).abs() < 0.1, "ratio {}", e2 / e1);
    }
}

#[test]
fn white_noise_in_class_has_larger_optimal_error() {
    let (class, a) = example_d0();
    let q = quad();
    let sol = least_favorable_d0(&class, &a, None, &q).unwrap();
    let white = DensitySpec::Constant(inverse(&class.p).unwrap());
    assert!(class_deviation(&white, &ClassConstraint::D0(&class), &q).unwrap() < 1e-12);
    let optimal = interpolate(&white, None, &a, &q).unwrap().delta;
    assert!((optimal - 58.0 / 45.0).abs() < 1e-12);
    assert!((sol.delta - 10.0 / 9.0).abs() < 1e-12);
}
