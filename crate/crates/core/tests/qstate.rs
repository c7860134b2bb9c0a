use hamlab::linalg::{c64, kron, CMatrix, CVector};
use hamlab::qstate::*;
use hamlab::random::{ginibre_density, haar_unitary, haar_vector, seeded};
use proptest::prelude::*;

fn split(n_a: usize, n_b: usize) -> RegisterLayout {
    RegisterLayout::new([("A", n_a), ("B", n_b)]).unwrap()
}

fn random_state(layout: RegisterLayout, rank: usize, seed: u64) -> DensityMatrix {
    let m = ginibre_density(layout.dim(), rank, &mut seeded(seed));
    DensityMatrix::new(layout, m).unwrap()
}

fn random_pure(layout: RegisterLayout, seed: u64) -> PureState {
    let v = haar_vector(layout.dim(), &mut seeded(seed));
    PureState::new(layout, v).unwrap()
}

/// Tr_B by explicit summation over the B index, with A the leading register.
fn trace_out_last(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_a, d_a, |i, j| (0..d_b).map(|k| m[(i * d_b + k, j * d_b + k)]).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_lies_between_zero_and_qubit_count(n in 1usize..=4, rank in 1usize..=16, seed in any::<u64>()) {
        let rho = random_state(RegisterLayout::single("A", n).unwrap(), rank, seed);
        let s = vn_entropy(&rho);
        prop_assert!((0.0..=n as f64).contains(&s));
        prop_assert!(min_entropy(&rho) <= s + 1e-12);
    }

    #[test]
    fn pure_marginals_share_entropy_and_schmidt_weights(n_a in 1usize..=3, n_b in 1usize..=3, seed in any::<u64>()) {
        let psi = random_pure(split(n_a, n_b), seed);
        let a = psi.reduced(&["A"]).unwrap();
        let b = psi.reduced(&["B"]).unwrap();
        prop_assert!((vn_entropy(&a) - vn_entropy(&b)).abs() < 1e-9);
        let mut weights: Vec<f64> = schmidt(&psi, &["A"]).unwrap().iter().map(|t| t.coefficient.powi(2)).collect();
        let mut eig: Vec<f64> = a.eigenvalues().into_iter().filter(|&p| p > 1e-12).collect();
        weights.sort_by(f64::total_cmp);
        eig.sort_by(f64::total_cmp);
        prop_assert_eq!(weights.len(), eig.len());
        for (w, e) in weights.iter().zip(&eig) {
            prop_assert!((w - e).abs() < 1e-9);
        }
    }

    #[test]
    fn partial_trace_matches_summation(n_a in 1usize..=3, n_b in 1usize..=3, rank in 1usize..=8, seed in any::<u64>()) {
        let rho = random_state(split(n_a, n_b), rank, seed);
        let oracle = trace_out_last(rho.matrix(), 1 << n_a, 1 << n_b);
        let got = rho.partial_trace(&["A"]).unwrap();
        prop_assert!((got.matrix() - oracle).norm() < 1e-12);
    }

    #[test]
    fn tensor_then_trace_recovers_factors(n_a in 1usize..=3, n_b in 1usize..=3, seed in any::<u64>()) {
        let a = random_state(RegisterLayout::single("A", n_a).unwrap(), 2, seed);
        let b = random_state(RegisterLayout::single("B", n_b).unwrap(), 3, seed ^ 1);
        let ab = a.tensor(&b).unwrap();
        prop_assert!((ab.matrix() - kron(a.matrix(), b.matrix())).norm() < 1e-12);
        prop_assert!((ab.partial_trace(&["A"]).unwrap().matrix() - a.matrix()).norm() < 1e-12);
        prop_assert!((ab.partial_trace(&["B"]).unwrap().matrix() - b.matrix()).norm() < 1e-12);
        prop_assert!((vn_entropy(&ab) - vn_entropy(&a) - vn_entropy(&b)).abs() < 1e-9);
    }

    #[test]
    fn subadditivity_and_araki_lieb(n_a in 1usize..=2, n_b in 1usize..=2, rank in 1usize..=16, seed in any::<u64>()) {
        let rho = random_state(split(n_a, n_b), rank, seed);
        let s_ab = vn_entropy(&rho);
        let s_a = vn_entropy(&rho.partial_trace(&["A"]).unwrap());
        let s_b = vn_entropy(&rho.partial_trace(&["B"]).unwrap());
        prop_assert!(s_ab <= s_a + s_b + 1e-9);
        prop_assert!((s_a - s_b).abs() <= s_ab + 1e-9);
    }

    #[test]
    fn trace_distance_is_a_metric(n in 1usize..=3, seed in any::<u64>()) {
        let l = RegisterLayout::single("A", n).unwrap();
        let [r, s, t] = [0, 1, 2].map(|k| random_state(l.clone(), 1 + k, seed.wrapping_add(k as u64)));
        let d = |x: &DensityMatrix, y: &DensityMatrix| trace_norm_distance(x, y).unwrap();
        prop_assert!(d(&r, &r) < 1e-12);
        prop_assert!((d(&r, &s) - d(&s, &r)).abs() < 1e-12);
        prop_assert!(d(&r, &t) <= d(&r, &s) + d(&s, &t) + 1e-12);
        prop_assert!(d(&r, &s) <= 2.0);
    }

    #[test]
    fn fuchs_van_de_graaf_sandwich(n in 1usize..=3, rank in 1usize..=8, seed in any::<u64>()) {
        let l = RegisterLayout::single("A", n).unwrap();
        let r = random_state(l.clone(), rank, seed);
        let s = random_state(l, rank, seed ^ 0x5eed);
        let f = fidelity(&r, &s).unwrap();
        let half = trace_norm_distance(&r, &s).unwrap() / 2.0;
        prop_assert!(1.0 - f.sqrt() <= half + 1e-9);
        prop_assert!(half <= (1.0 - f).sqrt() + 1e-9);
    }

    #[test]
    fn fannes_bounds_entropy_differences(n in 1usize..=3, rank in 1usize..=8, seed in any::<u64>()) {
        let l = RegisterLayout::single("A", n).unwrap();
        let r = random_state(l.clone(), rank, seed);
        let s = random_state(l, 8, seed ^ 7);
        let t = trace_norm_distance(&r, &s).unwrap();
        prop_assert!((vn_entropy(&r) - vn_entropy(&s)).abs() <= fannes_bound(t, (1 << n) as f64) + 1e-9);
    }

    #[test]
    fn fannes_bound_is_monotone_in_distance(t in 0.0f64..2.0, dt in 0.0f64..0.5, n in 1u32..=8) {
        let d = 2f64.powi(n as i32);
        prop_assert!(fannes_bound(t, d) <= fannes_bound((t + dt).min(2.0), d) + 1e-12);
    }

    #[test]
    fn unitaries_preserve_entropy_and_distance(n in 1usize..=3, seed in any::<u64>()) {
        let l = RegisterLayout::single("A", n).unwrap();
        let r = random_state(l.clone(), 3, seed);
        let s = random_state(l.clone(), 2, seed ^ 3);
        let u = haar_unitary(1 << n, &mut seeded(seed ^ 11));
        let conj = |x: &DensityMatrix| DensityMatrix::new(l.clone(), &u * x.matrix() * u.adjoint()).unwrap();
        prop_assert!((vn_entropy(&conj(&r)) - vn_entropy(&r)).abs() < 1e-9);
        let before = trace_norm_distance(&r, &s).unwrap();
        prop_assert!((trace_norm_distance(&conj(&r), &conj(&s)).unwrap() - before).abs() < 1e-9);
    }

    #[test]
    fn purification_marginal_is_the_state(n in 1usize..=3, rank in 1usize..=8, seed in any::<u64>()) {
        let rho = random_state(RegisterLayout::single("A", n).unwrap(), rank, seed);
        for psi in [purify(&rho, "P").unwrap(), purify_minimal(&rho, "P").unwrap()] {
            prop_assert!((psi.reduced(&["A"]).unwrap().matrix() - rho.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn aligned_purifications_reach_uhlmann_fidelity(n in 1usize..=2, seed in any::<u64>()) {
        let l = RegisterLayout::single("A", n).unwrap();
        let r = random_state(l.clone(), 2, seed);
        let s = random_state(l, 3, seed ^ 9);
        let phi = purify(&r, "P").unwrap();
        let psi = purify(&s, "P").unwrap();
        let u = align_purification(&phi, &psi, &["P"]).unwrap();
        let aligned = apply_to_purifier(&phi, &u, &["P"]).unwrap();
        let overlap = aligned.inner(&psi).unwrap().norm_sqr();
        prop_assert!((overlap - fidelity(&r, &s).unwrap()).abs() < 1e-8);
        prop_assert!(phi.inner(&psi).unwrap().norm_sqr() <= overlap + 1e-12);
    }

    #[test]
    fn swap_test_acceptance_tracks_overlap(n in 1usize..=3, seed in any::<u64>()) {
        let l = RegisterLayout::single("A", n).unwrap();
        let a = random_pure(l.clone(), seed);
        let b = random_pure(l, seed ^ 5);
        let p = swap_test_prob(&a, &b).unwrap();
        prop_assert!((p - (1.0 + a.inner(&b).unwrap().norm_sqr()) / 2.0).abs() < 1e-12);
        prop_assert!((p - swap_test_circuit_prob(&a, &b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn gentle_measurement_bound(n in 1usize..=3, seed in any::<u64>(), keep in 0.05f64..1.0) {
        let l = RegisterLayout::single("A", n).unwrap();
        let rho = random_state(l, 4, seed);
        let u = haar_unitary(1 << n, &mut seeded(seed ^ 13));
        // effect with eigenvalues spread over [keep, 1]
        let diag = CMatrix::from_fn(1 << n, 1 << n, |i, j| {
            if i == j { c64(keep + (1.0 - keep) * i as f64 / ((1 << n) - 1).max(1) as f64, 0.0) } else { c64(0.0, 0.0) }
        });
        let m = &u * diag * u.adjoint();
        let (p, post) = post_measure(&rho, &m).unwrap();
        prop_assert!(trace_norm_distance(&rho, &post).unwrap() <= 2.0 * (1.0 - p).sqrt() + 1e-9);
    }
}

#[test]
fn known_values() {
    let l = RegisterLayout::single("A", 1).unwrap();
    let skew = DensityMatrix::new(l.clone(), CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.75, 0.0), c64(0.25, 0.0)]))).unwrap();
    assert!((vn_entropy(&skew) - 0.811_278_124_459_132_9).abs() < 1e-12);
    assert!((min_entropy(&skew) - 0.415_037_499_278_843_8).abs() < 1e-12);
    assert!((fannes_bound(1.0, 2.0) - 1.0).abs() < 1e-12);

    // pure states at overlap x: half-norm √(1−x), full norm 2√(1−x)
    let theta: f64 = 0.4;
    let a = PureState::basis(l.clone(), 0).unwrap();
    let b = PureState::new(l, CVector::from_vec(vec![c64(theta.cos(), 0.0), c64(theta.sin(), 0.0)])).unwrap();
    let x = theta.cos().powi(2);
    assert!((pure_state_distance(&a, &b).unwrap() - (1.0 - x).sqrt()).abs() < 1e-12);
    let full = trace_norm_distance(&a.to_density().unwrap(), &b.to_density().unwrap()).unwrap();
    assert!((full - 2.0 * (1.0 - x).sqrt()).abs() < 1e-12);
}
