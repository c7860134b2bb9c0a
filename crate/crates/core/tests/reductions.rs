use hamlab::clock::ClockEncoding;
use hamlab::hamiltonian::{LocalHamiltonian, LocalTerm};
use hamlab::linalg::pauli_z;
use hamlab::problems::suites::{maxoutqea_suite, ppio_suite};
use hamlab::problems::*;
use hamlab::random::{random_hermitian, seeded};
use hamlab::RegisterLayout;

fn opts() -> DeciderOptions {
    DeciderOptions::default()
}

#[test]
fn ppio_suite_through_leaps() {
    for case in ppio_suite(5).unwrap() {
        let r = reduce_ppio_to_leaps(&case.instance, ClockEncoding::Kitaev).unwrap();
        assert!(r.instance.b - r.instance.a >= case.instance.b.powi(2) / 8.0 - 1e-12);
        let v = decide_leaps(&r.instance, &opts()).unwrap();
        assert_eq!(v.decision, case.expected, "{}: value {}", case.name, v.value);
    }
}

#[test]
fn ppio_suite_through_leles() {
    for case in ppio_suite(5).unwrap() {
        let r = reduce_ppio_to_leles(&case.instance, ClockEncoding::Kitaev).unwrap();
        let floor = r.report.constants["entropy_floor"].as_f64().unwrap();
        assert!((floor - 0.5).abs() < 1e-12);
        assert!(r.instance.s - r.instance.t >= floor / 4.0 - 1e-12);
        let v = decide_leles(&r.instance, &opts()).unwrap();
        assert_eq!(v.decision, case.expected, "{}: value {}", case.name, v.value);
    }
}

#[test]
fn maxoutqea_suite_through_heles() {
    for case in maxoutqea_suite().unwrap() {
        let r = reduce_maxoutqea_to_heles(&case.instance, ClockEncoding::Kitaev).unwrap();
        let v = decide_heles(&r.instance, &opts()).unwrap();
        assert_eq!(v.decision, case.expected, "{}: value {}", case.name, v.value);
        assert_eq!(decide_maxoutqea(&case.instance, &opts()).unwrap().decision, case.expected);
    }
}

#[test]
fn leaps_beta_stays_below_a_to_the_sixth() {
    for case in ppio_suite(5).unwrap() {
        for idle in [8, 16, 32] {
            let report = ppio_leaps_parameters(&case.instance, idle, ClockEncoding::Kitaev).unwrap();
            let k = |name: &str| report.constants[name].as_f64().unwrap();
            assert!((k("kappa3") - k("beta") / k("a").powi(6)).abs() <= 1e-12 * k("kappa3").max(1.0));
            assert!((k("beta") - report.gap.unwrap() / idle as f64).abs() < 1e-15);
            assert!(k("kappa3") <= LEAPS_BETA_A6_BOUND, "{} at L = {idle}: κ₃ = {}", case.name, k("kappa3"));
            assert_eq!(report.constants["beta_within_a6"], serde_json::Value::Bool(true));
        }
    }
}

#[test]
fn leaps_idle_search_is_minimal() {
    let case = &ppio_suite(5).unwrap()[3];
    let r = reduce_ppio_to_leaps(&case.instance, ClockEncoding::Kitaev).unwrap();
    let l = r.report.idle.unwrap();
    let below = reduce_ppio_to_leaps_with_idle(&case.instance, l - 1, ClockEncoding::Kitaev).unwrap();
    assert!(below.instance.b - below.instance.a < case.instance.b.powi(2) / 8.0);
}

fn two_qubits() -> RegisterLayout {
    RegisterLayout::new([("A", 1), ("B", 1)]).unwrap()
}

fn random_two_qubit(seed: u64) -> LocalHamiltonian {
    let m = random_hermitian(4, &mut seeded(seed));
    LocalHamiltonian::new(two_qubits(), vec![LocalTerm::from_dense(vec![0, 1], &m).unwrap()]).unwrap()
}

#[test]
fn sepham_map_preserves_no_instances() {
    for seed in 0..6 {
        let h = random_two_qubit(seed);
        let product_min = decide_sepham(&h, &["A"], 0.0, 1.0, &opts()).unwrap().value;
        let (alpha, beta) = (product_min - 0.6, product_min - 0.1);
        assert_eq!(decide_sepham(&h, &["A"], alpha, beta, &opts()).unwrap().decision, Decision::No);
        let r = reduce_sepham_to_leaps(&h, &["A"], alpha, beta).unwrap();
        assert!(r.instance.beta - r.instance.alpha >= (beta - alpha) / 2.0 - 1e-12);
        let v = decide_leaps(&r.instance, &opts()).unwrap();
        assert_eq!(v.decision, Decision::No, "seed {seed}: value {}", v.value);
    }
}

#[test]
fn sepham_map_preserves_yes_instances() {
    // local fields only: the ground state is a product, so the YES witness sits in the span
    let z = pauli_z();
    let h = LocalHamiltonian::new(
        two_qubits(),
        vec![LocalTerm::from_dense(vec![0], &z).unwrap(), LocalTerm::from_dense(vec![1], &(z * hamlab::linalg::c64(0.5, 0.0))).unwrap()],
    )
    .unwrap();
    let (alpha, beta) = (-1.4, -0.9);
    assert_eq!(decide_sepham(&h, &["A"], alpha, beta, &opts()).unwrap().decision, Decision::Yes);
    let r = reduce_sepham_to_leaps(&h, &["A"], alpha, beta).unwrap();
    assert_eq!(decide_leaps(&r.instance, &opts()).unwrap().decision, Decision::Yes);
}
