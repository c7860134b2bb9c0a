use hamlab::channel::ChannelSpec;
use hamlab::clock::{build, ClockConfig, ClockEncoding, ClockHamiltonian};
use hamlab::hamiltonian::LocalHamiltonian;
use hamlab::linalg::eigvalsh;
use hamlab::qstate::{trace_norm_distance, PureState};
use hamlab::random::{haar_vector, seeded};
use proptest::prelude::*;

const CUTOFF: f64 = 0.9;

fn clock(gates: usize, idle: usize, encoding: ClockEncoding, seed: u64) -> ClockHamiltonian {
    let ch = ChannelSpec::random(1, 1, gates, &mut seeded(seed)).unwrap();
    build(&ch, ClockConfig::for_channel(&ch, idle, encoding)).unwrap()
}

fn encoding() -> impl Strategy<Value = ClockEncoding> {
    prop_oneof![Just(ClockEncoding::Unary), Just(ClockEncoding::Kitaev)]
}

fn random_input(h: &ClockHamiltonian, seed: u64) -> PureState {
    let l = h.channel().input_layout();
    PureState::new(l.clone(), haar_vector(l.dim(), &mut seeded(seed))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn structured_low_spectrum_matches_dense(gates in 1usize..=3, idle in 0usize..=1, enc in encoding(), seed in any::<u64>()) {
        let h = clock(gates, idle, enc, seed);
        let dense: Vec<f64> = eigvalsh(&h.local_hamiltonian().unwrap().dense().unwrap()).into_iter().filter(|&e| e <= CUTOFF).collect();
        let structured = h.spectral_summary(CUTOFF).unwrap().eigenvalues;
        prop_assert_eq!(dense.len(), structured.len());
        for (a, b) in dense.iter().zip(&structured) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
        prop_assert!(dense[0].abs() < 1e-9);
        prop_assert_eq!(h.ground_space_dimension(), 2);
        prop_assert!(h.spectral_gap() > 0.0);
    }

    #[test]
    fn encodings_share_the_low_spectrum(gates in 1usize..=3, idle in 0usize..=1, seed in any::<u64>()) {
        let low = |enc| -> Vec<f64> {
            eigvalsh(&clock(gates, idle, enc, seed).local_hamiltonian().unwrap().dense().unwrap()).into_iter().filter(|&e| e <= CUTOFF).collect()
        };
        let (u, k) = (low(ClockEncoding::Unary), low(ClockEncoding::Kitaev));
        prop_assert_eq!(u.len(), k.len());
        for (a, b) in u.iter().zip(&k) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn history_states_are_frustration_free(gates in 1usize..=6, idle in 0usize..=8, enc in encoding(), seed in any::<u64>()) {
        let h = clock(gates, idle, enc, seed);
        let psi = random_input(&h, seed ^ 1);
        let hist = h.history_state(&psi).unwrap();
        prop_assert!(h.local_hamiltonian().unwrap().energy(&hist).unwrap().abs() < 1e-10);
    }

    #[test]
    fn history_output_is_within_the_idle_bound(gates in 1usize..=6, idle in 0usize..=12, seed in any::<u64>()) {
        let h = clock(gates, idle, ClockEncoding::Kitaev, seed);
        let psi = random_input(&h, seed ^ 2);
        let reduced = h.history_reduced(&psi, &["B"]).unwrap();
        let hist = h.history_state(&psi).unwrap();
        prop_assert!((reduced.matrix() - hist.reduced(&["B"]).unwrap().matrix()).norm() < 1e-10);
        let out = h.channel().apply_to_b(&psi.to_density().unwrap()).unwrap();
        prop_assert!(trace_norm_distance(&reduced, &out).unwrap() <= h.idle_bound() + 1e-12);
    }

    #[test]
    fn built_hamiltonian_survives_json(gates in 1usize..=4, idle in 0usize..=4, enc in encoding(), seed in any::<u64>()) {
        let h = clock(gates, idle, enc, seed);
        let text = h.local_hamiltonian().unwrap().to_json().unwrap();
        let back = ClockHamiltonian::from_local_hamiltonian(&LocalHamiltonian::from_json(&text).unwrap()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn gap_shrinks_as_idling_grows(gates in 1usize..=4, seed in any::<u64>()) {
        let gaps: Vec<f64> = [0, 4, 16, 64].iter().map(|&l| clock(gates, l, ClockEncoding::Kitaev, seed).spectral_gap()).collect();
        prop_assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn identity_gate_ground_space_is_every_input_at_every_time() {
    let ch = hamlab::channel::library::identity_channel(1).unwrap();
    let h = build(&ch, ClockConfig::for_channel(&ch, 0, ClockEncoding::Unary)).unwrap();
    let psi = random_input(&h, 3);
    let hist = h.history_state(&psi).unwrap();
    let out = h.channel().apply_to_b(&psi.to_density().unwrap()).unwrap();
    assert!((out.matrix() - psi.to_density().unwrap().matrix()).norm() < 1e-12);
    assert!(h.local_hamiltonian().unwrap().energy(&hist).unwrap().abs() < 1e-12);
}
