use hamlab::channel::{contract_choi, library, ChannelSpec};
use hamlab::linalg::{c64, CMatrix, C64};
use hamlab::qstate::{trace_norm_distance, vn_entropy, DensityMatrix, PureState, RegisterLayout};
use hamlab::random::{ginibre_density, haar_vector, seeded};
use proptest::prelude::*;

fn input(n_a: usize, rank: usize, seed: u64) -> DensityMatrix {
    let l = RegisterLayout::single("A", n_a).unwrap();
    DensityMatrix::new(l.clone(), ginibre_density(l.dim(), rank, &mut seeded(seed))).unwrap()
}

/// `V_T ⋯ V_1`, each gate written out entry by entry on the full register.
fn dense_product(ch: &ChannelSpec) -> CMatrix {
    let n = ch.qubits();
    let dim = 1usize << n;
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let mut u = CMatrix::identity(dim, dim);
    for step in ch.steps() {
        let s = step.support();
        let local = |x: usize| s.iter().fold(0, |acc, &q| (acc << 1) | bit(x, q));
        let g = CMatrix::from_fn(dim, dim, |i, j| {
            if (0..n).filter(|q| !s.contains(q)).all(|q| bit(i, q) == bit(j, q)) {
                step.unitary()[(local(i), local(j))]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        u = g * u;
    }
    u
}

/// `Tr_AE U(ρ ⊗ |0⟩⟨0|)U†` by summing over the A and E indices of the A, B, E product basis.
fn output_on_b(ch: &ChannelSpec, rho: &DensityMatrix) -> CMatrix {
    let (da, db, de) = (1usize << ch.n_a(), 1usize << ch.n_b(), 1usize << ch.n_e());
    let u = dense_product(ch);
    let mut full_in = CMatrix::zeros(da * db * de, da * db * de);
    for i in 0..da {
        for j in 0..da {
            full_in[(i * db * de, j * db * de)] = rho.matrix()[(i, j)];
        }
    }
    let full = &u * full_in * u.adjoint();
    CMatrix::from_fn(db, db, |b, b2| {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..da {
            for e in 0..de {
                s += full[((a * db + b) * de + e, (a * db + b2) * de + e)];
            }
        }
        s
    })
}

fn channel_strategy() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..=2, 1usize..=2, 0usize..=6, any::<u64>()).prop_filter("at most 3 system qubits", |(a, b, _, _)| a + b <= 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dilation_matches_entrywise_gate_product((n_a, n_b, gates, seed) in channel_strategy()) {
        let ch = ChannelSpec::random(n_a, n_b, gates, &mut seeded(seed)).unwrap();
        let u = ch.dilation_unitary().unwrap();
        prop_assert!((&u - dense_product(&ch)).norm() < 1e-12);
        let dim = u.nrows();
        prop_assert!((u.adjoint() * &u - CMatrix::identity(dim, dim)).norm() < 1e-10);
    }

    #[test]
    fn output_matches_dense_dilation((n_a, n_b, gates, seed) in channel_strategy(), rank in 1usize..=4) {
        let ch = ChannelSpec::random(n_a, n_b, gates, &mut seeded(seed)).unwrap();
        let rho = input(n_a, rank, seed ^ 1);
        let out = ch.apply_to_b(&rho).unwrap();
        prop_assert!((out.matrix() - output_on_b(&ch, &rho)).norm() < 1e-10);
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.eigenvalues().iter().all(|&p| p > -1e-12));
    }

    #[test]
    fn choi_state_reproduces_the_channel((n_a, n_b, gates, seed) in channel_strategy(), rank in 1usize..=4) {
        let ch = ChannelSpec::random(n_a, n_b, gates, &mut seeded(seed)).unwrap();
        let j = ch.choi_state(&["A", "E"]).unwrap();
        let marginal = j.partial_trace(&["R"]).unwrap();
        let da = 1usize << n_a;
        prop_assert!((marginal.matrix() - CMatrix::identity(da, da).unscale(da as f64)).norm() < 1e-10);
        let rho = input(n_a, rank, seed ^ 2);
        let via_choi = contract_choi(&j, &rho).unwrap();
        prop_assert!((via_choi.matrix() - ch.apply_to_b(&rho).unwrap().matrix()).norm() < 1e-10);
    }

    #[test]
    fn channels_contract_trace_distance((n_a, n_b, gates, seed) in channel_strategy()) {
        let ch = ChannelSpec::random(n_a, n_b, gates, &mut seeded(seed)).unwrap();
        let r = input(n_a, 1, seed ^ 3);
        let s = input(n_a, 2, seed ^ 4);
        let before = trace_norm_distance(&r, &s).unwrap();
        let after = trace_norm_distance(&ch.apply_to_b(&r).unwrap(), &ch.apply_to_b(&s).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-10);
    }

    #[test]
    fn pure_inputs_leave_complementary_outputs_equally_mixed((n_a, n_b, gates, seed) in channel_strategy()) {
        let ch = ChannelSpec::random(n_a, n_b, gates, &mut seeded(seed)).unwrap();
        let psi = PureState::new(ch.input_layout(), haar_vector(1 << n_a, &mut seeded(seed ^ 5))).unwrap();
        let rho = psi.to_density().unwrap();
        let b = ch.apply(&rho, &["A", "E"]).unwrap();
        let ae = ch.apply(&rho, &["B"]).unwrap();
        prop_assert!((vn_entropy(&b) - vn_entropy(&ae)).abs() < 1e-8);
    }

    #[test]
    fn json_round_trip((n_a, n_b, gates, seed) in channel_strategy()) {
        let ch = ChannelSpec::random(n_a, n_b, gates, &mut seeded(seed)).unwrap();
        prop_assert_eq!(ChannelSpec::from_json(&ch.to_json().unwrap()).unwrap(), ch);
    }
}

#[test]
fn library_channels() {
    let rho = input(2, 3, 17);
    let id = library::identity_channel(2).unwrap();
    assert!((id.apply_to_b(&rho).unwrap().matrix() - rho.matrix()).norm() < 1e-12);
    let dep = library::fully_depolarizing(2).unwrap();
    let out = dep.apply_to_b(&rho).unwrap();
    assert!((out.matrix() - CMatrix::identity(4, 4).unscale(4.0)).norm() < 1e-12);
    // Choi state of full depolarization is Ĩ ⊗ Ĩ
    let j = dep.choi_state(&["A", "E"]).unwrap();
    assert!((j.matrix() - CMatrix::identity(16, 16).unscale(16.0)).norm() < 1e-12);
    let bell = id.choi_state(&["A", "E"]).unwrap();
    assert!((bell.purity() - 1.0).abs() < 1e-12);
    assert!((bell.matrix()[(0, 15)] - c64(0.25, 0.0)).norm() < 1e-12);
}
