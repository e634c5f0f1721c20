use std::sync::OnceLock;

use inject_core::circuit::{apply_noise, build_memory_circuit, derive_elementary_model, ElementaryModel, ExperimentBasis, NoiseModel, Sampler, SHOT_BLOCK};
use inject_core::codes::surface;
use inject_core::decoder::{BpOsd, DecoderConfig};
use inject_core::experiments::{independence_z, injection_frame, wilson_interval, EventRecord};
use inject_core::par::{map_range, Execution};
use inject_core::{BitMatrix, BitVec};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
            BitMatrix::from_entries(r, c, bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i / c, i % c)))
        })
    })
}

fn vector(len: usize) -> impl Strategy<Value = BitVec> {
    prop::collection::vec(any::<bool>(), len).prop_map(|b| BitVec::from_indices(b.len(), b.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i)))
}

fn surface3_model() -> &'static ElementaryModel {
    static MODEL: OnceLock<ElementaryModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let code = surface(3).unwrap();
        let orders = inject_core::circuit::CheckOrders::surface(3);
        let c = build_memory_circuit(&code, &orders, 3, ExperimentBasis::Z).unwrap();
        let noisy = apply_noise(&c, &NoiseModel::uniform(1e-3)).unwrap();
        derive_elementary_model(&noisy, Execution::Sequential)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_is_transpose_invariant(m in matrix(12, 12)) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn kernel_basis_is_a_full_kernel(m in matrix(12, 16)) {
        let k = m.kernel_basis();
        prop_assert_eq!(k.rows(), m.cols() - m.rank());
        prop_assert_eq!(k.rank(), k.rows());
        prop_assert!(m.mul(&k.transpose()).is_zero());
    }

    #[test]
    fn solve_vec_recovers_a_preimage((m, x) in matrix(10, 14).prop_flat_map(|m| { let c = m.cols(); (Just(m), vector(c)) })) {
        let b = m.mul_vec(&x);
        let y = m.solve_vec(&b).unwrap();
        prop_assert_eq!(m.mul_vec(&y), b);
    }

    #[test]
    fn kron_rank_is_multiplicative(a in matrix(4, 4), b in matrix(4, 4)) {
        prop_assert_eq!(a.kron(&b).rank(), a.rank() * b.rank());
    }

    #[test]
    fn echelon_pivots_are_increasing(m in matrix(10, 10)) {
        let e = m.echelon();
        prop_assert_eq!(e.pivots.len(), m.rank());
        prop_assert!(e.pivots.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn independence_z_is_symmetric_and_signed(n in 2u64..5000, fa in 0.0f64..1.0, fb in 0.0f64..1.0, fab in 0.0f64..1.0) {
        let n_a = ((n as f64) * fa) as u64;
        let n_b = ((n as f64) * fb) as u64;
        let lo = (n_a + n_b).saturating_sub(n);
        let hi = n_a.min(n_b);
        let n_ab = lo + (((hi - lo) as f64) * fab) as u64;
        let z = independence_z(n, n_a, n_b, n_ab);
        prop_assert_eq!(z, independence_z(n, n_b, n_a, n_ab));
        if let Some(z) = z {
            prop_assert!(z.abs() <= (n as f64).sqrt() + 1e-9);
            let excess = (n * n_ab) as f64 - (n_a * n_b) as f64;
            if excess == 0.0 {
                prop_assert!(z.abs() < 1e-12);
            } else {
                prop_assert_eq!(z > 0.0, excess > 0.0);
            }
        }
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1u64..100_000, f in 0.0f64..=1.0) {
        let k = ((n as f64) * f) as u64;
        let (lo, hi) = wilson_interval(k, n, 1.96);
        let p = k as f64 / n as f64;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
    }

    #[test]
    fn injection_frame_is_linear(a in any::<(bool, bool, bool)>(), b in any::<(bool, bool, bool)>()) {
        let fa = injection_frame(a.0, a.1, a.2);
        let fb = injection_frame(b.0, b.1, b.2);
        let fs = injection_frame(a.0 ^ b.0, a.1 ^ b.1, a.2 ^ b.2);
        prop_assert_eq!(fs, (fa.0 ^ fb.0, fa.1 ^ fb.1));
    }

    #[test]
    fn z_error_is_xor_of_logical_and_outcome(z in prop::collection::vec(any::<bool>(), 2), oc in prop::collection::vec(any::<bool>(), 2)) {
        let e = EventRecord { z: z.clone(), oc: oc.clone(), xx: Vec::new() };
        for j in 0..2 {
            prop_assert_eq!(e.z_error(j), Some(z[j] ^ oc[j]));
        }
        prop_assert_eq!(e.z_error(2), None);
        prop_assert_eq!(e.x_error(0), None);
    }

    #[test]
    fn map_range_is_order_preserving(n in 0usize..2000) {
        let f = |i: usize| i.wrapping_mul(0x9E37_79B9) ^ (i >> 3);
        prop_assert_eq!(map_range(Execution::Parallel, n, f), map_range(Execution::Sequential, n, f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampler_blocks_tile_any_range(seed in any::<u64>(), start in 0usize..600, len in 0usize..600) {
        let model = surface3_model();
        let sampler = Sampler::new(model);
        let blocks = sampler.map_block_range(seed, start..start + len, Execution::Parallel, |s, shots| (s, shots));
        let mut next = start;
        for (s, shots) in blocks {
            prop_assert_eq!(s, next);
            prop_assert!(shots.len() <= SHOT_BLOCK);
            for (i, shot) in shots.iter().enumerate() {
                prop_assert_eq!(shot, &sampler.shot(seed, (s + i) as u64));
            }
            next = s + shots.len();
        }
        prop_assert_eq!(next, start + len);
    }

    #[test]
    fn decoder_correction_reproduces_the_syndrome(picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let dem = surface3_model().merged();
        let decoder = BpOsd::new(&dem, DecoderConfig::default()).unwrap();
        let mut syndrome = BitVec::zeros(dem.num_detectors);
        for ix in &picks {
            for &d in &dem.faults[ix.index(dem.faults.len())].dets {
                syndrome.flip(d as usize);
            }
        }
        let out = decoder.decode(&syndrome).unwrap();
        let mut check = BitVec::zeros(dem.num_detectors);
        for &f in &out.correction {
            for &d in &dem.faults[f].dets {
                check.flip(d as usize);
            }
        }
        prop_assert_eq!(check, syndrome);
        prop_assert_eq!(out.observables, decoder.observables_of(&out.correction));
    }
}
