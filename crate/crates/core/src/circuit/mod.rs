//! Stabilizer circuits for memory and surgery experiments, their noise,
//! simulation and detector error models.

mod build;
mod frame;
mod ir;
mod model;
mod sample;
mod schedule;
mod tableau;

pub use build::{build_injection_circuit, build_memory_circuit, injection_layout, ExperimentBasis, QubitLayout};
pub use frame::{randomized_frame_check, FrameCheck, FrameSim};
pub use ir::{Channel, Circuit, Detector, Gate, Observable, Op, PauliKind, MAX_CORRELATED};
pub use model::{
    apply_noise, derive_detector_model, derive_elementary_model, xor_probability, ChannelModel, CorrelatedFault, DetectorModel,
    ElementaryModel, Fault, NoiseModel, Signature,
};
pub use sample::{sample, Sampler, Shot, SHOT_BLOCK};
pub use schedule::{jobs_for, layer_jobs, layer_round, schedule_parity_circuit, Builder, CheckJob, CheckOrders, SlotOrder};
pub use tableau::{annotate, run_tableau, Tableau};

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::codes::{composite, surface};
    use crate::gf2::BitMatrix;
    use crate::par::Execution;
    use crate::surgery::{deform, DeformedCode, GraphPolicy, SurgeryTargets};

    fn fig2(d_r: usize) -> (DeformedCode, CheckOrders) {
        let s = surface(2).unwrap();
        let code = composite(&s, &s, 1).unwrap();
        let t = SurgeryTargets::new(BitMatrix::from_dense(&[&[1, 1]])).unwrap();
        let dc = deform(&code, &t, GraphPolicy::Path, d_r).unwrap();
        let so = CheckOrders::surface(2);
        (dc, CheckOrders::composite(&so, 5, &so, 5, 1))
    }

    fn assert_deterministic(c: &Circuit) {
        let fc = randomized_frame_check(c, 2, 11);
        assert!(fc.nondeterministic_detectors().is_empty(), "{:?}", fc.nondeterministic_detectors().iter().map(|&i| &c.detectors[i].label).collect::<Vec<_>>());
        assert!(fc.nondeterministic_observables().is_empty());
    }

    #[test]
    fn memory_annotations_are_deterministic() {
        for d in [2, 3] {
            let code = surface(d).unwrap();
            for basis in [ExperimentBasis::Z, ExperimentBasis::X, ExperimentBasis::Both] {
                let c = build_memory_circuit(&code, &CheckOrders::surface(d), 3, basis).unwrap();
                assert!(!c.detectors.is_empty());
                assert_deterministic(&c);
            }
        }
    }

    #[test]
    fn injection_annotations_are_deterministic() {
        for d_r in [1, 2] {
            let (dc, o) = fig2(d_r);
            for basis in [ExperimentBasis::Z, ExperimentBasis::X, ExperimentBasis::Both] {
                let c = build_injection_circuit(&dc, &o, 2, basis).unwrap();
                assert_deterministic(&c);
            }
        }
    }

    #[test]
    fn noiseless_tableau_run_reads_zero_everywhere() {
        let (dc, o) = fig2(2);
        for basis in [ExperimentBasis::Z, ExperimentBasis::X] {
            let c = build_injection_circuit(&dc, &o, 2, basis).unwrap();
            for seed in 0..3 {
                let rec = run_tableau(&c, &mut ChaCha8Rng::seed_from_u64(seed));
                let (d, ob) = annotate(&c, &rec);
                assert!(d.iter().all(|&b| !b));
                // Z⊗Z on |00⟩ reads +1; the X-basis logicals start at +1.
                assert!(ob.iter().all(|&b| !b));
            }
        }
    }

    #[test]
    fn noise_channel_count_follows_gate_count() {
        let (dc, o) = fig2(2);
        let c = build_injection_circuit(&dc, &o, 2, ExperimentBasis::Z).unwrap();
        let noisy = apply_noise(&c, &NoiseModel::uniform(1e-3)).unwrap();
        let gates = c.count_gates(|g| !matches!(g, Gate::X(_) | Gate::Z(_)));
        assert_eq!(noisy.channels().count(), gates);
        noisy.validate().unwrap();
    }

    /// Replays single faults as explicit gates on the tableau and compares
    /// with the frame-propagated signatures.
    #[test]
    fn frame_signatures_match_tableau_replay() {
        let (dc, o) = fig2(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for basis in [ExperimentBasis::Z, ExperimentBasis::X] {
            let c = build_injection_circuit(&dc, &o, 2, basis).unwrap();
            let noisy = apply_noise(&c, &NoiseModel::uniform(0.01)).unwrap();
            let em = derive_elementary_model(&noisy, Execution::default());
            for _ in 0..60 {
                let ci = rng.gen_range(0..em.channels.len());
                let k = rng.gen_range(0..em.channels[ci].outcomes.len());
                let mut replay = c.clone();
                let mut seen = 0usize;
                let mut flip_record = None;
                for (t, m) in noisy.moments.iter().enumerate() {
                    for op in m {
                        if let Op::Noise(ch) = op {
                            if seen == ci {
                                if let Channel::RecordFlip { record, .. } = ch {
                                    flip_record = Some(*record as usize);
                                }
                                let mut extra = Vec::new();
                                for (q, p) in ch.outcome(k) {
                                    let (x, z) = p.bits();
                                    if x {
                                        extra.push(Op::Gate(Gate::X(q)));
                                    }
                                    if z {
                                        extra.push(Op::Gate(Gate::Z(q)));
                                    }
                                }
                                // Faults act after the timestep's gates.
                                replay.moments.insert(t + 1, extra);
                            }
                            seen += 1;
                        }
                    }
                }
                let mut rec = run_tableau(&replay, &mut ChaCha8Rng::seed_from_u64(9));
                if let Some(r) = flip_record {
                    rec[r] ^= true;
                }
                let (d, ob) = annotate(&c, &rec);
                let dets: Vec<u32> = (0..d.len()).filter(|&i| d[i]).map(|i| i as u32).collect();
                let obs: Vec<u32> = (0..ob.len()).filter(|&i| ob[i]).map(|i| i as u32).collect();
                let sig = &em.channels[ci].outcomes[k];
                assert_eq!((&sig.dets, &sig.obs), (&dets, &obs), "channel {ci} outcome {k}");
            }
        }
    }

    #[test]
    fn merged_model_keeps_total_weight() {
        let (dc, o) = fig2(1);
        let c = build_injection_circuit(&dc, &o, 1, ExperimentBasis::Z).unwrap();
        let noisy = apply_noise(&c, &NoiseModel::uniform(0.01)).unwrap();
        let em = derive_elementary_model(&noisy, Execution::Sequential);
        let dm = em.merged();
        let mut sigs: Vec<_> = dm.faults.iter().map(|f| (&f.dets, &f.obs)).collect();
        sigs.sort();
        sigs.dedup();
        assert_eq!(sigs.len(), dm.faults.len());
        assert_eq!(em, derive_elementary_model(&noisy, Execution::Parallel));
    }

    #[test]
    fn sampling_is_reproducible_across_execution_modes() {
        let (dc, o) = fig2(1);
        let c = build_injection_circuit(&dc, &o, 1, ExperimentBasis::Z).unwrap();
        let noisy = apply_noise(&c, &NoiseModel::uniform(0.02)).unwrap();
        let em = derive_elementary_model(&noisy, Execution::default());
        let a = sample(&em, 700, 3, Execution::Sequential);
        let b = sample(&em, 700, 3, Execution::Parallel);
        assert_eq!(a, b);
        let sampler = Sampler::new(&em);
        assert_eq!(sampler.shot(3, 411), a[411]);
        assert!(a.iter().any(|s| !s.detectors.is_zero()));
    }

    #[test]
    fn sampled_detector_rate_matches_model() {
        // Mean fired-detector count against the exact first-order expectation.
        let code = surface(2).unwrap();
        let c = build_memory_circuit(&code, &CheckOrders::surface(2), 2, ExperimentBasis::Z).unwrap();
        let noisy = apply_noise(&c, &NoiseModel::uniform(1e-3)).unwrap();
        let em = derive_elementary_model(&noisy, Execution::default());
        let shots = 40_000;
        let s = sample(&em, shots, 8, Execution::default());
        let mean = s.iter().map(|x| x.detectors.weight()).sum::<usize>() as f64 / shots as f64;
        let expect: f64 = em
            .channels
            .iter()
            .map(|ch| ch.p / ch.outcomes.len() as f64 * ch.outcomes.iter().map(|o| o.dets.len()).sum::<usize>() as f64)
            .sum();
        assert!((mean - expect).abs() < 0.1 * expect + 0.005, "mean {mean} expected {expect}");
    }
}
