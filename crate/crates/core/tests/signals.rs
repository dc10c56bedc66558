use eegtda::pointcloud::pca_embed;
use eegtda::preprocessing::{preprocess, segment_trials, FilterSpec};
use eegtda::signal_io::{
    read_recording, synth_cohort, write_recording_to, CohortSpec, Recording, RecordingMeta, Segment,
};
use proptest::prelude::*;

fn small_cohort(rng_seed: u64) -> CohortSpec {
    CohortSpec { n_subjects: 2, n_stress: 1, segment_duration_s: 20.0, rng_seed, ..CohortSpec::default() }
}

fn mean_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Mean channel-to-channel distance of every 10 s trial, keyed by segment and index.
fn trial_spreads(rec: &Recording) -> Vec<f64> {
    let clean = preprocess(rec, &FilterSpec::default()).unwrap();
    segment_trials(&clean, 10.0)
        .unwrap()
        .iter()
        .map(|t| mean_pairwise_distance(&pca_embed(t, 3).unwrap().points))
        .collect()
}

#[test]
fn stress_subjects_spread_wider() {
    let (mut wins, mut total) = (0, 0);
    for s in 0..100u64 {
        let cohort = synth_cohort(&small_cohort(s)).unwrap();
        let (stress, normal) =
            if cohort[0].label.is_stress() { (&cohort[0], &cohort[1]) } else { (&cohort[1], &cohort[0]) };
        for (a, b) in stress.recordings.iter().zip(&normal.recordings) {
            for (x, y) in trial_spreads(a).into_iter().zip(trial_spreads(b)) {
                total += 1;
                wins += usize::from(x > y);
            }
        }
    }
    let frac = wins as f64 / total as f64;
    assert!(frac >= 0.9, "stress trial wider in {wins}/{total}");
}

#[test]
fn cohort_is_deterministic_and_shaped() {
    let spec = small_cohort(3);
    let a = synth_cohort(&spec).unwrap();
    assert_eq!(a, synth_cohort(&spec).unwrap());
    assert_ne!(a, synth_cohort(&small_cohort(4)).unwrap());
    for subject in &a {
        let segments: Vec<Segment> = subject.recordings.iter().map(|r| r.segment).collect();
        assert_eq!(segments, Segment::ALL);
        for r in &subject.recordings {
            assert_eq!((r.n_channels(), r.n_samples()), (32, 10_000));
        }
    }
    assert_eq!(a.iter().filter(|s| s.label.is_stress()).count(), 1);
}

fn meta(rec: &Recording) -> RecordingMeta {
    RecordingMeta { subject_id: rec.subject_id.clone(), segment: rec.segment, sample_rate_hz: rec.sample_rate_hz }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_csv_round_trip_is_exact(
        rows in (2usize..6, 1usize..40).prop_flat_map(|(c, n)| prop::collection::vec(prop::collection::vec(finite(), n), c)),
        fs in 1.0f64..4000.0,
        segment in prop::sample::select(Segment::ALL.to_vec()),
    ) {
        let names = (0..rows.len()).map(|i| format!("E{i}")).collect();
        let rec = Recording::new("sub-3", segment, names, fs, rows).unwrap();
        let mut bytes = Vec::new();
        write_recording_to(&mut bytes, &rec).unwrap();
        let back = read_recording(bytes.as_slice(), &meta(&rec)).unwrap();
        for (a, b) in back.data.iter().flatten().zip(rec.data.iter().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(&back, &rec);
        let mut again = Vec::new();
        write_recording_to(&mut again, &back).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn prop_trials_tile_the_recording(n in 50usize..400, window in 0.05f64..0.9) {
        let fs = 100.0;
        let data = (0..3).map(|c| (0..n).map(|i| (i * 3 + c) as f64).collect()).collect();
        let rec = Recording::new("S01", Segment::Task, vec!["a".into(), "b".into(), "c".into()], fs, data).unwrap();
        let t = (window * fs).round() as usize;
        prop_assume!(t > 0 && t <= n);
        let trials = segment_trials(&rec, window).unwrap();
        prop_assert_eq!(trials.len(), n / t);
        for (k, trial) in trials.iter().enumerate() {
            prop_assert_eq!(trial.trial_index, k);
            for (row, orig) in trial.data.iter().zip(&rec.data) {
                prop_assert_eq!(row.as_slice(), &orig[k * t..(k + 1) * t]);
            }
        }
    }
}
