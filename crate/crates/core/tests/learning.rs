use eegtda::learning::models::mlp::{loss_and_grad, n_params};
use eegtda::learning::{
    forms_significance, kfold_cv, label_from_forms, metrics, paired_ttest, train_predict, Confusion, CvConfig,
    Grouping, LabelRule, ModelKind, ModelParams, StandardScaler, StudyDataset,
};
use eegtda::seed;
use eegtda::signal_io::{synth_forms, FormsSpec, Label};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

mod common;
use common::{dataset, truth};

#[test]
fn mlp_gradient_matches_finite_differences() {
    let (p, hidden) = (4, 6);
    for s in 0..10u64 {
        let mut rng = seed::rng(s);
        let x: Vec<Vec<f64>> = (0..5).map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let y: Vec<bool> = (0..5).map(|i| i % 2 == 0).collect();
        let theta: Vec<f64> = (0..n_params(p, hidden)).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let (_, grad) = loss_and_grad(&theta, p, hidden, &x, &y, 1e-3);
        let h = 1e-6;
        let mut worst = 0.0f64;
        for k in 0..theta.len() {
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[k] += h;
            down[k] -= h;
            let fd = (loss_and_grad(&up, p, hidden, &x, &y, 1e-3).0 - loss_and_grad(&down, p, hidden, &x, &y, 1e-3).0)
                / (2.0 * h);
            worst = worst.max((fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-6));
        }
        assert!(worst < 1e-4, "seed {s}: relative error {worst}");
    }
}

#[test]
fn hand_checked_confusion() {
    let mut y_true = Vec::new();
    let mut y_pred = Vec::new();
    for (t, p, n) in [(true, true, 40), (true, false, 10), (false, true, 20), (false, false, 30)] {
        y_true.extend(std::iter::repeat_n(Label::from_bool(t), n));
        y_pred.extend(std::iter::repeat_n(Label::from_bool(p), n));
    }
    let m = metrics(&y_true, &y_pred).unwrap();
    assert!((m.accuracy - 0.7).abs() < 1e-12);
    assert!((m.f1 - 80.0 / 110.0).abs() < 1e-12);
    assert!((m.kappa - 0.4).abs() < 1e-12);
    let c = Confusion::from_labels(&y_true, &y_pred).unwrap();
    assert_eq!((c.tp, c.fn_, c.fp, c.tn), (40, 10, 20, 30));
}

#[test]
fn constant_prediction_has_zero_kappa() {
    let y_true: Vec<Label> = (0..10).map(|i| Label::from_bool(i < 5)).collect();
    let m = metrics(&y_true, &[Label::Stress; 10]).unwrap();
    assert_eq!(m.kappa, 0.0);
    assert!(metrics(&[Label::Stress; 4], &[Label::Stress; 4]).is_err(), "p_e = 1 leaves kappa undefined");
}

#[test]
fn shuffled_labels_give_chance_kappa() {
    let base = dataset(20, 6, 2.0, 1);
    let subjects: Vec<String> = truth(20).into_iter().map(|(s, _)| s).collect();
    let mut kappas = Vec::new();
    for s in 0..100u64 {
        let mut labels: Vec<Label> = truth(20).into_iter().map(|(_, l)| l).collect();
        labels.shuffle(&mut seed::rng(seed::derive(s, "shuffle")));
        let relabel = |id: &str| labels[subjects.iter().position(|x| x == id).unwrap()];
        let ds =
            StudyDataset::new(base.rows.clone(), base.rows.iter().map(|r| relabel(&r.provenance.subject_id)).collect())
                .unwrap();
        let cfg = CvConfig { seed: s, ..CvConfig::default() };
        kappas.push(kfold_cv(&ds, ModelKind::LR, &cfg).unwrap().kappa);
    }
    let mean = kappas.iter().sum::<f64>() / kappas.len() as f64;
    assert!(mean.abs() <= 0.1, "mean kappa under permutation {mean}");
}

#[test]
fn scaler_ignores_test_rows() {
    let ds = dataset(10, 4, 1.5, 2);
    let x = ds.x();
    let y = ds.y();
    let (train, test) = x.split_at(30);
    let mut mutated = test.to_vec();
    for row in mutated.iter_mut().skip(1) {
        row.iter_mut().for_each(|v| *v = *v * 1e3 + 7.0);
    }
    let params = ModelParams::default();
    for kind in ModelKind::ALL {
        let a = train_predict(kind, &params, train, &y[..30], test, 3).unwrap();
        let b = train_predict(kind, &params, train, &y[..30], &mutated, 3).unwrap();
        assert_eq!(a.scores[0], b.scores[0], "{kind}");
    }
    let scaler = StandardScaler::fit(train);
    let before = scaler.clone();
    let _ = scaler.transform(&mutated);
    assert_eq!(scaler, before);
}

#[test]
fn forms_labels_recover_ground_truth() {
    let labels = truth(20);
    let mut recovered = Vec::new();
    for s in 0..100u64 {
        let forms = synth_forms(&labels, &FormsSpec { rng_seed: s, ..FormsSpec::default() });
        let got = label_from_forms(&forms, &LabelRule::default()).unwrap();
        let hits = got.iter().zip(&labels).filter(|(a, b)| a.1 == b.1).count();
        recovered.push(hits as f64 / 20.0);
    }
    let mean = recovered.iter().sum::<f64>() / 100.0;
    assert!(mean >= 0.8, "mean recovery {mean}");

    let clean = synth_forms(&labels, &FormsSpec { noise_sd: 0.0, ..FormsSpec::default() });
    assert_eq!(label_from_forms(&clean, &LabelRule::default()).unwrap(), labels);
    let stress_min =
        clean.iter().zip(&labels).filter(|(_, l)| l.1.is_stress()).map(|(f, _)| f.y1()).fold(f64::INFINITY, f64::min);
    let normal_max =
        clean.iter().zip(&labels).filter(|(_, l)| !l.1.is_stress()).map(|(f, _)| f.y1()).fold(0.0, f64::max);
    assert!(stress_min > normal_max);
}

#[test]
fn separated_forms_are_significant() {
    let forms = synth_forms(&truth(20), &FormsSpec::default());
    let tests = forms_significance(&forms).unwrap();
    let y1_eq = tests.iter().find(|c| c.first == "Y1" && c.second == "EQ").unwrap();
    assert!(y1_eq.test.p < 0.01, "p = {}", y1_eq.test.p);
}

#[test]
fn paired_t_against_statrs() {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let mut rng = seed::rng(4);
    for n in [3usize, 5, 12, 40] {
        let a: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = a.iter().map(|v| v - 0.4 + 0.7 * rng.sample::<f64, _>(StandardNormal)).collect();
        let t = paired_ttest(&a, &b).unwrap();
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).unwrap();
        let p = 2.0 * (1.0 - dist.cdf(t.t.abs()));
        assert!((t.p - p).abs() < 1e-10, "n {n}: {} vs {p}", t.p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prop_folds_partition_subjects(seed_value in any::<u64>(), n in 6usize..16, k in 2usize..6) {
        prop_assume!(k <= n);
        let ds = dataset(n, 3, 0.5, seed_value);
        let cfg = CvConfig { k, seed: seed_value, ..CvConfig::default() };
        let res = kfold_cv(&ds, ModelKind::DT, &cfg).unwrap();
        prop_assert!(res.test_fold.iter().all(|f| f.is_some_and(|f| f < k)));
        let mut fold_of = std::collections::HashMap::new();
        for (row, f) in ds.rows.iter().zip(&res.test_fold) {
            let prev = fold_of.insert(row.provenance.subject_id.clone(), f.unwrap());
            prop_assert!(prev.is_none_or(|p| p == f.unwrap()));
        }
        prop_assert_eq!(res.fold_accuracies.len(), k);
        prop_assert!((0.0..=1.0).contains(&res.accuracy_mean));
        prop_assert!((-1.0..=1.0).contains(&res.kappa));
        prop_assert!((0.0..=1.0).contains(&res.f1));
        prop_assert_eq!(res.confusion.total(), ds.len());
    }

    #[test]
    fn prop_trial_grouping_covers_every_row(seed_value in any::<u64>()) {
        let ds = dataset(6, 5, 0.5, seed_value);
        let cfg = CvConfig { grouping: Grouping::ByTrial, seed: seed_value, ..CvConfig::default() };
        let res = kfold_cv(&ds, ModelKind::LR, &cfg).unwrap();
        let mut counts = [0usize; 5];
        for f in &res.test_fold {
            counts[f.unwrap()] += 1;
        }
        prop_assert!(counts.iter().all(|&c| c == 6));
    }

    #[test]
    fn prop_cv_is_deterministic(seed_value in any::<u64>(), model in prop::sample::select(ModelKind::ALL.to_vec())) {
        let ds = dataset(10, 2, 1.0, seed_value);
        let cfg = CvConfig { seed: seed_value, ..CvConfig::default() };
        prop_assert_eq!(kfold_cv(&ds, model, &cfg).unwrap(), kfold_cv(&ds, model, &cfg).unwrap());
    }

    #[test]
    fn prop_metric_ranges(labels in prop::collection::vec((any::<bool>(), any::<bool>()), 2..60)) {
        let y_true: Vec<Label> = labels.iter().map(|p| Label::from_bool(p.0)).collect();
        let y_pred: Vec<Label> = labels.iter().map(|p| Label::from_bool(p.1)).collect();
        if let Ok(m) = metrics(&y_true, &y_pred) {
            prop_assert!((0.0..=1.0).contains(&m.accuracy));
            prop_assert!((0.0..=1.0).contains(&m.f1));
            prop_assert!((-1.0..=1.0 + 1e-12).contains(&m.kappa));
            prop_assert_eq!(m.kappa == 1.0, y_true == y_pred);
        }
    }
}
