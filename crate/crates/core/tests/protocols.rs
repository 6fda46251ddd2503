use tdsl::corpus::{build_vocab, loeo_folds, synthetic_separable, PhemeEvent};
use tdsl::eval::{run_fold, run_loeo, LoeoReport};
use tdsl::train::multi_run;
use tdsl::{Class, Dataset, Example, Split, TrainConfig};

fn small_config() -> TrainConfig {
    TrainConfig {
        epochs: 2,
        ramp_epochs: 2,
        batch_size: 8,
        learning_rate: 1e-3,
        embed_dim: 6,
        max_len: 8,
        labeled_ratio: 0.5,
        shared_filters: 3,
        path_filters: 3,
        seed: 21,
        ..TrainConfig::default()
    }
}

fn five_events() -> Dataset {
    let base = synthetic_separable(60, 5, 8).unwrap();
    let examples: Vec<Example> = base
        .into_examples()
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.with_event(PhemeEvent::ALL[i % 5].slug()))
        .collect();
    Dataset::new(examples, Split::Train).unwrap()
}

#[test]
fn loeo_macro_is_mean_of_folds() {
    let data = five_events();
    let report = run_loeo(&small_config(), &data, 1, Class::Fake).unwrap();
    assert_eq!(report.folds.len(), 5);
    let mean_acc = report.folds.iter().map(|f| f.report.accuracy).sum::<f64>() / 5.0;
    let mean_f = report.folds.iter().map(|f| f.report.fscore).sum::<f64>() / 5.0;
    assert!((report.macro_metrics.macro_a - mean_acc).abs() <= 1e-12);
    assert!((report.macro_metrics.macro_f - mean_f).abs() <= 1e-12);
    for f in &report.folds {
        assert_eq!(f.test_size, 12);
        assert_eq!(f.train_size, 48);
        assert_eq!(f.n_labeled, 24);
        assert_eq!(f.report.per_event.len(), 1);
        assert_eq!(f.report.per_event[0].event, f.event);
    }
}

#[test]
fn fold_runs_are_independent_of_order() {
    let data = five_events();
    let folds = loeo_folds(&data).unwrap();
    let config = small_config();
    let forward: Vec<_> = folds.iter().map(|f| run_fold(&config, f, 1, Class::Fake).unwrap()).collect();
    let backward: Vec<_> = folds.iter().rev().map(|f| run_fold(&config, f, 1, Class::Fake).unwrap()).collect();
    for (a, b) in forward.iter().zip(backward.iter().rev()) {
        assert_eq!(a.params, b.params);
        assert_eq!(a.report, b.report);
    }
    let full = LoeoReport::from_outcomes(&forward).unwrap();
    assert_eq!(full.macro_metrics, run_loeo(&config, &data, 1, Class::Fake).unwrap().macro_metrics);
}

#[test]
fn multi_run_averages_seeded_runs() {
    let config = small_config();
    let train = synthetic_separable(40, 5, 1).unwrap();
    let test_raw = synthetic_separable(20, 5, 2).unwrap();
    let test = Dataset::new(test_raw.into_examples(), Split::Test).unwrap();
    let vocab = build_vocab(&[&train], 1).unwrap();
    let train = train.encode(&vocab, config.max_len).unwrap();
    let test = test.encode(&vocab, config.max_len).unwrap();
    let report = multi_run(&config, vocab.len(), &train, &test, 3, Class::Fake).unwrap();
    assert_eq!(report.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), [21, 22, 23]);
    assert!(report.runs.iter().all(|r| r.n_labeled == 20));
    let mean = report.runs.iter().map(|r| r.report.accuracy).sum::<f64>() / 3.0;
    assert!((report.mean.accuracy - mean).abs() < 1e-12);
    assert!(multi_run(&config, vocab.len(), &train, &test, 0, Class::Fake).is_err());
}
