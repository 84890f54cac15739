use qrobust::trainer::*;
use qrobust::KureConfig;

fn small(seed: u64, kure: Option<KureConfig>) -> TrainConfig {
    TrainConfig {
        layer_sizes: vec![2, 32, 32, 3],
        epochs: 100,
        batch_size: 32,
        learning_rate: 0.05,
        seed,
        kure,
        qat_bits: None,
        init: InitScheme::Normal,
    }
}

fn data(seed: u64) -> (Dataset, Dataset) {
    make_dataset(2000, 1000, seed).unwrap()
}

#[test]
fn baseline_reduces_training_loss() {
    let (train_set, _) = data(7);
    let (_, h) = train(&small(7, None), &train_set).unwrap();
    assert!(h.epochs.last().unwrap().task_loss < h.initial_loss);
}

#[test]
fn kure_pulls_each_layer_toward_target() {
    let (train_set, test) = data(7);
    let (base, _) = train(&small(7, None), &train_set).unwrap();
    let (reg, h) = train(&small(7, Some(KureConfig::default())), &train_set).unwrap();
    let last = h.epochs.last().unwrap();
    for (init, fin) in h.initial_kurtosis.iter().zip(&last.layer_kurtosis) {
        assert!((fin - 1.8).abs() < (init - 1.8).abs(), "{init} -> {fin}");
        assert!((fin - 1.8).abs() <= 0.3, "final kurtosis {fin}");
    }
    let gap = (base.accuracy(&test) - reg.accuracy(&test)).abs();
    assert!(gap <= 0.02, "accuracy gap {gap}");
}

#[test]
fn sixteen_bit_qat_tracks_full_precision() {
    let (train_set, _) = data(3);
    let mut cfg = small(3, None);
    cfg.layer_sizes = vec![2, 16, 3];
    cfg.epochs = 10;
    let (_, plain) = train(&cfg, &train_set).unwrap();
    cfg.qat_bits = Some(16);
    let (_, qat) = train(&cfg, &train_set).unwrap();
    for (p, q) in plain.epochs.iter().zip(&qat.epochs) {
        assert!((p.task_loss - q.task_loss).abs() <= 1e-3, "epoch {}: {} vs {}", p.epoch, p.task_loss, q.task_loss);
    }
}

#[test]
fn identical_configs_replay_bitwise() {
    let (train_set, _) = data(11);
    let mut cfg = small(11, Some(KureConfig::default()));
    cfg.epochs = 5;
    cfg.qat_bits = Some(4);
    let a = train(&cfg, &train_set).unwrap();
    let b = train(&cfg, &train_set).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ptq_extremes() {
    let (train_set, test) = data(7);
    let (base, _) = train(&small(7, None), &train_set).unwrap();
    let (reg, _) = train(&small(7, Some(KureConfig::default())), &train_set).unwrap();
    for m in [&base, &reg] {
        let fp = m.accuracy(&test);
        let q16 = sweep_bits(m, &[16], false, &test).unwrap().rows[0].accuracy;
        assert!((fp - q16).abs() <= 0.005, "{fp} vs {q16}");
    }
    let two = ptq_evaluate(&base, &PtqSpec::new(2, 1.0), &test).unwrap();
    let eight = ptq_evaluate(&base, &PtqSpec::new(8, 1.0), &test).unwrap();
    assert!(two <= eight);
}

#[test]
fn reference_models_step_perturbation() {
    let (train_set, test) = REFERENCE_DATASET.generate(REFERENCE_SEED).unwrap();
    let (base, _) = train(&reference_config(None), &train_set).unwrap();
    let (reg, _) = train(&reference_config(Some(KureConfig::default())), &train_set).unwrap();
    let drop = |m: &MlpModel| {
        ptq_evaluate(m, &PtqSpec::new(4, 1.0), &test).unwrap() - ptq_evaluate(m, &PtqSpec::new(4, 1.1), &test).unwrap()
    };
    let (db, dk) = (drop(&base), drop(&reg));
    assert!(db >= dk, "baseline drop {db}, KURE drop {dk}");
}

#[test]
fn dataset_classes_balanced() {
    for seed in [1, 7, 42] {
        let (train_set, test) = data(seed);
        for d in [&train_set, &test] {
            let equal = d.len() as f64 / CLASSES as f64;
            for c in d.class_counts() {
                assert!((c as f64 - equal).abs() <= 0.05 * equal);
            }
        }
    }
}
