use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::env::{synthetic_env, EnvironmentSpec};
use scalefb::experiment::{
    read_curve_csv, run_benchmark, run_session, ArmSpec, ExperimentConfig, FeedbackKind, Metric, SessionOptions,
    CURVE_HEADER,
};
use scalefb::queries::{PolicyKind, QueryPolicy};
use scalefb::SimulatedUser;

fn small_config(dir: Option<std::path::PathBuf>, threads: usize) -> ExperimentConfig {
    ExperimentConfig {
        environment: EnvironmentSpec::fetch(60, 4),
        n_users: 2,
        alpha_grid: vec![0.5, 1.0],
        sigma_true: 0.2,
        sigma_assumed: None,
        epsilon: 0.1,
        k: 3,
        policies: vec![
            ArmSpec::new(FeedbackKind::Scale, QueryPolicy::new(PolicyKind::InfoGain).with_budget(100)),
            ArmSpec::new(FeedbackKind::SoftChoice, QueryPolicy::new(PolicyKind::MaxRegret)),
        ],
        m: 30,
        metrics: vec![Metric::Alignment, Metric::RelativeReward, Metric::LogLikelihood, Metric::WorstCaseError],
        validation_queries: 5,
        seed: 9,
        sampler: None,
        threads,
        output_dir: dir,
    }
}

fn files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn csv_output_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_benchmark(&small_config(Some(a.path().to_path_buf()), 1)).unwrap();
    run_benchmark(&small_config(Some(b.path().to_path_buf()), 3)).unwrap();
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa, fb);
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for metric in Metric::ALL {
        assert!(names.contains(&format!("{}.csv", metric.label()).as_str()), "{names:?}");
    }

    let text = String::from_utf8(fa.iter().find(|(n, _)| n == "alignment.csv").unwrap().1.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CURVE_HEADER);
    let rows = read_curve_csv(a.path().join("alignment.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 4);
    for (it, arm, mean, _, n) in rows {
        let c = ra.curve(&arm, Metric::Alignment).unwrap();
        assert!((c.mean[it] - mean).abs() < 1e-12);
        assert_eq!(n, 4);
    }
}

#[test]
fn seed_changes_results() {
    let base = run_benchmark(&small_config(None, 1)).unwrap();
    let mut other = small_config(None, 1);
    other.seed = 10;
    let moved = run_benchmark(&other).unwrap();
    assert_ne!(base.runs, moved.runs);
}

/// Precise answers in four dimensions are enough to pin the weights down.
#[test]
fn low_noise_sessions_align_in_four_dimensions() {
    let set = Arc::new(synthetic_env(4, 200, &mut ChaCha8Rng::seed_from_u64(404)).unwrap());
    let arm = ArmSpec::new(FeedbackKind::Scale, QueryPolicy::new(PolicyKind::InfoGain));
    let options = SessionOptions::new(20, 0.05, 100);
    let mut good = 0;
    let mut finals = Vec::new();
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = [0.25, 0.5, 0.75, 1.0][seed as usize % 4];
        let user = SimulatedUser::random(4, alpha, 0.05, 0.1, &mut rng).unwrap();
        let h = run_session(&user, &arm, Arc::clone(&set), &options, &mut rng).unwrap();
        let a = *h.curve(Metric::Alignment).unwrap().last().unwrap();
        finals.push(a);
        if a >= 0.85 {
            good += 1;
        }
    }
    assert!(good >= 40, "{good}/50 sessions reached 0.85: {finals:?}");
}
