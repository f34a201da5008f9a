use pfoco::acceptance::{matrix_completion_config, quadratic_config, run_options};
use pfoco::harness::config::{ExperimentConfig, OneOrMany};
use pfoco::harness::runner::cells;
use pfoco::harness::sweep::run_cells;
use pfoco::metrics::{mean_and_stderr, slope_fit};

/// Seed-mean violation per horizon, with the per-horizon samples.
fn violations(config: &ExperimentConfig) -> Vec<(f64, Vec<f64>)> {
    let outputs = run_cells(config, &cells(config), &run_options()).unwrap();
    config
        .horizons()
        .into_iter()
        .map(|t| {
            let v = outputs
                .iter()
                .filter(|o| o.cell.horizon == t)
                .map(|o| o.summary.violation)
                .collect();
            (t as f64, v)
        })
        .collect()
}

/// Fits the violation slope when the seed mean is positive at every T;
/// a non-positive mean satisfies the one-sided bound outright.
fn violation_slope(per_t: &[(f64, Vec<f64>)]) -> Option<f64> {
    let means: Vec<f64> = per_t.iter().map(|(_, v)| mean_and_stderr(v).0).collect();
    if means.iter().any(|m| *m <= 0.0) {
        return None;
    }
    let ts: Vec<f64> = per_t.iter().map(|(t, _)| *t).collect();
    Some(slope_fit(&ts, &means).unwrap().slope)
}

#[test]
fn blocked_framework_violation_growth() {
    let config = quadratic_config();
    let alpha: f64 = 0.75;
    // β = 0 with a zero-mean constraint: the strong-duality rate is the tighter one.
    let general = (5.0 - 3.0 * alpha) / (6.0 - 4.0 * alpha) + 0.1;
    let strong = (2.0 - alpha) / (3.0 - 2.0 * alpha) + 0.1;
    if let Some(slope) = violation_slope(&violations(&config)) {
        assert!(slope <= strong.min(general), "violation slope {slope}");
    }
}

#[test]
fn pdmfw_violation_growth_and_centring() {
    let mut config = matrix_completion_config();
    config.horizon = OneOrMany::Many(vec![64, 128, 256]);
    let per_t = violations(&config);
    if let Some(slope) = violation_slope(&per_t) {
        assert!(slope <= 0.75 - config.beta / 2.0 + 0.1, "violation slope {slope}");
    }
    for (t, v) in &per_t {
        let (mean, se) = mean_and_stderr(v);
        assert!(mean.abs() <= 6.0 * se, "T={t}: mean violation {mean} with standard error {se}");
    }
}
