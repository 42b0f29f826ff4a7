//! Experiment drivers against independent Monte Carlo and closed-form references.

use qmono_core::experiments::{
    run_ef_typical, run_er_typical, run_nonmono_scan, run_page_entropy, run_result1_construction, ExperimentConfig,
    ExperimentKind, Stats,
};
use qmono_core::measures::{entropy_of_entanglement, BoundKind};
use qmono_core::random::haar_pure_on;
use qmono_core::{CutSpec, SeededSampler};

/// Exact mean entropy (bits) of a Haar-random pure state on C^m ⊗ C^n, m ≤ n.
fn exact_page(m: usize, n: usize) -> f64 {
    let harmonic: f64 = (n + 1..=m * n).map(|k| 1.0 / k as f64).sum();
    (harmonic - (m - 1) as f64 / (2 * n) as f64) / std::f64::consts::LN_2
}

#[test]
fn ef_of_pure_two_qubit_states_matches_entropy_monte_carlo() {
    let cfg = ExperimentConfig::new(ExperimentKind::EfTypical, 600, 21).with_d(2).with_s(1);
    let (summary, records) = run_ef_typical(&cfg).unwrap();
    assert!(records.iter().all(|r| r.kinds["roof_upper"] == BoundKind::Exact));
    let mean = summary.roof_upper.unwrap().mean;

    let root = SeededSampler::new(9_021);
    let cut = CutSpec::bipartite(vec![0], vec![1]);
    let reference: Vec<f64> = (0..600)
        .map(|t| {
            entropy_of_entanglement(&haar_pure_on::<f64>(vec![2, 2], &root.child(t)).unwrap(), &cut).unwrap().value
        })
        .collect();
    let reference = Stats::of(&reference);
    let tol = 4.0 * (reference.stdev / 600f64.sqrt()) * 2f64.sqrt();
    assert!((mean - reference.mean).abs() < tol, "{mean} vs {}", reference.mean);
    assert!((mean - exact_page(2, 2)).abs() < tol, "{mean} vs {}", exact_page(2, 2));
}

#[test]
fn ef_roof_tracks_the_typical_value_and_respects_the_ceiling() {
    let cfg = ExperimentConfig::new(ExperimentKind::EfTypical, 50, 22).with_d(8).with_s(3).with_samples(200);
    let (summary, records) = run_ef_typical(&cfg).unwrap();
    let roof = summary.roof_upper.unwrap();
    assert!((roof.median - summary.predicted).abs() < 0.35, "median {} vs {}", roof.median, summary.predicted);
    assert!(roof.max <= 3.0 + 1e-12);
    for r in &records {
        // A sampled support state can only overshoot the true support minimum,
        // which in turn cannot exceed the roof value; allow sampling slack.
        assert!(r.get("support_lower").unwrap() <= r.get("roof_upper").unwrap() + 0.05);
    }
}

#[test]
fn page_mean_agrees_with_exact_formula_at_small_size() {
    let cfg = ExperimentConfig::new(ExperimentKind::PageEntropy, 3000, 23).with_n(6).with_s(3);
    let (summary, _) = run_page_entropy(&cfg).unwrap();
    let se = summary.entropy.stdev / 3000f64.sqrt();
    assert!(
        (summary.entropy.mean - exact_page(3, 6)).abs() < 4.0 * se,
        "{} vs {}",
        summary.entropy.mean,
        exact_page(3, 6)
    );
}

#[test]
fn sandwich_holds_on_every_trial() {
    let cfg = ExperimentConfig::new(ExperimentKind::ErTypical, 6, 24).with_d(3).with_s(5).with_optimizer(true);
    let (summary, records) = run_er_typical(&cfg).unwrap();
    assert_eq!(summary.sandwich_ok, 6);
    for r in &records {
        let (lo, fw, hi) = (r.get("lower").unwrap(), r.get("fw_upper").unwrap(), r.get("trivial_upper").unwrap());
        assert!(lo <= fw + 1e-6 && fw <= hi + 1e-9, "{lo} {fw} {hi}");
    }
}

#[test]
fn entropy_fluctuations_shrink_with_dimension() {
    for repeat in 0..3u64 {
        let variances: Vec<f64> = [2usize, 4, 8]
            .iter()
            .map(|&d| {
                let cfg = ExperimentConfig::new(ExperimentKind::PageEntropy, 400, 100 * repeat + d as u64)
                    .with_n(d * d)
                    .with_s(d);
                let sd = run_page_entropy(&cfg).unwrap().0.entropy.stdev;
                sd * sd
            })
            .collect();
        assert!(variances.windows(2).all(|w| w[1] <= w[0]), "repeat {repeat}: {variances:?}");
    }
}

#[test]
fn result1_ratios_trend_upward() {
    let cfg = ExperimentConfig::new(ExperimentKind::Result1Construction, 100, 25);
    let (summary, records) = run_result1_construction(&cfg).unwrap();
    assert!(summary.trend_up);
    let (first, last) = (&summary.rows[0], summary.rows.last().unwrap());
    assert_eq!((first.d, first.s), (2, 1));
    assert_eq!((last.d, last.s), (8, 3));
    assert!(last.ratio_ab.median >= first.ratio_ab.median);
    assert!(last.ratio_ac.median >= first.ratio_ac.median);
    for r in &records {
        let upper = r.get("e_abc_upper").unwrap();
        assert!(r.get("e_ab").unwrap() <= upper + 1e-12 && r.get("e_ac").unwrap() <= upper + 1e-12);
    }
}

#[test]
fn nonmonogamy_scan_summary_accounts_for_every_trial() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::NonmonoScan, 8, 26).with_d(2).with_s(1);
    cfg.measure = Some(qmono_core::measures::Measure::Tangle);
    let (summary, records) = run_nonmono_scan(&cfg).unwrap();
    let scan = &summary.scan;
    assert_eq!(scan.trials, 8);
    assert_eq!(scan.violations + scan.satisfactions + scan.inconclusive, 8);
    assert_eq!(records.len(), 8);
    // Pure three-qubit states obey CKW for the tangle, and every value is exact.
    assert_eq!(scan.satisfactions, 8);
    assert!(records.iter().all(|r| r.get("slack").unwrap() >= -1e-9));
}
