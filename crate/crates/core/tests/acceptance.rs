//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Reference values are either closed forms worked out by hand or
//! independent recomputations in this file.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use qmono_core::antisym::{
    antisymmetric_state, chain_from_values, chain_sequence, pigeonhole_index, pigeonhole_threshold,
    verify_marginal_property, AntisymSpec, ChainRecord,
};
use qmono_core::audit::{audit, ConstraintFunction, Verdict};
use qmono_core::experiments::{
    records_to_jsonl, run_er_typical, run_experiment, run_page_entropy, run_subspace_entropy, ExperimentConfig,
    ExperimentKind,
};
use qmono_core::measures::{
    ef_convex_roof_upper, ef_two_qubit, entropy_of_entanglement, er_frank_wolfe_upper, er_overlap_lower, frank_wolfe,
    Estimator, FrankWolfeOptions, Measure, RoofSearch,
};
use qmono_core::product::{max_product_overlap, ProductSearch};
use qmono_core::random::{haar_pure, induced_bipartite};
use qmono_core::state::named;
use qmono_core::{trace_distance, CutSpec, MultipartiteState, SeededSampler};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(value: f64, target: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((value - target).abs() <= tol, || format!("{what} = {value:.9}, expected {target} ± {tol}"))
}

fn budget(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent <= limit, || format!("took {spent:.1?}, budget {limit:?}"))
}

fn ab() -> CutSpec {
    CutSpec::bipartite(vec![0], vec![1])
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn exact_oracles() -> Outcome {
    let start = Instant::now();
    let bell = named::bell::<f64>();
    let rho = bell.density();
    within(entropy_of_entanglement(&bell, &ab()).map_err(err)?.value, 1.0, 1e-9, "E_E(Bell)")?;
    within(ef_two_qubit(&rho).map_err(err)?.value, 1.0, 1e-9, "E_F(Bell)")?;
    let overlap = max_product_overlap(&rho, &ab(), &ProductSearch::default(), &SeededSampler::new(1)).map_err(err)?;
    within(er_overlap_lower(&rho, &ab(), &overlap).map_err(err)?.value, 1.0, 1e-6, "E_R lower(Bell)")?;
    let alpha = antisymmetric_state::<f64>(&AntisymSpec::new(2, 2).map_err(err)?).map_err(err)?;
    let dist = trace_distance(&alpha, &named::singlet::<f64>().density()).map_err(err)?;
    ensure(dist < 1e-12, || format!("antisymmetric(2,2) is {dist:e} from the singlet"))?;
    budget(start, Duration::from_secs(4))?;
    Ok(format!("Bell E_E, E_F, E_R lower = 1; singlet distance {dist:.1e}"))
}

fn wootters_regression() -> Outcome {
    let start = Instant::now();
    let root = SeededSampler::new(2024);
    let search = RoofSearch::default();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..100 {
        let rho = induced_bipartite::<f64>(2, 4, &root.child(t)).map_err(err)?;
        let exact = ef_two_qubit(&rho).map_err(err)?.value;
        let roof = ef_convex_roof_upper(&rho, &ab(), &search, &root.child(1000 + t)).map_err(err)?.value;
        lo = lo.min(roof - exact);
        hi = hi.max(roof - exact);
    }
    ensure(lo >= -1e-6 && hi <= 1e-3, || format!("roof − Wootters ranges over [{lo:e}, {hi:e}]"))?;
    budget(start, Duration::from_secs(60))?;
    Ok(format!("roof − Wootters ∈ [{lo:.1e}, {hi:.1e}] over 100 states in {:.1?}", start.elapsed()))
}

fn three_qubit_monogamy() -> Outcome {
    let cut = CutSpec::tripartite(vec![0], vec![1], vec![2]);
    let tangle = Estimator::new(Measure::Tangle, 3);
    let ghz = audit(&named::ghz::<f64>().density(), &cut, &tangle, &ConstraintFunction::sum()).map_err(err)?;
    ensure(ghz.verdict == Verdict::CertifiedSatisfaction, || format!("GHZ tangle verdict {:?}", ghz.verdict))?;
    within(ghz.slack.unwrap_or(f64::NAN), 1.0, 1e-9, "GHZ tangle slack")?;

    let w = named::w::<f64>().density();
    let w_tangle = audit(&w, &cut, &tangle, &ConstraintFunction::sum()).map_err(err)?;
    within(w_tangle.slack.unwrap_or(f64::NAN), 0.0, 1e-8, "W tangle slack")?;

    let w_ef = audit(&w, &cut, &Estimator::new(Measure::Ef, 3), &ConstraintFunction::sum()).map_err(err)?;
    ensure(w_ef.verdict == Verdict::CertifiedViolation, || format!("W E_F verdict {:?}", w_ef.verdict))?;
    // h(1/3) − 2 h((1 + √(1 − 4/9))/2) from the analytic marginals.
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let expected = h(1.0 / 3.0) - 2.0 * h((1.0 + (5.0f64 / 9.0).sqrt()) / 2.0);
    within(expected, -0.1818, 1e-3, "analytic W slack")?;
    within(w_ef.slack.unwrap_or(f64::NAN), expected, 1e-3, "W E_F slack")?;
    Ok(format!("GHZ slack 1, W tangle slack 0, W E_F violation slack {:.6}", w_ef.slack.unwrap()))
}

fn antisymmetric_marginals() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for d in 2..=4 {
        for n in 1..=d.min(3) {
            let spec = AntisymSpec::new(d, n).map_err(err)?;
            for k in 1..=n {
                let dist: f64 = verify_marginal_property(&spec, k).map_err(err)?;
                ensure(dist < 1e-10, || format!("(d,n,k)=({d},{n},{k}) distance {dist:e}"))?;
                worst = worst.max(dist);
                cases += 1;
            }
        }
    }
    budget(start, Duration::from_secs(30))?;
    Ok(format!("{cases} (d,n,k) cases, worst trace distance {worst:.1e}"))
}

fn page_entropy() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (n, s, target, tol) in [(64, 8, 2.90983, 0.05), (256, 16, 3.95493, 0.03)] {
        let cfg = ExperimentConfig::new(ExperimentKind::PageEntropy, 2000, 500 + n as u64).with_n(n).with_s(s);
        let (summary, _) = run_page_entropy(&cfg).map_err(err)?;
        within(summary.entropy.mean, target, tol, &format!("mean entropy (n,s)=({n},{s})"))?;
        notes.push(format!("({n},{s}) mean {:.5} vs {target}", summary.entropy.mean));
    }
    budget(start, Duration::from_secs(300))?;
    Ok(notes.join("; "))
}

fn subspace_entropy() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(ExperimentKind::SubspaceEntropy, 500, 616).with_d(16).with_s(8).with_samples(200);
    let (summary, _) = run_subspace_entropy(&cfg).map_err(err)?;
    within(summary.min, 3.2787, 0.25, "minimum sampled entropy")?;
    budget(start, Duration::from_secs(600))?;
    Ok(format!("min {:.4}, mean {:.4}, predicted {:.4}", summary.min, summary.mean, summary.predicted))
}

fn er_typical() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(ExperimentKind::ErTypical, 30, 716).with_d(8).with_s(16).with_optimizer(false);
    let (big, _) = run_er_typical(&cfg).map_err(err)?;
    within(big.predicted, 2.18034, 1e-5, "predicted E_R (8,16)")?;
    let (lo, hi) = (big.lower.median - 0.5, big.trivial_upper.median + 0.1);
    ensure(lo <= big.predicted && big.predicted <= hi, || {
        format!("predicted {:.5} outside [{lo:.5}, {hi:.5}]", big.predicted)
    })?;
    let cfg = ExperimentConfig::new(ExperimentKind::ErTypical, 30, 717).with_d(4).with_s(16).with_optimizer(false);
    let (full, _) = run_er_typical(&cfg).map_err(err)?;
    within(full.trivial_upper.median, full.predicted, 0.15, "median trivial upper (4,16)")?;
    budget(start, Duration::from_secs(900))?;
    Ok(format!(
        "(8,16): {:.5} ∈ [{lo:.4}, {hi:.4}]; (4,16): trivial median {:.4} vs {:.4}",
        big.predicted, full.trivial_upper.median, full.predicted
    ))
}

fn separable_mixture(d: usize, count: usize, sampler: &SeededSampler) -> Result<MultipartiteState, String> {
    let mut parts = Vec::new();
    for t in 0..count as u64 {
        let x = haar_pure::<f64>(d, &sampler.child(2 * t)).map_err(err)?;
        let y = haar_pure::<f64>(d, &sampler.child(2 * t + 1)).map_err(err)?;
        parts.push(x.tensor(&y).density());
    }
    let w = 1.0 / count as f64;
    let refs: Vec<(f64, &MultipartiteState)> = parts.iter().map(|s| (w, s)).collect();
    MultipartiteState::mixture(&refs).map_err(err)
}

fn frank_wolfe_soundness() -> Outcome {
    let root = SeededSampler::new(808);
    let options = FrankWolfeOptions::default();
    let mut worst = 0.0f64;
    for t in 0..50 {
        let rho = separable_mixture(3, 2 + (t as usize % 5), &root.child(t))?;
        let run = frank_wolfe(&rho, &ab(), &options, &root.child(1000 + t)).map_err(err)?;
        ensure(run.monotone, || format!("mixture {t}: non-monotone run"))?;
        for w in run.trace.windows(2) {
            ensure(w[1] <= w[0] + 1e-12, || format!("mixture {t}: objective rose {} → {}", w[0], w[1]))?;
        }
        ensure(run.estimate.value <= 0.01, || format!("mixture {t}: E_R upper {}", run.estimate.value))?;
        worst = worst.max(run.estimate.value);
    }
    let bell =
        er_frank_wolfe_upper(&named::bell::<f64>().density(), &ab(), &options, &root.child(9999)).map_err(err)?;
    within(bell.value, 1.0, 0.01, "Frank-Wolfe E_R(Bell)")?;
    Ok(format!("worst separable value {worst:.1e}; Bell {:.5}", bell.value))
}

/// First k whose ratio reaches the threshold, by direct scan.
fn brute_force_index(ratios: &[Option<f64>], c: f64, t: f64) -> Option<usize> {
    let n = ratios.len();
    let threshold = 1.0 - ((t + 1.0) * (n as f64).ln() - c.ln()) / n as f64;
    (0..n).find(|&k| ratios[k].is_some_and(|r| r >= threshold))
}

fn agrees(records: &[ChainRecord], ratios: &[Option<f64>], c: f64, t: f64) -> Result<(), String> {
    let got = pigeonhole_index(records, c, t).ok().map(|p| p.k_bar);
    let want = brute_force_index(ratios, c, t);
    ensure(got == want, || format!("pigeonhole {got:?} vs brute force {want:?} (c={c}, t={t})"))
}

fn value_ratios(values: &[f64]) -> Vec<Option<f64>> {
    values.windows(2).map(|w| Some(w[0] / w[1])).collect()
}

fn chain_and_pigeonhole() -> Outcome {
    let mut notes = Vec::new();
    for measure in [Measure::Ef, Measure::ErBounds] {
        let records = chain_sequence(3, 1, &Estimator::new(measure, 9)).map_err(err)?;
        let (g0, g1) = (records[0].g.point(), records[1].g.point());
        ensure(g0 <= g1 + 1e-6, || format!("{measure}: g0 {g0} > g1 {g1}"))?;
        // Sound ratios bracket from below: certified lower over certified upper.
        let ratios: Vec<Option<f64>> = records
            .windows(2)
            .map(|w| match (w[0].g.is_exact() && w[1].g.is_exact(), w[0].g.lower.is_certified_lower()) {
                (true, _) => Some(g0 / g1),
                (false, true) => Some(w[0].g.lower.value / w[1].g.upper.value),
                (false, false) => Some(w[0].g.point() / w[1].g.point()),
            })
            .collect();
        ensure(records[0].ratio == ratios[0], || {
            format!("{measure}: ratio {:?} vs {:?}", records[0].ratio, ratios[0])
        })?;
        for c in [0.25, 0.5, 1.0, 2.0] {
            for t in [0.0, 1.0] {
                agrees(&records, &ratios, c, t)?;
            }
        }
        notes.push(format!("{measure}: g0 {g0:.4} ≤ g1 {g1:.4}"));
    }

    let constant = chain_from_values(&[1.0; 4]);
    let p = pigeonhole_index(&constant, 1.0, 0.0).map_err(err)?;
    ensure(p.k_bar == 0 && p.ratio == 1.0, || format!("constant sequence gave {p:?}"))?;
    within(p.threshold, pigeonhole_threshold(3, 1.0, 0.0), 0.0, "threshold")?;
    let geometric = [0.001, 0.01, 0.1, 1.0];
    ensure(pigeonhole_index(&chain_from_values(&geometric), 1.0, 0.0).is_err(), || {
        "geometric sequence should be inconclusive".into()
    })?;
    for values in [vec![1.0; 4], geometric.to_vec(), vec![0.2, 0.9, 1.0, 1.0], vec![0.5, 1.0]] {
        let records = chain_from_values(&values);
        for c in [0.1, 1.0, 3.0] {
            for t in [0.0, 0.5, 2.0] {
                agrees(&records, &value_ratios(&values), c, t)?;
            }
        }
    }
    notes.push("constant → k̄=0, geometric → inconclusive, brute-force scan agrees".into());
    Ok(notes.join("; "))
}

fn run_in_pool(threads: usize, cfg: &ExperimentConfig) -> Result<String, String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(err)?;
    let out = pool.install(|| run_experiment(cfg)).map_err(err)?;
    ensure(out.trials == cfg.trials && out.seed == cfg.seed, || "summary lacks trial count or seed".into())?;
    let summary = serde_json::to_string(&out.summary).map_err(err)?;
    Ok(summary + &records_to_jsonl(&out.records).map_err(err)?)
}

fn reproducibility() -> Outcome {
    let configs = [
        ExperimentConfig::new(ExperimentKind::PageEntropy, 64, 11).with_n(64).with_s(8),
        ExperimentConfig::new(ExperimentKind::SubspaceEntropy, 12, 12).with_d(4).with_s(3).with_samples(20),
        ExperimentConfig::new(ExperimentKind::ErTypical, 3, 13).with_d(3).with_s(4),
        ExperimentConfig::new(ExperimentKind::EfTypical, 3, 14).with_d(2).with_s(3).with_samples(20),
        ExperimentConfig::new(ExperimentKind::NonmonoScan, 4, 15).with_d(2).with_s(2),
    ];
    for cfg in &configs {
        let a = run_in_pool(1, cfg)?;
        let b = run_in_pool(4, cfg)?;
        ensure(a == b, || format!("{:?} differs between 1 and 4 worker threads", cfg.kind))?;
        ensure(a == run_in_pool(1, cfg)?, || format!("{:?} differs between identical runs", cfg.kind))?;
    }
    Ok(format!("{} experiment kinds bit-identical across reruns and thread counts", configs.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact oracles", exact_oracles),
        ("Wootters regression", wootters_regression),
        ("three-qubit monogamy", three_qubit_monogamy),
        ("antisymmetric marginals", antisymmetric_marginals),
        ("Page entropy", page_entropy),
        ("subspace entropy", subspace_entropy),
        ("E_R typical value", er_typical),
        ("Frank-Wolfe soundness", frank_wolfe_soundness),
        ("chain and pigeonhole", chain_and_pigeonhole),
        ("reproducibility", reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS [{secs:7.2}s] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL [{secs:7.2}s] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
