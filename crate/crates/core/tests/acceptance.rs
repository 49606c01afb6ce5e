//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::time::Instant;

use handlescope_core::charlstm::{gradient_check, LstmParams};
use handlescope_core::corpus::synth_generate;
use handlescope_core::eval::{chi2_significance, make_folds, positive_metrics, run_cv, Confusion, CvOptions, EvalReport};
use handlescope_core::learners::graph::{affinity, symmetric_normalize};
use handlescope_core::learners::{
    label_prior, spread, AffinityKernel, CoTraining, CoTrainingParams, LaplacianSvm, LaplacianSvmParams, LinearSvm,
    LogisticObjective, SvmParams,
};
use handlescope_core::linalg::Matrix;
use handlescope_core::similarity::{levenshtein_distance, rq1_test, welch_t_test, Alternative, Rq1Options};
use handlescope_core::{corpus::split_dataset, FeatureLayout, FittedModel, LearnerSpec, Model, SynthConfig};
use handlescope_core::{Dataset, Samples};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn naive_levenshtein(a: &[u8], b: &[u8]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let cost = usize::from(a[0] != b[0]);
    (naive_levenshtein(&a[1..], b) + 1)
        .min(naive_levenshtein(a, &b[1..]) + 1)
        .min(naive_levenshtein(&a[1..], &b[1..]) + cost)
}

fn all_strings(alphabet: &[u8], max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                let mut t: Vec<u8> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn levenshtein_exhaustive() -> Outcome {
    let start = Instant::now();
    let strings = all_strings(b"abc", 6);
    let text: Vec<String> = strings.iter().map(|s| String::from_utf8(s.clone()).unwrap()).collect();
    let mut ordered_pairs = 0usize;
    for (i, a) in strings.iter().enumerate() {
        for (j, b) in strings.iter().enumerate() {
            // the oracle is symmetric in cost, checked on the upper triangle
            if j < i {
                continue;
            }
            let want = naive_levenshtein(a, b);
            let got = levenshtein_distance(&text[i], &text[j]);
            if got != want || levenshtein_distance(&text[j], &text[i]) != want {
                return Err(format!("{:?} vs {:?}: dp {got}, oracle {want}", text[i], text[j]));
            }
            ordered_pairs += if i == j { 1 } else { 2 };
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        strings.len() == 1093 && secs < 60.0,
        format!("{} strings, {ordered_pairs} ordered pairs in {secs:.1}s", strings.len()),
        format!("{} strings in {secs:.1}s", strings.len()),
    )
}

fn rq1_calibration() -> Outcome {
    let corpus = synth_generate(&SynthConfig::default(), 0).map_err(|e| e.to_string())?;
    let r = rq1_test(&corpus, &Rq1Options::default()).map_err(|e| e.to_string())?;
    if !(r.reject_h0 && r.p_value < 0.01) {
        return Err(format!("default corpus: t {:.3}, p {:.3e}", r.t_statistic, r.p_value));
    }
    let uniform = SynthConfig {
        similarity_bias: 0.0,
        ..SynthConfig::default()
    };
    let mut rejections = 0;
    for seed in 0..100 {
        let c = synth_generate(&uniform, seed).map_err(|e| e.to_string())?;
        if rq1_test(&c, &Rq1Options::default()).map_err(|e| e.to_string())?.reject_h0 {
            rejections += 1;
        }
    }
    check(
        rejections <= 5,
        format!("default t {:.1}, p {:.1e}; uniform rejections {rejections}/100", r.t_statistic, r.p_value),
        format!("uniform rejections {rejections}/100"),
    )
}

fn welch_fixtures() -> Outcome {
    let x = [1.0, 2.0, 3.0, 4.0];
    let null = welch_t_test(&x, &x, Alternative::Greater, 0.01).map_err(|e| e.to_string())?;
    let r = welch_t_test(&[2.0, 2.0, 2.0, 3.0], &[1.0, 1.0, 1.0, 2.0], Alternative::Greater, 0.01)
        .map_err(|e| e.to_string())?;
    let t = 8f64.sqrt();
    let xx = t / (t * t + 6.0).sqrt();
    let u = 1.0 - xx * xx;
    let p = 0.5 - xx / 2.0 * (1.0 + u / 2.0 + 3.0 * u * u / 8.0);
    let ok = null.t_statistic == 0.0
        && (null.p_value - 0.5).abs() < 1e-12
        && (r.t_statistic - t).abs() < 1e-12
        && (r.degrees_of_freedom - 6.0).abs() < 1e-12
        && (r.p_value - p).abs() < 1e-12;
    check(
        ok,
        format!("t {:.6}, df {}, p {:.6}", r.t_statistic, r.degrees_of_freedom, r.p_value),
        format!("null ({}, {}), fixture ({}, {}, {})", null.t_statistic, null.p_value, r.t_statistic, r.degrees_of_freedom, r.p_value),
    )
}

fn label_spreading_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_vec(20, 2, (0..40).map(|_| rng.random_range(0.0..1.0)).collect());
        let s = symmetric_normalize(&affinity(&x, AffinityKernel::Rbf { gamma: 2.0 }));
        let labels: Vec<i8> = (0..6).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let y = label_prior(&labels, 14);
        let it = spread(&s, &y, 0.8, 1e-12, 100_000);
        let dense = s.to_dense();
        let a = DMatrix::from_fn(20, 20, |i, j| f64::from(u8::from(i == j)) - 0.8 * dense.get(i, j));
        let lu = a.lu();
        for c in 0..2 {
            let b = DVector::from_iterator(20, y.column(c).into_iter().map(|v| 0.2 * v));
            let sol = lu.solve(&b).ok_or("singular system")?;
            for i in 0..20 {
                worst = worst.max((it.f.get(i, c) - sol[i]).abs());
            }
        }
    }
    check(worst < 1e-5, format!("max deviation {worst:.2e}"), format!("max deviation {worst:.2e}"))
}

fn gradient_checks() -> Outcome {
    let mut lstm_worst = 0.0f64;
    for draw in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(draw);
        let p = LstmParams::init(38, 16, 30, 0.5, &mut rng);
        let inputs: Vec<usize> = (0..10).map(|_| rng.random_range(0..38)).collect();
        let target = (draw % 2) as f64;
        for e in gradient_check(&p, &inputs, target, 1e-3) {
            lstm_worst = lstm_worst.max(e);
        }
    }
    let mut lr_worst = 0.0f64;
    for draw in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + draw);
        let x = Matrix::from_vec(15, 4, (0..60).map(|_| rng.random_range(-2.0..2.0)).collect());
        let y: Vec<i8> = (0..15).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let obj = LogisticObjective { x: &x, y: &y, c: 1.3 };
        let theta: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = obj.gradient(&theta);
        for k in 0..5 {
            let h = 1e-5;
            let mut up = theta.clone();
            up[k] += h;
            let mut down = theta.clone();
            down[k] -= h;
            let numeric = (obj.value(&up) - obj.value(&down)) / (2.0 * h);
            let rel = (g[k] - numeric).abs() / g[k].abs().max(numeric.abs()).max(1e-8);
            lr_worst = lr_worst.max(rel);
        }
    }
    check(
        lstm_worst < 1e-4 && lr_worst < 1e-6,
        format!("lstm {lstm_worst:.2e}, logreg {lr_worst:.2e}"),
        format!("lstm {lstm_worst:.2e}, logreg {lr_worst:.2e}"),
    )
}

fn handle5_data(seed: u64) -> Result<Dataset, String> {
    let corpus = synth_generate(&SynthConfig::default(), seed).map_err(|e| e.to_string())?;
    split_dataset(&corpus, FeatureLayout::Handle5).map_err(|e| e.to_string())
}

fn cv_reports(data: &Dataset, names: &[&str], seed: u64) -> Result<EvalReport, String> {
    let plan = make_folds(&data.labels, 10, seed).map_err(|e| e.to_string())?;
    let opts = CvOptions { standardize: true, seed };
    let mut reports = Vec::new();
    for name in names {
        let spec = LearnerSpec::from_name(name).map_err(|e| e.to_string())?.with_seed(seed);
        reports.push(run_cv(data, &spec, &plan, opts));
    }
    Ok(EvalReport::new(data, &plan, opts.standardize, reports))
}

fn cv_quality() -> Outcome {
    let data = handle5_data(0)?;
    let report = cv_reports(&data, &["svm", "label-spreading-rbf", "char-lstm"], 0)?;
    let f1: Vec<f64> = report.learners.iter().map(|r| r.mean_f1().unwrap_or(0.0)).collect();
    let line = format!("svm {:.3}, label-spreading-rbf {:.3}, char-lstm {:.3}", f1[0], f1[1], f1[2]);
    check(f1.iter().all(|&f| f >= 0.80) && f1[1] >= f1[0] - 0.05, line.clone(), line)
}

fn metric_identities() -> Outcome {
    let mut cases = 0;
    for tp in 0..=5usize {
        for fp in 0..=5usize {
            for fn_ in 0..=5usize {
                for tn in 0..=5usize {
                    let mut truth = Vec::new();
                    let mut pred = Vec::new();
                    for (n, t, p) in [(tp, 1, 1), (fp, -1, 1), (fn_, 1, -1), (tn, -1, -1)] {
                        truth.extend(std::iter::repeat_n(t, n));
                        pred.extend(std::iter::repeat_n(p, n));
                    }
                    let c = Confusion { tp, fp, fn_, tn };
                    let m = c.metrics();
                    if !truth.is_empty() {
                        let via_labels = positive_metrics(&truth, &pred).map_err(|e| e.to_string())?;
                        if via_labels != m {
                            return Err(format!("{c:?}: label path disagrees"));
                        }
                    }
                    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
                    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
                    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
                    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
                    if !(close(m.precision, precision) && close(m.recall, recall) && close(m.f1, f1) && m.confusion == c) {
                        return Err(format!("{c:?}: got {m:?}"));
                    }
                    if m.f1 > m.precision.max(m.recall) + 1e-12 || m.f1 < m.precision.min(m.recall) - 1e-12 {
                        return Err(format!("{c:?}: f1 outside [min, max]"));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} confusion matrices"))
}

fn chi2_fixtures() -> Outcome {
    let names: Vec<String> = vec!["f0".into(), "f1".into()];
    let x = Matrix::from_rows(&[[1.0, 3.0], [1.0, 3.0], [0.0, 3.0], [0.0, 3.0]], 2);
    let t = chi2_significance(&x, &[1, 1, -1, -1], &names).map_err(|e| e.to_string())?;
    if t.get("f0") != Some(2.0) || t.get("f1") != Some(0.0) {
        return Err(format!("hand fixture: {:?} {:?}", t.get("f0"), t.get("f1")));
    }
    let same = Matrix::from_rows(&[[1.0, 4.0], [2.0, 0.0], [1.0, 4.0], [2.0, 0.0]], 2);
    let t = chi2_significance(&same, &[1, 1, -1, -1], &names).map_err(|e| e.to_string())?;
    if t.get("f0") != Some(0.0) || t.get("f1") != Some(0.0) {
        return Err(format!("identical classes: {:?} {:?}", t.get("f0"), t.get("f1")));
    }
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_vec(30, 2, (0..60).map(|_| rng.random_range(0.0..20.0)).collect());
        let y: Vec<i8> = (0..30).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let one = chi2_significance(&x, &y, &names).map_err(|e| e.to_string())?;
        let yy: Vec<i8> = y.iter().chain(&y).copied().collect();
        let two = chi2_significance(&x.vstack(&x), &yy, &names).map_err(|e| e.to_string())?;
        for r in &one.rows {
            if two.get(&r.feature) != Some(2.0 * r.statistic) {
                return Err(format!("seed {seed} {}: {} vs {:?}", r.feature, r.statistic, two.get(&r.feature)));
            }
        }
    }
    Ok("hand fixture 2.0, identical classes 0.0, doubling exact on 50 draws".into())
}

fn determinism() -> Outcome {
    let a = synth_generate(&SynthConfig::default(), 9).map_err(|e| e.to_string())?.to_jsonl_string();
    let b = synth_generate(&SynthConfig::default(), 9).map_err(|e| e.to_string())?.to_jsonl_string();
    if a != b {
        return Err("synth output differs".into());
    }
    let small = SynthConfig {
        n_unlabeled: 300,
        ..SynthConfig::default()
    };
    let corpus = synth_generate(&small, 9).map_err(|e| e.to_string())?;
    let data = split_dataset(&corpus, FeatureLayout::Handle5).map_err(|e| e.to_string())?;
    let learners = ["svm", "random-forest", "label-spreading-knn", "co-training"];
    let r1 = cv_reports(&data, &learners, 3)?.to_json().map_err(|e| e.to_string())?;
    let r2 = cv_reports(&data, &learners, 3)?.to_json().map_err(|e| e.to_string())?;
    if r1 != r2 {
        return Err("cv report differs".into());
    }
    for name in ["random-forest", "char-lstm", "laplacian-svm"] {
        let mut spec = LearnerSpec::from_name(name).map_err(|e| e.to_string())?.with_seed(5);
        if name == "char-lstm" {
            spec = spec
                .with_overrides(&toml::from_str("epochs = 3").map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        }
        let m1 = FittedModel::fit(&spec, &data, true).map_err(|e| e.to_string())?.to_json().map_err(|e| e.to_string())?;
        let m2 = FittedModel::fit(&spec, &data, true).map_err(|e| e.to_string())?.to_json().map_err(|e| e.to_string())?;
        if m1 != m2 {
            return Err(format!("{name} checkpoint differs"));
        }
    }
    Ok("synth, cv report and checkpoints are byte-identical".into())
}

fn bands(seed: u64) -> (Dataset, Samples) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<[f64; 2]> = (0..200)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            [rng.random_range(-6.0..6.0), s + rng.random_range(-0.1..0.1)]
        })
        .collect();
    let unlabeled = Samples::from_features(Matrix::from_rows(&rows, 2));
    let labeled = Samples::from_features(Matrix::from_rows(&[[-5.0, 1.0], [5.0, -1.0], [-4.0, 0.8], [4.0, -0.8]], 2));
    let data = Dataset::new(FeatureLayout::Handle5, labeled, vec![1, -1, 1, -1], unlabeled.clone());
    (data, unlabeled)
}

fn semi_supervised_reductions() -> Outcome {
    let mut worst_agreement = 1.0f64;
    for seed in 0..5 {
        let (data, pool) = bands(seed);
        let mut lap = LaplacianSvm::new(LaplacianSvmParams { c_s: 0.0, ..Default::default() });
        lap.fit(&data).map_err(|e| e.to_string())?;
        let mut svm = LinearSvm::new(SvmParams { c: 0.6, ..Default::default() });
        svm.fit(&data.labeled_only()).map_err(|e| e.to_string())?;
        let a = lap.predict(&pool).map_err(|e| e.to_string())?;
        let b = svm.predict(&pool).map_err(|e| e.to_string())?;
        let agree = a.iter().zip(&b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64;
        worst_agreement = worst_agreement.min(agree);
    }

    let data = handle5_data(2)?;
    let (va, vb) = FeatureLayout::Handle5.cotraining_views();
    let mut ct = CoTraining::new(CoTrainingParams { rounds: 0, ..Default::default() });
    ct.fit(&data).map_err(|e| e.to_string())?;
    let (da, db) = ct.view_decisions(&data.unlabeled).map_err(|e| e.to_string())?;
    let per_view = |cols: &[usize]| -> Result<Vec<f64>, String> {
        let mut svm = LinearSvm::new(SvmParams::default());
        svm.fit(&Dataset::supervised(data.labeled.features.select_cols(cols), data.labels.clone()))
            .map_err(|e| e.to_string())?;
        svm.decision(&Samples::from_features(data.unlabeled.features.select_cols(cols)))
            .map_err(|e| e.to_string())
    };
    let exact = da == per_view(&va)? && db == per_view(&vb)?;
    check(
        worst_agreement >= 0.99 && exact,
        format!("laplacian agreement {:.3}, co-training round 0 exact", worst_agreement),
        format!("laplacian agreement {:.3}, co-training exact {exact}", worst_agreement),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("levenshtein matches the recursive oracle", levenshtein_exhaustive),
        ("similarity test separates clustered and uniform corpora", rq1_calibration),
        ("welch t-test fixtures", welch_fixtures),
        ("label spreading reaches the closed form", label_spreading_closed_form),
        ("analytic gradients match finite differences", gradient_checks),
        ("cross-validated f1 on handle features", cv_quality),
        ("metric identities", metric_identities),
        ("chi-squared fixtures and row doubling", chi2_fixtures),
        ("seeded runs are reproducible", determinism),
        ("semi-supervised learners reduce to their base cases", semi_supervised_reductions),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
