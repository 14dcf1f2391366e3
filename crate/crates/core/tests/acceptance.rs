//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Dataset-dependent criteria run only when `INFODEMIC_REAL_DATA` names a
//! directory holding `dataset1.csv`, `dataset2.csv`, `fasttext.vec` and
//! `constraint_{train,val,test}.csv`; otherwise they are reported as skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use infodemic_core::corpus::{load_dataset, split, DatasetSchema, SplitSpec, Verdict};
use infodemic_core::evaluate::f1_from;
use infodemic_core::learn::bayes::MultinomialNb;
use infodemic_core::learn::mlp::Mlp;
use infodemic_core::learn::svm::{solve_dual, KernelFn};
use infodemic_core::learn::tree::{DecisionTree, RandomForest};
use infodemic_core::learn::{
    grid_search, threshold, ForestConfig, Kernel, Learner, Matrix, MaxFeatures, MlpConfig, ModelConfig, ModelKind,
    ParamGrid, TreeConfig,
};
use infodemic_core::pipeline::{run, RunManifest};
use infodemic_core::simclass::{
    classify_vector, cosine, euclidean, tune_k, Metric, ReferenceIndex, SimilarityConfig, TieRule,
};
use infodemic_core::textprep::{preprocess, PrepConfig};
use infodemic_core::vectorize::{EmbeddingTable, TfidfModel};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

// ---------------------------------------------------------------- preprocessing

fn golden_preprocessing() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/preprocess_golden.tsv");
    let text = std::fs::read_to_string(path).expect("golden fixture");
    let prep = PrepConfig::default();
    let mut mismatches = Vec::new();
    let mut pairs = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let (raw, want) = line.split_once('\t').expect("raw<TAB>expected");
        pairs += 1;
        let got = preprocess(raw, &prep);
        if got != want {
            mismatches.push(format!("{raw:?}: got {got:?}, want {want:?}"));
        }
    }
    let raw = text.lines().nth(1).unwrap().split_once('\t').unwrap().0;
    let _ = preprocess(raw, &prep);
    let reps = 1000;
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(preprocess(std::hint::black_box(raw), &prep));
    }
    let per_call = start.elapsed() / reps;
    let fast = per_call < Duration::from_millis(1);
    let detail = format!("{pairs} pairs, {} mismatched, {per_call:?} per call", mismatches.len());
    if mismatches.is_empty() && fast {
        Pass(detail)
    } else {
        Fail(format!("{detail}; {}", mismatches.join("; ")))
    }
}

// ---------------------------------------------------------------- metrics

fn metric_identity() -> Outcome {
    let a = format!("{:.4}", f1_from(0.8652, 0.9095));
    let b = format!("{:.4}", f1_from(0.9482, 0.9554));
    check(a == "0.8868" && b == "0.9518", format!("F1(0.8652, 0.9095) = {a}, F1(0.9482, 0.9554) = {b}"))
}

// ---------------------------------------------------------------- similarity

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (DVector::from_column_slice(a), DVector::from_column_slice(b));
    a.dot(&b) / (a.norm() * b.norm())
}

fn oracle_euclidean(a: &[f64], b: &[f64]) -> f64 {
    (DVector::from_column_slice(a) - DVector::from_column_slice(b)).norm()
}

/// Scores every item, then picks the K best by repeated selection.
fn oracle_classify(query: &[f64], refs: &[(Vec<f64>, bool)], k: usize, metric: Metric) -> (f64, Vec<usize>) {
    let q_zero = query.iter().all(|v| *v == 0.0);
    let scores: Vec<f64> = refs
        .iter()
        .map(|(v, _)| match metric {
            Metric::Cosine if q_zero || v.iter().all(|x| *x == 0.0) => 0.0,
            Metric::Cosine => oracle_cosine(query, v),
            Metric::Euclidean => oracle_euclidean(query, v),
        })
        .collect();
    let mut taken = vec![false; refs.len()];
    let mut chosen = Vec::new();
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for i in 0..refs.len() {
            if taken[i] {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => match metric {
                    Metric::Cosine => scores[i] > scores[b],
                    Metric::Euclidean => scores[i] < scores[b],
                },
            };
            if better {
                best = Some(i);
            }
        }
        let b = best.unwrap();
        taken[b] = true;
        chosen.push(b);
    }
    let weight = |i: usize| match metric {
        Metric::Cosine => scores[i].max(0.0),
        Metric::Euclidean => 1.0 / (1.0 + scores[i]),
    };
    let total: f64 = chosen.iter().map(|&i| weight(i)).sum();
    let score = if (q_zero && metric == Metric::Cosine) || total <= 0.0 {
        chosen.iter().filter(|&&i| refs[i].1).count() as f64 / k as f64
    } else {
        chosen.iter().filter(|&&i| refs[i].1).map(|&i| weight(i)).sum::<f64>() / total
    };
    (score, chosen)
}

fn similarity_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=64);
        let (a, b) = (random_vec(&mut rng, dim), random_vec(&mut rng, dim));
        worst = worst.max((cosine(&a, &b).unwrap() - oracle_cosine(&a, &b)).abs());
        worst = worst.max((euclidean(&a, &b).unwrap() - oracle_euclidean(&a, &b)).abs());
    }
    if worst > 1e-9 {
        return Fail(format!("pairwise metric error {worst:.3e}"));
    }

    let mut cases = 0;
    for trial in 0..30 {
        let n = rng.gen_range(5..=200);
        let dim = rng.gen_range(2..=12);
        let refs: Vec<(Vec<f64>, bool)> = (0..n)
            .map(|i| {
                let v = if trial % 5 == 0 && i % 17 == 0 { vec![0.0; dim] } else { random_vec(&mut rng, dim) };
                (v, rng.gen_bool(0.5))
            })
            .collect();
        let mut index = ReferenceIndex::new(dim);
        for (i, (v, y)) in refs.iter().enumerate() {
            index.push(v.clone(), Verdict::from_positive(*y), format!("r{i}"), "").unwrap();
        }
        for q in 0..10 {
            let query = if q == 0 && trial % 3 == 0 { vec![0.0; dim] } else { random_vec(&mut rng, dim) };
            for metric in [Metric::Cosine, Metric::Euclidean] {
                for k in [1, 3, 5] {
                    if k > n {
                        continue;
                    }
                    cases += 1;
                    let cfg = SimilarityConfig { metric, k, tie_rule: TieRule::MisinformativeOnTie };
                    let got = classify_vector(&query, &index, &cfg).unwrap();
                    let (score, chosen) = oracle_classify(&query, &refs, k, metric);
                    let got_idx: Vec<usize> = got.neighbors.iter().map(|n| n.index).collect();
                    if got_idx != chosen
                        || (got.score - score).abs() > 1e-9
                        || got.verdict != Verdict::from_positive(score >= 0.5)
                    {
                        return Fail(format!(
                            "classify mismatch (n={n}, k={k}, {metric:?}): {got_idx:?} vs {chosen:?}, {} vs {score}",
                            got.score
                        ));
                    }
                }
            }
        }
    }

    let n = 60;
    let dim = 6;
    let mut index = ReferenceIndex::new(dim);
    let refs: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut rng, dim)).collect();
    for (i, v) in refs.iter().enumerate() {
        index.push(v.clone(), Verdict::from_positive(rng.gen_bool(0.5)), format!("r{i}"), "").unwrap();
    }
    let cfg = SimilarityConfig { metric: Metric::Cosine, k: 5, tie_rule: TieRule::MisinformativeOnTie };
    let queries: Vec<Vec<f64>> = (0..20).map(|_| random_vec(&mut rng, dim)).collect();
    let base: Vec<Verdict> = queries.iter().map(|q| classify_vector(q, &index, &cfg).unwrap().verdict).collect();
    for _ in 0..10 {
        let mut scaled = index.clone();
        for e in &mut scaled.entries {
            let s = rng.gen_range(0.01..100.0);
            e.vector.iter_mut().for_each(|v| *v *= s);
        }
        let qs = rng.gen_range(0.01..100.0);
        for (q, want) in queries.iter().zip(&base) {
            let q: Vec<f64> = q.iter().map(|v| v * qs).collect();
            if classify_vector(&q, &scaled, &cfg).unwrap().verdict != *want {
                return Fail("cosine verdict changed under positive scaling".into());
            }
        }
    }
    Pass(format!("1000 pairs max error {worst:.1e}; {cases} classify cases; 10 scalings x 20 queries"))
}

// ---------------------------------------------------------------- learners

fn nb_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut queries = 0;
    for trial in 0..20 {
        let v = 2 + trial % 4;
        let n = rng.gen_range(4..12);
        let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..v).map(|_| rng.gen_range(0..4) as f64).collect()).collect();
        let mut y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        rows[0][0] += 1.0;
        y.rotate_left(rng.gen_range(0..n));
        let alpha = [1.0, 0.5, 0.1][trial % 3];
        let model = MultinomialNb::fit(&Matrix::dense(&rows).unwrap(), &y, alpha).map_err(|e| e.to_string())?;

        let mut prior = [0.0; 2];
        let mut counts = [vec![0.0; v], vec![0.0; v]];
        for (r, &c) in rows.iter().zip(&y) {
            prior[c as usize] += 1.0;
            for j in 0..v {
                counts[c as usize][j] += r[j];
            }
        }
        let cond: Vec<Vec<f64>> = counts
            .iter()
            .map(|cnt| {
                let total: f64 = cnt.iter().sum::<f64>() + alpha * v as f64;
                cnt.iter().map(|c| (c + alpha) / total).collect()
            })
            .collect();
        // every document of at most four tokens over the vocabulary
        let mut docs = vec![vec![0usize; v]];
        let mut frontier = docs.clone();
        for _ in 0..4 {
            let mut next = Vec::new();
            for d in &frontier {
                let start = d.iter().rposition(|&c| c > 0).unwrap_or(0);
                for j in start..v {
                    let mut e = d.clone();
                    e[j] += 1;
                    next.push(e);
                }
            }
            docs.extend(next.iter().cloned());
            frontier = next;
        }
        let xq: Vec<Vec<f64>> = docs.iter().map(|d| d.iter().map(|&c| c as f64).collect()).collect();
        let got = model.predict_proba(&Matrix::dense(&xq).unwrap());
        for (d, p) in docs.iter().zip(got) {
            let joint = |c: usize| {
                let mut prod = prior[c] / n as f64;
                for j in 0..v {
                    for _ in 0..d[j] {
                        prod *= cond[c][j];
                    }
                }
                prod
            };
            let want = joint(1) / (joint(0) + joint(1));
            worst = worst.max((p - want).abs());
            queries += 1;
        }
    }
    if worst <= 1e-12 {
        Ok(format!("NB {queries} documents max error {worst:.1e}"))
    } else {
        Err(format!("NB max error {worst:.3e}"))
    }
}

fn kernel_value(kernel: Kernel, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    match kernel {
        Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Kernel::Rbf => (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp(),
    }
}

/// Maximizes the dual by solving the stationarity system on every face of the box.
fn qp_oracle(q: &DMatrix<f64>, y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let dual = |a: &DVector<f64>| a.sum() - 0.5 * a.dot(&(q * a));
    let mut best = f64::NEG_INFINITY;
    let mut state = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha = DVector::from_fn(n, |i, _| if state[i] == 1 { c } else { 0.0 });
        let fixed_sum: f64 = (0..n).map(|i| y[i] * alpha[i]).sum();
        let feasible = if free.is_empty() {
            fixed_sum.abs() < 1e-12
        } else {
            let m = free.len();
            let mut kkt = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    kkt[(r, s)] = q[(i, j)];
                }
                kkt[(r, m)] = y[i];
                kkt[(m, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|j| state[*j] == 1).map(|j| q[(i, j)] * c).sum::<f64>();
            }
            rhs[m] = -fixed_sum;
            match kkt.lu().solve(&rhs) {
                Some(sol) => {
                    for (r, &i) in free.iter().enumerate() {
                        alpha[i] = sol[r];
                    }
                    free.iter().all(|&i| alpha[i] >= -1e-12 && alpha[i] <= c + 1e-12)
                }
                None => false,
            }
        };
        if feasible {
            best = best.max(dual(&alpha));
        }
        let mut k = 0;
        while k < n && state[k] == 2 {
            state[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
        state[k] += 1;
    }
    best
}

fn svm_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let setups = [(Kernel::Rbf, 2, 10, 1.0), (Kernel::Rbf, 3, 12, 5.0), (Kernel::Linear, 12, 10, 0.5), (Kernel::Rbf, 2, 8, 100.0)];
    for (t, &(kernel, dim, n, c)) in setups.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<bool> = (0..n).map(|i| (i + t) % 2 == 0 || rng.gen_bool(0.2)).collect();
        let ys: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        let gamma = 0.5;
        let q = DMatrix::from_fn(n, n, |i, j| ys[i] * ys[j] * kernel_value(kernel, gamma, &rows[i], &rows[j]));
        let want = qp_oracle(&q, &ys, c);
        let sol = solve_dual(&Matrix::dense(&rows).unwrap(), &y, KernelFn { kernel, gamma }, c, 1e-3, 1_000_000);
        let a = DVector::from_vec(sol.alpha.clone());
        if a.iter().any(|v| *v < -1e-9 || *v > c + 1e-9) || a.iter().zip(&ys).map(|(a, y)| a * y).sum::<f64>().abs() > 1e-8 {
            return Err("SMO returned an infeasible alpha".into());
        }
        let got = a.sum() - 0.5 * a.dot(&(&q * &a));
        worst = worst.max((got - want).abs());
    }
    if worst <= 1e-3 {
        Ok(format!("SVM dual gap {worst:.1e} over {} problems of <=12 points", setups.len()))
    } else {
        Err(format!("SVM dual gap {worst:.3e}"))
    }
}

/// Exhaustive best-split search, recursing until leaves are pure or unsplittable.
fn tree_oracle(points: &[(f64, bool)], query: f64) -> f64 {
    let n = points.len() as f64;
    let pos = points.iter().filter(|p| p.1).count() as f64;
    let gini = |n: f64, p: f64| if n == 0.0 { 0.0 } else { 1.0 - (p / n).powi(2) - (1.0 - p / n).powi(2) };
    if gini(n, pos) <= 1e-12 {
        return pos / n;
    }
    let mut values: Vec<f64> = points.iter().map(|p| p.0).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut best: Option<(f64, f64)> = None;
    for w in values.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        let (l, r): (Vec<&(f64, bool)>, Vec<&(f64, bool)>) = points.iter().partition(|p| p.0 <= t);
        let lp = l.iter().filter(|p| p.1).count() as f64;
        let rp = r.iter().filter(|p| p.1).count() as f64;
        let child = (l.len() as f64 * gini(l.len() as f64, lp) + r.len() as f64 * gini(r.len() as f64, rp)) / n;
        if best.map_or(true, |(_, b)| child < b - 1e-12) {
            best = Some((t, child));
        }
    }
    match best {
        None => pos / n,
        Some((t, _)) => {
            let side: Vec<(f64, bool)> = points.iter().copied().filter(|p| (p.0 <= t) == (query <= t)).collect();
            tree_oracle(&side, query)
        }
    }
}

fn dt_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for _ in 0..300 {
        let n = rng.gen_range(2..=10);
        let pts: Vec<(f64, bool)> = (0..n).map(|_| (rng.gen_range(0..6) as f64, rng.gen_bool(0.5))).collect();
        let x = Matrix::dense(&pts.iter().map(|p| vec![p.0]).collect::<Vec<_>>()).unwrap();
        let y: Vec<bool> = pts.iter().map(|p| p.1).collect();
        let tree = DecisionTree::fit(&x, &y, &TreeConfig::default(), 0).map_err(|e| e.to_string())?;
        let grid: Vec<Vec<f64>> = (-2..=14).map(|k| vec![k as f64 * 0.5]).collect();
        let got = tree.predict_proba(&Matrix::dense(&grid).unwrap());
        for (q, p) in grid.iter().zip(got) {
            let want = tree_oracle(&pts, q[0]);
            if (p - want).abs() > 1e-12 {
                return Err(format!("DT differs at {} on {pts:?}: {p} vs {want}", q[0]));
            }
            checked += 1;
        }
    }
    Ok(format!("DT {checked} queries over 300 datasets"))
}

fn mlp_gradient() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = MlpConfig { hidden: vec![6, 4], dropout: 0.0, ..MlpConfig::default() };
    let rows: Vec<Vec<f64>> = (0..25).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y: Vec<bool> = (0..25).map(|_| rng.gen_bool(0.5)).collect();
    let x = Matrix::dense(&rows).unwrap();
    let mut net = Mlp::new(5, &cfg, 9);
    let g = net.gradient(&x, &y);
    let p0 = net.params_flat();
    let h = 1e-6;
    let mut numeric = vec![0.0; p0.len()];
    for i in 0..p0.len() {
        let mut p = p0.clone();
        p[i] = p0[i] + h;
        net.set_params_flat(&p);
        let up = net.loss(&x, &y);
        p[i] = p0[i] - h;
        net.set_params_flat(&p);
        let down = net.loss(&x, &y);
        numeric[i] = (up - down) / (2.0 * h);
    }
    let diff = g.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale = g.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    let rel = diff / scale;
    if rel < 1e-4 {
        Ok(format!("MLP gradient relative error {rel:.1e} over {} parameters", p0.len()))
    } else {
        Err(format!("MLP gradient relative error {rel:.3e}"))
    }
}

fn rf_equals_dt() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..10u64 {
        let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..4).map(|_| rng.gen_range(0..5) as f64).collect()).collect();
        let y: Vec<bool> = (0..40).map(|i| i % 3 == 0 || rng.gen_bool(0.3)).collect();
        let x = Matrix::dense(&rows).unwrap();
        let tree_cfg = TreeConfig { max_features: MaxFeatures::None, ..TreeConfig::default() };
        let dt = DecisionTree::fit(&x, &y, &tree_cfg, seed).map_err(|e| e.to_string())?;
        let rf = RandomForest::fit(&x, &y, &ForestConfig { n_trees: 1, bootstrap: false, tree: tree_cfg }, seed)
            .map_err(|e| e.to_string())?;
        if rf.trees[0].nodes != dt.nodes || rf.predict_proba(&x) != dt.predict_proba(&x) {
            return Err(format!("RF and DT differ for seed {seed}"));
        }
    }
    Ok("RF(1 tree) = DT for 10 seeds".into())
}

fn learner_oracles() -> Outcome {
    let parts = [nb_oracle(), svm_oracle(), dt_oracle(), mlp_gradient(), rf_equals_dt()];
    let errors: Vec<&String> = parts.iter().filter_map(|p| p.as_ref().err()).collect();
    if errors.is_empty() {
        Pass(parts.iter().map(|p| p.as_ref().unwrap().as_str()).collect::<Vec<_>>().join("; "))
    } else {
        Fail(errors.iter().map(|e| e.as_str()).collect::<Vec<_>>().join("; "))
    }
}

// ---------------------------------------------------------------- pipeline

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn pipeline_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let mut snaps = Vec::new();
    for name in ["a", "b"] {
        let mut m = RunManifest::load(root().join("data/run.toml")).expect("data/run.toml");
        m.out_dir = tmp.path().join(name);
        if let Err(e) = run(&m) {
            return Fail(format!("pipeline failed: {e}"));
        }
        snaps.push(snapshot(&m.out_dir));
    }
    let elapsed = start.elapsed();
    let same = snaps[0] == snaps[1];
    check(
        same && elapsed < Duration::from_secs(120),
        format!("{} files identical: {same}; two runs in {:.1}s", snaps[0].len(), elapsed.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- grid search

fn oracle_f1(y: &[bool], pred: &[bool]) -> f64 {
    let tp = y.iter().zip(pred).filter(|(a, b)| **a && **b).count() as f64;
    let fp = y.iter().zip(pred).filter(|(a, b)| !**a && **b).count() as f64;
    let fneg = y.iter().zip(pred).filter(|(a, b)| **a && !**b).count() as f64;
    if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fneg)
    }
}

fn grid_enumeration() -> Outcome {
    let expected = [(ModelKind::Lr, 10), (ModelKind::Nb, 11), (ModelKind::Svm, 20), (ModelKind::Dt, 2160)];
    let mut sizes = Vec::new();
    for (kind, want) in expected {
        let n = ParamGrid::default_for(kind)
            .and_then(|g| g.candidates(&ModelConfig::default_for(kind)))
            .map(|c| c.len())
            .unwrap_or(0);
        sizes.push(n);
        if n != want {
            return Fail(format!("{kind} grid has {n} candidates, expected {want}"));
        }
    }

    let loaded = load_dataset(root().join("data/dataset1.csv"), DatasetSchema::DatasetI).unwrap();
    let labeled: Vec<(String, bool)> = loaded
        .records
        .labeled()
        .into_iter()
        .map(|(_, t, v)| (t.to_string(), v.is_positive()))
        .collect();
    let (train, val, _) = split(&labeled, &SplitSpec::standard(11)).unwrap();
    let prep = PrepConfig::default();
    let docs = |rs: &[(String, bool)]| rs.iter().map(|r| preprocess(&r.0, &prep)).collect::<Vec<_>>();
    let tfidf = TfidfModel::fit(&docs(&train)).unwrap();
    let (xt, xv) = (tfidf.transform_many(&docs(&train)), tfidf.transform_many(&docs(&val)));
    let yt: Vec<bool> = train.iter().map(|r| r.1).collect();
    let yv: Vec<bool> = val.iter().map(|r| r.1).collect();
    for kind in [ModelKind::Lr, ModelKind::Nb, ModelKind::Svm] {
        let cands = ParamGrid::default_for(kind)
            .unwrap()
            .candidates(&ModelConfig::default_for(kind).for_text())
            .unwrap();
        let result = grid_search(&cands, (&xt, &yt), (&xv, &yv), 3).unwrap();
        let f1s: Vec<f64> = cands
            .iter()
            .map(|c| oracle_f1(&yv, &threshold(&Learner::train(c, &xt, &yt, 3, Some((&xv, &yv))).unwrap().predict_proba(&xv))))
            .collect();
        let max = f1s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let argmax = f1s.iter().position(|&f| f == max).unwrap();
        if result.best != argmax || result.rows.iter().zip(&f1s).any(|(r, f)| (r.f1 - f).abs() > 1e-12) {
            return Fail(format!("{kind}: grid picked {} but validation-F1 argmax is {argmax}", result.best));
        }
    }
    Pass(format!("sizes {sizes:?}; argmax confirmed for lr, nb, svm"))
}

// ---------------------------------------------------------------- tf-idf

fn tfidf_fixture() -> Outcome {
    let docs = ["a b b", "a c"];
    let model = TfidfModel::fit(&docs).unwrap();
    let want = [
        vec![(0, 0.33517574332792605), (1, 0.9421556246632359)],
        vec![(0, 0.5797386715376657), (2, 0.8148024746671689)],
    ];
    let mut worst = 0.0f64;
    for (d, w) in docs.iter().zip(&want) {
        let row = model.transform(d);
        if row.iter().map(|p| p.0).collect::<Vec<_>>() != w.iter().map(|p| p.0).collect::<Vec<_>>() {
            return Fail(format!("support of {d:?} is {row:?}"));
        }
        for (a, b) in row.iter().zip(w) {
            worst = worst.max((a.1 - b.1).abs());
        }
    }
    let idf_ok = (model.idf[1] - 1.4054651081081644).abs() <= 1e-12 && model.idf[0] == 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"];
    let corpus: Vec<String> = (0..200)
        .map(|_| {
            let len = rng.gen_range(0..12);
            (0..len).map(|_| words[rng.gen_range(0..words.len())]).collect::<Vec<_>>().join(" ")
        })
        .collect();
    let model = TfidfModel::fit(&corpus).unwrap();
    let mut norm_err = 0.0f64;
    for d in &corpus {
        let row = model.transform(d);
        if !row.is_empty() {
            norm_err = norm_err.max((row.iter().map(|p| p.1 * p.1).sum::<f64>().sqrt() - 1.0).abs());
        }
    }
    check(
        worst <= 1e-12 && idf_ok && norm_err <= 1e-12,
        format!("fixture error {worst:.1e}; idf ok {idf_ok}; max |norm - 1| {norm_err:.1e} over 200 rows"),
    )
}

// ---------------------------------------------------------------- datasets

fn real_data() -> Option<PathBuf> {
    std::env::var_os("INFODEMIC_REAL_DATA").map(PathBuf::from).filter(|p| p.is_dir())
}

fn text_stack_f1(train: &[(String, bool)], test: &[(String, bool)]) -> f64 {
    let prep = PrepConfig::default();
    let docs = |rs: &[(String, bool)]| rs.iter().map(|r| preprocess(&r.0, &prep)).collect::<Vec<_>>();
    let tfidf = TfidfModel::fit(&docs(train)).unwrap();
    let y: Vec<bool> = train.iter().map(|r| r.1).collect();
    let cfg = ModelConfig::default_for(ModelKind::Stack).for_text();
    let model = Learner::train(&cfg, &tfidf.transform_many(&docs(train)), &y, 0, None).unwrap();
    let pred = threshold(&model.predict_proba(&tfidf.transform_many(&docs(test))));
    oracle_f1(&test.iter().map(|r| r.1).collect::<Vec<_>>(), &pred)
}

fn labeled(path: &Path, schema: DatasetSchema) -> Option<Vec<(String, bool)>> {
    let loaded = load_dataset(path, schema).ok()?;
    Some(loaded.records.labeled().into_iter().map(|(_, t, v)| (t.to_string(), v.is_positive())).collect())
}

fn datasets_one_two() -> Outcome {
    let Some(dir) = real_data() else {
        return Skip("set INFODEMIC_REAL_DATA to a directory with dataset1.csv, dataset2.csv, fasttext.vec".into());
    };
    let (Some(d1), Some(d2)) = (
        labeled(&dir.join("dataset1.csv"), DatasetSchema::DatasetI),
        labeled(&dir.join("dataset2.csv"), DatasetSchema::DatasetII),
    ) else {
        return Skip(format!("dataset1.csv or dataset2.csv missing under {}", dir.display()));
    };
    let spec = SplitSpec::standard(0);
    let (tr1, va1, te1) = split(&d1, &spec).unwrap();
    let (tr2, _, te2) = split(&d2, &spec).unwrap();
    let para = text_stack_f1(&tr1, &te1);
    let sent = text_stack_f1(&tr2, &te2);
    let mut detail = format!("paragraph stacking F1 {para:.4} (>= 0.90), sentence F1 {sent:.4} (>= 0.85)");
    let mut ok = para >= 0.90 && sent >= 0.85;
    match EmbeddingTable::load(dir.join("fasttext.vec")) {
        Ok(table) => {
            let prep = PrepConfig::default();
            let mut index = ReferenceIndex::new(table.dim);
            for (i, (t, y)) in tr1.iter().enumerate() {
                index.push(table.embed_text(&preprocess(t, &prep)).0, Verdict::from_positive(*y), i.to_string(), "").unwrap();
            }
            let embed = |rs: &[(String, bool)]| -> Vec<(Vec<f64>, Verdict)> {
                rs.iter().map(|(t, y)| (table.embed_text(&preprocess(t, &prep)).0, Verdict::from_positive(*y))).collect()
            };
            let cfg = SimilarityConfig { metric: Metric::Cosine, k: 5, tie_rule: TieRule::MisinformativeOnTie };
            let pred: Vec<bool> = embed(&te1)
                .iter()
                .map(|(v, _)| classify_vector(v, &index, &cfg).unwrap().verdict.is_positive())
                .collect();
            let sim = oracle_f1(&te1.iter().map(|r| r.1).collect::<Vec<_>>(), &pred);
            let tuned = tune_k(&index, &embed(&va1), &cfg, &[1, 5]).unwrap();
            let (e1, e5) = (tuned.rows[0].error, tuned.rows[1].error);
            ok &= sim >= 0.85 && e1 > e5;
            detail.push_str(&format!("; fastText cosine F1 {sim:.4} (>= 0.85); error(1) {e1:.4} > error(5) {e5:.4}"));
        }
        Err(e) => {
            ok = false;
            detail.push_str(&format!("; fasttext.vec unusable: {e}"));
        }
    }
    check(ok, detail)
}

fn constraint_split() -> Outcome {
    let Some(dir) = real_data() else {
        return Skip("set INFODEMIC_REAL_DATA to a directory with constraint_{train,val,test}.csv".into());
    };
    let (Some(train), Some(test)) = (
        labeled(&dir.join("constraint_train.csv"), DatasetSchema::ConstraintAAAI),
        labeled(&dir.join("constraint_test.csv"), DatasetSchema::ConstraintAAAI),
    ) else {
        return Skip(format!("constraint_train.csv or constraint_test.csv missing under {}", dir.display()));
    };
    let f1 = text_stack_f1(&train, &test);
    check(f1 >= 0.91, format!("stacking F1 {f1:.4} (>= 0.91)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("preprocessing golden pairs", golden_preprocessing),
        ("F1 identity", metric_identity),
        ("similarity metrics, top-K vote, scale invariance", similarity_correctness),
        ("learner oracles (NB, SVM dual, DT, MLP gradient, RF=DT)", learner_oracles),
        ("pipeline determinism on the 200-row corpus", pipeline_determinism),
        ("grid sizes and validation-F1 argmax", grid_enumeration),
        ("TF-IDF fixture and unit norms", tfidf_fixture),
        ("best-effort: Dataset I/II F1 and K tuning", datasets_one_two),
        ("best-effort: Constraint split stacking F1", constraint_split),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let (tag, detail) = match f() {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("{tag}  {name}: {detail}");
    }
    println!("acceptance: {} criteria, {failed} failed", criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
