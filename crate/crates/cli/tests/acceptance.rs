//! End-to-end acceptance checks. Runs without the test harness so that each
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use qkrec::cost::CostCounter;
use qkrec::evaluator::{gpc_fit, krc_coefficients, svc_fit, LabelMode, LabelSet, SVC_C};
use qkrec::metalearn::{cost_ratio, ClassifierId, MetaRecord, MvReport};
use qkrec::qsim::{self, kernel, CircuitId, EncodingCircuit};
use qkrec::seed;
use qkrec_cli::commands::{reference_structure, META_FILE};
use qkrec_cli::config::{LoocvGrid, PipelineConfig};
use qkrec_cli::events::EventLog;
use qkrec_cli::metafile::{self, MetaManifest, META_FORMAT_VERSION};
use qkrec_cli::pipeline::{self, Evaluation, TrainOutcome};
use qkrec_cli::report;
use qkrec::metalearn::Strategy;
use rand::Rng as _;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn check(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    println!(
        "[{}] criterion {id}: {name}: {} ({:.2}s)",
        if o.passed { "PASS" } else { "FAIL" },
        o.detail,
        t.elapsed().as_secs_f64()
    );
    o.passed
}

fn criterion_structure() -> Outcome {
    let t = Instant::now();
    let bad: Vec<&str> = EncodingCircuit::all_default()
        .iter()
        .filter(|c| c.structure() != reference_structure(c.id))
        .map(|c| c.id.as_str())
        .collect();
    let fast = t.elapsed() < Duration::from_secs(1);
    outcome(
        bad.is_empty() && fast,
        if bad.is_empty() {
            "all nine (params, gates, depth, 2q gate) tuples match".to_string()
        } else {
            format!("mismatched: {}", bad.join(", "))
        },
    )
}

fn min_eigenvalue(k: &Array2<f64>) -> f64 {
    let n = k.nrows();
    DMatrix::from_fn(n, n, |i, j| k[[i, j]]).symmetric_eigenvalues().min()
}

fn criterion_kernels() -> Outcome {
    let t = Instant::now();
    let mut rng = seed::rng(2);
    let draw = |rng: &mut seed::Rng| -> [f64; 4] { std::array::from_fn(|_| rng.random_range(0.0..=PI)) };
    let (mut sym, mut diag, mut srx, mut min_eig) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for c in EncodingCircuit::all_default() {
        for _ in 0..1000 {
            let (x, y) = (draw(&mut rng), draw(&mut rng));
            let kxy = kernel(&c, &x, &y).unwrap();
            sym = sym.max((kxy - kernel(&c, &y, &x).unwrap()).abs());
            diag = diag.max((kernel(&c, &x, &x).unwrap() - 1.0).abs());
            if c.id == CircuitId::SRx {
                let closed: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).cos().powi(2)).product();
                srx = srx.max((kxy - closed).abs());
            }
        }
        for _ in 0..2 {
            let batch = Array2::from_shape_fn((60, 4), |_| rng.random_range(0.0..=PI));
            let g = qsim::gram_symmetric(&c, batch.view()).unwrap();
            min_eig = min_eig.min(min_eigenvalue(&g.entries));
        }
    }
    let ok = sym <= 1e-10 && diag <= 1e-10 && srx <= 1e-10 && min_eig >= -1e-8 && t.elapsed() < Duration::from_secs(30);
    outcome(
        ok,
        format!("max asymmetry {sym:.1e}, max |k(x,x)-1| {diag:.1e}, SRx closed-form gap {srx:.1e}, min Gram eigenvalue {min_eig:.1e}"),
    )
}

fn random_kernel(n: usize, seed_: u64) -> (Array2<f64>, Vec<u8>) {
    let mut rng = seed::rng(seed_);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
    let mut y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    y[0] = 0;
    y[1] = 1;
    let k = Array2::from_shape_fn((n, n), |(i, j)| {
        let d = (pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2);
        (-2.0 * d).exp()
    });
    (k, y)
}

fn signed(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

/// Exhaustive active-set search over the SVM dual.
fn svm_dual_oracle(k: &Array2<f64>, y: &[u8], c: f64) -> f64 {
    let n = y.len();
    let ys = signed(y);
    let q = |i: usize, j: usize| ys[i] * ys[j] * k[[i, j]];
    let objective = |a: &[f64]| {
        (0..n)
            .map(|i| (0..n).map(|j| 0.5 * a[i] * a[j] * q(i, j)).sum::<f64>() - a[i])
            .sum::<f64>()
    };
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut a: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let fixed: f64 = (0..n).filter(|&i| state[i] != 2).map(|i| ys[i] * a[i]).sum();
        if free.is_empty() {
            if fixed.abs() > 1e-12 {
                continue;
            }
        } else {
            let m = free.len();
            let mut lhs = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut rhs = DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    lhs[(r, s)] = q(i, j);
                }
                lhs[(r, m)] = ys[i];
                lhs[(m, r)] = ys[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] != 2).map(|j| q(i, j) * a[j]).sum::<f64>();
            }
            rhs[m] = -fixed;
            let Some(sol) = lhs.lu().solve(&rhs) else { continue };
            if (0..m).any(|r| sol[r] < -1e-12 || sol[r] > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r].clamp(0.0, c);
            }
        }
        best = best.min(objective(&a));
    }
    best
}

/// Gradient ascent on the Laplace objective.
fn gpc_oracle(k: &Array2<f64>, y: &[u8]) -> Vec<f64> {
    let n = y.len();
    let kinv = DMatrix::from_fn(n, n, |i, j| k[[i, j]]).try_inverse().unwrap();
    let step = 1.0 / (kinv.symmetric_eigenvalues().max() + 0.25);
    let t = DVector::from_iterator(n, y.iter().map(|&l| f64::from(l)));
    let mut f = DVector::<f64>::zeros(n);
    for _ in 0..5_000_000 {
        let g = &t - f.map(|v| 1.0 / (1.0 + (-v).exp())) - &kinv * &f;
        if g.norm() < 1e-11 {
            break;
        }
        f += g * step;
    }
    f.iter().copied().collect()
}

fn criterion_evaluator() -> Outcome {
    let t = Instant::now();
    let mut svc_gap = 0.0f64;
    for s in 0..20 {
        let (k, y) = random_kernel(6, s);
        let sol = svc_fit(k.view(), &y).unwrap();
        svc_gap = svc_gap.max((sol.objective - svm_dual_oracle(&k, &y, SVC_C)).abs());
    }
    let mut krc_gap = 0.0f64;
    for s in 0..10 {
        let (k, y) = random_kernel(6, 100 + s);
        let a = krc_coefficients(k.view(), &y, 1.0).unwrap();
        let m = DMatrix::from_fn(6, 6, |i, j| k[[i, j]] + if i == j { 1.0 } else { 0.0 });
        let direct = m.lu().solve(&DVector::from_vec(signed(&y))).unwrap();
        for (u, v) in a.iter().zip(direct.iter()) {
            krc_gap = krc_gap.max((u - v).abs());
        }
    }
    let mut gpc_gap = 0.0f64;
    for s in 0..10 {
        let (mut k, y) = random_kernel(5, 200 + s);
        for i in 0..5 {
            k[[i, i]] += 0.5;
        }
        let mode = gpc_fit(k.view(), &y).unwrap();
        for (u, v) in mode.f.iter().zip(gpc_oracle(&k, &y)) {
            gpc_gap = gpc_gap.max((u - v).abs());
        }
    }
    let ok = svc_gap < 1e-4 && krc_gap < 1e-10 && gpc_gap < 1e-5 && t.elapsed() < Duration::from_secs(10);
    outcome(
        ok,
        format!("SVC objective gap {svc_gap:.1e}, KRC coefficient gap {krc_gap:.1e}, GPC mode gap {gpc_gap:.1e}"),
    )
}

struct Pipeline {
    build: pipeline::BuildOutcome,
    records: Vec<MetaRecord>,
    mv: TrainOutcome,
    loocv: TrainOutcome,
    elapsed: Duration,
}

fn run_pipeline(cfg: &PipelineConfig) -> anyhow::Result<Pipeline> {
    let t = Instant::now();
    std::fs::create_dir_all(&cfg.output_dir)?;
    let build = pipeline::build_meta(cfg, &EventLog::disabled())?;
    let path = cfg.output_dir.join(META_FILE);
    let manifest = MetaManifest {
        format_version: META_FORMAT_VERSION,
        global_seed: cfg.global_seed,
        labeling_mode: cfg.labeling_mode,
        epsilon: cfg.epsilon,
        n_records: build.results.len(),
    };
    metafile::write_meta(&path, &build.records(), &manifest)?;
    let (records, _) = metafile::read_meta(&path)?;
    let mv = pipeline::train(cfg, &records)?;
    let loocv_cfg = PipelineConfig {
        strategy: Strategy::Loocv,
        loocv_grid: LoocvGrid::AllIn,
        ..cfg.clone()
    };
    let loocv = pipeline::train(&loocv_cfg, &records)?;
    Ok(Pipeline {
        build,
        records,
        mv,
        loocv,
        elapsed: t.elapsed(),
    })
}

fn criterion_inventory(p: &Pipeline) -> Outcome {
    let rows = report::inventory(&p.build.results);
    let counts = report::group_counts(&rows);
    let synthetic = [
        ("blobs", 42),
        ("circles", 24),
        ("moons", 21),
        ("rings", 24),
        ("xor", 18),
        ("spiral", 18),
        ("checkerboard", 27),
    ];
    let synth_ok = synthetic.iter().all(|(g, n)| counts.get(*g) == Some(n));
    let real: usize = rows.iter().filter(|r| r.kind == "real").map(|r| r.count).sum();
    let total = p.build.results.len();
    let detail = synthetic
        .iter()
        .map(|(g, _)| format!("{g} {}", counts.get(*g).copied().unwrap_or(0)))
        .chain([format!("real {real}")])
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        synth_ok && real == 26 && total == 200 && p.build.failures.is_empty(),
        format!("{total} datasets: {detail}"),
    )
}

fn criterion_labels(p: &Pipeline, cfg: &PipelineConfig) -> Outcome {
    let relabel = |mode, eps| -> Vec<LabelSet> {
        p.records
            .iter()
            .map(|r| r.relabel(mode, eps, cfg.global_seed).unwrap().label_set)
            .collect()
    };
    let tied = relabel(LabelMode::Tied, cfg.epsilon);
    let single = relabel(LabelMode::Single, 0.0);
    let memberships: usize = tied.iter().map(LabelSet::len).sum();
    let contained = single.iter().zip(&tied).all(|(s, t)| t.contains(s.circuits[0]));
    let grid = [0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2];
    let sets: Vec<Vec<LabelSet>> = grid.iter().map(|&e| relabel(LabelMode::Tied, e)).collect();
    let monotone = (0..p.records.len()).all(|i| {
        sets.windows(2)
            .all(|w| w[0][i].circuits.iter().all(|c| w[1][i].contains(*c)))
    });
    let freq = report::frequency(&p.records, cfg.epsilon, cfg.global_seed).unwrap();
    let dist = freq
        .iter()
        .map(|f| format!("{} {}/{}", f.circuit, f.single, f.tied))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        (200..=1800).contains(&memberships) && contained && monotone,
        format!("TIED memberships {memberships}, SINGLE within TIED: {contained}, epsilon-monotone: {monotone}; SINGLE/TIED counts: {dist}"),
    )
}

fn criterion_cost(p: &Pipeline, cfg: &PipelineConfig) -> Outcome {
    let formula = cost_ratio(cfg.runs as u64, ClassifierId::ALL.len() as u64, p.records.len() as u64);
    let measured = p.mv.evaluation_trainings as f64 / p.loocv.evaluation_trainings as f64;
    let ok = p.mv.evaluation_trainings == 140
        && p.loocv.evaluation_trainings == 2800
        && formula.mv_trainings == 140
        && formula.loocv_trainings == 2800
        && (measured - 0.05).abs() < 1e-12
        && (formula.ratio - 0.05).abs() < 1e-12;
    outcome(
        ok,
        format!(
            "MV counted {}, LOOCV ALL-IN counted {}, ratio {measured} (formula {})",
            p.mv.evaluation_trainings, p.loocv.evaluation_trainings, formula.ratio
        ),
    )
}

fn mv_report(o: &TrainOutcome) -> &MvReport {
    match &o.evaluation {
        Evaluation::Mv(r) => r,
        Evaluation::Loocv(_) => unreachable!("majority-vote outcome expected"),
    }
}

fn criterion_recommender(p: &Pipeline, cfg: &PipelineConfig) -> Outcome {
    let tied: Vec<LabelSet> = p.records.iter().map(|r| r.label_set.clone()).collect();
    let single: Vec<LabelSet> = p
        .records
        .iter()
        .map(|r| r.relabel(LabelMode::Single, 0.0, cfg.global_seed).unwrap().label_set)
        .collect();
    let single_records: Vec<MetaRecord> = p
        .records
        .iter()
        .zip(&single)
        .map(|(r, s)| MetaRecord {
            label_set: s.clone(),
            ..r.clone()
        })
        .collect();
    let single_cfg = PipelineConfig {
        labeling_mode: LabelMode::Single,
        ..cfg.clone()
    };
    let single_mv = pipeline::train(&single_cfg, &single_records).unwrap();
    let tied_rep = mv_report(&p.mv);
    let single_rep = mv_report(&single_mv);

    let mut monotone = true;
    for (rep, truth) in [(tied_rep, &tied), (single_rep, &single)] {
        for run in &rep.runs {
            monotone &= (1..3).all(|k| run.hit_rate_against(truth, k) <= run.hit_rate_against(truth, k + 1));
        }
    }
    if let Evaluation::Loocv(l) = &p.loocv.evaluation {
        monotone &= l.cells.iter().all(|c| c.hits[0] <= c.hits[1] && c.hits[1] <= c.hits[2]);
    }
    let superset = [tied_rep, single_rep].iter().all(|rep| {
        rep.runs
            .iter()
            .all(|run| (1..=3).all(|k| run.hit_rate_against(&tied, k) >= run.hit_rate_against(&single, k)))
    });
    let (a_tied, a_single) = (tied_rep.mean_accuracy, single_rep.mean_accuracy);
    outcome(
        monotone && superset && a_tied > a_single,
        format!(
            "Top-k non-decreasing: {monotone}; TIED >= SINGLE on shared predictions: {superset}; mean MV Top-1 over {} seeds TIED {a_tied:.4} vs SINGLE {a_single:.4}",
            tied_rep.runs.len()
        ),
    )
}

fn criterion_no_quantum(p: &Pipeline, cfg: &PipelineConfig) -> Outcome {
    let manifest = pipeline::load_manifest(cfg).unwrap();
    let datasets: Vec<_> = manifest
        .holdout_entries()
        .unwrap()
        .iter()
        .map(|h| h.materialize().unwrap())
        .collect();
    let before = qsim::prepared_states();
    let mut lists = 0;
    for f in [&p.mv.recommender, &p.loocv.recommender] {
        for d in &datasets {
            let (_, rec) = pipeline::recommend(f, d, cfg.k).unwrap();
            lists += usize::from(!rec.ranked.is_empty());
        }
    }
    let prepared = qsim::prepared_states() - before;
    outcome(
        prepared == 0 && lists == 2 * datasets.len(),
        format!("{lists} recommendations, {prepared} quantum states prepared"),
    )
}

fn criterion_runtime(p: &Pipeline, cfg: &PipelineConfig) -> Outcome {
    let manifest = pipeline::load_manifest(cfg).unwrap();
    let datasets: Vec<_> = manifest
        .holdout_entries()
        .unwrap()
        .iter()
        .map(|h| h.materialize().unwrap())
        .collect();
    let mut bounded = true;
    let mut simulated = 0;
    for d in &datasets {
        let counter = CostCounter::new();
        let row = pipeline::verify(&p.mv.recommender, d, cfg, true, Some(&counter)).unwrap();
        let n = row.recommendation.ranked.len();
        // one training and one test Gram per simulated circuit
        bounded &= n <= 3 && row.evaluated.len() == n && counter.gram_matrices() == 2 * n as u64;
        simulated += n;
    }
    let budget = Duration::from_secs(30 * 60);
    outcome(
        p.elapsed <= budget && bounded,
        format!(
            "build-meta + MV + LOOCV ALL-IN took {:.1}s (budget {}s); verify simulated {simulated} of {} circuits on {} holdouts",
            p.elapsed.as_secs_f64(),
            budget.as_secs(),
            9 * datasets.len(),
            datasets.len()
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let cfg = PipelineConfig {
        manifest: std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/manifest.toml"),
        output_dir: dir.path().to_path_buf(),
        ..PipelineConfig::default()
    };
    let mut passed = vec![
        check(1, "structural audit", criterion_structure),
        check(2, "kernel correctness", criterion_kernels),
        check(3, "evaluator oracle equivalence", criterion_evaluator),
    ];
    match run_pipeline(&cfg) {
        Ok(p) => {
            passed.push(check(4, "meta-dataset inventory", || criterion_inventory(&p)));
            passed.push(check(5, "label-mode properties", || criterion_labels(&p, &cfg)));
            passed.push(check(6, "cost accounting", || criterion_cost(&p, &cfg)));
            passed.push(check(7, "recommender behavior", || criterion_recommender(&p, &cfg)));
            passed.push(check(8, "no quantum evaluation at inference", || criterion_no_quantum(&p, &cfg)));
            passed.push(check(9, "runtime budget and bounded verification", || criterion_runtime(&p, &cfg)));
        }
        Err(e) => {
            for (i, name) in [
                "meta-dataset inventory",
                "label-mode properties",
                "cost accounting",
                "recommender behavior",
                "no quantum evaluation at inference",
                "runtime budget and bounded verification",
            ]
            .iter()
            .enumerate()
            {
                println!("[FAIL] criterion {}: {name}: pipeline failed: {e:#}", i + 4);
                passed.push(false);
            }
        }
    }
    let n_pass = passed.iter().filter(|&&p| p).count();
    println!("acceptance: {n_pass}/{} criteria passed", passed.len());
    if n_pass != passed.len() {
        std::process::exit(1);
    }
}
