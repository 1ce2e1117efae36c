use ndarray::Array2;
use qkrec::complexity::{ComplexityVector, FeatureMode, MetricId};
use qkrec::cost::CostCounter;
use qkrec::evaluator::{CircuitScore, LabelMode, LabelSet, DEFAULT_EPSILON};
use qkrec::metalearn::{
    cost_ratio, hit, loocv_evaluate, majority_vote, mv_evaluate, recommend_topk, train_base, train_final,
    ClassifierId, MetaRecord, Recommendation, Recommender, Strategy, TrainedClassifier,
    RECOMMENDER_FORMAT_VERSION,
};
use qkrec::qsim::CircuitId;
use qkrec::seed;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

const SEED: u64 = 11;

fn blobs(n: usize, centers: &[(f64, f64)], sigma: f64, rng_seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = seed::rng(rng_seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut x = Array2::zeros((n, 2));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % centers.len();
        x[[i, 0]] = centers[c].0 + noise.sample(&mut rng);
        x[[i, 1]] = centers[c].1 + noise.sample(&mut rng);
        y.push(c);
    }
    (x, y)
}

fn scores_from(acc: [f64; 9]) -> Vec<CircuitScore> {
    CircuitId::ALL
        .iter()
        .map(|&c| CircuitScore::new(c, [acc[c.index()]; 3]))
        .collect()
}

/// Records whose features shift with the target circuit; a second circuit
/// sits inside the tie margin so TIED sets have two members.
fn synthetic_meta(n: usize, mode: LabelMode, rng_seed: u64) -> Vec<MetaRecord> {
    let targets = [CircuitId::HD, CircuitId::ZFM, CircuitId::SRx];
    let mut rng = seed::rng(rng_seed);
    let noise = Normal::new(0.0, 0.3).unwrap();
    (0..n)
        .map(|i| {
            let t = targets[i % targets.len()];
            let features: Vec<f64> = (0..24)
                .map(|j| t.index() as f64 * (1.0 + j as f64 / 24.0) + noise.sample(&mut rng))
                .collect();
            let mut acc = [0.6; 9];
            acc[t.index()] = 0.9;
            acc[(t.index() + 1 + rng.random_range(0..8)) % 9] = 0.895;
            MetaRecord::new(format!("rec{i}"), features, &scores_from(acc), mode, DEFAULT_EPSILON, SEED).unwrap()
        })
        .collect()
}

fn constant(c: CircuitId) -> TrainedClassifier {
    let x = Array2::zeros((3, 24));
    train_base(ClassifierId::Dt, x.view(), &[c.index(); 3], 0).unwrap()
}

fn mv_recommender(members: Vec<TrainedClassifier>) -> Recommender {
    Recommender {
        format_version: RECOMMENDER_FORMAT_VERSION,
        strategy: Strategy::Mv,
        feature_mode: FeatureMode::AllIn,
        global_seed: SEED,
        members,
    }
}

fn all_in_vector(values: Vec<f64>) -> ComplexityVector {
    ComplexityVector {
        dataset_name: "probe".into(),
        metrics: MetricId::ALL.to_vec(),
        values,
    }
}

#[test]
fn every_classifier_separates_distant_blobs() {
    // centres 5 sigma apart, labels are non-adjacent circuit indices
    let centers = [(0.0, 0.0), (5.0, 0.0)];
    let (xtr, ytr) = blobs(200, &centers, 1.0, 1);
    let (xte, yte) = blobs(200, &centers, 1.0, 2);
    let relabel = |y: &[usize]| y.iter().map(|&c| if c == 0 { 2 } else { 6 }).collect::<Vec<_>>();
    let (ytr, yte) = (relabel(&ytr), relabel(&yte));
    for id in ClassifierId::ALL {
        let m = train_base(id, xtr.view(), &ytr, 5).unwrap();
        let correct = xte
            .outer_iter()
            .zip(&yte)
            .filter(|(r, &l)| m.predict(r.as_slice().unwrap()) == l)
            .count();
        let acc = correct as f64 / yte.len() as f64;
        assert!(acc >= 0.9, "{id}: accuracy {acc}");
    }
}

#[test]
fn knn_follows_unanimous_neighbourhood() {
    let mut x = Array2::zeros((12, 2));
    let mut y = vec![];
    for i in 0..12 {
        let far = i >= 6;
        x[[i, 0]] = if far { 10.0 } else { 0.0 } + i as f64 * 0.01;
        x[[i, 1]] = 0.0;
        y.push(if far { 7 } else { 1 });
    }
    let m = train_base(ClassifierId::Knn, x.view(), &y, 0).unwrap();
    assert_eq!(m.predict(&[0.02, 0.0]), 1);
    assert_eq!(m.predict(&[10.05, 0.0]), 7);
}

#[test]
fn unbounded_tree_memorizes_consistent_data() {
    let (x, y) = blobs(150, &[(0.0, 0.0), (1.0, 1.0), (0.5, 0.0)], 1.0, 9);
    let m = train_base(ClassifierId::Dt, x.view(), &y, 0).unwrap();
    for (r, &l) in x.outer_iter().zip(&y) {
        assert_eq!(m.predict(r.as_slice().unwrap()), l);
    }
}

#[test]
fn naive_bayes_matches_closed_form_posterior() {
    let (x, y) = blobs(100, &[(0.0, 0.0), (2.0, 1.0)], 1.0, 3);
    let m = train_base(ClassifierId::Nb, x.view(), &y, 0).unwrap();
    // closed-form Gaussian posteriors from directly computed moments
    let n = y.len() as f64;
    let max_var = (0..2)
        .map(|j| {
            let col: Vec<f64> = x.column(j).to_vec();
            let mu = col.iter().sum::<f64>() / n;
            col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n
        })
        .fold(0.0, f64::max);
    let stats: Vec<(f64, [f64; 2], [f64; 2])> = (0..2)
        .map(|c| {
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
            let k = rows.len() as f64;
            let mut mu = [0.0; 2];
            let mut var = [0.0; 2];
            for j in 0..2 {
                mu[j] = rows.iter().map(|&i| x[[i, j]]).sum::<f64>() / k;
                var[j] = rows.iter().map(|&i| (x[[i, j]] - mu[j]).powi(2)).sum::<f64>() / k + 1e-9 * max_var;
            }
            (k / n, mu, var)
        })
        .collect();
    for gx in -4..=6 {
        for gy in -4..=5 {
            let p = [gx as f64 * 0.5, gy as f64 * 0.5];
            let dens: Vec<f64> = stats
                .iter()
                .map(|(prior, mu, var)| {
                    prior
                        * (0..2)
                            .map(|j| {
                                (-(p[j] - mu[j]).powi(2) / (2.0 * var[j])).exp()
                                    / (2.0 * std::f64::consts::PI * var[j]).sqrt()
                            })
                            .product::<f64>()
                })
                .collect();
            let post1 = dens[1] / (dens[0] + dens[1]);
            let s = m.scores(&p);
            assert!((s[1].unwrap() - post1).abs() < 1e-8, "at {p:?}");
            assert_eq!(m.predict(&p), usize::from(dens[1] > dens[0]));
        }
    }
}

#[test]
fn single_class_training_gives_constant_predictor() {
    let m = constant(CircuitId::PZFM);
    assert_eq!(m.predict(&[1.0; 24]), CircuitId::PZFM.index());
}

#[test]
fn majority_vote_counts_and_breaks_ties_canonically() {
    let mut members: Vec<_> = (0..12).map(|_| constant(CircuitId::HD)).collect();
    members.push(constant(CircuitId::ZFM));
    members.push(constant(CircuitId::HD));
    let v = majority_vote(&members, &[0.0; 24]);
    assert_eq!(v.winner, CircuitId::HD);
    assert_eq!(v.votes.iter().sum::<usize>(), 14);
    assert!(!v.tie);

    let mut members: Vec<_> = (0..7).map(|_| constant(CircuitId::HD)).collect();
    members.extend((0..7).map(|_| constant(CircuitId::ZFM)));
    let v = majority_vote(&members, &[0.0; 24]);
    assert_eq!(v.winner, CircuitId::ZFM);
    assert!(v.tie);
    members.reverse();
    assert_eq!(majority_vote(&members, &[0.0; 24]).winner, CircuitId::ZFM);

    let all: Vec<_> = (0..14).map(|_| constant(CircuitId::SRx)).collect();
    let v = majority_vote(&all, &[0.0; 24]);
    assert_eq!(v.votes.iter().filter(|&&c| c > 0).count(), 1);
    assert_eq!(v.votes[0], 14);
}

#[test]
fn topk_ranks_by_votes_and_drops_unsupported_circuits() {
    let mut members = vec![];
    members.extend((0..5).map(|_| constant(CircuitId::ZFM)));
    members.extend((0..4).map(|_| constant(CircuitId::HD)));
    members.extend((0..3).map(|_| constant(CircuitId::SRx)));
    let f = mv_recommender(members);
    let x = all_in_vector(vec![0.0; 24]);
    let r3 = recommend_topk(&f, &x, 3).unwrap();
    assert_eq!(r3.ranked, [CircuitId::ZFM, CircuitId::HD, CircuitId::SRx]);
    assert_eq!(r3.votes, [5.0, 4.0, 3.0]);
    let r1 = recommend_topk(&f, &x, 1).unwrap();
    assert_eq!(r1.ranked, r3.ranked[..1]);

    let unanimous = mv_recommender((0..14).map(|_| constant(CircuitId::ZFM)).collect());
    let r = recommend_topk(&unanimous, &x, 3).unwrap();
    assert_eq!(r.ranked, [CircuitId::ZFM]);

    assert!(recommend_topk(&f, &x, 0).is_err());
    assert!(recommend_topk(&f, &x, 10).is_err());
    let single = ComplexityVector {
        dataset_name: "probe".into(),
        metrics: vec![MetricId::N4],
        values: vec![0.1],
    };
    assert!(matches!(
        recommend_topk(&f, &single, 3),
        Err(qkrec::Error::ModeMismatch { .. })
    ));
}

#[test]
fn hit_checks_intersection() {
    let truth = |c: &[CircuitId]| LabelSet {
        circuits: c.to_vec(),
        mode: LabelMode::Tied,
        epsilon: DEFAULT_EPSILON,
    };
    let rec = |c: &[CircuitId]| Recommendation {
        ranked: c.to_vec(),
        votes: vec![1.0; c.len()],
    };
    assert!(hit(
        &rec(&[CircuitId::SRx, CircuitId::HzyCz, CircuitId::HD]),
        &truth(&[CircuitId::HERx, CircuitId::HD])
    ));
    assert!(!hit(
        &rec(&[CircuitId::HERx, CircuitId::SRx, CircuitId::ZFM]),
        &truth(&[CircuitId::HD])
    ));
    assert!(!hit(&rec(&[]), &truth(&[CircuitId::HD])));
}

#[test]
fn cost_ratio_closed_form() {
    let c = cost_ratio(10, 14, 200);
    assert_eq!((c.mv_trainings, c.loocv_trainings), (140, 2800));
    assert!((c.ratio - 0.05).abs() < 1e-15);
    assert_eq!(cost_ratio(200, 14, 200).ratio, 1.0);
}

#[test]
fn mv_evaluation_counts_trainings_and_is_deterministic() {
    let meta = synthetic_meta(40, LabelMode::Tied, 1);
    let counter = CostCounter::new();
    let a = mv_evaluate(&meta, FeatureMode::AllIn, 10, 7, Some(&counter)).unwrap();
    assert_eq!(counter.trainings(), 140);
    assert_eq!(a.runs.len(), 10);
    let b = mv_evaluate(&meta, FeatureMode::AllIn, 10, 7, None).unwrap();
    assert_eq!(a, b);
    assert!(a.mean_accuracy > 0.8, "separable meta-problem: {}", a.mean_accuracy);
    for run in &a.runs {
        assert_eq!(run.test.len(), 8);
        for p in &run.predictions {
            let total: f64 = p.votes.iter().sum();
            assert!(total <= 14.0);
        }
    }
}

#[test]
fn mv_hit_rate_is_one_when_every_circuit_is_a_label() {
    let meta: Vec<MetaRecord> = synthetic_meta(30, LabelMode::Tied, 2)
        .into_iter()
        .map(|r| r.relabel(LabelMode::Tied, 1.0, SEED).unwrap())
        .collect();
    assert!(meta.iter().all(|r| r.label_set.len() == 9));
    let rep = mv_evaluate(&meta, FeatureMode::AllIn, 2, 3, None).unwrap();
    assert_eq!(rep.mean_accuracy, 1.0);
}

#[test]
fn hit_rate_grows_with_k_and_with_tied_labels() {
    let tied = synthetic_meta(45, LabelMode::Tied, 4);
    let single: Vec<LabelSet> = tied
        .iter()
        .map(|r| r.relabel(LabelMode::Single, 0.0, SEED).unwrap().label_set)
        .collect();
    let truth: Vec<LabelSet> = tied.iter().map(|r| r.label_set.clone()).collect();
    for (s, t) in single.iter().zip(&truth) {
        assert!(t.contains(s.circuits[0]));
    }
    let rep = mv_evaluate(&tied, FeatureMode::SingleIn(MetricId::F1), 3, 9, None).unwrap();
    for run in &rep.runs {
        for k in 1..3 {
            assert!(run.hit_rate_against(&truth, k) <= run.hit_rate_against(&truth, k + 1));
        }
        assert!(run.hit_rate_against(&truth, 1) >= run.hit_rate_against(&single, 1));
    }
}

#[test]
fn loocv_counts_one_training_per_fold() {
    let meta = synthetic_meta(12, LabelMode::Tied, 5);
    let counter = CostCounter::new();
    let rep = loocv_evaluate(&meta, &[FeatureMode::AllIn], &ClassifierId::ALL, 1, Some(&counter)).unwrap();
    assert_eq!(counter.trainings(), 14 * 12);
    assert_eq!(rep.cells.len(), 14);
    for c in &rep.cells {
        assert!(c.hits[0] <= c.hits[1] && c.hits[1] <= c.hits[2]);
    }
    let best = rep.cells.iter().map(|c| c.accuracy).fold(0.0, f64::max);
    let first = rep.cells.iter().find(|c| c.accuracy == best).unwrap();
    assert_eq!(rep.winner, (first.classifier, first.feature_mode));
}

#[test]
fn loocv_three_records_match_fold_enumeration() {
    let mk = |name: &str, f: f64, t: CircuitId| {
        let mut acc = [0.5; 9];
        acc[t.index()] = 0.9;
        MetaRecord::new(name, vec![f; 24], &scores_from(acc), LabelMode::Tied, DEFAULT_EPSILON, SEED).unwrap()
    };
    let meta = vec![
        mk("a", 0.0, CircuitId::SRx),
        mk("b", 1.0, CircuitId::HD),
        mk("c", 1.1, CircuitId::HD),
    ];
    // k = min(5, 2): both training records vote, ties go to the lower index
    let mut hits = 0;
    for i in 0..3 {
        let mut counts = [0usize; 9];
        for (j, r) in meta.iter().enumerate() {
            if j != i {
                counts[r.target.index()] += 1;
            }
        }
        let top = *counts.iter().max().unwrap();
        let pred = CircuitId::ALL[counts.iter().position(|&c| c == top).unwrap()];
        hits += usize::from(meta[i].label_set.contains(pred));
    }
    let rep = loocv_evaluate(&meta, &[FeatureMode::AllIn], &[ClassifierId::Knn], 0, None).unwrap();
    assert_eq!(rep.cells[0].hits[0], hits);
    assert_eq!(hits, 0);
}

#[test]
fn loocv_with_constant_features_predicts_training_majority() {
    let mut meta = vec![];
    for i in 0..20 {
        let t = match i {
            0..=9 => CircuitId::HD,
            10..=15 => CircuitId::ZFM,
            _ => CircuitId::SRx,
        };
        let mut acc = [0.5; 9];
        acc[t.index()] = 0.9;
        if i % 4 == 0 {
            acc[CircuitId::HD.index()] = 0.9;
        }
        meta.push(MetaRecord::new(format!("r{i}"), vec![0.3; 24], &scores_from(acc), LabelMode::Tied, DEFAULT_EPSILON, SEED).unwrap());
    }
    let expected = meta.iter().filter(|r| r.label_set.contains(CircuitId::HD)).count();
    let ids = [ClassifierId::Dt, ClassifierId::Egb, ClassifierId::Nb, ClassifierId::Lr];
    let rep = loocv_evaluate(&meta, &[FeatureMode::AllIn], &ids, 0, None).unwrap();
    for c in &rep.cells {
        assert_eq!(c.hits[0], expected, "{}", c.classifier);
        assert!(c.rankings.iter().all(|r| r[0] == CircuitId::HD));
    }
}

#[test]
fn final_training_is_deterministic_and_round_trips() {
    let meta = synthetic_meta(30, LabelMode::Tied, 6);
    let counter = CostCounter::new();
    let a = train_final(&meta, Strategy::Mv, FeatureMode::AllIn, None, 3, Some(&counter)).unwrap();
    assert_eq!(a.members.len(), 14);
    assert_eq!(counter.trainings(), 14);
    let b = train_final(&meta, Strategy::Mv, FeatureMode::AllIn, None, 3, None).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let back = Recommender::from_json(&a.to_json().unwrap()).unwrap();
    let probe = all_in_vector(meta[0].features.clone());
    assert_eq!(recommend_topk(&a, &probe, 3).unwrap(), recommend_topk(&back, &probe, 3).unwrap());

    let rf = train_final(&meta, Strategy::Loocv, FeatureMode::AllIn, Some(ClassifierId::Rf), 3, None).unwrap();
    assert_eq!(rf.members.len(), 1);
    assert!(train_final(&meta, Strategy::Loocv, FeatureMode::AllIn, None, 3, None).is_err());

    let mut bad: serde_json::Value = serde_json::from_str(&a.to_json().unwrap()).unwrap();
    bad["format_version"] = serde_json::json!(99);
    assert!(Recommender::from_json(&bad.to_string()).is_err());
}

#[test]
fn single_model_ranking_follows_class_scores() {
    let meta = synthetic_meta(30, LabelMode::Tied, 8);
    let f = train_final(&meta, Strategy::Loocv, FeatureMode::AllIn, Some(ClassifierId::Lr), 1, None).unwrap();
    let probe = all_in_vector(meta[1].features.clone());
    let r = recommend_topk(&f, &probe, 9).unwrap();
    assert_eq!(r.ranked.len(), 3, "logistic regression scores every training class");
    assert!(r.votes.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(recommend_topk(&f, &probe, 1).unwrap().ranked, r.ranked[..1]);
}
