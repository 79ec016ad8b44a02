use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::synth::PatchDatabase;
use crate::error::{Error, Result};
use crate::numeric::FeatureExtractor;

/// Sum of |x_i - y_i| / (|x_i| + |y_i|), a 0/0 term counting as 0. Lies in [0, n].
pub fn csd(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Length(x.len(), y.len()));
    }
    Ok(x.iter().zip(y).map(|(&a, &b)| relative_term(a, b)).sum())
}

fn relative_term(a: f64, b: f64) -> f64 {
    let den = a.abs() + b.abs();
    if den == 0.0 {
        0.0
    } else {
        (a - b).abs() / den
    }
}

/// Feature vectors for every record, in record order.
pub fn database_features(db: &PatchDatabase, ex: &FeatureExtractor) -> Result<Vec<Vec<f64>>> {
    db.records
        .par_iter()
        .map(|r| {
            ex.feature_vector(&r.patch).map(|f| f.values).map_err(|e| Error::Patch {
                k1: r.k1,
                k2: r.k2,
                inst: r.instance,
                msg: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassAccuracy {
    pub k1: usize,
    pub k2: usize,
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub k1: usize,
    pub k2: usize,
    pub instance: usize,
    pub predicted_k1: usize,
    pub predicted_k2: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyResult {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub per_class: Vec<ClassAccuracy>,
    pub predictions: Vec<Prediction>,
}

/// Instance 1 of every class is the model; every other instance goes to the model at the
/// smallest CSD, ties to the lowest class index.
pub fn nn_classify_features(db: &PatchDatabase, features: &[Vec<f64>]) -> Result<ClassifyResult> {
    let n = db.spec.instances;
    if n < 2 {
        return Err(Error::Database("classification needs at least two instances per class".into()));
    }
    let classes = db.class_count();
    let models: Vec<&Vec<f64>> = (0..classes).map(|c| &features[c * n]).collect();
    let predictions = (0..classes)
        .into_par_iter()
        .flat_map_iter(|c| (1..n).map(move |i| (c, i)))
        .map(|(c, i)| {
            let f = &features[c * n + i];
            let mut best = (usize::MAX, f64::INFINITY);
            for (m, model) in models.iter().enumerate() {
                let d = csd(f, model)?;
                if d < best.1 || best.0 == usize::MAX {
                    best = (m, d);
                }
            }
            let rec = &db.records[c * n + i];
            let pred = &db.records[best.0 * n];
            Ok(Prediction {
                k1: rec.k1,
                k2: rec.k2,
                instance: rec.instance,
                predicted_k1: pred.k1,
                predicted_k2: pred.k2,
                distance: best.1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_class: Vec<ClassAccuracy> = (0..classes)
        .map(|c| {
            let r = &db.records[c * n];
            ClassAccuracy { k1: r.k1, k2: r.k2, correct: 0, total: n - 1 }
        })
        .collect();
    for p in &predictions {
        if (p.k1, p.k2) == (p.predicted_k1, p.predicted_k2) {
            per_class[db.class_index(p.k1, p.k2)].correct += 1;
        }
    }
    let correct = per_class.iter().map(|c| c.correct).sum();
    let total = predictions.len();
    Ok(ClassifyResult { accuracy: correct as f64 / total as f64, correct, total, per_class, predictions })
}

pub fn nn_classify(db: &PatchDatabase, ex: &FeatureExtractor) -> Result<ClassifyResult> {
    nn_classify_features(db, &database_features(db, ex)?)
}

/// Mean relative error in percent of each feature column between instance 1 and every
/// other instance of the same class; 0/0 terms count as 0.
pub fn mre_features(db: &PatchDatabase, features: &[Vec<f64>]) -> Vec<f64> {
    let n = db.spec.instances;
    let dim = features.first().map_or(0, |f| f.len());
    let classes = db.class_count();
    let terms = (classes * (n - 1)) as f64;
    (0..dim)
        .map(|k| {
            let mut sum = 0.0;
            for c in 0..classes {
                let model = features[c * n][k];
                for i in 1..n {
                    sum += relative_term(model, features[c * n + i][k]);
                }
            }
            if terms > 0.0 {
                100.0 * sum / terms
            } else {
                0.0
            }
        })
        .collect()
}

pub fn mre(db: &PatchDatabase, ex: &FeatureExtractor) -> Result<Vec<f64>> {
    Ok(mre_features(db, &database_features(db, ex)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResult {
    pub average_precision: f64,
    pub positives: usize,
    pub negatives: usize,
    /// (recall, precision) after each positive in rank order.
    pub curve: Vec<(f64, f64)>,
}

/// Same-class pairs against `neg_per_pos` seeded cross-class pairs per positive, ranked by
/// ascending CSD over one global list. Equal distances rank negatives first.
pub fn pair_verify_features(
    db: &PatchDatabase,
    features: &[Vec<f64>],
    neg_per_pos: usize,
    seed: u64,
) -> Result<VerifyResult> {
    let n = db.spec.instances;
    let classes = db.class_count();
    let mut pairs: Vec<(usize, usize, bool)> = Vec::new();
    for c in 0..classes {
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((c * n + i, c * n + j, true));
            }
        }
    }
    let positives = pairs.len();
    if positives == 0 || classes < 2 {
        return Err(Error::Database("verification needs two classes with two instances".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = features.len();
    for _ in 0..positives * neg_per_pos {
        loop {
            let a = rng.random_range(0..total);
            let b = rng.random_range(0..total);
            if a / n != b / n {
                pairs.push((a.min(b), a.max(b), false));
                break;
            }
        }
    }
    let negatives = pairs.len() - positives;
    let mut scored = pairs
        .par_iter()
        .map(|&(a, b, pos)| csd(&features[a], &features[b]).map(|d| (d, pos)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut hits = 0usize;
    let mut ap = 0.0;
    let mut curve = Vec::with_capacity(positives);
    for (rank, &(_, pos)) in scored.iter().enumerate() {
        if pos {
            hits += 1;
            let precision = hits as f64 / (rank + 1) as f64;
            ap += precision;
            curve.push((hits as f64 / positives as f64, precision));
        }
    }
    Ok(VerifyResult { average_precision: ap / positives as f64, positives, negatives, curve })
}

pub fn pair_verify(db: &PatchDatabase, ex: &FeatureExtractor, neg_per_pos: usize, seed: u64) -> Result<VerifyResult> {
    pair_verify_features(db, &database_features(db, ex)?, neg_per_pos, seed)
}
