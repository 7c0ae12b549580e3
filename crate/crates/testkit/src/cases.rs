//! Frozen fixture cases shared by the per-module tests and the acceptance run.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vocadapt::corpus::{
    dedup, estimate_jaccard, minhash_text, DedupParams, DocRecord, MinHashParams,
};

use crate::gen::{jaccard_pair, planted_corpus};
use crate::oracle::exact_jaccard;

/// (shared, distinct, exact Jaccard) for [`jaccard_pair`].
pub const JACCARD_CONSTRUCTIONS: [(usize, usize, f64); 3] =
    [(64, 70, 0.3), (204, 100, 0.5), (204, 25, 0.8)];

/// Exact and estimated Jaccard for one seeded trial.
pub fn minhash_trial(shared: usize, distinct: usize, trial: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(trial);
    let (a, b) = jaccard_pair(&mut rng, shared, distinct);
    let exact = exact_jaccard(&a, &b, 5);
    let params = MinHashParams::new(128, 5, trial.wrapping_mul(0x9E37_79B9)).unwrap();
    let est = estimate_jaccard(
        &minhash_text(&a, &params).unwrap(),
        &minhash_text(&b, &params).unwrap(),
    )
    .unwrap();
    (exact, est)
}

pub fn dedup_params() -> DedupParams {
    DedupParams::new(MinHashParams::new(128, 5, 7).unwrap(), 16, 0.8).unwrap()
}

/// Records named `doc-{index}`.
pub fn records(texts: &[String]) -> Vec<DocRecord> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| DocRecord::new(t.clone(), format!("doc-{i}")))
        .collect()
}

pub struct PlantedDedup {
    pub min_pair_jaccard: f64,
    pub max_decoy_jaccard: f64,
    /// Near-duplicate pairs whose earlier member survived and later one did not.
    pub collapsed: usize,
    pub decoys_collapsed: usize,
    pub survivors: usize,
    pub idempotent: bool,
}

pub fn planted_dedup(seed: u64) -> PlantedDedup {
    let planted = planted_corpus(&mut ChaCha8Rng::seed_from_u64(seed));
    let j = |&(a, b): &(usize, usize)| exact_jaccard(&planted.docs[a], &planted.docs[b], 5);
    let out = dedup(records(&planted.docs), &dedup_params()).unwrap();
    let ids: HashSet<&str> = out.iter().map(|d| d.source.as_str()).collect();
    let alive = |i: usize| ids.contains(format!("doc-{i}").as_str());
    PlantedDedup {
        min_pair_jaccard: planted.near_duplicates.iter().map(j).fold(1.0, f64::min),
        max_decoy_jaccard: planted.decoys.iter().map(j).fold(0.0, f64::max),
        collapsed: planted
            .near_duplicates
            .iter()
            .filter(|&&(a, b)| alive(a) && !alive(b))
            .count(),
        decoys_collapsed: planted
            .decoys
            .iter()
            .filter(|&&(a, b)| !(alive(a) && alive(b)))
            .count(),
        survivors: out.len(),
        idempotent: dedup(out.clone(), &dedup_params()).unwrap() == out,
    }
}

/// (tp, fp, tn, fn, accuracy, low-quality recall), worked by hand.
pub const CONFUSIONS: [(u64, u64, u64, u64, f64, Option<f64>); 10] = [
    (370, 101, 499, 30, 0.869, Some(0.925)),
    (85, 40, 60, 15, 0.725, Some(0.85)),
    (5, 0, 5, 0, 1.0, Some(1.0)),
    (0, 5, 0, 5, 0.0, Some(0.0)),
    (0, 2, 8, 0, 0.8, None),
    (1, 0, 4, 3, 0.625, Some(0.25)),
    (7, 2, 0, 1, 0.7, Some(0.875)),
    (0, 0, 6, 4, 0.6, Some(0.0)),
    (3, 1, 0, 0, 0.75, Some(1.0)),
    (49, 5, 45, 1, 0.94, Some(0.98)),
];

/// Predicted and labelled scores realising the given confusion counts, with
/// the positive class being low quality (score below 3).
pub fn plant_scores(tp: u64, fp: u64, tn: u64, fn_: u64) -> (Vec<f64>, Vec<f64>) {
    const LOW: [f64; 3] = [0.0, 1.5, 2.99];
    const HIGH: [f64; 3] = [3.0, 4.2, 5.0];
    let mut p = Vec::new();
    let mut l = Vec::new();
    let mut i = 0usize;
    for (n, pred_low, label_low) in [
        (tp, true, true),
        (fp, true, false),
        (tn, false, false),
        (fn_, false, true),
    ] {
        for _ in 0..n {
            p.push(if pred_low { LOW[i % 3] } else { HIGH[i % 3] });
            l.push(if label_low {
                LOW[(i + 1) % 3]
            } else {
                HIGH[(i + 2) % 3]
            });
            i += 1;
        }
    }
    (p, l)
}
