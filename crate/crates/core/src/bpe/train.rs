use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;

use super::{MergeRule, TokenId, Vocab, BASE_TOKENS};
use crate::error::{Error, Result};
use crate::script::pretokenize;

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub vocab: Vocab,
    /// Set when the corpus ran out of mergeable pairs before `target_size`.
    pub exhausted: bool,
}

type Pair = (u32, u32);

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    count: u64,
    left: Vec<u8>,
    right: Vec<u8>,
    pair: Pair,
}

impl Ord for Candidate {
    // Max-heap on count; equal counts prefer the lexicographically smaller byte pair.
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| (&other.left, &other.right).cmp(&(&self.left, &self.right)))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Trains a vocabulary of `target_size` tokens with the script pre-tokenizer.
pub fn train<S: AsRef<str> + Sync>(corpus: &[S], target_size: usize) -> Result<TrainOutcome> {
    train_with(corpus, target_size, pretokenize)
}

/// Trains with a caller-supplied pre-tokenizer.
///
/// Pairs are counted with overlap inside each pretoken, the most frequent pair
/// is merged, and ties go to the lexicographically smaller `(left, right)`
/// byte pair. A pair whose concatenation already exists as a token is never
/// merged, which keeps token byte strings unique.
pub fn train_with<S, F>(corpus: &[S], target_size: usize, pretok: F) -> Result<TrainOutcome>
where
    S: AsRef<str> + Sync,
    F: for<'a> Fn(&'a str) -> Vec<&'a str> + Sync,
{
    if target_size < BASE_TOKENS as usize {
        return Err(Error::InvalidArgument(format!(
            "target size {target_size} is below the 256 base tokens"
        )));
    }
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("training corpus is empty".into()));
    }

    let word_counts: HashMap<&str, u64> = corpus
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<&str, u64>, doc| {
            for piece in pretok(doc.as_ref()) {
                *acc.entry(piece).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut unique: Vec<(&str, u64)> = word_counts.into_iter().collect();
    unique.sort_unstable();

    let mut words: Vec<Vec<u32>> = unique
        .iter()
        .map(|(w, _)| w.bytes().map(u32::from).collect())
        .collect();
    let freqs: Vec<u64> = unique.iter().map(|&(_, c)| c).collect();

    let mut token_bytes: Vec<Vec<u8>> = (0..BASE_TOKENS).map(|b| vec![b as u8]).collect();
    let mut existing: HashSet<Vec<u8>> = token_bytes.iter().cloned().collect();

    let mut pair_counts: HashMap<Pair, u64> = HashMap::new();
    let mut where_seen: HashMap<Pair, Vec<usize>> = HashMap::new();
    for (wi, w) in words.iter().enumerate() {
        for p in w.windows(2) {
            let pair = (p[0], p[1]);
            *pair_counts.entry(pair).or_default() += freqs[wi];
            let locs = where_seen.entry(pair).or_default();
            if locs.last() != Some(&wi) {
                locs.push(wi);
            }
        }
    }

    let candidate = |pair: Pair, count: u64, tb: &[Vec<u8>]| Candidate {
        count,
        left: tb[pair.0 as usize].clone(),
        right: tb[pair.1 as usize].clone(),
        pair,
    };
    let mut heap: BinaryHeap<Candidate> = pair_counts
        .iter()
        .map(|(&pair, &count)| candidate(pair, count, &token_bytes))
        .collect();

    let wanted = target_size - BASE_TOKENS as usize;
    let mut merges = Vec::with_capacity(wanted);
    let mut banned: HashSet<Pair> = HashSet::new();
    let mut touched = vec![0usize; words.len()];
    let mut step_no = 0usize;

    while merges.len() < wanted {
        let Some(top) = heap.pop() else { break };
        let current = pair_counts.get(&top.pair).copied().unwrap_or(0);
        if current == 0 || banned.contains(&top.pair) {
            continue;
        }
        if current != top.count {
            heap.push(candidate(top.pair, current, &token_bytes));
            continue;
        }
        let merged_bytes = [top.left.as_slice(), top.right.as_slice()].concat();
        if existing.contains(&merged_bytes) {
            banned.insert(top.pair);
            continue;
        }

        let new_id = token_bytes.len() as u32;
        token_bytes.push(merged_bytes.clone());
        existing.insert(merged_bytes);
        merges.push(MergeRule {
            left: TokenId(top.pair.0),
            right: TokenId(top.pair.1),
            result: TokenId(new_id),
            rank: merges.len() as u32,
        });

        step_no += 1;
        let mut grown: HashMap<Pair, u64> = HashMap::new();
        let locs = where_seen.remove(&top.pair).unwrap_or_default();
        for &wi in &locs {
            if touched[wi] == step_no {
                continue;
            }
            touched[wi] = step_no;
            let w = &mut words[wi];
            if !w.windows(2).any(|p| (p[0], p[1]) == top.pair) {
                continue;
            }
            let f = freqs[wi];
            for p in w.windows(2) {
                let c = pair_counts.get_mut(&(p[0], p[1])).expect("counted pair");
                *c -= f;
            }
            let mut merged = Vec::with_capacity(w.len());
            let mut i = 0;
            while i < w.len() {
                if i + 1 < w.len() && (w[i], w[i + 1]) == top.pair {
                    merged.push(new_id);
                    i += 2;
                } else {
                    merged.push(w[i]);
                    i += 1;
                }
            }
            *w = merged;
            for p in w.windows(2) {
                let pair = (p[0], p[1]);
                *pair_counts.entry(pair).or_default() += f;
                if pair.0 == new_id || pair.1 == new_id {
                    *grown.entry(pair).or_default() += f;
                    let locs = where_seen.entry(pair).or_default();
                    if locs.last() != Some(&wi) {
                        locs.push(wi);
                    }
                }
            }
        }
        pair_counts.remove(&top.pair);
        for (pair, _) in grown {
            let count = pair_counts[&pair];
            if count > 0 {
                heap.push(candidate(pair, count, &token_bytes));
            }
        }
    }

    let exhausted = merges.len() < wanted;
    let tokens = token_bytes.into_iter().map(Some).collect();
    let vocab = Vocab::from_parts(tokens, merges)?;
    Ok(TrainOutcome { vocab, exhausted })
}
