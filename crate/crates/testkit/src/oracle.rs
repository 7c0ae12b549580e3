use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use vocadapt::script::pretokenize;
use vocadapt::{TokenId, Vocab};

fn pair_table(vocab: &Vocab) -> HashMap<(TokenId, TokenId), (u32, TokenId)> {
    vocab
        .merges()
        .map(|m| ((m.left, m.right), (m.rank, m.result)))
        .collect()
}

/// Rescans the whole pretoken after every single merge: find the smallest
/// rank among adjacent pairs (leftmost on ties), apply that one occurrence,
/// start over.
pub fn naive_encode(vocab: &Vocab, text: &str) -> Vec<TokenId> {
    naive_encode_counting(vocab, text, &mut BTreeMap::new())
}

/// [`naive_encode`] that also tallies how often each rank fired.
pub fn naive_encode_counting(
    vocab: &Vocab,
    text: &str,
    fired: &mut BTreeMap<u32, u64>,
) -> Vec<TokenId> {
    let table = pair_table(vocab);
    let mut out = Vec::new();
    for piece in pretokenize(text) {
        let mut seq: Vec<TokenId> = piece.bytes().map(|b| TokenId(b as u32)).collect();
        loop {
            let mut best: Option<(u32, usize, TokenId)> = None;
            for i in 0..seq.len().saturating_sub(1) {
                if let Some(&(rank, result)) = table.get(&(seq[i], seq[i + 1])) {
                    if best.is_none_or(|(r, _, _)| rank < r) {
                        best = Some((rank, i, result));
                    }
                }
            }
            let Some((rank, i, result)) = best else { break };
            seq[i] = result;
            seq.remove(i + 1);
            *fired.entry(rank).or_default() += 1;
        }
        out.extend(seq);
    }
    out
}

/// Fixed-point dependency closure: keep adding any merge that consumes the
/// output of an already removed merge until nothing changes.
pub fn closure(vocab: &Vocab, seeds: &BTreeSet<u32>) -> BTreeSet<u32> {
    let mut removed: BTreeSet<u32> = seeds.clone();
    loop {
        let dead: HashSet<TokenId> = vocab
            .merges()
            .filter(|m| removed.contains(&m.rank))
            .map(|m| m.result)
            .collect();
        let before = removed.len();
        for m in vocab.merges() {
            if dead.contains(&m.left) || dead.contains(&m.right) {
                removed.insert(m.rank);
            }
        }
        if removed.len() == before {
            return removed;
        }
    }
}

/// Every merge whose operands are not produced by some surviving rule.
pub fn dangling(vocab: &Vocab) -> Vec<u32> {
    let produced: HashSet<TokenId> = vocab.merges().map(|m| m.result).collect();
    let live = |t: TokenId| t.is_base() || produced.contains(&t);
    vocab
        .merges()
        .filter(|m| !live(m.left) || !live(m.right))
        .map(|m| m.rank)
        .collect()
}

pub fn shingles(text: &str, n: usize) -> HashSet<Vec<char>> {
    let chars: Vec<char> = text.chars().collect();
    chars.windows(n).map(|w| w.to_vec()).collect()
}

/// Exact Jaccard similarity of the character n-gram sets.
pub fn exact_jaccard(a: &str, b: &str, n: usize) -> f64 {
    let (sa, sb) = (shingles(a, n), shingles(b, n));
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Total scalar values and total tokens, counted in two separate passes.
pub fn chars_and_tokens(vocab: &Vocab, docs: &[String]) -> (u64, u64) {
    let mut chars = 0u64;
    for d in docs {
        chars += d.chars().count() as u64;
    }
    let mut tokens = 0u64;
    for d in docs {
        tokens += naive_encode(vocab, d).len() as u64;
    }
    (chars, tokens)
}

/// Plain confusion counting with "low quality" (< 3) as the positive class.
pub fn confusion(predictions: &[f64], labels: &[f64]) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p < 3.0, l < 3.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    (tp, fp, tn, fn_)
}
