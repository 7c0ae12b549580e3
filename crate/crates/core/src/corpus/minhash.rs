use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DocRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHashParams {
    pub k: usize,
    pub shingle_n: usize,
    pub seed: u64,
}

impl MinHashParams {
    pub fn new(k: usize, shingle_n: usize, seed: u64) -> Result<Self> {
        if k < 16 {
            return Err(Error::Config(format!("MinHash needs k >= 16, got {k}")));
        }
        if shingle_n == 0 {
            return Err(Error::Config("shingle size must be positive".into()));
        }
        Ok(MinHashParams { k, shingle_n, seed })
    }

    fn salts(&self) -> Vec<u64> {
        let mut state = self.seed;
        (0..self.k)
            .map(|_| {
                state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
                mix(state)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHashSignature {
    pub hashes: Vec<u64>,
    pub shingle_n: usize,
    pub seed: u64,
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Signature over character `shingle_n`-grams of `text`.
pub fn minhash_text(text: &str, params: &MinHashParams) -> Result<MinHashSignature> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let len = bounds.len() - 1;
    if len < params.shingle_n {
        return Err(Error::TooShort {
            len,
            shingle_n: params.shingle_n,
        });
    }
    let salts = params.salts();
    let mut hashes = vec![u64::MAX; params.k];
    for i in 0..=len - params.shingle_n {
        let base = fnv1a(&text.as_bytes()[bounds[i]..bounds[i + params.shingle_n]]);
        for (h, salt) in hashes.iter_mut().zip(&salts) {
            *h = (*h).min(mix(base ^ salt));
        }
    }
    Ok(MinHashSignature {
        hashes,
        shingle_n: params.shingle_n,
        seed: params.seed,
    })
}

pub fn minhash(doc: &DocRecord, params: &MinHashParams) -> Result<MinHashSignature> {
    minhash_text(&doc.text, params)
}

/// Fraction of positions where the two signatures agree.
pub fn estimate_jaccard(a: &MinHashSignature, b: &MinHashSignature) -> Result<f64> {
    if a.hashes.len() != b.hashes.len() || a.shingle_n != b.shingle_n || a.seed != b.seed {
        return Err(Error::InvalidArgument(
            "signatures were built with different parameters".into(),
        ));
    }
    Ok(agreement(&a.hashes, &b.hashes))
}

fn agreement(a: &[u64], b: &[u64]) -> f64 {
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same as f64 / a.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupParams {
    pub minhash: MinHashParams,
    pub bands: usize,
    pub threshold: f64,
}

impl DedupParams {
    pub fn new(minhash: MinHashParams, bands: usize, threshold: f64) -> Result<Self> {
        if bands == 0 || !minhash.k.is_multiple_of(bands) {
            return Err(Error::Config(format!(
                "{bands} bands do not divide k = {}",
                minhash.k
            )));
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!(
                "threshold {threshold} is outside [0, 1]"
            )));
        }
        Ok(DedupParams {
            minhash,
            bands,
            threshold,
        })
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    // The smaller index becomes the root, so roots are cluster minima.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Near-duplicate removal. Candidate pairs come from LSH banding and are
/// linked when their estimated Jaccard reaches the threshold; each cluster
/// keeps its earliest document. Documents too short to shingle are only
/// matched by exact id.
pub fn dedup(docs: Vec<DocRecord>, params: &DedupParams) -> Result<Vec<DocRecord>> {
    let DedupParams {
        minhash: mh,
        bands,
        threshold,
    } = *params;
    DedupParams::new(mh, bands, threshold)?;

    let sigs: Vec<Option<Vec<u64>>> = docs
        .par_iter()
        .map(|d| match minhash_text(&d.text, &mh) {
            Ok(s) => Ok(Some(s.hashes)),
            Err(Error::TooShort { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let mut uf = UnionFind((0..docs.len()).collect());
    let mut first_by_id: HashMap<&str, usize> = HashMap::new();
    for (i, d) in docs.iter().enumerate() {
        match first_by_id.get(d.id.as_str()) {
            Some(&j) => uf.union(i, j),
            None => {
                first_by_id.insert(&d.id, i);
            }
        }
    }

    let rows = mh.k / bands;
    let mut checked: HashSet<(usize, usize)> = HashSet::new();
    for b in 0..bands {
        let mut buckets: HashMap<&[u64], Vec<usize>> = HashMap::new();
        for (i, s) in sigs.iter().enumerate() {
            if let Some(s) = s {
                buckets
                    .entry(&s[b * rows..(b + 1) * rows])
                    .or_default()
                    .push(i);
            }
        }
        let mut groups: Vec<Vec<usize>> = buckets.into_values().filter(|g| g.len() > 1).collect();
        groups.sort_unstable();
        for g in groups {
            for (x, &i) in g.iter().enumerate() {
                for &j in &g[x + 1..] {
                    if !checked.insert((i, j)) {
                        continue;
                    }
                    let (si, sj) = (sigs[i].as_ref().unwrap(), sigs[j].as_ref().unwrap());
                    if agreement(si, sj) >= threshold {
                        uf.union(i, j);
                    }
                }
            }
        }
    }

    let keep: Vec<bool> = (0..docs.len()).map(|i| uf.find(i) == i).collect();
    Ok(docs
        .into_iter()
        .zip(keep)
        .filter_map(|(d, k)| k.then_some(d))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MinHashParams {
        MinHashParams::new(128, 5, 42).unwrap()
    }

    #[test]
    fn identical_texts_agree() {
        let a = minhash_text("the same words in the same order", &params()).unwrap();
        let b = minhash_text("the same words in the same order", &params()).unwrap();
        assert_eq!(a, b);
        assert_eq!(estimate_jaccard(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_texts_rarely_agree() {
        let a = minhash_text("abcdefghijklmnopqrstuvwxyz", &params()).unwrap();
        let b = minhash_text("가나다라마바사아자차카타파하", &params()).unwrap();
        assert!(estimate_jaccard(&a, &b).unwrap() < 0.05);
    }

    #[test]
    fn short_text_and_bad_params() {
        assert!(matches!(
            minhash_text("abcd", &params()),
            Err(Error::TooShort {
                len: 4,
                shingle_n: 5
            })
        ));
        assert!(MinHashParams::new(8, 5, 0).is_err());
        assert!(DedupParams::new(params(), 12, 0.8).is_err());
        let other = minhash_text("abcdefg", &MinHashParams::new(128, 5, 1).unwrap()).unwrap();
        let mine = minhash_text("abcdefg", &params()).unwrap();
        assert!(estimate_jaccard(&mine, &other).is_err());
    }

    #[test]
    fn dedup_keeps_first_and_order() {
        let p = DedupParams::new(params(), 16, 0.8).unwrap();
        let docs: Vec<DocRecord> = [
            "alpha beta gamma delta",
            "tiny",
            "alpha beta gamma delta",
            "tiny",
            "something else entirely",
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| DocRecord::new(*t, format!("s{i}")))
        .collect();
        let out = dedup(docs, &p).unwrap();
        let sources: Vec<&str> = out.iter().map(|d| d.source.as_str()).collect();
        assert_eq!(sources, vec!["s0", "s1", "s4"]);
    }
}
