//! Byte-level BPE: vocabulary, deterministic encode/decode, training and
//! StoChasTok re-tokenization.
//!
//! Ids `0..256` are the single-byte base tokens and are always active. Every
//! other active id is the result of exactly one merge rule. Ranks are unique
//! but need not be contiguous: adaptation leaves vacated slots behind.

mod encode;
mod io;
mod stochastic;
mod train;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use encode::Decoded;
pub use stochastic::StochasticConfig;
pub use train::{train, train_with, TrainOutcome};

/// Number of single-byte base tokens.
pub const BASE_TOKENS: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

impl TokenId {
    pub fn is_base(self) -> bool {
        self.0 < BASE_TOKENS
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `left ++ right -> result`, firing at priority `rank` (lower fires first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MergeRule {
    pub left: TokenId,
    pub right: TokenId,
    pub result: TokenId,
    pub rank: u32,
}

#[derive(Debug, Clone)]
pub struct Vocab {
    /// Indexed by id; `None` marks a retired id.
    tokens: Vec<Option<Vec<u8>>>,
    merges: BTreeMap<u32, MergeRule>,
    pair_index: HashMap<(TokenId, TokenId), (u32, TokenId)>,
    producer: HashMap<TokenId, u32>,
    by_bytes: HashMap<Vec<u8>, TokenId>,
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens && self.merges == other.merges
    }
}

impl Eq for Vocab {}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::base()
    }
}

impl Vocab {
    /// The 256 byte tokens and no merges.
    pub fn base() -> Vocab {
        let tokens = (0..BASE_TOKENS).map(|b| Some(vec![b as u8])).collect();
        Vocab::from_parts(tokens, Vec::new()).expect("base vocabulary is valid")
    }

    /// Builds a vocabulary from raw parts and checks every structural invariant.
    pub fn from_parts(tokens: Vec<Option<Vec<u8>>>, merges: Vec<MergeRule>) -> Result<Vocab> {
        let mut map = BTreeMap::new();
        for m in merges {
            if map.insert(m.rank, m).is_some() {
                return Err(Error::InvalidVocab(format!("duplicate rank {}", m.rank)));
            }
        }
        let vocab = Vocab::assemble(tokens, map);
        vocab.validate()?;
        Ok(vocab)
    }

    fn assemble(mut tokens: Vec<Option<Vec<u8>>>, merges: BTreeMap<u32, MergeRule>) -> Vocab {
        // Trailing retired ids are not part of the id space.
        while tokens.len() > BASE_TOKENS as usize && tokens.last().is_some_and(|t| t.is_none()) {
            tokens.pop();
        }
        let mut pair_index = HashMap::with_capacity(merges.len());
        let mut producer = HashMap::with_capacity(merges.len());
        for m in merges.values() {
            pair_index.insert((m.left, m.right), (m.rank, m.result));
            producer.insert(m.result, m.rank);
        }
        let by_bytes = tokens
            .iter()
            .enumerate()
            .filter_map(|(id, b)| b.as_ref().map(|b| (b.clone(), TokenId(id as u32))))
            .collect();
        Vocab {
            tokens,
            merges,
            pair_index,
            producer,
            by_bytes,
        }
    }

    /// Builds a vocabulary by appending merges of existing byte strings at
    /// consecutive ranks starting from 0. Handy for fixtures.
    pub fn from_byte_merges<L, R>(pairs: &[(L, R)]) -> Result<Vocab>
    where
        L: AsRef<[u8]>,
        R: AsRef<[u8]>,
    {
        let mut vocab = Vocab::base();
        for (l, r) in pairs {
            vocab = vocab.with_appended_merge(l.as_ref(), r.as_ref())?;
        }
        Ok(vocab)
    }

    /// Returns a copy with one more merge at `max_rank + 1` and a fresh id.
    pub fn with_appended_merge(&self, left: &[u8], right: &[u8]) -> Result<Vocab> {
        let missing = |b: &[u8]| Error::InvalidArgument(format!("no active token for bytes {b:?}"));
        let l = self.token_id(left).ok_or_else(|| missing(left))?;
        let r = self.token_id(right).ok_or_else(|| missing(right))?;
        let rank = self.merges.keys().next_back().map_or(0, |r| r + 1);
        let result = TokenId(self.tokens.len() as u32);
        let mut tokens = self.tokens.clone();
        tokens.push(Some([left, right].concat()));
        let mut merges: Vec<MergeRule> = self.merges.values().copied().collect();
        merges.push(MergeRule {
            left: l,
            right: r,
            result,
            rank,
        });
        Vocab::from_parts(tokens, merges)
    }

    /// Merge rules in ascending rank order.
    pub fn merges(&self) -> impl DoubleEndedIterator<Item = &MergeRule> + '_ {
        self.merges.values()
    }

    pub fn merge_count(&self) -> usize {
        self.merges.len()
    }

    pub fn merge_at(&self, rank: u32) -> Option<&MergeRule> {
        self.merges.get(&rank)
    }

    /// The merge that produces `id`, if `id` is an active non-base token.
    pub fn merge_producing(&self, id: TokenId) -> Option<&MergeRule> {
        self.producer.get(&id).and_then(|r| self.merges.get(r))
    }

    /// Rank of the merge producing `id`; `None` for base tokens and inactive ids.
    pub fn producer_rank(&self, id: TokenId) -> Option<u32> {
        self.producer.get(&id).copied()
    }

    pub(crate) fn pair_merge(&self, left: TokenId, right: TokenId) -> Option<(u32, TokenId)> {
        self.pair_index.get(&(left, right)).copied()
    }

    /// Number of active tokens, base bytes included.
    pub fn len(&self) -> usize {
        self.by_bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_bytes.is_empty()
    }

    /// One past the largest id ever allocated (active or retired).
    pub fn id_capacity(&self) -> u32 {
        self.tokens.len() as u32
    }

    pub fn is_active(&self, id: TokenId) -> bool {
        self.tokens
            .get(id.0 as usize)
            .map(|t| t.is_some())
            .unwrap_or(false)
    }

    /// Active ids in ascending order.
    pub fn active_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .map(|(i, _)| TokenId(i as u32))
    }

    /// Retired (inactive) ids below [`Vocab::id_capacity`], ascending.
    pub fn retired_ids(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_none())
            .map(|(i, _)| TokenId(i as u32))
    }

    /// Byte string of an active token.
    pub fn token_string(&self, id: TokenId) -> Result<&[u8]> {
        self.tokens
            .get(id.0 as usize)
            .and_then(|t| t.as_deref())
            .ok_or(Error::InvalidToken(id.0))
    }

    pub fn token_id(&self, bytes: &[u8]) -> Option<TokenId> {
        self.by_bytes.get(bytes).copied()
    }

    pub(crate) fn raw_tokens(&self) -> &[Option<Vec<u8>>] {
        &self.tokens
    }

    /// Checks dependency order, byte concatenation, injectivity and the
    /// one-merge-per-token rule.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidVocab(msg));
        if self.tokens.len() < BASE_TOKENS as usize {
            return bad("fewer than 256 ids".into());
        }
        for b in 0..BASE_TOKENS {
            if self.tokens[b as usize].as_deref() != Some(&[b as u8][..]) {
                return bad(format!("base token {b} is not the single byte {b:#04x}"));
            }
        }
        let mut seen = HashMap::with_capacity(self.tokens.len());
        for (id, t) in self.tokens.iter().enumerate() {
            if let Some(bytes) = t {
                if bytes.is_empty() {
                    return bad(format!("token {id} is empty"));
                }
                if let Some(prev) = seen.insert(bytes.as_slice(), id) {
                    return bad(format!("tokens {prev} and {id} share a byte string"));
                }
            }
        }
        let mut produced: HashMap<TokenId, u32> = HashMap::new();
        for m in self.merges.values() {
            if m.result.is_base() {
                return bad(format!("rank {} produces base token {}", m.rank, m.result));
            }
            let (Ok(l), Ok(r), Ok(res)) = (
                self.token_string(m.left),
                self.token_string(m.right),
                self.token_string(m.result),
            ) else {
                return bad(format!("rank {} references an inactive id", m.rank));
            };
            if [l, r].concat() != res {
                return bad(format!(
                    "rank {}: result bytes are not left ++ right",
                    m.rank
                ));
            }
            for operand in [m.left, m.right] {
                if !operand.is_base() {
                    match produced.get(&operand) {
                        Some(&pr) if pr < m.rank => {}
                        _ => {
                            return bad(format!(
                                "rank {}: operand {} is not produced at a lower rank",
                                m.rank, operand
                            ))
                        }
                    }
                }
            }
            if produced.insert(m.result, m.rank).is_some() {
                return bad(format!("token {} is produced by two merges", m.result));
            }
        }
        for (id, t) in self.tokens.iter().enumerate().skip(BASE_TOKENS as usize) {
            if t.is_some() && !produced.contains_key(&TokenId(id as u32)) {
                return bad(format!("active token {id} has no producing merge"));
            }
        }
        Ok(())
    }
}
