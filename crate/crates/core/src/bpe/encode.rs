use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{TokenId, Vocab};
use crate::error::Result;
use crate::script::pretokenize;

/// Result of decoding: the text and whether invalid UTF-8 had to be replaced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub text: String,
    pub lossy: bool,
}

const NONE: usize = usize::MAX;

impl Vocab {
    /// Deterministic encoding: per pretoken, repeatedly fire the lowest-rank
    /// applicable merge (leftmost on ties) until none applies.
    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        let mut out = Vec::with_capacity(text.len() / 2);
        for piece in pretokenize(text) {
            self.encode_piece(piece.as_bytes(), &mut out, &mut |_| {});
        }
        out
    }

    /// Like [`Vocab::encode`] but reports the rank of every merge as it fires.
    pub fn encode_traced(&self, text: &str, on_merge: &mut impl FnMut(u32)) -> Vec<TokenId> {
        let mut out = Vec::new();
        for piece in pretokenize(text) {
            self.encode_piece(piece.as_bytes(), &mut out, on_merge);
        }
        out
    }

    /// Number of tokens `text` encodes to.
    pub fn count_tokens(&self, text: &str) -> usize {
        let mut out = Vec::new();
        let mut n = 0;
        for piece in pretokenize(text) {
            out.clear();
            self.encode_piece(piece.as_bytes(), &mut out, &mut |_| {});
            n += out.len();
        }
        n
    }

    /// Encodes one pretoken with a lazy-deletion heap over a linked list.
    pub(crate) fn encode_piece(
        &self,
        bytes: &[u8],
        out: &mut Vec<TokenId>,
        on_merge: &mut impl FnMut(u32),
    ) {
        let n = bytes.len();
        if n == 0 {
            return;
        }
        if n == 1 {
            out.push(TokenId(bytes[0] as u32));
            return;
        }
        let mut ids: Vec<TokenId> = bytes.iter().map(|&b| TokenId(b as u32)).collect();
        let mut next: Vec<usize> = (1..=n).map(|i| if i == n { NONE } else { i }).collect();
        let mut prev: Vec<usize> = (0..n).map(|i| if i == 0 { NONE } else { i - 1 }).collect();
        let mut alive = vec![true; n];

        // (rank, position of left node, left id, right id)
        let mut heap: BinaryHeap<Reverse<(u32, usize, TokenId, TokenId)>> = BinaryHeap::new();
        for i in 0..n - 1 {
            if let Some((rank, _)) = self.pair_merge(ids[i], ids[i + 1]) {
                heap.push(Reverse((rank, i, ids[i], ids[i + 1])));
            }
        }

        while let Some(Reverse((rank, pos, left, right))) = heap.pop() {
            if !alive[pos] || ids[pos] != left {
                continue;
            }
            let nx = next[pos];
            if nx == NONE || ids[nx] != right {
                continue;
            }
            let Some((_, result)) = self.pair_merge(left, right) else {
                continue;
            };
            on_merge(rank);
            ids[pos] = result;
            alive[nx] = false;
            let after = next[nx];
            next[pos] = after;
            if after != NONE {
                prev[after] = pos;
            }
            let before = prev[pos];
            if before != NONE {
                if let Some((r, _)) = self.pair_merge(ids[before], result) {
                    heap.push(Reverse((r, before, ids[before], result)));
                }
            }
            if after != NONE {
                if let Some((r, _)) = self.pair_merge(result, ids[after]) {
                    heap.push(Reverse((r, pos, result, ids[after])));
                }
            }
        }

        let mut i = 0;
        while i != NONE {
            out.push(ids[i]);
            i = next[i];
        }
    }

    /// Concatenated bytes of `ids`.
    pub fn decode_bytes(&self, ids: &[TokenId]) -> Result<Vec<u8>> {
        let mut buf = Vec::with_capacity(ids.len() * 3);
        for &id in ids {
            buf.extend_from_slice(self.token_string(id)?);
        }
        Ok(buf)
    }

    /// Decodes `ids` to text. Invalid UTF-8 becomes U+FFFD and sets `lossy`.
    pub fn decode(&self, ids: &[TokenId]) -> Result<Decoded> {
        let buf = self.decode_bytes(ids)?;
        Ok(match String::from_utf8(buf) {
            Ok(text) => Decoded { text, lossy: false },
            Err(e) => Decoded {
                text: String::from_utf8_lossy(e.as_bytes()).into_owned(),
                lossy: true,
            },
        })
    }
}
