use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{TokenId, Vocab};
use crate::error::{Error, Result};

/// StoChasTok split probability and generator seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticConfig {
    p: f64,
    seed: u64,
}

impl StochasticConfig {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "split probability {p} is outside [0, 1]"
            )));
        }
        Ok(StochasticConfig { p, seed })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Vocab {
    /// Encodes `text`, then replaces each merged token by the operands of its
    /// defining merge with probability `p`. Only one level is undone, so the
    /// decoded text is unchanged and words never collapse to raw bytes.
    pub fn encode_stochastic(&self, text: &str, cfg: &StochasticConfig) -> Vec<TokenId> {
        let ids = self.encode(text);
        self.split_tokens(&ids, cfg)
    }

    /// The split pass on its own, over an already encoded sequence.
    pub fn split_tokens(&self, ids: &[TokenId], cfg: &StochasticConfig) -> Vec<TokenId> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut out = Vec::with_capacity(ids.len() + ids.len() / 8);
        for &id in ids {
            match self.merge_producing(id) {
                Some(m) if rng.gen::<f64>() < cfg.p => {
                    out.push(m.left);
                    out.push(m.right);
                }
                _ => out.push(id),
            }
        }
        out
    }
}
