//! Script-aware byte-level BPE with prune-and-substitute vocabulary
//! adaptation, compression benchmarking, corpus curation and the chat wire
//! format.

pub mod adapt;
pub mod bench;
pub mod bpe;
pub mod chatml;
pub mod corpus;
pub mod error;
pub mod fsutil;
pub mod script;

pub use bpe::{MergeRule, StochasticConfig, TokenId, Vocab};
pub use error::{Error, Result};
pub use script::ScriptClass;
