//! Test support: brute-force oracles, input generators and fixture access.
//!
//! Oracles here share no code with the crate under test beyond the public
//! `Vocab` accessors and the pre-tokenizer.

pub mod cases;
pub mod chat;
pub mod fixtures;
pub mod gen;
pub mod oracle;
