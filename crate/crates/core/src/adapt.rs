//! Vocabulary adaptation: prune merges for a target script (and low-utility
//! merges elsewhere), then install donor merges into the vacated rank slots.
//!
//! Ranks are never renumbered. A pruned merge leaves a hole at its rank and
//! substitution fills holes in ascending order, so every surviving merge keeps
//! its priority relative to the others.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bench::{compression_rate, DomainCorpus, Rate};
use crate::bpe::{MergeRule, TokenId, Vocab};
use crate::error::{Error, Result};
use crate::script::{classify_char, ScriptClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptConfig {
    pub target_script: ScriptClass,
    /// Maximum number of low-utility merges to remove outside the target script.
    pub utility_budget: usize,
    pub guard_threshold: f64,
    pub batch_size: usize,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            target_script: ScriptClass::Hangul,
            utility_budget: 0,
            guard_threshold: 0.01,
            batch_size: 32,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.guard_threshold > 0.0 && self.guard_threshold < 1.0) {
            return Err(Error::Config(format!(
                "guard_threshold {} is outside (0, 1)",
                self.guard_threshold
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// A donor merge expressed by operand byte strings, so it can be replayed in a
/// vocabulary with a different id space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DonorMerge {
    #[serde(with = "b64_bytes")]
    pub left: Vec<u8>,
    #[serde(with = "b64_bytes")]
    pub right: Vec<u8>,
}

impl DonorMerge {
    pub fn new(left: impl AsRef<[u8]>, right: impl AsRef<[u8]>) -> Self {
        DonorMerge {
            left: left.as_ref().to_vec(),
            right: right.as_ref().to_vec(),
        }
    }

    pub fn result_bytes(&self) -> Vec<u8> {
        [self.left.as_slice(), self.right.as_slice()].concat()
    }

    /// All merges of `donor` in rank order.
    pub fn from_vocab(donor: &Vocab) -> Vec<DonorMerge> {
        donor
            .merges()
            .map(|m| {
                DonorMerge::new(
                    donor.token_string(m.left).expect("valid vocab"),
                    donor.token_string(m.right).expect("valid vocab"),
                )
            })
            .collect()
    }
}

mod b64_bytes {
    use super::*;

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&B64.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        B64.decode(text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneReason {
    TargetScript,
    LowUtility,
    DependencyClosure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    NoSlots,
    Collision,
    OperandUnavailable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub rank: u32,
    pub token: TokenId,
    pub donor_index: usize,
    pub merge: DonorMerge,
    /// Lossy rendering of the new token, for people reading the plan.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub donor_index: usize,
    pub merge: DonorMerge,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub inserted: Vec<Insertion>,
    pub skipped_donor: Vec<Skip>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardResult {
    pub degradation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetGain {
    pub base_rate: f64,
    pub adapted_rate: f64,
    /// Relative change, `(adapted - base) / base`.
    pub improvement: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanStatus {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationPlan {
    pub status: PlanStatus,
    pub target_script: ScriptClass,
    pub guard_threshold: f64,
    pub pruned_ranks: Vec<u32>,
    pub pruned_reason: BTreeMap<u32, PruneReason>,
    pub inserted: Vec<Insertion>,
    pub skipped_donor: Vec<Skip>,
    /// Low-utility batches whose removal failed the guard and was undone.
    pub rolled_back: Vec<Vec<u32>>,
    pub guard_results: BTreeMap<String, f64>,
    pub target_gains: BTreeMap<String, TargetGain>,
}

impl AdaptationPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<AdaptationPlan> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the plan's internal consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("plan: {msg}")));
        if self.pruned_ranks.windows(2).any(|w| w[0] >= w[1]) {
            return bad("pruned_ranks not strictly ascending".into());
        }
        let pruned: BTreeSet<u32> = self.pruned_ranks.iter().copied().collect();
        if self.pruned_reason.keys().copied().collect::<BTreeSet<_>>() != pruned {
            return bad("pruned_reason does not cover exactly the pruned ranks".into());
        }
        if self.inserted.len() > self.pruned_ranks.len() {
            return bad("more insertions than vacated slots".into());
        }
        let mut used = BTreeSet::new();
        for ins in &self.inserted {
            if !pruned.contains(&ins.rank) {
                return bad(format!(
                    "insertion at rank {} which was never vacated",
                    ins.rank
                ));
            }
            if !used.insert(ins.rank) {
                return bad(format!("rank {} filled twice", ins.rank));
            }
        }
        if self.status == PlanStatus::Accepted {
            if let Some((d, v)) = self.guard_results.iter().find(|(_, &v)| {
                v.partial_cmp(&self.guard_threshold) != Some(std::cmp::Ordering::Less)
            }) {
                return bad(format!("accepted plan has degradation {v} on `{d}`"));
            }
        }
        Ok(())
    }
}

/// Ranks of merges whose result contains a complete character of `script`.
///
/// Tokens that are not valid UTF-8 are scanned for the complete characters
/// they do contain; a token made only of partial sequences matches nothing.
pub fn detect_script_rules(vocab: &Vocab, script: ScriptClass) -> BTreeSet<u32> {
    vocab
        .merges()
        .filter(|m| {
            let bytes = vocab.token_string(m.result).expect("valid vocab");
            bytes
                .utf8_chunks()
                .any(|c| c.valid().chars().any(|ch| classify_char(ch) == script))
        })
        .map(|m| m.rank)
        .collect()
}

/// How often each merge fires while encoding a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilityTable {
    pub counts: BTreeMap<u32, u64>,
}

impl UtilityTable {
    pub fn count(&self, rank: u32) -> u64 {
        self.counts.get(&rank).copied().unwrap_or(0)
    }
}

pub fn usage_counts<S: AsRef<str> + Sync>(vocab: &Vocab, corpus: &[S]) -> UtilityTable {
    let fired = corpus
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<u32, u64>, doc| {
            vocab.encode_traced(doc.as_ref(), &mut |r| *acc.entry(r).or_default() += 1);
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let counts = vocab
        .merges()
        .map(|m| (m.rank, fired.get(&m.rank).copied().unwrap_or(0)))
        .collect();
    UtilityTable { counts }
}

/// The requested ranks plus every merge that transitively consumes one of
/// their results. Unknown ranks are ignored.
pub fn prune_closure(vocab: &Vocab, ranks: &BTreeSet<u32>) -> BTreeSet<u32> {
    let mut removed_tokens = BTreeSet::new();
    let mut out = BTreeSet::new();
    // Operands are always produced at lower ranks, so one ascending pass suffices.
    for m in vocab.merges() {
        if ranks.contains(&m.rank)
            || removed_tokens.contains(&m.left)
            || removed_tokens.contains(&m.right)
        {
            out.insert(m.rank);
            removed_tokens.insert(m.result);
        }
    }
    out
}

/// Removes `ranks` and their dependency closure. Surviving merges keep their
/// ranks; the result tokens of removed merges are retired.
pub fn prune(vocab: &Vocab, ranks: &BTreeSet<u32>) -> Result<(Vocab, Vec<u32>)> {
    let closure = prune_closure(vocab, ranks);
    if closure.is_empty() {
        return Ok((vocab.clone(), Vec::new()));
    }
    let mut tokens = vocab.raw_tokens().to_vec();
    let mut merges = Vec::with_capacity(vocab.merge_count() - closure.len());
    for m in vocab.merges() {
        if closure.contains(&m.rank) {
            tokens[m.result.0 as usize] = None;
        } else {
            merges.push(*m);
        }
    }
    let pruned = Vocab::from_parts(tokens, merges).map_err(internal)?;
    Ok((pruned, closure.into_iter().collect()))
}

fn internal(e: Error) -> Error {
    Error::Internal(format!("adaptation produced an invalid vocabulary: {e}"))
}

/// Installs donor merges into vacated slots, in donor order.
///
/// Each donor merge targets the lowest unused slot. It is skipped when there
/// are no slots left, when its result already exists as a token, or when an
/// operand is neither a single byte nor produced by a merge ranked below the
/// slot. New tokens take retired ids in ascending order, then fresh ids.
pub fn substitute(
    vocab: &Vocab,
    donor: &[DonorMerge],
    vacated: &[u32],
) -> Result<(Vocab, Substitution)> {
    let mut tokens = vocab.raw_tokens().to_vec();
    let mut merges: Vec<MergeRule> = vocab.merges().copied().collect();
    let mut by_bytes: HashMap<Vec<u8>, TokenId> = vocab
        .active_ids()
        .map(|id| (vocab.token_string(id).expect("active").to_vec(), id))
        .collect();
    let mut produced_at: HashMap<TokenId, u32> =
        vocab.merges().map(|m| (m.result, m.rank)).collect();
    let mut free_ids = vocab.retired_ids().collect::<Vec<_>>().into_iter();

    let mut slots = vacated.iter().copied().peekable();
    let mut report = Substitution::default();

    for (donor_index, dm) in donor.iter().enumerate() {
        let skip = |reason| Skip {
            donor_index,
            merge: dm.clone(),
            reason,
        };
        let Some(&slot) = slots.peek() else {
            report.skipped_donor.push(skip(SkipReason::NoSlots));
            continue;
        };
        let result_bytes = dm.result_bytes();
        if by_bytes.contains_key(&result_bytes) {
            report.skipped_donor.push(skip(SkipReason::Collision));
            continue;
        }
        let operand = |bytes: &[u8]| -> Option<TokenId> {
            let id = *by_bytes.get(bytes)?;
            if id.is_base() || produced_at.get(&id).is_some_and(|&r| r < slot) {
                Some(id)
            } else {
                None
            }
        };
        let (Some(left), Some(right)) = (operand(&dm.left), operand(&dm.right)) else {
            report
                .skipped_donor
                .push(skip(SkipReason::OperandUnavailable));
            continue;
        };

        let id = free_ids.next().unwrap_or(TokenId(tokens.len() as u32));
        if id.0 as usize == tokens.len() {
            tokens.push(None);
        }
        tokens[id.0 as usize] = Some(result_bytes.clone());
        by_bytes.insert(result_bytes.clone(), id);
        produced_at.insert(id, slot);
        merges.push(MergeRule {
            left,
            right,
            result: id,
            rank: slot,
        });
        slots.next();
        report.inserted.push(Insertion {
            rank: slot,
            token: id,
            donor_index,
            merge: dm.clone(),
            text: String::from_utf8_lossy(&result_bytes).into_owned(),
        });
    }

    let out = Vocab::from_parts(tokens, merges).map_err(internal)?;
    Ok((out, report))
}

/// Relative loss in characters per token; negative when the candidate is better.
pub fn degradation(rate_base: f64, rate_candidate: f64) -> f64 {
    (rate_base - rate_candidate) / rate_base
}

fn rates(vocab: &Vocab, domains: &[DomainCorpus]) -> Result<Vec<Rate>> {
    domains
        .par_iter()
        .map(|d| compression_rate(vocab, d))
        .collect()
}

fn guard_from_rates(
    base: &[Rate],
    candidate: &Vocab,
    domains: &[DomainCorpus],
    threshold: f64,
) -> Result<BTreeMap<String, GuardResult>> {
    let cand = rates(candidate, domains)?;
    Ok(domains
        .iter()
        .zip(base.iter().zip(&cand))
        .map(|(d, (b, c))| {
            let degradation = degradation(b.value(), c.value());
            (
                d.name.clone(),
                GuardResult {
                    degradation,
                    pass: degradation < threshold,
                },
            )
        })
        .collect())
}

/// Compares compression on every domain; a domain passes when its
/// degradation is below `threshold`.
pub fn guard_check(
    base: &Vocab,
    candidate: &Vocab,
    domains: &[DomainCorpus],
    threshold: f64,
) -> Result<BTreeMap<String, GuardResult>> {
    if domains.is_empty() {
        return Err(Error::InvalidArgument(
            "guard needs at least one domain".into(),
        ));
    }
    let base_rates = rates(base, domains)?;
    guard_from_rates(&base_rates, candidate, domains, threshold)
}

fn all_pass(results: &BTreeMap<String, GuardResult>) -> bool {
    results.values().all(|g| g.pass)
}

/// Runs the whole pipeline and returns the adapted vocabulary with its plan.
///
/// When the final guard fails the base vocabulary is returned unchanged and
/// the plan is marked rejected.
pub fn adapt(
    base: &Vocab,
    donor: &[DonorMerge],
    cfg: &AdaptConfig,
    target_corpora: &[DomainCorpus],
    guard_corpora: &[DomainCorpus],
    reference: &[String],
) -> Result<(Vocab, AdaptationPlan)> {
    adapt_observed(
        base,
        donor,
        cfg,
        target_corpora,
        guard_corpora,
        reference,
        |_, _| {},
    )
}

/// [`adapt`] with a callback invoked on every intermediate vocabulary,
/// labelled by pipeline stage.
pub fn adapt_observed(
    base: &Vocab,
    donor: &[DonorMerge],
    cfg: &AdaptConfig,
    target_corpora: &[DomainCorpus],
    guard_corpora: &[DomainCorpus],
    reference: &[String],
    mut observe: impl FnMut(&str, &Vocab),
) -> Result<(Vocab, AdaptationPlan)> {
    cfg.validate()?;
    if guard_corpora.is_empty() {
        return Err(Error::InvalidArgument(
            "guard needs at least one domain".into(),
        ));
    }
    let base_rates = rates(base, guard_corpora)?;

    let mut reasons: BTreeMap<u32, PruneReason> = BTreeMap::new();
    let target = detect_script_rules(base, cfg.target_script);
    let (mut current, vacated) = prune(base, &target)?;
    observe("target-prune", &current);
    for r in vacated {
        let why = if target.contains(&r) {
            PruneReason::TargetScript
        } else {
            PruneReason::DependencyClosure
        };
        reasons.insert(r, why);
    }

    let mut rolled_back = Vec::new();
    if cfg.utility_budget > 0 && !reference.is_empty() {
        let utility = usage_counts(&current, reference);
        let mut ranked: Vec<(u64, u32)> = utility.counts.iter().map(|(&r, &c)| (c, r)).collect();
        ranked.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        let candidates: Vec<u32> = ranked
            .into_iter()
            .take(cfg.utility_budget)
            .map(|(_, r)| r)
            .collect();

        for batch in candidates.chunks(cfg.batch_size) {
            let live: BTreeSet<u32> = batch
                .iter()
                .copied()
                .filter(|r| current.merge_at(*r).is_some())
                .collect();
            if live.is_empty() {
                continue;
            }
            let (trial, vacated) = prune(&current, &live)?;
            let guard = guard_from_rates(&base_rates, &trial, guard_corpora, cfg.guard_threshold)?;
            if all_pass(&guard) {
                for r in vacated {
                    let why = if live.contains(&r) {
                        PruneReason::LowUtility
                    } else {
                        PruneReason::DependencyClosure
                    };
                    reasons.insert(r, why);
                }
                current = trial;
                observe("utility-prune", &current);
            } else {
                rolled_back.push(live.into_iter().collect());
            }
        }
    }

    let pruned_ranks: Vec<u32> = reasons.keys().copied().collect();
    let (adapted, sub) = substitute(&current, donor, &pruned_ranks)?;
    observe("substitute", &adapted);

    let guard = guard_from_rates(&base_rates, &adapted, guard_corpora, cfg.guard_threshold)?;
    let status = if all_pass(&guard) {
        PlanStatus::Accepted
    } else {
        PlanStatus::Rejected
    };
    let result = match status {
        PlanStatus::Accepted => adapted,
        PlanStatus::Rejected => base.clone(),
    };

    let mut target_gains = BTreeMap::new();
    for d in target_corpora {
        let b = compression_rate(base, d)?.value();
        let a = compression_rate(&result, d)?.value();
        target_gains.insert(
            d.name.clone(),
            TargetGain {
                base_rate: b,
                adapted_rate: a,
                improvement: (a - b) / b,
            },
        );
    }

    let plan = AdaptationPlan {
        status,
        target_script: cfg.target_script,
        guard_threshold: cfg.guard_threshold,
        pruned_ranks,
        pruned_reason: reasons,
        inserted: sub.inserted,
        skipped_donor: sub.skipped_donor,
        rolled_back,
        guard_results: guard.into_iter().map(|(k, g)| (k, g.degradation)).collect(),
        target_gains,
    };
    Ok((result, plan))
}
