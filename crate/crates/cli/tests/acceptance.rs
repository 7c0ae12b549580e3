//! Acceptance run over the whole toolkit.
//!
//! Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unicode_general_category::{get_general_category, GeneralCategory};
use vocadapt::adapt::{
    adapt_observed, degradation, prune, substitute, AdaptConfig, AdaptationPlan, DonorMerge,
    PlanStatus,
};
use vocadapt::bench::{compression_rate, report, DomainCorpus};
use vocadapt::bpe::StochasticConfig;
use vocadapt::chatml::{parse_messages, parse_messages_with, render, render_with};
use vocadapt::corpus::{classifier_eval, dedup};
use vocadapt::script::{classify_char, pretokenize};
use vocadapt::{ScriptClass, Vocab};
use vocadapt_testkit::cases::{
    dedup_params, minhash_trial, plant_scores, planted_dedup, records, CONFUSIONS,
    JACCARD_CONSTRUCTIONS,
};
use vocadapt_testkit::chat::template_cases;
use vocadapt_testkit::fixtures::{self, bilingual_domain, bilingual_vocab, BILINGUAL_DOMAINS};
use vocadapt_testkit::gen::{
    conversation, mixed_string, random_alphabet_text, random_vocab, sample_vocab, unicode_string,
};
use vocadapt_testkit::oracle::{chars_and_tokens, closure, confusion, dangling, naive_encode};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

/// `n` values drawn from `strategy` with a fixed seed.
fn samples<S: Strategy>(strategy: S, n: usize, seed: u8) -> Vec<S::Value> {
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy").current())
        .collect()
}

fn mixed_corpus() -> Vec<String> {
    samples(mixed_string(32), 1000, 1)
}

fn unicode_corpus() -> Vec<String> {
    let mut v = samples(unicode_string(32), 10_000, 2);
    // make sure every required family appears at least once
    v.push("한국어 東京 🙂\u{0}\u{7}\t\r\n\u{1F}\u{7F}\u{85}\u{2028} e\u{301}".into());
    v
}

fn bpe_oracle() -> Outcome {
    let v = sample_vocab();
    let corpus = mixed_corpus();
    let mismatches = corpus
        .iter()
        .filter(|s| v.encode(s) != naive_encode(v, s))
        .count();
    ensure!(
        mismatches == 0,
        "{mismatches}/{} mixed strings differ from the oracle",
        corpus.len()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut random_cases = 0;
    for _ in 0..200 {
        let rv = random_vocab(&mut rng, 30);
        for len in [0, 1, 5, 17, 32] {
            let s = random_alphabet_text(&mut rng, len);
            ensure!(
                rv.encode(&s) == naive_encode(&rv, &s),
                "random vocab mismatch on {s:?}"
            );
            random_cases += 1;
        }
    }
    Ok(format!(
        "{} mixed strings and {random_cases} random-vocab cases, 0 mismatches",
        corpus.len()
    ))
}

fn round_trip() -> Outcome {
    let corpus = unicode_corpus();
    let base8k = bilingual_vocab("base-8k");
    let mut failures = 0;
    for v in [sample_vocab(), &base8k] {
        for s in &corpus {
            match v.decode(&v.encode(s)) {
                Ok(d) if !d.lossy && d.text == *s => {}
                _ => failures += 1,
            }
        }
    }
    ensure!(failures == 0, "{failures} round-trip failures");
    Ok(format!(
        "{} strings through 2 vocabularies, 0 failures",
        corpus.len()
    ))
}

fn pretokenizer_laws() -> Outcome {
    let corpus: Vec<String> = mixed_corpus().into_iter().chain(unicode_corpus()).collect();
    for s in &corpus {
        let pieces = pretokenize(s);
        ensure!(pieces.concat() == *s, "lossy on {s:?}");
        for p in &pieces {
            let mut classes: Vec<ScriptClass> = p
                .chars()
                .map(classify_char)
                .filter(|c| *c != ScriptClass::Whitespace)
                .collect();
            classes.dedup();
            ensure!(classes.len() <= 1, "piece {p:?} spans {classes:?}");
            let digits = p
                .chars()
                .filter(|&c| classify_char(c) == ScriptClass::Digit)
                .count();
            ensure!(digits <= 1, "piece {p:?} holds {digits} digits");
        }
    }
    let mut scalars = 0u32;
    for ch in (0..=0x10FFFFu32).filter_map(char::from_u32) {
        let class = classify_char(ch);
        let nd = get_general_category(ch) == GeneralCategory::DecimalNumber;
        ensure!(
            (class == ScriptClass::Digit) == nd,
            "{ch:?} classified {class:?}"
        );
        ensure!(
            !ch.is_whitespace() || class == ScriptClass::Whitespace,
            "{ch:?} classified {class:?}"
        );
        scalars += 1;
    }
    ensure!(scalars == 1_112_064, "visited {scalars} scalars");
    Ok(format!(
        "{} strings; all {scalars} scalar values classified",
        corpus.len()
    ))
}

struct AdaptFixture {
    cfg: AdaptConfig,
    targets: Vec<DomainCorpus>,
    guards: Vec<DomainCorpus>,
    reference: Vec<String>,
}

fn adapt_fixture() -> AdaptFixture {
    let file: toml::Table = fixtures::read("bilingual/adapt.toml")
        .parse()
        .expect("adapt.toml");
    let domains = |key: &str| -> Vec<DomainCorpus> {
        file[key]
            .as_array()
            .expect("domain list")
            .iter()
            .map(|p| bilingual_domain(p.as_str().unwrap().trim_start_matches("domains/")))
            .collect()
    };
    let reference = file["reference"]
        .as_array()
        .expect("reference list")
        .iter()
        .flat_map(|p| fixtures::jsonl_texts(&format!("bilingual/{}", p.as_str().unwrap())))
        .collect();
    let cfg = AdaptConfig {
        target_script: file["target_script"]
            .as_str()
            .unwrap()
            .parse()
            .expect("script"),
        utility_budget: file["utility_budget"].as_integer().unwrap() as usize,
        guard_threshold: file["guard_threshold"].as_float().unwrap(),
        batch_size: file["batch_size"].as_integer().unwrap() as usize,
    };
    AdaptFixture {
        cfg,
        targets: domains("target_domains"),
        guards: domains("guard_domains"),
        reference,
    }
}

fn oracle_rate(v: &Vocab, d: &DomainCorpus) -> f64 {
    let (chars, tokens) = chars_and_tokens(v, &d.docs);
    chars as f64 / tokens as f64
}

fn adaptation() -> Outcome {
    let fx = adapt_fixture();
    ensure!(
        fx.cfg.guard_threshold == 0.01,
        "fixture threshold is {}",
        fx.cfg.guard_threshold
    );
    let base = bilingual_vocab("base-8k");
    let donor = DonorMerge::from_vocab(&bilingual_vocab("donor-2k"));
    let mut stages = Vec::new();
    let mut invalid = Vec::new();
    let (adapted, plan) = adapt_observed(
        &base,
        &donor,
        &fx.cfg,
        &fx.targets,
        &fx.guards,
        &fx.reference,
        |stage, v| {
            if let Err(e) = v.validate() {
                invalid.push(format!("{stage}: {e}"));
            }
            stages.push(stage.to_string());
        },
    )
    .map_err(|e| e.to_string())?;
    ensure!(invalid.is_empty(), "invalid vocabulary after {invalid:?}");
    ensure!(stages.len() >= 3, "only observed stages {stages:?}");
    adapted
        .validate()
        .map_err(|e| format!("final vocabulary: {e}"))?;
    plan.validate().map_err(|e| format!("plan: {e}"))?;
    let plan_back = AdaptationPlan::from_json(&plan.to_json()).map_err(|e| e.to_string())?;
    ensure!(plan_back == plan, "plan JSON does not round-trip");
    ensure!(plan.status == PlanStatus::Accepted, "plan rejected");

    let baseline: serde_json::Value =
        serde_json::from_str(&fixtures::read("bilingual/baseline.json")).unwrap();
    let floor = baseline["ko-general"]["improvement"].as_f64().unwrap();
    ensure!(
        floor >= 0.10,
        "recorded baseline {floor} below the expected 10%"
    );

    let ko = bilingual_domain("ko-general");
    let (before, after) = (oracle_rate(&base, &ko), oracle_rate(&adapted, &ko));
    let gain = (after - before) / before;
    ensure!(
        gain >= floor,
        "ko-general improvement {gain:.4} < baseline {floor}"
    );
    ensure!(
        (plan.target_gains["ko-general"].improvement - gain).abs() < 1e-12,
        "plan reports {} but the oracle measures {gain}",
        plan.target_gains["ko-general"].improvement
    );

    let target_names: BTreeSet<&str> = fx.targets.iter().map(|d| d.name.as_str()).collect();
    let mut worst = f64::NEG_INFINITY;
    for name in BILINGUAL_DOMAINS
        .iter()
        .filter(|n| !target_names.contains(*n))
    {
        let d = bilingual_domain(name);
        let deg = degradation(oracle_rate(&base, &d), oracle_rate(&adapted, &d));
        ensure!(deg < 0.01, "{name} degrades by {deg:.5}");
        worst = worst.max(deg);
    }
    Ok(format!(
        "ko-general {:+.2}% (baseline {:+.2}%), worst non-target degradation {:.3}%, {} stages valid",
        gain * 100.0,
        floor * 100.0,
        worst * 100.0,
        stages.len()
    ))
}

fn structural_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let set = |xs: &[u32]| xs.iter().copied().collect::<BTreeSet<u32>>();
    for case in 0..100 {
        let n = rng.gen_range(5..40);
        let v = random_vocab(&mut rng, n);
        let ranks: Vec<u32> = v.merges().map(|m| m.rank).collect();
        let a: BTreeSet<u32> = ranks
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.15))
            .collect();
        let b: BTreeSet<u32> = ranks
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.15))
            .collect();
        let (pruned, vacated) = prune(&v, &a).map_err(|e| e.to_string())?;
        ensure!(
            set(&vacated) == closure(&v, &a),
            "case {case}: closure differs from the oracle"
        );
        ensure!(
            dangling(&pruned).is_empty(),
            "case {case}: dangling merges {:?}",
            dangling(&pruned)
        );
        let ab: BTreeSet<u32> = a.union(&b).copied().collect();
        let (_, vacated_ab) = prune(&v, &ab).map_err(|e| e.to_string())?;
        ensure!(
            set(&vacated_ab).is_superset(&set(&vacated)),
            "case {case}: prune not monotone"
        );

        let donor = DonorMerge::from_vocab(&random_vocab(&mut rng, 20));
        let (out, sub) = substitute(&pruned, &donor, &vacated).map_err(|e| e.to_string())?;
        out.validate().map_err(|e| format!("case {case}: {e}"))?;
        ensure!(
            dangling(&out).is_empty(),
            "case {case}: dangling after substitution"
        );
        let slots = set(&vacated);
        ensure!(
            sub.inserted.iter().all(|i| slots.contains(&i.rank)),
            "case {case}: insertion outside vacated ranks"
        );
        ensure!(
            out.merges().all(|m| ranks.contains(&m.rank)),
            "case {case}: new rank created"
        );
    }
    Ok("100 random vocabularies: closure, slot discipline and monotonicity hold".into())
}

fn stochastic() -> Outcome {
    let v = sample_vocab();
    let corpus = unicode_corpus();
    for (i, s) in corpus.iter().enumerate() {
        let seed = i as u64;
        ensure!(
            v.encode_stochastic(s, &StochasticConfig::new(0.0, seed).unwrap()) == v.encode(s),
            "p=0 differs from encode on {s:?}"
        );
        for p in [0.0, 0.1, 1.0] {
            let ids = v.encode_stochastic(s, &StochasticConfig::new(p, seed).unwrap());
            ensure!(
                v.decode(&ids).is_ok_and(|d| d.text == *s),
                "p={p} changes {s:?}"
            );
        }
    }

    let base = bilingual_vocab("base-8k");
    let text: String = ["ko-general", "en-general"]
        .iter()
        .flat_map(|d| bilingual_domain(d).docs)
        .collect::<Vec<_>>()
        .join("\n");
    let ids = base.encode(&text.repeat(3));
    let mergeable = ids
        .iter()
        .filter(|&&t| base.merge_producing(t).is_some())
        .count();
    ensure!(mergeable >= 100_000, "only {mergeable} mergeable tokens");
    let mut observed = Vec::new();
    for p in [0.1, 0.5] {
        let out = base.split_tokens(&ids, &StochasticConfig::new(p, 20240601).unwrap());
        let frac = (out.len() - ids.len()) as f64 / mergeable as f64;
        ensure!((frac - p).abs() <= 0.02, "p={p}: split fraction {frac:.4}");
        observed.push(format!("p={p} -> {frac:.4}"));
    }
    Ok(format!(
        "{} strings; {mergeable} mergeable tokens, {}",
        corpus.len(),
        observed.join(", ")
    ))
}

fn minhash() -> Outcome {
    let mut parts = Vec::new();
    for (shared, distinct, j) in JACCARD_CONSTRUCTIONS {
        let trials: Vec<(f64, f64)> = (0..1000)
            .map(|t| minhash_trial(shared, distinct, t))
            .collect();
        ensure!(
            trials.iter().all(|(exact, _)| *exact == j),
            "construction for J={j} is not exact"
        );
        let close = trials[..500]
            .iter()
            .filter(|(_, est)| (est - j).abs() <= 0.1)
            .count();
        let mean = trials.iter().map(|(_, est)| est).sum::<f64>() / 1000.0;
        ensure!(close >= 475, "J={j}: {close}/500 trials within 0.1");
        ensure!((mean - j).abs() <= 0.02, "J={j}: mean estimate {mean:.4}");
        parts.push(format!("J={j}: {close}/500, mean {mean:.4}"));
    }
    Ok(parts.join("; "))
}

fn dedup_criterion() -> Outcome {
    let r = planted_dedup(8);
    ensure!(
        r.min_pair_jaccard >= 0.9,
        "planted pair at Jaccard {}",
        r.min_pair_jaccard
    );
    ensure!(
        r.max_decoy_jaccard <= 0.3,
        "decoy at Jaccard {}",
        r.max_decoy_jaccard
    );
    ensure!(
        r.collapsed >= 19,
        "{}/20 planted pairs collapsed",
        r.collapsed
    );
    ensure!(
        r.decoys_collapsed == 0,
        "{} decoys collapsed",
        r.decoys_collapsed
    );
    ensure!(r.idempotent, "second dedup pass changed the output");

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let uniques: Vec<String> = (0..8)
            .map(|i| {
                let len = rng.gen_range(0..40);
                format!("{i}:{}", random_alphabet_text(&mut rng, len))
            })
            .collect();
        let mut texts = uniques.clone();
        for _ in 0..8 {
            texts.push(uniques[rng.gen_range(0..8)].clone());
        }
        let kept: Vec<String> = dedup(records(&texts), &dedup_params())
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|d| d.text)
            .collect();
        ensure!(kept == uniques, "exact duplicates survived: {kept:?}");
    }
    Ok(format!(
        "{}/20 pairs collapsed, 0 decoys, idempotent; exact duplicates collapse in 50 corpora",
        r.collapsed
    ))
}

fn classifier_metrics() -> Outcome {
    for (tp, fp, tn, fn_, accuracy, recall) in CONFUSIONS {
        let (preds, labels) = plant_scores(tp, fp, tn, fn_);
        ensure!(
            confusion(&preds, &labels) == (tp, fp, tn, fn_),
            "planted scores miscount"
        );
        let r = classifier_eval(&preds, &labels).map_err(|e| e.to_string())?;
        let counts = (r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn_);
        ensure!(
            counts == (tp, fp, tn, fn_),
            "counts {counts:?} != {:?}",
            (tp, fp, tn, fn_)
        );
        ensure!(
            r.accuracy == accuracy,
            "accuracy {} != {accuracy}",
            r.accuracy
        );
        ensure!(
            r.low_quality_recall == recall,
            "recall {:?} != {recall:?}",
            r.low_quality_recall
        );
    }
    Ok(format!("{} confusion fixtures exact", CONFUSIONS.len()))
}

const BENCH_GOLDEN: &str = "\
Tokenizer  English              Korean
           General  Code  STEM  General  STEM
---------------------------------------------
base-8k    3.26     2.13  2.79  1.63     1.64
donor-2k   1.18     1.12  1.17  2.32     2.09
";

fn compression() -> Outcome {
    let vocabs = [
        ("base-8k", bilingual_vocab("base-8k")),
        ("donor-2k", bilingual_vocab("donor-2k")),
    ];
    // shuffled on purpose; the report orders columns itself
    let domains: Vec<DomainCorpus> = ["ko-stem", "en-code", "en-general", "ko-general", "en-stem"]
        .iter()
        .map(|n| bilingual_domain(n))
        .collect();
    let mut oracle_cells: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for (name, v) in &vocabs {
        for d in &domains {
            let (chars, tokens) = chars_and_tokens(v, &d.docs);
            let r = compression_rate(v, d).map_err(|e| e.to_string())?;
            ensure!(
                (r.chars, r.tokens) == (chars, tokens),
                "{name}/{}: counts differ from the oracle",
                d.name
            );
            oracle_cells.insert((name, d.name.as_str()), chars as f64 / tokens as f64);
            for times in [2, 3] {
                let many = DomainCorpus::from_name(
                    &d.name,
                    d.docs
                        .iter()
                        .cycle()
                        .take(d.docs.len() * times)
                        .cloned()
                        .collect(),
                )
                .unwrap();
                let scaled = compression_rate(v, &many).map_err(|e| e.to_string())?;
                ensure!(
                    scaled.value() == r.value(),
                    "{name}/{}: rate changes under duplication",
                    d.name
                );
            }
        }
    }
    let rows: Vec<(String, &Vocab)> = vocabs.iter().map(|(n, v)| (n.to_string(), v)).collect();
    let table = report(&rows, &domains)
        .map_err(|e| e.to_string())?
        .render_table();
    ensure!(
        table == BENCH_GOLDEN,
        "table differs from the golden:\n{table}"
    );
    for (name, _) in &vocabs {
        let line = table.lines().find(|l| l.starts_with(name)).unwrap();
        let cells: Vec<&str> = line.split_whitespace().skip(1).collect();
        let want: Vec<String> = BILINGUAL_DOMAINS
            .iter()
            .map(|d| format!("{:.2}", oracle_cells[&(*name, *d)]))
            .collect();
        ensure!(cells == want, "{name}: cells {cells:?}, oracle {want:?}");
    }
    Ok("10 cells match the two-pass oracle; invariant under 2x and 3x duplication; table byte-identical".into())
}

fn chat() -> Outcome {
    for case in template_cases() {
        let rendered = render_with(&case.conversation, &case.options).map_err(|e| e.to_string())?;
        ensure!(
            rendered == case.expected,
            "{} template bytes differ",
            case.name
        );
        let parsed =
            parse_messages_with(&case.expected, &case.options).map_err(|e| e.to_string())?;
        ensure!(
            parsed == case.conversation,
            "{} template does not parse back",
            case.name
        );
    }
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[11; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    let strategy = conversation();
    let (mut checked, mut drawn, mut multi_call) = (0, 0, 0);
    while checked < 1000 {
        drawn += 1;
        ensure!(
            drawn < 20_000,
            "only {checked} renderable conversations in {drawn} draws"
        );
        let c = strategy.new_tree(&mut runner).expect("strategy").current();
        let Ok(text) = render(&c) else { continue };
        let parsed = parse_messages(&text).map_err(|e| format!("{e} on {text:?}"))?;
        ensure!(
            parsed.messages == c.messages && parsed.tools == c.tools,
            "round trip changed {text:?}"
        );
        ensure!(
            parsed.add_generation_prompt == c.add_generation_prompt,
            "generation prompt lost in {text:?}"
        );
        ensure!(
            render(&parsed).ok().as_deref() == Some(text.as_str()),
            "re-render differs for {text:?}"
        );
        if c.messages.iter().any(|m| m.tool_calls.len() >= 2) {
            multi_call += 1;
        }
        checked += 1;
    }
    ensure!(multi_call > 0, "no multi-call turn was generated");
    Ok(format!("4 templates byte-identical; {checked} conversations round-trip ({multi_call} with multi-call turns)"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vocadapt"))
}

fn run_ok(cmd: &mut Command) -> Result<Vec<u8>, String> {
    let out = cmd
        .stderr(Stdio::piped())
        .stdout(Stdio::piped())
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "{cmd:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(out.stdout)
}

/// Every file under `dir`, relative path to bytes.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    if dir.exists() {
        walk(dir, dir, &mut out);
    }
    out
}

fn adapt_cmd(out: &Path) -> Command {
    let mut c = bin();
    c.args(["--seed", "7", "adapt", "--config"])
        .arg(fixtures::path("bilingual/adapt.toml"))
        .arg("-o")
        .arg(out.join("adapted.json"))
        .arg("--plan")
        .arg(out.join("plan.json"));
    c
}

fn bench_cmd(out: &Path) -> Command {
    let mut c = bin();
    c.args(["--seed", "7", "bench"]);
    for v in ["base-8k", "donor-2k"] {
        c.arg("--vocab").arg(format!(
            "{v}={}",
            fixtures::path(&format!("bilingual/vocab/{v}.json")).display()
        ));
    }
    for d in BILINGUAL_DOMAINS {
        c.arg("--domain")
            .arg(fixtures::path(&format!("bilingual/domains/{d}")));
    }
    c.arg("--json").arg(out.join("bench.json"));
    c
}

fn curate_cmd(out: &Path) -> Command {
    let mut c = bin();
    c.args(["--seed", "7", "curate", "--max-docs-per-shard", "200", "-i"])
        .arg(fixtures::path("bilingual/domains"))
        .arg("-o")
        .arg(out.join("curated"));
    c
}

fn train_cmd(out: &Path) -> Command {
    let mut c = bin();
    c.args(["train", "--vocab-size", "6000", "-o"])
        .arg(out.join("trained.json"))
        .arg("-i")
        .arg(fixtures::path("bilingual/domains"))
        .arg(fixtures::path("bilingual/reference"));
    c
}

/// Interrupts `make(dir)` at spread-out points of its running time and checks
/// that each run leaves either nothing or exactly the complete artifacts.
fn interrupt_runs(
    label: &str,
    make: fn(&Path) -> Command,
    complete: &BTreeMap<PathBuf, Vec<u8>>,
    took: Duration,
) -> Result<String, String> {
    let mut landed = 0;
    let mut killed = 0;
    for (i, frac) in [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.97]
        .into_iter()
        .enumerate()
    {
        for signal in ["INT", "TERM", "KILL"] {
            let dir = tempfile::tempdir().unwrap();
            let mut child = make(dir.path())
                .stdout(Stdio::null())
                .stderr(Stdio::null())
                .spawn()
                .unwrap();
            std::thread::sleep(took.mul_f64(frac) + Duration::from_micros(i as u64 * 37));
            let _ = Command::new("kill")
                .arg(format!("-{signal}"))
                .arg(child.id().to_string())
                .status();
            let status = child.wait().unwrap();
            let mut left = snapshot(dir.path());
            let staged: Vec<PathBuf> = left
                .keys()
                .filter(|p| {
                    p.components()
                        .any(|c| c.as_os_str().to_string_lossy().starts_with(".tmp-"))
                })
                .cloned()
                .collect();
            // SIGKILL cannot be intercepted; only its staged leftovers are tolerated.
            ensure!(
                signal == "KILL" || staged.is_empty(),
                "{label}: SIG{signal} left {staged:?}"
            );
            for p in staged {
                left.remove(&p);
            }
            ensure!(
                left.is_empty() || left == *complete,
                "{label}: SIG{signal} at {:.0}% left partial output {:?}",
                frac * 100.0,
                left.keys().collect::<Vec<_>>()
            );
            if status.success() {
                landed += 1;
            } else {
                killed += 1;
            }
        }
    }
    Ok(format!("{label} {killed} interrupted/{landed} finished"))
}

fn determinism_case(
    label: &str,
    make: fn(&Path) -> Command,
    interrupt: bool,
) -> Result<String, String> {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let out_a = run_ok(&mut make(a.path()))?;
    let took = started.elapsed();
    let out_b = run_ok(&mut make(b.path()))?;
    let (snap_a, snap_b) = (snapshot(a.path()), snapshot(b.path()));
    ensure!(!snap_a.is_empty(), "{label} wrote nothing");
    ensure!(
        snap_a == snap_b && out_a == out_b,
        "{label} artifacts differ between runs"
    );
    if !interrupt {
        return Ok(format!("{label} identical"));
    }
    interrupt_runs(label, make, &snap_a, took)
}

fn cli_determinism() -> Outcome {
    let notes = [
        determinism_case("adapt", adapt_cmd, true)?,
        determinism_case("bench", bench_cmd, false)?,
        determinism_case("curate", curate_cmd, true)?,
        determinism_case("train", train_cmd, true)?,
    ];

    // failed runs leave nothing behind
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["adapt", "--config"])
        .arg(fixtures::path("bilingual/adapt.toml"))
        .arg("-o")
        .arg(dir.path().join("adapted.json"))
        .arg("--plan")
        .arg(dir.path().join("missing").join("plan.json"))
        .stderr(Stdio::null())
        .status()
        .unwrap();
    ensure!(
        !status.success(),
        "adapt into a missing directory succeeded"
    );
    ensure!(
        snapshot(dir.path()).is_empty(),
        "failed adapt left {:?}",
        snapshot(dir.path()).keys()
    );
    let existing = dir.path().join("curated");
    std::fs::create_dir(&existing).unwrap();
    std::fs::write(existing.join("keep.txt"), "x").unwrap();
    let status = curate_cmd(dir.path())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    ensure!(!status.success(), "curate overwrote an existing output");
    ensure!(
        snapshot(dir.path()).len() == 1,
        "refused curate touched the output directory"
    );
    Ok(notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("BPE oracle equivalence", bpe_oracle),
        ("encode/decode round trip", round_trip),
        ("pre-tokenizer laws and class totality", pretokenizer_laws),
        ("adaptation end to end", adaptation),
        ("prune/substitute structural laws", structural_laws),
        ("stochastic splitting", stochastic),
        ("MinHash accuracy", minhash),
        ("near-duplicate removal", dedup_criterion),
        ("classifier metrics", classifier_metrics),
        ("compression metric and table", compression),
        ("chat wire format", chat),
        ("CLI determinism and interruption", cli_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| *f == n.to_string() || name.contains(f.as_str()))
        {
            continue;
        }
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
