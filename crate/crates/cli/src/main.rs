mod config;
mod input;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vocadapt::adapt::{self, DonorMerge};
use vocadapt::bench;
use vocadapt::bpe::{self, StochasticConfig, TokenId, Vocab};
use vocadapt::chatml::{self, ChatMessage, Conversation, Mode, ToolSpec, WireOptions};
use vocadapt::corpus::{self, read_input_dir};
use vocadapt::fsutil::{self, StagingDir};
use vocadapt::script::ScriptClass;

use crate::config::{load_config, AdaptFile};
use crate::input::{load_domain, load_many, read_text, write_output};

#[derive(Parser)]
#[command(
    name = "vocadapt",
    version,
    about = "Byte-level BPE training, vocabulary adaptation and corpus tooling"
)]
struct Cli {
    /// Seed for every stochastic step (split sampling, MinHash).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a vocabulary on text files, directories or JSON lines.
    Train(TrainArgs),
    /// Encode text to newline-separated token ids.
    Encode(EncodeArgs),
    /// Decode token ids back to text.
    Decode(DecodeArgs),
    /// Prune a base vocabulary and substitute donor merges.
    Adapt(AdaptArgs),
    /// Characters-per-token table for vocabularies over domains.
    Bench(BenchArgs),
    /// Normalize, filter, mask, deduplicate and shard a corpus.
    Curate(CurateArgs),
    /// Render a conversation to chat wire text (or parse it back).
    Render(RenderArgs),
    /// Summarize a vocabulary file.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, short, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long)]
    vocab_size: usize,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    vocab: PathBuf,
    /// Read from this file instead of stdin.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Split probability for stochastic encoding.
    #[arg(long)]
    split_p: Option<f64>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AdaptArgs {
    /// TOML or JSON file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long)]
    donor: Option<PathBuf>,
    #[arg(long)]
    target_script: Option<ScriptClass>,
    #[arg(long)]
    utility_budget: Option<usize>,
    #[arg(long)]
    guard_threshold: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long = "guard-domain")]
    guard_domains: Vec<PathBuf>,
    #[arg(long = "target-domain")]
    target_domains: Vec<PathBuf>,
    #[arg(long)]
    reference: Vec<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    plan: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// `NAME=PATH`, or a path whose file stem names the row.
    #[arg(long, required = true)]
    vocab: Vec<String>,
    /// Directory or file named `{lang}-{category}`.
    #[arg(long, required = true)]
    domain: Vec<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct CurateArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Created by the run; must not exist yet.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    max_docs_per_shard: Option<usize>,
    #[arg(long)]
    dedup_threshold: Option<f64>,
    #[arg(long)]
    no_dedup: bool,
    #[arg(long)]
    no_mask: bool,
    #[arg(long)]
    score_missing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Reasoning,
    NonReasoning,
}

#[derive(Args)]
struct RenderArgs {
    /// Conversation JSON: an object, or a bare array of messages.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Mode for a bare message array.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Tool declarations (JSON array) for a bare message array.
    #[arg(long)]
    tools: Option<PathBuf>,
    #[arg(long)]
    generation_prompt: bool,
    #[arg(long, default_value = chatml::DEFAULT_MEDIA_SENTINEL)]
    media_sentinel: String,
    /// Read wire text and print the conversation as JSON instead.
    #[arg(long)]
    parse: bool,
}

#[derive(Args)]
struct InspectArgs {
    vocab: PathBuf,
    /// How many of the longest tokens to list.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

fn main() -> ExitCode {
    // Interrupted runs must not leave staged files behind.
    let _ = ctrlc::set_handler(|| fsutil::discard_staged_and_exit(130));
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let internal = e
                .downcast_ref::<vocadapt::Error>()
                .is_some_and(vocadapt::Error::is_internal);
            ExitCode::from(if internal { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Train(a) => train(a),
        Command::Encode(a) => encode(a, seed.unwrap_or(0)),
        Command::Decode(a) => decode(a),
        Command::Adapt(a) => run_adapt(a),
        Command::Bench(a) => run_bench(a),
        Command::Curate(a) => curate(a, seed),
        Command::Render(a) => render(a),
        Command::Inspect(a) => inspect(a),
    }
}

fn load_vocab(path: &Path) -> Result<Vocab> {
    Vocab::load(path).with_context(|| format!("loading vocabulary {}", path.display()))
}

fn train(a: TrainArgs) -> Result<()> {
    let docs = load_many(&a.input)?;
    let out = bpe::train(&docs, a.vocab_size)?;
    out.vocab.save(&a.output)?;
    eprintln!(
        "trained {} merges{}",
        out.vocab.merge_count(),
        if out.exhausted {
            " (corpus exhausted before target size)"
        } else {
            ""
        }
    );
    Ok(())
}

fn encode(a: EncodeArgs, seed: u64) -> Result<()> {
    let vocab = load_vocab(&a.vocab)?;
    let text = read_text(a.input.as_deref())?;
    let ids = match a.split_p {
        Some(p) => vocab.encode_stochastic(&text, &StochasticConfig::new(p, seed)?),
        None => vocab.encode(&text),
    };
    let mut out = String::with_capacity(ids.len() * 5);
    for id in ids {
        let _ = writeln!(out, "{}", id.0);
    }
    write_output(a.output.as_deref(), out.as_bytes())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let vocab = load_vocab(&a.vocab)?;
    let text = read_text(a.input.as_deref())?;
    let ids = text
        .split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map(TokenId)
                .with_context(|| format!("bad token id `{t}`"))
        })
        .collect::<Result<Vec<_>>>()?;
    let decoded = vocab.decode(&ids)?;
    if decoded.lossy {
        eprintln!("warning: ids do not decode to valid UTF-8; invalid bytes replaced");
    }
    write_output(a.output.as_deref(), decoded.text.as_bytes())
}

fn run_adapt(a: AdaptArgs) -> Result<()> {
    let (file, base_dir) = match &a.config {
        Some(p) => (
            load_config::<AdaptFile>(p)?,
            p.parent().unwrap_or(Path::new("")).to_path_buf(),
        ),
        None => (AdaptFile::default(), PathBuf::new()),
    };
    let rel = |p: &PathBuf| base_dir.join(p);
    let pick = |flag: Vec<PathBuf>, from_file: &[PathBuf]| -> Vec<PathBuf> {
        if flag.is_empty() {
            from_file.iter().map(rel).collect()
        } else {
            flag
        }
    };
    let base_path = a
        .base
        .or_else(|| file.base.as_ref().map(rel))
        .context("no base vocabulary given")?;
    let donor_path = a
        .donor
        .or_else(|| file.donor.as_ref().map(rel))
        .context("no donor vocabulary given")?;

    let mut cfg = adapt::AdaptConfig::default();
    cfg.target_script = a
        .target_script
        .or(file.target_script)
        .unwrap_or(cfg.target_script);
    cfg.utility_budget = a
        .utility_budget
        .or(file.utility_budget)
        .unwrap_or(cfg.utility_budget);
    cfg.guard_threshold = a
        .guard_threshold
        .or(file.guard_threshold)
        .unwrap_or(cfg.guard_threshold);
    cfg.batch_size = a.batch_size.or(file.batch_size).unwrap_or(cfg.batch_size);
    cfg.validate()?;

    let guard_paths = pick(a.guard_domains, &file.guard_domains);
    if guard_paths.is_empty() {
        bail!("at least one --guard-domain is required");
    }
    let guards = guard_paths
        .iter()
        .map(|p| load_domain(p))
        .collect::<Result<Vec<_>>>()?;
    let targets = pick(a.target_domains, &file.target_domains)
        .iter()
        .map(|p| load_domain(p))
        .collect::<Result<Vec<_>>>()?;
    let reference = load_many(&pick(a.reference, &file.reference))?;

    let base = load_vocab(&base_path)?;
    let donor = DonorMerge::from_vocab(&load_vocab(&donor_path)?);
    let (vocab, plan) = adapt::adapt(&base, &donor, &cfg, &targets, &guards, &reference)?;
    plan.validate()?;
    let vocab_json = vocab.to_json();
    let plan_json = plan.to_json();
    fsutil::write_atomic_all(&[
        (&a.output, vocab_json.as_bytes()),
        (&a.plan, plan_json.as_bytes()),
    ])?;

    eprintln!(
        "{:?}: pruned {} ranks, inserted {}, skipped {} donor merges, rolled back {} batches",
        plan.status,
        plan.pruned_ranks.len(),
        plan.inserted.len(),
        plan.skipped_donor.len(),
        plan.rolled_back.len()
    );
    for (d, g) in &plan.target_gains {
        eprintln!(
            "  {d}: {:.4} -> {:.4} ({:+.2}%)",
            g.base_rate,
            g.adapted_rate,
            g.improvement * 100.0
        );
    }
    if plan.status == adapt::PlanStatus::Rejected {
        eprintln!("warning: final guard failed; the base vocabulary was written unchanged");
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let mut named = Vec::new();
    for spec in &a.vocab {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let n = p
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or(spec)
                    .to_string();
                (n, p)
            }
        };
        named.push((name, load_vocab(&path)?));
    }
    let domains = a
        .domain
        .iter()
        .map(|p| load_domain(p))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(String, &Vocab)> = named.iter().map(|(n, v)| (n.clone(), v)).collect();
    let report = bench::report(&rows, &domains)?;
    if let Some(p) = &a.json {
        fsutil::write_atomic(p, (report.to_json() + "\n").as_bytes())?;
    }
    write_output(None, report.render_table().as_bytes())
}

fn curate(a: CurateArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg: corpus::CurateConfig = match &a.config {
        Some(p) => load_config(p)?,
        None => corpus::CurateConfig::default(),
    };
    if let Some(p) = a.preset {
        cfg.preset = p;
    }
    if let Some(n) = a.max_docs_per_shard {
        cfg.max_docs_per_shard = n;
    }
    if let Some(t) = a.dedup_threshold {
        cfg.dedup_threshold = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.dedup &= !a.no_dedup;
    cfg.mask_pii &= !a.no_mask;
    cfg.score_missing |= a.score_missing;

    if a.output.exists() {
        bail!("{} already exists", a.output.display());
    }
    let raw = read_input_dir(&a.input)?;
    let (docs, stats) = corpus::curate(&raw, &cfg)?;

    let parent = a
        .output
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = StagingDir::new_for(&a.output)?;
    corpus::shard(&docs, cfg.max_docs_per_shard, staging.path())?;
    let stats_json = serde_json::to_string_pretty(&stats)? + "\n";
    fsutil::write_atomic(&staging.path().join("stats.json"), stats_json.as_bytes())?;
    staging.commit(&a.output)?;

    eprintln!(
        "{} in, {} empty, {} filtered, {} duplicates, {} kept ({} masked)",
        stats.input, stats.empty, stats.filtered, stats.duplicates, stats.kept, stats.masked
    );
    Ok(())
}

fn render(a: RenderArgs) -> Result<()> {
    let opts = WireOptions {
        media_sentinel: a.media_sentinel.clone(),
    };
    let text = read_text(a.input.as_deref())?;
    if a.parse {
        let conv = chatml::parse_messages_with(&text, &opts)?;
        let json = serde_json::to_string_pretty(&conv)? + "\n";
        return write_output(a.output.as_deref(), json.as_bytes());
    }
    let value: serde_json::Value =
        serde_json::from_str(&text).context("conversation is not JSON")?;
    let mut conv: Conversation = if value.is_array() {
        let messages: Vec<ChatMessage> = serde_json::from_value(value)?;
        Conversation {
            messages,
            tools: Vec::new(),
            mode: Mode::Reasoning,
            add_generation_prompt: false,
        }
    } else {
        serde_json::from_value(value)?
    };
    if let Some(m) = a.mode {
        conv.mode = match m {
            ModeArg::Reasoning => Mode::Reasoning,
            ModeArg::NonReasoning => Mode::NonReasoning,
        };
    }
    if let Some(p) = &a.tools {
        let body =
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        conv.tools = serde_json::from_str::<Vec<ToolSpec>>(&body)?;
    }
    conv.add_generation_prompt |= a.generation_prompt;
    let wire = chatml::render_with(&conv, &opts)?;
    write_output(a.output.as_deref(), wire.as_bytes())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let vocab = load_vocab(&a.vocab)?;
    let mut out = String::new();
    let ranks: Vec<u32> = vocab.merges().map(|m| m.rank).collect();
    let span = ranks.last().map_or(0, |r| r + 1);
    let _ = writeln!(out, "active tokens   {}", vocab.len());
    let _ = writeln!(out, "merges          {}", vocab.merge_count());
    let _ = writeln!(out, "vacant ranks    {}", span as usize - ranks.len());
    let _ = writeln!(out, "retired ids     {}", vocab.retired_ids().count());
    let _ = writeln!(out, "\nrules by script");
    for script in ScriptClass::ALL {
        let n = adapt::detect_script_rules(&vocab, script).len();
        if n > 0 {
            let _ = writeln!(out, "  {:<12} {n}", script.name());
        }
    }
    let mut longest: Vec<(usize, u32, String)> = vocab
        .merges()
        .map(|m| {
            let bytes = vocab.token_string(m.result).expect("valid vocab");
            (
                bytes.len(),
                m.rank,
                String::from_utf8_lossy(bytes).into_owned(),
            )
        })
        .collect();
    longest.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    if !longest.is_empty() && a.top > 0 {
        let _ = writeln!(out, "\nlongest tokens");
        for (len, rank, text) in longest.into_iter().take(a.top) {
            let _ = writeln!(out, "  rank {rank:<6} {len:>3} bytes  {text:?}");
        }
    }
    write_output(None, out.as_bytes())
}
