//! Command-line entry point: counting, entropy queries, phrase-pair mining,
//! corpus preparation, token decode and evaluation.
//!
//! Configuration comes from a TOML file (`--config`, or the
//! `PHRASEFORGE_CONFIG` environment variable); flags override file paths per
//! invocation. Output files are written atomically (temp file + rename).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phraseforge::config::{LoadedResources, RunConfig};
use phraseforge::corpus::{build_vocabulary, load_parallel_corpus, load_sentences, Sentence};
use phraseforge::eval::{
    adequacy_average, corpus_bleu, count_untranslated, load_adequacy_scores, load_judgements,
    load_lexicon, pairwise_score,
};
use phraseforge::pipeline::{
    build_translator, decode_with_tokens, run_training_prep, write_traces, DecodeContext,
    TrainingPrepPaths,
};
use phraseforge::selector::mine_training_pairs;
use phraseforge::stats::{count_ngrams, NgramStatistics};

const CONFIG_KEYS_HELP: &str = "\
Configuration file keys (TOML) and defaults:
  [selection] max_phrase_len = 7
              entropy_lower_bound = 5.0
              stop_words_src / stop_words_tgt = <path, optional>
              stop_top_n_src / stop_top_n_tgt = <count, optional>
  [resources] phrase_table, stats_src, stats_tgt,
              vocab_src, vocab_tgt, alignments = <paths, optional>
  [tokens]    template_prefix = \"<T\", template_suffix = \">\"
  [translators] smt / nmt = identity | dict:<path> | greedy:<path> | subprocess:<command>
  [vocab]     cap = 40000";

#[derive(Parser)]
#[command(name = "phraseforge", version, about = "Branching-entropy phrase selection and token-replacement translation toolkit", long_about = None, after_long_help = CONFIG_KEYS_HELP)]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, env = "PHRASEFORGE_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads; defaults to machine parallelism. Outputs do not
    /// depend on this setting.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count n-gram statistics over one corpus side.
    Stats(StatsArgs),
    /// Build a capped most-frequent vocabulary from one corpus side.
    Vocab(VocabArgs),
    /// Query left/right branching entropy of a phrase.
    Entropy(EntropyArgs),
    /// Mine phrase pairs over a parallel corpus; write report + inventory.
    Mine(MineArgs),
    /// Mine and rewrite a training corpus with numbered tokens.
    Prepare(PrepareArgs),
    /// Four-step token decode of an input file.
    Decode(DecodeArgs),
    /// Scoring utilities.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Selection inventory (and optional BLEU) across a bound range.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 7)]
    max_len: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct VocabArgs {
    #[arg(long)]
    input: PathBuf,
    /// Vocabulary cap; falls back to [vocab].cap from the config.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    stats: PathBuf,
    /// Space-separated phrase.
    #[arg(long)]
    phrase: String,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    inventory: PathBuf,
}

#[derive(Args)]
struct PrepareArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    out_source: PathBuf,
    #[arg(long)]
    out_target: PathBuf,
    #[arg(long)]
    token_maps: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    inventory: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Corpus BLEU (0-100), single reference, no smoothing.
    Bleu {
        #[arg(long)]
        cand: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
    },
    /// Untranslated-token count over a corpus.
    Untranslated {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value = "<unk>")]
        unk: String,
    },
    /// Pairwise evaluation score from a W/L/T judgement file.
    Pairwise {
        #[arg(long)]
        judgements: PathBuf,
    },
    /// Mean of 1-5 adequacy scores.
    Adequacy {
        #[arg(long)]
        scores: PathBuf,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Inclusive bound range, e.g. "1..10".
    #[arg(long)]
    bounds: String,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Output TSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // ignore failure when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {}", message.replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, String> {
    match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| e.to_string()),
        None => Ok(RunConfig::default()),
    }
}

/// Writes via a temp file in the target directory, then renames into place.
fn atomic_write<F>(path: &Path, write: F) -> Result<(), String>
where
    F: FnOnce(&Path) -> Result<(), String>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| format!("{}: {e}", path.display()))?;
    write(tmp.path())?;
    tmp.persist(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), String> {
    match &cli.command {
        Command::Stats(args) => {
            let side = load_sentences(&args.input).map_err(|e| e.to_string())?;
            let stats = count_ngrams(&side, args.max_len);
            atomic_write(&args.output, |tmp| {
                stats.write(tmp).map_err(|e| e.to_string())
            })?;
            println!(
                "counted {} distinct phrases (max_len {}) over {} sentences",
                stats.distinct_phrases(),
                args.max_len,
                side.len()
            );
            Ok(())
        }
        Command::Vocab(args) => {
            let cfg = load_config(cli)?;
            let cap = args.cap.unwrap_or(cfg.vocab.cap);
            let side = load_sentences(&args.input).map_err(|e| e.to_string())?;
            let vocab = build_vocabulary(side.iter(), cap);
            atomic_write(&args.output, |tmp| {
                vocab.write(tmp).map_err(|e| e.to_string())
            })?;
            println!("wrote {} tokens (cap {cap})", vocab.len());
            Ok(())
        }
        Command::Entropy(args) => {
            let stats = NgramStatistics::read(&args.stats).map_err(|e| e.to_string())?;
            let phrase: Vec<&str> = args.phrase.split(' ').filter(|t| !t.is_empty()).collect();
            let hl = stats.branching_entropy_left(&phrase).map_err(|e| e.to_string())?;
            let hr = stats.branching_entropy_right(&phrase).map_err(|e| e.to_string())?;
            let freq = stats.freq(&phrase).unwrap_or(0);
            println!("phrase\t{}", phrase.join(" "));
            println!("freq\t{freq}");
            println!("H_l\t{hl:.6}");
            println!("H_r\t{hr:.6}");
            Ok(())
        }
        Command::Mine(args) => {
            let cfg = load_config(cli)?;
            let res = LoadedResources::load(&cfg).map_err(|e| e.to_string())?;
            let corpus = load_parallel_corpus(&args.source, &args.target).map_err(|e| e.to_string())?;
            let result = mine_training_pairs(
                &corpus,
                &res.table,
                res.alignments.as_deref(),
                &res.stats_src,
                &res.stats_tgt,
                &res.vocab_src,
                &res.vocab_tgt,
                &res.selection,
            )
            .map_err(|e| e.to_string())?;
            atomic_write(&args.report, |tmp| {
                phraseforge::selector::write_selection_report(&result, tmp).map_err(|e| e.to_string())
            })?;
            atomic_write(&args.inventory, |tmp| {
                std::fs::write(tmp, inventory_text(&result.inventory)).map_err(|e| e.to_string())
            })?;
            println!("{}", inventory_text(&result.inventory).trim_end().replace('\n', ", ").replace('\t', " "));
            Ok(())
        }
        Command::Prepare(args) => {
            let cfg = load_config(cli)?;
            let res = LoadedResources::load(&cfg).map_err(|e| e.to_string())?;
            let corpus = load_parallel_corpus(&args.source, &args.target).map_err(|e| e.to_string())?;
            // stage all five outputs in a temp dir, then move into place
            let staging = tempfile::tempdir_in(
                args.out_source.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")),
            )
            .map_err(|e| e.to_string())?;
            let paths = TrainingPrepPaths {
                tokenized_source: staging.path().join("src"),
                tokenized_target: staging.path().join("tgt"),
                token_maps: staging.path().join("maps"),
                selection_report: staging.path().join("report"),
                inventory_summary: staging.path().join("inventory"),
            };
            let result = run_training_prep(
                &corpus,
                &res.table,
                res.alignments.as_deref(),
                &res.stats_src,
                &res.stats_tgt,
                &res.vocab_src,
                &res.vocab_tgt,
                &res.selection,
                &res.template,
                &paths,
            )
            .map_err(|e| e.to_string())?;
            for (staged, dest) in [
                (&paths.tokenized_source, &args.out_source),
                (&paths.tokenized_target, &args.out_target),
                (&paths.token_maps, &args.token_maps),
                (&paths.selection_report, &args.report),
                (&paths.inventory_summary, &args.inventory),
            ] {
                std::fs::rename(staged, dest)
                    .or_else(|_| std::fs::copy(staged, dest).map(|_| ()))
                    .map_err(|e| format!("{}: {e}", dest.display()))?;
            }
            println!(
                "prepared {} sentence pairs, {} phrase-pair occurrences",
                corpus.len(),
                result.inventory.occurrences
            );
            Ok(())
        }
        Command::Decode(args) => {
            let cfg = load_config(cli)?;
            let res = LoadedResources::load(&cfg).map_err(|e| e.to_string())?;
            let smt_spec = cfg
                .translators
                .smt
                .as_deref()
                .ok_or("translators.smt is required for decode")?;
            let nmt_spec = cfg
                .translators
                .nmt
                .as_deref()
                .ok_or("translators.nmt is required for decode")?;
            let smt = build_translator(smt_spec, res.selection.max_phrase_len)
                .map_err(|e| e.to_string())?;
            let nmt = build_translator(nmt_spec, res.selection.max_phrase_len)
                .map_err(|e| e.to_string())?;
            let inputs = load_sentences(&args.input).map_err(|e| e.to_string())?;
            let ctx = DecodeContext {
                table: &res.table,
                stats_src: &res.stats_src,
                stats_tgt: &res.stats_tgt,
                vocab_src: &res.vocab_src,
                vocab_tgt: &res.vocab_tgt,
                selection: &res.selection,
                template: &res.template,
            };
            let mut outputs = Vec::with_capacity(inputs.len());
            let mut traces = Vec::with_capacity(inputs.len());
            for (idx, input) in inputs.iter().enumerate() {
                let alignment = res.alignments.as_ref().and_then(|a| a.get(idx));
                let (sentence, trace) =
                    decode_with_tokens(input, smt.as_ref(), nmt.as_ref(), &ctx, alignment)
                        .map_err(|e| format!("sentence {}: {e}", idx + 1))?;
                outputs.push(sentence);
                traces.push(trace);
            }
            atomic_write(&args.output, |tmp| {
                let text: String = outputs.iter().map(|s| format!("{s}\n")).collect();
                std::fs::write(tmp, text).map_err(|e| e.to_string())
            })?;
            if let Some(trace_path) = &args.trace {
                atomic_write(trace_path, |tmp| {
                    write_traces(&traces, tmp).map_err(|e| e.to_string())
                })?;
            }
            let dropped: usize = traces.iter().map(|t| t.dropped_tokens.len()).sum();
            println!(
                "decoded {} sentences, {} phrase selections, {} dropped tokens",
                inputs.len(),
                traces.iter().map(|t| t.selected.len()).sum::<usize>(),
                dropped
            );
            Ok(())
        }
        Command::Eval(eval) => run_eval(eval),
        Command::Sweep(args) => {
            let cfg = load_config(cli)?;
            let res = LoadedResources::load(&cfg).map_err(|e| e.to_string())?;
            let corpus = load_parallel_corpus(&args.source, &args.target).map_err(|e| e.to_string())?;
            let (lo, hi) = args
                .bounds
                .split_once("..")
                .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)))
                .ok_or_else(|| format!("--bounds expects \"lo..hi\", got {:?}", args.bounds))?;
            if args.step <= 0.0 {
                return Err("--step must be positive".into());
            }
            let translators = match (&cfg.translators.smt, &cfg.translators.nmt) {
                (Some(smt), Some(nmt)) => Some((
                    build_translator(smt, res.selection.max_phrase_len).map_err(|e| e.to_string())?,
                    build_translator(nmt, res.selection.max_phrase_len).map_err(|e| e.to_string())?,
                )),
                _ => None,
            };
            let mut rows = String::from("#bound\toccurrences\tpair_types\tsource_types\ttarget_types");
            if translators.is_some() {
                rows.push_str("\tbleu");
            }
            rows.push('\n');
            let mut bound = lo;
            while bound <= hi + 1e-12 {
                let mut selection = res.selection.clone();
                selection.entropy_lower_bound = bound;
                let result = mine_training_pairs(
                    &corpus,
                    &res.table,
                    res.alignments.as_deref(),
                    &res.stats_src,
                    &res.stats_tgt,
                    &res.vocab_src,
                    &res.vocab_tgt,
                    &selection,
                )
                .map_err(|e| e.to_string())?;
                let inv = &result.inventory;
                rows.push_str(&format!(
                    "{bound}\t{}\t{}\t{}\t{}",
                    inv.occurrences, inv.pair_types, inv.source_types, inv.target_types
                ));
                if let Some((smt, nmt)) = &translators {
                    let ctx = DecodeContext {
                        table: &res.table,
                        stats_src: &res.stats_src,
                        stats_tgt: &res.stats_tgt,
                        vocab_src: &res.vocab_src,
                        vocab_tgt: &res.vocab_tgt,
                        selection: &selection,
                        template: &res.template,
                    };
                    let mut outputs = Vec::with_capacity(corpus.len());
                    for (idx, (source, _)) in corpus.pairs.iter().enumerate() {
                        let alignment = res.alignments.as_ref().and_then(|a| a.get(idx));
                        let (sentence, _) =
                            decode_with_tokens(source, smt.as_ref(), nmt.as_ref(), &ctx, alignment)
                                .map_err(|e| format!("bound {bound}, sentence {}: {e}", idx + 1))?;
                        outputs.push(sentence);
                    }
                    let references: Vec<Sentence> = corpus.target_side().cloned().collect();
                    let bleu = corpus_bleu(&outputs, &references).map_err(|e| e.to_string())?;
                    rows.push_str(&format!("\t{bleu:.4}"));
                }
                rows.push('\n');
                bound += args.step;
            }
            match &args.output {
                Some(path) => atomic_write(path, |tmp| {
                    std::fs::write(tmp, &rows).map_err(|e| e.to_string())
                })?,
                None => print!("{rows}"),
            }
            Ok(())
        }
    }
}

fn inventory_text(inv: &phraseforge::selector::SelectionInventory) -> String {
    format!(
        "occurrences\t{}\npair_types\t{}\nsource_types\t{}\ntarget_types\t{}\n",
        inv.occurrences, inv.pair_types, inv.source_types, inv.target_types
    )
}

fn run_eval(eval: &EvalCommand) -> Result<(), String> {
    match eval {
        EvalCommand::Bleu { cand, reference } => {
            let candidates = load_sentences(cand).map_err(|e| e.to_string())?;
            let references = load_sentences(reference).map_err(|e| e.to_string())?;
            let bleu = corpus_bleu(&candidates, &references).map_err(|e| e.to_string())?;
            println!("BLEU\t{bleu:.4}");
            Ok(())
        }
        EvalCommand::Untranslated { src, out, lexicon, unk } => {
            let sources = load_sentences(src).map_err(|e| e.to_string())?;
            let outputs = load_sentences(out).map_err(|e| e.to_string())?;
            if sources.len() != outputs.len() {
                return Err(format!(
                    "source/output line counts differ: {} vs {}",
                    sources.len(),
                    outputs.len()
                ));
            }
            let lexicon = load_lexicon(lexicon).map_err(|e| e.to_string())?;
            let total: usize = sources
                .iter()
                .zip(&outputs)
                .map(|(s, o)| count_untranslated(s, o, &lexicon, unk))
                .sum();
            println!("untranslated\t{total}");
            Ok(())
        }
        EvalCommand::Pairwise { judgements } => {
            let (w, l, t) = load_judgements(judgements).map_err(|e| e.to_string())?;
            let score = pairwise_score(w, l, t).map_err(|e| e.to_string())?;
            println!("W\t{w}\nL\t{l}\nT\t{t}\nscore\t{score}");
            Ok(())
        }
        EvalCommand::Adequacy { scores } => {
            let scores = load_adequacy_scores(scores).map_err(|e| e.to_string())?;
            let mean = adequacy_average(&scores).map_err(|e| e.to_string())?;
            println!("n\t{}\nmean\t{mean}", scores.len());
            Ok(())
        }
    }
}
