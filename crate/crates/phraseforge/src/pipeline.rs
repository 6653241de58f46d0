//! Four-step decode orchestration around pluggable black-box translators,
//! plus the training-preparation flow.
//!
//! Decode steps: (1) translate the input with the SMT port, (2) treat the
//! input and its SMT translation as a parallel pair and select phrase pairs,
//! replacing them with numbered tokens, (3) translate the tokenized input
//! with the NMT port, (4) splice the recorded SMT phrase translations back in
//! place of the tokens.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write as IoWrite};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::aligner::{align_candidates, PhraseTable, WordAlignment};
use crate::corpus::{CorpusError, ParallelCorpus, Sentence, Vocabulary};
use crate::rewriter::{
    prepare_training_corpus, replace_with_tokens, restore_tokens, write_token_maps, RewriteError,
    TokenTemplate,
};
use crate::selector::{
    mine_training_pairs, select_phrase_pairs, write_selection_report, MiningResult, SelectError,
    SelectionConfig,
};
use crate::stats::NgramStatistics;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("translator failed: {0}")]
    Translate(String),
    #[error("NMT output contains token index {index} that was never introduced")]
    UnknownToken { index: usize },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown translator spec {0:?} (expected identity, dict:<path>, greedy:<path> or subprocess:<command>)")]
    UnknownTranslator(String),
}

/// A black-box sentence translator. Implementations must be deterministic
/// for a fixed configuration and must not invent reserved token literals.
pub trait TranslatorPort: Send + Sync {
    fn translate(&self, input: &Sentence) -> Result<Sentence, PipelineError>;

    fn translate_batch(&self, inputs: &[Sentence]) -> Result<Vec<Sentence>, PipelineError> {
        inputs.iter().map(|s| self.translate(s)).collect()
    }

    /// Whether concurrent `translate` calls are tolerated.
    fn concurrent(&self) -> bool {
        true
    }
}

/// Returns its input verbatim.
pub struct IdentityTranslator;

impl TranslatorPort for IdentityTranslator {
    fn translate(&self, input: &Sentence) -> Result<Sentence, PipelineError> {
        Ok(input.clone())
    }
}

/// Token-for-token lexicon translation; unknown tokens pass through.
pub struct DictionaryTranslator {
    lexicon: FxHashMap<String, String>,
}

impl DictionaryTranslator {
    pub fn new(lexicon: FxHashMap<String, String>) -> Self {
        DictionaryTranslator { lexicon }
    }

    /// Loads a lexicon file: `source<TAB>target`, one pair per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lexicon = FxHashMap::default();
        for line in text.lines().filter(|l| !l.is_empty()) {
            if let Some((src, tgt)) = line.split_once('\t') {
                lexicon.insert(src.to_string(), tgt.to_string());
            }
        }
        Ok(DictionaryTranslator { lexicon })
    }
}

impl TranslatorPort for DictionaryTranslator {
    fn translate(&self, input: &Sentence) -> Result<Sentence, PipelineError> {
        let tokens: Vec<String> = input
            .tokens()
            .iter()
            .map(|t| self.lexicon.get(t).cloned().unwrap_or_else(|| t.clone()))
            .collect();
        Sentence::new(tokens).map_err(|e| PipelineError::Translate(e.to_string()))
    }
}

/// Covers the sentence left to right with the longest phrase-table match,
/// copying uncovered tokens unchanged.
pub struct PhraseGreedyTranslator {
    table: PhraseTable,
    max_phrase_len: usize,
}

impl PhraseGreedyTranslator {
    pub fn new(table: PhraseTable, max_phrase_len: usize) -> Self {
        PhraseGreedyTranslator {
            table,
            max_phrase_len,
        }
    }
}

impl TranslatorPort for PhraseGreedyTranslator {
    fn translate(&self, input: &Sentence) -> Result<Sentence, PipelineError> {
        let tokens = input.tokens();
        let mut out: Vec<String> = Vec::with_capacity(tokens.len());
        let mut pos = 0;
        while pos < tokens.len() {
            let longest = self.max_phrase_len.min(tokens.len() - pos);
            let mut advanced = false;
            for len in (1..=longest).rev() {
                if let Some(translation) = self.table.best_translation(&tokens[pos..pos + len]) {
                    out.extend(translation.iter().cloned());
                    pos += len;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                out.push(tokens[pos].clone());
                pos += 1;
            }
        }
        Sentence::new(out).map_err(|e| PipelineError::Translate(e.to_string()))
    }
}

/// Wires an external translator over a line protocol: one sentence per line
/// on stdin, one translation per line on stdout, order-preserving, UTF-8.
pub struct SubprocessTranslator {
    child: Mutex<(Child, ChildStdin, BufReader<ChildStdout>)>,
    command: String,
}

impl SubprocessTranslator {
    pub fn spawn(command: &str) -> Result<Self, PipelineError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| PipelineError::Translate(format!("spawn {command:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(SubprocessTranslator {
            child: Mutex::new((child, stdin, stdout)),
            command: command.to_string(),
        })
    }
}

impl TranslatorPort for SubprocessTranslator {
    fn translate(&self, input: &Sentence) -> Result<Sentence, PipelineError> {
        let mut guard = self.child.lock().expect("subprocess lock");
        let (_, stdin, stdout) = &mut *guard;
        writeln!(stdin, "{input}")
            .and_then(|_| stdin.flush())
            .map_err(|e| PipelineError::Translate(format!("{}: write: {e}", self.command)))?;
        let mut line = String::new();
        let n = stdout
            .read_line(&mut line)
            .map_err(|e| PipelineError::Translate(format!("{}: read: {e}", self.command)))?;
        if n == 0 {
            return Err(PipelineError::Translate(format!(
                "{}: closed stdout before answering",
                self.command
            )));
        }
        Sentence::parse(line.trim_end_matches('\n'))
            .map_err(|e| PipelineError::Translate(e.to_string()))
    }

    fn concurrent(&self) -> bool {
        false
    }
}

impl Drop for SubprocessTranslator {
    fn drop(&mut self) {
        if let Ok(mut guard) = self.child.lock() {
            let _ = guard.0.kill();
            let _ = guard.0.wait();
        }
    }
}

/// Builds a translator from a spec string: `identity`, `dict:<path>`,
/// `greedy:<path>` (phrase table) or `subprocess:<shell command>`.
pub fn build_translator(spec: &str, max_phrase_len: usize) -> Result<Box<dyn TranslatorPort>, PipelineError> {
    if spec == "identity" {
        return Ok(Box::new(IdentityTranslator));
    }
    if let Some(path) = spec.strip_prefix("dict:") {
        return Ok(Box::new(DictionaryTranslator::load(path)?));
    }
    if let Some(path) = spec.strip_prefix("greedy:") {
        let table = crate::aligner::load_phrase_table(path)
            .map_err(|e| PipelineError::Translate(e.to_string()))?;
        return Ok(Box::new(PhraseGreedyTranslator::new(table, max_phrase_len)));
    }
    if let Some(command) = spec.strip_prefix("subprocess:") {
        return Ok(Box::new(SubprocessTranslator::spawn(command)?));
    }
    Err(PipelineError::UnknownTranslator(spec.to_string()))
}

/// Immutable resources the decode path needs.
pub struct DecodeContext<'a> {
    pub table: &'a PhraseTable,
    pub stats_src: &'a NgramStatistics,
    pub stats_tgt: &'a NgramStatistics,
    pub vocab_src: &'a Vocabulary,
    pub vocab_tgt: &'a Vocabulary,
    pub selection: &'a SelectionConfig,
    pub template: &'a TokenTemplate,
}

/// One selected phrase pair as recorded in the decode trace.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TraceSelection {
    pub index: usize,
    pub source_span: (usize, usize),
    pub target_span: (usize, usize),
    pub source_phrase: String,
    pub smt_translation: String,
    pub entropies: [f64; 4],
}

/// Full per-sentence record of the four decode steps.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DecodeTrace {
    pub input: String,
    pub smt_translation: String,
    pub selected: Vec<TraceSelection>,
    pub tokenized_input: String,
    pub nmt_output: String,
    pub dropped_tokens: Vec<usize>,
    pub final_translation: String,
}

/// Runs the four-step decode for one sentence.
pub fn decode_with_tokens(
    input: &Sentence,
    smt: &dyn TranslatorPort,
    nmt: &dyn TranslatorPort,
    ctx: &DecodeContext<'_>,
    alignment: Option<&WordAlignment>,
) -> Result<(Sentence, DecodeTrace), PipelineError> {
    // step 1: SMT translation of the raw input
    let smt_translation = smt.translate(input)?;

    // step 2: select phrase pairs over (input, SMT translation) and replace
    let candidates = align_candidates(
        input,
        &smt_translation,
        ctx.table,
        alignment,
        ctx.selection.max_phrase_len,
    );
    let outcome = select_phrase_pairs(
        &candidates,
        ctx.stats_src,
        ctx.stats_tgt,
        ctx.vocab_src,
        ctx.vocab_tgt,
        ctx.selection,
    );
    let ((tokenized_input, _), token_map) =
        replace_with_tokens(input, &smt_translation, &outcome.selected, ctx.template)?;

    // step 3: NMT decodes the tokenized input
    let nmt_output = nmt.translate(&tokenized_input)?;

    // step 4: splice the SMT phrase translations back in
    let known: HashSet<usize> = token_map.entries().iter().map(|e| e.index).collect();
    for token in nmt_output.tokens() {
        if let Some(index) = ctx.template.parse(token) {
            if !known.contains(&index) {
                return Err(PipelineError::UnknownToken { index });
            }
        }
    }
    let restored = restore_tokens(&nmt_output, &token_map.target_translations(), ctx.template)?;

    let selected = outcome
        .selected
        .iter()
        .enumerate()
        .map(|(i, pair)| TraceSelection {
            index: i + 1,
            source_span: pair.candidate.source_span,
            target_span: pair.candidate.target_span,
            source_phrase: pair.candidate.source.join(" "),
            smt_translation: pair.candidate.target.join(" "),
            entropies: [
                pair.entropy_left_src,
                pair.entropy_right_src,
                pair.entropy_left_tgt,
                pair.entropy_right_tgt,
            ],
        })
        .collect();
    let trace = DecodeTrace {
        input: input.to_string(),
        smt_translation: smt_translation.to_string(),
        selected,
        tokenized_input: tokenized_input.to_string(),
        nmt_output: nmt_output.to_string(),
        dropped_tokens: restored.unused.clone(),
        final_translation: restored.sentence.to_string(),
    };
    Ok((restored.sentence, trace))
}

/// Serializes decode traces as JSON lines.
pub fn write_traces(traces: &[DecodeTrace], path: impl AsRef<Path>) -> Result<(), PipelineError> {
    let mut out = String::new();
    for trace in traces {
        out.push_str(&serde_json::to_string(trace).expect("trace serializes"));
        out.push('\n');
    }
    std::fs::write(path.as_ref(), out).map_err(|source| PipelineError::Io {
        path: path.as_ref().to_path_buf(),
        source,
    })
}

/// Output paths of the training-preparation flow.
pub struct TrainingPrepPaths {
    pub tokenized_source: PathBuf,
    pub tokenized_target: PathBuf,
    pub token_maps: PathBuf,
    pub selection_report: PathBuf,
    pub inventory_summary: PathBuf,
}

/// Mines phrase pairs over the corpus, rewrites it with tokens and writes
/// all artifacts to disk. Returns the mining result for inspection.
#[allow(clippy::too_many_arguments)]
pub fn run_training_prep(
    corpus: &ParallelCorpus,
    table: &PhraseTable,
    alignments: Option<&[WordAlignment]>,
    stats_src: &NgramStatistics,
    stats_tgt: &NgramStatistics,
    vocab_src: &Vocabulary,
    vocab_tgt: &Vocabulary,
    cfg: &SelectionConfig,
    template: &TokenTemplate,
    paths: &TrainingPrepPaths,
) -> Result<MiningResult, PipelineError> {
    let result = mine_training_pairs(
        corpus, table, alignments, stats_src, stats_tgt, vocab_src, vocab_tgt, cfg,
    )?;
    let (tokenized, maps) = prepare_training_corpus(corpus, &result.per_pair, template)?;
    crate::corpus::write_parallel_corpus(&tokenized, &paths.tokenized_source, &paths.tokenized_target)?;
    write_token_maps(&maps, &paths.token_maps)?;
    write_selection_report(&result, &paths.selection_report)?;
    let inv = &result.inventory;
    let summary = format!(
        "occurrences\t{}\npair_types\t{}\nsource_types\t{}\ntarget_types\t{}\n",
        inv.occurrences, inv.pair_types, inv.source_types, inv.target_types
    );
    std::fs::write(&paths.inventory_summary, summary).map_err(|source| PipelineError::Io {
        path: paths.inventory_summary.clone(),
        source,
    })?;
    Ok(result)
}
