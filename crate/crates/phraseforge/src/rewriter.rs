//! Numbered-token replacement of selected phrase pairs and the inverse
//! restoration of translator output.
//!
//! Tokens are numbered by the order of occurrence of the source phrases in
//! each source sentence, and the same literals `<T1>`, `<T2>`, ... are reused
//! across all sentence pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{ParallelCorpus, Sentence};
use crate::selector::{PhrasePair, SelectionOutcome};

/// Separates token-map entries within one line of the token-map file.
const ENTRY_SEPARATOR: char = '\u{1f}';

#[derive(Debug, thiserror::Error)]
pub enum RewriteError {
    #[error("overlapping {side} spans {a:?} and {b:?}")]
    OverlappingSpans {
        side: &'static str,
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("{side} span {span:?} out of bounds for sentence of {len} tokens")]
    SpanOutOfBounds {
        side: &'static str,
        span: (usize, usize),
        len: usize,
    },
    #[error("token literal {literal:?} already present in the {side} sentence")]
    LiteralCollision { literal: String, side: &'static str },
    #[error("no translation for token indices {indices:?}")]
    MissingTranslation { indices: Vec<usize> },
    #[error("sentence {index}: {source}")]
    AtSentence {
        index: usize,
        #[source]
        source: Box<RewriteError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

/// Produces and recognizes the numbered token literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenTemplate {
    prefix: String,
    suffix: String,
}

impl Default for TokenTemplate {
    fn default() -> Self {
        TokenTemplate {
            prefix: "<T".to_string(),
            suffix: ">".to_string(),
        }
    }
}

impl TokenTemplate {
    pub fn new(prefix: impl Into<String>, suffix: impl Into<String>) -> Self {
        TokenTemplate {
            prefix: prefix.into(),
            suffix: suffix.into(),
        }
    }

    /// The literal for token index `i` (1-based), e.g. `<T1>`.
    pub fn literal(&self, index: usize) -> String {
        format!("{}{}{}", self.prefix, index, self.suffix)
    }

    /// Parses a token back to its index if it matches the template.
    pub fn parse(&self, token: &str) -> Option<usize> {
        let digits = token.strip_prefix(self.prefix.as_str())?.strip_suffix(self.suffix.as_str())?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        digits.parse().ok()
    }

    pub fn matches(&self, token: &str) -> bool {
        self.parse(token).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenEntry {
    /// 1-based token index.
    pub index: usize,
    pub source: Vec<String>,
    pub target: Vec<String>,
}

/// Per-sentence ordered mapping from token indices to phrase pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenMap {
    entries: Vec<TokenEntry>,
}

impl TokenMap {
    pub fn entries(&self) -> &[TokenEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&TokenEntry> {
        self.entries.get(index.checked_sub(1)?)
    }

    /// Target phrases keyed by token index, the shape `restore_tokens` takes.
    pub fn target_translations(&self) -> BTreeMap<usize, Vec<String>> {
        self.entries
            .iter()
            .map(|e| (e.index, e.target.clone()))
            .collect()
    }
}

fn check_spans(
    side: &'static str,
    sentence_len: usize,
    mut spans: Vec<(usize, usize)>,
) -> Result<(), RewriteError> {
    spans.sort_unstable();
    for window in spans.windows(2) {
        let (a, b) = (window[0], window[1]);
        if b.0 < a.0 + a.1 {
            return Err(RewriteError::OverlappingSpans { side, a, b });
        }
    }
    for &span in &spans {
        if span.1 == 0 || span.0 + span.1 > sentence_len {
            return Err(RewriteError::SpanOutOfBounds {
                side,
                span,
                len: sentence_len,
            });
        }
    }
    Ok(())
}

fn substitute(
    sentence: &Sentence,
    replacements: &[((usize, usize), String)],
) -> Sentence {
    let mut by_start: BTreeMap<usize, (usize, &str)> = BTreeMap::new();
    for ((start, len), literal) in replacements {
        by_start.insert(*start, (*len, literal));
    }
    let tokens = sentence.tokens();
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut pos = 0;
    while pos < tokens.len() {
        if let Some(&(len, literal)) = by_start.get(&pos) {
            out.push(literal.to_string());
            pos += len;
        } else {
            out.push(tokens[pos].clone());
            pos += 1;
        }
    }
    Sentence::new(out).expect("replacement literals are valid tokens")
}

/// Replaces each selected phrase pair with a numbered token literal on both
/// sides. Indices rank the pairs by source span start.
pub fn replace_with_tokens(
    source: &Sentence,
    target: &Sentence,
    selected: &[PhrasePair],
    template: &TokenTemplate,
) -> Result<((Sentence, Sentence), TokenMap), RewriteError> {
    check_spans(
        "source",
        source.len(),
        selected.iter().map(|p| p.candidate.source_span).collect(),
    )?;
    check_spans(
        "target",
        target.len(),
        selected.iter().map(|p| p.candidate.target_span).collect(),
    )?;

    let mut ordered: Vec<&PhrasePair> = selected.iter().collect();
    ordered.sort_by_key(|p| p.candidate.source_span.0);

    for (side, sentence) in [("source", source), ("target", target)] {
        for token in sentence.tokens() {
            if template.matches(token) {
                return Err(RewriteError::LiteralCollision {
                    literal: token.clone(),
                    side,
                });
            }
        }
    }

    let mut entries = Vec::with_capacity(ordered.len());
    let mut src_repl = Vec::with_capacity(ordered.len());
    let mut tgt_repl = Vec::with_capacity(ordered.len());
    for (i, pair) in ordered.iter().enumerate() {
        let index = i + 1;
        let literal = template.literal(index);
        src_repl.push((pair.candidate.source_span, literal.clone()));
        tgt_repl.push((pair.candidate.target_span, literal));
        entries.push(TokenEntry {
            index,
            source: pair.candidate.source.clone(),
            target: pair.candidate.target.clone(),
        });
    }
    let new_source = substitute(source, &src_repl);
    let new_target = substitute(target, &tgt_repl);
    Ok(((new_source, new_target), TokenMap { entries }))
}

/// Result of token restoration: the spliced sentence plus any supplied
/// translations that never appeared in the translated sentence (a translator
/// may drop tokens).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestoreOutcome {
    pub sentence: Sentence,
    pub unused: Vec<usize>,
}

/// Replaces every token literal `T_i` in `translated` with `translations[i]`.
pub fn restore_tokens(
    translated: &Sentence,
    translations: &BTreeMap<usize, Vec<String>>,
    template: &TokenTemplate,
) -> Result<RestoreOutcome, RewriteError> {
    let mut missing = Vec::new();
    let mut used = Vec::new();
    let mut out: Vec<String> = Vec::with_capacity(translated.len());
    for token in translated.tokens() {
        match template.parse(token) {
            Some(index) => match translations.get(&index) {
                Some(phrase) => {
                    used.push(index);
                    out.extend(phrase.iter().cloned());
                }
                None => missing.push(index),
            },
            None => out.push(token.clone()),
        }
    }
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(RewriteError::MissingTranslation { indices: missing });
    }
    let unused: Vec<usize> = translations
        .keys()
        .filter(|i| !used.contains(i))
        .copied()
        .collect();
    Ok(RestoreOutcome {
        sentence: Sentence::new(out).expect("restored phrases are valid tokens"),
        unused,
    })
}

/// Applies [`replace_with_tokens`] across a corpus; selections co-indexed.
pub fn prepare_training_corpus(
    corpus: &ParallelCorpus,
    selections: &[SelectionOutcome],
    template: &TokenTemplate,
) -> Result<(ParallelCorpus, Vec<TokenMap>), RewriteError> {
    assert_eq!(
        corpus.len(),
        selections.len(),
        "selections must be co-indexed with the corpus"
    );
    let mut pairs = Vec::with_capacity(corpus.len());
    let mut maps = Vec::with_capacity(corpus.len());
    for (index, ((source, target), outcome)) in
        corpus.pairs.iter().zip(selections).enumerate()
    {
        let (pair, map) = replace_with_tokens(source, target, &outcome.selected, template)
            .map_err(|source| RewriteError::AtSentence {
                index,
                source: Box::new(source),
            })?;
        pairs.push(pair);
        maps.push(map);
    }
    let mut tokenized = ParallelCorpus::new(pairs);
    tokenized.source_lang = corpus.source_lang.clone();
    tokenized.target_lang = corpus.target_lang.clone();
    Ok((tokenized, maps))
}

/// Writes one line per sentence; entries `"i<TAB>src<TAB>tgt"` joined by the
/// unit separator (U+001F).
pub fn write_token_maps(maps: &[TokenMap], path: impl AsRef<Path>) -> Result<(), RewriteError> {
    let mut out = String::new();
    for map in maps {
        let line: Vec<String> = map
            .entries
            .iter()
            .map(|e| format!("{}\t{}\t{}", e.index, e.source.join(" "), e.target.join(" ")))
            .collect();
        out.push_str(&line.join(&ENTRY_SEPARATOR.to_string()));
        out.push('\n');
    }
    fs::write(path.as_ref(), out).map_err(|source| RewriteError::Io {
        path: path.as_ref().to_path_buf(),
        source,
    })
}

pub fn read_token_maps(path: impl AsRef<Path>) -> Result<Vec<TokenMap>, RewriteError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| RewriteError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut maps = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut entries = Vec::new();
        if !line.is_empty() {
            for part in line.split(ENTRY_SEPARATOR) {
                let mut fields = part.split('\t');
                let entry = (|| {
                    let index: usize = fields.next()?.parse().ok()?;
                    let source: Vec<String> = fields.next()?.split(' ').map(str::to_string).collect();
                    let target: Vec<String> = fields.next()?.split(' ').map(str::to_string).collect();
                    Some(TokenEntry { index, source, target })
                })();
                match entry {
                    Some(entry) => entries.push(entry),
                    None => {
                        return Err(RewriteError::Parse {
                            path: path.to_path_buf(),
                            line: idx + 1,
                            reason: format!("malformed entry {part:?}"),
                        })
                    }
                }
            }
        }
        maps.push(TokenMap { entries });
    }
    Ok(maps)
}
