//! Parallel corpus loading, length filtering and capped vocabularies.
//!
//! Corpora are pre-tokenized: one sentence per line, tokens separated by a
//! single ASCII space. A parallel corpus is two such files with equal line
//! counts. Tokenization itself (morphological analysis etc.) happens upstream.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::{BOS, EOS};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line counts differ: {source_path} has {source_lines} lines, {target_path} has {target_lines}")]
    LineCountMismatch {
        source_path: PathBuf,
        source_lines: usize,
        target_path: PathBuf,
        target_lines: usize,
    },
    #[error("{path}:{line}: empty sentence")]
    EmptyLine { path: PathBuf, line: usize },
    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("invalid token {token:?}: {reason}")]
    InvalidToken { token: String, reason: String },
}

/// One pre-tokenized sentence. Tokens are opaque strings without internal
/// whitespace; the boundary sentinels are reserved and rejected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new<I, S>(tokens: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for token in &tokens {
            validate_token(token)?;
        }
        Ok(Sentence { tokens })
    }

    /// Parses a corpus line (tokens separated by single spaces).
    pub fn parse(line: &str) -> Result<Self, CorpusError> {
        Sentence::new(line.split(' '))
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

fn validate_token(token: &str) -> Result<(), CorpusError> {
    if token.is_empty() {
        return Err(CorpusError::InvalidToken {
            token: token.to_string(),
            reason: "empty token".into(),
        });
    }
    if token == BOS || token == EOS {
        return Err(CorpusError::InvalidToken {
            token: token.to_string(),
            reason: "reserved sentinel literal".into(),
        });
    }
    if token.chars().any(|c| c.is_whitespace()) {
        return Err(CorpusError::InvalidToken {
            token: token.to_string(),
            reason: "token contains whitespace".into(),
        });
    }
    Ok(())
}

/// Aligned source/target sentences, pair `i` built from line `i` of each file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<(Sentence, Sentence)>,
    pub source_lang: Option<String>,
    pub target_lang: Option<String>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<(Sentence, Sentence)>) -> Self {
        ParallelCorpus {
            pairs,
            source_lang: None,
            target_lang: None,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn source_side(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(s, _)| s)
    }

    pub fn target_side(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(_, t)| t)
    }
}

/// Loads one corpus side: one sentence per line, single-space separated.
pub fn load_sentences(path: impl AsRef<Path>) -> Result<Vec<Sentence>, CorpusError> {
    load_side(path.as_ref())
}

fn load_side(path: &Path) -> Result<Vec<Sentence>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut sentences = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            return Err(CorpusError::EmptyLine {
                path: path.to_path_buf(),
                line: idx + 1,
            });
        }
        let sentence = Sentence::parse(line).map_err(|e| CorpusError::MalformedLine {
            path: path.to_path_buf(),
            line: idx + 1,
            reason: e.to_string(),
        })?;
        sentences.push(sentence);
    }
    Ok(sentences)
}

/// Loads a line-aligned parallel corpus from two single-side files.
pub fn load_parallel_corpus(
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
) -> Result<ParallelCorpus, CorpusError> {
    let source_path = source_path.as_ref();
    let target_path = target_path.as_ref();
    let source = load_side(source_path)?;
    let target = load_side(target_path)?;
    if source.len() != target.len() {
        return Err(CorpusError::LineCountMismatch {
            source_path: source_path.to_path_buf(),
            source_lines: source.len(),
            target_path: target_path.to_path_buf(),
            target_lines: target.len(),
        });
    }
    Ok(ParallelCorpus::new(source.into_iter().zip(target).collect()))
}

/// Writes the two-file corpus format back to disk (LF line endings).
pub fn write_parallel_corpus(
    corpus: &ParallelCorpus,
    source_path: impl AsRef<Path>,
    target_path: impl AsRef<Path>,
) -> Result<(), CorpusError> {
    for (path, side) in [
        (source_path.as_ref(), corpus.source_side().collect::<Vec<_>>()),
        (target_path.as_ref(), corpus.target_side().collect::<Vec<_>>()),
    ] {
        let mut out = String::new();
        for sentence in side {
            out.push_str(&sentence.to_string());
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

/// Keeps exactly the pairs where both sides have strictly fewer than
/// `max_tokens` tokens; order preserved.
pub fn filter_by_length(corpus: &ParallelCorpus, max_tokens: usize) -> ParallelCorpus {
    assert!(max_tokens >= 1, "max_tokens must be >= 1");
    let pairs = corpus
        .pairs
        .iter()
        .filter(|(s, t)| s.len() < max_tokens && t.len() < max_tokens)
        .cloned()
        .collect();
    ParallelCorpus {
        pairs,
        source_lang: corpus.source_lang.clone(),
        target_lang: corpus.target_lang.clone(),
    }
}

/// The `cap` most frequent tokens of one corpus side, ties broken by
/// lexicographic token order. Ranks run 1..=len in frequency order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    ranked: Vec<String>,
    index: HashMap<String, u32>,
    pub cap: usize,
}

impl Vocabulary {
    pub fn from_ranked_tokens(tokens: Vec<String>, cap: usize) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32 + 1))
            .collect();
        Vocabulary {
            ranked: tokens,
            index,
            cap,
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// 1-based frequency rank, if the token is in the vocabulary.
    pub fn rank(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    /// Tokens in rank order (most frequent first).
    pub fn ranked_tokens(&self) -> &[String] {
        &self.ranked
    }

    /// The `n` most frequent tokens, e.g. as a stop-word set.
    pub fn top_n(&self, n: usize) -> Vec<String> {
        self.ranked.iter().take(n).cloned().collect()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        let mut out = String::new();
        for token in &self.ranked {
            out.push_str(token);
            out.push('\n');
        }
        fs::write(path.as_ref(), out).map_err(|source| CorpusError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })
    }

    /// Reads a vocabulary file (one token per line, rank order).
    pub fn read(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path.as_ref()).map_err(|source| CorpusError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })?;
        let tokens: Vec<String> = text.lines().map(|l| l.to_string()).collect();
        let cap = tokens.len();
        Ok(Vocabulary::from_ranked_tokens(tokens, cap))
    }
}

/// Builds the capped most-frequent vocabulary of one corpus side.
pub fn build_vocabulary<'a, I>(side: I, cap: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a Sentence>,
{
    assert!(cap >= 1, "cap must be >= 1");
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for sentence in side {
        for token in sentence.tokens() {
            *freq.entry(token.as_str()).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(&str, u64)> = freq.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    entries.truncate(cap);
    Vocabulary::from_ranked_tokens(entries.into_iter().map(|(t, _)| t.to_string()).collect(), cap)
}

/// True iff the token is outside the vocabulary.
pub fn is_oov(token: &str, vocab: &Vocabulary) -> bool {
    !vocab.contains(token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn sent(s: &str) -> Sentence {
        Sentence::parse(s).unwrap()
    }

    #[test]
    fn load_splits_lines_on_spaces() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src.txt");
        let tgt = dir.path().join("tgt.txt");
        fs::write(&src, "a b\nc\n").unwrap();
        fs::write(&tgt, "x\ny z\n").unwrap();
        let corpus = load_parallel_corpus(&src, &tgt).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.pairs[0], (sent("a b"), sent("x")));
        assert_eq!(corpus.pairs[1], (sent("c"), sent("y z")));
    }

    #[test]
    fn load_rejects_line_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src.txt");
        let tgt = dir.path().join("tgt.txt");
        fs::write(&src, "a\nb\n").unwrap();
        fs::write(&tgt, "x\n").unwrap();
        match load_parallel_corpus(&src, &tgt) {
            Err(CorpusError::LineCountMismatch {
                source_lines,
                target_lines,
                ..
            }) => {
                assert_eq!((source_lines, target_lines), (2, 1));
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_empty_line_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("src.txt");
        let tgt = dir.path().join("tgt.txt");
        fs::write(&src, "a\n\nb\n").unwrap();
        fs::write(&tgt, "x\ny\nz\n").unwrap();
        match load_parallel_corpus(&src, &tgt) {
            Err(CorpusError::EmptyLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected empty-line error, got {other:?}"),
        }
    }

    #[test]
    fn sentence_rejects_sentinels_and_whitespace() {
        assert!(Sentence::new(["<BOS>"]).is_err());
        assert!(Sentence::new(["<EOS>"]).is_err());
        assert!(Sentence::new(["a b"]).is_err());
        assert!(Sentence::new([""]).is_err());
    }

    #[test]
    fn filter_is_strict_on_both_sides() {
        let mk = |n: usize| Sentence::new(vec!["t"; n]).unwrap();
        let corpus = ParallelCorpus::new(vec![
            (mk(39), mk(39)),
            (mk(40), mk(10)),
            (mk(10), mk(40)),
        ]);
        let kept = filter_by_length(&corpus, 40);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.pairs[0].0.len(), 39);
    }

    #[test]
    fn filter_with_max_one_drops_everything() {
        let corpus = ParallelCorpus::new(vec![(sent("a"), sent("x"))]);
        assert!(filter_by_length(&corpus, 1).is_empty());
    }

    #[test]
    fn vocabulary_cap_and_tie_break() {
        assert_eq!(
            build_vocabulary([sent("a a b")].iter(), 1).ranked_tokens(),
            ["a"]
        );
        // tie between a and b broken lexicographically
        assert_eq!(
            build_vocabulary([sent("a b"), sent("b a")].iter(), 1).ranked_tokens(),
            ["a"]
        );
    }

    #[test]
    fn oov_is_set_non_membership() {
        let vocab = build_vocabulary([sent("a")].iter(), 10);
        assert!(!is_oov("a", &vocab));
        assert!(is_oov("z", &vocab));
    }

    #[test]
    fn vocabulary_of_empty_side_is_empty() {
        let vocab = build_vocabulary(std::iter::empty(), 5);
        assert!(vocab.is_empty());
    }

    fn corpus_strategy() -> impl Strategy<Value = ParallelCorpus> {
        let token = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]);
        let sentence = prop::collection::vec(token, 1..8)
            .prop_map(|t| Sentence::new(t).unwrap());
        prop::collection::vec((sentence.clone(), sentence), 1..20).prop_map(ParallelCorpus::new)
    }

    proptest! {
        #[test]
        fn write_load_roundtrip(corpus in corpus_strategy()) {
            let dir = tempfile::tempdir().unwrap();
            let src = dir.path().join("s");
            let tgt = dir.path().join("t");
            write_parallel_corpus(&corpus, &src, &tgt).unwrap();
            let reloaded = load_parallel_corpus(&src, &tgt).unwrap();
            prop_assert_eq!(reloaded.pairs, corpus.pairs);
        }

        #[test]
        fn filter_idempotent_and_matches_scan(corpus in corpus_strategy(), max in 1usize..10) {
            let once = filter_by_length(&corpus, max);
            let twice = filter_by_length(&once, max);
            prop_assert_eq!(&once, &twice);
            let expected: Vec<_> = corpus
                .pairs
                .iter()
                .filter(|(s, t)| s.len() < max && t.len() < max)
                .cloned()
                .collect();
            prop_assert_eq!(once.pairs, expected);
        }

        #[test]
        fn uncapped_vocabulary_has_every_distinct_token(corpus in corpus_strategy()) {
            let vocab = build_vocabulary(corpus.source_side(), usize::MAX);
            let mut distinct: Vec<&str> = corpus
                .source_side()
                .flat_map(|s| s.tokens().iter().map(|t| t.as_str()))
                .collect();
            distinct.sort_unstable();
            distinct.dedup();
            prop_assert_eq!(vocab.len(), distinct.len());
            for t in distinct {
                prop_assert!(vocab.contains(t));
                prop_assert!(!is_oov(t, &vocab));
            }
        }

        #[test]
        fn top_k_matches_exhaustive_count(corpus in corpus_strategy(), cap in 1usize..8) {
            let vocab = build_vocabulary(corpus.source_side(), cap);
            let mut freq: HashMap<String, u64> = HashMap::new();
            for s in corpus.source_side() {
                for t in s.tokens() {
                    *freq.entry(t.clone()).or_insert(0) += 1;
                }
            }
            let mut sorted: Vec<(String, u64)> = freq.into_iter().collect();
            sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            sorted.truncate(cap);
            let expected: Vec<String> = sorted.into_iter().map(|(t, _)| t).collect();
            prop_assert_eq!(vocab.ranked_tokens().to_vec(), expected);
        }
    }
}
