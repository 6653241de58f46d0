//! Phrase-pair selection: OOV content, stop-word exclusion and the
//! branching-entropy boundary test, plus overlap resolution.

use std::collections::{HashSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::aligner::{align_candidates, CandidatePair, PhraseTable, WordAlignment};
use crate::corpus::{ParallelCorpus, Vocabulary};
use crate::stats::{NgramStatistics, StatsError};

#[derive(Debug, thiserror::Error)]
pub enum SelectError {
    #[error("corpus has {corpus} pairs but {alignments} alignments")]
    AlignmentCountMismatch { corpus: usize, alignments: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Tuning knobs of the three selection conditions.
#[derive(Debug, Clone)]
pub struct SelectionConfig {
    pub max_phrase_len: usize,
    pub entropy_lower_bound: f64,
    pub stop_words_src: HashSet<String>,
    pub stop_words_tgt: HashSet<String>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            max_phrase_len: 7,
            entropy_lower_bound: 5.0,
            stop_words_src: HashSet::new(),
            stop_words_tgt: HashSet::new(),
        }
    }
}

/// Loads a stop-word file: one token per line.
pub fn load_stop_words(path: impl AsRef<Path>) -> Result<HashSet<String>, SelectError> {
    let text = fs::read_to_string(path.as_ref()).map_err(|source| SelectError::Io {
        path: path.as_ref().to_path_buf(),
        source,
    })?;
    Ok(text.lines().filter(|l| !l.is_empty()).map(str::to_string).collect())
}

/// A candidate that passed all three conditions, with its entropy scores.
#[derive(Debug, Clone, PartialEq)]
pub struct PhrasePair {
    pub candidate: CandidatePair,
    pub entropy_left_src: f64,
    pub entropy_right_src: f64,
    pub entropy_left_tgt: f64,
    pub entropy_right_tgt: f64,
}

/// Result of selecting over one sentence pair's candidates.
#[derive(Debug, Clone, Default)]
pub struct SelectionOutcome {
    /// Survivors after overlap resolution, ordered by source span start.
    pub selected: Vec<PhrasePair>,
    /// Candidates dropped because a phrase was never counted in the
    /// statistics (novel decode-time strings).
    pub dropped_unseen: Vec<CandidatePair>,
}

fn contains_oov(tokens: &[String], vocab: &Vocabulary) -> bool {
    tokens.iter().any(|t| !vocab.contains(t))
}

fn contains_stop_word(tokens: &[String], stops: &HashSet<String>) -> bool {
    tokens.iter().any(|t| stops.contains(t))
}

/// Applies conditions (1)–(3) to the candidates of one sentence pair and
/// resolves overlapping survivors greedily (longer source span first, then
/// leftmost, then longer target span).
pub fn select_phrase_pairs(
    candidates: &[CandidatePair],
    stats_src: &NgramStatistics,
    stats_tgt: &NgramStatistics,
    vocab_src: &Vocabulary,
    vocab_tgt: &Vocabulary,
    cfg: &SelectionConfig,
) -> SelectionOutcome {
    let mut outcome = SelectionOutcome::default();
    let mut survivors: Vec<PhrasePair> = Vec::new();
    for candidate in candidates {
        if candidate.source_span.1 > cfg.max_phrase_len || candidate.target_span.1 > cfg.max_phrase_len {
            continue;
        }
        // (1) at least one OOV token on either side
        if !contains_oov(&candidate.source, vocab_src) && !contains_oov(&candidate.target, vocab_tgt) {
            continue;
        }
        // (2) no stop words on either side
        if contains_stop_word(&candidate.source, &cfg.stop_words_src)
            || contains_stop_word(&candidate.target, &cfg.stop_words_tgt)
        {
            continue;
        }
        // (3) entropy boundary on both sides at the shared lower bound
        let boundary = stats_src
            .is_entropy_boundary(&candidate.source, cfg.entropy_lower_bound)
            .and_then(|src_ok| {
                Ok(src_ok && stats_tgt.is_entropy_boundary(&candidate.target, cfg.entropy_lower_bound)?)
            });
        match boundary {
            Ok(false) => continue,
            Ok(true) => {
                let pair = PhrasePair {
                    candidate: candidate.clone(),
                    entropy_left_src: stats_src.branching_entropy_left(&candidate.source).unwrap(),
                    entropy_right_src: stats_src.branching_entropy_right(&candidate.source).unwrap(),
                    entropy_left_tgt: stats_tgt.branching_entropy_left(&candidate.target).unwrap(),
                    entropy_right_tgt: stats_tgt.branching_entropy_right(&candidate.target).unwrap(),
                };
                survivors.push(pair);
            }
            Err(StatsError::PhraseNotFound { .. }) => {
                outcome.dropped_unseen.push(candidate.clone());
            }
            Err(StatsError::PhraseTooLong { .. }) => continue,
            Err(_) => continue,
        }
    }

    survivors.sort_by(|a, b| {
        let ka = (
            std::cmp::Reverse(a.candidate.source_span.1),
            a.candidate.source_span.0,
            std::cmp::Reverse(a.candidate.target_span.1),
            a.candidate.target_span.0,
        );
        let kb = (
            std::cmp::Reverse(b.candidate.source_span.1),
            b.candidate.source_span.0,
            std::cmp::Reverse(b.candidate.target_span.1),
            b.candidate.target_span.0,
        );
        ka.cmp(&kb)
    });
    let mut taken_src: Vec<(usize, usize)> = Vec::new();
    let mut taken_tgt: Vec<(usize, usize)> = Vec::new();
    let overlaps = |spans: &[(usize, usize)], span: (usize, usize)| {
        spans
            .iter()
            .any(|&(s, l)| span.0 < s + l && s < span.0 + span.1)
    };
    let mut kept = Vec::new();
    for pair in survivors {
        if overlaps(&taken_src, pair.candidate.source_span) || overlaps(&taken_tgt, pair.candidate.target_span) {
            continue;
        }
        taken_src.push(pair.candidate.source_span);
        taken_tgt.push(pair.candidate.target_span);
        kept.push(pair);
    }
    kept.sort_by_key(|p| p.candidate.source_span.0);
    outcome.selected = kept;
    outcome
}

/// Corpus-level mining totals (the four type/occurrence statistics).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelectionInventory {
    pub occurrences: u64,
    pub pair_types: usize,
    pub source_types: usize,
    pub target_types: usize,
}

/// Per-sentence selections plus the global inventory over a corpus.
#[derive(Debug, Default)]
pub struct MiningResult {
    pub per_pair: Vec<SelectionOutcome>,
    pub inventory: SelectionInventory,
}

/// Runs candidate extraction and selection over every corpus pair.
#[allow(clippy::too_many_arguments)]
pub fn mine_training_pairs(
    corpus: &ParallelCorpus,
    table: &PhraseTable,
    alignments: Option<&[WordAlignment]>,
    stats_src: &NgramStatistics,
    stats_tgt: &NgramStatistics,
    vocab_src: &Vocabulary,
    vocab_tgt: &Vocabulary,
    cfg: &SelectionConfig,
) -> Result<MiningResult, SelectError> {
    if let Some(alignments) = alignments {
        if alignments.len() != corpus.len() {
            return Err(SelectError::AlignmentCountMismatch {
                corpus: corpus.len(),
                alignments: alignments.len(),
            });
        }
    }
    let per_pair: Vec<SelectionOutcome> = corpus
        .pairs
        .par_iter()
        .enumerate()
        .map(|(idx, (source, target))| {
            let alignment = alignments.map(|a| &a[idx]);
            let candidates = align_candidates(source, target, table, alignment, cfg.max_phrase_len);
            select_phrase_pairs(&candidates, stats_src, stats_tgt, vocab_src, vocab_tgt, cfg)
        })
        .collect();

    let mut inventory = SelectionInventory::default();
    let mut pair_types: HashSet<(&[String], &[String])> = HashSet::new();
    let mut source_types: HashSet<&[String]> = HashSet::new();
    let mut target_types: HashSet<&[String]> = HashSet::new();
    for outcome in &per_pair {
        for pair in &outcome.selected {
            inventory.occurrences += 1;
            pair_types.insert((&pair.candidate.source, &pair.candidate.target));
            source_types.insert(&pair.candidate.source);
            target_types.insert(&pair.candidate.target);
        }
    }
    inventory.pair_types = pair_types.len();
    inventory.source_types = source_types.len();
    inventory.target_types = target_types.len();

    Ok(MiningResult { per_pair, inventory })
}

/// Writes the tab-separated selection report with a documented header.
pub fn write_selection_report(result: &MiningResult, path: impl AsRef<Path>) -> Result<(), SelectError> {
    let mut out = String::from(
        "#sentence\tsrc_start\tsrc_len\ttgt_start\ttgt_len\th_l_src\th_r_src\th_l_tgt\th_r_tgt\tprovenance\tsrc_phrase\ttgt_phrase\n",
    );
    for (idx, outcome) in result.per_pair.iter().enumerate() {
        for pair in &outcome.selected {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\n",
                idx,
                pair.candidate.source_span.0,
                pair.candidate.source_span.1,
                pair.candidate.target_span.0,
                pair.candidate.target_span.1,
                pair.entropy_left_src,
                pair.entropy_right_src,
                pair.entropy_left_tgt,
                pair.entropy_right_tgt,
                pair.candidate.provenance.as_str(),
                pair.candidate.source.join(" "),
                pair.candidate.target.join(" "),
            ));
        }
    }
    fs::write(path.as_ref(), out).map_err(|source| SelectError::Io {
        path: path.as_ref().to_path_buf(),
        source,
    })
}

/// Recomputes the inventory from per-sentence outcomes; used for report
/// cross-checks.
pub fn inventory_of(per_pair: &[SelectionOutcome]) -> SelectionInventory {
    let mut inventory = SelectionInventory::default();
    let mut pair_types: HashMap<(Vec<String>, Vec<String>), ()> = HashMap::new();
    let mut source_types: HashSet<Vec<String>> = HashSet::new();
    let mut target_types: HashSet<Vec<String>> = HashSet::new();
    for outcome in per_pair {
        for pair in &outcome.selected {
            inventory.occurrences += 1;
            pair_types.insert((pair.candidate.source.clone(), pair.candidate.target.clone()), ());
            source_types.insert(pair.candidate.source.clone());
            target_types.insert(pair.candidate.target.clone());
        }
    }
    inventory.pair_types = pair_types.len();
    inventory.source_types = source_types.len();
    inventory.target_types = target_types.len();
    inventory
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, Sentence};
    use crate::stats::count_ngrams;

    fn sent(s: &str) -> Sentence {
        Sentence::parse(s).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    /// Source side where "p q" sits between varied flankers while p and q
    /// otherwise live in a fixed filler pattern; target side is the same
    /// structure uppercased.
    fn fixture_corpus() -> ParallelCorpus {
        let mut pairs = Vec::new();
        for l in ["a", "b", "c", "d"] {
            for r in ["e", "f", "g", "h"] {
                for _ in 0..2 {
                    pairs.push((
                        sent(&format!("{l} p q {r}")),
                        sent(&format!("{} P Q {}", l.to_uppercase(), r.to_uppercase())),
                    ));
                }
            }
        }
        for _ in 0..100 {
            pairs.push((sent("z p z"), sent("Z P Z")));
            pairs.push((sent("z q z"), sent("Z Q Z")));
        }
        ParallelCorpus::new(pairs)
    }

    struct Fixture {
        corpus: ParallelCorpus,
        stats_src: NgramStatistics,
        stats_tgt: NgramStatistics,
        vocab_src: Vocabulary,
        vocab_tgt: Vocabulary,
        table: PhraseTable,
    }

    fn fixture() -> Fixture {
        let corpus = fixture_corpus();
        let stats_src = count_ngrams(corpus.source_side(), 3);
        let stats_tgt = count_ngrams(corpus.target_side(), 3);
        // cap 1 keeps only "z"/"Z"; p, q and the flankers are OOV
        let vocab_src = build_vocabulary(corpus.source_side(), 1);
        let vocab_tgt = build_vocabulary(corpus.target_side(), 1);
        let table = PhraseTable::from_entries([(toks("p q"), toks("P Q"), 1.0)]);
        Fixture {
            corpus,
            stats_src,
            stats_tgt,
            vocab_src,
            vocab_tgt,
            table,
        }
    }

    fn cfg(bound: f64) -> SelectionConfig {
        SelectionConfig {
            max_phrase_len: 3,
            entropy_lower_bound: bound,
            stop_words_src: HashSet::new(),
            stop_words_tgt: HashSet::new(),
        }
    }

    fn compound_candidates(f: &Fixture) -> Vec<CandidatePair> {
        let (source, target) = &f.corpus.pairs[0];
        align_candidates(source, target, &f.table, None, 3)
    }

    #[test]
    fn selects_compound_at_low_bound_rejects_at_high() {
        let f = fixture();
        let candidates = compound_candidates(&f);
        assert_eq!(candidates.len(), 1);

        let outcome = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &cfg(1.5),
        );
        assert_eq!(outcome.selected.len(), 1);
        let pair = &outcome.selected[0];
        assert_eq!(pair.candidate.source, toks("p q"));
        assert_eq!(pair.entropy_left_src, 2.0);
        assert_eq!(pair.entropy_right_src, 2.0);

        let outcome = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &cfg(2.5),
        );
        assert!(outcome.selected.is_empty());
    }

    #[test]
    fn fully_in_vocabulary_candidate_is_rejected() {
        let f = fixture();
        let candidates = compound_candidates(&f);
        // vocabulary large enough to contain every token of both sides
        let vocab_src = build_vocabulary(f.corpus.source_side(), 1000);
        let vocab_tgt = build_vocabulary(f.corpus.target_side(), 1000);
        let outcome = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &vocab_src, &vocab_tgt, &cfg(1.5),
        );
        assert!(outcome.selected.is_empty());
    }

    #[test]
    fn stop_word_on_either_side_rejects() {
        let f = fixture();
        let candidates = compound_candidates(&f);
        let mut with_src_stop = cfg(1.5);
        with_src_stop.stop_words_src.insert("p".into());
        let outcome = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &with_src_stop,
        );
        assert!(outcome.selected.is_empty());

        let mut with_tgt_stop = cfg(1.5);
        with_tgt_stop.stop_words_tgt.insert("Q".into());
        let outcome = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &with_tgt_stop,
        );
        assert!(outcome.selected.is_empty());
    }

    #[test]
    fn unseen_phrase_is_dropped_with_diagnostic() {
        let f = fixture();
        let source = sent("novel1 novel2");
        let target = sent("N1 N2");
        let table = PhraseTable::from_entries([(toks("novel1 novel2"), toks("N1 N2"), 1.0)]);
        let candidates = align_candidates(&source, &target, &table, None, 3);
        assert_eq!(candidates.len(), 1);
        let outcome = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &cfg(1.5),
        );
        assert!(outcome.selected.is_empty());
        assert_eq!(outcome.dropped_unseen.len(), 1);
    }

    #[test]
    fn overlapping_survivors_are_resolved_deterministically() {
        let f = fixture();
        let mk = |s: (usize, usize), t: (usize, usize)| CandidatePair {
            source_span: s,
            target_span: t,
            source: toks("p q"),
            target: toks("P Q"),
            provenance: crate::aligner::Provenance::PhraseTable,
        };
        // same qualifying source span claimed for two target spans: only
        // the leftmost target survives
        let candidates = vec![mk((0, 2), (3, 2)), mk((0, 2), (0, 2))];
        let outcome = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &cfg(1.5),
        );
        assert_eq!(outcome.selected.len(), 1);
        assert_eq!(outcome.selected[0].candidate.target_span, (0, 2));
    }

    #[test]
    fn mining_requires_coindexed_alignments() {
        let f = fixture();
        let alignments = vec![WordAlignment::default()];
        let err = mine_training_pairs(
            &f.corpus,
            &f.table,
            Some(&alignments),
            &f.stats_src,
            &f.stats_tgt,
            &f.vocab_src,
            &f.vocab_tgt,
            &cfg(1.5),
        );
        assert!(matches!(err, Err(SelectError::AlignmentCountMismatch { .. })));
    }

    #[test]
    fn mining_empty_corpus_gives_zero_inventory() {
        let f = fixture();
        let empty = ParallelCorpus::new(Vec::new());
        let result = mine_training_pairs(
            &empty, &f.table, None, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &cfg(1.5),
        )
        .unwrap();
        assert!(result.per_pair.is_empty());
        assert_eq!(result.inventory, SelectionInventory::default());
    }

    #[test]
    fn mining_inventory_counts_types_and_occurrences() {
        let f = fixture();
        let result = mine_training_pairs(
            &f.corpus, &f.table, None, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &cfg(1.5),
        )
        .unwrap();
        // "p q" occurs in the 32 compound sentences, one type each way
        assert_eq!(result.inventory.occurrences, 32);
        assert_eq!(result.inventory.pair_types, 1);
        assert_eq!(result.inventory.source_types, 1);
        assert_eq!(result.inventory.target_types, 1);
        assert_eq!(inventory_of(&result.per_pair), result.inventory);
    }

    #[test]
    fn enlarging_stop_words_never_adds_selections() {
        let f = fixture();
        let candidates = compound_candidates(&f);
        let base = select_phrase_pairs(
            &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &cfg(1.5),
        );
        for stop in ["p", "q", "a", "z"] {
            let mut larger = cfg(1.5);
            larger.stop_words_src.insert(stop.to_string());
            let restricted = select_phrase_pairs(
                &candidates, &f.stats_src, &f.stats_tgt, &f.vocab_src, &f.vocab_tgt, &larger,
            );
            for pair in &restricted.selected {
                assert!(base.selected.contains(pair));
            }
        }
    }
}
