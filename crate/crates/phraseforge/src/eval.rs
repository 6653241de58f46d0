//! Translation scoring: corpus BLEU, untranslated-token counts and the
//! arithmetic of human pairwise / adequacy judgements.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::Sentence;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("candidate/reference counts differ: {candidates} vs {references}")]
    LengthMismatch {
        candidates: usize,
        references: usize,
    },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no judgements (W + L + T = 0)")]
    NoJudgements,
    #[error("adequacy score {score} out of range 1..=5")]
    ScoreOutOfRange { score: i64 },
    #[error("empty score list")]
    NoScores,
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

const BLEU_MAX_ORDER: usize = 4;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts: HashMap<&[String], u64> = HashMap::new();
    if tokens.len() >= n {
        for start in 0..=(tokens.len() - n) {
            *counts.entry(&tokens[start..start + n]).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU on the 0–100 scale: geometric mean of clipped n-gram
/// precisions for n = 1..4 times the brevity penalty, no smoothing, single
/// reference, case-sensitive.
pub fn corpus_bleu(candidates: &[Sentence], references: &[Sentence]) -> Result<f64, EvalError> {
    if candidates.len() != references.len() {
        return Err(EvalError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut matched = [0u64; BLEU_MAX_ORDER];
    let mut total = [0u64; BLEU_MAX_ORDER];
    let mut cand_len = 0u64;
    let mut ref_len = 0u64;
    for (candidate, reference) in candidates.iter().zip(references) {
        cand_len += candidate.len() as u64;
        ref_len += reference.len() as u64;
        for n in 1..=BLEU_MAX_ORDER {
            let cand_counts = ngram_counts(candidate.tokens(), n);
            let ref_counts = ngram_counts(reference.tokens(), n);
            for (ngram, count) in &cand_counts {
                total[n - 1] += count;
                let clip = ref_counts.get(ngram).copied().unwrap_or(0);
                matched[n - 1] += (*count).min(clip);
            }
        }
    }
    let mut log_precision_sum = 0.0;
    for n in 0..BLEU_MAX_ORDER {
        if matched[n] == 0 || total[n] == 0 {
            return Ok(0.0);
        }
        log_precision_sum += (matched[n] as f64 / total[n] as f64).ln();
    }
    let brevity = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    Ok(100.0 * brevity * (log_precision_sum / BLEU_MAX_ORDER as f64).exp())
}

/// Untranslated count: occurrences of the unk literal in the output plus
/// source tokens with a lexicon entry none of whose acceptable targets
/// appears in the output; each source token counted at most once.
pub fn count_untranslated(
    source: &Sentence,
    output: &Sentence,
    lexicon: &HashMap<String, HashSet<String>>,
    unk_literal: &str,
) -> usize {
    let unk = output.tokens().iter().filter(|t| *t == unk_literal).count();
    let output_tokens: HashSet<&str> = output.tokens().iter().map(String::as_str).collect();
    let missing = source
        .tokens()
        .iter()
        .filter(|token| {
            lexicon
                .get(*token)
                .map(|targets| !targets.iter().any(|t| output_tokens.contains(t.as_str())))
                .unwrap_or(false)
        })
        .count();
    unk + missing
}

/// `100 × (W − L) / (W + L + T)`; ranges over [−100, 100].
pub fn pairwise_score(wins: u64, losses: u64, ties: u64) -> Result<f64, EvalError> {
    let total = wins + losses + ties;
    if total == 0 {
        return Err(EvalError::NoJudgements);
    }
    Ok(100.0 * (wins as f64 - losses as f64) / total as f64)
}

/// Arithmetic mean of 1–5 adequacy scores.
pub fn adequacy_average(scores: &[i64]) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoScores);
    }
    for &score in scores {
        if !(1..=5).contains(&score) {
            return Err(EvalError::ScoreOutOfRange { score });
        }
    }
    Ok(scores.iter().sum::<i64>() as f64 / scores.len() as f64)
}

/// Loads a lexicon file: `source<TAB>target target ...`, one source token
/// per line with its set of acceptable translations.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<HashMap<String, HashSet<String>>, EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lexicon: HashMap<String, HashSet<String>> = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (src, targets) = line.split_once('\t').ok_or_else(|| EvalError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            reason: "expected source<TAB>targets".into(),
        })?;
        lexicon
            .entry(src.to_string())
            .or_default()
            .extend(targets.split(' ').filter(|t| !t.is_empty()).map(str::to_string));
    }
    Ok(lexicon)
}

/// Loads pairwise judgements from a tab-separated `(id, label)` file with
/// labels W, L or T; returns the three counts.
pub fn load_judgements(path: impl AsRef<Path>) -> Result<(u64, u64, u64), EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let label = line.split('\t').nth(1).ok_or_else(|| EvalError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            reason: "expected id<TAB>label".into(),
        })?;
        match label {
            "W" => wins += 1,
            "L" => losses += 1,
            "T" => ties += 1,
            other => {
                return Err(EvalError::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    reason: format!("unknown label {other:?} (expected W, L or T)"),
                })
            }
        }
    }
    Ok((wins, losses, ties))
}

/// Loads adequacy scores from a tab-separated `(id, score)` file.
pub fn load_adequacy_scores(path: impl AsRef<Path>) -> Result<Vec<i64>, EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scores = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let score = line
            .split('\t')
            .nth(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| EvalError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: "expected id<TAB>integer score".into(),
            })?;
        scores.push(score);
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::fs;

    fn sent(s: &str) -> Sentence {
        Sentence::parse(s).unwrap()
    }

    fn side(lines: &[&str]) -> Vec<Sentence> {
        lines.iter().map(|l| sent(l)).collect()
    }

    #[test]
    fn identical_corpus_scores_100() {
        let c = side(&["a b c d e", "f g h i"]);
        assert_eq!(corpus_bleu(&c, &c).unwrap(), 100.0);
    }

    #[test]
    fn no_shared_fourgram_scores_0() {
        let cand = side(&["a b c d e"]);
        let reference = side(&["a b c x e"]);
        assert_eq!(corpus_bleu(&cand, &reference).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_lengths_and_empty_corpus_error() {
        let c = side(&["a"]);
        assert!(matches!(
            corpus_bleu(&c, &[]),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(corpus_bleu(&[], &[]), Err(EvalError::EmptyCorpus)));
    }

    #[test]
    fn brevity_penalty_applies_to_short_candidates() {
        let cand = side(&["a b c d"]);
        let reference = side(&["a b c d e f g h"]);
        // precisions are 1 up to 4-grams; BP = exp(1 - 8/4)
        let expected = 100.0 * (1.0f64 - 2.0).exp();
        let got = corpus_bleu(&cand, &reference).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn untranslated_counts_unks_and_missing_lexicon_targets() {
        let lexicon = HashMap::new();
        let n = count_untranslated(&sent("a b"), &sent("<unk> x <unk>"), &lexicon, "<unk>");
        assert_eq!(n, 2);

        let lexicon = HashMap::from([("p".to_string(), HashSet::from(["r".to_string()]))]);
        assert_eq!(count_untranslated(&sent("p"), &sent("u r v"), &lexicon, "<unk>"), 0);
        assert_eq!(count_untranslated(&sent("p"), &sent("u v"), &lexicon, "<unk>"), 1);
    }

    #[test]
    fn untranslated_matches_double_loop_oracle() {
        let sources = ["p q r", "p p z", "m"];
        let outputs = ["A B", "<unk> P", "Q R <unk>"];
        let lexicon: HashMap<String, HashSet<String>> = HashMap::from([
            ("p".to_string(), HashSet::from(["P".to_string()])),
            ("q".to_string(), HashSet::from(["Q".to_string(), "B".to_string()])),
            ("r".to_string(), HashSet::from(["R".to_string()])),
        ]);
        for source in sources {
            for output in outputs {
                let source = sent(source);
                let output = sent(output);
                let mut expected = output.tokens().iter().filter(|t| *t == "<unk>").count();
                for token in source.tokens() {
                    if let Some(targets) = lexicon.get(token) {
                        let mut found = false;
                        for t in targets {
                            for o in output.tokens() {
                                if o == t {
                                    found = true;
                                }
                            }
                        }
                        if !found {
                            expected += 1;
                        }
                    }
                }
                assert_eq!(
                    count_untranslated(&source, &output, &lexicon, "<unk>"),
                    expected
                );
            }
        }
    }

    #[test]
    fn pairwise_score_formula() {
        assert_eq!(pairwise_score(10, 0, 0).unwrap(), 100.0);
        assert_eq!(pairwise_score(5, 5, 7).unwrap(), 0.0);
        assert_eq!(pairwise_score(29, 0, 171).unwrap(), 14.5);
        assert!(matches!(pairwise_score(0, 0, 0), Err(EvalError::NoJudgements)));
    }

    #[test]
    fn adequacy_mean_and_range_check() {
        assert_eq!(adequacy_average(&[5, 5, 5]).unwrap(), 5.0);
        assert_eq!(adequacy_average(&[1, 5]).unwrap(), 3.0);
        assert!(matches!(
            adequacy_average(&[3, 6]),
            Err(EvalError::ScoreOutOfRange { score: 6 })
        ));
        assert!(matches!(adequacy_average(&[]), Err(EvalError::NoScores)));
    }

    #[test]
    fn judgement_and_score_files() {
        let dir = tempfile::tempdir().unwrap();
        let j = dir.path().join("judgements.tsv");
        fs::write(&j, "1\tW\n2\tL\n3\tT\n4\tW\n").unwrap();
        assert_eq!(load_judgements(&j).unwrap(), (2, 1, 1));

        let s = dir.path().join("scores.tsv");
        fs::write(&s, "1\t4\n2\t5\n").unwrap();
        assert_eq!(load_adequacy_scores(&s).unwrap(), vec![4, 5]);
    }

    fn corpus_pair() -> impl Strategy<Value = (Vec<Sentence>, Vec<Sentence>)> {
        let token = prop::sample::select(vec!["a", "b", "c", "d"]);
        let sentence = prop::collection::vec(token, 1..10).prop_map(|t| Sentence::new(t).unwrap());
        prop::collection::vec((sentence.clone(), sentence), 1..10)
            .prop_map(|pairs| pairs.into_iter().unzip())
    }

    proptest! {
        #[test]
        fn bleu_invariant_to_corpus_reordering((cand, refs) in corpus_pair()) {
            let forward = corpus_bleu(&cand, &refs).unwrap();
            let mut rc: Vec<_> = cand.iter().cloned().rev().collect();
            let mut rr: Vec<_> = refs.iter().cloned().rev().collect();
            let backward = corpus_bleu(&rc, &rr).unwrap();
            prop_assert!((forward - backward).abs() < 1e-9);
            rc.rotate_left(1);
            rr.rotate_left(1);
            let rotated = corpus_bleu(&rc, &rr).unwrap();
            prop_assert!((forward - rotated).abs() < 1e-9);
        }

        #[test]
        fn self_bleu_is_100((cand, _) in corpus_pair()) {
            // a corpus with no 4-grams at all scores 0 by definition
            prop_assume!(cand.iter().any(|s| s.len() >= 4));
            prop_assert_eq!(corpus_bleu(&cand, &cand).unwrap(), 100.0);
        }

        #[test]
        fn pairwise_antisymmetry(w in 0u64..500, l in 0u64..500, t in 0u64..500) {
            prop_assume!(w + l + t > 0);
            let a = pairwise_score(w, l, t).unwrap();
            let b = pairwise_score(l, w, t).unwrap();
            prop_assert!((a + b).abs() < 1e-12);
        }
    }
}
