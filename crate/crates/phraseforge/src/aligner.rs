//! SMT phrase tables, word alignments and candidate phrase-pair extraction.
//!
//! A candidate is a source/target span pair that is either listed in the
//! phrase table or consistent with the word alignment (at least one link
//! inside the rectangle, no link crossing its boundary).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rustc_hash::FxHashMap;

use crate::corpus::Sentence;

#[derive(Debug, thiserror::Error)]
pub enum AlignError {
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

/// Source phrase to ranked target translations, scores non-increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseTable {
    entries: FxHashMap<Vec<String>, Vec<(Vec<String>, f64)>>,
}

impl PhraseTable {
    pub fn from_entries<I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (Vec<String>, Vec<String>, f64)>,
    {
        let mut entries: FxHashMap<Vec<String>, Vec<(Vec<String>, f64)>> = FxHashMap::default();
        for (src, tgt, score) in rows {
            assert!(!src.is_empty() && !tgt.is_empty(), "empty phrase in table entry");
            entries.entry(src).or_default().push((tgt, score));
        }
        for translations in entries.values_mut() {
            translations.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        }
        PhraseTable { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ranked translations of a source phrase, best first.
    pub fn translations(&self, source: &[String]) -> Option<&[(Vec<String>, f64)]> {
        self.entries.get(source).map(|v| v.as_slice())
    }

    pub fn best_translation(&self, source: &[String]) -> Option<&[String]> {
        self.translations(source).map(|t| t[0].0.as_slice())
    }

    pub fn contains_pair(&self, source: &[String], target: &[String]) -> bool {
        self.translations(source)
            .map(|ts| ts.iter().any(|(t, _)| t == target))
            .unwrap_or(false)
    }

    /// Serializes back to the " ||| " text format in deterministic order.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), AlignError> {
        let mut keys: Vec<&Vec<String>> = self.entries.keys().collect();
        keys.sort();
        let mut out = String::new();
        for key in keys {
            for (target, score) in &self.entries[key] {
                out.push_str(&format!("{} ||| {} ||| {}\n", key.join(" "), target.join(" "), score));
            }
        }
        fs::write(path.as_ref(), out).map_err(|source| AlignError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })
    }
}

/// Loads a phrase table in the usual SMT text format: fields separated by
/// `" ||| "`, the third field starting with the entry score.
pub fn load_phrase_table(path: impl AsRef<Path>) -> Result<PhraseTable, AlignError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| AlignError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(" ||| ").collect();
        if fields.len() < 3 {
            return Err(AlignError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: format!("expected at least 3 \" ||| \" fields, got {}", fields.len()),
            });
        }
        let src: Vec<String> = fields[0].split(' ').map(str::to_string).collect();
        let tgt: Vec<String> = fields[1].split(' ').map(str::to_string).collect();
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(AlignError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: "empty phrase".into(),
            });
        }
        let score: f64 = fields[2]
            .split(' ')
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|_| AlignError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                reason: format!("unparsable score in field 3: {:?}", fields[2]),
            })?;
        rows.push((src, tgt, score));
    }
    Ok(PhraseTable::from_entries(rows))
}

/// Word alignment links of one sentence pair, 0-based `(source, target)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordAlignment {
    links: Vec<(usize, usize)>,
}

impl WordAlignment {
    pub fn new(mut links: Vec<(usize, usize)>) -> Self {
        links.sort_unstable();
        links.dedup();
        WordAlignment { links }
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// `"i-j"` pairs separated by single spaces; empty for no links.
    pub fn to_line(&self) -> String {
        self.links
            .iter()
            .map(|(i, j)| format!("{i}-{j}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Loads one alignment per line, links as space-separated `"i-j"` pairs.
pub fn load_word_alignments(path: impl AsRef<Path>) -> Result<Vec<WordAlignment>, AlignError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| AlignError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut alignments = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut links = Vec::new();
        for token in line.split(' ').filter(|t| !t.is_empty()) {
            let link = token.split_once('-').and_then(|(i, j)| {
                Some((i.parse::<usize>().ok()?, j.parse::<usize>().ok()?))
            });
            match link {
                Some(link) => links.push(link),
                None => {
                    return Err(AlignError::Parse {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        reason: format!("malformed link token {token:?}"),
                    })
                }
            }
        }
        alignments.push(WordAlignment::new(links));
    }
    Ok(alignments)
}

/// How a candidate pair was justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    PhraseTable,
    AlignmentConsistent,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::PhraseTable => "phrase-table",
            Provenance::AlignmentConsistent => "alignment-consistent",
        }
    }
}

/// An aligned source/target span pair proposed from one sentence pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePair {
    /// `(start, length)` in source tokens.
    pub source_span: (usize, usize),
    /// `(start, length)` in target tokens.
    pub target_span: (usize, usize),
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub provenance: Provenance,
}

/// Emits every span pair with both lengths at most `max_len` that is either
/// a phrase-table entry or consistent with the supplied alignment, ordered by
/// `(source start, source length, target start, target length)`.
pub fn align_candidates(
    source: &Sentence,
    target: &Sentence,
    table: &PhraseTable,
    alignment: Option<&WordAlignment>,
    max_len: usize,
) -> Vec<CandidatePair> {
    assert!(max_len >= 1, "max_len must be >= 1");
    let src = source.tokens();
    let tgt = target.tokens();
    let mut found: BTreeMap<(usize, usize, usize, usize), Provenance> = BTreeMap::new();

    // (b) alignment-consistent span pairs via target-range projection
    if let Some(alignment) = alignment {
        let links: Vec<(usize, usize)> = alignment
            .links()
            .iter()
            .copied()
            .filter(|&(i, j)| i < src.len() && j < tgt.len())
            .collect();
        if !links.is_empty() {
            let mut tgt_aligned = vec![false; tgt.len()];
            for &(_, j) in &links {
                tgt_aligned[j] = true;
            }
            for i1 in 0..src.len() {
                for i2 in i1..src.len().min(i1 + max_len) {
                    let (mut min_t, mut max_t) = (usize::MAX, 0);
                    for &(i, j) in &links {
                        if i >= i1 && i <= i2 {
                            min_t = min_t.min(j);
                            max_t = max_t.max(j);
                        }
                    }
                    if min_t == usize::MAX {
                        continue;
                    }
                    let crossing = links
                        .iter()
                        .any(|&(i, j)| j >= min_t && j <= max_t && (i < i1 || i > i2));
                    if crossing {
                        continue;
                    }
                    // grow over unaligned target neighbours
                    let mut j1 = min_t;
                    loop {
                        let mut j2 = max_t;
                        loop {
                            if j2 - j1 + 1 <= max_len {
                                found
                                    .entry((i1, i2 - i1 + 1, j1, j2 - j1 + 1))
                                    .or_insert(Provenance::AlignmentConsistent);
                            }
                            if j2 + 1 >= tgt.len() || tgt_aligned[j2 + 1] {
                                break;
                            }
                            j2 += 1;
                        }
                        if j1 == 0 || tgt_aligned[j1 - 1] {
                            break;
                        }
                        j1 -= 1;
                    }
                }
            }
        }
    }

    // (a) phrase-table hits; overrides provenance where both apply
    if !table.is_empty() {
        let mut tgt_spans: FxHashMap<&[String], Vec<(usize, usize)>> = FxHashMap::default();
        for start in 0..tgt.len() {
            for len in 1..=max_len.min(tgt.len() - start) {
                tgt_spans.entry(&tgt[start..start + len]).or_default().push((start, len));
            }
        }
        for start in 0..src.len() {
            for len in 1..=max_len.min(src.len() - start) {
                let Some(translations) = table.translations(&src[start..start + len]) else {
                    continue;
                };
                for (translation, _) in translations {
                    if let Some(spans) = tgt_spans.get(translation.as_slice()) {
                        for &(t_start, t_len) in spans {
                            found.insert((start, len, t_start, t_len), Provenance::PhraseTable);
                        }
                    }
                }
            }
        }
    }

    found
        .into_iter()
        .map(|((s_start, s_len, t_start, t_len), provenance)| CandidatePair {
            source_span: (s_start, s_len),
            target_span: (t_start, t_len),
            source: src[s_start..s_start + s_len].to_vec(),
            target: tgt[t_start..t_start + t_len].to_vec(),
            provenance,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::fs;

    fn sent(s: &str) -> Sentence {
        Sentence::parse(s).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_string).collect()
    }

    #[test]
    fn phrase_table_line_parses_first_score() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table");
        fs::write(&path, "a b ||| x y ||| 0.5 0.1\n").unwrap();
        let table = load_phrase_table(&path).unwrap();
        assert_eq!(
            table.translations(&toks("a b")).unwrap(),
            &[(toks("x y"), 0.5)]
        );
    }

    #[test]
    fn phrase_table_entries_ranked_by_score() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table");
        fs::write(&path, "a ||| x ||| 0.2\na ||| y ||| 0.7\n").unwrap();
        let table = load_phrase_table(&path).unwrap();
        assert_eq!(
            table.translations(&toks("a")).unwrap(),
            &[(toks("y"), 0.7), (toks("x"), 0.2)]
        );
    }

    #[test]
    fn phrase_table_rejects_malformed_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table");
        fs::write(&path, "a ||| x\n").unwrap();
        match load_phrase_table(&path) {
            Err(AlignError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn alignment_parse_and_empty_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("align");
        fs::write(&path, "0-0 1-2\n\n3-1\n").unwrap();
        let alignments = load_word_alignments(&path).unwrap();
        assert_eq!(alignments[0].links(), &[(0, 0), (1, 2)]);
        assert!(alignments[1].is_empty());
        assert_eq!(alignments[2].links(), &[(3, 1)]);
    }

    #[test]
    fn alignment_rejects_bad_token() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("align");
        fs::write(&path, "0-0\n1-x\n").unwrap();
        match load_word_alignments(&path) {
            Err(AlignError::Parse { line, reason, .. }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("1-x"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn table_lookup_produces_candidate() {
        let table = PhraseTable::from_entries([(toks("b"), toks("y"), 1.0)]);
        let got = align_candidates(&sent("a b c"), &sent("x y"), &table, None, 3);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].source_span, (1, 1));
        assert_eq!(got[0].target_span, (1, 1));
        assert_eq!(got[0].provenance, Provenance::PhraseTable);
    }

    #[test]
    fn diagonal_alignment_candidates() {
        let alignment = WordAlignment::new(vec![(0, 0), (1, 1)]);
        let got = align_candidates(
            &sent("a b"),
            &sent("x y"),
            &PhraseTable::default(),
            Some(&alignment),
            2,
        );
        let spans: Vec<_> = got.iter().map(|c| (c.source_span, c.target_span)).collect();
        assert!(spans.contains(&((0, 1), (0, 1))));
        assert!(spans.contains(&((1, 1), (1, 1))));
        assert!(spans.contains(&((0, 2), (0, 2))));
        // link (0,0) leaves the rectangle of a/y
        assert!(!spans.contains(&((0, 1), (1, 1))));
    }

    #[test]
    fn empty_table_and_no_alignment_yield_nothing() {
        let got = align_candidates(&sent("a b"), &sent("x y"), &PhraseTable::default(), None, 2);
        assert!(got.is_empty());
    }

    /// Rectangle predicate applied to every span pair by brute force.
    fn oracle_candidates(
        src: &[String],
        tgt: &[String],
        table: &PhraseTable,
        alignment: Option<&WordAlignment>,
        max_len: usize,
    ) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for i in 0..src.len() {
            for sl in 1..=max_len.min(src.len() - i) {
                for j in 0..tgt.len() {
                    for tl in 1..=max_len.min(tgt.len() - j) {
                        let by_table = table.contains_pair(&src[i..i + sl], &tgt[j..j + tl]);
                        let by_align = alignment.map_or(false, |a| {
                            let links: Vec<_> = a
                                .links()
                                .iter()
                                .filter(|&&(s, t)| s < src.len() && t < tgt.len())
                                .collect();
                            let inside = links
                                .iter()
                                .any(|&&(s, t)| s >= i && s < i + sl && t >= j && t < j + tl);
                            let crossing = links.iter().any(|&&(s, t)| {
                                let s_in = s >= i && s < i + sl;
                                let t_in = t >= j && t < j + tl;
                                s_in != t_in
                            });
                            inside && !crossing
                        });
                        if by_table || by_align {
                            out.push(((i, sl), (j, tl)));
                        }
                    }
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn matches_exhaustive_enumeration(
            src_len in 1usize..8,
            tgt_len in 1usize..8,
            links in prop::collection::vec((0usize..8, 0usize..8), 0..10),
            table_pairs in prop::collection::vec(((0usize..8, 1usize..3), (0usize..8, 1usize..3)), 0..4),
            max_len in 1usize..4,
        ) {
            let vocab_s = ["a", "b", "c"];
            let vocab_t = ["x", "y", "z"];
            let src: Vec<String> = (0..src_len).map(|i| vocab_s[i % 3].to_string()).collect();
            let tgt: Vec<String> = (0..tgt_len).map(|i| vocab_t[i % 3].to_string()).collect();
            let source = Sentence::new(src.clone()).unwrap();
            let target = Sentence::new(tgt.clone()).unwrap();
            let alignment = WordAlignment::new(
                links.into_iter().filter(|&(i, j)| i < src_len && j < tgt_len).collect(),
            );
            let table = PhraseTable::from_entries(table_pairs.into_iter().filter_map(
                |((si, sl), (ti, tl))| {
                    if si + sl <= src_len && ti + tl <= tgt_len {
                        Some((src[si..si + sl].to_vec(), tgt[ti..ti + tl].to_vec(), 1.0))
                    } else {
                        None
                    }
                },
            ));
            let got = align_candidates(&source, &target, &table, Some(&alignment), max_len);
            let got_spans: Vec<_> = got.iter().map(|c| (c.source_span, c.target_span)).collect();
            let want = oracle_candidates(&src, &tgt, &table, Some(&alignment), max_len);
            prop_assert_eq!(&got_spans, &want);
            // emitted tokens reproduce their spans
            for c in &got {
                prop_assert_eq!(&c.source[..], &src[c.source_span.0..c.source_span.0 + c.source_span.1]);
                prop_assert_eq!(&c.target[..], &tgt[c.target_span.0..c.target_span.0 + c.target_span.1]);
            }
        }
    }

    #[test]
    fn table_file_roundtrip() {
        let table = PhraseTable::from_entries([
            (toks("a b"), toks("x"), 0.5),
            (toks("a b"), toks("y z"), 0.25),
            (toks("c"), toks("w"), 1.0),
        ]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table");
        table.write(&path).unwrap();
        let reloaded = load_phrase_table(&path).unwrap();
        assert_eq!(reloaded, table);
    }
}
