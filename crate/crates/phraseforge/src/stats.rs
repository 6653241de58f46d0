//! N-gram phrase frequencies, adjacency contexts and branching entropy.
//!
//! The counter makes a single pass over each sentence, enumerating every
//! window of up to `max_len + 1` tokens over the sentinel-padded token
//! sequence. Windows one longer than `max_len` exist only to supply the
//! left/right context counts of full-length phrases. Occurrences at sentence
//! edges contribute the [`crate::BOS`] / [`crate::EOS`] sentinels as
//! contexts, so context counts always sum to the phrase frequency.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::corpus::Sentence;
use crate::{BOS, EOS};

const BOS_ID: u32 = 0;
const EOS_ID: u32 = 1;
const FIRST_TOKEN_ID: u32 = 2;

const DUMP_MAGIC: &str = "phraseforge-ngram-stats";
const DUMP_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("phrase not counted: {phrase:?}")]
    PhraseNotFound { phrase: String },
    #[error("phrase length {len} exceeds max_len {max_len}")]
    PhraseTooLong { len: usize, max_len: usize },
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

#[derive(Default)]
struct Interner {
    ids: FxHashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn new() -> Self {
        let mut interner = Interner::default();
        interner.names.push(BOS.to_string());
        interner.names.push(EOS.to_string());
        interner.ids.insert(BOS.to_string(), BOS_ID);
        interner.ids.insert(EOS.to_string(), EOS_ID);
        interner
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    fn get(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }
}

#[derive(Default, Debug)]
struct PhraseStat {
    freq: u32,
    left: Vec<(u32, u32)>,
    right: Vec<(u32, u32)>,
}

/// Frequency index over phrases of up to `max_len` tokens plus their
/// left/right adjacency context counts. Immutable once built.
pub struct NgramStatistics {
    max_len: usize,
    interner: Interner,
    entries: FxHashMap<Box<[u32]>, PhraseStat>,
}

type WindowMap = FxHashMap<Box<[u32]>, u32>;

fn count_windows(padded: &[Vec<u32>], window_cap: usize) -> WindowMap {
    let mut map = WindowMap::default();
    for ids in padded {
        let n = ids.len();
        for start in 0..n {
            let longest = window_cap.min(n - start);
            for len in 1..=longest {
                let window = &ids[start..start + len];
                // bare sentinels carry no information
                if len == 1 && window[0] < FIRST_TOKEN_ID {
                    continue;
                }
                if let Some(count) = map.get_mut(window) {
                    *count += 1;
                } else {
                    map.insert(window.into(), 1);
                }
            }
        }
    }
    map
}

fn merge_windows(mut a: WindowMap, b: WindowMap) -> WindowMap {
    if a.len() < b.len() {
        return merge_windows(b, a);
    }
    for (window, count) in b {
        *a.entry(window).or_insert(0) += count;
    }
    a
}

/// Counts every contiguous token window of length 1..=`max_len` across the
/// side, with overlapping occurrences all counted, and tallies the adjacent
/// token on each side of every occurrence.
pub fn count_ngrams<'a, I>(side: I, max_len: usize) -> NgramStatistics
where
    I: IntoIterator<Item = &'a Sentence>,
{
    assert!(max_len >= 1, "max_len must be >= 1");
    let mut interner = Interner::new();
    let padded: Vec<Vec<u32>> = side
        .into_iter()
        .map(|sentence| {
            let mut ids = Vec::with_capacity(sentence.len() + 2);
            ids.push(BOS_ID);
            for token in sentence.tokens() {
                ids.push(interner.intern(token));
            }
            ids.push(EOS_ID);
            ids
        })
        .collect();

    let window_cap = max_len + 1;
    let windows = if padded.len() >= 4096 {
        padded
            .par_chunks(1024)
            .map(|chunk| count_windows(chunk, window_cap))
            .reduce(WindowMap::default, merge_windows)
    } else {
        count_windows(&padded, window_cap)
    };

    let mut entries: FxHashMap<Box<[u32]>, PhraseStat> = FxHashMap::default();
    for (window, count) in &windows {
        let m = window.len();
        let sentinel_free = window[0] >= FIRST_TOKEN_ID && window[m - 1] >= FIRST_TOKEN_ID;
        if sentinel_free && m <= max_len {
            entries.entry(window.clone()).or_default().freq += count;
        }
        if m >= 2 {
            let suffix = &window[1..];
            if suffix[m - 2] >= FIRST_TOKEN_ID {
                entries
                    .entry(suffix.into())
                    .or_default()
                    .left
                    .push((window[0], *count));
            }
            let prefix = &window[..m - 1];
            if prefix[0] >= FIRST_TOKEN_ID {
                entries
                    .entry(prefix.into())
                    .or_default()
                    .right
                    .push((window[m - 1], *count));
            }
        }
    }

    // Deterministic context order regardless of counting parallelism: the
    // entropy summation order must not depend on --jobs.
    for stat in entries.values_mut() {
        stat.left.sort_by(|a, b| interner.name(a.0).cmp(interner.name(b.0)));
        stat.right.sort_by(|a, b| interner.name(a.0).cmp(interner.name(b.0)));
    }

    NgramStatistics {
        max_len,
        interner,
        entries,
    }
}

fn entropy_bits(contexts: &[(u32, u32)], freq: u32) -> f64 {
    let f = f64::from(freq);
    let mut h = 0.0;
    for &(_, count) in contexts {
        let p = f64::from(count) / f;
        h -= p * p.log2();
    }
    h.max(0.0)
}

impl NgramStatistics {
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn distinct_phrases(&self) -> usize {
        self.entries.len()
    }

    fn resolve<S: AsRef<str>>(&self, phrase: &[S]) -> Result<Vec<u32>, StatsError> {
        if phrase.is_empty() || phrase.len() > self.max_len {
            return Err(StatsError::PhraseTooLong {
                len: phrase.len(),
                max_len: self.max_len,
            });
        }
        phrase
            .iter()
            .map(|t| {
                self.interner
                    .get(t.as_ref())
                    .ok_or_else(|| StatsError::PhraseNotFound {
                        phrase: join(phrase),
                    })
            })
            .collect()
    }

    fn stat<S: AsRef<str>>(&self, phrase: &[S]) -> Result<&PhraseStat, StatsError> {
        let ids = self.resolve(phrase)?;
        self.entries
            .get(ids.as_slice())
            .filter(|s| s.freq > 0)
            .ok_or_else(|| StatsError::PhraseNotFound {
                phrase: join(phrase),
            })
    }

    /// Occurrence count of the phrase, or `None` if unseen.
    pub fn freq<S: AsRef<str>>(&self, phrase: &[S]) -> Option<u32> {
        self.stat(phrase).ok().map(|s| s.freq)
    }

    /// Left adjacency counts `(context token, count)`; sentence-initial
    /// occurrences appear under the [`BOS`] literal.
    pub fn left_contexts<S: AsRef<str>>(&self, phrase: &[S]) -> Result<Vec<(String, u32)>, StatsError> {
        let stat = self.stat(phrase)?;
        Ok(stat
            .left
            .iter()
            .map(|&(id, c)| (self.interner.name(id).to_string(), c))
            .collect())
    }

    pub fn right_contexts<S: AsRef<str>>(&self, phrase: &[S]) -> Result<Vec<(String, u32)>, StatsError> {
        let stat = self.stat(phrase)?;
        Ok(stat
            .right
            .iter()
            .map(|&(id, c)| (self.interner.name(id).to_string(), c))
            .collect())
    }

    /// H_l(w) = −Σ_v p_l(v)·log2 p_l(v) with p_l(v) = f_{v,w} / f_w.
    pub fn branching_entropy_left<S: AsRef<str>>(&self, phrase: &[S]) -> Result<f64, StatsError> {
        let stat = self.stat(phrase)?;
        Ok(entropy_bits(&stat.left, stat.freq))
    }

    /// H_r(w) = −Σ_v p_r(v)·log2 p_r(v) with p_r(v) = f_{w,v} / f_w.
    pub fn branching_entropy_right<S: AsRef<str>>(&self, phrase: &[S]) -> Result<f64, StatsError> {
        let stat = self.stat(phrase)?;
        Ok(entropy_bits(&stat.right, stat.freq))
    }

    /// True iff both entropies of the phrase exceed `lower_bound` strictly
    /// while every proper contiguous substring stays at or below it on both
    /// sides.
    pub fn is_entropy_boundary<S: AsRef<str>>(
        &self,
        phrase: &[S],
        lower_bound: f64,
    ) -> Result<bool, StatsError> {
        if self.branching_entropy_left(phrase)? <= lower_bound
            || self.branching_entropy_right(phrase)? <= lower_bound
        {
            return Ok(false);
        }
        let n = phrase.len();
        for len in 1..n {
            for start in 0..=(n - len) {
                let sub = &phrase[start..start + len];
                if self.branching_entropy_left(sub)? > lower_bound
                    || self.branching_entropy_right(sub)? > lower_bound
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All counted phrases with their frequencies, in unspecified order.
    pub fn iter_phrases(&self) -> impl Iterator<Item = (Vec<&str>, u32)> {
        self.entries.iter().filter(|(_, s)| s.freq > 0).map(|(ids, stat)| {
            (
                ids.iter().map(|&id| self.interner.name(id)).collect(),
                stat.freq,
            )
        })
    }

    /// Writes the versioned text dump (see the repo README for the format).
    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), StatsError> {
        let path = path.as_ref();
        let mut keys: Vec<&Box<[u32]>> = self
            .entries
            .iter()
            .filter(|(_, s)| s.freq > 0)
            .map(|(k, _)| k)
            .collect();
        keys.sort_by(|a, b| {
            let ta: Vec<&str> = a.iter().map(|&id| self.interner.name(id)).collect();
            let tb: Vec<&str> = b.iter().map(|&id| self.interner.name(id)).collect();
            (a.len(), ta).cmp(&(b.len(), tb))
        });
        let mut out = String::new();
        out.push_str(&format!("{DUMP_MAGIC} {DUMP_VERSION}\n"));
        out.push_str(&format!("max_len {}\n", self.max_len));
        for key in keys {
            let stat = &self.entries[key.as_ref()];
            let phrase: Vec<&str> = key.iter().map(|&id| self.interner.name(id)).collect();
            out.push_str(&phrase.join(" "));
            out.push('\t');
            out.push_str(&stat.freq.to_string());
            out.push('\t');
            push_contexts(&mut out, &stat.left, &self.interner);
            out.push('\t');
            push_contexts(&mut out, &stat.right, &self.interner);
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| StatsError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads a dump produced by [`NgramStatistics::write`].
    pub fn read(path: impl AsRef<Path>) -> Result<Self, StatsError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| StatsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |line: usize, reason: &str| StatsError::Parse {
            path: path.to_path_buf(),
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let expected = format!("{DUMP_MAGIC} {DUMP_VERSION}");
        if header != expected {
            return Err(parse_err(1, &format!("expected header {expected:?}, got {header:?}")));
        }
        let (_, max_line) = lines.next().ok_or_else(|| parse_err(2, "missing max_len"))?;
        let max_len: usize = max_line
            .strip_prefix("max_len ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| parse_err(2, "malformed max_len line"))?;

        let mut interner = Interner::new();
        let mut entries: FxHashMap<Box<[u32]>, PhraseStat> = FxHashMap::default();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let mut fields = line.split('\t');
            let (phrase, freq, left, right) = match (
                fields.next(),
                fields.next(),
                fields.next(),
                fields.next(),
                fields.next(),
            ) {
                (Some(p), Some(f), Some(l), Some(r), None) => (p, f, l, r),
                _ => return Err(parse_err(lineno, "expected 4 tab-separated fields")),
            };
            let ids: Vec<u32> = phrase.split(' ').map(|t| interner.intern(t)).collect();
            let freq: u32 = freq
                .parse()
                .map_err(|_| parse_err(lineno, "bad frequency"))?;
            let parse_ctx = |field: &str, interner: &mut Interner| -> Result<Vec<(u32, u32)>, StatsError> {
                let mut ctx = Vec::new();
                if field.is_empty() {
                    return Ok(ctx);
                }
                let mut parts = field.split(' ');
                while let Some(token) = parts.next() {
                    let count = parts
                        .next()
                        .and_then(|c| c.parse().ok())
                        .ok_or_else(|| parse_err(lineno, "malformed context list"))?;
                    ctx.push((interner.intern(token), count));
                }
                Ok(ctx)
            };
            let left = parse_ctx(left, &mut interner)?;
            let right = parse_ctx(right, &mut interner)?;
            entries.insert(ids.into(), PhraseStat { freq, left, right });
        }
        for stat in entries.values_mut() {
            stat.left
                .sort_by(|a, b| interner.name(a.0).cmp(interner.name(b.0)));
            stat.right
                .sort_by(|a, b| interner.name(a.0).cmp(interner.name(b.0)));
        }
        Ok(NgramStatistics {
            max_len,
            interner,
            entries,
        })
    }
}

fn push_contexts(out: &mut String, contexts: &[(u32, u32)], interner: &Interner) {
    for (i, &(id, count)) in contexts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(interner.name(id));
        out.push(' ');
        out.push_str(&count.to_string());
    }
}

fn join<S: AsRef<str>>(phrase: &[S]) -> String {
    phrase
        .iter()
        .map(|t| t.as_ref())
        .collect::<Vec<_>>()
        .join(" ")
}
