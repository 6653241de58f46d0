//! Declarative run configuration: a TOML file with one section per
//! subsystem. Unknown keys are rejected; every key has a default or is
//! required by the subcommand that uses it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::aligner::{load_phrase_table, load_word_alignments, PhraseTable, WordAlignment};
use crate::corpus::Vocabulary;
use crate::rewriter::TokenTemplate;
use crate::selector::{load_stop_words, SelectionConfig};
use crate::stats::NgramStatistics;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {}", problems.join("; "))]
    Invalid { problems: Vec<String> },
    #[error("failed to load {what} from {path}: {message}")]
    Resource {
        what: &'static str,
        path: PathBuf,
        message: String,
    },
}

fn default_max_phrase_len() -> usize {
    7
}
fn default_entropy_lower_bound() -> f64 {
    5.0
}
fn default_vocab_cap() -> usize {
    40_000
}
fn default_template_prefix() -> String {
    "<T".to_string()
}
fn default_template_suffix() -> String {
    ">".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionSection {
    pub max_phrase_len: usize,
    pub entropy_lower_bound: f64,
    /// Stop-word file paths (one token per line).
    pub stop_words_src: Option<PathBuf>,
    pub stop_words_tgt: Option<PathBuf>,
    /// Alternatively, take the N most frequent vocabulary tokens.
    pub stop_top_n_src: Option<usize>,
    pub stop_top_n_tgt: Option<usize>,
}

impl Default for SelectionSection {
    fn default() -> Self {
        SelectionSection {
            max_phrase_len: default_max_phrase_len(),
            entropy_lower_bound: default_entropy_lower_bound(),
            stop_words_src: None,
            stop_words_tgt: None,
            stop_top_n_src: None,
            stop_top_n_tgt: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ResourcesSection {
    pub phrase_table: Option<PathBuf>,
    pub stats_src: Option<PathBuf>,
    pub stats_tgt: Option<PathBuf>,
    pub vocab_src: Option<PathBuf>,
    pub vocab_tgt: Option<PathBuf>,
    pub alignments: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TokensSection {
    pub template_prefix: String,
    pub template_suffix: String,
}

impl Default for TokensSection {
    fn default() -> Self {
        TokensSection {
            template_prefix: default_template_prefix(),
            template_suffix: default_template_suffix(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TranslatorsSection {
    /// Translator specs: `identity`, `dict:<path>`, `greedy:<path>`,
    /// `subprocess:<command>`.
    pub smt: Option<String>,
    pub nmt: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VocabSection {
    pub cap: usize,
}

impl Default for VocabSection {
    fn default() -> Self {
        VocabSection {
            cap: default_vocab_cap(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub selection: SelectionSection,
    pub resources: ResourcesSection,
    pub tokens: TokensSection,
    pub translators: TranslatorsSection,
    pub vocab: VocabSection,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn token_template(&self) -> TokenTemplate {
        TokenTemplate::new(&self.tokens.template_prefix, &self.tokens.template_suffix)
    }

    /// Checks that all `resources` keys in `required` are set and point at
    /// existing files; reports every problem at once.
    pub fn require_resources(&self, required: &[&str]) -> Result<(), ConfigError> {
        let lookup = |key: &str| -> Option<&Option<PathBuf>> {
            match key {
                "phrase_table" => Some(&self.resources.phrase_table),
                "stats_src" => Some(&self.resources.stats_src),
                "stats_tgt" => Some(&self.resources.stats_tgt),
                "vocab_src" => Some(&self.resources.vocab_src),
                "vocab_tgt" => Some(&self.resources.vocab_tgt),
                "alignments" => Some(&self.resources.alignments),
                _ => None,
            }
        };
        let mut problems = Vec::new();
        for key in required {
            match lookup(key) {
                Some(Some(path)) => {
                    if !path.exists() {
                        problems.push(format!("resources.{key}: file not found: {}", path.display()));
                    }
                }
                Some(None) => problems.push(format!("resources.{key} is required but unset")),
                None => problems.push(format!("unknown resource key {key}")),
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid { problems })
        }
    }
}

/// Everything the selection/decode path needs, loaded from a [`RunConfig`].
pub struct LoadedResources {
    pub table: PhraseTable,
    pub stats_src: NgramStatistics,
    pub stats_tgt: NgramStatistics,
    pub vocab_src: Vocabulary,
    pub vocab_tgt: Vocabulary,
    pub alignments: Option<Vec<WordAlignment>>,
    pub selection: SelectionConfig,
    pub template: TokenTemplate,
}

impl LoadedResources {
    pub fn load(cfg: &RunConfig) -> Result<Self, ConfigError> {
        cfg.require_resources(&[
            "phrase_table",
            "stats_src",
            "stats_tgt",
            "vocab_src",
            "vocab_tgt",
        ])?;
        let res = |what: &'static str, path: &PathBuf, message: String| ConfigError::Resource {
            what,
            path: path.clone(),
            message,
        };
        let table_path = cfg.resources.phrase_table.as_ref().unwrap();
        let table = load_phrase_table(table_path)
            .map_err(|e| res("phrase table", table_path, e.to_string()))?;
        let stats_src_path = cfg.resources.stats_src.as_ref().unwrap();
        let stats_src = NgramStatistics::read(stats_src_path)
            .map_err(|e| res("source statistics", stats_src_path, e.to_string()))?;
        let stats_tgt_path = cfg.resources.stats_tgt.as_ref().unwrap();
        let stats_tgt = NgramStatistics::read(stats_tgt_path)
            .map_err(|e| res("target statistics", stats_tgt_path, e.to_string()))?;
        let vocab_src_path = cfg.resources.vocab_src.as_ref().unwrap();
        let vocab_src = Vocabulary::read(vocab_src_path)
            .map_err(|e| res("source vocabulary", vocab_src_path, e.to_string()))?;
        let vocab_tgt_path = cfg.resources.vocab_tgt.as_ref().unwrap();
        let vocab_tgt = Vocabulary::read(vocab_tgt_path)
            .map_err(|e| res("target vocabulary", vocab_tgt_path, e.to_string()))?;
        let alignments = match cfg.resources.alignments.as_ref() {
            Some(path) => Some(
                load_word_alignments(path).map_err(|e| res("alignments", path, e.to_string()))?,
            ),
            None => None,
        };

        let mut selection = SelectionConfig {
            max_phrase_len: cfg.selection.max_phrase_len,
            entropy_lower_bound: cfg.selection.entropy_lower_bound,
            ..SelectionConfig::default()
        };
        if let Some(path) = cfg.selection.stop_words_src.as_ref() {
            selection.stop_words_src =
                load_stop_words(path).map_err(|e| res("source stop words", path, e.to_string()))?;
        }
        if let Some(path) = cfg.selection.stop_words_tgt.as_ref() {
            selection.stop_words_tgt =
                load_stop_words(path).map_err(|e| res("target stop words", path, e.to_string()))?;
        }
        if let Some(n) = cfg.selection.stop_top_n_src {
            selection.stop_words_src.extend(vocab_src.top_n(n));
        }
        if let Some(n) = cfg.selection.stop_top_n_tgt {
            selection.stop_words_tgt.extend(vocab_tgt.top_n(n));
        }

        Ok(LoadedResources {
            table,
            stats_src,
            stats_tgt,
            vocab_src,
            vocab_tgt,
            alignments,
            selection,
            template: cfg.token_template(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg.selection.max_phrase_len, 7);
        assert_eq!(cfg.selection.entropy_lower_bound, 5.0);
        assert_eq!(cfg.vocab.cap, 40_000);
        assert_eq!(cfg.tokens.template_prefix, "<T");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("[selection]\nbogus = 1\n");
        assert!(err.is_err());
        let err = toml::from_str::<RunConfig>("[bogus_section]\n");
        assert!(err.is_err());
    }

    #[test]
    fn missing_resources_reported_together() {
        let cfg = RunConfig::default();
        match cfg.require_resources(&["phrase_table", "stats_src"]) {
            Err(ConfigError::Invalid { problems }) => assert_eq!(problems.len(), 2),
            other => panic!("expected invalid config, got {other:?}"),
        }
    }
}
