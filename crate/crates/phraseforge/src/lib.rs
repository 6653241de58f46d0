//! Corpus statistics and preprocessing for translating sentences with
//! out-of-vocabulary phrases.
//!
//! The toolkit selects source/target phrase pairs whose left and right
//! branching entropy marks them as self-contained units, replaces them with
//! numbered placeholder tokens before handing sentences to a black-box
//! translator, and splices externally obtained phrase translations back into
//! the translator output. Corpus-level BLEU, untranslated-token counting and
//! human-judgement score arithmetic round out the workflow.
//!
//! Every major capability has a runnable example under `examples/`; the
//! `phraseforge` binary exposes the same operations as subcommands.

pub mod aligner;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod pipeline;
pub mod rewriter;
pub mod selector;
pub mod stats;

pub use aligner::{load_phrase_table, load_word_alignments, CandidatePair, PhraseTable, Provenance, WordAlignment};
pub use corpus::{build_vocabulary, filter_by_length, load_parallel_corpus, ParallelCorpus, Sentence, Vocabulary};
pub use rewriter::{prepare_training_corpus, replace_with_tokens, restore_tokens, TokenMap, TokenTemplate};
pub use selector::{mine_training_pairs, select_phrase_pairs, PhrasePair, SelectionConfig, SelectionInventory};
pub use stats::{count_ngrams, NgramStatistics};

/// Sentinel standing in for the missing left neighbour of a sentence-initial
/// phrase occurrence. Rejected as an ordinary corpus token.
pub const BOS: &str = "<BOS>";
/// Sentinel for the missing right neighbour at the end of a sentence.
pub const EOS: &str = "<EOS>";
