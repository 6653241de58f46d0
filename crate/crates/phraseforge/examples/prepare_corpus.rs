//! End-to-end training preparation: length-filter a parallel corpus, build
//! capped vocabularies, mine phrase pairs and write the tokenized corpus
//! plus all reports to disk.
//!
//! Run with: cargo run --example prepare_corpus

use phraseforge::aligner::PhraseTable;
use phraseforge::corpus::{build_vocabulary, filter_by_length, ParallelCorpus, Sentence};
use phraseforge::pipeline::{run_training_prep, TrainingPrepPaths};
use phraseforge::rewriter::TokenTemplate;
use phraseforge::selector::SelectionConfig;
use phraseforge::stats::count_ngrams;

fn toks(s: &str) -> Vec<String> {
    s.split(' ').map(str::to_string).collect()
}

fn main() {
    let mut pairs: Vec<(Sentence, Sentence)> = Vec::new();
    for l in 0..4 {
        for r in 0..4 {
            pairs.push((
                Sentence::parse(&format!("l{l} p q r{r}")).unwrap(),
                Sentence::parse(&format!("L{l} P Q R{r}")).unwrap(),
            ));
        }
    }
    for _ in 0..50 {
        pairs.push((Sentence::parse("z p z").unwrap(), Sentence::parse("Z P Z").unwrap()));
        pairs.push((Sentence::parse("z q z").unwrap(), Sentence::parse("Z Q Z").unwrap()));
    }
    // an overlong outlier that the length filter drops
    pairs.push((
        Sentence::new((0..60).map(|i| format!("x{i}"))).unwrap(),
        Sentence::new((0..60).map(|i| format!("X{i}"))).unwrap(),
    ));
    let corpus = ParallelCorpus::new(pairs);

    let filtered = filter_by_length(&corpus, 40);
    println!("{} pairs after length filtering (was {})", filtered.len(), corpus.len());

    let src: Vec<Sentence> = filtered.source_side().cloned().collect();
    let tgt: Vec<Sentence> = filtered.target_side().cloned().collect();
    let stats_src = count_ngrams(&src, 7);
    let stats_tgt = count_ngrams(&tgt, 7);
    // keep only the filler token in-vocabulary so "p q" has OOV content
    let vocab_src = build_vocabulary(src.iter(), 1);
    let vocab_tgt = build_vocabulary(tgt.iter(), 1);

    let table = PhraseTable::from_entries([(toks("p q"), toks("P Q"), 0.9)]);
    let cfg = SelectionConfig {
        max_phrase_len: 7,
        entropy_lower_bound: 1.5,
        ..SelectionConfig::default()
    };

    let dir = tempfile::tempdir().unwrap();
    let paths = TrainingPrepPaths {
        tokenized_source: dir.path().join("train.tok.src"),
        tokenized_target: dir.path().join("train.tok.tgt"),
        token_maps: dir.path().join("train.maps"),
        selection_report: dir.path().join("selection.tsv"),
        inventory_summary: dir.path().join("inventory.tsv"),
    };
    let result = run_training_prep(
        &filtered,
        &table,
        None,
        &stats_src,
        &stats_tgt,
        &vocab_src,
        &vocab_tgt,
        &cfg,
        &TokenTemplate::default(),
        &paths,
    )
    .unwrap();

    println!(
        "selected {} occurrences / {} pair types",
        result.inventory.occurrences, result.inventory.pair_types
    );
    println!("\nfirst tokenized source lines:");
    let text = std::fs::read_to_string(&paths.tokenized_source).unwrap();
    for line in text.lines().take(3) {
        println!("  {line}");
    }
    println!("\nselection report head:");
    let report = std::fs::read_to_string(&paths.selection_report).unwrap();
    for line in report.lines().take(3) {
        println!("  {line}");
    }
}
