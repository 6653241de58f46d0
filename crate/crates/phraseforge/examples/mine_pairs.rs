//! Mine phrase pairs over a whole parallel corpus: candidates from a phrase
//! table, filtered by the three selection conditions (OOV content, no stop
//! words, entropy boundary).
//!
//! Run with: cargo run --example mine_pairs

use phraseforge::aligner::PhraseTable;
use phraseforge::corpus::{build_vocabulary, ParallelCorpus, Sentence};
use phraseforge::selector::{mine_training_pairs, SelectionConfig};
use phraseforge::stats::count_ngrams;

fn toks(s: &str) -> Vec<String> {
    s.split(' ').map(str::to_string).collect()
}

/// Synthetic corpus: the compound "p q" occurs between varied markers, its
/// parts mostly occur alone next to the filler "z". Target side mirrors the
/// source in uppercase.
fn corpus() -> ParallelCorpus {
    let mut src: Vec<Sentence> = Vec::new();
    for l in 0..4 {
        for r in 0..4 {
            src.push(Sentence::parse(&format!("l{l} p q r{r}")).unwrap());
        }
    }
    for _ in 0..50 {
        src.push(Sentence::parse("z p z").unwrap());
        src.push(Sentence::parse("z q z").unwrap());
    }
    let pairs = src
        .into_iter()
        .map(|s| {
            let t = Sentence::new(s.tokens().iter().map(|x| x.to_uppercase())).unwrap();
            (s, t)
        })
        .collect();
    ParallelCorpus::new(pairs)
}

fn main() {
    let corpus = corpus();
    let src: Vec<Sentence> = corpus.source_side().cloned().collect();
    let tgt: Vec<Sentence> = corpus.target_side().cloned().collect();

    let stats_src = count_ngrams(&src, 7);
    let stats_tgt = count_ngrams(&tgt, 7);
    // a tight cap leaves only the filler in-vocabulary, so the compound
    // parts are OOV and satisfy condition (1)
    let vocab_src = build_vocabulary(src.iter(), 1);
    let vocab_tgt = build_vocabulary(tgt.iter(), 1);
    println!("in-vocabulary: {:?}", vocab_src.ranked_tokens());

    let table = PhraseTable::from_entries([(toks("p q"), toks("P Q"), 0.9)]);
    let cfg = SelectionConfig {
        max_phrase_len: 7,
        entropy_lower_bound: 1.5,
        ..SelectionConfig::default()
    };

    let result =
        mine_training_pairs(&corpus, &table, None, &stats_src, &stats_tgt, &vocab_src, &vocab_tgt, &cfg)
            .unwrap();

    println!(
        "\nselected {} occurrences, {} pair types",
        result.inventory.occurrences, result.inventory.pair_types
    );
    for (idx, outcome) in result.per_pair.iter().enumerate().take(3) {
        for pair in &outcome.selected {
            println!(
                "sentence {idx}: {:?} <-> {:?}  (H_l={:.2} H_r={:.2} on source)",
                pair.candidate.source.join(" "),
                pair.candidate.target.join(" "),
                pair.entropy_left_src,
                pair.entropy_right_src,
            );
        }
    }
}
