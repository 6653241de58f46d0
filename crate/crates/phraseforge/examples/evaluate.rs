//! Scoring utilities: corpus BLEU, untranslated-token counting, pairwise
//! judgement scores and adequacy averages.
//!
//! Run with: cargo run --example evaluate

use std::collections::{HashMap, HashSet};

use phraseforge::corpus::Sentence;
use phraseforge::eval::{adequacy_average, corpus_bleu, count_untranslated, pairwise_score};

fn sent(s: &str) -> Sentence {
    Sentence::parse(s).unwrap()
}

fn main() {
    let candidates = vec![
        sent("the cat sat on the mat"),
        sent("a quick brown fox jumps high"),
    ];
    let references = vec![
        sent("the cat sat on the mat"),
        sent("the quick brown fox jumps over it"),
    ];
    println!("BLEU: {:.2}", corpus_bleu(&candidates, &references).unwrap());

    // untranslated = <unk> emissions plus source words whose expected
    // translation never shows up in the output
    let mut lexicon: HashMap<String, HashSet<String>> = HashMap::new();
    lexicon.insert("katze".into(), HashSet::from(["cat".to_string()]));
    lexicon.insert("matte".into(), HashSet::from(["mat".to_string()]));
    let source = sent("die katze sass auf der matte");
    let output = sent("the cat sat on the <unk>");
    println!(
        "untranslated: {}",
        count_untranslated(&source, &output, &lexicon, "<unk>")
    );

    // 29 wins, 0 losses, 171 ties over 200 pairwise judgements
    println!("pairwise: {}", pairwise_score(29, 0, 171).unwrap());

    println!("adequacy: {:.2}", adequacy_average(&[4, 5, 3, 4, 4]).unwrap());
}
