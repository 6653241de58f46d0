//! Replace selected phrase pairs with numbered placeholder tokens, then
//! splice the phrase translations back into a translated sentence.
//!
//! Run with: cargo run --example tokenize_roundtrip

use phraseforge::aligner::{CandidatePair, Provenance};
use phraseforge::corpus::Sentence;
use phraseforge::rewriter::{replace_with_tokens, restore_tokens, TokenTemplate};
use phraseforge::selector::PhrasePair;

fn pair(src_span: (usize, usize), tgt_span: (usize, usize), src: &Sentence, tgt: &Sentence) -> PhrasePair {
    PhrasePair {
        candidate: CandidatePair {
            source_span: src_span,
            target_span: tgt_span,
            source: src.tokens()[src_span.0..src_span.0 + src_span.1].to_vec(),
            target: tgt.tokens()[tgt_span.0..tgt_span.0 + tgt_span.1].to_vec(),
            provenance: Provenance::PhraseTable,
        },
        entropy_left_src: 0.0,
        entropy_right_src: 0.0,
        entropy_left_tgt: 0.0,
        entropy_right_tgt: 0.0,
    }
}

fn main() {
    let source = Sentence::parse("er besuchte die neue oper in der stadt").unwrap();
    let target = Sentence::parse("he visited the new opera in the city").unwrap();
    let template = TokenTemplate::default(); // <T1>, <T2>, ...

    // two selected pairs; numbering follows source span order
    let selected = vec![
        pair((3, 2), (3, 2), &source, &target), // neue oper / new opera
        pair((7, 1), (7, 1), &source, &target), // stadt / city
    ];

    let ((tok_src, tok_tgt), map) =
        replace_with_tokens(&source, &target, &selected, &template).unwrap();
    println!("tokenized source: {tok_src}");
    println!("tokenized target: {tok_tgt}");
    for entry in map.entries() {
        println!(
            "  {} = {:?} -> {:?}",
            template.literal(entry.index),
            entry.source.join(" "),
            entry.target.join(" ")
        );
    }

    // a downstream system translated the tokenized sentence, keeping tokens
    let translated = Sentence::parse("he went to <T1> in <T2>").unwrap();
    let restored = restore_tokens(&translated, &map.target_translations(), &template).unwrap();
    println!("\ntranslated: {translated}");
    println!("restored:   {}", restored.sentence);
    assert!(restored.unused.is_empty());
}
