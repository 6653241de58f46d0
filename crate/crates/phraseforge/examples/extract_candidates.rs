//! Propose aligned span pairs for one sentence pair, from a phrase table
//! and from word alignments.
//!
//! Run with: cargo run --example extract_candidates

use phraseforge::aligner::{align_candidates, PhraseTable, WordAlignment};
use phraseforge::corpus::Sentence;

fn toks(s: &str) -> Vec<String> {
    s.split(' ').map(str::to_string).collect()
}

fn main() {
    let source = Sentence::parse("das neue haus ist gross").unwrap();
    let target = Sentence::parse("the new house is big").unwrap();

    let table = PhraseTable::from_entries([
        (toks("neue haus"), toks("new house"), 0.8),
        (toks("ist gross"), toks("is big"), 0.6),
    ]);
    // 1-1 links except "gross" -> "big" crossing nothing; "ist" unaligned
    let alignment = WordAlignment::new(vec![(0, 0), (1, 1), (2, 2), (4, 4)]);

    let candidates = align_candidates(&source, &target, &table, Some(&alignment), 4);
    println!("{} candidates:", candidates.len());
    for c in &candidates {
        println!(
            "  src[{}..{}] {:?}  <->  tgt[{}..{}] {:?}   ({})",
            c.source_span.0,
            c.source_span.0 + c.source_span.1,
            c.source.join(" "),
            c.target_span.0,
            c.target_span.0 + c.target_span.1,
            c.target.join(" "),
            c.provenance.as_str(),
        );
    }
}
