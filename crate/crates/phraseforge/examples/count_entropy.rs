//! Count n-gram frequencies over a tiny corpus and query branching entropy.
//!
//! Run with: cargo run --example count_entropy

use phraseforge::corpus::Sentence;
use phraseforge::stats::count_ngrams;

fn main() {
    let corpus: Vec<Sentence> = [
        "the new york times reported it",
        "she moved to new york last year",
        "new york is large",
        "the new law passed",
        "a new day",
    ]
    .iter()
    .map(|line| Sentence::parse(line).unwrap())
    .collect();

    let stats = count_ngrams(&corpus, 3);
    println!("{} distinct phrases up to length 3\n", stats.distinct_phrases());

    for phrase in [vec!["new"], vec!["york"], vec!["new", "york"]] {
        let freq = stats.freq(&phrase).unwrap();
        let hl = stats.branching_entropy_left(&phrase).unwrap();
        let hr = stats.branching_entropy_right(&phrase).unwrap();
        println!("{:<12} freq={freq}  H_l={hl:.3}  H_r={hr:.3}", phrase.join(" "));
        println!("  left contexts:  {:?}", stats.left_contexts(&phrase).unwrap());
        println!("  right contexts: {:?}", stats.right_contexts(&phrase).unwrap());
    }

    // a phrase is a boundary unit when its own entropies clear the bound
    // strictly while every proper substring stays at or below it
    let bound = 1.0;
    for phrase in [vec!["new"], vec!["new", "york"]] {
        println!(
            "\nis {:?} an entropy-boundary phrase at bound {bound}? {}",
            phrase.join(" "),
            stats.is_entropy_boundary(&phrase, bound).unwrap()
        );
    }
}
