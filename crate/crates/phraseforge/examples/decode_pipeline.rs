//! The four-step decode: translate with a phrase-based system, select and
//! replace boundary phrase pairs with tokens, re-translate the tokenized
//! sentence with a second system, then splice the phrase translations back.
//!
//! Run with: cargo run --example decode_pipeline

use phraseforge::aligner::PhraseTable;
use phraseforge::corpus::{build_vocabulary, Sentence};
use phraseforge::pipeline::{
    decode_with_tokens, DecodeContext, DictionaryTranslator, PipelineError, TranslatorPort,
};
use phraseforge::rewriter::TokenTemplate;
use phraseforge::selector::SelectionConfig;
use phraseforge::stats::count_ngrams;
use rustc_hash::FxHashMap;

fn toks(s: &str) -> Vec<String> {
    s.split(' ').map(str::to_string).collect()
}

/// A mock neural system: fluent on frequent words, emits <unk> for the rest,
/// passes placeholder tokens through.
struct MockNmt {
    known: FxHashMap<String, String>,
    template: TokenTemplate,
}

impl TranslatorPort for MockNmt {
    fn translate(&self, input: &Sentence) -> Result<Sentence, PipelineError> {
        Ok(Sentence::new(input.tokens().iter().map(|t| {
            if self.template.matches(t) {
                t.clone()
            } else {
                self.known.get(t).cloned().unwrap_or_else(|| "<unk>".into())
            }
        }))
        .unwrap())
    }
}

fn main() {
    // training corpus: "p q" is a cohesive compound, its parts are rare alone
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
    let tgt: Vec<Sentence> = src
        .iter()
        .map(|s| Sentence::new(s.tokens().iter().map(|t| t.to_uppercase())).unwrap())
        .collect();

    let stats_src = count_ngrams(&src, 7);
    let stats_tgt = count_ngrams(&tgt, 7);
    // only the filler stays in-vocabulary; "p" and "q" are OOV
    let vocab_src = build_vocabulary(src.iter(), 1);
    let vocab_tgt = build_vocabulary(tgt.iter(), 1);
    let table = PhraseTable::from_entries([(toks("p q"), toks("P Q"), 0.9)]);
    let selection = SelectionConfig {
        max_phrase_len: 7,
        entropy_lower_bound: 1.5,
        ..SelectionConfig::default()
    };
    let template = TokenTemplate::default();
    let ctx = DecodeContext {
        table: &table,
        stats_src: &stats_src,
        stats_tgt: &stats_tgt,
        vocab_src: &vocab_src,
        vocab_tgt: &vocab_tgt,
        selection: &selection,
        template: &template,
    };

    // wide-coverage word-for-word system stands in for the phrase-based step
    let smt = DictionaryTranslator::new(
        ["w", "z", "p", "q"]
            .iter()
            .map(|t| (t.to_string(), t.to_uppercase()))
            .collect(),
    );
    let nmt = MockNmt {
        known: [("w", "W"), ("z", "Z")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        template: template.clone(),
    };

    let input = Sentence::parse("w p q w").unwrap();
    println!("input: {input}");
    println!("bare second system: {}", nmt.translate(&input).unwrap());

    let (output, trace) = decode_with_tokens(&input, &smt, &nmt, &ctx, None).unwrap();
    println!("\nstep 1, first system:  {}", trace.smt_translation);
    println!("step 2, tokenized:     {}", trace.tokenized_input);
    println!("step 3, second system: {}", trace.nmt_output);
    println!("step 4, restored:      {output}");
    for sel in &trace.selected {
        println!(
            "  <T{}> = {:?} -> {:?}",
            sel.index, sel.source_phrase, sel.smt_translation
        );
    }
}
