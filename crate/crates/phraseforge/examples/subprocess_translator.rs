//! Drive an external translator over a line protocol: one sentence per line
//! on stdin, one translation per line on stdout.
//!
//! Run with: cargo run --example subprocess_translator

use phraseforge::corpus::Sentence;
use phraseforge::pipeline::{SubprocessTranslator, TranslatorPort};

fn main() {
    // sed as a stand-in external system: rewrites "hallo" to "hello"
    let translator = SubprocessTranslator::spawn("sed -u 's/hallo/hello/g'").unwrap();

    let inputs = vec![
        Sentence::parse("hallo welt").unwrap(),
        Sentence::parse("sie sagte hallo").unwrap(),
    ];
    for input in &inputs {
        let output = translator.translate(input).unwrap();
        println!("{input}  ->  {output}");
    }

    // batch calls reuse the same child process
    let outputs = translator.translate_batch(&inputs).unwrap();
    println!("batch: {:?}", outputs.iter().map(|s| s.to_string()).collect::<Vec<_>>());
}
