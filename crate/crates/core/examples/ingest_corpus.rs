// Load a LexNorm-format corpus, anonymize it and inspect the derived views.

use std::path::Path;

use textnorm::corpus::{extract_word_pairs, load_lexnorm, preprocess_corpus, split_ngrams, CorpusStats};

pub fn run_example() -> textnorm::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sample_lexnorm.json");
    let pairs = load_lexnorm(&path)?;
    let stats = CorpusStats::of(&pairs);
    println!("{} tweets, {} tokens", stats.pairs, stats.tokens);

    let corpus = preprocess_corpus(&pairs);
    let second = &corpus[1];
    println!("anonymized: {:?}", second.content_input());
    println!("restorable: {:?}", second.record);

    let words = extract_word_pairs(&corpus);
    let changed = words.iter().filter(|w| !w.is_unchanged()).count();
    println!("{} word pairs, {changed} need normalization", words.len());

    let bigrams = split_ngrams(&corpus, 2)?;
    println!("bigram view has {} training sequences", bigrams.len());
    assert!(bigrams.len() > corpus.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
