// Combine a word model with a confidence-gated character model.

use std::path::Path;

use textnorm::corpus::{extract_word_pairs, load_lexnorm, preprocess_corpus};
use textnorm::models::{train_seq2seq, word_examples, Granularity, HybridModel, HyperParams, SeqExample};
use textnorm::noise::{generate_tagged, KeyboardLayout, NoiseConfig};

pub fn run_example() -> textnorm::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sample_lexnorm.json");
    let corpus = preprocess_corpus(&load_lexnorm(&path)?);
    let small = |granularity, epochs, batch_size| HyperParams {
        granularity,
        epochs,
        batch_size,
        learning_rate: 0.01,
        patience: None,
        embedding_dim: 32,
        hidden_dim: 64,
        ..HyperParams::word().tiny()
    };
    let (word, _) = train_seq2seq(&word_examples(&corpus), &small(Granularity::Word, 60, 4))?;

    let noise = NoiseConfig { ratio: 0.5, seed: 1, k_max: 6 };
    let tagged = generate_tagged(&extract_word_pairs(&corpus), &noise, &KeyboardLayout::qwerty())?;
    let pairs: Vec<SeqExample> = tagged.iter().map(|t| SeqExample::chars(&t.pair.source, &t.pair.target)).collect();
    let (chars, _) = train_seq2seq(&pairs, &small(Granularity::Char, 40, 16))?;

    for oov in ["moviie", "tmorrow", "pleese"] {
        let (candidate, conf) = chars.decode_word(oov)?;
        println!("char model: {oov} -> {candidate} (confidence {conf:.3})");
    }

    let tweet: Vec<String> = "see u tmrw at the moviie #party".split(' ').map(String::from).collect();
    for tau in [1.0, 0.5, 0.0] {
        let hybrid = HybridModel::new(word.clone(), chars.clone(), tau)?;
        let out = hybrid.normalize(&tweet)?;
        println!("tau {tau}: {}", out.join(" "));
        assert_eq!(out.len(), tweet.len());
        assert_eq!(out[6], "#party");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
