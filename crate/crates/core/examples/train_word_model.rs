// Train a small word-level model, save it, reload it and decode.

use std::path::Path;

use textnorm::corpus::{load_lexnorm, preprocess_corpus};
use textnorm::models::{normalize_word_s2s, token_accuracy, train_seq2seq_with, word_examples, HyperParams, Seq2Seq};

pub fn run_example() -> textnorm::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sample_lexnorm.json");
    let pairs = load_lexnorm(&path)?;
    let examples = word_examples(&preprocess_corpus(&pairs));
    let hyper = HyperParams {
        epochs: 60,
        batch_size: 4,
        learning_rate: 0.01,
        patience: None,
        embedding_dim: 32,
        hidden_dim: 64,
        ..HyperParams::word().tiny()
    };
    let (model, report) = train_seq2seq_with(&examples, &hyper, |log, _| {
        if log.epoch % 20 == 19 {
            println!("epoch {:>3} loss {:.4}", log.epoch + 1, log.train_loss);
        }
        Ok(())
    })?;
    println!("accuracy {:.3}", token_accuracy(&model, &examples)?);
    print!("{}", report.to_csv().lines().take(2).collect::<Vec<_>>().join("\n") + "\n");

    let dir = std::env::temp_dir().join(format!("textnorm-word-{}", std::process::id()));
    model.save(&dir)?;
    let reloaded = Seq2Seq::<f32>::load(&dir)?;
    let tweet: Vec<String> = "see u tmrw @jess_b".split(' ').map(String::from).collect();
    let out = normalize_word_s2s(&reloaded, &tweet)?;
    println!("{tweet:?} -> {out:?}");
    assert_eq!(out, normalize_word_s2s(&model, &tweet)?);
    assert_eq!(out[3], "@jess_b");
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
