// Verify backpropagation through the full encoder-decoder against central differences.

use rand_chacha::ChaCha8Rng;
use textnorm::corpus::{count_tokens, Vocabulary};
use textnorm::models::{HyperParams, Seq2Seq, SeqExample};
use textnorm::neural::finite_diff_check;

pub fn run_example() -> textnorm::Result<()> {
    let words: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let vocab = Vocabulary::from_counts(&count_tokens(&words), 1);
    let hyper = HyperParams {
        embedding_dim: 4,
        hidden_dim: 6,
        layers: 2,
        dropout: 0.0,
        ..HyperParams::word()
    };
    let mut model = Seq2Seq::<f64>::new(vocab, hyper)?;
    let batch = vec![SeqExample::new(words.clone(), vec!["c".into(), "a".into()])];
    let net = model.net.clone();
    let report = finite_diff_check(
        &mut model.store,
        |g| Ok(net.batch_loss::<f64, ChaCha8Rng>(g, &batch, 1.0, None)?.0),
        1e-5,
        Some(400),
        0,
    )?;
    println!(
        "checked {} coordinates, max relative error {:.2e} ({})",
        report.checked, report.max_rel_error, report.worst_param
    );
    assert!(report.max_rel_error < 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
