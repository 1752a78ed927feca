// Score predictions, list frequent errors and sweep the context window.

use std::path::Path;

use textnorm::corpus::load_lexnorm;
use textnorm::eval::{error_analysis, score, sweep_ngram, NgramSweepSetup};
use textnorm::models::HyperParams;

pub fn run_example() -> textnorm::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sample_lexnorm.json");
    let gold = load_lexnorm(&path)?;

    // copy every source token except "u"
    let preds: Vec<Vec<String>> = gold
        .iter()
        .map(|g| g.input.iter().map(|t| if t == "u" { "you".to_string() } else { t.clone() }).collect())
        .collect();
    let r = score(&preds, &gold)?;
    println!("P {:.3} R {:.3} F1 {:.3} ({} of {} needed)", r.precision, r.recall, r.f1, r.tp, r.needed);
    print!("{}", error_analysis(&preds, &gold)?.to_text(3));

    let word_hyper = HyperParams {
        epochs: 3,
        batch_size: 8,
        patience: None,
        ..HyperParams::word().tiny()
    };
    let sweep = sweep_ngram(&[Some(1), Some(3), None], &NgramSweepSetup { train: &gold, test: &gold, word_hyper })?;
    print!("{}", sweep.to_csv());
    assert_eq!(sweep.rows.len(), 3);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
