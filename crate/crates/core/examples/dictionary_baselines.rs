// Lexicon baselines: most frequent mapping and uniform sampling.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use textnorm::corpus::{load_lexnorm, TweetPair};
use textnorm::eval::{predict_corpus, score};
use textnorm::models::{build_lexicon, dict1_normalize, dict2_normalize};

pub fn run_example() -> textnorm::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sample_lexnorm.json");
    let mut pairs = load_lexnorm(&path)?;
    pairs.push(TweetPair::from_slots("x", vec!["u".into()], &["u".into()])?);
    let lexicon = build_lexicon(&pairs);
    println!("u -> {:?}", lexicon.candidates("u"));

    let dict1 = score(&predict_corpus(&pairs, |t| Ok(dict1_normalize(&lexicon, t)))?, &pairs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let dict2 = score(&predict_corpus(&pairs, |t| Ok(dict2_normalize(&lexicon, t, &mut rng)))?, &pairs)?;
    println!("dict1 P {:.3} R {:.3} F1 {:.3}", dict1.precision, dict1.recall, dict1.f1);
    println!("dict2 P {:.3} R {:.3} F1 {:.3}", dict2.precision, dict2.recall, dict2.f1);
    assert!(dict1.f1 >= dict2.f1);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
