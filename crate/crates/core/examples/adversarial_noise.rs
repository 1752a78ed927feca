// Inject synthetic typos into unchanged word pairs for character-model training.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use textnorm::corpus::WordPair;
use textnorm::noise::{apply_noise, generate_tagged, to_tsv, KeyboardLayout, NoiseConfig, NoiseType};

pub fn run_example() -> textnorm::Result<()> {
    let layout = KeyboardLayout::qwerty();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in NoiseType::ALL {
        let word = if kind == NoiseType::Punct { "don't" } else { "cool" };
        match apply_noise(word, kind, &layout, 6, &mut rng) {
            Ok(noised) => println!("{kind:>8}: {word} -> {noised}"),
            Err(e) => println!("{kind:>8}: {e}"),
        }
    }

    let pairs = vec![
        WordPair::real("u", "you"),
        WordPair::real("hello", "hello"),
        WordPair::real("don't", "don't"),
    ];
    let tagged = generate_tagged(&pairs, &NoiseConfig { ratio: 0.5, seed: 11, k_max: 6 }, &layout)?;
    print!("{}", to_tsv(&tagged));
    assert!(tagged.len() >= pairs.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
