mod ingest_corpus {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ingest_corpus.rs"));
}

#[test]
fn ingest_corpus_runs() {
    ingest_corpus::run_example().expect("ingest_corpus");
}

mod adversarial_noise {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/adversarial_noise.rs"));
}

#[test]
fn adversarial_noise_runs() {
    adversarial_noise::run_example().expect("adversarial_noise");
}

mod gradient_check {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/gradient_check.rs"));
}

#[test]
fn gradient_check_runs() {
    gradient_check::run_example().expect("gradient_check");
}

mod train_word_model {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/train_word_model.rs"));
}

#[test]
fn train_word_model_runs() {
    train_word_model::run_example().expect("train_word_model");
}

mod hybrid_normalize {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hybrid_normalize.rs"));
}

#[test]
fn hybrid_normalize_runs() {
    hybrid_normalize::run_example().expect("hybrid_normalize");
}

mod dictionary_baselines {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dictionary_baselines.rs"));
}

#[test]
fn dictionary_baselines_runs() {
    dictionary_baselines::run_example().expect("dictionary_baselines");
}

mod evaluate_and_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evaluate_and_sweep.rs"));
}

#[test]
fn evaluate_and_sweep_runs() {
    evaluate_and_sweep::run_example().expect("evaluate_and_sweep");
}
