//! Scratch calibration harness (not part of the deliverable surface):
//! measures wall time and accuracy of the standard training setup.

use std::time::Instant;

use babilab_core::disfluency::{augment_corpus, DisfluencyConfig};
use babilab_core::generator::{generate_corpus, SlotVocab};
use babilab_core::memn2n::{
    evaluate, prepare_triplets, train, CandidateSet, Hyper, ModelConfig, ModelParams, Vocab,
};
use babilab_core::rng::derive_stage_seed;

fn main() {
    let master: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let vocab = SlotVocab::builtin();
    let t0 = Instant::now();
    let train_clean = generate_corpus(1000, derive_stage_seed(master, "train"), &vocab).unwrap();
    let test_clean = generate_corpus(1000, derive_stage_seed(master, "test"), &vocab).unwrap();
    let (train_plus, _) = augment_corpus(
        &train_clean,
        &DisfluencyConfig::new(derive_stage_seed(master, "aug-train")),
        &vocab,
    )
    .unwrap();
    let (test_plus, _) = augment_corpus(
        &test_clean,
        &DisfluencyConfig::new(derive_stage_seed(master, "aug-test")),
        &vocab,
    )
    .unwrap();
    println!("corpora built in {:?}", t0.elapsed());

    let corpora: [&[babilab_core::Dialogue]; 4] =
        [&train_clean, &test_clean, &train_plus, &test_plus];
    let v = Vocab::build(&corpora, 50);
    let cands = CandidateSet::build(&corpora, &v).unwrap();
    println!(
        "vocab {} tokens, {} candidates, max sentence len {}",
        v.len(),
        cands.len(),
        v.max_sentence_len
    );

    let tr_clean = prepare_triplets(&train_clean, &v, &cands).unwrap();
    let te_clean = prepare_triplets(&test_clean, &v, &cands).unwrap();
    let tr_plus = prepare_triplets(&train_plus, &v, &cands).unwrap();
    let te_plus = prepare_triplets(&test_plus, &v, &cands).unwrap();
    println!("triplets: train {} / test {}", tr_clean.len(), te_clean.len());

    let epochs: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let hyper = Hyper {
        epochs,
        ..Hyper::default()
    };
    let config = ModelConfig {
        hops: 1,
        dim: 128,
        vocab_size: v.len(),
        memory_size: v.memory_size,
        max_sentence_len: v.max_sentence_len,
    };
    let init = ModelParams::init(config, 11);

    let t1 = Instant::now();
    let result = train(&tr_clean, &init, &cands, &hyper, 12).unwrap();
    let train_time = t1.elapsed();
    println!(
        "clean training: {epochs} epochs in {train_time:?} ({:.2} s/epoch), first/last loss {:.4} -> {:.4}",
        train_time.as_secs_f64() / epochs.max(1) as f64,
        result.epoch_losses.first().unwrap_or(&0.0),
        result.epoch_losses.last().unwrap_or(&0.0),
    );

    for (name, set) in [
        ("train(clean)", &tr_clean),
        ("test(clean)", &te_clean),
        ("test(babi+)", &te_plus),
    ] {
        let counts = evaluate(&result.params, set, &cands);
        println!(
            "  {name}: per-response {:.1}%  api-call {:.1}%",
            counts.per_response_accuracy(),
            counts.api_call_accuracy()
        );
    }

    let t2 = Instant::now();
    let result_plus = train(&tr_plus, &init, &cands, &hyper, 12).unwrap();
    println!("babi+ training in {:?}", t2.elapsed());
    for (name, set) in [
        ("train(babi+)", &tr_plus),
        ("test(babi+)", &te_plus),
        ("test(clean)", &te_clean),
    ] {
        let counts = evaluate(&result_plus.params, set, &cands);
        println!(
            "  {name}: per-response {:.1}%  api-call {:.1}%",
            counts.per_response_accuracy(),
            counts.api_call_accuracy()
        );
    }
}
