use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use handlescope_core::charlstm::{backward, forward, CharVocab, LstmParams};
use handlescope_core::corpus::{split_dataset, synth_generate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use handlescope_core::{Dataset, FeatureLayout, FittedModel, LearnerSpec, SynthConfig};

fn data() -> Dataset {
    let config = SynthConfig {
        n_unlabeled: 1000,
        ..SynthConfig::default()
    };
    let corpus = synth_generate(&config, 0).unwrap();
    split_dataset(&corpus, FeatureLayout::Handle5).unwrap()
}

fn fit(c: &mut Criterion) {
    let data = data();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for name in ["svm", "logreg", "adaboost", "random-forest", "label-spreading-rbf", "laplacian-svm", "co-training"] {
        let spec = LearnerSpec::from_name(name).unwrap();
        group.bench_function(name, |b| b.iter(|| FittedModel::fit(black_box(&spec), &data, true).unwrap()));
    }
    group.finish();
}

fn lstm_step(c: &mut Criterion) {
    let vocab = CharVocab::default();
    let params = LstmParams::init(vocab.len(), 16, 30, 0.08, &mut ChaCha8Rng::seed_from_u64(0));
    let inputs = vocab.encode("abu_mohamed77", 10).indices;
    c.bench_function("lstm/forward", |b| b.iter(|| forward(black_box(&params), black_box(&inputs))));
    let cache = forward(&params, &inputs);
    c.bench_function("lstm/backward", |b| b.iter(|| backward(black_box(&params), black_box(&cache), 1.0)));
}

criterion_group!(benches, fit, lstm_step);
criterion_main!(benches);
