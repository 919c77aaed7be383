#pragma once

#include "purify/classifier.hpp"
#include "purify/gmm.hpp"

namespace purify::testing {

// The seeded benchmark: 2-16-16-2 tanh net trained on 2000 XOR-mixture points.
inline TrainConfig bench_train() { return TrainConfig{0.003, 200, 128, 7}; }

inline const LabeledDataset& bench_train_set() {
    static const LabeledDataset d = sample_dataset(benchmark_gmm(), 2000, 1);
    return d;
}

inline const LabeledDataset& bench_eval_set() {
    static const LabeledDataset d = sample_dataset(benchmark_gmm(), 2000, derive_seed(1, {1}));
    return d;
}

inline const TrainResult& trained_benchmark() {
    static const TrainResult r = train(MlpClassifier::random_init({2, 16, 16, 2}, Activation::Tanh, 7),
                                       bench_train_set(), bench_train());
    return r;
}

}  // namespace purify::testing
