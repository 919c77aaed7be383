#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace purify {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// Derives an independent stream seed from a root seed and a path of
// indices (experiment id, parameter index, sample index, ...). The result
// depends only on the values, never on evaluation order.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path);

inline Rng make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(root, path));
}

Vec standard_normal(Rng& rng, Eigen::Index dim);

// Vector of independent ±1 entries.
Vec rademacher(Rng& rng, Eigen::Index dim);

}  // namespace purify
