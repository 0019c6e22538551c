#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace drimv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition or input-validation failure.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Non-finite values or a failed solve during optimization.
class NumericalError : public Error {
public:
    using Error::Error;
};

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based seed derivation: the same (root, a, b) always yields the same seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(mix_seed(mix_seed(root) ^ a) ^ (b + 0x632be59bd9b4e019ULL));
}

/// Uniform [0,1) matrix, filled column-major from a dedicated engine.
inline Matrix uniform_matrix(Index rows, Index cols, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            out(i, j) = unif(rng);
        }
    }
    return out;
}

inline Matrix normal_matrix(Index rows, Index cols, Rng& rng, double sd = 1.0) {
    std::normal_distribution<double> gauss(0.0, sd);
    Matrix out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            out(i, j) = gauss(rng);
        }
    }
    return out;
}

}  // namespace drimv
