#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace mmsvc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Seeded generator with distribution helpers that do not depend on the
/// standard library's (implementation-defined) distribution algorithms, so a
/// seed reproduces the same stream on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    std::uint64_t next() { return engine_(); }

    Vector uniform_vector(Index n, double lo, double hi) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            v(i) = uniform(lo, hi);
        }
        return v;
    }

    Matrix uniform_matrix(Index rows, Index cols, double lo, double hi) {
        Matrix a(rows, cols);
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) {
                a(i, j) = uniform(lo, hi);
            }
        }
        return a;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace mmsvc
