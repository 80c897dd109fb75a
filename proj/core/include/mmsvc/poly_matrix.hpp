#pragma once

// Square matrix polynomials in the backward-shift operator z^-1:
//   C(z^-1) = C_0 + C_1 z^-1 + ... + C_deg z^-deg,   each C_i is m x m.

#include "mmsvc/types.hpp"

#include <span>
#include <vector>

namespace mmsvc {

class PolyMatrix {
public:
    PolyMatrix() = default;

    /// Takes ownership of the coefficient list. Throws on an empty list or on
    /// non-square / mismatched coefficient shapes.
    explicit PolyMatrix(std::vector<Matrix> coeffs);

    [[nodiscard]] static PolyMatrix identity(Index m);
    [[nodiscard]] static PolyMatrix zero(Index m, int degree);
    /// c(z^-1) * I_m for a scalar polynomial c.
    [[nodiscard]] static PolyMatrix scalar(std::span<const double> coeffs, Index m);

    [[nodiscard]] Index dim() const noexcept { return coeffs_.empty() ? 0 : coeffs_.front().rows(); }
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] bool empty() const noexcept { return coeffs_.empty(); }

    [[nodiscard]] const Matrix& operator[](int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] Matrix& operator[](int i) { return coeffs_.at(static_cast<std::size_t>(i)); }
    /// C_i for 0 <= i <= deg, the zero matrix beyond the degree.
    [[nodiscard]] Matrix coeff_or_zero(int i) const;
    [[nodiscard]] const std::vector<Matrix>& coeffs() const noexcept { return coeffs_; }

    /// C(1) = sum of coefficients (DC gain of the filter).
    [[nodiscard]] Matrix at_one() const;

    [[nodiscard]] bool is_diagonal(double tol = 0.0) const;
    [[nodiscard]] bool is_monic(double tol = 1e-12) const;

    /// Spectral radius of the block companion matrix of C_0^-1 C(z^-1).
    /// Throws normalization_required when C_0 is singular.
    [[nodiscard]] double companion_spectral_radius() const;

    /// True when every root of det C(z^-1) lies strictly outside the unit
    /// circle in z^-1, i.e. companion eigenvalues satisfy |lambda| < 1 - tol.
    [[nodiscard]] bool is_stable(double tol = 1e-9) const;

    /// z^-d C(z^-1).
    [[nodiscard]] PolyMatrix shifted(int d) const;

    [[nodiscard]] double max_abs_coeff() const;

    friend PolyMatrix operator*(const PolyMatrix& lhs, const PolyMatrix& rhs);
    friend PolyMatrix operator+(const PolyMatrix& lhs, const PolyMatrix& rhs);
    friend PolyMatrix operator-(const PolyMatrix& lhs, const PolyMatrix& rhs);

private:
    std::vector<Matrix> coeffs_;
};

/// Evaluates C(z^-1)v(k) = sum_i C_i v(k-i) where samples[j] holds v(j).
/// Throws history_underrun when k < deg or k is past the end of the history;
/// missing samples are never zero-padded.
[[nodiscard]] Vector apply(const PolyMatrix& p, std::span<const Vector> samples, std::size_t k);

/// Same evaluation with a newest-first history: recent[i] holds v(k-i).
[[nodiscard]] Vector apply_recent(const PolyMatrix& p, std::span<const Vector> recent);

/// A_0^-1 A(z^-1). Throws normalization_required when A_0 is singular.
[[nodiscard]] PolyMatrix make_monic(const PolyMatrix& a);

struct DiophantineSolution {
    PolyMatrix L;  ///< degree d-1
    PolyMatrix K;  ///< degree max(deg F, deg A + d - 1) - d
};

/// Solves F(z^-1) = L(z^-1) A(z^-1) + z^-d K(z^-1) by block long division of
/// F by a monic A, peeling d quotient coefficients. A non-monic A is rejected
/// with normalization_required (see make_monic).
[[nodiscard]] DiophantineSolution solve_diophantine(const PolyMatrix& a, const PolyMatrix& f, int d);

/// Largest coefficient-wise absolute value of F - L A - z^-d K.
[[nodiscard]] double diophantine_residual(const PolyMatrix& a, const PolyMatrix& f, int d,
                                          const DiophantineSolution& sol);

} // namespace mmsvc
