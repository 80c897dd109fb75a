#include "mmsvc/poly_matrix.hpp"

#include "mmsvc/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>

namespace mmsvc {

PolyMatrix::PolyMatrix(std::vector<Matrix> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        fail(ErrorCategory::invalid_argument, "PolyMatrix needs at least one coefficient");
    }
    const Index m = coeffs_.front().rows();
    if (m <= 0) {
        fail(ErrorCategory::invalid_argument, "PolyMatrix dimension must be positive");
    }
    for (const auto& c : coeffs_) {
        if (c.rows() != m || c.cols() != m) {
            fail(ErrorCategory::invalid_argument, "PolyMatrix coefficients must all be m x m");
        }
    }
}

PolyMatrix PolyMatrix::identity(Index m) {
    return PolyMatrix({Matrix::Identity(m, m)});
}

PolyMatrix PolyMatrix::zero(Index m, int degree) {
    return PolyMatrix(std::vector<Matrix>(static_cast<std::size_t>(std::max(degree, 0) + 1),
                                          Matrix::Zero(m, m)));
}

PolyMatrix PolyMatrix::scalar(std::span<const double> coeffs, Index m) {
    std::vector<Matrix> out;
    out.reserve(coeffs.size());
    for (double c : coeffs) {
        out.push_back(c * Matrix::Identity(m, m));
    }
    return PolyMatrix(std::move(out));
}

Matrix PolyMatrix::coeff_or_zero(int i) const {
    if (i >= 0 && i <= degree()) {
        return coeffs_[static_cast<std::size_t>(i)];
    }
    return Matrix::Zero(dim(), dim());
}

Matrix PolyMatrix::at_one() const {
    Matrix sum = Matrix::Zero(dim(), dim());
    for (const auto& c : coeffs_) {
        sum += c;
    }
    return sum;
}

bool PolyMatrix::is_diagonal(double tol) const {
    for (const auto& c : coeffs_) {
        for (Index j = 0; j < c.cols(); ++j) {
            for (Index i = 0; i < c.rows(); ++i) {
                if (i != j && std::abs(c(i, j)) > tol) {
                    return false;
                }
            }
        }
    }
    return true;
}

bool PolyMatrix::is_monic(double tol) const {
    return !empty() && (coeffs_.front() - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff() <= tol;
}

double PolyMatrix::companion_spectral_radius() const {
    const Index m = dim();
    Eigen::FullPivLU<Matrix> lu(coeffs_.front());
    if (!lu.isInvertible()) {
        fail(ErrorCategory::normalization_required, "leading coefficient is singular");
    }
    const int n = degree();
    if (n == 0) {
        return 0.0;
    }
    // y(k) = -sum_{i>=1} C_0^-1 C_i y(k-i)
    Matrix companion = Matrix::Zero(n * m, n * m);
    for (int i = 1; i <= n; ++i) {
        companion.block(0, (i - 1) * m, m, m) = -lu.solve(coeffs_[static_cast<std::size_t>(i)]);
    }
    if (n > 1) {
        companion.block(m, 0, (n - 1) * m, (n - 1) * m).setIdentity();
    }
    Eigen::EigenSolver<Matrix> solver(companion, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool PolyMatrix::is_stable(double tol) const {
    return companion_spectral_radius() < 1.0 - tol;
}

PolyMatrix PolyMatrix::shifted(int d) const {
    if (d < 0) {
        fail(ErrorCategory::invalid_argument, "shift must be non-negative");
    }
    std::vector<Matrix> out(static_cast<std::size_t>(d), Matrix::Zero(dim(), dim()));
    out.insert(out.end(), coeffs_.begin(), coeffs_.end());
    return PolyMatrix(std::move(out));
}

double PolyMatrix::max_abs_coeff() const {
    double best = 0.0;
    for (const auto& c : coeffs_) {
        best = std::max(best, c.cwiseAbs().maxCoeff());
    }
    return best;
}

PolyMatrix operator*(const PolyMatrix& lhs, const PolyMatrix& rhs) {
    if (lhs.dim() != rhs.dim()) {
        fail(ErrorCategory::invalid_argument, "PolyMatrix product dimension mismatch");
    }
    const int deg = lhs.degree() + rhs.degree();
    std::vector<Matrix> out(static_cast<std::size_t>(deg + 1), Matrix::Zero(lhs.dim(), lhs.dim()));
    for (int i = 0; i <= lhs.degree(); ++i) {
        for (int j = 0; j <= rhs.degree(); ++j) {
            out[static_cast<std::size_t>(i + j)].noalias() += lhs[i] * rhs[j];
        }
    }
    return PolyMatrix(std::move(out));
}

namespace {

PolyMatrix combine(const PolyMatrix& lhs, const PolyMatrix& rhs, double sign) {
    if (lhs.dim() != rhs.dim()) {
        fail(ErrorCategory::invalid_argument, "PolyMatrix sum dimension mismatch");
    }
    const int deg = std::max(lhs.degree(), rhs.degree());
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(deg + 1));
    for (int i = 0; i <= deg; ++i) {
        out.push_back(lhs.coeff_or_zero(i) + sign * rhs.coeff_or_zero(i));
    }
    return PolyMatrix(std::move(out));
}

} // namespace

PolyMatrix operator+(const PolyMatrix& lhs, const PolyMatrix& rhs) { return combine(lhs, rhs, 1.0); }
PolyMatrix operator-(const PolyMatrix& lhs, const PolyMatrix& rhs) { return combine(lhs, rhs, -1.0); }

Vector apply(const PolyMatrix& p, std::span<const Vector> samples, std::size_t k) {
    const auto deg = static_cast<std::size_t>(p.degree());
    if (k >= samples.size() || k < deg) {
        fail(ErrorCategory::history_underrun,
             "need samples " + std::to_string(static_cast<long long>(k) - static_cast<long long>(deg)) +
                 ".." + std::to_string(k) + " but history holds " + std::to_string(samples.size()));
    }
    Vector out = Vector::Zero(p.dim());
    for (std::size_t i = 0; i <= deg; ++i) {
        out.noalias() += p[static_cast<int>(i)] * samples[k - i];
    }
    return out;
}

Vector apply_recent(const PolyMatrix& p, std::span<const Vector> recent) {
    const auto deg = static_cast<std::size_t>(p.degree());
    if (recent.size() < deg + 1) {
        fail(ErrorCategory::history_underrun,
             "need " + std::to_string(deg + 1) + " recent samples, have " + std::to_string(recent.size()));
    }
    Vector out = Vector::Zero(p.dim());
    for (std::size_t i = 0; i <= deg; ++i) {
        out.noalias() += p[static_cast<int>(i)] * recent[i];
    }
    return out;
}

PolyMatrix make_monic(const PolyMatrix& a) {
    Eigen::FullPivLU<Matrix> lu(a[0]);
    if (!lu.isInvertible()) {
        fail(ErrorCategory::normalization_required, "A_0 is singular; A cannot be made monic");
    }
    std::vector<Matrix> out;
    out.reserve(a.coeffs().size());
    for (const auto& c : a.coeffs()) {
        out.push_back(lu.solve(c));
    }
    out.front().setIdentity();
    return PolyMatrix(std::move(out));
}

DiophantineSolution solve_diophantine(const PolyMatrix& a, const PolyMatrix& f, int d) {
    if (a.dim() != f.dim()) {
        fail(ErrorCategory::invalid_argument, "A and F dimensions differ");
    }
    if (d < 1) {
        fail(ErrorCategory::invalid_argument, "relative degree must be >= 1");
    }
    if (!a.is_monic()) {
        fail(ErrorCategory::normalization_required, "A must be monic (A_0 = I); apply make_monic first");
    }
    const Index m = a.dim();

    // Quotient: F_j = sum_{i<=j} L_i A_{j-i} for j < d, with A_0 = I.
    std::vector<Matrix> l(static_cast<std::size_t>(d), Matrix::Zero(m, m));
    for (int j = 0; j < d; ++j) {
        Matrix lj = f.coeff_or_zero(j);
        for (int i = 0; i < j; ++i) {
            lj.noalias() -= l[static_cast<std::size_t>(i)] * a.coeff_or_zero(j - i);
        }
        l[static_cast<std::size_t>(j)] = std::move(lj);
    }

    // Remainder: K_i = F_{i+d} - sum_{j<d} L_j A_{i+d-j}.
    const int top = std::max(f.degree(), a.degree() + d - 1);
    const int k_deg = std::max(top - d, 0);
    std::vector<Matrix> k(static_cast<std::size_t>(k_deg + 1), Matrix::Zero(m, m));
    for (int i = 0; i <= k_deg; ++i) {
        Matrix ki = f.coeff_or_zero(i + d);
        for (int j = 0; j < d; ++j) {
            ki.noalias() -= l[static_cast<std::size_t>(j)] * a.coeff_or_zero(i + d - j);
        }
        k[static_cast<std::size_t>(i)] = std::move(ki);
    }
    return {PolyMatrix(std::move(l)), PolyMatrix(std::move(k))};
}

double diophantine_residual(const PolyMatrix& a, const PolyMatrix& f, int d, const DiophantineSolution& sol) {
    const PolyMatrix rebuilt = sol.L * a + sol.K.shifted(d);
    return (f - rebuilt).max_abs_coeff();
}

} // namespace mmsvc
