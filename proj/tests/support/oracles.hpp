#pragma once

// Reference implementations used only by the tests. Written from the defining
// formulas with plain loops; deliberately share no code with the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// sum_i C_i v(k-i), element by element.
inline Vec direct_apply(const std::vector<Mat>& c, const std::vector<Vec>& v, std::size_t k) {
    const auto m = c.front().rows();
    Vec out = Vec::Zero(m);
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (Eigen::Index r = 0; r < m; ++r) {
            double acc = 0.0;
            for (Eigen::Index col = 0; col < m; ++col) acc += c[i](r, col) * v[k - i](col);
            out(r) += acc;
        }
    }
    return out;
}

// Coefficients of A(z^-1) B(z^-1) by the convolution sum.
inline std::vector<Mat> naive_multiply(const std::vector<Mat>& a, const std::vector<Mat>& b) {
    const auto m = a.front().rows();
    std::vector<Mat> out(a.size() + b.size() - 1, Mat::Zero(m, m));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            for (Eigen::Index r = 0; r < m; ++r) {
                for (Eigen::Index c = 0; c < m; ++c) {
                    double acc = 0.0;
                    for (Eigen::Index s = 0; s < m; ++s) acc += a[i](r, s) * b[j](s, c);
                    out[i + j](r, c) += acc;
                }
            }
        }
    }
    return out;
}

// max |F - L A - z^-d K| over all coefficients, via the naive product.
inline double diophantine_residual(const std::vector<Mat>& a, const std::vector<Mat>& f, int d,
                                   const std::vector<Mat>& l, const std::vector<Mat>& k) {
    const auto la = naive_multiply(l, a);
    std::size_t len = std::max({f.size(), la.size(), k.size() + static_cast<std::size_t>(d)});
    double worst = 0.0;
    const auto m = a.front().rows();
    for (std::size_t i = 0; i < len; ++i) {
        Mat r = Mat::Zero(m, m);
        if (i < f.size()) r += f[i];
        if (i < la.size()) r -= la[i];
        if (i >= static_cast<std::size_t>(d) && i - d < k.size()) r -= k[i - d];
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

// Two-loop forward pass of y = W_out [tanh(W_hid [s x; 1]); 1].
inline Vec forward(const Mat& w_hid, const Mat& w_out, const Vec& x, double scale) {
    const auto h = w_hid.rows();
    std::vector<double> z(static_cast<std::size_t>(h) + 1, 1.0);
    for (Eigen::Index j = 0; j < h; ++j) {
        double acc = w_hid(j, x.size());  // bias column
        for (Eigen::Index i = 0; i < x.size(); ++i) acc += w_hid(j, i) * scale * x(i);
        z[static_cast<std::size_t>(j)] = std::tanh(acc);
    }
    Vec y(w_out.rows());
    for (Eigen::Index o = 0; o < w_out.rows(); ++o) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j <= h; ++j) acc += w_out(o, j) * z[static_cast<std::size_t>(j)];
        y(o) = acc;
    }
    return y;
}

// Difference equation V(t+1) = -sum A_i V(t+1-i) + sum B_j E(t+1-d-j), zero
// initial rest, scalar-by-scalar.
inline std::vector<Vec> simulate_recursion(const std::vector<Mat>& a, const std::vector<Mat>& b, int d,
                                           const std::vector<Vec>& inputs) {
    const auto m = a.front().rows();
    const auto steps = inputs.size();
    std::vector<Vec> v(steps + 1, Vec::Zero(m));
    auto in = [&](long idx) { return idx < 0 ? Vec(Vec::Zero(m)) : inputs[static_cast<std::size_t>(idx)]; };
    auto out = [&](long idx) { return idx < 0 ? Vec(Vec::Zero(m)) : v[static_cast<std::size_t>(idx)]; };
    for (long t = 0; t < static_cast<long>(steps); ++t) {
        Vec next = Vec::Zero(m);
        for (std::size_t i = 1; i < a.size(); ++i) {
            const Vec past = out(t + 1 - static_cast<long>(i));
            for (Eigen::Index r = 0; r < m; ++r)
                for (Eigen::Index c = 0; c < m; ++c) next(r) -= a[i](r, c) * past(c);
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            const Vec e = in(t + 1 - d - static_cast<long>(j));
            for (Eigen::Index r = 0; r < m; ++r)
                for (Eigen::Index c = 0; c < m; ++c) next(r) += b[j](r, c) * e(c);
        }
        v[static_cast<std::size_t>(t) + 1] = next;
    }
    return v;
}

// Hand evaluation of the switching indices for scalar error streams.
struct SwitchTrace {
    std::vector<double> xi_l, xi_n;
    std::vector<int> active;  // 0 linear, 1 nonlinear
};

inline SwitchTrace hand_switch(const std::vector<double>& el, const std::vector<double>& en,
                               const std::vector<double>& xnorm2, double rho, double mu, int window) {
    SwitchTrace tr;
    double cl = 0.0, cn = 0.0;
    for (std::size_t k = 0; k < el.size(); ++k) {
        const double etal = std::abs(el[k]) > 2 * rho ? 1.0 : 0.0;
        const double etan = std::abs(en[k]) > 2 * rho ? 1.0 : 0.0;
        cl += etal * (el[k] * el[k] - 4 * rho * rho) / (2 * (1 + xnorm2[k]));
        cn += etan * (en[k] * en[k] - 4 * rho * rho) / (2 * (1 + xnorm2[k]));
        double wl = 0.0, wn = 0.0;
        for (std::size_t s = k + 1 > static_cast<std::size_t>(window) ? k + 1 - window : 0; s <= k; ++s) {
            wl += (std::abs(el[s]) > 2 * rho ? 0.0 : 1.0) * el[s] * el[s];
            wn += (std::abs(en[s]) > 2 * rho ? 0.0 : 1.0) * en[s] * en[s];
        }
        tr.xi_l.push_back(cl + mu * wl);
        tr.xi_n.push_back(cn + mu * wn);
        tr.active.push_back(tr.xi_l.back() <= tr.xi_n.back() ? 0 : 1);
    }
    return tr;
}

} // namespace oracle
