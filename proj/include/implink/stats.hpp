#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "implink/rng.hpp"
#include "implink/types.hpp"

namespace implink::stats {

// Neumaier-compensated accumulator. Regression inputs run to ~10^6 rows, so
// every moment/sum in this module goes through one of these.
class NeumaierSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
    NeumaierSum s;
    for (double v : values) s.add(v);
    return s.value();
}

inline double mean(std::span<const double> values) {
    return compensated_sum(values) / static_cast<double>(values.size());
}

// Sample standard deviation (n-1 denominator).
inline double sample_sd(std::span<const double> values, double mu) {
    NeumaierSum s;
    for (double v : values) s.add((v - mu) * (v - mu));
    return std::sqrt(s.value() / static_cast<double>(values.size() - 1));
}

inline std::vector<double> zstandardize(std::span<const double> values) {
    if (values.size() < 2) {
        throw precondition_error("zstandardize: need at least 2 values");
    }
    const double mu = mean(values);
    const double sd = sample_sd(values, mu);
    if (!(sd > 0.0)) {
        throw precondition_error("zstandardize: constant column (sd = 0)");
    }
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mu) / sd;
    return out;
}

// Average ranks, ties shared (1-based).
inline std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x);
    const double my = mean(y);
    NeumaierSum sxy, sxx, syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy.add(dx * dy);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    const double denom = std::sqrt(sxx.value()) * std::sqrt(syy.value());
    if (!(denom > 0.0)) {
        throw precondition_error("pearson: constant margin");
    }
    return std::clamp(sxy.value() / denom, -1.0, 1.0);
}

namespace detail {

// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
inline double incomplete_beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 3e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace detail

inline double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::incomplete_beta_cf(a, b, x) / a;
    }
    return 1.0 - front * detail::incomplete_beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p for a t statistic with dof degrees of freedom:
// P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
inline double student_t_two_sided_p(double t, double dof) {
    if (!std::isfinite(t)) return std::numeric_limits<double>::min();
    const double x = dof / (dof + t * t);
    const double p = regularized_incomplete_beta(0.5 * dof, 0.5, x);
    return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

struct Correlation {
    double rho = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

// Spearman rank correlation with average-tie ranks; two-sided p from the
// t-approximation t = rho*sqrt((n-2)/(1-rho^2)).
inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw precondition_error("spearman: length mismatch");
    }
    if (x.size() < 3) {
        throw precondition_error("spearman: need at least 3 pairs");
    }
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    Correlation result;
    result.n = x.size();
    result.rho = pearson(rx, ry);
    const double n = static_cast<double>(x.size());
    const double one_minus = 1.0 - result.rho * result.rho;
    if (one_minus <= 0.0) {
        result.p_value = std::numeric_limits<double>::min();
    } else {
        const double t = result.rho * std::sqrt((n - 2.0) / one_minus);
        result.p_value = student_t_two_sided_p(t, n - 2.0);
    }
    return result;
}

// Seeded permutation p-value for |rho|; deterministic per (seed, permutation
// index) regardless of evaluation order.
inline double spearman_permutation_p(std::span<const double> x,
                                     std::span<const double> y,
                                     std::size_t n_perm, std::uint64_t seed) {
    const Correlation observed = spearman(x, y);
    auto ry = average_ranks(y);
    const auto rx = average_ranks(x);
    std::size_t at_least = 0;
    for (std::size_t p = 0; p < n_perm; ++p) {
        Xoshiro256ss rng(derive_seed(seed, 0x7065726dULL, p));
        auto shuffled = ry;
        rng.shuffle(shuffled);
        const double rho = pearson(rx, shuffled);
        if (std::abs(rho) >= std::abs(observed.rho) - 1e-15) ++at_least;
    }
    return static_cast<double>(at_least + 1) / static_cast<double>(n_perm + 1);
}

struct Histogram {
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
    std::uint64_t total() const {
        std::uint64_t t = underflow + overflow;
        for (auto c : counts) t += c;
        return t;
    }
};

// Half-open bins [e_i, e_{i+1}); values below e_0 / at or above e_last land in
// underflow/overflow.
inline Histogram histogram(std::span<const double> values,
                           std::span<const double> edges) {
    if (edges.size() < 2) {
        throw std::invalid_argument("histogram: need at least 2 bin edges");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) {
            throw std::invalid_argument("histogram: edges must be strictly increasing");
        }
    }
    Histogram h;
    h.counts.assign(edges.size() - 1, 0);
    for (double v : values) {
        if (v < edges.front()) {
            ++h.underflow;
        } else if (v >= edges.back()) {
            ++h.overflow;
        } else {
            const auto it = std::upper_bound(edges.begin(), edges.end(), v);
            h.counts[static_cast<std::size_t>(it - edges.begin()) - 1] += 1;
        }
    }
    return h;
}

// --- small symmetric-matrix helpers for the OLS path (p <= ~6) ---

namespace detail {

// Lower Cholesky of a symmetric positive definite matrix (row-major p*p).
// Returns false when a pivot falls below tol relative to the largest diagonal.
inline bool cholesky(std::vector<double>& a, std::size_t p, double rel_tol) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, a[i * p + i]);
    const double floor = max_diag * rel_tol;
    for (std::size_t j = 0; j < p; ++j) {
        double d = a[j * p + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * p + k] * a[j * p + k];
        if (!(d > floor)) return false;
        const double root = std::sqrt(d);
        a[j * p + j] = root;
        for (std::size_t i = j + 1; i < p; ++i) {
            double v = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
            a[i * p + j] = v / root;
        }
    }
    // zero strict upper triangle
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) a[i * p + j] = 0.0;
    return true;
}

// Inverse of SPD matrix from its lower Cholesky factor.
inline std::vector<double> spd_inverse_from_cholesky(const std::vector<double>& l,
                                                     std::size_t p) {
    // invert L by forward substitution
    std::vector<double> linv(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        linv[i * p + i] = 1.0 / l[i * p + i];
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += l[i * p + k] * linv[k * p + j];
            linv[i * p + j] = -s / l[i * p + i];
        }
    }
    // A^{-1} = L^{-T} L^{-1}
    std::vector<double> inv(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < p; ++k) s += linv[k * p + i] * linv[k * p + j];
            inv[i * p + j] = s;
            inv[j * p + i] = s;
        }
    }
    return inv;
}

// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi rotations;
// used only to report a rank-deficiency diagnostic.
inline double smallest_symmetric_eigenvalue(std::vector<double> a, std::size_t p) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) off += a[i * p + j] * a[i * p + j];
        if (off < 1e-30) break;
        for (std::size_t pi = 0; pi < p; ++pi) {
            for (std::size_t qi = pi + 1; qi < p; ++qi) {
                const double apq = a[pi * p + qi];
                if (apq == 0.0) continue;
                const double app = a[pi * p + pi];
                const double aqq = a[qi * p + qi];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < p; ++k) {
                    const double akp = a[k * p + pi];
                    const double akq = a[k * p + qi];
                    a[k * p + pi] = c * akp - s * akq;
                    a[k * p + qi] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double apk = a[pi * p + k];
                    const double aqk = a[qi * p + k];
                    a[pi * p + k] = c * apk - s * aqk;
                    a[qi * p + k] = s * apk + c * aqk;
                }
            }
        }
    }
    double lo = a[0];
    for (std::size_t i = 0; i < p; ++i) lo = std::min(lo, a[i * p + i]);
    return lo;
}

}  // namespace detail

struct RegressionResult {
    std::vector<double> coefficients;
    std::vector<double> hc3_se;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    std::size_t n = 0;
    std::size_t p = 0;
    // rows with leverage ~ 1 are excluded from the HC3 meat matrix
    std::size_t high_leverage_dropped = 0;
};

// OLS with HC3 heteroskedasticity-robust standard errors.
//   beta   = (X'X)^{-1} X'y           (via Cholesky of the Gram matrix)
//   cov    = (X'X)^{-1} X' diag(e_i^2/(1-h_ii)^2) X (X'X)^{-1}
//   R^2 computed on centered y; adjusted = 1 - (1-R^2)(n-1)/(n-p-1).
// columns: column-major design, no intercept column is added.
inline RegressionResult ols_hc3(const std::vector<std::vector<double>>& columns,
                                std::span<const double> y) {
    const std::size_t p = columns.size();
    const std::size_t n = y.size();
    if (p == 0) throw precondition_error("ols_hc3: empty design");
    for (const auto& col : columns) {
        if (col.size() != n) throw precondition_error("ols_hc3: ragged design");
    }
    if (n <= p) throw precondition_error("ols_hc3: need n > p");

    // Gram matrix and X'y with compensated accumulation.
    std::vector<NeumaierSum> gram_acc(p * p);
    std::vector<NeumaierSum> xty_acc(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < p; ++a) {
            const double xa = columns[a][i];
            xty_acc[a].add(xa * y[i]);
            for (std::size_t b = 0; b <= a; ++b) {
                gram_acc[a * p + b].add(xa * columns[b][i]);
            }
        }
    }
    std::vector<double> gram(p * p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            gram[a * p + b] = gram[b * p + a] = gram_acc[a * p + b].value();
        }
    }

    std::vector<double> chol = gram;
    if (!detail::cholesky(chol, p, 1e-12)) {
        const double eig = detail::smallest_symmetric_eigenvalue(gram, p);
        const double sv = std::sqrt(std::max(eig, 0.0));
        throw precondition_error(
            "ols_hc3: rank-deficient design (smallest singular value of X ~= " +
            std::to_string(sv) + ")");
    }
    const std::vector<double> gram_inv = detail::spd_inverse_from_cholesky(chol, p);

    RegressionResult result;
    result.n = n;
    result.p = p;
    result.coefficients.assign(p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < p; ++b) s += gram_inv[a * p + b] * xty_acc[b].value();
        result.coefficients[a] = s;
    }

    // Residual pass: SSR, SST, and the HC3 meat matrix.
    const double ybar = mean(y);
    NeumaierSum ssr_acc, sst_acc;
    std::vector<NeumaierSum> meat_acc(p * p);
    std::vector<double> ginv_x(p);
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t a = 0; a < p; ++a) fit += columns[a][i] * result.coefficients[a];
        const double e = y[i] - fit;
        ssr_acc.add(e * e);
        sst_acc.add((y[i] - ybar) * (y[i] - ybar));

        double h = 0.0;
        for (std::size_t a = 0; a < p; ++a) {
            double s = 0.0;
            for (std::size_t b = 0; b < p; ++b) s += gram_inv[a * p + b] * columns[b][i];
            ginv_x[a] = s;
            h += s * columns[a][i];
        }
        if (h >= 1.0 - 1e-12) {
            ++result.high_leverage_dropped;
            continue;
        }
        const double w = (e * e) / ((1.0 - h) * (1.0 - h));
        for (std::size_t a = 0; a < p; ++a) {
            const double xa = columns[a][i];
            for (std::size_t b = 0; b <= a; ++b) {
                meat_acc[a * p + b].add(w * xa * columns[b][i]);
            }
        }
    }

    std::vector<double> meat(p * p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            meat[a * p + b] = meat[b * p + a] = meat_acc[a * p + b].value();
        }
    }
    result.hc3_se.assign(p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        // diag of Ginv * meat * Ginv
        double v = 0.0;
        for (std::size_t b = 0; b < p; ++b) {
            double s = 0.0;
            for (std::size_t c = 0; c < p; ++c) s += meat[b * p + c] * gram_inv[c * p + a];
            v += gram_inv[a * p + b] * s;
        }
        result.hc3_se[a] = std::sqrt(std::max(v, 0.0));
    }

    const double ssr = ssr_acc.value();
    const double sst = sst_acc.value();
    result.r_squared = sst > 0.0 ? 1.0 - ssr / sst : std::numeric_limits<double>::quiet_NaN();
    if (n > p + 1) {
        result.adjusted_r_squared =
            1.0 - (1.0 - result.r_squared) * static_cast<double>(n - 1) /
                      static_cast<double>(n - p - 1);
    } else {
        result.adjusted_r_squared = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

}  // namespace implink::stats
