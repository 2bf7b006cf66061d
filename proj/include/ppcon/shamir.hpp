#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "ppcon/errors.hpp"
#include "ppcon/linalg.hpp"

namespace ppcon {

// Validation limits for key sequences. Real-valued Vandermonde systems
// degrade quickly with many or large abscissas, so both are capped.
inline constexpr int kMaxKappa = 10'000;
inline constexpr int kMaxChannels = 16;

// Relative singular-value threshold for rank decisions.
inline constexpr double kRankRelTol = 1e-8;

// A masking polynomial f(theta) = constant_term + sum_j coefficients[j-1] * theta^j.
// The constant term carries the secret; the other coefficients are the
// owner's private key material (drawn from [-1,1] by the protocol).
struct SecretPolynomial {
    double constant_term = 0.0;
    std::vector<double> coefficients; // a_1 .. a_{p-1}

    std::size_t degree_bound() const { return coefficients.size(); }
};

// One evaluation sample (x_k, f(x_k)). The abscissa is a key element.
struct Share {
    int point = 0;
    double value = 0.0;
};

inline double eval_poly(const SecretPolynomial& poly, double theta) {
    double acc = 0.0;
    for (std::size_t j = poly.coefficients.size(); j > 0; --j)
        acc = acc * theta + poly.coefficients[j - 1];
    return acc * theta + poly.constant_term;
}

// Lagrange weights at zero for a set of distinct abscissas:
// w_k = prod_{l != k} (-l) / prod_{l != k} (k - l).
inline std::vector<double> lagrange_weights_at_zero(const std::vector<int>& points) {
    std::vector<double> weights(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) {
        double num = 1.0, den = 1.0;
        for (std::size_t l = 0; l < points.size(); ++l) {
            if (l == j) continue;
            num *= static_cast<double>(-points[l]);
            den *= static_cast<double>(points[j] - points[l]);
        }
        weights[j] = num / den;
    }
    return weights;
}

// The common integer evaluation points S, one per communication channel.
// Weights for reconstruction at zero are cached at construction since
// every node reuses them every round.
class KeySequence {
public:
    KeySequence(std::vector<int> elements, int kappa)
        : elements_(std::move(elements)), kappa_(kappa) {
        if (kappa_ < 1 || kappa_ > kMaxKappa)
            throw ConfigError("kappa must lie in [1, " + std::to_string(kMaxKappa) + "]");
        if (elements_.empty() || elements_.size() > static_cast<std::size_t>(kMaxChannels))
            throw ConfigError("key length must lie in [1, " + std::to_string(kMaxChannels) + "]");
        std::set<int> seen;
        for (int e : elements_) {
            if (e < 1 || e > kappa_)
                throw ConfigError("key element " + std::to_string(e) + " outside [1, kappa]");
            if (!seen.insert(e).second)
                throw DuplicateKeyPoint("key element " + std::to_string(e) + " repeated");
        }
        weights_ = lagrange_weights_at_zero(elements_);
    }

    const std::vector<int>& elements() const { return elements_; }
    int kappa() const { return kappa_; }
    std::size_t size() const { return elements_.size(); }

    bool contains(int point) const {
        return std::find(elements_.begin(), elements_.end(), point) != elements_.end();
    }

    std::size_t index_of(int point) const {
        auto it = std::find(elements_.begin(), elements_.end(), point);
        if (it == elements_.end())
            throw PointNotInKey("point " + std::to_string(point) + " not in key sequence");
        return static_cast<std::size_t>(it - elements_.begin());
    }

    const std::vector<double>& lagrange_weights() const { return weights_; }

    bool operator==(const KeySequence& other) const {
        return elements_ == other.elements_ && kappa_ == other.kappa_;
    }

private:
    std::vector<int> elements_;
    int kappa_;
    std::vector<double> weights_;
};

// Evaluate the polynomial at every key element, in key order.
inline std::vector<Share> share(const SecretPolynomial& poly, const KeySequence& key) {
    std::vector<Share> out;
    out.reserve(key.size());
    for (int point : key.elements()) out.push_back({point, eval_poly(poly, point)});
    return out;
}

inline double lagrange_weight_at_zero(int point, const KeySequence& key) {
    return key.lagrange_weights()[key.index_of(point)];
}

// Interpolate the constant term from the given shares, treating the share
// points as the key. Exact for polynomials of degree < number of shares.
inline double reconstruct(const std::vector<Share>& shares) {
    if (shares.empty()) throw ValidationError("reconstruct requires at least one share");
    std::vector<int> points;
    points.reserve(shares.size());
    std::set<int> seen;
    for (const Share& s : shares) {
        if (!seen.insert(s.point).second)
            throw DuplicateKeyPoint("share point " + std::to_string(s.point) + " repeated");
        points.push_back(s.point);
    }
    const std::vector<double> weights = lagrange_weights_at_zero(points);
    double acc = 0.0;
    for (std::size_t j = 0; j < shares.size(); ++j) acc += shares[j].value * weights[j];
    return acc;
}

// Verdict of the linear-identifiability check for a share set against a
// polynomial of the given degree bound.
struct Certificate {
    bool determined = false;
    // Dimension of the affine solution space of the Vandermonde system;
    // 0 when the observations pin every coefficient.
    int free_dimension = 0;
    // Minimum-norm least-squares constant term; the recovered secret
    // when determined.
    double constant = 0.0;
};

// Builds the Vandermonde constraint system of the shares on a polynomial of
// degree `degree_bound` and decides whether the constant term is uniquely
// pinned down: it is iff appending the evaluation row at zero does not
// increase the numerical rank.
inline Certificate underdetermination_certificate(const std::vector<Share>& shares,
                                                  int degree_bound) {
    if (degree_bound < 0) throw ValidationError("degree_bound must be >= 0");
    const std::size_t m = shares.size();
    const std::size_t n = static_cast<std::size_t>(degree_bound) + 1;

    Matrix a(m, n);
    std::vector<double> y(m);
    for (std::size_t r = 0; r < m; ++r) {
        double power = 1.0;
        for (std::size_t c = 0; c < n; ++c) {
            a(r, c) = power;
            power *= static_cast<double>(shares[r].point);
        }
        y[r] = shares[r].value;
    }

    const SvdResult svd = jacobi_svd(a);
    const std::size_t rank = numerical_rank(svd.singular_values, kRankRelTol);

    Matrix augmented(m + 1, n);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) augmented(r, c) = a(r, c);
    augmented(m, 0) = 1.0; // evaluation functional at theta = 0

    const std::size_t rank_aug =
        numerical_rank(jacobi_svd(augmented).singular_values, kRankRelTol);

    Certificate cert;
    cert.determined = (rank_aug == rank);
    cert.free_dimension = static_cast<int>(n - rank);
    if (cert.determined) cert.constant = min_norm_solve(svd, y, kRankRelTol)[0];
    return cert;
}

} // namespace ppcon
