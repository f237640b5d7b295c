#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <vector>

#include "acoofdm/error.hpp"
#include "acoofdm/rng.hpp"

namespace acoofdm {

/// How expectations over the complex Gaussian noise are evaluated.
struct QuadratureSpec {
  enum class Method { gauss_hermite, monte_carlo };

  Method method = Method::gauss_hermite;
  int nodes_per_dim = 32;        // gauss_hermite
  long sample_count = 100000;    // monte_carlo
  std::uint64_t seed = 0x9a3cull;
};

inline void validate(const QuadratureSpec& q) {
  if (q.method == QuadratureSpec::Method::gauss_hermite) {
    if (q.nodes_per_dim < 8) fail(errc::quadrature_failure, "need at least 8 nodes per dimension");
  } else if (q.sample_count < 10000) {
    fail(errc::quadrature_failure, "need at least 1e4 Monte Carlo samples");
  }
}

namespace detail {

// Physicists' Gauss-Hermite rule: integral of f(x) exp(-x^2) dx over the real
// line. Roots by Newton iteration on the orthonormal Hermite recurrence, with
// the usual asymptotic initial guesses marching inward from the largest root.
inline void gauss_hermite_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pim4 = 0.75112554446494248;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];

    double pp = 0.0;
    for (int iter = 0;; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
      if (iter > 200) fail(errc::quadrature_failure, "Hermite root iteration stalled");
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
}

inline const std::pair<std::vector<double>, std::vector<double>>& cached_hermite(int n) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::pair<std::vector<double>, std::vector<double>> rule;
    gauss_hermite_rule(n, rule.first, rule.second);
    it = cache.emplace(n, std::move(rule)).first;
  }
  return it->second;
}

// Unit-interval double from the top 53 bits, then Box-Muller. Avoids the
// implementation-defined std::normal_distribution sequence so seeded runs are
// reproducible byte for byte.
class NormalDraw {
 public:
  explicit NormalDraw(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_ = false;
};

}  // namespace detail

/// Weighted sample of a real noise variable with variance 1/2 (one dimension
/// of a unit-variance complex Gaussian). Weights sum to 1.
struct NoiseNode1 {
  double z, w;
};

/// Weighted sample of a unit-variance complex Gaussian.
struct NoiseNode2 {
  double re, im, w;
};

inline std::vector<NoiseNode1> noise_nodes_1d(const QuadratureSpec& q) {
  validate(q);
  std::vector<NoiseNode1> nodes;
  if (q.method == QuadratureSpec::Method::gauss_hermite) {
    const auto& [x, w] = detail::cached_hermite(q.nodes_per_dim);
    const double norm = 0.56418958354775629;  // pi^(-1/2)
    nodes.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) nodes[i] = {x[i], w[i] * norm};
  } else {
    detail::NormalDraw draw(derive_seed(q.seed, 1));
    const double s = std::sqrt(0.5);
    nodes.resize(static_cast<std::size_t>(q.sample_count));
    const double w = 1.0 / static_cast<double>(q.sample_count);
    for (auto& nd : nodes) nd = {s * draw(), w};
  }
  return nodes;
}

inline std::vector<NoiseNode2> noise_nodes_2d(const QuadratureSpec& q) {
  validate(q);
  std::vector<NoiseNode2> nodes;
  if (q.method == QuadratureSpec::Method::gauss_hermite) {
    const auto& [x, w] = detail::cached_hermite(q.nodes_per_dim);
    const double norm = 0.31830988618379067;  // 1/pi
    nodes.reserve(x.size() * x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        nodes.push_back({x[i], x[j], w[i] * w[j] * norm});
  } else {
    detail::NormalDraw draw(derive_seed(q.seed, 2));
    const double s = std::sqrt(0.5);
    nodes.resize(static_cast<std::size_t>(q.sample_count));
    const double w = 1.0 / static_cast<double>(q.sample_count);
    for (auto& nd : nodes) {
      double re = s * draw();
      double im = s * draw();
      nd = {re, im, w};
    }
  }
  return nodes;
}

}  // namespace acoofdm
