#pragma once

// Exact t-SNE driven by a precomputed company distance matrix.
//
// The input affinities use the squared company distances in place of squared
// Euclidean distances:
//
//   p(j|i) = exp(-d_ij^2 / 2 sigma_i^2) / sum_{k != i} exp(-d_ik^2 / 2 sigma_i^2)
//
// with sigma_i chosen per row so the row's perplexity matches the target.
// The optimizer is the standard one: symmetrized P, Student-t output kernel,
// gradient descent with momentum, per-parameter gains and early exaggeration.
// No Barnes-Hut approximation; populations here are at most a few thousand.

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ledger_emd/distance_matrix.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/parallel.hpp"
#include "ledger_emd/text_io.hpp"

namespace ledger_emd {

struct TsneParams {
  double perplexity = 20.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct Embedding2D {
  std::vector<std::string> company_ids;
  std::vector<std::array<double, 2>> coords;
};

/// KL(P || Q) recorded every `interval` iterations and after the last one.
struct TsneTrace {
  int interval = 50;
  std::vector<std::pair<int, double>> kl;
};

struct PerplexityOptions {
  double tolerance = 1e-5;
  int max_iterations = 50;
};

/// Row-stochastic matrix of p(j|i). Each row's bandwidth is found by bisection
/// on log(beta), beta = 1 / (2 sigma^2), until exp(H) is within tolerance of
/// the target perplexity (H in nats, so exp(H) = 2^H in bits).
///
/// A row whose distances to all other points are equal has the uniform
/// distribution at every bandwidth and is returned as such.
inline SquareMatrix conditional_probabilities(const SquareMatrix& distances, double perplexity,
                                              unsigned threads = 1, const PerplexityOptions& options = {}) {
  const std::size_t n = distances.size();
  if (n < 2) throw Error(Errc::too_small, "need at least two points");
  if (!(perplexity > 0.0) || !(perplexity < static_cast<double>(n - 1))) {
    throw Error(Errc::invalid_argument, "perplexity " + text::format_double(perplexity) +
                                            " must lie in (0, n-1) = (0, " + std::to_string(n - 1) + ")");
  }
  const double target_entropy = std::log(perplexity);
  SquareMatrix p(n);

  parallel_for(n, threads, [&](std::size_t i) {
    // Squared distances shifted by the row minimum; the shift cancels in the normalization.
    std::vector<double> shifted;
    shifted.reserve(n - 1);
    double min_sq = std::numeric_limits<double>::infinity();
    bool all_zero = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double sq = distances(i, j) * distances(i, j);
      all_zero = all_zero && distances(i, j) == 0.0;
      min_sq = std::min(min_sq, sq);
      shifted.push_back(sq);
    }
    if (all_zero) {
      throw Error(Errc::degenerate, "row " + std::to_string(i) + " has zero distance to every other point");
    }
    double max_shift = 0.0;
    double min_positive = std::numeric_limits<double>::infinity();
    for (double& s : shifted) {
      s -= min_sq;
      max_shift = std::max(max_shift, s);
      if (s > 0.0) min_positive = std::min(min_positive, s);
    }

    std::vector<double> w(shifted.size(), 1.0);
    if (max_shift > 0.0) {
      const auto entropy_at = [&](double beta) {
        double z = 0.0;
        double weighted = 0.0;
        for (std::size_t j = 0; j < shifted.size(); ++j) {
          w[j] = std::exp(-beta * shifted[j]);
          z += w[j];
          weighted += w[j] * shifted[j];
        }
        return std::log(z) + beta * weighted / z;
      };
      // exp(-1e-12) ~ 1 for every entry; exp(-700) underflows to ~0 for every
      // entry above the minimum. The target lies between these extremes.
      double lo = std::log(1e-12 / max_shift);
      double hi = std::log(700.0 / min_positive);
      bool converged = false;
      for (int it = 0; it < options.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double h = entropy_at(std::exp(mid));
        if (std::abs(std::exp(h) - perplexity) < options.tolerance) {
          converged = true;
          break;
        }
        if (h > target_entropy) {
          lo = mid;  // too flat: sharpen
        } else {
          hi = mid;
        }
      }
      if (!converged) {
        throw Error(Errc::no_convergence, "perplexity search did not converge for row " + std::to_string(i) +
                                              " within " + std::to_string(options.max_iterations) + " steps");
      }
    }
    double z = 0.0;
    for (double v : w) z += v;
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = j == i ? 0.0 : w[k++] / z;
    }
  });
  return p;
}

/// p_ij = (p(j|i) + p(i|j)) / 2n
inline SquareMatrix symmetrize(const SquareMatrix& conditional) {
  const std::size_t n = conditional.size();
  SquareMatrix p(n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p(i, j) = (conditional(i, j) + conditional(j, i)) * scale;
    }
  }
  return p;
}

namespace detail {

inline constexpr double kProbabilityFloor = 1e-12;

/// Student-t kernel values (1 + |y_i - y_j|^2)^-1 and their off-diagonal sum.
inline double student_kernel(const std::vector<double>& y, std::size_t n, SquareMatrix& kernel) {
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kernel(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      kernel(i, j) = kernel(j, i) = v;
      z += 2.0 * v;
    }
  }
  return z;
}

}  // namespace detail

/// KL(P || Q) for a flat n x 2 layout `y` (x0, y0, x1, y1, ...).
inline double kl_divergence(const SquareMatrix& p, const std::vector<double>& y) {
  const std::size_t n = p.size();
  SquareMatrix kernel(n);
  const double z = detail::student_kernel(y, n, kernel);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = kernel(i, j) / z;
      kl += p(i, j) * std::log(std::max(p(i, j), detail::kProbabilityFloor) /
                               std::max(q, detail::kProbabilityFloor));
    }
  }
  return kl;
}

/// dKL/dy_i = 4 sum_j (p_ij - q_ij) (1 + |y_i - y_j|^2)^-1 (y_i - y_j).
/// Each point's sum runs over j in index order regardless of `threads`.
inline std::vector<double> kl_gradient(const SquareMatrix& p, const std::vector<double>& y, unsigned threads = 1,
                                       double exaggeration = 1.0) {
  const std::size_t n = p.size();
  SquareMatrix kernel(n);
  const double z = detail::student_kernel(y, n, kernel);
  std::vector<double> grad(2 * n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    double gx = 0.0;
    double gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double k = kernel(i, j);
      const double force = (exaggeration * p(i, j) - k / z) * k;
      gx += force * (y[2 * i] - y[2 * j]);
      gy += force * (y[2 * i + 1] - y[2 * j + 1]);
    }
    grad[2 * i] = 4.0 * gx;
    grad[2 * i + 1] = 4.0 * gy;
  });
  return grad;
}

inline Embedding2D tsne_embed(const DistanceMatrix& d, const TsneParams& params = {}, TsneTrace* trace = nullptr) {
  const std::size_t n = d.size();
  if (n < 3) throw Error(Errc::too_small, "t-SNE needs at least 3 companies, got " + std::to_string(n));
  if (params.iterations < 1 || !(params.learning_rate > 0.0) || !(params.early_exaggeration > 0.0)) {
    throw Error(Errc::invalid_argument, "t-SNE iterations, learning rate and exaggeration must be positive");
  }
  const SquareMatrix p = symmetrize(conditional_probabilities(d.values(), params.perplexity, params.threads));

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gaussian(0.0, 1e-4);
  std::vector<double> y(2 * n);
  for (double& v : y) v = gaussian(rng);
  std::vector<double> velocity(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);

  for (int iter = 0; iter < params.iterations; ++iter) {
    const double exaggeration = iter < params.exaggeration_iterations ? params.early_exaggeration : 1.0;
    const double momentum =
        iter < params.momentum_switch_iteration ? params.initial_momentum : params.final_momentum;
    const auto grad = kl_gradient(p, y, params.threads, exaggeration);

    for (std::size_t c = 0; c < 2 * n; ++c) {
      const bool same_sign = (grad[c] > 0.0) == (velocity[c] > 0.0);
      gains[c] = same_sign ? gains[c] * 0.8 : gains[c] + 0.2;
      gains[c] = std::max(gains[c], 0.01);
      velocity[c] = momentum * velocity[c] - params.learning_rate * gains[c] * grad[c];
      y[c] += velocity[c];
    }
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean_x += y[2 * i];
      mean_y += y[2 * i + 1];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mean_x;
      y[2 * i + 1] -= mean_y;
      if (!std::isfinite(y[2 * i]) || !std::isfinite(y[2 * i + 1])) {
        throw Error(Errc::diverged, "t-SNE diverged at iteration " + std::to_string(iter + 1));
      }
    }

    const int done = iter + 1;
    if (trace && trace->interval > 0 && (done % trace->interval == 0 || done == params.iterations)) {
      trace->kl.emplace_back(done, kl_divergence(p, y));
    }
  }

  Embedding2D out;
  out.company_ids = d.company_ids();
  out.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.coords[i] = {y[2 * i], y[2 * i + 1]};
  return out;
}

/// Mean silhouette coefficient of the labelled 2-D points (Euclidean).
/// Points alone in their cluster contribute 0.
inline double silhouette_score(const std::vector<std::array<double, 2>>& points, const std::vector<int>& labels) {
  const std::size_t n = points.size();
  if (n != labels.size()) throw Error(Errc::length_mismatch, "one label per point required");
  const auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(points[a][0] - points[b][0], points[a][1] - points[b][1]);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::pair<double, std::size_t>> by_label;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto& [sum, count] = by_label[labels[j]];
      sum += dist(i, j);
      ++count;
    }
    const auto own = by_label.find(labels[i]);
    if (own == by_label.end()) continue;
    const double a = own->second.first / static_cast<double>(own->second.second);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, acc] : by_label) {
      if (label != labels[i]) b = std::min(b, acc.first / static_cast<double>(acc.second));
    }
    if (!std::isfinite(b)) continue;
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

/// Fraction of points whose nearest 2-D neighbour carries the same label.
inline double same_label_neighbor_rate(const std::vector<std::array<double, 2>>& points,
                                       const std::vector<int>& labels) {
  const std::size_t n = points.size();
  if (n < 2) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = i;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dd = std::hypot(points[i][0] - points[j][0], points[i][1] - points[j][1]);
      if (dd < best_d) {
        best_d = dd;
        best = j;
      }
    }
    if (labels[best] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// `company_id,x,y`
inline void write_embedding(std::ostream& out, const Embedding2D& emb) {
  out << "company_id,x,y\n";
  for (std::size_t i = 0; i < emb.company_ids.size(); ++i) {
    out << text::csv_field(emb.company_ids[i]) << ',' << text::format_double(emb.coords[i][0], 12) << ','
        << text::format_double(emb.coords[i][1], 12) << '\n';
  }
}

}  // namespace ledger_emd
