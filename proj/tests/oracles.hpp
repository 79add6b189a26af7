#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// library: entropies are summed directly, in 50-digit arithmetic where it
// matters, and R(D) comes from brute force over quantized test channels.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_50;

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  const big q(p), one(1);
  const big h = -(q * log(q) + (one - q) * log(one - q)) / log(big(2));
  return h.convert_to<double>();
}

inline double entropy(const std::vector<double>& p) {
  big h(0);
  for (double v : p)
    if (v > 0.0) h -= big(v) * log(big(v));
  return (h / log(big(2))).convert_to<double>();
}

// H(A|B) of a matrix p[b][a].
inline double conditional_entropy(const std::vector<std::vector<double>>& p) {
  double h = 0.0;
  for (const auto& row : p) {
    double pb = 0.0;
    for (double v : row) pb += v;
    for (double v : row)
      if (v > 0.0) h -= v * std::log2(v / pb);
  }
  return h;
}

inline double mutual_information(const std::vector<std::vector<double>>& p) {
  std::vector<double> pa(p.front().size(), 0.0), pb(p.size(), 0.0);
  for (std::size_t b = 0; b < p.size(); ++b)
    for (std::size_t a = 0; a < p[b].size(); ++a) {
      pa[a] += p[b][a];
      pb[b] += p[b][a];
    }
  double i = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b)
    for (std::size_t a = 0; a < p[b].size(); ++a)
      if (p[b][a] > 0.0) i += p[b][a] * std::log2(p[b][a] / (pa[a] * pb[b]));
  return i;
}

// min I(X;Y) over binary test channels on a grid of the given step with
// E d <= D, Hamming distortion, source (p, 1 - p).
inline double binary_rd_grid(double p, double D, double step = 0.01) {
  const int m = static_cast<int>(std::lround(1.0 / step));
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= m; ++a)
    for (int b = 0; b <= m; ++b) {
      const double e0 = a * step, e1 = b * step;  // P(Y != x | X = x)
      const std::vector<std::vector<double>> j{{p * (1 - e0), p * e0},
                                               {(1 - p) * e1, (1 - p) * (1 - e1)}};
      if (p * e0 + (1 - p) * e1 > D + 1e-12) continue;
      best = std::min(best, mutual_information(j));
    }
  return best;
}

// h(p) - h(D) for D < min(p, 1 - p), else 0.
inline double binary_rd(double p, double D) {
  if (D >= std::min(p, 1 - p)) return 0.0;
  return binary_entropy(p) - binary_entropy(D);
}

// H(X|M) for a single-letter cipher: encoder[x][k] -> m, uniform key.
inline double single_letter_equivocation(const std::vector<double>& px,
                                         const std::vector<std::vector<int>>& encoder,
                                         int messages) {
  const std::size_t keys = encoder.front().size();
  std::vector<std::vector<double>> joint(static_cast<std::size_t>(messages),
                                         std::vector<double>(px.size(), 0.0));
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t k = 0; k < keys; ++k)
      joint[static_cast<std::size_t>(encoder[x][k])][x] += px[x] / static_cast<double>(keys);
  return conditional_entropy(joint);
}

}  // namespace oracle
