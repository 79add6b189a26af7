#pragma once

// Rate-distortion function of a finite source under a single-letter distortion
// measure, computed by Blahut-Arimoto in the slope parametrization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "equivoq/errors.hpp"
#include "equivoq/parallel.hpp"
#include "equivoq/prob.hpp"
#include "json.hpp"

namespace equivoq {

/// Distortion matrix d(x, y) with rows indexed by x, plus the limit D.
class DistortionSpec {
 public:
  DistortionSpec() = default;
  DistortionSpec(std::vector<std::vector<double>> matrix, double limit)
      : matrix_(std::move(matrix)), limit_(limit) {
    if (matrix_.empty() || matrix_.front().empty())
      throw ArgumentError("DistortionSpec: empty matrix");
    for (const auto& row : matrix_) {
      if (row.size() != matrix_.front().size()) throw ArgumentError("DistortionSpec: ragged matrix");
      for (double v : row)
        if (!std::isfinite(v) || v < 0.0)
          throw ArgumentError("DistortionSpec: entries must be finite and >= 0");
    }
    if (!std::isfinite(limit_) || limit_ < 0.0)
      throw ArgumentError("DistortionSpec: limit must be finite and >= 0");
  }

  static DistortionSpec hamming(std::size_t n, double limit) {
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 0.0;
    return DistortionSpec(std::move(m), limit);
  }

  std::size_t source_size() const noexcept { return matrix_.size(); }
  std::size_t recon_size() const noexcept { return matrix_.empty() ? 0 : matrix_.front().size(); }
  double operator()(std::size_t x, std::size_t y) const { return matrix_[x][y]; }
  const std::vector<std::vector<double>>& matrix() const noexcept { return matrix_; }
  double limit() const noexcept { return limit_; }
  DistortionSpec with_limit(double limit) const { return DistortionSpec(matrix_, limit); }

  void check_source(const Pmf& source) const {
    if (source.size() != source_size())
      throw ArgumentError("DistortionSpec: matrix has " + std::to_string(source_size()) +
                          " rows but the source alphabet has " + std::to_string(source.size()));
  }

  // Smallest achievable expected distortion: every x mapped to its best y.
  double d_min(const Pmf& source) const {
    check_source(source);
    double v = 0.0;
    for (std::size_t x = 0; x < source_size(); ++x)
      v += source[x] * *std::min_element(matrix_[x].begin(), matrix_[x].end());
    return v;
  }

  // Best expected distortion of a constant reconstruction (zero rate).
  double d_max(const Pmf& source) const {
    check_source(source);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < recon_size(); ++y) {
      double v = 0.0;
      for (std::size_t x = 0; x < source_size(); ++x) v += source[x] * matrix_[x][y];
      best = std::min(best, v);
    }
    return best;
  }

  double expected(const JointPmf& xy) const {
    if (xy.rank() != 2 || xy.dims()[0] != source_size() || xy.dims()[1] != recon_size())
      throw ArgumentError("DistortionSpec::expected: joint must be |X| x |Y|");
    double v = 0.0;
    for (std::size_t x = 0; x < source_size(); ++x)
      for (std::size_t y = 0; y < recon_size(); ++y) v += xy.at({x, y}) * matrix_[x][y];
    return v;
  }

  friend bool operator==(const DistortionSpec&, const DistortionSpec&) = default;

 private:
  std::vector<std::vector<double>> matrix_;
  double limit_ = 0.0;
};

inline void to_json(nlohmann::json& j, const DistortionSpec& d) {
  j = nlohmann::json{{"matrix", d.matrix()}, {"limit", d.limit()}};
}
inline void from_json(const nlohmann::json& j, DistortionSpec& d) {
  d = DistortionSpec(j.at("matrix").get<std::vector<std::vector<double>>>(),
                     j.at("limit").get<double>());
}

struct RdCurvePoint {
  double distortion = 0.0;
  double rate = 0.0;   // bits
  double slope = 0.0;  // bits per distortion unit, <= 0
  friend bool operator==(const RdCurvePoint&, const RdCurvePoint&) = default;
};

inline void to_json(nlohmann::json& j, const RdCurvePoint& p) {
  j = nlohmann::json{{"distortion", p.distortion}, {"rate", p.rate}, {"slope", p.slope}};
}
inline void from_json(const nlohmann::json& j, RdCurvePoint& p) {
  p.distortion = j.at("distortion").get<double>();
  p.rate = j.at("rate").get<double>();
  p.slope = j.at("slope").get<double>();
}

inline constexpr double kRdDefaultTol = 1e-9;
inline constexpr int kRdDefaultMaxIter = 10000;

namespace detail {

struct BaSolution {
  RdCurvePoint point;
  std::vector<std::vector<double>> channel;  // Q(y|x), rows indexed by x
  int iterations = 0;
  bool converged = false;
};

// Zero-rate solution: every x goes to the best constant reconstruction.
inline BaSolution zero_rate_solution(const Pmf& source, const DistortionSpec& d) {
  std::size_t best_y = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < d.recon_size(); ++y) {
    double v = 0.0;
    for (std::size_t x = 0; x < d.source_size(); ++x) v += source[x] * d(x, y);
    if (v < best) best = v, best_y = y;
  }
  BaSolution s;
  s.point = {best, 0.0, 0.0};
  s.channel.assign(d.source_size(), std::vector<double>(d.recon_size(), 0.0));
  for (auto& row : s.channel) row[best_y] = 1.0;
  s.converged = true;
  return s;
}

// Alternating minimization at multiplier beta (nats per distortion unit).
inline BaSolution blahut_arimoto(const Pmf& source, const DistortionSpec& d, double beta,
                                 double tol, int max_iter) {
  const std::size_t nx = d.source_size(), ny = d.recon_size();
  std::vector<double> q(ny, 1.0 / static_cast<double>(ny)), q_next(ny);
  std::vector<std::vector<double>> chan(nx, std::vector<double>(ny));
  double last_lagrangian = std::numeric_limits<double>::infinity();
  BaSolution s;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t x = 0; x < nx; ++x) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < ny; ++y) {
        const double l = q[y] > 0.0 ? std::log(q[y]) - beta * d(x, y)
                                    : -std::numeric_limits<double>::infinity();
        chan[x][y] = l;
        top = std::max(top, l);
      }
      double z = 0.0;
      for (std::size_t y = 0; y < ny; ++y) z += (chan[x][y] = std::exp(chan[x][y] - top));
      for (std::size_t y = 0; y < ny; ++y) chan[x][y] /= z;
    }
    std::fill(q_next.begin(), q_next.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) q_next[y] += source[x] * chan[x][y];

    double dist = 0.0, rate = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      if (source[x] <= 0.0) continue;
      for (std::size_t y = 0; y < ny; ++y) {
        const double w = chan[x][y];
        if (w <= 0.0) continue;
        dist += source[x] * w * d(x, y);
        rate += source[x] * w * std::log2(w / q_next[y]);
      }
    }
    rate = std::max(0.0, rate);
    q.swap(q_next);

    const double lagrangian = rate + beta / std::numbers::ln2 * dist;
    s.point = {dist, rate, -beta / std::numbers::ln2};
    s.iterations = it;
    if (std::abs(lagrangian - last_lagrangian) < tol) {
      s.converged = true;
      break;
    }
    last_lagrangian = lagrangian;
  }
  s.channel = std::move(chan);
  return s;
}

// Largest multiplier used to approach d_min.
inline constexpr double kBetaCap = 1.0e6;

struct RdSolution {
  double rate = 0.0;
  double slope = 0.0;
  // Achievable test channel with expected distortion <= the target (when one
  // was reached by the sweep).
  std::vector<std::vector<double>> channel;
  double channel_distortion = 0.0;
  double channel_rate = 0.0;
};

inline BaSolution ba_at(const Pmf& source, const DistortionSpec& d, double beta) {
  if (beta <= 0.0) return zero_rate_solution(source, d);
  return blahut_arimoto(source, d, beta, 1e-12, kRdDefaultMaxIter);
}

inline RdSolution rd_solve(const Pmf& source, const DistortionSpec& d, double target, double tol) {
  d.check_source(source);
  if (!std::isfinite(target) || target < 0.0)
    throw ArgumentError("rd_function: D must be finite and >= 0");
  const double dmin = d.d_min(source), dmax = d.d_max(source);
  if (target < dmin - 1e-12)
    throw InfeasibleError("rd_function: D = " + std::to_string(target) +
                          " is below d_min = " + std::to_string(dmin));
  if (target >= dmax) {
    auto z = zero_rate_solution(source, d);
    return {0.0, 0.0, z.channel, z.point.distortion, 0.0};
  }

  // lo: distortion above target (smaller beta); hi: distortion at or below target.
  BaSolution lo = zero_rate_solution(source, d);
  double beta_lo = 0.0, beta_hi = 1.0;
  BaSolution hi = ba_at(source, d, beta_hi);
  while (hi.point.distortion > target && beta_hi < kBetaCap) {
    lo = std::move(hi);
    beta_lo = beta_hi;
    beta_hi = std::min(kBetaCap, beta_hi * 2.0);
    hi = ba_at(source, d, beta_hi);
  }
  if (hi.point.distortion > target) {
    // target sits in the sliver between d_min and the capped sweep; use the limit.
    return {hi.point.rate, hi.point.slope, hi.channel, hi.point.distortion, hi.point.rate};
  }
  while (lo.point.distortion - hi.point.distortion > tol &&
         beta_hi - beta_lo > 1e-13 * beta_hi) {
    const double mid = 0.5 * (beta_lo + beta_hi);
    BaSolution m = ba_at(source, d, mid);
    if (m.point.distortion > target) {
      lo = std::move(m);
      beta_lo = mid;
    } else {
      hi = std::move(m);
      beta_hi = mid;
    }
  }
  const double span = lo.point.distortion - hi.point.distortion;
  double rate = hi.point.rate;
  if (span > 0.0) {
    const double t = (target - hi.point.distortion) / span;
    rate = (1.0 - t) * hi.point.rate + t * lo.point.rate;
  }
  return {std::max(0.0, rate), hi.point.slope, hi.channel, hi.point.distortion, hi.point.rate};
}

}  // namespace detail

/// Point of the rate-distortion curve whose supporting line has the given slope.
/// Throws ConvergenceError<RdCurvePoint> if max_iter is exhausted.
inline RdCurvePoint blahut_arimoto_point(const Pmf& source, const DistortionSpec& d, double slope,
                                         double tol = kRdDefaultTol,
                                         int max_iter = kRdDefaultMaxIter) {
  d.check_source(source);
  if (!(slope <= 0.0)) throw ArgumentError("blahut_arimoto_point: slope must be <= 0");
  if (!(tol > 0.0)) throw ArgumentError("blahut_arimoto_point: tol must be > 0");
  if (slope == 0.0) return detail::zero_rate_solution(source, d).point;
  const double beta = -slope * std::numbers::ln2;
  auto s = detail::blahut_arimoto(source, d, beta, tol, max_iter);
  if (!s.converged)
    throw ConvergenceError<RdCurvePoint>(
        "blahut_arimoto_point: no convergence after " + std::to_string(max_iter) + " iterations",
        s.point);
  return s.point;
}

/// R(D) in bits. Zero at and above d_max; D below d_min is infeasible.
inline double rd_function(const Pmf& source, const DistortionSpec& d, double target,
                          double tol = kRdDefaultTol) {
  return detail::rd_solve(source, d, target, tol).rate;
}

inline double rd_function(const Pmf& source, const DistortionSpec& d) {
  return rd_function(source, d, d.limit());
}

/// Curve sampled at evenly spaced distortions spanning [d_min, d_max].
inline std::vector<RdCurvePoint> rd_curve(const Pmf& source, const DistortionSpec& d,
                                          std::size_t n_points, double tol = kRdDefaultTol) {
  if (n_points < 2) throw ArgumentError("rd_curve: n_points must be >= 2");
  const double dmin = d.d_min(source), dmax = d.d_max(source);
  return parallel_map(n_points, [&](std::size_t i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
    const double target = i + 1 == n_points ? dmax : dmin + t * (dmax - dmin);
    const auto s = detail::rd_solve(source, d, target, tol);
    return RdCurvePoint{target, s.rate, s.slope};
  });
}

}  // namespace equivoq
