#pragma once

// Log-loss payoffs for a soft-guessing eavesdropper. The eavesdropper announces a
// pmf z over the payoff's target and pays log2(1/z(target)). The best response to
// any observation is the posterior, and its expected payoff is a conditional
// entropy.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "equivoq/errors.hpp"
#include "equivoq/prob.hpp"

namespace equivoq {

enum class LogLossVariant {
  source,          // z over X
  reconstruction,  // z over Y
  joint,           // z over X x Y, index x * |Y| + y
};

inline std::string_view to_string(LogLossVariant v) {
  switch (v) {
    case LogLossVariant::source: return "pi1";
    case LogLossVariant::reconstruction: return "pi2";
    case LogLossVariant::joint: return "pi3";
  }
  return "?";
}

inline LogLossVariant parse_variant(std::string_view s) {
  if (s == "pi1" || s == "source") return LogLossVariant::source;
  if (s == "pi2" || s == "reconstruction") return LogLossVariant::reconstruction;
  if (s == "pi3" || s == "joint") return LogLossVariant::joint;
  throw ArgumentError("unknown log-loss variant '" + std::string(s) + "'");
}

// Payoff charged for z(target) == 0.
inline constexpr double kInfiniteLogLoss = 1e12;

class LogLossPayoff {
 public:
  LogLossPayoff(LogLossVariant variant, std::size_t source_size, std::size_t recon_size)
      : variant_(variant), nx_(source_size), ny_(recon_size) {
    if (nx_ == 0 || ny_ == 0) throw ArgumentError("LogLossPayoff: empty alphabet");
  }

  LogLossVariant variant() const noexcept { return variant_; }

  std::size_t support_size() const noexcept {
    switch (variant_) {
      case LogLossVariant::source: return nx_;
      case LogLossVariant::reconstruction: return ny_;
      case LogLossVariant::joint: return nx_ * ny_;
    }
    return 0;
  }

  std::size_t target(std::size_t x, std::size_t y) const {
    if (x >= nx_ || y >= ny_) throw ArgumentError("LogLossPayoff: symbol out of range");
    switch (variant_) {
      case LogLossVariant::source: return x;
      case LogLossVariant::reconstruction: return y;
      case LogLossVariant::joint: return x * ny_ + y;
    }
    return 0;
  }

 private:
  LogLossVariant variant_;
  std::size_t nx_, ny_;
};

inline double logloss(double z_at_target) {
  return z_at_target > 0.0 ? -std::log2(z_at_target) : kInfiniteLogLoss;
}

/// log2(1 / z(target)), saturating at kInfiniteLogLoss.
inline double evaluate_payoff(const LogLossPayoff& payoff, std::size_t x, std::size_t y,
                              const Pmf& z) {
  if (z.size() != payoff.support_size())
    throw ArgumentError("evaluate_payoff: z has " + std::to_string(z.size()) +
                        " entries, payoff support has " +
                        std::to_string(payoff.support_size()));
  return logloss(z[payoff.target(x, y)]);
}

/// Eavesdropper strategy: one pmf over the target per conditioning symbol.
struct SoftStrategy {
  Kernel table;
};

/// Best response to a joint over (conditioning, target): row c is the law of the
/// target given c. Conditioning symbols of probability zero get uniform rows.
inline SoftStrategy posterior_strategy(const JointPmf& joint) {
  if (joint.rank() != 2)
    throw ArgumentError("posterior_strategy: joint must have axes (conditioning, target)");
  const std::size_t nc = joint.dims()[0], nt = joint.dims()[1];
  std::vector<Pmf> rows;
  rows.reserve(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double mass = 0.0;
    for (std::size_t t = 0; t < nt; ++t) mass += joint.at({c, t});
    if (mass <= 0.0) {
      rows.push_back(Pmf::uniform(nt));
      continue;
    }
    std::vector<double> row(nt);
    for (std::size_t t = 0; t < nt; ++t) row[t] = joint.at({c, t}) / mass;
    rows.emplace_back(std::move(row));
  }
  return SoftStrategy{Kernel(std::move(rows))};
}

/// E log2 1/z_C(T) for a joint over (conditioning, target) and a strategy.
inline double expected_logloss(const JointPmf& joint, const SoftStrategy& s) {
  if (joint.rank() != 2 || s.table.inputs() != joint.dims()[0] ||
      s.table.outputs() != joint.dims()[1])
    throw ArgumentError("expected_logloss: strategy shape does not match the joint");
  double total = 0.0;
  for (std::size_t c = 0; c < joint.dims()[0]; ++c)
    for (std::size_t t = 0; t < joint.dims()[1]; ++t) {
      const double p = joint.at({c, t});
      if (p > 0.0) total += p * logloss(s.table(c, t));
    }
  return total;
}

/// min over strategies of the expected log-loss = H(target | conditioning).
inline double min_expected_logloss(const JointPmf& joint) {
  if (joint.rank() != 2)
    throw ArgumentError("min_expected_logloss: joint must have axes (conditioning, target)");
  return conditional_entropy(joint, 1, {0});
}

inline void to_json(nlohmann::json& j, const SoftStrategy& s) { j = s.table; }
inline void from_json(const nlohmann::json& j, SoftStrategy& s) { s.table = j.get<Kernel>(); }

}  // namespace equivoq
