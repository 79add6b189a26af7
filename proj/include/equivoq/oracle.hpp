#pragma once

// Brute-force operational values for tiny blocklengths. A cipher system is a
// deterministic encoder (source block, key) -> message and decoder
// (message, key) -> reconstruction block, with the key uniform and independent
// of the i.i.d. source. The eavesdropper sees the message and, at step i, the
// past source symbols, the past reconstructions, or both.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "equivoq/characterization.hpp"
#include "equivoq/errors.hpp"
#include "equivoq/logloss.hpp"
#include "equivoq/parallel.hpp"
#include "equivoq/prob.hpp"
#include "equivoq/secrecy.hpp"
#include "json.hpp"

namespace equivoq {

enum class DisclosureMode { past_source, past_reconstruction, past_both };

inline std::string_view to_string(DisclosureMode m) {
  switch (m) {
    case DisclosureMode::past_source: return "past-source";
    case DisclosureMode::past_reconstruction: return "past-reconstruction";
    case DisclosureMode::past_both: return "past-both";
  }
  return "?";
}

inline DisclosureMode parse_mode(std::string_view s) {
  if (s == "past-source") return DisclosureMode::past_source;
  if (s == "past-reconstruction") return DisclosureMode::past_reconstruction;
  if (s == "past-both") return DisclosureMode::past_both;
  throw ArgumentError("unknown disclosure mode '" + std::string(s) + "'");
}

// The pairings for which log-loss reduces to a block equivocation.
inline DisclosureMode matched_mode(LogLossVariant v) {
  switch (v) {
    case LogLossVariant::source: return DisclosureMode::past_source;
    case LogLossVariant::reconstruction: return DisclosureMode::past_reconstruction;
    case LogLossVariant::joint: return DisclosureMode::past_both;
  }
  return DisclosureMode::past_both;
}

inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) r *= base;
  return r;
}

/// Blocks are indexed base |alphabet| with the first symbol most significant.
struct BlockCode {
  std::size_t n = 1;
  std::size_t source_alphabet = 2;
  std::size_t recon_alphabet = 2;
  std::size_t key_size = 1;
  std::size_t message_size = 1;
  std::vector<std::uint32_t> encoder;  // [xblock * key_size + k] -> m
  std::vector<std::uint32_t> decoder;  // [m * key_size + k] -> yblock

  std::size_t source_blocks() const { return ipow(source_alphabet, n); }
  std::size_t recon_blocks() const { return ipow(recon_alphabet, n); }
  double rate() const { return std::log2(static_cast<double>(message_size)) / n; }
  double key_rate() const { return std::log2(static_cast<double>(key_size)) / n; }

  std::uint32_t encode(std::size_t xblock, std::size_t k) const {
    return encoder[xblock * key_size + k];
  }
  std::uint32_t decode(std::size_t m, std::size_t k) const { return decoder[m * key_size + k]; }

  void validate() const {
    if (n == 0 || source_alphabet == 0 || recon_alphabet == 0 || key_size == 0 ||
        message_size == 0)
      throw ArgumentError("BlockCode: sizes must be positive");
    if (encoder.size() != source_blocks() * key_size)
      throw ArgumentError("BlockCode: encoder table must cover every (block, key) pair");
    if (decoder.size() != message_size * key_size)
      throw ArgumentError("BlockCode: decoder table must cover every (message, key) pair");
    for (auto m : encoder)
      if (m >= message_size) throw ArgumentError("BlockCode: encoder output out of range");
    for (auto y : decoder)
      if (y >= recon_blocks()) throw ArgumentError("BlockCode: decoder output out of range");
  }

  friend bool operator==(const BlockCode&, const BlockCode&) = default;
};

inline void to_json(nlohmann::json& j, const BlockCode& c) {
  j = nlohmann::json{{"n", c.n},
                     {"source_alphabet", c.source_alphabet},
                     {"recon_alphabet", c.recon_alphabet},
                     {"key_size", c.key_size},
                     {"message_size", c.message_size},
                     {"encoder", c.encoder},
                     {"decoder", c.decoder}};
}
inline void from_json(const nlohmann::json& j, BlockCode& c) {
  c.n = j.at("n").get<std::size_t>();
  c.source_alphabet = j.at("source_alphabet").get<std::size_t>();
  c.recon_alphabet = j.at("recon_alphabet").get<std::size_t>();
  c.key_size = j.at("key_size").get<std::size_t>();
  c.message_size = j.at("message_size").get<std::size_t>();
  c.encoder = j.at("encoder").get<std::vector<std::uint32_t>>();
  c.decoder = j.at("decoder").get<std::vector<std::uint32_t>>();
  c.validate();
}

namespace detail {

inline void check_code(const BlockCode& code, const Pmf& source) {
  code.validate();
  if (code.source_alphabet != source.size())
    throw ArgumentError("BlockCode: source alphabet " + std::to_string(code.source_alphabet) +
                        " does not match the source pmf size " + std::to_string(source.size()));
}

inline std::size_t symbol_at(std::size_t block, std::size_t alphabet, std::size_t n,
                             std::size_t i) {
  return (block / ipow(alphabet, n - 1 - i)) % alphabet;
}

inline double block_probability(const Pmf& source, std::size_t block, std::size_t n) {
  double p = 1.0;
  for (std::size_t i = 0; i < n; ++i) p *= source[symbol_at(block, source.size(), n, i)];
  return p;
}

// P(history, x_i, y_i) at step i. The history is the message plus whatever the
// mode discloses of the first i symbols.
struct StepTable {
  std::size_t histories = 0;
  std::vector<double> mass;  // [(h * nx + x) * ny + y]
};

inline StepTable step_table(const BlockCode& code, const Pmf& source, DisclosureMode mode,
                            std::size_t i) {
  const std::size_t nx = code.source_alphabet, ny = code.recon_alphabet, n = code.n;
  const bool show_x = mode != DisclosureMode::past_reconstruction;
  const bool show_y = mode != DisclosureMode::past_source;
  const std::size_t xpre = show_x ? ipow(nx, i) : 1, ypre = show_y ? ipow(ny, i) : 1;
  StepTable t;
  t.histories = code.message_size * xpre * ypre;
  t.mass.assign(t.histories * nx * ny, 0.0);
  const double pk = 1.0 / static_cast<double>(code.key_size);
  for (std::size_t xb = 0; xb < code.source_blocks(); ++xb) {
    const double px = block_probability(source, xb, n);
    if (px <= 0.0) continue;
    for (std::size_t k = 0; k < code.key_size; ++k) {
      const std::size_t m = code.encode(xb, k);
      const std::size_t yb = code.decode(m, k);
      const std::size_t hx = show_x ? xb / ipow(nx, n - i) : 0;
      const std::size_t hy = show_y ? yb / ipow(ny, n - i) : 0;
      const std::size_t h = (m * xpre + hx) * ypre + hy;
      const std::size_t x = symbol_at(xb, nx, n, i), y = symbol_at(yb, ny, n, i);
      t.mass[(h * nx + x) * ny + y] += px * pk;
    }
  }
  return t;
}

}  // namespace detail

/// Exact joint law over (X^n, K, M, Y^n), blocks flattened to one axis each.
inline JointPmf induced_joint(const BlockCode& code, const Pmf& source) {
  detail::check_code(code, source);
  const std::size_t nxb = code.source_blocks(), nyb = code.recon_blocks();
  const std::size_t K = code.key_size, M = code.message_size;
  std::vector<double> flat(nxb * K * M * nyb, 0.0);
  for (std::size_t xb = 0; xb < nxb; ++xb) {
    const double px = detail::block_probability(source, xb, code.n);
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t m = code.encode(xb, k), yb = code.decode(m, k);
      flat[((xb * K + k) * M + m) * nyb + yb] += px / static_cast<double>(K);
    }
  }
  return JointPmf({nxb, K, M, nyb}, std::move(flat), {"Xn", "K", "M", "Yn"});
}

/// Both evaluations of the eavesdropper's optimal log-loss per symbol.
struct LogLossRoutes {
  double explicit_strategy = 0.0;     // per-history posteriors, step by step
  std::optional<double> closed_form;  // (1/n) H(target^n | M); matched pairings only
};

inline LogLossRoutes logloss_routes(const BlockCode& code, const Pmf& source,
                                    DisclosureMode mode, LogLossVariant variant) {
  detail::check_code(code, source);
  const std::size_t nx = code.source_alphabet, ny = code.recon_alphabet;
  const LogLossPayoff payoff(variant, nx, ny);
  const std::size_t nt = payoff.support_size();
  LogLossRoutes routes;
  double total = 0.0;
  for (std::size_t i = 0; i < code.n; ++i) {
    const auto t = detail::step_table(code, source, mode, i);
    std::vector<double> ht(t.histories * nt, 0.0);
    for (std::size_t h = 0; h < t.histories; ++h)
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
          ht[h * nt + payoff.target(x, y)] += t.mass[(h * nx + x) * ny + y];
    const JointPmf joint({t.histories, nt}, std::move(ht), {"history", "target"});
    const SoftStrategy z = posterior_strategy(joint);
    for (std::size_t h = 0; h < t.histories; ++h)
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
          const double p = t.mass[(h * nx + x) * ny + y];
          if (p > 0.0) total += p * evaluate_payoff(payoff, x, y, z.table.row(h));
        }
  }
  routes.explicit_strategy = total / static_cast<double>(code.n);

  if (mode == matched_mode(variant)) {
    const JointPmf j = induced_joint(code, source);
    std::vector<std::size_t> target;
    if (variant != LogLossVariant::reconstruction) target.push_back(0);
    if (variant != LogLossVariant::source) target.push_back(3);
    routes.closed_form = conditional_entropy(j, target, {2}) / static_cast<double>(code.n);
  }
  return routes;
}

inline constexpr double kDerivationChainTol = 1e-10;

/// Minimum over causal soft strategies of the average log-loss, bits per symbol.
/// For the matched pairings this equals (1/n) H(X^n|M), (1/n) H(Y^n|M) or
/// (1/n) H(X^n,Y^n|M), and the two routes are checked against each other.
inline double eavesdropper_value_logloss(const BlockCode& code, const Pmf& source,
                                         DisclosureMode mode, LogLossVariant variant) {
  const auto r = logloss_routes(code, source, mode, variant);
  if (r.closed_form && std::abs(*r.closed_form - r.explicit_strategy) > kDerivationChainTol)
    throw std::logic_error("log-loss best response disagrees with the block equivocation: " +
                           std::to_string(r.explicit_strategy) + " vs " +
                           std::to_string(*r.closed_form));
  return r.closed_form.value_or(r.explicit_strategy);
}

/// Payoff pi(x, y, z) over a finite eavesdropper action set.
struct PayoffTensor {
  std::size_t source_alphabet = 0, recon_alphabet = 0, actions = 0;
  std::vector<double> values;  // [(x * ny + y) * actions + z]

  double operator()(std::size_t x, std::size_t y, std::size_t z) const {
    return values[(x * recon_alphabet + y) * actions + z];
  }

  // pi(x, y, z) = f(x, y, z) for every triple.
  template <typename F>
  static PayoffTensor from(std::size_t nx, std::size_t ny, std::size_t nz, F f) {
    PayoffTensor p{nx, ny, nz, std::vector<double>(nx * ny * nz)};
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t z = 0; z < nz; ++z) p.values[(x * ny + y) * nz + z] = f(x, y, z);
    return p;
  }
};

/// Exact best response for a general payoff: each step and reachable history
/// picks the action minimizing the conditional expected payoff. Actions never
/// influence later disclosures, so per-step minimization is globally optimal.
inline double eavesdropper_value_general(const BlockCode& code, const Pmf& source,
                                         DisclosureMode mode, const PayoffTensor& payoff) {
  detail::check_code(code, source);
  const std::size_t nx = code.source_alphabet, ny = code.recon_alphabet;
  if (payoff.source_alphabet != nx || payoff.recon_alphabet != ny || payoff.actions == 0 ||
      payoff.values.size() != nx * ny * payoff.actions)
    throw ArgumentError("eavesdropper_value_general: payoff shape does not match the code");
  for (double v : payoff.values)
    if (!std::isfinite(v)) throw ArgumentError("eavesdropper_value_general: payoff must be finite");
  double total = 0.0;
  for (std::size_t i = 0; i < code.n; ++i) {
    const auto t = detail::step_table(code, source, mode, i);
    for (std::size_t h = 0; h < t.histories; ++h) {
      double best = std::numeric_limits<double>::infinity();
      bool reachable = false;
      for (std::size_t z = 0; z < payoff.actions; ++z) {
        double c = 0.0;
        for (std::size_t x = 0; x < nx; ++x)
          for (std::size_t y = 0; y < ny; ++y) {
            const double p = t.mass[(h * nx + x) * ny + y];
            if (p > 0.0) {
              c += p * payoff(x, y, z);
              reachable = true;
            }
          }
        best = std::min(best, c);
      }
      if (reachable) total += best;
    }
  }
  return total / static_cast<double>(code.n);
}

/// (1/n) E sum_i d(X_i, Y_i).
inline double intended_distortion(const BlockCode& code, const Pmf& source,
                                  const DistortionSpec& d) {
  detail::check_code(code, source);
  if (d.source_size() != code.source_alphabet || d.recon_size() != code.recon_alphabet)
    throw ArgumentError("intended_distortion: distortion matrix does not match the code");
  double total = 0.0;
  const double pk = 1.0 / static_cast<double>(code.key_size);
  for (std::size_t xb = 0; xb < code.source_blocks(); ++xb) {
    const double px = detail::block_probability(source, xb, code.n);
    if (px <= 0.0) continue;
    for (std::size_t k = 0; k < code.key_size; ++k) {
      const std::size_t yb = code.decode(code.encode(xb, k), k);
      double dd = 0.0;
      for (std::size_t i = 0; i < code.n; ++i)
        dd += d(detail::symbol_at(xb, code.source_alphabet, code.n, i),
                detail::symbol_at(yb, code.recon_alphabet, code.n, i));
      total += px * pk * dd;
    }
  }
  return total / static_cast<double>(code.n);
}

inline constexpr double kCodeBudget = 1e8;

/// Every deterministic (encoder, decoder) pair for fixed sizes, addressable by
/// index. The encoder table varies fastest; table entry 0 is the least
/// significant digit.
class CodeSpace {
 public:
  CodeSpace(std::size_t n, std::size_t nx, std::size_t ny, std::size_t messages, std::size_t keys)
      : n_(n), nx_(nx), ny_(ny), m_(messages), k_(keys) {
    if (n == 0 || nx == 0 || ny == 0 || messages == 0 || keys == 0)
      throw ArgumentError("enumerate_codes: sizes must be positive");
    enc_entries_ = ipow(nx, n) * keys;
    dec_entries_ = messages * keys;
    const double count = std::pow(static_cast<double>(messages), static_cast<double>(enc_entries_)) *
                         std::pow(static_cast<double>(ipow(ny, n)), static_cast<double>(dec_entries_));
    if (!(count <= kCodeBudget))
      throw ResourceError("enumerate_codes: " + format_count(count) +
                              " codes exceed the budget of 1e8",
                          count);
    enc_count_ = static_cast<std::uint64_t>(
        std::llround(std::pow(static_cast<double>(messages), static_cast<double>(enc_entries_))));
    count_ = static_cast<std::uint64_t>(std::llround(count));
  }

  std::uint64_t size() const noexcept { return count_; }

  BlockCode at(std::uint64_t index) const {
    BlockCode c;
    c.n = n_;
    c.source_alphabet = nx_;
    c.recon_alphabet = ny_;
    c.key_size = k_;
    c.message_size = m_;
    c.encoder.resize(enc_entries_);
    c.decoder.resize(dec_entries_);
    std::uint64_t e = index % enc_count_, d = index / enc_count_;
    for (auto& v : c.encoder) {
      v = static_cast<std::uint32_t>(e % m_);
      e /= m_;
    }
    const std::uint64_t nyb = ipow(ny_, n_);
    for (auto& v : c.decoder) {
      v = static_cast<std::uint32_t>(d % nyb);
      d /= nyb;
    }
    return c;
  }

  template <typename Fn>
  void for_each(Fn fn) const {
    for (std::uint64_t i = 0; i < count_; ++i) fn(i, at(i));
  }

 private:
  static std::string format_count(double c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", c);
    return buf;
  }

  std::size_t n_, nx_, ny_, m_, k_;
  std::size_t enc_entries_ = 0, dec_entries_ = 0;
  std::uint64_t enc_count_ = 0, count_ = 0;
};

/// Throws ResourceError naming the count when it exceeds 1e8.
inline CodeSpace enumerate_codes(std::size_t n, std::size_t source_alphabet,
                                 std::size_t recon_alphabet, std::size_t messages,
                                 std::size_t keys) {
  return CodeSpace(n, source_alphabet, recon_alphabet, messages, keys);
}

/// max(1, floor(2^(n * rate))), tolerant of rates that land a hair under an
/// integer exponent.
inline std::size_t alphabet_for_rate(std::size_t n, double rate) {
  const double v = std::floor(std::exp2(static_cast<double>(n) * rate) + 1e-9);
  if (!(v < 4294967296.0)) throw ResourceError("rate gives an alphabet beyond 2^32", v);
  return std::max<std::size_t>(1, static_cast<std::size_t>(v));
}

struct OracleReport {
  std::size_t n = 1;
  DisclosureMode mode = DisclosureMode::past_source;
  LogLossVariant variant = LogLossVariant::source;
  std::uint64_t codes_enumerated = 0;
  std::uint64_t codes_meeting_distortion = 0;
  BlockCode best_code;
  double operational_value = 0.0;
  double intended_distortion = 0.0;
  double characterization_value = 0.0;
  double gap = 0.0;  // characterization - operational

  friend bool operator==(const OracleReport&, const OracleReport&) = default;
};

inline void to_json(nlohmann::json& j, const OracleReport& r) {
  j = nlohmann::json{{"n", r.n},
                     {"mode", std::string(to_string(r.mode))},
                     {"variant", std::string(to_string(r.variant))},
                     {"codes_enumerated", r.codes_enumerated},
                     {"codes_meeting_distortion", r.codes_meeting_distortion},
                     {"best_code", r.best_code},
                     {"operational_value", r.operational_value},
                     {"intended_distortion", r.intended_distortion},
                     {"characterization_value", r.characterization_value},
                     {"gap", r.gap}};
}
inline void from_json(const nlohmann::json& j, OracleReport& r) {
  r.n = j.at("n").get<std::size_t>();
  r.mode = parse_mode(j.at("mode").get<std::string>());
  r.variant = parse_variant(j.at("variant").get<std::string>());
  r.codes_enumerated = j.at("codes_enumerated").get<std::uint64_t>();
  r.codes_meeting_distortion = j.at("codes_meeting_distortion").get<std::uint64_t>();
  r.best_code = j.at("best_code").get<BlockCode>();
  r.operational_value = j.at("operational_value").get<double>();
  r.intended_distortion = j.at("intended_distortion").get<double>();
  r.characterization_value = j.at("characterization_value").get<double>();
  r.gap = j.at("gap").get<double>();
}

/// Characterization matching a log-loss variant.
inline double characterization_value(const SecrecyConfig& cfg, LogLossVariant variant,
                                     const SearchOptions& opts = {}) {
  switch (variant) {
    case LogLossVariant::source: return source_equivocation(cfg).value;
    case LogLossVariant::reconstruction: return reconstruction_equivocation(cfg, opts).value;
    case LogLossVariant::joint: return joint_equivocation(cfg, opts).value;
  }
  return 0.0;
}

/// Best operational value over every code at blocklength n, with message and key
/// alphabets floor(2^(nR)) and floor(2^(nR0)), next to the matching
/// characterization. Only the matched variant/mode pairings have one.
inline OracleReport operational_value(std::size_t n, const SecrecyConfig& cfg,
                                      DisclosureMode mode, LogLossVariant variant,
                                      bool distortion_filter = true,
                                      const SearchOptions& opts = {}) {
  cfg.validate();
  if (mode != matched_mode(variant))
    throw ArgumentError("operational_value: variant " + std::string(to_string(variant)) +
                        " pairs with mode " + std::string(to_string(matched_mode(variant))));
  const std::size_t messages = alphabet_for_rate(n, cfg.rate);
  const std::size_t keys = alphabet_for_rate(n, cfg.key_rate);
  const CodeSpace space = enumerate_codes(n, cfg.source_size(), cfg.recon_size(), messages, keys);

  struct Best {
    bool found = false;
    std::uint64_t index = 0, feasible = 0;
    double value = 0.0, distortion = 0.0;
  };
  const std::uint64_t total = space.size();
  const std::size_t chunks = std::min<std::uint64_t>(total, 64 * thread_budget());
  const auto partial = parallel_map(chunks, [&](std::size_t c) {
    Best b;
    const std::uint64_t lo = total * c / chunks, hi = total * (c + 1) / chunks;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const BlockCode code = space.at(i);
      const double dist = intended_distortion(code, cfg.source, cfg.distortion);
      if (distortion_filter && dist > cfg.distortion.limit() + 1e-12) continue;
      ++b.feasible;
      const double v = eavesdropper_value_logloss(code, cfg.source, mode, variant);
      if (!b.found || v > b.value) b = Best{true, i, b.feasible, v, dist};
    }
    return b;
  });

  OracleReport r;
  r.n = n;
  r.mode = mode;
  r.variant = variant;
  r.codes_enumerated = total;
  Best best;
  for (const auto& b : partial) {
    r.codes_meeting_distortion += b.feasible;
    if (b.found && (!best.found || b.value > best.value)) best = b;
  }
  if (!best.found)
    throw InfeasibleError("operational_value: no code at n = " + std::to_string(n) +
                          " meets the distortion limit");
  r.best_code = space.at(best.index);
  r.operational_value = best.value;
  r.intended_distortion = best.distortion;
  r.characterization_value = characterization_value(cfg, variant, opts);
  r.gap = r.characterization_value - r.operational_value;
  return r;
}

}  // namespace equivoq
