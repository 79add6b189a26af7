#pragma once

// Finite-alphabet distributions and information functionals. All logarithms are
// base 2, so every returned quantity is in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "equivoq/errors.hpp"
#include "json.hpp"

namespace equivoq {

// Inputs whose total mass is off by at most this much are renormalized.
inline constexpr double kMassRenormTolerance = 1e-9;

namespace detail {

inline double checked_mass(std::span<const double> probs, std::string_view what) {
  if (probs.empty()) throw ArgumentError(std::string(what) + ": empty support");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0)
      throw ArgumentError(std::string(what) + ": entries must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > kMassRenormTolerance)
    throw ArgumentError(std::string(what) + ": total mass " + std::to_string(total) +
                        " deviates from 1");
  return total;
}

inline void renormalize(std::vector<double>& probs, std::string_view what) {
  const double total = checked_mass(probs, what);
  // Sums already within rounding of 1 are kept verbatim so serialized values
  // re-parse bit-exactly.
  if (std::abs(total - 1.0) > 1e-14)
    for (double& p : probs) p /= total;
}

// -p log2 p with 0 log 0 = 0.
inline double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace detail

/// Probability mass function over {0, ..., size()-1}.
class Pmf {
 public:
  Pmf() = default;
  explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    detail::renormalize(probs_, "Pmf");
  }
  Pmf(std::initializer_list<double> probs) : Pmf(std::vector<double>(probs)) {}

  static Pmf uniform(std::size_t n) {
    if (n == 0) throw ArgumentError("Pmf::uniform: empty alphabet");
    return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }
  static Pmf point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw ArgumentError("Pmf::point_mass: index out of range");
    std::vector<double> v(n, 0.0);
    v[at] = 1.0;
    return Pmf(std::move(v));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  bool empty() const noexcept { return probs_.empty(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& vec() const noexcept { return probs_; }

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
};

inline double entropy(const Pmf& p) {
  double h = 0.0;
  for (double v : p.probs()) h += detail::plogp(v);
  return std::max(0.0, h);
}

// D(p || q) in bits. Mass of p where q vanishes is an error.
inline double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw ArgumentError("kl_divergence: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw ArgumentError("kl_divergence: p has mass where q vanishes");
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(0.0, d);
}

/// Dense joint law over a product of finite alphabets, stored row-major
/// (last axis fastest).
class JointPmf {
 public:
  JointPmf() = default;
  JointPmf(std::vector<std::size_t> dims, std::vector<double> probs,
           std::vector<std::string> labels = {})
      : dims_(std::move(dims)), probs_(std::move(probs)), labels_(std::move(labels)) {
    if (dims_.empty()) throw ArgumentError("JointPmf: needs at least one axis");
    std::size_t total = 1;
    for (std::size_t d : dims_) {
      if (d == 0) throw ArgumentError("JointPmf: zero-sized axis");
      total *= d;
    }
    if (total != probs_.size()) throw ArgumentError("JointPmf: dims do not match entry count");
    if (labels_.empty()) {
      for (std::size_t a = 0; a < dims_.size(); ++a) labels_.push_back("a" + std::to_string(a));
    } else if (labels_.size() != dims_.size()) {
      throw ArgumentError("JointPmf: one label per axis required");
    }
    detail::renormalize(probs_, "JointPmf");
  }

  // Two-axis joint from a matrix; rows index axis 0.
  static JointPmf from_matrix(const std::vector<std::vector<double>>& rows,
                              std::vector<std::string> labels = {}) {
    if (rows.empty() || rows.front().empty()) throw ArgumentError("JointPmf: empty matrix");
    const std::size_t cols = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (const auto& r : rows) {
      if (r.size() != cols) throw ArgumentError("JointPmf: ragged matrix");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return JointPmf({rows.size(), cols}, std::move(flat), std::move(labels));
  }

  static JointPmf product(const Pmf& a, const Pmf& b, std::vector<std::string> labels = {}) {
    std::vector<double> flat;
    flat.reserve(a.size() * b.size());
    for (double pa : a.probs())
      for (double pb : b.probs()) flat.push_back(pa * pb);
    return JointPmf({a.size(), b.size()}, std::move(flat), std::move(labels));
  }

  std::size_t rank() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::span<const double> probs() const noexcept { return probs_; }

  std::size_t axis(std::string_view label) const {
    for (std::size_t a = 0; a < labels_.size(); ++a)
      if (labels_[a] == label) return a;
    throw ArgumentError("JointPmf: no axis labelled '" + std::string(label) + "'");
  }

  double at(std::span<const std::size_t> idx) const { return probs_[flat_index(idx)]; }
  double at(std::initializer_list<std::size_t> idx) const {
    return at(std::span<const std::size_t>(idx.begin(), idx.size()));
  }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != dims_.size()) throw ArgumentError("JointPmf: index rank mismatch");
    std::size_t f = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      if (idx[a] >= dims_[a]) throw ArgumentError("JointPmf: index out of range");
      f = f * dims_[a] + idx[a];
    }
    return f;
  }

  // Keeps the listed axes, in the listed order, summing out the rest.
  JointPmf marginal(const std::vector<std::size_t>& keep) const {
    if (keep.empty()) throw ArgumentError("marginalize: empty keep set");
    check_axes(keep, "marginalize");
    std::vector<std::size_t> out_dims;
    std::vector<std::string> out_labels;
    for (std::size_t a : keep) {
      out_dims.push_back(dims_[a]);
      out_labels.push_back(labels_[a]);
    }
    std::vector<double> out(std::accumulate(out_dims.begin(), out_dims.end(), std::size_t{1},
                                            std::multiplies<>()),
                            0.0);
    std::vector<std::size_t> idx(dims_.size(), 0);
    for (std::size_t f = 0; f < probs_.size(); ++f) {
      std::size_t o = 0;
      for (std::size_t k = 0; k < keep.size(); ++k) o = o * dims_[keep[k]] + idx[keep[k]];
      out[o] += probs_[f];
      for (std::size_t a = dims_.size(); a-- > 0;) {
        if (++idx[a] < dims_[a]) break;
        idx[a] = 0;
      }
    }
    return JointPmf(std::move(out_dims), std::move(out), std::move(out_labels));
  }

  Pmf to_pmf() const {
    if (rank() != 1) throw ArgumentError("JointPmf::to_pmf: rank must be 1");
    return Pmf(probs_);
  }

  void check_axes(const std::vector<std::size_t>& axes, std::string_view what) const {
    for (std::size_t i = 0; i < axes.size(); ++i) {
      if (axes[i] >= dims_.size())
        throw ArgumentError(std::string(what) + ": axis " + std::to_string(axes[i]) +
                            " out of range");
      for (std::size_t j = 0; j < i; ++j)
        if (axes[i] == axes[j]) throw ArgumentError(std::string(what) + ": repeated axis");
    }
  }

  friend bool operator==(const JointPmf&, const JointPmf&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> probs_;
  std::vector<std::string> labels_;
};

inline JointPmf marginalize(const JointPmf& j, const std::vector<std::size_t>& keep) {
  return j.marginal(keep);
}

inline Pmf marginal_pmf(const JointPmf& j, std::size_t axis) {
  return j.marginal({axis}).to_pmf();
}

inline double entropy(const JointPmf& j) {
  double h = 0.0;
  for (double v : j.probs()) h += detail::plogp(v);
  return std::max(0.0, h);
}

// Joint entropy of a subset of axes; the empty subset has entropy 0.
inline double entropy(const JointPmf& j, const std::vector<std::size_t>& axes) {
  if (axes.empty()) return 0.0;
  return entropy(j.marginal(axes));
}

/// H(target | given) = H(target, given) - H(given).
inline double conditional_entropy(const JointPmf& j, const std::vector<std::size_t>& target,
                                  const std::vector<std::size_t>& given) {
  if (target.empty()) throw ArgumentError("conditional_entropy: empty target");
  std::vector<std::size_t> both = target;
  both.insert(both.end(), given.begin(), given.end());
  j.check_axes(both, "conditional_entropy");
  return std::max(0.0, entropy(j, both) - entropy(j, given));
}

inline double conditional_entropy(const JointPmf& j, std::size_t target,
                                  const std::vector<std::size_t>& given) {
  return conditional_entropy(j, std::vector<std::size_t>{target}, given);
}

/// I(A; B) = H(A) + H(B) - H(A, B), clamped at 0.
inline double mutual_information(const JointPmf& j, const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b) {
  if (a.empty() || b.empty()) throw ArgumentError("mutual_information: empty axis set");
  std::vector<std::size_t> both = a;
  both.insert(both.end(), b.begin(), b.end());
  j.check_axes(both, "mutual_information");
  return std::max(0.0, entropy(j, a) + entropy(j, b) - entropy(j, both));
}

/// Row-stochastic matrix: one Pmf per conditioning symbol.
class Kernel {
 public:
  Kernel() = default;
  explicit Kernel(std::vector<Pmf> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw ArgumentError("Kernel: no rows");
    for (const auto& r : rows_)
      if (r.size() != rows_.front().size()) throw ArgumentError("Kernel: ragged rows");
  }
  explicit Kernel(const std::vector<std::vector<double>>& rows) : Kernel(to_pmfs(rows)) {}

  static Kernel identity(std::size_t n) {
    std::vector<Pmf> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(Pmf::point_mass(n, i));
    return Kernel(std::move(rows));
  }
  static Kernel constant(std::size_t inputs, const Pmf& row) {
    return Kernel(std::vector<Pmf>(inputs, row));
  }

  std::size_t inputs() const noexcept { return rows_.size(); }
  std::size_t outputs() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
  const Pmf& row(std::size_t i) const { return rows_.at(i); }
  const std::vector<Pmf>& rows() const noexcept { return rows_; }
  double operator()(std::size_t in, std::size_t out) const { return rows_[in][out]; }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  static std::vector<Pmf> to_pmfs(const std::vector<std::vector<double>>& rows) {
    std::vector<Pmf> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.emplace_back(r);
    return out;
  }

  std::vector<Pmf> rows_;
};

/// Joint over (X, U, Y) = p_u(u) k_xu(x|u) k_yu(y|u). X and Y are conditionally
/// independent given U by construction.
inline JointPmf compose(const Pmf& p_u, const Kernel& k_xu, const Kernel& k_yu) {
  if (k_xu.inputs() != p_u.size() || k_yu.inputs() != p_u.size())
    throw ArgumentError("compose: kernel row counts must equal |U|");
  const std::size_t nx = k_xu.outputs(), nu = p_u.size(), ny = k_yu.outputs();
  std::vector<double> flat(nx * nu * ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t y = 0; y < ny; ++y)
        flat[(x * nu + u) * ny + y] = p_u[u] * k_xu(u, x) * k_yu(u, y);
  return JointPmf({nx, nu, ny}, std::move(flat), {"X", "U", "Y"});
}

// JSON: a Pmf is a flat array, a Kernel an array of rows, a JointPmf nested
// arrays in row-major order (outermost nesting is axis 0).

inline void to_json(nlohmann::json& j, const Pmf& p) { j = p.vec(); }
inline void from_json(const nlohmann::json& j, Pmf& p) {
  if (!j.is_array()) throw ArgumentError("Pmf JSON must be an array of numbers");
  p = Pmf(j.get<std::vector<double>>());
}

inline void to_json(nlohmann::json& j, const Kernel& k) {
  j = nlohmann::json::array();
  for (const auto& r : k.rows()) j.push_back(r);
}
inline void from_json(const nlohmann::json& j, Kernel& k) {
  if (!j.is_array()) throw ArgumentError("Kernel JSON must be an array of rows");
  k = Kernel(j.get<std::vector<std::vector<double>>>());
}

namespace detail {

inline nlohmann::json nest(const JointPmf& jp, std::size_t axis, std::size_t& cursor) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < jp.dims()[axis]; ++i) {
    if (axis + 1 == jp.rank())
      arr.push_back(jp.probs()[cursor++]);
    else
      arr.push_back(nest(jp, axis + 1, cursor));
  }
  return arr;
}

inline void flatten(const nlohmann::json& j, std::size_t depth, std::vector<std::size_t>& dims,
                    std::vector<double>& flat) {
  if (!j.is_array() || j.empty()) throw ArgumentError("JointPmf JSON: expected nonempty array");
  if (dims.size() <= depth) dims.push_back(j.size());
  if (dims[depth] != j.size()) throw ArgumentError("JointPmf JSON: ragged nesting");
  for (const auto& e : j) {
    if (e.is_number()) {
      if (dims.size() != depth + 1) throw ArgumentError("JointPmf JSON: ragged nesting");
      flat.push_back(e.get<double>());
    } else {
      flatten(e, depth + 1, dims, flat);
    }
  }
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const JointPmf& jp) {
  std::size_t cursor = 0;
  j = detail::nest(jp, 0, cursor);
}
inline void from_json(const nlohmann::json& j, JointPmf& jp) {
  std::vector<std::size_t> dims;
  std::vector<double> flat;
  detail::flatten(j, 0, dims, flat);
  jp = JointPmf(std::move(dims), std::move(flat));
}

}  // namespace equivoq
