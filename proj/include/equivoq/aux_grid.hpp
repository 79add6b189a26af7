#pragma once

// Exhaustive search over auxiliary triples on a simplex grid.
//
// A triple with |U| = k is a multiset of k atoms. Atom u carries the column
// w(u|.) of the test channel X -> U (so the X-marginal is exact) together with
// the row k_yu(.|u). Both are quantized to multiples of the grid step. Atom
// order is irrelevant, so only nondecreasing atom sequences are visited. Every
// entropy term except those of the (X, Y) marginal is additive over atoms and is
// accumulated along the search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "equivoq/errors.hpp"
#include "equivoq/prob.hpp"
#include "equivoq/secrecy.hpp"

namespace equivoq {

inline constexpr double kGridPointBudget = 1e8;

namespace detail {

// Compositions of `total` into `parts` nonnegative parts, lexicographic.
inline std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(parts, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == parts) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      cur[i] = v;
      self(self, i + 1, left - v);
    }
  };
  rec(rec, 0, total);
  return out;
}

class AuxGrid {
 public:
  AuxGrid(const SecrecyConfig& cfg, int divisions, std::size_t aux, AuxObjective objective)
      : cfg_(cfg), m_(divisions), k_(aux), objective_(objective),
        nx_(cfg.source_size()), ny_(cfg.recon_size()) {
    // w-parts: every vector in {0..m}^nx, mixed radix with x = 0 most significant.
    wparts_ = 1;
    for (std::size_t x = 0; x < nx_; ++x) wparts_ *= static_cast<std::size_t>(m_ + 1);
    digits_.resize(wparts_);
    for (std::size_t wi = 0; wi < wparts_; ++wi) {
      std::vector<int> w(nx_);
      std::size_t rest = wi;
      for (std::size_t x = nx_; x-- > 0;) {
        w[x] = static_cast<int>(rest % static_cast<std::size_t>(m_ + 1));
        rest /= static_cast<std::size_t>(m_ + 1);
      }
      digits_[wi] = std::move(w);
    }
    vrows_ = compositions(m_, ny_);
  }

  std::size_t atom_count() const { return wparts_ * vrows_.size(); }

  // Number of canonical atom sequences, by a knapsack count over atoms taken in
  // order with multiplicities. Budget states are indexed like w-parts.
  double count() const {
    const std::size_t states = wparts_;
    std::vector<std::vector<double>> ways(k_ + 1, std::vector<double>(states, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t wi = 0; wi < wparts_; ++wi) {
      const std::size_t copies = wi == 0 ? 1 : vrows_.size();
      for (std::size_t c = 0; c < copies; ++c) {
        // ways_new[j][b] = sum_t ways[j - t][b - t*w]
        for (std::size_t j = k_; j >= 1; --j) {
          for (std::size_t b = 0; b < states; ++b) {
            double add = 0.0;
            std::size_t cur = b;
            for (std::size_t t = 1; t <= j; ++t) {
              if (!sub(cur, wi, cur)) break;
              add += ways[j - t][cur];
            }
            ways[j][b] += add;
          }
        }
      }
    }
    return ways[k_][full_budget()];
  }

  EquivocationResult run() const {
    best_ = -std::numeric_limits<double>::infinity();
    visited_ = 0;
    chosen_.assign(k_, 0);
    best_atoms_.clear();
    px_ = cfg_.source.vec();
    hx_ = entropy(cfg_.source);
    py_.assign(ny_, 0.0);
    dmin_.assign(nx_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x) {
      const auto& row = cfg_.distortion.matrix()[x];
      dmin_[x] = *std::min_element(row.begin(), row.end());
    }
    log_t_ = std::log2(static_cast<double>(objective_ == AuxObjective::reconstruction
                                               ? ny_
                                               : nx_ * ny_));
    precompute();
    stack_.assign(k_, Partial{std::vector<double>(nx_ * ny_, 0.0)});
    search(0, 0, full_budget());

    EquivocationResult r;
    r.diagnostics.grid_points = visited_;
    r.diagnostics.restarts = 1;
    if (best_atoms_.empty())
      throw InfeasibleError("exhaustive_aux_search: no grid point satisfies the constraints");
    r.diagnostics.feasible_restarts = 1;
    r.optimizer = to_triple(best_atoms_);
    r.value = best_;
    r.diagnostics.objective_trace = {best_};
    r.diagnostics.notes.push_back("exhaustive grid, step 1/" + std::to_string(m_) +
                                  ", |U| = " + std::to_string(k_));
    return r;
  }

 private:
  struct Atom {
    std::size_t index;
    std::vector<double> pxy;  // contribution to p(x, y)
    double hu, hxu, huy, hxuy;
    double ed;  // contribution to E d(X, Y)
  };
  struct Partial {
    std::vector<double> pxy;
    double hu = 0, hxu = 0, huy = 0, hxuy = 0;
    double ed = 0;
  };

  const std::vector<int>& wpart(std::size_t wi) const { return digits_[wi]; }
  std::size_t wpart_index(const std::vector<int>& w) const {
    std::size_t wi = 0;
    for (std::size_t x = 0; x < nx_; ++x) wi = wi * static_cast<std::size_t>(m_ + 1) + w[x];
    return wi;
  }
  std::size_t full_budget() const { return wpart_index(std::vector<int>(nx_, m_)); }

  // out = b - w in budget-index space, false if any coordinate goes negative.
  // Digit-wise subtraction without borrow is plain index subtraction.
  bool sub(std::size_t b, std::size_t wi, std::size_t& out) const {
    const auto& bv = digits_[b];
    const auto& w = digits_[wi];
    for (std::size_t x = 0; x < nx_; ++x)
      if (bv[x] < w[x]) return false;
    out = b - wi;
    return true;
  }

  void precompute() const {
    atoms_.clear();
    atoms_.reserve(atom_count());
    const double step = 1.0 / m_;
    for (std::size_t wi = 0; wi < wparts_; ++wi) {
      const auto& w = wpart(wi);
      const bool zero = wi == 0;
      for (std::size_t vi = 0; vi < vrows_.size(); ++vi) {
        Atom a;
        a.index = wi * vrows_.size() + vi;
        a.pxy.assign(nx_ * ny_, 0.0);
        a.hu = a.hxu = a.huy = a.hxuy = a.ed = 0.0;
        if (zero && vi > 0) {
          a.index = std::numeric_limits<std::size_t>::max();  // redundant zero-mass atom
          atoms_.push_back(std::move(a));
          continue;
        }
        double pu = 0.0;
        for (std::size_t x = 0; x < nx_; ++x) {
          const double qxu = px_[x] * w[x] * step;
          pu += qxu;
          a.hxu += plogp(qxu);
          for (std::size_t y = 0; y < ny_; ++y) {
            const double t = qxu * vrows_[vi][y] * step;
            a.pxy[x * ny_ + y] = t;
            a.hxuy += plogp(t);
            a.ed += t * cfg_.distortion(x, y);
          }
        }
        a.hu = plogp(pu);
        for (std::size_t y = 0; y < ny_; ++y) a.huy += plogp(pu * vrows_[vi][y] * step);
        atoms_.push_back(std::move(a));
      }
    }
  }

  static void add(const Partial& p, const Atom& a, Partial& out) {
    for (std::size_t i = 0; i < p.pxy.size(); ++i) out.pxy[i] = p.pxy[i] + a.pxy[i];
    out.hu = p.hu + a.hu;
    out.hxu = p.hxu + a.hxu;
    out.huy = p.huy + a.huy;
    out.hxuy = p.hxuy + a.hxuy;
    out.ed = p.ed + a.ed;
  }

  // Conditional entropy of the objective's target given U, summed over atoms.
  double cond(const Partial& p) const {
    return objective_ == AuxObjective::reconstruction ? p.huy - p.hu : p.hxuy - p.hu;
  }

  // False when no completion of `p` using the remaining budget can be feasible
  // or beat the incumbent. The objective is min(H(T), H(T|U) + R0) and each
  // remaining unit of mass adds at most log|T| to H(T|U).
  bool promising(const Partial& p, std::size_t budget) const {
    const auto& rest = digits_[budget];
    double mass = 0.0, ed = p.ed;
    for (std::size_t x = 0; x < nx_; ++x) {
      const double q = px_[x] * rest[x] / m_;
      mass += q;
      ed += q * dmin_[x];
    }
    if (ed > cfg_.distortion.limit() + kMembershipTol + 1e-12) return false;
    const double bound = std::min(log_t_, cond(p) + mass * log_t_ + cfg_.key_rate);
    return bound + 1e-9 >= best_;
  }

  void search(std::size_t depth, std::size_t min_atom, std::size_t budget) const {
    const Partial& p = stack_[depth];
    if (depth + 1 == k_) {
      // Last atom takes the remaining budget; only its row over Y is free.
      const std::size_t wi = budget;
      for (std::size_t vi = 0; vi < vrows_.size(); ++vi) {
        const std::size_t ai = wi * vrows_.size() + vi;
        if (ai < min_atom) continue;
        const Atom& a = atoms_[ai];
        if (a.index == std::numeric_limits<std::size_t>::max()) continue;
        chosen_[depth] = ai;
        evaluate(p, a);
      }
      return;
    }
    for (std::size_t ai = min_atom; ai < atoms_.size(); ++ai) {
      const Atom& a = atoms_[ai];
      if (a.index == std::numeric_limits<std::size_t>::max()) continue;
      std::size_t rest;
      if (!sub(budget, ai / vrows_.size(), rest)) continue;
      // The forced last atom must not precede this one.
      if ((rest + 1) * vrows_.size() <= ai) continue;
      add(p, a, stack_[depth + 1]);
      if (!promising(stack_[depth + 1], rest)) continue;
      chosen_[depth] = ai;
      search(depth + 1, ai, rest);
    }
  }

  void evaluate(const Partial& p, const Atom& last) const {
    ++visited_;
    double ed = p.ed + last.ed;
    if (ed > cfg_.distortion.limit() + kMembershipTol) return;
    double hxy = 0.0;
    auto& py = py_;
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y) {
        const double v = p.pxy[x * ny_ + y] + last.pxy[x * ny_ + y];
        hxy += plogp(v);
        py[y] += v;
      }
    double hy = 0.0;
    for (double v : py) hy += plogp(v);
    py.assign(ny_, 0.0);
    const double ixy = hx_ + hy - hxy;
    if (ixy > cfg_.rate + kMembershipTol) return;
    const double hu = p.hu + last.hu;
    double value;
    if (objective_ == AuxObjective::reconstruction) {
      const double iyu = hy + hu - (p.huy + last.huy);
      value = hy - std::max(0.0, iyu - cfg_.key_rate);
    } else {
      const double ixyu = hxy + hu - (p.hxuy + last.hxuy);
      value = hxy - std::max(0.0, ixyu - cfg_.key_rate);
    }
    if (value > best_) {
      best_ = value;
      best_atoms_ = chosen_;
    }
  }

  AuxTriple to_triple(const std::vector<std::size_t>& atoms) const {
    const double step = 1.0 / m_;
    std::vector<double> pu(k_, 0.0);
    std::vector<std::vector<double>> kx(k_, std::vector<double>(nx_, 0.0));
    std::vector<Pmf> ky;
    for (std::size_t u = 0; u < k_; ++u) {
      const auto& w = wpart(atoms[u] / vrows_.size());
      const auto& v = vrows_[atoms[u] % vrows_.size()];
      for (std::size_t x = 0; x < nx_; ++x) {
        kx[u][x] = px_[x] * w[x] * step;
        pu[u] += kx[u][x];
      }
      std::vector<double> vy(ny_);
      for (std::size_t y = 0; y < ny_; ++y) vy[y] = v[y] * step;
      ky.emplace_back(std::move(vy));
    }
    std::vector<Pmf> kxu;
    for (std::size_t u = 0; u < k_; ++u) {
      if (pu[u] > 0.0) {
        for (double& v : kx[u]) v /= pu[u];
        kxu.emplace_back(kx[u]);
      } else {
        kxu.push_back(Pmf::uniform(nx_));
      }
    }
    return AuxTriple{Pmf(pu), Kernel(std::move(kxu)), Kernel(std::move(ky))};
  }

  static double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

  const SecrecyConfig& cfg_;
  int m_;
  std::size_t k_;
  AuxObjective objective_;
  std::size_t nx_, ny_;
  std::size_t wparts_ = 0;
  std::vector<std::vector<int>> digits_;  // w-part index -> per-x grid units
  std::vector<std::vector<int>> vrows_;

  mutable std::vector<Atom> atoms_;
  mutable std::vector<Partial> stack_;  // stack_[d]: sum of the first d atoms
  mutable std::vector<double> px_;
  mutable double hx_ = 0.0;
  mutable double log_t_ = 0.0;
  mutable std::vector<double> py_, dmin_;
  mutable double best_ = 0.0;
  mutable std::size_t visited_ = 0;
  mutable std::vector<std::size_t> chosen_, best_atoms_;
};

inline int grid_divisions(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 0.5))
    throw ArgumentError("exhaustive_aux_search: grid_step must lie in (0, 0.5]");
  const double inv = 1.0 / grid_step;
  const double m = std::round(inv);
  if (std::abs(inv - m) > 1e-9 * inv)
    throw ArgumentError("exhaustive_aux_search: grid_step must divide 1");
  return static_cast<int>(m);
}

}  // namespace detail

/// Number of grid points exhaustive_aux_search would visit.
inline double aux_grid_size(const SecrecyConfig& cfg, double grid_step, std::size_t max_aux) {
  cfg.validate();
  if (max_aux == 0) throw ArgumentError("exhaustive_aux_search: max_aux must be >= 1");
  const int m = detail::grid_divisions(grid_step);
  detail::AuxGrid grid(cfg, m, max_aux, AuxObjective::reconstruction);
  // Cheap lower bound first: ordered sequences / k! can only undercount by the
  // zero-atom restriction, and the exact count gets slow for huge grids.
  double rough = 1.0;
  for (std::size_t i = 0; i < max_aux; ++i)
    rough *= static_cast<double>(grid.atom_count()) / static_cast<double>(i + 1);
  rough /= std::pow(static_cast<double>(m + 1), static_cast<double>(cfg.source_size()));
  if (rough > 1e3 * kGridPointBudget) return rough;
  return grid.count();
}

/// Maximizes the chosen objective over all grid triples with |U| = max_aux (which
/// includes every smaller cardinality through zero-mass atoms) lying in the
/// feasible set. Deterministic; the first maximizer in visiting order wins.
inline EquivocationResult exhaustive_aux_search(const SecrecyConfig& cfg, double grid_step,
                                                std::size_t max_aux, AuxObjective objective,
                                                double budget = kGridPointBudget) {
  cfg.validate();
  const double points = aux_grid_size(cfg, grid_step, max_aux);
  if (points > budget)
    throw ResourceError("exhaustive_aux_search: grid has " + std::to_string(points) +
                            " points, budget is " + std::to_string(budget),
                        points);
  if (cfg.distortion.limit() < cfg.distortion.d_min(cfg.source) - kMembershipTol)
    throw InfeasibleError("exhaustive_aux_search: D is below d_min, feasible set is empty");
  detail::AuxGrid grid(cfg, detail::grid_divisions(grid_step), max_aux, objective);
  return grid.run();
}

}  // namespace equivoq
