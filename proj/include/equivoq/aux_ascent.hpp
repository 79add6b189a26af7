#pragma once

// Projected ascent over auxiliary triples with a fixed X-marginal.
//
// A point is a test channel w(u|x) (rows over U) and a decoder kernel v(y|u)
// (rows over Y). The joint is T(x,u,y) = P(x) w(u|x) v(y|u), so X - U - Y holds
// and the X-marginal is exact. Each row is kept on its simplex by Euclidean
// projection. Constraints E d <= D and I(X;Y) <= R carry a log barrier while
// they have slack, and every accepted step must stay feasible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "equivoq/prob.hpp"
#include "equivoq/secrecy.hpp"

namespace equivoq::detail {

struct AscentPoint {
  std::vector<double> w;  // |X| x |U|, row x
  std::vector<double> v;  // |U| x |Y|, row u
};

// Euclidean projection of v onto the probability simplex.
inline void project_to_simplex(std::span<double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  double total = 0.0;
  for (double& x : v) total += (x = std::max(0.0, x - theta));
  for (double& x : v) x /= total;
}

class AuxAscent {
 public:
  struct Eval {
    double objective = 0.0;
    double expected_distortion = 0.0;
    double mutual_information = 0.0;
  };

  // Slack below which a constraint counts as violated during the ascent.
  static constexpr double kStepSlack = 0.0;
  static constexpr double kKinkBand = 1e-6;

  AuxAscent(const SecrecyConfig& cfg, AuxObjective objective, std::size_t aux)
      : cfg_(cfg), objective_(objective), nx_(cfg.source_size()), nu_(aux),
        ny_(cfg.recon_size()), px_(cfg.source.vec()), hx_(entropy(cfg.source)) {}

  std::size_t aux() const noexcept { return nu_; }

  bool feasible(const Eval& e) const {
    return e.expected_distortion <= cfg_.distortion.limit() + kStepSlack &&
           e.mutual_information <= cfg_.rate + kStepSlack;
  }

  // Starting points only need to pass the membership tolerance.
  bool near_feasible(const Eval& e) const {
    return e.expected_distortion <= cfg_.distortion.limit() + kMembershipTol &&
           e.mutual_information <= cfg_.rate + kMembershipTol;
  }

  Eval evaluate(const AscentPoint& pt) const {
    marginals(pt);
    return values();
  }

  // Barrier weights are per constraint; zero disables the term.
  double lagrangian(const Eval& e, double mu_d, double mu_r) const {
    double l = e.objective;
    if (mu_d > 0.0) {
      const double s = cfg_.distortion.limit() - e.expected_distortion;
      if (s <= 0.0) return -std::numeric_limits<double>::infinity();
      l += mu_d * std::log(s);
    }
    if (mu_r > 0.0) {
      const double s = cfg_.rate - e.mutual_information;
      if (s <= 0.0) return -std::numeric_limits<double>::infinity();
      l += mu_r * std::log(s);
    }
    return l;
  }

  // Preconditioned ascent direction of the barrier Lagrangian, written into dir.
  // Within kKinkBand of the hinge kink both branches are active and the
  // direction is the least-norm convex combination of their gradients, which
  // is the steepest ascent direction of the minimum.
  void ascent_direction(const AscentPoint& pt, double mu_d, double mu_r, AscentPoint& dir) const {
    marginals(pt);
    const Eval e = values();
    const double cd = mu_d > 0.0 ? mu_d / (cfg_.distortion.limit() - e.expected_distortion) : 0.0;
    const double cr = mu_r > 0.0 ? mu_r / (cfg_.rate - e.mutual_information) : 0.0;
    const double gap = branch_a_ - branch_b_;
    if (gap > kKinkBand) {
      branch_direction(pt, true, cd, cr, dir);
      return;
    }
    if (gap < -kKinkBand) {
      branch_direction(pt, false, cd, cr, dir);
      return;
    }
    branch_direction(pt, false, cd, cr, dir);
    branch_direction(pt, true, cd, cr, other_);
    double dd = 0.0, db = 0.0;
    auto accumulate = [&](const std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        dd += diff * diff;
        db += diff * b[i];
      }
    };
    accumulate(dir.w, other_.w);
    accumulate(dir.v, other_.v);
    // theta * a + (1 - theta) * b with the least norm.
    const double theta = dd > 0.0 ? std::clamp(-db / dd, 0.0, 1.0) : 0.5;
    for (std::size_t i = 0; i < dir.w.size(); ++i)
      dir.w[i] = theta * dir.w[i] + (1 - theta) * other_.w[i];
    for (std::size_t i = 0; i < dir.v.size(); ++i)
      dir.v[i] = theta * dir.v[i] + (1 - theta) * other_.v[i];
  }

  AscentPoint step(const AscentPoint& pt, const AscentPoint& dir, double size) const {
    AscentPoint out = pt;
    for (std::size_t i = 0; i < out.w.size(); ++i) out.w[i] += size * dir.w[i];
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += size * dir.v[i];
    normalize(out);
    return out;
  }

  void normalize(AscentPoint& pt) const {
    for (std::size_t x = 0; x < nx_; ++x)
      project_to_simplex(std::span<double>(pt.w.data() + x * nu_, nu_));
    for (std::size_t u = 0; u < nu_; ++u)
      project_to_simplex(std::span<double>(pt.v.data() + u * ny_, ny_));
  }

  AscentPoint random_point(std::mt19937_64& rng, double concentration) const {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    AscentPoint pt;
    pt.w.resize(nx_ * nu_);
    pt.v.resize(nu_ * ny_);
    for (double& a : pt.w) a = gamma(rng) + 1e-300;
    for (double& a : pt.v) a = gamma(rng) + 1e-300;
    for (std::size_t x = 0; x < nx_; ++x) normalize_row(pt.w.data() + x * nu_, nu_);
    for (std::size_t u = 0; u < nu_; ++u) normalize_row(pt.v.data() + u * ny_, ny_);
    return pt;
  }

  static AscentPoint mix(const AscentPoint& a, const AscentPoint& b, double lambda) {
    AscentPoint out = a;
    for (std::size_t i = 0; i < out.w.size(); ++i) out.w[i] = (1 - lambda) * a.w[i] + lambda * b.w[i];
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = (1 - lambda) * a.v[i] + lambda * b.v[i];
    return out;
  }

  // Embeds a triple with |U| <= aux(); extra symbols get zero mass.
  bool embed(const AuxTriple& t, AscentPoint& pt) const {
    const std::size_t k = t.aux_cardinality();
    if (k > nu_ || t.k_xu.outputs() != nx_ || t.k_yu.outputs() != ny_) return false;
    pt.w.assign(nx_ * nu_, 0.0);
    pt.v.assign(nu_ * ny_, 1.0 / static_cast<double>(ny_));
    for (std::size_t x = 0; x < nx_; ++x) {
      if (px_[x] <= 0.0) {
        pt.w[x * nu_] = 1.0;
        continue;
      }
      for (std::size_t u = 0; u < k; ++u) pt.w[x * nu_ + u] = t.p_u[u] * t.k_xu(u, x) / px_[x];
    }
    for (std::size_t u = 0; u < k; ++u)
      for (std::size_t y = 0; y < ny_; ++y) pt.v[u * ny_ + y] = t.k_yu(u, y);
    for (std::size_t x = 0; x < nx_; ++x) normalize_row(pt.w.data() + x * nu_, nu_);
    return true;
  }

  // U copies Y: w(u|x) = Q(u|x) for u < |Y|.
  bool embed_channel(const std::vector<std::vector<double>>& q, AscentPoint& pt) const {
    if (nu_ < ny_ || q.size() != nx_) return false;
    pt.w.assign(nx_ * nu_, 0.0);
    pt.v.assign(nu_ * ny_, 1.0 / static_cast<double>(ny_));
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y) pt.w[x * nu_ + y] = q[x][y];
    for (std::size_t u = 0; u < ny_; ++u)
      for (std::size_t y = 0; y < ny_; ++y) pt.v[u * ny_ + y] = u == y ? 1.0 : 0.0;
    for (std::size_t x = 0; x < nx_; ++x) normalize_row(pt.w.data() + x * nu_, nu_);
    return true;
  }

  AuxTriple to_triple(const AscentPoint& pt) const {
    std::vector<double> pu(nu_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t u = 0; u < nu_; ++u) pu[u] += px_[x] * pt.w[x * nu_ + u];
    std::vector<Pmf> kxu, kyu;
    for (std::size_t u = 0; u < nu_; ++u) {
      if (pu[u] > 0.0) {
        std::vector<double> row(nx_);
        for (std::size_t x = 0; x < nx_; ++x) row[x] = px_[x] * pt.w[x * nu_ + u] / pu[u];
        normalize_row(row.data(), nx_);
        kxu.emplace_back(std::move(row));
      } else {
        kxu.push_back(Pmf::uniform(nx_));
      }
      std::vector<double> vy(pt.v.begin() + static_cast<std::ptrdiff_t>(u * ny_),
                             pt.v.begin() + static_cast<std::ptrdiff_t>((u + 1) * ny_));
      normalize_row(vy.data(), ny_);
      kyu.emplace_back(std::move(vy));
    }
    normalize_row(pu.data(), nu_);
    return AuxTriple{Pmf(std::move(pu)), Kernel(std::move(kxu)), Kernel(std::move(kyu))};
  }

 private:
  static void normalize_row(double* row, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += row[i];
    if (total <= 0.0) {
      for (std::size_t i = 0; i < n; ++i) row[i] = 1.0 / static_cast<double>(n);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) row[i] /= total;
  }

  static double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }
  // dH/dp for one cell, with the log floored so empty cells give a finite pull.
  static double dh(double p) { return -std::log2(std::max(p, 1e-12)) - 1.0 / std::numbers::ln2; }

  // Gradient of one hinge branch plus barrier terms, projected onto the
  // tangent space of each simplex row and preconditioned by row mass.
  void branch_direction(const AscentPoint& pt, bool branch_b, double cd, double cr,
                        AscentPoint& dir) const {
    g_.assign(nx_ * nu_ * ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t u = 0; u < nu_; ++u)
        for (std::size_t y = 0; y < ny_; ++y) {
          double g;
          if (objective_ == AuxObjective::reconstruction)
            g = branch_b ? dh(puy_[u * ny_ + y]) - dh(pu_[u]) : dh(py_[y]);
          else
            g = branch_b ? dh(t_[(x * nu_ + u) * ny_ + y]) - dh(pu_[u]) : dh(pxy_[x * ny_ + y]);
          g -= cd * cfg_.distortion(x, y);
          g -= cr * (dh(py_[y]) - dh(pxy_[x * ny_ + y]));
          g_[(x * nu_ + u) * ny_ + y] = g;
        }

    dir.w.assign(nx_ * nu_, 0.0);
    dir.v.assign(nu_ * ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t u = 0; u < nu_; ++u) {
        double gw = 0.0;
        for (std::size_t y = 0; y < ny_; ++y)
          gw += g_[(x * nu_ + u) * ny_ + y] * pt.v[u * ny_ + y];
        gw *= px_[x];
        dir.w[x * nu_ + u] = gw / std::max(px_[x], 1e-3);
        const double q = px_[x] * pt.w[x * nu_ + u];
        for (std::size_t y = 0; y < ny_; ++y)
          dir.v[u * ny_ + y] += q * g_[(x * nu_ + u) * ny_ + y];
      }
    for (std::size_t u = 0; u < nu_; ++u)
      for (std::size_t y = 0; y < ny_; ++y) dir.v[u * ny_ + y] /= std::max(pu_[u], 1e-3);
    center_rows(dir.w, nu_);
    center_rows(dir.v, ny_);
  }

  static void center_rows(std::vector<double>& a, std::size_t width) {
    for (std::size_t r = 0; r < a.size(); r += width) {
      double mean = 0.0;
      for (std::size_t i = 0; i < width; ++i) mean += a[r + i];
      mean /= static_cast<double>(width);
      for (std::size_t i = 0; i < width; ++i) a[r + i] -= mean;
    }
  }

  void marginals(const AscentPoint& pt) const {
    t_.assign(nx_ * nu_ * ny_, 0.0);
    py_.assign(ny_, 0.0);
    pu_.assign(nu_, 0.0);
    puy_.assign(nu_ * ny_, 0.0);
    pxy_.assign(nx_ * ny_, 0.0);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t u = 0; u < nu_; ++u) {
        const double q = px_[x] * pt.w[x * nu_ + u];
        pu_[u] += q;
        for (std::size_t y = 0; y < ny_; ++y) {
          const double t = q * pt.v[u * ny_ + y];
          t_[(x * nu_ + u) * ny_ + y] = t;
          py_[y] += t;
          puy_[u * ny_ + y] += t;
          pxy_[x * ny_ + y] += t;
        }
      }
  }

  // Entropies of the cached marginals.
  Eval values() const {
    double hy = 0, hu = 0, huy = 0, hxy = 0, hxuy = 0, ed = 0;
    for (double p : py_) hy += plogp(p);
    for (double p : pu_) hu += plogp(p);
    for (double p : puy_) huy += plogp(p);
    for (double p : t_) hxuy += plogp(p);
    for (std::size_t x = 0; x < nx_; ++x)
      for (std::size_t y = 0; y < ny_; ++y) {
        hxy += plogp(pxy_[x * ny_ + y]);
        ed += pxy_[x * ny_ + y] * cfg_.distortion(x, y);
      }
    Eval e;
    e.expected_distortion = ed;
    e.mutual_information = std::max(0.0, hx_ + hy - hxy);
    // [I - R0]+ as the lower of the two hinge branches.
    if (objective_ == AuxObjective::reconstruction) {
      branch_a_ = hy;
      branch_b_ = huy - hu + cfg_.key_rate;
    } else {
      branch_a_ = hxy;
      branch_b_ = hxuy - hu + cfg_.key_rate;
    }
    e.objective = std::min(branch_a_, branch_b_);
    return e;
  }

  const SecrecyConfig& cfg_;
  AuxObjective objective_;
  std::size_t nx_, nu_, ny_;
  std::vector<double> px_;
  double hx_;

  mutable std::vector<double> t_, py_, pu_, puy_, pxy_, g_;
  mutable AscentPoint other_;
  mutable double branch_a_ = 0.0, branch_b_ = 0.0;
};

struct AscentOutcome {
  bool feasible = false;
  double value = -std::numeric_limits<double>::infinity();
  AscentPoint point;
  std::vector<double> trace;
  bool converged = true;
};

// Runs the barrier rounds from a (near-)feasible start. A round ends once the
// Lagrangian gains less than tol on 20 consecutive steps, or no step size in
// the halving sequence is accepted.
inline AscentOutcome run_ascent(const AuxAscent& problem, AscentPoint start,
                                const SearchOptions& opts) {
  AscentOutcome out;
  AuxAscent::Eval cur_eval = problem.evaluate(start);
  if (!problem.near_feasible(cur_eval)) return out;
  AscentPoint cur = std::move(start);
  out.trace.push_back(cur_eval.objective);

  std::vector<double> mus;
  if (opts.barrier_weight > 0.0)
    for (double mu = opts.barrier_weight; mu >= 1e-7; mu /= 10.0) mus.push_back(mu);
  mus.push_back(0.0);

  AscentPoint dir;
  for (std::size_t round = 0; round < mus.size(); ++round) {
    // Only constraints with room get a barrier term.
    double md = 0.0, mr = 0.0;
    if (mus[round] > 0.0) {
      if (std::isfinite(problem.lagrangian(cur_eval, 1.0, 0.0))) md = mus[round];
      if (std::isfinite(problem.lagrangian(cur_eval, 0.0, 1.0))) mr = mus[round];
    }
    double cur_l = problem.lagrangian(cur_eval, md, mr);
    double size = 0.5;
    std::size_t stall = 0;
    bool finished = false;
    for (std::size_t steps = 0; steps < opts.max_steps; ++steps) {
      problem.ascent_direction(cur, md, mr, dir);
      bool accepted = false;
      while (size > 1e-14) {
        AscentPoint cand = problem.step(cur, dir, size);
        const auto e = problem.evaluate(cand);
        const double l = problem.lagrangian(e, md, mr);
        if (problem.feasible(e) && l > cur_l) {
          stall = l - cur_l < opts.tol ? stall + 1 : 0;
          cur = std::move(cand);
          cur_eval = e;
          cur_l = l;
          accepted = true;
          size = std::min(1.0, size * 2.0);
          break;
        }
        size *= 0.5;
      }
      if (!accepted || stall >= 20) {
        finished = true;
        break;
      }
    }
    if (!finished && round + 1 == mus.size()) out.converged = false;
    out.trace.push_back(cur_eval.objective);
  }
  out.feasible = true;
  out.value = cur_eval.objective;
  out.point = std::move(cur);
  return out;
}

}  // namespace equivoq::detail
