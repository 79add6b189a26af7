#pragma once

// Optimal equivocation of a cipher system with communication rate R, key rate
// R0 and a distortion constraint at the intended receiver:
//
//   source          H(X) - [R(D) - R0]+
//   reconstruction  max over P of H(Y)   - [I(Y;U)   - R0]+
//   joint           max over P of H(X,Y) - [I(X,Y;U) - R0]+
//
// where P is the set of triples with X - U - Y, E d(X,Y) <= D and I(X;Y) <= R.
// The two max-form values come from a multi-start local ascent and are lower
// bounds on the true maxima.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "equivoq/aux_ascent.hpp"
#include "equivoq/aux_grid.hpp"
#include "equivoq/errors.hpp"
#include "equivoq/parallel.hpp"
#include "equivoq/prob.hpp"
#include "equivoq/rate_distortion.hpp"
#include "equivoq/secrecy.hpp"

namespace equivoq {

/// Objective of a max-form statement evaluated at a triple.
inline double aux_objective_value(const AuxTriple& t, const SecrecyConfig& cfg,
                                  AuxObjective objective) {
  const JointPmf xuy = t.joint();  // axes X = 0, U = 1, Y = 2
  if (objective == AuxObjective::reconstruction) {
    const double info = mutual_information(xuy, {2}, {1});
    return entropy(xuy, {2}) - std::max(0.0, info - cfg.key_rate);
  }
  const double info = mutual_information(xuy, {0, 2}, {1});
  return entropy(xuy, {0, 2}) - std::max(0.0, info - cfg.key_rate);
}

inline EquivocationResult source_equivocation(const SecrecyConfig& cfg) {
  const double rd = require_feasible(cfg);
  EquivocationResult r;
  r.value = std::max(0.0, entropy(cfg.source) - std::max(0.0, rd - cfg.key_rate));
  r.diagnostics.notes.push_back("closed form; R(D) = " + std::to_string(rd) + " bits");
  return r;
}

namespace detail {

// Starting points known to be feasible, in priority order: caller seeds, the
// coarse grid optima, then test channels with U a copy of Y.
inline std::vector<AscentPoint> feasible_seeds(const AuxAscent& problem, const SecrecyConfig& cfg,
                                               AuxObjective objective, const SearchOptions& opts,
                                               SearchDiagnostics& diag) {
  std::vector<AscentPoint> seeds;
  auto keep = [&](AscentPoint pt) {
    if (problem.near_feasible(problem.evaluate(pt))) seeds.push_back(std::move(pt));
  };
  for (const auto& t : opts.seeds) {
    AscentPoint pt;
    if (problem.embed(t, pt)) keep(std::move(pt));
  }
  if (opts.grid_seed_step > 0.0) {
    // Coarse grid at the configured |U|, then a grid twice as fine at |U| = 2.
    const std::pair<double, std::size_t> grids[] = {
        {opts.grid_seed_step, std::min(opts.grid_seed_aux, problem.aux())},
        {0.5 * opts.grid_seed_step, std::min<std::size_t>(2, problem.aux())}};
    for (const auto& [step, aux] : grids) {
      try {
        const auto g = exhaustive_aux_search(cfg, step, aux, objective, 2e6);
        diag.grid_points += g.diagnostics.grid_points;
        AscentPoint pt;
        if (problem.embed(*g.optimizer, pt)) keep(std::move(pt));
      } catch (const ResourceError&) {
        diag.notes.push_back("grid seed skipped: grid too large");
      } catch (const InfeasibleError&) {
        diag.notes.push_back("grid seed skipped: no feasible grid point");
      }
    }
  }
  std::vector<std::vector<std::vector<double>>> channels;
  try {
    channels.push_back(rd_solve(cfg.source, cfg.distortion, cfg.distortion.limit(),
                                kRdDefaultTol)
                           .channel);
  } catch (const std::exception&) {
  }
  {
    std::vector<std::vector<double>> det(cfg.source_size(),
                                         std::vector<double>(cfg.recon_size(), 0.0));
    for (std::size_t x = 0; x < cfg.source_size(); ++x) {
      const auto& row = cfg.distortion.matrix()[x];
      det[x][static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin())] =
          1.0;
    }
    channels.push_back(std::move(det));
  }
  channels.push_back(zero_rate_solution(cfg.source, cfg.distortion).channel);
  for (const auto& q : channels) {
    AscentPoint pt;
    if (problem.embed_channel(q, pt)) keep(std::move(pt));
  }
  return seeds;
}

inline bool strictly_interior(const AuxAscent& problem, const SecrecyConfig& cfg,
                              const AscentPoint& pt) {
  const auto e = problem.evaluate(pt);
  return e.expected_distortion < cfg.distortion.limit() - 1e-12 &&
         e.mutual_information < cfg.rate - 1e-12;
}

// A point with slack in both constraints: the R(D) test channel at a distortion
// below the limit, U a copy of Y. Absent when the feasible set has no interior.
inline std::optional<AscentPoint> interior_anchor(const AuxAscent& problem,
                                                  const SecrecyConfig& cfg) {
  const double lo = cfg.distortion.d_min(cfg.source), hi = cfg.distortion.limit();
  if (!(hi > lo)) return std::nullopt;
  for (double frac : {0.5, 0.9, 0.99, 0.999}) {
    AscentPoint pt;
    try {
      const auto sol = rd_solve(cfg.source, cfg.distortion, lo + frac * (hi - lo), kRdDefaultTol);
      if (!problem.embed_channel(sol.channel, pt)) return std::nullopt;
    } catch (const std::exception&) {
      continue;
    }
    if (strictly_interior(problem, cfg, pt)) return pt;
  }
  return std::nullopt;
}

// Starts on a constraint boundary get no barrier for that constraint and stall,
// so they are nudged toward the interior anchor first.
inline AscentPoint interiorize(const AuxAscent& problem, const SecrecyConfig& cfg,
                               AscentPoint pt, const std::optional<AscentPoint>& anchor) {
  if (!anchor || strictly_interior(problem, cfg, pt)) return pt;
  for (double lambda : {1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0}) {
    AscentPoint mixed = AuxAscent::mix(pt, *anchor, lambda);
    if (strictly_interior(problem, cfg, mixed)) return mixed;
  }
  return pt;
}

// Random start pulled toward a feasible anchor until it is feasible.
inline std::optional<AscentPoint> random_start(const AuxAscent& problem, std::mt19937_64& rng,
                                               double concentration, const AscentPoint* anchor) {
  AscentPoint pt = problem.random_point(rng, concentration);
  if (problem.feasible(problem.evaluate(pt))) return pt;
  if (!anchor) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (problem.feasible(problem.evaluate(AuxAscent::mix(pt, *anchor, mid))))
      hi = mid;
    else
      lo = mid;
  }
  AscentPoint mixed = AuxAscent::mix(pt, *anchor, hi);
  if (!problem.feasible(problem.evaluate(mixed))) return *anchor;
  return mixed;
}

inline EquivocationResult maximize_aux(const SecrecyConfig& cfg, AuxObjective objective,
                                       const SearchOptions& opts) {
  require_feasible(cfg);
  if (opts.restarts == 0) throw ArgumentError("SearchOptions: restarts must be >= 1");
  const std::size_t nu = opts.resolved_aux(cfg);
  if (nu == 0) throw ArgumentError("SearchOptions: aux_cardinality must be >= 1");
  AuxAscent problem(cfg, objective, nu);

  EquivocationResult result;
  auto& diag = result.diagnostics;
  const auto seeds = feasible_seeds(problem, cfg, objective, opts, diag);
  const AscentPoint* anchor = seeds.empty() ? nullptr : &seeds.front();
  const auto inner = interior_anchor(problem, cfg);
  const std::size_t total = std::max(opts.restarts, seeds.size());

  auto outcomes = parallel_map(total, [&](std::size_t i) {
    std::optional<AscentPoint> start;
    if (i < seeds.size()) {
      start = seeds[i];
    } else {
      std::seed_seq seq{static_cast<std::uint64_t>(opts.seed), static_cast<std::uint64_t>(i)};
      std::mt19937_64 rng(seq);
      start = random_start(problem, rng, i % 2 ? 0.3 : 1.0, anchor);
    }
    if (!start) return AscentOutcome{};
    AscentOutcome o = run_ascent(problem, interiorize(problem, cfg, *start, inner), opts);
    // A seed is itself a candidate; the nudge must never cost value.
    const auto e = problem.evaluate(*start);
    if (problem.near_feasible(e) && (!o.feasible || e.objective > o.value)) {
      o.feasible = true;
      o.value = e.objective;
      o.point = std::move(*start);
      o.trace.push_back(e.objective);
    }
    return o;
  });

  // Re-validate each final iterate as a triple; infeasible ones are discarded.
  std::vector<std::optional<std::pair<double, AuxTriple>>> finals(total);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < total; ++i) {
    if (!outcomes[i].feasible) continue;
    AuxTriple t = problem.to_triple(outcomes[i].point);
    if (!check_membership(t, cfg).member) continue;
    const double v = aux_objective_value(t, cfg, objective);
    finals[i].emplace(v, std::move(t));
    ++diag.feasible_restarts;
    best = std::max(best, v);
  }
  diag.restarts = total;
  if (diag.feasible_restarts == 0)
    throw InfeasibleError("no feasible auxiliary triple found after " + std::to_string(total) +
                          " restarts");
  for (std::size_t i = 0; i < total; ++i) {
    if (finals[i] && finals[i]->first >= best - 1e-9) {
      result.value = finals[i]->first;
      result.optimizer = std::move(finals[i]->second);
      diag.best_restart = i;
      diag.objective_trace = outcomes[i].trace;
      diag.converged = outcomes[i].converged;
      break;
    }
  }
  if (!diag.converged)
    diag.notes.push_back("warning: best restart hit the step limit before converging");
  diag.notes.push_back("local ascent with |U| = " + std::to_string(nu) +
                       "; value is a lower bound on the maximum over the feasible set");
  return result;
}

}  // namespace detail

inline EquivocationResult reconstruction_equivocation(const SecrecyConfig& cfg,
                                                      const SearchOptions& opts = {}) {
  return detail::maximize_aux(cfg, AuxObjective::reconstruction, opts);
}

inline EquivocationResult joint_equivocation(const SecrecyConfig& cfg,
                                             const SearchOptions& opts = {}) {
  return detail::maximize_aux(cfg, AuxObjective::joint, opts);
}

// Sweeps -------------------------------------------------------------------

enum class SweepAxis { key_rate, distortion_limit, rate };

inline SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "key_rate") return SweepAxis::key_rate;
  if (s == "distortion_limit") return SweepAxis::distortion_limit;
  if (s == "rate") return SweepAxis::rate;
  throw ArgumentError("unknown sweep axis '" + s + "'");
}

struct SweepOutputs {
  bool source = true;
  bool reconstruction = true;
  bool joint = true;
};

struct SweepRow {
  double axis_value = 0.0;
  std::optional<double> source, reconstruction, joint;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // in the order the values were given
  std::vector<std::string> warnings;
};

inline SecrecyConfig with_axis(const SecrecyConfig& cfg, SweepAxis axis, double value) {
  SecrecyConfig c = cfg;
  switch (axis) {
    case SweepAxis::key_rate: c.key_rate = value; break;
    case SweepAxis::rate: c.rate = value; break;
    case SweepAxis::distortion_limit: c.distortion = cfg.distortion.with_limit(value); break;
  }
  c.validate();
  return c;
}

/// Evaluates the selected characterizations along one axis. Points are solved in
/// increasing axis order and every optimizer found so far seeds the next point;
/// the feasible set only grows along each axis, so the max-form values come out
/// nondecreasing.
inline SweepResult equivocation_sweep(const SecrecyConfig& cfg, SweepAxis axis,
                                      const std::vector<double>& values, SweepOutputs outputs,
                                      const SearchOptions& opts = {}) {
  if (values.empty()) throw ArgumentError("sweep: no values");
  for (double v : values)
    if (!std::isfinite(v)) throw ArgumentError("sweep: values must be finite");
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  SweepResult out;
  out.rows.resize(values.size());
  SearchOptions recon_opts = opts, joint_opts = opts;
  for (std::size_t i : order) {
    const SecrecyConfig c = with_axis(cfg, axis, values[i]);
    SweepRow& row = out.rows[i];
    row.axis_value = values[i];
    if (outputs.source) row.source = source_equivocation(c).value;
    if (outputs.reconstruction) {
      auto r = reconstruction_equivocation(c, recon_opts);
      row.reconstruction = r.value;
      recon_opts.seeds.push_back(*r.optimizer);
    }
    if (outputs.joint) {
      auto r = joint_equivocation(c, joint_opts);
      row.joint = r.value;
      joint_opts.seeds.push_back(*r.optimizer);
    }
  }

  auto check = [&](const char* name, auto get) {
    for (std::size_t k = 1; k < order.size(); ++k) {
      const auto a = get(out.rows[order[k - 1]]), b = get(out.rows[order[k]]);
      if (a && b && *b < *a - 1e-9)
        out.warnings.push_back(std::string(name) + " decreases between axis values " +
                               std::to_string(values[order[k - 1]]) + " and " +
                               std::to_string(values[order[k]]));
    }
  };
  if (axis == SweepAxis::key_rate || axis == SweepAxis::distortion_limit) {
    check("source_eq", [](const SweepRow& r) { return r.source; });
  }
  if (axis == SweepAxis::key_rate) {
    check("reconstruction_eq", [](const SweepRow& r) { return r.reconstruction; });
    check("joint_eq", [](const SweepRow& r) { return r.joint; });
  }
  return out;
}

}  // namespace equivoq
