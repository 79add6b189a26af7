#pragma once

// Problem instances, auxiliary triples and result records shared by the
// characterization and oracle code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "equivoq/errors.hpp"
#include "equivoq/prob.hpp"
#include "equivoq/rate_distortion.hpp"
#include "json.hpp"

namespace equivoq {

// Tolerance for feasible-set membership and for the feasibility invariant R >= R(D).
inline constexpr double kMembershipTol = 1e-9;

/// (P_X, d, D, R, R0). Rates are bits per source symbol.
struct SecrecyConfig {
  Pmf source;
  DistortionSpec distortion;
  double rate = 0.0;
  double key_rate = 0.0;

  std::size_t source_size() const noexcept { return source.size(); }
  std::size_t recon_size() const noexcept { return distortion.recon_size(); }

  // Structural checks only; see require_feasible for R >= R(D).
  void validate() const {
    distortion.check_source(source);
    if (!std::isfinite(rate) || rate < 0.0) throw ArgumentError("rate must be finite and >= 0");
    if (!std::isfinite(key_rate) || key_rate < 0.0)
      throw ArgumentError("key_rate must be finite and >= 0");
  }

  friend bool operator==(const SecrecyConfig&, const SecrecyConfig&) = default;
};

/// Throws InfeasibleError unless D >= d_min and R >= R(D) - 1e-9. Returns R(D).
inline double require_feasible(const SecrecyConfig& cfg) {
  cfg.validate();
  const double rd = rd_function(cfg.source, cfg.distortion, cfg.distortion.limit());
  if (cfg.rate < rd - kMembershipTol)
    throw InfeasibleError("rate " + std::to_string(cfg.rate) + " is below R(D) = " +
                          std::to_string(rd) + "; the receiver cannot meet D");
  return rd;
}

inline void to_json(nlohmann::json& j, const SecrecyConfig& c) {
  j = nlohmann::json{{"source", c.source},
                     {"distortion", c.distortion},
                     {"rate", c.rate},
                     {"key_rate", c.key_rate}};
}

// Field-specific messages for malformed instance documents.
inline void from_json(const nlohmann::json& j, SecrecyConfig& c) {
  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(name))
      throw ArgumentError(std::string("instance: missing field '") + name + "'");
    return j.at(name);
  };
  auto number = [](const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ArgumentError("instance: field '" + path + "' must be a number");
    return v.get<double>();
  };
  try {
    const auto& src = field("source");
    if (!src.is_array()) throw ArgumentError("instance: field 'source' must be an array");
    std::vector<double> probs;
    for (std::size_t i = 0; i < src.size(); ++i)
      probs.push_back(number(src[i], "source[" + std::to_string(i) + "]"));
    c.source = Pmf(std::move(probs));
  } catch (const ArgumentError& e) {
    const std::string msg = e.what();
    throw ArgumentError(msg.rfind("instance:", 0) == 0 ? msg : "instance: field 'source': " + msg);
  }
  const auto& dist = field("distortion");
  if (!dist.is_object() || !dist.contains("matrix") || !dist.contains("limit"))
    throw ArgumentError("instance: field 'distortion' needs 'matrix' and 'limit'");
  const auto& mat = dist.at("matrix");
  if (!mat.is_array()) throw ArgumentError("instance: field 'distortion.matrix' must be an array");
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < mat.size(); ++r) {
    if (!mat[r].is_array())
      throw ArgumentError("instance: field 'distortion.matrix[" + std::to_string(r) +
                          "]' must be an array");
    std::vector<double> row;
    for (std::size_t k = 0; k < mat[r].size(); ++k)
      row.push_back(number(mat[r][k], "distortion.matrix[" + std::to_string(r) + "][" +
                                          std::to_string(k) + "]"));
    rows.push_back(std::move(row));
  }
  const double limit = number(dist.at("limit"), "distortion.limit");
  try {
    c.distortion = DistortionSpec(std::move(rows), limit);
  } catch (const ArgumentError& e) {
    throw ArgumentError(std::string("instance: field 'distortion': ") + e.what());
  }
  c.rate = number(field("rate"), "rate");
  c.key_rate = number(field("key_rate"), "key_rate");
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ArgumentError(std::string("instance: ") + e.what());
  }
}

/// Point of the feasible set: U ~ p_u, X ~ k_xu(.|U), Y ~ k_yu(.|U).
struct AuxTriple {
  Pmf p_u;
  Kernel k_xu;  // rows indexed by u, over X
  Kernel k_yu;  // rows indexed by u, over Y

  std::size_t aux_cardinality() const noexcept { return p_u.size(); }
  JointPmf joint() const { return compose(p_u, k_xu, k_yu); }

  friend bool operator==(const AuxTriple&, const AuxTriple&) = default;
};

inline void to_json(nlohmann::json& j, const AuxTriple& t) {
  j = nlohmann::json{{"p_u", t.p_u}, {"k_xu", t.k_xu}, {"k_yu", t.k_yu}};
}
inline void from_json(const nlohmann::json& j, AuxTriple& t) {
  t.p_u = j.at("p_u").get<Pmf>();
  t.k_xu = j.at("k_xu").get<Kernel>();
  t.k_yu = j.at("k_yu").get<Kernel>();
}

struct MembershipReport {
  bool member = false;
  double marginal_slack = 0.0;    // -max_x |P_X(x) - source(x)|
  double distortion_slack = 0.0;  // D - E d(X,Y)
  double rate_slack = 0.0;        // R - I(X;Y)
  double expected_distortion = 0.0;
  double mutual_information = 0.0;
};

/// Slack of every constraint of the feasible set. Markov X - U - Y holds by the
/// composition form of the triple.
inline MembershipReport check_membership(const AuxTriple& t, const SecrecyConfig& cfg) {
  const std::size_t nu = t.aux_cardinality();
  if (t.k_xu.inputs() != nu || t.k_yu.inputs() != nu)
    throw ArgumentError("check_membership: kernels must have one row per aux symbol");
  if (t.k_xu.outputs() != cfg.source_size() || t.k_yu.outputs() != cfg.recon_size())
    throw ArgumentError("check_membership: kernel outputs must match |X| and |Y|");
  const JointPmf xuy = t.joint();
  const JointPmf xy = xuy.marginal({0, 2});
  MembershipReport r;
  double dev = 0.0;
  const Pmf px = marginal_pmf(xuy, 0);
  for (std::size_t x = 0; x < px.size(); ++x) dev = std::max(dev, std::abs(px[x] - cfg.source[x]));
  r.marginal_slack = -dev;
  r.expected_distortion = cfg.distortion.expected(xy);
  r.mutual_information = mutual_information(xy, {0}, {1});
  r.distortion_slack = cfg.distortion.limit() - r.expected_distortion;
  r.rate_slack = cfg.rate - r.mutual_information;
  r.member = r.marginal_slack >= -kMembershipTol && r.distortion_slack >= -kMembershipTol &&
             r.rate_slack >= -kMembershipTol;
  return r;
}

inline void to_json(nlohmann::json& j, const MembershipReport& r) {
  j = nlohmann::json{{"member", r.member},
                     {"marginal_slack", r.marginal_slack},
                     {"distortion_slack", r.distortion_slack},
                     {"rate_slack", r.rate_slack},
                     {"expected_distortion", r.expected_distortion},
                     {"mutual_information", r.mutual_information}};
}

enum class AuxObjective {
  reconstruction,  // H(Y) - [I(Y;U) - R0]+
  joint,           // H(X,Y) - [I(X,Y;U) - R0]+
};

struct SearchOptions {
  std::size_t aux_cardinality = 0;  // 0 selects |X||Y| + 2
  std::size_t restarts = 64;
  std::uint64_t seed = 0;
  double barrier_weight = 1e-3;
  double tol = 1e-9;
  double grid_seed_step = 0.1;  // 0 disables the coarse grid seed
  std::size_t grid_seed_aux = 3;
  std::size_t max_steps = 400;  // per barrier round
  std::vector<AuxTriple> seeds;  // extra warm starts, tried first

  std::size_t resolved_aux(const SecrecyConfig& cfg) const {
    return aux_cardinality ? aux_cardinality : cfg.source_size() * cfg.recon_size() + 2;
  }
};

inline void to_json(nlohmann::json& j, const SearchOptions& o) {
  j = nlohmann::json{{"aux_cardinality", o.aux_cardinality},
                     {"restarts", o.restarts},
                     {"seed", o.seed},
                     {"barrier_weight", o.barrier_weight},
                     {"tol", o.tol},
                     {"grid_seed_step", o.grid_seed_step},
                     {"grid_seed_aux", o.grid_seed_aux},
                     {"max_steps", o.max_steps}};
}
inline void from_json(const nlohmann::json& j, SearchOptions& o) {
  o = SearchOptions{};
  if (!j.is_object()) throw ArgumentError("SearchOptions JSON must be an object");
  if (j.contains("aux_cardinality")) o.aux_cardinality = j.at("aux_cardinality").get<std::size_t>();
  if (j.contains("restarts")) o.restarts = j.at("restarts").get<std::size_t>();
  if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("barrier_weight")) o.barrier_weight = j.at("barrier_weight").get<double>();
  if (j.contains("tol")) o.tol = j.at("tol").get<double>();
  if (j.contains("grid_seed_step")) o.grid_seed_step = j.at("grid_seed_step").get<double>();
  if (j.contains("grid_seed_aux")) o.grid_seed_aux = j.at("grid_seed_aux").get<std::size_t>();
  if (j.contains("max_steps")) o.max_steps = j.at("max_steps").get<std::size_t>();
  if (o.restarts == 0) throw ArgumentError("SearchOptions: restarts must be >= 1");
  if (!(o.tol > 0.0)) throw ArgumentError("SearchOptions: tol must be > 0");
  if (o.barrier_weight < 0.0) throw ArgumentError("SearchOptions: barrier_weight must be >= 0");
}

struct SearchDiagnostics {
  std::size_t restarts = 0;
  std::size_t feasible_restarts = 0;
  std::size_t best_restart = 0;
  std::vector<double> objective_trace;  // best restart, one entry per barrier round
  std::size_t grid_points = 0;
  bool converged = true;
  std::vector<std::string> notes;

  friend bool operator==(const SearchDiagnostics&, const SearchDiagnostics&) = default;
};

struct EquivocationResult {
  double value = 0.0;  // bits per symbol
  std::optional<AuxTriple> optimizer;
  SearchDiagnostics diagnostics;

  friend bool operator==(const EquivocationResult&, const EquivocationResult&) = default;
};

inline void to_json(nlohmann::json& j, const SearchDiagnostics& d) {
  j = nlohmann::json{{"restarts", d.restarts},
                     {"feasible_restarts", d.feasible_restarts},
                     {"best_restart", d.best_restart},
                     {"objective_trace", d.objective_trace},
                     {"grid_points", d.grid_points},
                     {"converged", d.converged},
                     {"notes", d.notes}};
}
inline void from_json(const nlohmann::json& j, SearchDiagnostics& d) {
  d.restarts = j.at("restarts").get<std::size_t>();
  d.feasible_restarts = j.at("feasible_restarts").get<std::size_t>();
  d.best_restart = j.at("best_restart").get<std::size_t>();
  d.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  d.grid_points = j.at("grid_points").get<std::size_t>();
  d.converged = j.at("converged").get<bool>();
  d.notes = j.at("notes").get<std::vector<std::string>>();
}

inline void to_json(nlohmann::json& j, const EquivocationResult& r) {
  j = nlohmann::json{{"value", r.value}, {"diagnostics", r.diagnostics}};
  j["optimizer"] = r.optimizer ? nlohmann::json(*r.optimizer) : nlohmann::json(nullptr);
}
inline void from_json(const nlohmann::json& j, EquivocationResult& r) {
  r.value = j.at("value").get<double>();
  r.diagnostics = j.at("diagnostics").get<SearchDiagnostics>();
  if (j.contains("optimizer") && !j.at("optimizer").is_null())
    r.optimizer = j.at("optimizer").get<AuxTriple>();
  else
    r.optimizer.reset();
}

}  // namespace equivoq
