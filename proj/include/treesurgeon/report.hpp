#pragma once

#include "treesurgeon/graph_io.hpp"
#include "treesurgeon/simulation.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <iomanip>
#include <map>

namespace treesurgeon {

inline constexpr std::string_view tool_name = "treesurgeon";
inline constexpr std::string_view tool_version = "0.3.0";
inline constexpr int schema_version = 1;

using json = nlohmann::json;

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::verification_failure, "sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

inline std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

/// Exact values are written as "p/q" strings so nothing is rounded; floats as numbers.
inline json to_json_value(const Rational& q) { return q.str(); }
inline json to_json_value(double x) { return x; }

template <Scalar S>
json to_json_values(const std::vector<S>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_json_value(x));
  return a;
}

inline std::string to_string(Arithmetic a) { return a == Arithmetic::exact ? "exact" : "float"; }

/// What every report carries besides its payload.
struct ReportContext {
  std::string command;
  std::optional<std::uint64_t> seed;
  Arithmetic arithmetic = Arithmetic::exact;
  std::string input_path;
  std::string input_digest;
  json config = json::object();
};

inline json envelope(const ReportContext& ctx) {
  json j;
  j["schema_version"] = schema_version;
  j["tool"] = {{"name", tool_name}, {"version", tool_version}};
  j["command"] = ctx.command;
  j["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
  j["arithmetic"] = to_string(ctx.arithmetic);
  j["input"] = {{"path", ctx.input_path}, {"sha256", ctx.input_digest}};
  j["config"] = ctx.config;
  return j;
}

// ---------------------------------------------------------------------------
// Payload serialisers

template <Scalar S>
json pair_json(const Digraph<S>& g, PairId p) {
  const auto& pr = g.pair(p);
  return {{"id", p}, {"u", g.label(pr.u)}, {"v", g.label(pr.v)}};
}

template <Scalar S>
json pairs_json(const Digraph<S>& g, std::span<const PairId> ps) {
  json a = json::array();
  for (auto p : ps) a.push_back(pair_json(g, p));
  return a;
}

template <Scalar S>
json tree_json(const Digraph<S>& g, const RootedTree& t) {
  json edges = json::array();
  for (const auto& e : t.edges()) edges.push_back(g.edge_name(e));
  return {{"root", g.label(t.root())}, {"edges", edges}, {"weight", to_json_value(t.weight(g))}};
}

template <Scalar S>
json tree_vector_json(const Digraph<S>& g, const TreeVector<S>& t) {
  json entries = json::array();
  for (std::size_t i = 0; i < t.size(); ++i)
    entries.push_back({{"status", status_string(t.statuses[i])}, {"value", to_json_value(t[i])}});
  return {{"root", g.label(t.root)}, {"entries", entries}, {"total", to_json_value(t.total())},
          {"backend", to_string(t.backend)}};
}

template <Scalar S>
json certificate_json(const Digraph<S>& g, const RankCertificate& c) {
  json roots = json::array();
  for (auto x : c.basis_roots) roots.push_back(g.label(x));
  json j{{"pinned", pairs_json(g, std::span<const PairId>(c.pinned))},
         {"vector_dim", c.vector_dim},
         {"rank", c.rank},
         {"basis_roots", roots},
         {"arithmetic", to_string(c.arithmetic)}};
  if (c.arithmetic == Arithmetic::floating) {
    j["tolerance"] = c.tolerance;
    j["singular_values"] = c.singular_values;
  }
  return j;
}

template <Scalar S>
json coplanarity_json(const Digraph<S>& g, const CoplanarityReport<S>& r) {
  json vectors = json::array();
  for (const auto& t : r.vectors) vectors.push_back(tree_vector_json(g, t));
  json sigmas = json::array();
  for (std::size_t k = 0; k < r.sigmas.size(); ++k) {
    const auto& c = r.sigmas[k];
    bool ok = true;
    for (std::size_t x = 0; x < r.vectors.size(); ++x) ok = ok && is_orthogonal(c.vector, r.vectors[x].values);
    sigmas.push_back({{"pin", pair_json(g, r.certificate.pinned[c.pin])},
                      {"condition", status_string(c.condition)},
                      {"vector", to_json_values(c.vector)},
                      {"orthogonal", ok}});
  }
  return {{"certificate", certificate_json(g, r.certificate)},
          {"vectors", vectors},
          {"sigmas", sigmas},
          {"orthogonal_sigmas", r.orthogonal_sigmas},
          {"sigma_rank", r.sigma_rank},
          {"all_orthogonal", r.all_orthogonal},
          {"rank_is_n_plus_one", r.rank_is_n_plus_one()},
          {"too_few_vertices", r.too_few_vertices},
          {"backend", to_string(r.backend)}};
}

template <Scalar S>
json second_order_json(const Digraph<S>& g, const SecondOrderReport<S>& r) {
  json rows = json::array();
  for (std::size_t x = 0; x < r.lhs.size(); ++x)
    rows.push_back({{"root", g.label(VertexId(x))}, {"lhs", to_json_value(r.lhs[x])}, {"rhs", to_json_value(r.rhs[x])}});
  return {{"pair", pair_json(g, r.pair)}, {"contracted", to_json_value(r.contracted)}, {"roots", rows}, {"holds", r.holds}};
}

template <Scalar S>
json two_edge_json(const Digraph<S>& g, const TwoEdgeReport<S>& r) {
  json cons = json::array();
  for (std::size_t i = 0; i < r.consistency.names.size(); ++i)
    cons.push_back({{"name", r.consistency.names[i]},
                    {"value", to_json_value(r.consistency.values[i])},
                    {"vanishes", is_zero(r.consistency.values[i])}});
  json roots = json::array();
  for (auto x : r.block_roots) roots.push_back(g.label(x));
  return {{"coplanarity", coplanarity_json(g, r.coplanarity)},
          {"sigma_pattern_ok", r.sigma.pattern_ok},
          {"omega", to_json_values(r.sigma.omega)},
          {"consistency", cons},
          {"lower_block", {{"roots", roots}, {"determinant", to_json_value(r.lower_block_det)}}},
          {"pairs_share_vertex", r.pairs_share_vertex},
          {"meets_size_condition", r.meets_size_condition}};
}

template <Scalar S>
json stationary_json(const Digraph<S>& g, const StationaryDistribution<S>& p) {
  json a = json::array();
  for (VertexId x = 0; x < g.vertex_count(); ++x) a.push_back({{"vertex", g.label(x)}, {"p", to_json_value(p[x])}});
  return a;
}

template <Scalar S>
json currents_json(const Digraph<S>& g, const CurrentVector<S>& j) {
  json a = json::array();
  for (PairId e = 0; e < g.pair_count(); ++e) a.push_back({{"pair", pair_json(g, e)}, {"j", to_json_value(j[e])}});
  return a;
}

template <Scalar S>
json linearity_json(const Digraph<S>& g, const LinearityCoefficients<S>& lc) {
  const bool mu = lc.input_pairs.size() > 1;
  json coeffs = json::array();
  for (PairId e = 0; e < lc.coefficients.size(); ++e) {
    json c{{"pair", pair_json(g, e)}};
    for (std::size_t k = 0; k < lc.coefficients[e].size(); ++k)
      c[(mu ? "mu" : "lambda") + std::to_string(k)] = to_json_value(lc.coefficients[e][k]);
    coeffs.push_back(std::move(c));
  }
  json j{{"input_pairs", pairs_json(g, std::span<const PairId>(lc.input_pairs))},
         {"coefficients", coeffs},
         {"consistent", lc.consistent}};
  if (mu) {
    j["rank_certificates"] = json::array({certificate_json(g, lc.certificate)});
    j["rows_used"] = lc.rows_used;
  } else {
    j["rank_certificates"] = json::array();
    j["determinants"] = to_json_values(lc.determinants);
  }
  return j;
}

template <Scalar S>
json residual_json(const ResidualReport<S>& r) {
  return {{"samples", r.samples},
          {"max_abs", r.max_abs},
          {"max_rel", r.max_rel},
          {"mean_rel", r.mean_rel},
          {"exact_zero", r.exact_zero},
          {"within_tolerance", r.within_tolerance}};
}

inline json trajectory_json(const TrajectoryStats& st) {
  const auto cur = estimate_currents(st);
  const auto occ = estimate_occupation(st);
  return {{"seed", st.seed},
          {"stream", st.stream},
          {"burn_in", st.burn_in},
          {"total_time", st.total_time},
          {"jumps", st.jumps},
          {"occupation_time", st.occupation_time},
          {"signed_crossings", st.signed_crossings},
          {"batches", st.batch_crossings.size()},
          {"currents", cur.mean},
          {"current_errors", cur.standard_error},
          {"occupation", occ.mean},
          {"occupation_errors", occ.standard_error}};
}

// ---------------------------------------------------------------------------
// Schema

enum class FieldType { object, array, string, number, integer, boolean, any };

struct FieldRule {
  std::string_view path;  // dotted path from the document root
  FieldType type;
};

inline bool matches(const json& v, FieldType t) {
  switch (t) {
    case FieldType::object: return v.is_object();
    case FieldType::array: return v.is_array();
    case FieldType::string: return v.is_string();
    case FieldType::number: return v.is_number();
    case FieldType::integer: return v.is_number_integer();
    case FieldType::boolean: return v.is_boolean();
    case FieldType::any: return true;
  }
  return false;
}

/// Required fields per command on top of the shared envelope.
inline const std::map<std::string, std::vector<FieldRule>, std::less<>>& report_schemas() {
  using F = FieldType;
  static const std::map<std::string, std::vector<FieldRule>, std::less<>> schemas{
      {"enum", {{"result.count", F::integer}, {"result.trees", F::array}, {"result.total", F::any}}},
      {"poly", {{"result.value", F::any}, {"result.backend", F::string}, {"result.root", F::string}}},
      {"decompose", {{"result.pinned", F::array}, {"result.vectors", F::array}}},
      {"coplanarity",
       {{"result.certificate.rank", F::integer}, {"result.certificate.vector_dim", F::integer},
        {"result.vectors", F::array}, {"result.all_orthogonal", F::boolean}, {"verified", F::boolean}}},
      {"conjecture",
       {{"result.certificate.rank", F::integer}, {"result.rank_is_n_plus_one", F::boolean},
        {"result.orthogonal_sigmas", F::integer}, {"trial", F::integer}}},
      {"stationary", {{"result.matrix_tree", F::array}, {"result.kernel", F::array}, {"verified", F::boolean}}},
      {"currents", {{"result.currents", F::array}, {"result.vertex_balance", F::array}, {"verified", F::boolean}}},
      {"linearity",
       {{"result.input_pairs", F::array}, {"result.coefficients", F::array}, {"result.rank_certificates", F::array},
        {"result.residuals", F::object}, {"verified", F::boolean}}},
      {"simulate", {{"result.replicas", F::array}, {"result.horizon", F::number}, {"result.analytic", F::array}}},
      {"selftest", {{"result.checks", F::array}, {"verified", F::boolean}}},
  };
  return schemas;
}

/// Returns the list of violations; empty means valid.
inline std::vector<std::string> schema_violations(const json& doc) {
  std::vector<std::string> bad;
  auto check = [&](std::string_view path, FieldType t) {
    const json* cur = &doc;
    std::size_t start = 0;
    while (start <= path.size()) {
      auto dot = path.find('.', start);
      auto key = std::string(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
      if (!cur->is_object() || !cur->contains(key)) {
        bad.push_back("missing " + std::string(path));
        return;
      }
      cur = &(*cur)[key];
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    if (!matches(*cur, t)) bad.push_back("wrong type at " + std::string(path));
  };
  using F = FieldType;
  for (auto [p, t] : std::initializer_list<FieldRule>{{"schema_version", F::integer}, {"tool.name", F::string},
                                                      {"tool.version", F::string}, {"command", F::string},
                                                      {"arithmetic", F::string}, {"input.sha256", F::string},
                                                      {"config", F::object}})
    check(p, t);
  if (doc.contains("seed") && !doc["seed"].is_null() && !doc["seed"].is_number_unsigned())
    bad.push_back("wrong type at seed");
  if (!doc.contains("seed")) bad.push_back("missing seed");
  if (doc.contains("command") && doc["command"].is_string()) {
    const auto& schemas = report_schemas();
    auto it = schemas.find(doc["command"].get<std::string>());
    if (it == schemas.end())
      bad.push_back("unknown command " + doc["command"].get<std::string>());
    else
      for (auto [p, t] : it->second) check(p, t);
  }
  return bad;
}

inline void validate_report(const json& doc) {
  const auto bad = schema_violations(doc);
  if (bad.empty()) return;
  std::string msg = "report fails its schema:";
  for (const auto& b : bad) msg += " " + b + ";";
  throw Error(ErrorCode::verification_failure, msg);
}

}  // namespace treesurgeon
