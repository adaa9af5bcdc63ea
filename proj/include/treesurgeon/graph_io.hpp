#pragma once

#include "treesurgeon/graph.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <variant>

namespace treesurgeon {

/// A graph in whichever arithmetic its source document asked for.
using AnyGraph = std::variant<Digraph<Rational>, Digraph<double>>;

inline Arithmetic arithmetic_of(const AnyGraph& g) {
  return std::holds_alternative<Digraph<Rational>>(g) ? Arithmetic::exact : Arithmetic::floating;
}

namespace detail {

struct RawRate {
  std::string text;
  bool decimal = false;
};

inline bool looks_decimal(std::string_view s) {
  return s.find_first_of(".eE") != std::string_view::npos;
}

inline Rational parse_exact(std::string_view s) {
  // integer or p/q, optional leading sign
  std::size_t slash = s.find('/');
  auto digits = [](std::string_view t) {
    if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.remove_prefix(1);
    return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  if (slash == std::string_view::npos) {
    if (!digits(s)) throw std::invalid_argument("bad integer");
    return Rational(std::string(s));
  }
  auto num = s.substr(0, slash), den = s.substr(slash + 1);
  if (!digits(num) || den.empty() || den.front() == '-' || den.front() == '+' || !digits(den))
    throw std::invalid_argument("bad fraction");
  BigInt d(std::string{den});
  if (d == 0) throw std::invalid_argument("zero denominator");
  return Rational(BigInt(std::string{num}), d);
}

inline double parse_float(std::string_view s) {
  std::size_t used = 0;
  std::string str(s);
  double x = std::stod(str, &used);
  if (used != str.size()) throw std::invalid_argument("trailing characters");
  return x;
}

struct RawPair {
  std::string u, v;
  RawRate forward, backward;
  std::size_t line = 0;
};

template <Scalar S>
S convert_rate(const RawRate& r, std::size_t line) {
  try {
    if constexpr (is_exact_v<S>) {
      return parse_exact(r.text);
    } else {
      return r.decimal ? parse_float(r.text) : to_double(parse_exact(r.text));
    }
  } catch (const std::exception&) {
    throw ParseError(ErrorCode::malformed_line, line, "cannot parse rate '" + r.text + "'");
  }
}

template <Scalar S>
Digraph<S> assemble(const std::vector<std::string>& labels, const std::vector<RawPair>& raw) {
  std::vector<EdgePair<S>> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& rp : raw) {
    if (rp.u == rp.v)
      throw ParseError(ErrorCode::self_loop, rp.line, "self-loop at '" + rp.u + "'");
    auto key = std::minmax(rp.u, rp.v);
    if (!seen.insert({key.first, key.second}).second)
      throw ParseError(ErrorCode::duplicate_edge, rp.line,
                       "pair '" + rp.u + "'-'" + rp.v + "' listed twice");
    S f = convert_rate<S>(rp.forward, rp.line);
    S b = convert_rate<S>(rp.backward, rp.line);
    if (sign_of(f) < 0 || sign_of(b) < 0 || (is_zero(f) && is_zero(b)))
      throw ParseError(ErrorCode::nonpositive_rate, rp.line,
                       "pair '" + rp.u + "'-'" + rp.v + "' needs nonnegative rates, one positive");
    if constexpr (!is_exact_v<S>) {
      if (!std::isfinite(f) || !std::isfinite(b))
        throw ParseError(ErrorCode::nonfinite_rate, rp.line, "non-finite rate");
    }
    auto index_of = [&](const std::string& l) {
      return static_cast<VertexId>(std::find(labels.begin(), labels.end(), l) - labels.begin());
    };
    pairs.push_back({index_of(rp.u), index_of(rp.v), std::move(f), std::move(b)});
  }
  return Digraph<S>(labels, std::move(pairs));
}

inline AnyGraph assemble_any(std::vector<std::string> labels, const std::vector<RawPair>& raw,
                             bool require_irreducibility) {
  for (const auto& rp : raw)
    for (const auto* l : {&rp.u, &rp.v})
      if (std::find(labels.begin(), labels.end(), *l) == labels.end()) labels.push_back(*l);
  bool decimal = std::any_of(raw.begin(), raw.end(), [](const RawPair& p) {
    return p.forward.decimal || p.backward.decimal;
  });
  AnyGraph g = decimal ? AnyGraph(assemble<double>(labels, raw))
                       : AnyGraph(assemble<Rational>(labels, raw));
  if (require_irreducibility)
    std::visit([](const auto& gr) {
      if (!is_irreducible(gr))
        throw ParseError(ErrorCode::not_irreducible, 0, "graph is not irreducible");
    }, g);
  return g;
}

}  // namespace detail

/// Parses the edge-list text format: one pair per line, `U V RATE_FWD RATE_BWD`.
/// Rates written as integers or p/q are exact; any rate with a decimal point or
/// exponent switches the whole graph to floating point. `#` starts a comment.
inline AnyGraph parse_graph(std::string_view text, bool require_irreducibility = true) {
  std::vector<detail::RawPair> raw;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok{std::istream_iterator<std::string>(ls),
                                 std::istream_iterator<std::string>()};
    if (tok.empty()) continue;
    if (tok.size() != 4)
      throw ParseError(ErrorCode::malformed_line, lineno,
                       "expected 'U V RATE_FWD RATE_BWD', got " + std::to_string(tok.size()) +
                           " fields");
    raw.push_back({tok[0], tok[1], {tok[2], detail::looks_decimal(tok[2])},
                   {tok[3], detail::looks_decimal(tok[3])}, lineno});
  }
  if (raw.empty()) throw ParseError(ErrorCode::malformed_line, 0, "no edges in document");
  return detail::assemble_any({}, raw, require_irreducibility);
}

/// JSON form: {"vertices": [...]?, "pairs": [{"u", "v", "forward", "backward"}]}.
/// Rates may be JSON numbers or strings in the edge-list rate syntax.
inline AnyGraph parse_graph_json(const nlohmann::json& doc, bool require_irreducibility = true) {
  using nlohmann::json;
  if (!doc.is_object() || !doc.contains("pairs") || !doc["pairs"].is_array())
    throw ParseError(ErrorCode::malformed_line, 0, "JSON graph needs a 'pairs' array");
  std::vector<std::string> labels;
  if (doc.contains("vertices")) {
    for (const auto& v : doc["vertices"]) {
      if (!v.is_string()) throw ParseError(ErrorCode::malformed_line, 0, "vertex labels must be strings");
      labels.push_back(v.get<std::string>());
    }
  }
  auto rate = [](const json& r, std::size_t idx) -> detail::RawRate {
    if (r.is_string()) {
      auto s = r.get<std::string>();
      return {s, detail::looks_decimal(s)};
    }
    if (r.is_number_integer()) return {std::to_string(r.get<long long>()), false};
    if (r.is_number_float()) {
      std::ostringstream os;
      os.precision(17);
      os << std::scientific << r.get<double>();
      return {os.str(), true};
    }
    throw ParseError(ErrorCode::malformed_line, idx + 1, "rate must be a number or string");
  };
  std::vector<detail::RawPair> raw;
  std::size_t i = 0;
  for (const auto& p : doc["pairs"]) {
    if (!p.is_object() || !p.contains("u") || !p.contains("v") || !p.contains("forward") ||
        !p.contains("backward") || !p["u"].is_string() || !p["v"].is_string())
      throw ParseError(ErrorCode::malformed_line, i + 1, "pair entry needs u, v, forward, backward");
    raw.push_back({p["u"].get<std::string>(), p["v"].get<std::string>(), rate(p["forward"], i),
                   rate(p["backward"], i), i + 1});
    ++i;
  }
  return detail::assemble_any(std::move(labels), raw, require_irreducibility);
}

inline std::string format_rate(const Rational& q) { return q.str(); }

/// Shortest round-tripping decimal that still reads back as a float.
inline std::string format_rate(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  std::string s = os.str();
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

template <Scalar S>
std::string to_edge_list(const Digraph<S>& g) {
  std::ostringstream os;
  os << "# " << g.vertex_count() << " vertices, " << g.pair_count() << " pairs ("
     << ScalarTraits<S>::name() << " rates)\n";
  for (const auto& p : g.pairs())
    os << g.label(p.u) << ' ' << g.label(p.v) << ' ' << format_rate(p.forward) << ' '
       << format_rate(p.backward) << '\n';
  return os.str();
}

template <Scalar S>
nlohmann::json to_json(const Digraph<S>& g) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : g.pairs())
    pairs.push_back({{"u", g.label(p.u)},
                     {"v", g.label(p.v)},
                     {"forward", format_rate(p.forward)},
                     {"backward", format_rate(p.backward)}});
  return {{"vertices", g.labels()}, {"pairs", pairs}};
}

/// Reads a graph file; `.json` selects the JSON form, anything else the edge list.
inline AnyGraph load_graph(const std::string& path, bool require_irreducibility = true) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open graph file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ErrorCode::malformed_line, 0, e.what());
    }
    return parse_graph_json(doc, require_irreducibility);
  }
  return parse_graph(text, require_irreducibility);
}

/// Resolves "u>v" into an oriented edge of g.
template <Scalar S>
OrientedEdge parse_edge(const Digraph<S>& g, std::string_view spec) {
  auto gt = spec.find('>');
  if (gt == std::string_view::npos)
    throw Error(ErrorCode::unknown_edge, "edge '" + std::string(spec) + "' is not of the form u>v");
  auto u = g.vertex(spec.substr(0, gt));
  auto v = g.vertex(spec.substr(gt + 1));
  auto e = g.find_edge(u, v);
  if (!e) throw Error(ErrorCode::unknown_edge, "no pair joins " + std::string(spec));
  return *e;
}

/// Resolves a pair given as "u-v", "u>v", or a 0-based pair index.
template <Scalar S>
PairId parse_pair(const Digraph<S>& g, std::string_view spec) {
  for (char sep : {'-', '>'}) {
    auto pos = spec.find(sep);
    if (pos != std::string_view::npos) {
      auto u = g.find_vertex(spec.substr(0, pos));
      auto v = g.find_vertex(spec.substr(pos + 1));
      if (u && v) {
        if (auto p = g.find_pair(*u, *v)) return *p;
        throw Error(ErrorCode::unknown_edge, "no pair joins " + std::string(spec));
      }
    }
  }
  if (!spec.empty() && std::all_of(spec.begin(), spec.end(), [](unsigned char c) { return std::isdigit(c); })) {
    auto idx = std::stoul(std::string(spec));
    if (idx < g.pair_count()) return static_cast<PairId>(idx);
  }
  throw Error(ErrorCode::unknown_edge, "cannot resolve pair '" + std::string(spec) + "'");
}

}  // namespace treesurgeon
