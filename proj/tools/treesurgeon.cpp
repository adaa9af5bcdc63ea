// treesurgeon: command-line front end.
// Exit status: 0 success, 1 verification failure, 2 usage or input error.

#include "treesurgeon/treesurgeon.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace ts = treesurgeon;
using ts::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_verification = 1;
constexpr int exit_usage = 2;

struct Common {
  std::string graph;
  std::string arithmetic = "auto";
  std::string backend = "auto";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 0;
};

struct Loaded {
  ts::AnyGraph graph;
  std::string digest;
};

Loaded load(const Common& c) {
  if (c.graph.empty()) throw ts::Error(ts::ErrorCode::invalid_argument, "--graph is required");
  Loaded l{ts::load_graph(c.graph), ts::file_sha256(c.graph)};
  if (c.arithmetic == "float") {
    if (auto* g = std::get_if<ts::Digraph<ts::Rational>>(&l.graph)) l.graph = ts::to_float(*g);
  } else if (c.arithmetic == "exact") {
    if (std::holds_alternative<ts::Digraph<double>>(l.graph))
      throw ts::Error(ts::ErrorCode::invalid_argument, "graph has decimal rates; exact arithmetic is unavailable");
  }
  return l;
}

/// Resolved options of a subcommand, as they ended up after CLI, env and config.
json resolved_config(const CLI::App& app) {
  json j = json::object();
  for (const auto* opt : app.get_options()) {
    const auto name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    const auto res = opt->reduced_results();
    if (res.empty()) {
      if (!opt->get_default_str().empty()) j[name] = opt->get_default_str();
      continue;
    }
    if (opt->get_expected_max() > 1 || res.size() > 1)
      j[name] = res;
    else
      j[name] = res.front();
  }
  return j;
}

void emit(const json& doc, const std::string& out) {
  ts::validate_report(doc);
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw ts::Error(ts::ErrorCode::invalid_argument, "cannot write '" + out + "'");
  f << doc.dump(2) << '\n';
}

json start(const std::string& command, const Common& c, const Loaded& l, const CLI::App& app) {
  ts::ReportContext ctx;
  ctx.command = command;
  ctx.seed = c.seed;
  ctx.arithmetic = ts::arithmetic_of(l.graph);
  ctx.input_path = c.graph;
  ctx.input_digest = l.digest;
  ctx.config = resolved_config(app);
  return ts::envelope(ctx);
}

template <ts::Scalar S>
ts::TreeConstraint constraint_from(const ts::Digraph<S>& g, const std::vector<std::string>& avoid,
                                   const std::vector<std::string>& require) {
  std::vector<ts::OrientedEdge> a, r;
  for (const auto& s : avoid) a.push_back(ts::parse_edge(g, s));
  for (const auto& s : require) r.push_back(ts::parse_edge(g, s));
  return ts::TreeConstraint(a, r);
}

template <ts::Scalar S>
std::vector<ts::PairId> pins_from(const ts::Digraph<S>& g, const std::vector<std::string>& specs) {
  std::vector<ts::PairId> out;
  for (const auto& s : specs) out.push_back(ts::parse_pair(g, s));
  return out;
}

template <ts::Scalar S>
json constraint_json(const ts::Digraph<S>& g, const ts::TreeConstraint& c) {
  json a = json::array(), r = json::array();
  for (const auto& e : c.avoid()) a.push_back(g.edge_name(e));
  for (const auto& e : c.require()) r.push_back(g.edge_name(e));
  return {{"avoid", a}, {"require", r}};
}

/// Draws a positive random rate in the graph's arithmetic.
template <ts::Scalar S>
S sample_rate(ts::CounterRng& rng) {
  if constexpr (ts::is_exact_v<S>)
    return ts::draw_rate<S>(ts::RationalRates{50, 50}, rng);
  else
    return ts::draw_rate<S>(ts::UniformRates{0.5, 3.0}, rng);
}

// ---------------------------------------------------------------------------

struct EnumArgs {
  std::string root;
  std::vector<std::string> avoid, require;
  std::size_t limit = 1000;
};

int cmd_enum(const Common& c, const EnumArgs& a, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("enum", c, l, app);
  std::visit([&](const auto& g) {
    using S = typename std::decay_t<decltype(g)>::scalar_type;
    const auto cons = constraint_from(g, a.avoid, a.require);
    const auto root = g.vertex(a.root);
    json trees = json::array();
    std::size_t count = 0;
    S total(0);
    ts::for_each_rooted_tree(g, root, cons, [&](const ts::RootedTree& t) {
      ++count;
      total += t.weight(g);
      if (trees.size() < a.limit) trees.push_back(ts::tree_json(g, t));
    });
    doc["result"] = {{"root", g.label(root)}, {"constraint", constraint_json(g, cons)}, {"count", count},
                     {"total", ts::to_json_value(total)}, {"trees", trees}, {"truncated", count > trees.size()}};
  }, l.graph);
  emit(doc, c.out);
  return exit_ok;
}

struct PolyArgs {
  std::string root;
  std::vector<std::string> avoid, require;
  bool rescaled = false;
};

int cmd_poly(const Common& c, const PolyArgs& a, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("poly", c, l, app);
  const auto backend = ts::parse_backend(c.backend);
  std::visit([&](const auto& g) {
    const auto cons = constraint_from(g, a.avoid, a.require);
    const auto root = g.vertex(a.root);
    const auto v = a.rescaled ? ts::rescaled_poly(g, root, cons, backend) : ts::tree_poly(g, root, cons, backend);
    doc["result"] = {{"root", g.label(root)}, {"constraint", constraint_json(g, cons)}, {"rescaled", a.rescaled},
                     {"value", ts::to_json_value(v.value)}, {"backend", ts::to_string(v.backend)}};
  }, l.graph);
  emit(doc, c.out);
  return exit_ok;
}

struct DecomposeArgs {
  std::vector<std::string> roots, pins, avoid, require;
  bool rescaled = false;
};

int cmd_decompose(const Common& c, const DecomposeArgs& a, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("decompose", c, l, app);
  const auto backend = ts::parse_backend(c.backend);
  bool ok = true;
  std::visit([&](const auto& g) {
    const auto pins = pins_from(g, a.pins);
    const auto extra = constraint_from(g, a.avoid, a.require);
    std::vector<ts::VertexId> roots;
    for (const auto& r : a.roots) roots.push_back(g.vertex(r));
    if (roots.empty())
      for (ts::VertexId x = 0; x < g.vertex_count(); ++x) roots.push_back(x);
    json vectors = json::array();
    for (auto x : roots) {
      const auto tv = a.rescaled ? ts::decompose_rescaled(g, x, std::span<const ts::PairId>(pins), extra, backend)
                                 : ts::decompose(g, x, std::span<const ts::PairId>(pins), extra, backend);
      auto j = ts::tree_vector_json(g, tv);
      if (!a.rescaled) {
        // the entries must add up to the polynomial under the extra constraint alone
        const bool sums = ts::nearly_equal(tv.total(), ts::tree_poly(g, x, extra, backend).value);
        j["sums_to_tree_poly"] = sums;
        ok = ok && sums;
      }
      vectors.push_back(std::move(j));
    }
    doc["result"] = {{"pinned", ts::pairs_json(g, std::span<const ts::PairId>(pins))},
                     {"extra", constraint_json(g, extra)}, {"rescaled", a.rescaled}, {"vectors", vectors}};
  }, l.graph);
  doc["verified"] = ok;
  emit(doc, c.out);
  return ok ? exit_ok : exit_verification;
}

struct CoplanarityArgs {
  std::vector<std::string> pins;
  std::string csv;
  double tolerance = ts::default_rank_tolerance;
  bool no_sigmas = false;
};

int cmd_coplanarity(const Common& c, const CoplanarityArgs& a, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("coplanarity", c, l, app);
  const auto backend = ts::parse_backend(c.backend);
  bool ok = true;
  std::visit([&](const auto& g) {
    const auto pins = pins_from(g, a.pins);
    const std::span<const ts::PairId> ps(pins);
    if (pins.size() == 2) {
      const auto r = ts::two_edge_analysis(g, pins[0], pins[1], backend, a.tolerance);
      doc["result"] = ts::coplanarity_json(g, r.coplanarity);
      doc["result"]["two_edge"] = ts::two_edge_json(g, r);
      ok = r.coplanarity.all_orthogonal && r.coplanarity.certificate.rank <= 3;
    } else {
      const auto r = ts::check_coplanarity(g, ps, backend, a.tolerance, !a.no_sigmas || pins.size() == 1);
      doc["result"] = ts::coplanarity_json(g, r);
      ok = r.all_orthogonal;
      if (pins.size() == 1) {
        const auto so = ts::check_second_order(g, pins[0], backend);
        doc["result"]["second_order"] = ts::second_order_json(g, so);
        ok = ok && so.holds && r.certificate.rank <= 2;
        if (!a.csv.empty()) {
          std::ofstream f(a.csv);
          if (!f) throw ts::Error(ts::ErrorCode::invalid_argument, "cannot write '" + a.csv + "'");
          f << ts::plane_data_csv(g, r);
        }
      } else if (!a.csv.empty()) {
        ts::plane_data_csv(g, r);  // throws wrong_arity
      }
      if (r.too_few_vertices) std::cerr << "warning: too few vertices for the rank to exceed n+1\n";
    }
  }, l.graph);
  doc["verified"] = ok;
  emit(doc, c.out);
  return ok ? exit_ok : exit_verification;
}

struct ConjectureArgs {
  std::vector<std::string> pins;
  std::size_t vertices = 13, pin_count = 3, trials = 10;
  double density = 1.0;
  bool no_sigmas = false;
};

/// Random pins: distinct reversible pairs whose joint removal keeps the graph irreducible.
template <ts::Scalar S>
std::vector<ts::PairId> random_pins(const ts::Digraph<S>& g, std::size_t n, ts::CounterRng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<ts::PairId> pins;
    while (pins.size() < n) {
      auto p = static_cast<ts::PairId>(rng.uniform_int(0, g.pair_count() - 1));
      if (std::find(pins.begin(), pins.end(), p) == pins.end()) pins.push_back(p);
    }
    if (ts::stays_connected_without(g, std::span<const ts::PairId>(pins))) return pins;
  }
  throw ts::Error(ts::ErrorCode::disconnected_without_pins, "no admissible set of pins found");
}

int cmd_conjecture(const Common& c, const ConjectureArgs& a, const CLI::App& app) {
  const auto backend = ts::parse_backend(c.backend);
  const std::uint64_t seed = c.seed.value_or(0);
  const bool from_file = !c.graph.empty();
  const std::size_t trials = from_file ? 1 : a.trials;
  std::vector<std::string> lines(trials);
  std::vector<int> status(trials, exit_ok);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr failure;
  const auto cfg = resolved_config(app);

  auto run_trial = [&](std::size_t t) {
    Loaded l;
    if (from_file) {
      l = load(c);
    } else {
      const std::uint64_t gseed = seed * 1000003ULL + t;
      l.graph = ts::random_graph<ts::Rational>(a.vertices, a.density, ts::RationalRates{}, gseed);
      if (c.arithmetic == "float") l.graph = ts::to_float(std::get<ts::Digraph<ts::Rational>>(l.graph));
      l.digest = ts::sha256_hex("random:" + std::to_string(a.vertices) + ":" + std::to_string(a.density) + ":" +
                                std::to_string(gseed));
    }
    ts::ReportContext ctx{"conjecture", c.seed, ts::arithmetic_of(l.graph), from_file ? c.graph : "random",
                          l.digest, cfg};
    auto doc = ts::envelope(ctx);
    doc["trial"] = t;
    std::visit([&](const auto& g) {
      ts::CounterRng rng(seed, 0x70696e73ULL + t);
      const auto pins = a.pins.empty() ? random_pins(g, a.pin_count, rng) : pins_from(g, a.pins);
      const auto r = ts::conjecture_test(g, std::span<const ts::PairId>(pins), backend, !a.no_sigmas);
      doc["result"] = ts::coplanarity_json(g, r);
      doc["result"]["sigma_candidates"] = ts::sigma_candidate_count(pins.size());
      if (!r.rank_is_n_plus_one()) {
        std::lock_guard lock(err_mutex);
        std::cerr << "counterexample candidate in trial " << t << ": rank " << r.certificate.rank << " for "
                  << pins.size() << " pins\n";
      }
      if (!r.all_orthogonal) status[t] = exit_verification;
    }, l.graph);
    ts::validate_report(doc);
    lines[t] = doc.dump();
  };
  auto worker = [&] {
    try {
      for (std::size_t t; (t = next++) < trials;) run_trial(t);
    } catch (...) {
      std::lock_guard lock(err_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  std::size_t jobs = c.jobs ? c.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, trials);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!c.out.empty() && c.out != "-") {
    file.open(c.out);
    if (!file) throw ts::Error(ts::ErrorCode::invalid_argument, "cannot write '" + c.out + "'");
    os = &file;
  }
  for (const auto& line : lines) *os << line << '\n';
  return *std::max_element(status.begin(), status.end());
}

int cmd_stationary(const Common& c, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("stationary", c, l, app);
  bool ok = true;
  std::visit([&](const auto& g) {
    const auto p = ts::stationary(g, ts::parse_backend(c.backend));
    const auto k = ts::stationary_by_kernel(g);
    for (ts::VertexId x = 0; x < g.vertex_count(); ++x) ok = ok && ts::nearly_equal(p[x], k[x]);
    doc["result"] = {{"matrix_tree", ts::stationary_json(g, p)}, {"kernel", ts::stationary_json(g, k)}, {"agree", ok}};
  }, l.graph);
  doc["verified"] = ok;
  emit(doc, c.out);
  return ok ? exit_ok : exit_verification;
}

int cmd_currents(const Common& c, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("currents", c, l, app);
  bool ok = true;
  std::visit([&](const auto& g) {
    using S = typename std::decay_t<decltype(g)>::scalar_type;
    const auto p = ts::stationary(g, ts::parse_backend(c.backend));
    const auto j = ts::currents(g, p);
    const auto bal = ts::vertex_balance(g, j);
    double scale = 0.0;
    for (ts::PairId e = 0; e < g.pair_count(); ++e)
      scale = std::max(scale, ts::to_double(S(g.pair(e).forward * p[g.pair(e).u])));
    json b = json::array();
    for (ts::VertexId x = 0; x < g.vertex_count(); ++x) {
      ok = ok && ts::negligible(bal[x], scale);
      b.push_back({{"vertex", g.label(x)}, {"net_out", ts::to_json_value(bal[x])}});
    }
    doc["result"] = {{"currents", ts::currents_json(g, j)}, {"vertex_balance", b},
                     {"detailed_balance", ts::is_detailed_balanced(g)}};
  }, l.graph);
  doc["verified"] = ok;
  emit(doc, c.out);
  return ok ? exit_ok : exit_verification;
}

struct LinearityArgs {
  std::vector<std::string> inputs;
  std::size_t samples = 5;
};

int cmd_linearity(const Common& c, const LinearityArgs& a, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("linearity", c, l, app);
  const auto backend = ts::parse_backend(c.backend);
  bool ok = true;
  std::visit([&](const auto& g) {
    using S = typename std::decay_t<decltype(g)>::scalar_type;
    const auto pins = pins_from(g, a.inputs);
    ts::CounterRng rng(c.seed.value_or(0), 0x6c696eULL);
    if (pins.size() == 1) {
      const auto zv = ts::z_vectors(g, pins[0], backend);
      const auto lc = ts::lambda_coefficients(zv);
      std::vector<std::pair<S, S>> samples;
      for (std::size_t i = 0; i < a.samples; ++i) samples.push_back({sample_rate<S>(rng), sample_rate<S>(rng)});
      const auto res = ts::verify_linearity(g, pins[0], lc, samples);
      const auto quad = ts::check_quadratic_terms(g, pins[0]);
      const auto& self = lc.coefficients[pins[0]];
      const bool identity = ts::negligible(self[0], 1.0) && ts::nearly_equal(self[1], S(1));
      doc["result"] = ts::linearity_json(g, lc);
      json z = json::array();
      for (ts::PairId e = 0; e < g.pair_count(); ++e)
        z.push_back({{"pair", ts::pair_json(g, e)}, {"z", ts::to_json_values(std::vector<S>(zv.z[e].begin(), zv.z[e].end()))}});
      doc["result"]["z0"] = ts::to_json_values(std::vector<S>(zv.z0.begin(), zv.z0.end()));
      doc["result"]["z"] = z;
      doc["result"]["residuals"] = ts::residual_json(res);
      doc["result"]["quadratic_free"] = quad.quadratic_free;
      ok = lc.consistent && res.within_tolerance && quad.quadratic_free && identity;
    } else if (pins.size() == 2) {
      try {
        const auto wv = ts::w_vectors(g, std::span<const ts::PairId>(pins), backend);
        const auto lc = ts::mu_coefficients(wv);
        std::vector<ts::PinnedRates<S>> samples;
        for (std::size_t i = 0; i < a.samples; ++i) {
          ts::PinnedRates<S> r;
          for (int k = 0; k < 4; ++k) r.push_back(sample_rate<S>(rng));
          samples.push_back(std::move(r));
        }
        const auto res = ts::verify_multi_linearity(g, lc, samples);
        doc["result"] = ts::linearity_json(g, lc);
        doc["result"]["residuals"] = ts::residual_json(res);
        doc["result"]["quadratic_terms"] = wv.quadratic_terms;
        ok = lc.consistent && res.within_tolerance && wv.quadratic_terms == 0;
      } catch (const ts::RankDeficientError& e) {
        std::cerr << "error: " << e.what() << '\n';
        doc["result"] = {{"input_pairs", ts::pairs_json(g, std::span<const ts::PairId>(pins))},
                         {"coefficients", json::array()},
                         {"rank_certificates", json::array({ts::certificate_json(g, e.certificate())})},
                         {"residuals", json::object()},
                         {"rank_deficient", true}};
        ok = false;
      }
    } else {
      throw ts::Error(ts::ErrorCode::wrong_arity, "linearity takes one or two --input pairs");
    }
  }, l.graph);
  doc["verified"] = ok;
  emit(doc, c.out);
  return ok ? exit_ok : exit_verification;
}

struct SimulateArgs {
  std::optional<double> horizon, burn_in;
  double jumps = 1e6;
  std::size_t replicas = 10, batches = 32;
};

int cmd_simulate(const Common& c, const SimulateArgs& a, const CLI::App& app) {
  const auto l = load(c);
  auto doc = start("simulate", c, l, app);
  std::visit([&](const auto& g) {
    ts::SimulationOptions opt;
    opt.horizon = a.horizon.value_or(ts::horizon_for_mean_jumps(g, a.jumps));
    opt.burn_in = a.burn_in;
    opt.seed = c.seed.value_or(0);
    opt.batches = a.batches;
    const auto reps = ts::simulate_replicas(g, opt, a.replicas, c.jobs);
    const auto gf = ts::to_float(g);
    const auto j = ts::currents(gf, ts::Backend::determinant);
    json replicas = json::array();
    std::vector<std::size_t> within(g.pair_count(), 0);
    for (const auto& st : reps) {
      auto rj = ts::trajectory_json(st);
      const auto est = ts::estimate_currents(st);
      json z = json::array();
      for (ts::PairId e = 0; e < g.pair_count(); ++e) {
        const double dev = est.mean[e] - j[e];
        z.push_back(est.standard_error[e] > 0 ? json(dev / est.standard_error[e]) : json(nullptr));
        if (std::fabs(dev) <= 3.0 * est.standard_error[e]) ++within[e];
      }
      rj["z_scores"] = z;
      replicas.push_back(std::move(rj));
    }
    doc["result"] = {{"horizon", opt.horizon}, {"burn_in", opt.burn_in.value_or(0.05 * opt.horizon)},
                     {"rates_converted_to_float", ts::arithmetic_of(l.graph) == ts::Arithmetic::exact},
                     {"analytic", j.j}, {"within_3_standard_errors", within}, {"replicas", replicas}};
  }, l.graph);
  emit(doc, c.out);
  return exit_ok;
}

int cmd_selftest(const Common& c, bool inject_fault, const CLI::App& app) {
  ts::ReportContext ctx{"selftest", c.seed, ts::Arithmetic::exact, "fixtures", ts::sha256_hex("fixtures"),
                        resolved_config(app)};
  auto doc = ts::envelope(ctx);
  const auto checks = ts::run_selftest({inject_fault});
  json arr = json::array();
  bool ok = true;
  for (const auto& ch : checks) {
    arr.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    std::cerr << (ch.passed ? "PASS " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : " (" + ch.detail + ")")
              << '\n';
    ok = ok && ch.passed;
  }
  doc["result"] = {{"checks", arr}, {"inject_fault", inject_fault}};
  doc["verified"] = ok;
  emit(doc, c.out);
  return ok ? exit_ok : exit_verification;
}

void add_common(CLI::App* sub, Common& c, bool graph = true) {
  if (graph) sub->add_option("-g,--graph", c.graph, "graph file (edge list or .json)");
  sub->add_option("--arithmetic", c.arithmetic, "auto | exact | float")
      ->check(CLI::IsMember({"auto", "exact", "float"}))
      ->capture_default_str();
  sub->add_option("--backend", c.backend, "auto | enum | det | both")
      ->check(CLI::IsMember({"auto", "enum", "det", "both"}))
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "random seed")->envname("TREESURGEON_SEED");
  sub->add_option("-o,--out", c.out, "output path (default stdout)");
  sub->add_option("-j,--jobs", c.jobs, "worker threads (0 = available parallelism)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rooted spanning trees, coplanarity and current linearity on weighted digraphs"};
  app.set_config("--config", "", "TOML or INI file with option defaults; command-line flags win");
  app.set_version_flag("--version", std::string(ts::tool_version));
  app.require_subcommand(1);
  app.fallthrough();  // --config may also follow the subcommand
  Common common;

  EnumArgs ea;
  auto* s_enum = app.add_subcommand("enum", "list rooted spanning trees");
  add_common(s_enum, common);
  s_enum->add_option("--root", ea.root, "root vertex")->required();
  s_enum->add_option("--avoid", ea.avoid, "edge u>v to delete");
  s_enum->add_option("--require", ea.require, "edge u>v every tree must use");
  s_enum->add_option("--limit", ea.limit, "maximum trees listed")->capture_default_str();

  PolyArgs pa;
  auto* s_poly = app.add_subcommand("poly", "evaluate a conditioned tree polynomial");
  add_common(s_poly, common);
  s_poly->add_option("--root", pa.root, "root vertex")->required();
  s_poly->add_option("--avoid", pa.avoid, "edge u>v to delete");
  s_poly->add_option("--require", pa.require, "edge u>v every tree must use");
  s_poly->add_flag("--rescaled", pa.rescaled, "divide out the required rates");

  DecomposeArgs da;
  auto* s_dec = app.add_subcommand("decompose", "tree vector over the statuses of pinned pairs");
  add_common(s_dec, common);
  s_dec->add_option("--root", da.roots, "root vertices (default all)");
  s_dec->add_option("--pin", da.pins, "pinned pair: u-v or pair index")->required();
  s_dec->add_option("--avoid", da.avoid, "extra edge u>v to delete");
  s_dec->add_option("--require", da.require, "extra edge u>v every tree must use");
  s_dec->add_flag("--rescaled", da.rescaled, "divide out the pinned rates");

  CoplanarityArgs ca;
  auto* s_cop = app.add_subcommand("coplanarity", "rank certificate of the tree vectors and sigma checks");
  add_common(s_cop, common);
  s_cop->add_option("--pin", ca.pins, "pinned pair: u-v or pair index")->required();
  s_cop->add_option("--csv", ca.csv, "write plane data (one pin only)");
  s_cop->add_option("--tolerance", ca.tolerance, "float-mode relative rank tolerance")->capture_default_str();
  s_cop->add_flag("--no-sigmas", ca.no_sigmas, "skip sigma candidates for three or more pins");

  ConjectureArgs ja;
  auto* s_conj = app.add_subcommand("conjecture", "rank n+1 sweep over random graphs (NDJSON)");
  add_common(s_conj, common);
  s_conj->add_option("--pin", ja.pins, "pinned pairs (with --graph)");
  s_conj->add_option("--vertices", ja.vertices, "vertices of random graphs")->capture_default_str();
  s_conj->add_option("--pins", ja.pin_count, "pins per random trial")->capture_default_str();
  s_conj->add_option("--trials", ja.trials, "random trials")->capture_default_str();
  s_conj->add_option("--density", ja.density, "pair density of random graphs")->capture_default_str();
  s_conj->add_flag("--no-sigmas", ja.no_sigmas, "skip sigma candidates");

  auto* s_stat = app.add_subcommand("stationary", "stationary distribution by two routes");
  add_common(s_stat, common);
  auto* s_cur = app.add_subcommand("currents", "stationary currents and vertex balance");
  add_common(s_cur, common);

  LinearityArgs la;
  auto* s_lin = app.add_subcommand("linearity", "affine dependence of currents on input currents");
  add_common(s_lin, common);
  s_lin->add_option("--input", la.inputs, "input pair(s)")->required();
  s_lin->add_option("--samples", la.samples, "random input-rate samples to verify")->capture_default_str();

  SimulateArgs sa;
  auto* s_sim = app.add_subcommand("simulate", "Gillespie simulation with batch-means errors");
  add_common(s_sim, common);
  s_sim->add_option("--horizon", sa.horizon, "simulated time including burn-in");
  s_sim->add_option("--jumps", sa.jumps, "mean jumps when no horizon is given")->capture_default_str();
  s_sim->add_option("--burn-in", sa.burn_in, "discarded initial time (default 5% of horizon)");
  s_sim->add_option("--replicas", sa.replicas, "independent replicas")->capture_default_str();
  s_sim->add_option("--batches", sa.batches, "batches for standard errors (>= 20)")->capture_default_str();

  bool inject_fault = false;
  auto* s_self = app.add_subcommand("selftest", "identity suite on bundled fixtures");
  add_common(s_self, common, false);
  s_self->add_flag("--inject-fault", inject_fault, "corrupt one rate; the suite must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*s_enum) return cmd_enum(common, ea, *s_enum);
    if (*s_poly) return cmd_poly(common, pa, *s_poly);
    if (*s_dec) return cmd_decompose(common, da, *s_dec);
    if (*s_cop) return cmd_coplanarity(common, ca, *s_cop);
    if (*s_conj) return cmd_conjecture(common, ja, *s_conj);
    if (*s_stat) return cmd_stationary(common, *s_stat);
    if (*s_cur) return cmd_currents(common, *s_cur);
    if (*s_lin) return cmd_linearity(common, la, *s_lin);
    if (*s_sim) return cmd_simulate(common, sa, *s_sim);
    if (*s_self) return cmd_selftest(common, inject_fault, *s_self);
  } catch (const ts::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ts::ErrorCode::verification_failure ? exit_verification : exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
