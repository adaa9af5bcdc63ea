#pragma once

#include "treesurgeon/markov.hpp"
#include "treesurgeon/random.hpp"

#include <thread>

namespace treesurgeon {

inline constexpr std::size_t min_batches = 20;

struct TrajectoryStats {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double burn_in = 0.0;
  double total_time = 0.0;               // after burn-in
  std::vector<double> occupation_time;   // per vertex
  std::vector<std::int64_t> signed_crossings;  // per pair, forward minus backward
  std::uint64_t jumps = 0;               // after burn-in
  // equal-time batches covering [burn_in, burn_in + total_time)
  double batch_time = 0.0;
  std::vector<std::vector<double>> batch_occupation;
  std::vector<std::vector<std::int64_t>> batch_crossings;
};

struct SimulationOptions {
  double horizon = 0.0;            // total simulated time including burn-in
  std::optional<double> burn_in;   // default 5% of horizon
  std::uint64_t seed = 0;
  std::size_t batches = 32;
  VertexId start = 0;
};

namespace detail {

struct JumpTable {
  std::vector<double> exit;
  std::vector<std::vector<std::pair<double, OrientedEdge>>> cumulative;
};

template <Scalar S>
JumpTable jump_table(const Digraph<S>& g) {
  JumpTable t;
  t.exit.assign(g.vertex_count(), 0.0);
  t.cumulative.resize(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v)
    for (const auto& e : g.out_edges(v)) {
      const double r = to_double(g.rate(e));
      if (!std::isfinite(r))
        throw Error(ErrorCode::nonfinite_rate, "rate of " + g.edge_name(e) + " is not finite in float");
      t.exit[v] += r;
      t.cumulative[v].push_back({t.exit[v], e});
    }
  return t;
}

}  // namespace detail

/// Exact-jump trajectory in float arithmetic; deterministic per (seed, stream).
template <Scalar S>
TrajectoryStats simulate(const Digraph<S>& g, const SimulationOptions& opt, std::uint64_t stream = 0) {
  require_irreducible(g);
  if (!(opt.horizon > 0.0) || !std::isfinite(opt.horizon))
    throw Error(ErrorCode::invalid_argument, "horizon must be positive and finite");
  const double burn = opt.burn_in.value_or(0.05 * opt.horizon);
  if (burn < 0.0 || burn >= opt.horizon) throw Error(ErrorCode::invalid_argument, "burn-in must lie in [0, horizon)");
  if (opt.batches < min_batches)
    throw Error(ErrorCode::invalid_argument, "at least " + std::to_string(min_batches) + " batches are required");
  if (opt.start >= g.vertex_count()) throw Error(ErrorCode::unknown_vertex, "start vertex out of range");
  const auto table = detail::jump_table(g);

  TrajectoryStats st;
  st.seed = opt.seed;
  st.stream = stream;
  st.burn_in = burn;
  st.total_time = opt.horizon - burn;
  st.batch_time = st.total_time / double(opt.batches);
  st.occupation_time.assign(g.vertex_count(), 0.0);
  st.signed_crossings.assign(g.pair_count(), 0);
  st.batch_occupation.assign(opt.batches, std::vector<double>(g.vertex_count(), 0.0));
  st.batch_crossings.assign(opt.batches, std::vector<std::int64_t>(g.pair_count(), 0));

  // batches are visited in time order; k only moves forward
  std::size_t k = 0;
  auto boundary = [&](std::size_t i) { return burn + double(i) * st.batch_time; };
  auto advance = [&](double time) {
    while (k + 1 < opt.batches && time >= boundary(k + 1)) ++k;
  };

  CounterRng rng(opt.seed, stream);
  VertexId x = opt.start;
  double t = 0.0;
  while (t < opt.horizon) {
    const double dwell = rng.exponential(table.exit[x]);
    // occupation of x on [t, t + dwell) clipped to the measured window, split over batches
    double a = std::max(t, burn);
    const double b = std::min(t + dwell, opt.horizon);
    while (a < b) {
      advance(a);
      const double edge = k + 1 == opt.batches ? b : std::min(b, boundary(k + 1));
      st.batch_occupation[k][x] += edge - a;
      a = edge;
    }
    t += dwell;
    if (t >= opt.horizon) break;
    const double u = rng.uniform01() * table.exit[x];
    const auto& cum = table.cumulative[x];
    std::size_t i = 0;
    while (i + 1 < cum.size() && cum[i].first <= u) ++i;
    const auto& e = cum[i].second;
    if (t >= burn) {
      advance(t);
      const std::int64_t d = e.sign == Sign::plus ? 1 : -1;
      st.signed_crossings[e.pair] += d;
      st.batch_crossings[k][e.pair] += d;
      ++st.jumps;
    }
    x = e.target;
  }
  for (const auto& bo : st.batch_occupation)
    for (std::size_t v = 0; v < bo.size(); ++v) st.occupation_time[v] += bo[v];
  return st;
}

struct Estimate {
  std::vector<double> mean;
  std::vector<double> standard_error;
};

namespace detail {

inline Estimate batch_means(const std::vector<std::vector<double>>& per_batch) {
  const std::size_t k = per_batch.size();
  const std::size_t m = per_batch.front().size();
  Estimate est{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (const auto& row : per_batch)
    for (std::size_t i = 0; i < m; ++i) est.mean[i] += row[i] / double(k);
  for (const auto& row : per_batch)
    for (std::size_t i = 0; i < m; ++i) est.standard_error[i] += (row[i] - est.mean[i]) * (row[i] - est.mean[i]);
  for (auto& s : est.standard_error) s = std::sqrt(s / double(k - 1) / double(k));
  return est;
}

inline void check_length(const TrajectoryStats& st) {
  if (!(st.total_time > 0.0)) throw Error(ErrorCode::too_short, "no time was recorded after burn-in");
  if (st.batch_crossings.size() < min_batches)
    throw Error(ErrorCode::too_short, "fewer than " + std::to_string(min_batches) + " batches");
}

}  // namespace detail

/// Current per pair: signed crossings per unit time, error from batch means.
inline Estimate estimate_currents(const TrajectoryStats& st) {
  detail::check_length(st);
  std::vector<std::vector<double>> rows;
  for (const auto& b : st.batch_crossings) {
    std::vector<double> r;
    for (auto c : b) r.push_back(double(c) / st.batch_time);
    rows.push_back(std::move(r));
  }
  auto est = detail::batch_means(rows);
  // the overall estimate uses the exact totals; batch means only supply the error
  for (std::size_t i = 0; i < est.mean.size(); ++i) est.mean[i] = double(st.signed_crossings[i]) / st.total_time;
  return est;
}

inline Estimate estimate_occupation(const TrajectoryStats& st) {
  detail::check_length(st);
  std::vector<std::vector<double>> rows;
  for (const auto& b : st.batch_occupation) {
    std::vector<double> r;
    for (auto c : b) r.push_back(c / st.batch_time);
    rows.push_back(std::move(r));
  }
  auto est = detail::batch_means(rows);
  for (std::size_t i = 0; i < est.mean.size(); ++i) est.mean[i] = st.occupation_time[i] / st.total_time;
  return est;
}

/// Time horizon giving on average `jumps` transitions in the stationary state.
template <Scalar S>
double horizon_for_mean_jumps(const Digraph<S>& g, double jumps) {
  const auto gf = to_float(g);
  const auto p = stationary(gf, Backend::determinant);
  const auto table = detail::jump_table(gf);
  double activity = 0.0;
  for (VertexId v = 0; v < gf.vertex_count(); ++v) activity += p[v] * table.exit[v];
  return jumps / activity;
}

/// Independent replicas; replica i uses stream i of the seed. `jobs` = 0 means
/// the available hardware parallelism.
template <Scalar S>
std::vector<TrajectoryStats> simulate_replicas(const Digraph<S>& g, const SimulationOptions& opt, std::size_t replicas,
                                               std::size_t jobs = 0) {
  std::vector<TrajectoryStats> out(replicas);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(replicas, 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  auto worker = [&](std::size_t w) {
    try {
      for (std::size_t i; (i = next++) < replicas;) out[i] = simulate(g, opt, i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace treesurgeon
