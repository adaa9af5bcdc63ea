#pragma once

#include "treesurgeon/coplanarity.hpp"

#include <numeric>
#include <queue>

namespace treesurgeon {

template <Scalar S>
struct StationaryDistribution {
  std::vector<S> p;
  const S& operator[](VertexId x) const { return p[x]; }
  std::size_t size() const { return p.size(); }
};

/// p_x = tau_x / sum_y tau_y.
template <Scalar S>
StationaryDistribution<S> stationary(const Digraph<S>& g, Backend backend = Backend::automatic) {
  require_irreducible(g);
  StationaryDistribution<S> d;
  S z(0);
  for (VertexId x = 0; x < g.vertex_count(); ++x) {
    d.p.push_back(tree_poly(g, x, {}, backend).value);
    z += d.p.back();
  }
  for (auto& v : d.p) v /= z;
  return d;
}

/// Generator Q with Q(x, y) = r(x -> y) and rows summing to zero.
template <Scalar S>
Matrix<S> generator(const Digraph<S>& g) {
  Matrix<S> q(g.vertex_count(), g.vertex_count());
  for (const auto& e : g.edges()) {
    q(e.source, e.target) += g.rate(e);
    q(e.source, e.source) -= g.rate(e);
  }
  return q;
}

/// Independent route: solves p Q = 0 with sum p = 1 by elimination.
template <Scalar S>
StationaryDistribution<S> stationary_by_kernel(const Digraph<S>& g) {
  require_irreducible(g);
  const std::size_t n = g.vertex_count();
  const auto q = generator(g);
  Matrix<S> a(n, n);
  std::vector<S> b(n, S(0));
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = q(j, i);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = S(1);
  b[n - 1] = S(1);
  auto x = solve(a, b);
  if (!x) throw Error(ErrorCode::verification_failure, "generator kernel is not one-dimensional");
  return {std::move(*x)};
}

/// Stationary current through each pair, positive along u -> v.
template <Scalar S>
struct CurrentVector {
  std::vector<S> j;
  const S& operator[](PairId e) const { return j[e]; }
  std::size_t size() const { return j.size(); }
};

template <Scalar S>
CurrentVector<S> currents(const Digraph<S>& g, const StationaryDistribution<S>& p) {
  CurrentVector<S> c;
  for (const auto& pr : g.pairs()) c.j.push_back(pr.forward * p[pr.u] - pr.backward * p[pr.v]);
  return c;
}

template <Scalar S>
CurrentVector<S> currents(const Digraph<S>& g, Backend backend = Backend::automatic) {
  return currents(g, stationary(g, backend));
}

/// Net current leaving each vertex; zero everywhere in the stationary state.
template <Scalar S>
std::vector<S> vertex_balance(const Digraph<S>& g, const CurrentVector<S>& c) {
  std::vector<S> out(g.vertex_count(), S(0));
  for (PairId e = 0; e < g.pair_count(); ++e) {
    out[g.pair(e).u] += c[e];
    out[g.pair(e).v] -= c[e];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detailed balance

/// Kolmogorov criterion on a fundamental cycle basis: every pair reversible
/// and, for each non-tree pair of a BFS spanning tree, the product of forward
/// over backward rates around its cycle equals one. Pairs in `ignore` are
/// treated as absent.
template <Scalar S>
bool is_detailed_balanced(const Digraph<S>& g, std::span<const PairId> ignore = {}) {
  auto skipped = [&](PairId p) { return std::find(ignore.begin(), ignore.end(), p) != ignore.end(); };
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<std::pair<VertexId, PairId>>> adj(n);
  for (PairId p = 0; p < g.pair_count(); ++p) {
    if (skipped(p)) continue;
    const auto& pr = g.pair(p);
    if (!g.has_edge(g.edge(p, Sign::plus)) || !g.has_edge(g.edge(p, Sign::minus))) return false;
    adj[pr.u].push_back({pr.v, p});
    adj[pr.v].push_back({pr.u, p});
  }
  // potential phi with phi(v) / phi(u) = r(u -> v) / r(v -> u) along tree pairs
  std::vector<std::optional<S>> phi(n);
  std::vector<bool> tree_pair(g.pair_count(), false);
  for (VertexId s = 0; s < n; ++s) {
    if (phi[s]) continue;
    phi[s] = S(1);
    std::queue<VertexId> q;
    q.push(s);
    while (!q.empty()) {
      const VertexId u = q.front();
      q.pop();
      for (auto [v, p] : adj[u]) {
        if (phi[v]) continue;
        const auto e = *g.find_edge(u, v);
        phi[v] = *phi[u] * g.rate(e) / g.rate(e.reversed());
        tree_pair[p] = true;
        q.push(v);
      }
    }
  }
  for (PairId p = 0; p < g.pair_count(); ++p) {
    if (skipped(p) || tree_pair[p]) continue;
    const auto& pr = g.pair(p);
    if (!nearly_equal(S(*phi[pr.u] * pr.forward), S(*phi[pr.v] * pr.backward))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// One input pair: z-vectors and lambda coefficients

/// (z^0, z^+, z^-): coefficients of 1, r(+1), r(-1).
template <Scalar S>
using ZVector = std::array<S, 3>;

template <Scalar S>
struct ZVectors {
  PairId input = 0;
  ZVector<S> z0;                 // normalisation
  std::vector<ZVector<S>> z;     // per pair; z[input] is z_1
  std::array<S, 3> left_null{};  // (-tdot, tau^{\+-1}_{s(-1)}, tau^{\+-1}_{s(+1)})

  /// Current of pair e at input rates (rp, rm) from the rational representation.
  S current(PairId e, const S& rp, const S& rm) const {
    return (z[e][0] + z[e][1] * rp + z[e][2] * rm) / (z0[0] + z0[1] * rp + z0[2] * rm);
  }
};

template <Scalar S>
ZVectors<S> z_vectors(const Digraph<S>& g, PairId input, Backend backend = Backend::automatic) {
  const PairId pins[] = {input};
  require_pinnable(g, std::span<const PairId>(pins));
  const auto plus = g.edge(input, Sign::plus), minus = g.edge(input, Sign::minus);
  std::vector<TreeVector<S>> t;  // rescaled (tau^0, tdot^{//+1}, tdot^{//-1}) per root
  for (VertexId x = 0; x < g.vertex_count(); ++x)
    t.push_back(decompose_rescaled(g, x, std::span<const PairId>(pins), {}, backend));

  ZVectors<S> zv;
  zv.input = input;
  zv.z0 = {S(0), S(0), S(0)};
  for (const auto& v : t)
    for (std::size_t k = 0; k < 3; ++k) zv.z0[k] += v[k];
  for (PairId e = 0; e < g.pair_count(); ++e) {
    ZVector<S> ze;
    if (e == input) {
      ze = {S(0), t[plus.source][0], S(-t[minus.source][0])};
    } else {
      const auto& pr = g.pair(e);
      for (std::size_t k = 0; k < 3; ++k) ze[k] = pr.forward * t[pr.u][k] - pr.backward * t[pr.v][k];
    }
    zv.z.push_back(std::move(ze));
  }
  const S tdot = contracted_root_poly(g, input, backend).value;
  zv.left_null = {S(-tdot), t[minus.source][0], t[plus.source][0]};
  return zv;
}

/// Exact zero, or |x| within a relative 1e-9 of `scale` in floating point.
template <Scalar S>
bool negligible(const S& x, double scale, double tolerance = 1e-9) {
  if constexpr (is_exact_v<S>)
    return is_zero(x);
  else
    return std::fabs(x) <= tolerance * std::fabs(scale);
}

template <Scalar S>
S det3(const ZVector<S>& a, const ZVector<S>& b, const ZVector<S>& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) +
         c[0] * (a[1] * b[2] - a[2] * b[1]);
}

template <Scalar S>
struct LinearityCoefficients {
  std::vector<PairId> input_pairs;
  std::vector<std::vector<S>> coefficients;  // per pair: (lambda0, lambda1) or (mu0, mu1, mu2)
  std::vector<S> determinants;               // n = 1: det(z0, z1, z_e) per pair
  std::vector<std::size_t> rows_used;        // n = 2: rows of the solved 3x3 minor
  RankCertificate certificate;               // n = 2: rank of (w0, w1, w2)
  bool consistent = true;                    // determinant / augmented-rank conditions
};

/// lambda^0_e = z_e^0 / z_0^0 and lambda^1_e = (z_0^0 z_e^+ - z_0^+ z_e^0) / (z_0^0 z_1^+).
template <Scalar S>
LinearityCoefficients<S> lambda_coefficients(const ZVectors<S>& zv) {
  LinearityCoefficients<S> lc;
  lc.input_pairs = {zv.input};
  const auto& z0 = zv.z0;
  const auto& z1 = zv.z[zv.input];
  for (const auto& ze : zv.z) {
    S l0 = ze[0] / z0[0];
    S l1 = (z0[0] * ze[1] - z0[1] * ze[0]) / (z0[0] * z1[1]);
    S d = det3(z0, z1, ze);
    if (!negligible(d, to_double(z0[0]) * to_double(z1[1]) * (std::fabs(to_double(ze[0])) + std::fabs(to_double(ze[1])) + std::fabs(to_double(ze[2])))))
      lc.consistent = false;
    lc.coefficients.push_back({std::move(l0), std::move(l1)});
    lc.determinants.push_back(std::move(d));
  }
  return lc;
}

template <Scalar S>
LinearityCoefficients<S> lambda_coefficients(const Digraph<S>& g, PairId input, Backend backend = Backend::automatic) {
  return lambda_coefficients(z_vectors(g, input, backend));
}

/// Second finite differences of the current numerators and of the
/// normalisation in (r(+1), r(-1)) on the grid {0, 1, 2}^2. The representation
/// above is affine in each input rate with no r(+1) r(-1) term, so every
/// difference must vanish.
template <Scalar S>
struct QuadraticCheck {
  std::vector<S> mixed;       // per pair, then the normalisation last
  std::vector<S> pure_plus;   // d^2 / dr(+1)^2
  std::vector<S> pure_minus;  // d^2 / dr(-1)^2
  bool quadratic_free = true;
};

template <Scalar S>
QuadraticCheck<S> check_quadratic_terms(const Digraph<S>& g, PairId input) {
  const PairId pins[] = {input};
  require_pinnable(g, std::span<const PairId>(pins));
  const auto plus = g.edge(input, Sign::plus), minus = g.edge(input, Sign::minus);
  const std::size_t m = g.pair_count();
  // values[a][b][k]: numerator k (k == m: normalisation) at r(+1) = a, r(-1) = b
  std::array<std::array<std::vector<S>, 3>, 3> values;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      auto rate = rate_table(g);
      rate[edge_index(plus)] = S(a);
      rate[edge_index(minus)] = S(b);
      std::vector<S> tau;
      S z(0);
      for (VertexId x = 0; x < g.vertex_count(); ++x) {
        tau.push_back(detail::laplacian_minor(g, rate, x));
        z += tau.back();
      }
      auto& out = values[a][b];
      for (PairId e = 0; e < m; ++e) {
        const auto f = g.edge(e, Sign::plus), r = g.edge(e, Sign::minus);
        out.push_back(rate[edge_index(f)] * tau[f.source] - rate[edge_index(r)] * tau[r.source]);
      }
      out.push_back(z);
    }
  QuadraticCheck<S> qc;
  for (std::size_t k = 0; k <= m; ++k) {
    qc.mixed.push_back(values[1][1][k] - values[1][0][k] - values[0][1][k] + values[0][0][k]);
    qc.pure_plus.push_back(values[2][1][k] - S(2) * values[1][1][k] + values[0][1][k]);
    qc.pure_minus.push_back(values[1][2][k] - S(2) * values[1][1][k] + values[1][0][k]);
    const double scale = std::fabs(to_double(values[1][1][k])) + std::fabs(to_double(values[2][2][k])) + 1.0;
    for (const auto* v : {&qc.mixed.back(), &qc.pure_plus.back(), &qc.pure_minus.back()})
      if (!negligible(*v, scale)) qc.quadratic_free = false;
  }
  return qc;
}

template <Scalar S>
struct ResidualReport {
  std::size_t samples = 0;
  std::vector<std::vector<S>> residuals;  // [sample][pair]
  double max_abs = 0.0;
  double max_rel = 0.0;
  double mean_rel = 0.0;
  bool exact_zero = true;
  bool within_tolerance = true;
};

template <Scalar S>
void accumulate_residual(ResidualReport<S>& rep, const S& res, const S& reference, std::size_t& count,
                         double tolerance) {
  const double a = std::fabs(to_double(res));
  const double rel = a / std::max(std::fabs(to_double(reference)), 1e-300);
  rep.max_abs = std::max(rep.max_abs, a);
  rep.max_rel = std::max(rep.max_rel, a == 0.0 ? 0.0 : rel);
  rep.mean_rel += a == 0.0 ? 0.0 : rel;
  ++count;
  if (!is_zero(res)) rep.exact_zero = false;
  if constexpr (is_exact_v<S>) {
    if (!is_zero(res)) rep.within_tolerance = false;
  } else {
    if (a > tolerance * std::max(std::fabs(to_double(reference)), 1.0)) rep.within_tolerance = false;
  }
}

/// Recomputes every current from scratch (generator kernel) at each sample of
/// the input rates and checks j_e = lambda0_e + lambda1_e j_1.
template <Scalar S>
ResidualReport<S> verify_linearity(const Digraph<S>& g, PairId input, const LinearityCoefficients<S>& lc,
                                   const std::vector<std::pair<S, S>>& samples, double tolerance = 1e-9) {
  ResidualReport<S> rep;
  std::size_t count = 0;
  for (const auto& [rp, rm] : samples) {
    if (sign_of(rp) <= 0 || sign_of(rm) <= 0) throw Error(ErrorCode::invalid_argument, "sample rates must be positive");
    const auto h = g.with_pair_rates(input, rp, rm);
    const auto j = currents(h, stationary_by_kernel(h));
    std::vector<S> row;
    for (PairId e = 0; e < g.pair_count(); ++e) {
      S predicted = lc.coefficients[e][0] + lc.coefficients[e][1] * j[input];
      S res = j[e] - predicted;
      accumulate_residual(rep, res, j[e], count, tolerance);
      row.push_back(std::move(res));
    }
    rep.residuals.push_back(std::move(row));
    ++rep.samples;
  }
  if (count) rep.mean_rel /= double(count);
  return rep;
}

// ---------------------------------------------------------------------------
// Several input pairs: w-vectors and mu coefficients

/// Coefficient vectors, in the 3^n status layout, of the current numerators and
/// of the normalisation as polynomials in the pinned rates. Entry for a status
/// is the coefficient of the product of its constricted rates.
template <Scalar S>
struct WVectors {
  std::vector<PairId> pinned;
  std::vector<S> w0;
  std::vector<std::vector<S>> w;  // per pair
  /// Largest number of nonzero mixed r(+k) r(-k) coefficients seen (must be 0).
  std::size_t quadratic_terms = 0;
};

template <Scalar S>
WVectors<S> w_vectors(const Digraph<S>& g, std::span<const PairId> pinned, Backend backend = Backend::automatic) {
  check_pinned_distinct(g, pinned);
  require_pinnable(g, pinned);
  const std::size_t n = pinned.size();
  const auto layout = status_layout(n);
  const auto pos = status_positions(n);
  std::vector<TreeVector<S>> t;
  for (VertexId x = 0; x < g.vertex_count(); ++x) t.push_back(decompose_rescaled(g, x, pinned, {}, backend));

  WVectors<S> wv;
  wv.pinned.assign(pinned.begin(), pinned.end());
  wv.w0.assign(layout.size(), S(0));
  for (const auto& v : t)
    for (std::size_t i = 0; i < layout.size(); ++i) wv.w0[i] += v[i];

  for (PairId e = 0; e < g.pair_count(); ++e) {
    std::vector<S> we(layout.size(), S(0));
    const auto k = std::find(pinned.begin(), pinned.end(), e);
    const auto& pr = g.pair(e);
    if (k == pinned.end()) {
      for (std::size_t i = 0; i < layout.size(); ++i) we[i] = pr.forward * t[pr.u][i] - pr.backward * t[pr.v][i];
    } else {
      // the pinned rate in front raises the status of pin k from 0 to +/-;
      // products r(+k) r(-k) must cancel between the two terms
      const std::size_t ki = static_cast<std::size_t>(k - pinned.begin());
      for (std::size_t i = 0; i < layout.size(); ++i) {
        Status s = layout[i];
        const PinStatus own = s[ki];
        s[ki] = PinStatus::plus;
        const std::size_t up = pos[status_code(s)];
        s[ki] = PinStatus::minus;
        const std::size_t down = pos[status_code(s)];
        if (own == PinStatus::none) {
          we[up] += t[pr.u][i];
          we[down] -= t[pr.v][i];
        } else if (own == PinStatus::minus) {
          // r(+k) * [tree at u through -k] vs r(-k) * [tree at v through +k]
          Status mirror = layout[i];
          mirror[ki] = PinStatus::plus;
          if (!is_zero(S(t[pr.u][i] - t[pr.v][pos[status_code(mirror)]]))) ++wv.quadratic_terms;
        }
      }
    }
    wv.w.push_back(std::move(we));
  }
  return wv;
}

/// Raised when the (w0, w1, ..., wn) system is not of full rank; carries the certificate.
class RankDeficientError : public Error {
 public:
  RankDeficientError(RankCertificate cert, const std::string& what)
      : Error(ErrorCode::rank_deficient, what), certificate_(std::move(cert)) {}
  const RankCertificate& certificate() const { return certificate_; }

 private:
  RankCertificate certificate_;
};

/// Solves w_e = mu0 w0 + mu1 w1 + ... on the first full-rank square row minor,
/// and checks the remaining rows (augmented rank equals n + 1).
template <Scalar S>
LinearityCoefficients<S> mu_coefficients(const WVectors<S>& wv, double tolerance = default_rank_tolerance) {
  const std::size_t n = wv.pinned.size();
  const std::size_t m = n + 1;
  const std::size_t dim = wv.w0.size();
  std::vector<std::vector<S>> cols{wv.w0};
  for (PairId p : wv.pinned) cols.push_back(wv.w[p]);
  const auto base = Matrix<S>::from_columns(cols);

  LinearityCoefficients<S> lc;
  lc.input_pairs = wv.pinned;
  lc.certificate.pinned = wv.pinned;
  lc.certificate.vector_dim = dim;
  RankResult r;
  if constexpr (is_exact_v<S>) {
    r = rank(base);
    lc.certificate.arithmetic = Arithmetic::exact;
  } else {
    r = rank(base, tolerance);
    lc.certificate.arithmetic = Arithmetic::floating;
    lc.certificate.tolerance = tolerance;
    lc.certificate.singular_values = r.singular_values;
  }
  lc.certificate.rank = r.rank;
  if (r.rank < m) throw RankDeficientError(lc.certificate, "rank of (w0, w1, ...) is " + std::to_string(r.rank));

  // first independent rows, greedily in row order
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dim && rows.size() < m; ++i) {
    auto trial = rows;
    trial.push_back(i);
    std::vector<std::size_t> all_cols(m);
    std::iota(all_cols.begin(), all_cols.end(), std::size_t{0});
    const auto sub = base.submatrix(trial, all_cols);
    std::size_t rk;
    if constexpr (is_exact_v<S>)
      rk = rank(sub).rank;
    else
      rk = rank(sub, tolerance).rank;
    if (rk == trial.size()) rows = std::move(trial);
  }
  lc.rows_used = rows;
  std::vector<std::size_t> all_cols(m);
  std::iota(all_cols.begin(), all_cols.end(), std::size_t{0});
  const auto minor = base.submatrix(rows, all_cols);

  for (PairId e = 0; e < wv.w.size(); ++e) {
    std::vector<S> rhs;
    for (auto i : rows) rhs.push_back(wv.w[e][i]);
    auto mu = solve(minor, rhs);
    if (!mu) throw RankDeficientError(lc.certificate, "selected minor is singular");
    for (std::size_t i = 0; i < dim; ++i) {
      S fit(0);
      for (std::size_t k = 0; k < m; ++k) fit += (*mu)[k] * base(i, k);
      if (!negligible(S(fit - wv.w[e][i]), 1.0 + std::fabs(to_double(wv.w[e][i])), tolerance)) lc.consistent = false;
    }
    lc.coefficients.push_back(std::move(*mu));
  }
  return lc;
}

template <Scalar S>
LinearityCoefficients<S> mu_coefficients(const Digraph<S>& g, PairId p1, PairId p2,
                                         Backend backend = Backend::automatic) {
  const PairId pins[] = {p1, p2};
  return mu_coefficients(w_vectors(g, std::span<const PairId>(pins), backend));
}

/// Input rates for n pins, flattened as (r(+1), r(-1), r(+2), r(-2), ...).
template <Scalar S>
using PinnedRates = std::vector<S>;

/// From-scratch check of j_e = mu0_e + sum_k mu_k,e j_k at each sample.
template <Scalar S>
ResidualReport<S> verify_multi_linearity(const Digraph<S>& g, const LinearityCoefficients<S>& lc,
                                         const std::vector<PinnedRates<S>>& samples, double tolerance = 1e-9) {
  ResidualReport<S> rep;
  std::size_t count = 0;
  const auto& pins = lc.input_pairs;
  for (const auto& rates : samples) {
    if (rates.size() != 2 * pins.size()) throw Error(ErrorCode::invalid_argument, "sample arity mismatch");
    Digraph<S> h = g;
    for (std::size_t k = 0; k < pins.size(); ++k) h = h.with_pair_rates(pins[k], rates[2 * k], rates[2 * k + 1]);
    const auto j = currents(h, stationary_by_kernel(h));
    std::vector<S> row;
    for (PairId e = 0; e < g.pair_count(); ++e) {
      const auto& mu = lc.coefficients[e];
      S predicted = mu[0];
      for (std::size_t k = 0; k < pins.size(); ++k) predicted += mu[k + 1] * j[pins[k]];
      S res = j[e] - predicted;
      accumulate_residual(rep, res, j[e], count, tolerance);
      row.push_back(std::move(res));
    }
    rep.residuals.push_back(std::move(row));
    ++rep.samples;
  }
  if (count) rep.mean_rel /= double(count);
  return rep;
}

}  // namespace treesurgeon
