#pragma once

#include "treesurgeon/polynomial.hpp"

#include <sstream>

namespace treesurgeon {

/// Normal vector of one pinned pair's tree-vector plane. `none` is
/// -r(+1) tau^{//-1}_{s(+1)}, which equals -r(+1) r(-1) times the contracted
/// polynomial when `extra` is empty; `plus`/`minus` are r(+-1) tau^{\+-1}_{s(+-1)}.
/// All three carry `extra` as an additional condition.
template <Scalar S>
struct SigmaVector {
  PairId pinned_pair = 0;
  TreeConstraint extra;
  S none{};
  S plus{};
  S minus{};

  /// Components aligned with the tree-vector order (0, +, -). The entry facing
  /// tau^{//+1} is the minus-side term and vice versa.
  std::vector<S> normal() const { return {none, minus, plus}; }
};

template <Scalar S>
SigmaVector<S> sigma_vector(const Digraph<S>& g, PairId pair, const TreeConstraint& extra = {},
                            Backend backend = Backend::automatic) {
  if (pair >= g.pair_count()) throw Error(ErrorCode::unknown_edge, "pair id out of range");
  if (extra.mentions_pair(pair))
    throw Error(ErrorCode::constraint_mentions_pinned, "extra constraint touches the pinned pair");
  const auto plus = g.edge(pair, Sign::plus), minus = g.edge(pair, Sign::minus);
  if (!g.has_edge(plus) || !g.has_edge(minus))
    throw Error(ErrorCode::missing_reverse_edge, "pinned pair " + g.edge_name(plus) + " lacks a direction");
  const TreeConstraint off = extra.merged(TreeConstraint::avoiding({plus, minus}));
  SigmaVector<S> s;
  s.pinned_pair = pair;
  s.extra = extra;
  s.none = -(g.rate(plus) * tree_poly(g, plus.source, extra.merged(TreeConstraint::requiring({minus})), backend).value);
  s.plus = g.rate(plus) * tree_poly(g, plus.source, off, backend).value;
  s.minus = g.rate(minus) * tree_poly(g, minus.source, off, backend).value;
  return s;
}

template <Scalar S>
S dot(const std::vector<S>& a, const TreeVector<S>& t) {
  return dot(a, t.values);
}

template <Scalar S>
struct SecondOrderReport {
  PairId pair = 0;
  S contracted{};                  // rescaled contracted polynomial of the pair
  std::vector<S> lhs, rhs, residual;  // per root
  bool holds = true;
};

/// r(+1) r(-1) tdot tau^{\+-1}_x = r(+1) tau^{\+-1}_{s(+1)} tau^{\+1//-1}_x + r(-1) tau^{\+-1}_{s(-1)} tau^{\-1//+1}_x
/// evaluated at every root.
template <Scalar S>
SecondOrderReport<S> check_second_order(const Digraph<S>& g, PairId pair, Backend backend = Backend::automatic) {
  const PairId pins[] = {pair};
  require_pinnable(g, std::span<const PairId>(pins));
  const auto plus = g.edge(pair, Sign::plus), minus = g.edge(pair, Sign::minus);
  const S& rp = g.rate(plus);
  const S& rm = g.rate(minus);
  const auto off = TreeConstraint::avoiding({plus, minus});
  SecondOrderReport<S> rep;
  rep.pair = pair;
  rep.contracted = contracted_root_poly(g, pair, backend).value;
  const S tp = tree_poly(g, plus.source, off, backend).value;
  const S tm = tree_poly(g, minus.source, off, backend).value;
  for (VertexId x = 0; x < g.vertex_count(); ++x) {
    const auto tv = decompose(g, x, std::span<const PairId>(pins), {}, backend);
    S l = rp * rm * rep.contracted * tv[0];
    S r = rp * tp * tv[2] + rm * tm * tv[1];
    rep.holds = rep.holds && nearly_equal(l, r);
    rep.residual.push_back(l - r);
    rep.lhs.push_back(std::move(l));
    rep.rhs.push_back(std::move(r));
  }
  return rep;
}

/// Rank of a set of tree vectors. Exact mode is tolerance-free; float mode
/// thresholds singular values relative to the largest.
struct RankCertificate {
  std::vector<PairId> pinned;
  std::size_t vector_dim = 0;
  std::size_t rank = 0;
  std::vector<VertexId> basis_roots;
  Arithmetic arithmetic = Arithmetic::exact;
  double tolerance = 0.0;
  std::vector<double> singular_values;

  /// smallest retained-or-not singular value over the largest; float mode only
  double spectral_ratio(std::size_t index) const {
    if (singular_values.empty() || singular_values.front() == 0.0 || index >= singular_values.size()) return 0.0;
    return singular_values[index] / singular_values.front();
  }
};

inline constexpr double default_rank_tolerance = 1e-9;

template <Scalar S>
Matrix<S> tree_vector_matrix(const std::vector<TreeVector<S>>& vs) {
  std::vector<std::vector<S>> cols;
  for (const auto& v : vs) cols.push_back(v.values);
  return Matrix<S>::from_columns(cols);
}

template <Scalar S>
RankCertificate rank_certificate(const std::vector<TreeVector<S>>& vs, double tolerance = default_rank_tolerance) {
  RankCertificate c;
  if (!vs.empty()) {
    c.pinned = vs.front().pinned;
    c.vector_dim = vs.front().size();
  }
  const auto m = tree_vector_matrix(vs);
  RankResult r;
  if constexpr (is_exact_v<S>) {
    r = rank(m);
    c.arithmetic = Arithmetic::exact;
  } else {
    r = rank(m, tolerance);
    c.arithmetic = Arithmetic::floating;
    c.tolerance = tolerance;
    c.singular_values = r.singular_values;
  }
  c.rank = r.rank;
  for (auto j : r.pivot_columns) c.basis_roots.push_back(vs[j].root);
  return c;
}

/// One sigma candidate for n pins: pin `pin` with every other pin fixed to
/// `condition` (the pin's own slot is ignored), embedded in the 3^n layout.
template <Scalar S>
struct SigmaCandidate {
  std::size_t pin = 0;
  Status condition;
  SigmaVector<S> sigma;
  std::vector<S> vector;
};

/// Candidate conditions: every status of the other pins, in layout order with
/// - before +, and for each condition every pin in order. For two pins this is
/// sigma1^{\+-2}, sigma2^{\+-1}, sigma1^{//-2}, sigma2^{//-1}, sigma1^{//+2}, sigma2^{//+1}.
template <Scalar S>
std::vector<SigmaCandidate<S>> sigma_candidates(const Digraph<S>& g, std::span<const PairId> pinned,
                                                const TreeConstraint& extra = {},
                                                Backend backend = Backend::automatic) {
  const std::size_t n = pinned.size();
  if (n == 0) return {};
  const auto pos = status_positions(n);
  auto others = status_layout(n - 1);
  for (auto& t : others)
    for (auto& p : t)
      if (p != PinStatus::none) p = p == PinStatus::plus ? PinStatus::minus : PinStatus::plus;

  std::vector<SigmaCandidate<S>> out;
  for (const auto& t : others)
    for (std::size_t i = 0; i < n; ++i) {
      Status cond(n, PinStatus::none);
      std::vector<PairId> other_pins;
      Status other_status;
      for (std::size_t j = 0, k = 0; j < n; ++j) {
        if (j == i) continue;
        cond[j] = t[k++];
        other_pins.push_back(pinned[j]);
        other_status.push_back(cond[j]);
      }
      const auto c = status_constraint(g, std::span<const PairId>(other_pins), other_status).merged(extra);
      SigmaCandidate<S> cand;
      cand.pin = i;
      cand.condition = cond;
      cand.sigma = sigma_vector(g, pinned[i], c, backend);
      cand.vector.assign(pos.size(), S(0));
      Status at = cond;
      at[i] = PinStatus::none;
      cand.vector[pos[status_code(at)]] = cand.sigma.none;
      at[i] = PinStatus::plus;
      cand.vector[pos[status_code(at)]] = cand.sigma.minus;
      at[i] = PinStatus::minus;
      cand.vector[pos[status_code(at)]] = cand.sigma.plus;
      out.push_back(std::move(cand));
    }
  return out;
}

template <Scalar S>
bool is_orthogonal(const std::vector<S>& a, const std::vector<S>& b, double rel_tol = default_rank_tolerance) {
  if constexpr (is_exact_v<S>) {
    return is_zero(dot(a, b));
  } else {
    double na = 0, nb = 0;
    for (double x : a) na += x * x;
    for (double x : b) nb += x * x;
    return std::fabs(dot(a, b)) <= rel_tol * std::sqrt(na * nb);
  }
}

template <Scalar S>
struct CoplanarityReport {
  RankCertificate certificate;
  std::vector<TreeVector<S>> vectors;        // one per root
  std::vector<SigmaCandidate<S>> sigmas;
  std::vector<std::vector<S>> dots;          // dots[k][x] = sigma_k . tau_x
  std::size_t orthogonal_sigmas = 0;         // candidates annihilating every tau_x
  std::size_t sigma_rank = 0;
  bool all_orthogonal = true;
  bool too_few_vertices = false;             // warning only
  Backend backend = Backend::automatic;

  std::size_t pin_count() const { return certificate.pinned.size(); }
  bool rank_is_n_plus_one() const { return certificate.rank == pin_count() + 1; }
};

/// Tree vectors at every root, their rank, and the sigma candidates' action on them.
template <Scalar S>
CoplanarityReport<S> check_coplanarity(const Digraph<S>& g, std::span<const PairId> pinned,
                                       Backend backend = Backend::automatic,
                                       double tolerance = default_rank_tolerance, bool with_sigmas = true) {
  if (pinned.empty()) throw Error(ErrorCode::invalid_argument, "at least one pinned pair is required");
  check_pinned_distinct(g, pinned);
  require_pinnable(g, pinned);
  CoplanarityReport<S> rep;
  rep.backend = resolve_backend(backend, g.vertex_count());
  rep.too_few_vertices = g.vertex_count() <= pinned.size() + 1;
  rep.vectors = decompose_all(g, pinned, {}, backend);
  rep.certificate = rank_certificate(rep.vectors, tolerance);
  if (!with_sigmas) return rep;
  rep.sigmas = sigma_candidates(g, pinned, {}, backend);
  std::vector<std::vector<S>> cols;
  for (const auto& c : rep.sigmas) {
    std::vector<S> row;
    bool ok = true;
    for (const auto& t : rep.vectors) {
      row.push_back(dot(c.vector, t.values));
      ok = ok && is_orthogonal(c.vector, t.values, tolerance);
    }
    rep.dots.push_back(std::move(row));
    if (ok) ++rep.orthogonal_sigmas;
    rep.all_orthogonal = rep.all_orthogonal && ok;
    cols.push_back(c.vector);
  }
  const auto m = Matrix<S>::from_columns(cols);
  if constexpr (is_exact_v<S>)
    rep.sigma_rank = rank(m).rank;
  else
    rep.sigma_rank = rank(m, tolerance).rank;
  return rep;
}

template <Scalar S>
CoplanarityReport<S> check_coplanarity(const Digraph<S>& g, PairId pair, Backend backend = Backend::automatic) {
  const PairId pins[] = {pair};
  return check_coplanarity(g, std::span<const PairId>(pins), backend);
}

// ---------------------------------------------------------------------------
// Two pinned pairs

template <Scalar S>
struct TwoEdgeSigmaMatrix {
  Matrix<S> columns;   // 9 x 6, candidate order of sigma_candidates
  Matrix<S> rescaled;  // each column divided by its first nonzero entry
  // named entries of the rescaled matrix
  S A{}, B{}, C{}, D{}, E{}, F{}, G{}, H{}, I{}, J{}, K{}, L{};
  std::vector<S> omega;  // (1, -1, D, -B, C, -A)
  /// Pattern of zeros matches the six-column display.
  bool pattern_ok = true;
};

template <Scalar S>
struct ConsistencyReport {
  std::vector<std::string> names{"EC-FA", "HC-GB", "ID-JA", "KD-LB"};
  std::vector<S> values;
  std::size_t vanishing = 0;
};

template <Scalar S>
struct TwoEdgeReport {
  CoplanarityReport<S> coplanarity;
  TwoEdgeSigmaMatrix<S> sigma;
  ConsistencyReport<S> consistency;
  std::vector<VertexId> block_roots;  // s(+1), s(-1), s(+2)
  S lower_block_det{};
  bool pairs_share_vertex = false;     // then some diagonal factor of the block vanishes
  bool meets_size_condition = false;  // at least 9 vertices
};

template <Scalar S>
TwoEdgeReport<S> two_edge_analysis(const Digraph<S>& g, PairId p1, PairId p2, Backend backend = Backend::automatic,
                                   double tolerance = default_rank_tolerance) {
  const PairId pins[] = {p1, p2};
  TwoEdgeReport<S> rep;
  rep.coplanarity = check_coplanarity(g, std::span<const PairId>(pins), backend, tolerance);
  rep.meets_size_condition = g.vertex_count() >= 9;

  // rows -+, +-, -- of (tau_{s(+1)}, tau_{s(-1)}, tau_{s(+2)})
  rep.block_roots = {g.edge(p1, Sign::plus).source, g.edge(p1, Sign::minus).source, g.edge(p2, Sign::plus).source};
  const auto& a = g.pair(p1);
  const auto& b = g.pair(p2);
  rep.pairs_share_vertex = a.u == b.u || a.u == b.v || a.v == b.u || a.v == b.v;
  Matrix<S> block(3, 3);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) block(i, j) = rep.coplanarity.vectors[rep.block_roots[j]][6 + i];
  rep.lower_block_det = determinant(block);

  auto& sm = rep.sigma;
  std::vector<std::vector<S>> cols;
  for (const auto& c : rep.coplanarity.sigmas) cols.push_back(c.vector);
  sm.columns = Matrix<S>::from_columns(cols);
  sm.rescaled = sm.columns;
  for (std::size_t j = 0; j < 6; ++j) {
    std::size_t lead = 0;
    while (lead < 9 && is_zero(sm.columns(lead, j))) ++lead;
    if (lead == 9) {
      sm.pattern_ok = false;
      continue;
    }
    const S d = sm.columns(lead, j);
    for (std::size_t i = 0; i < 9; ++i) sm.rescaled(i, j) = sm.columns(i, j) / d;
  }
  // nonzero pattern of the display, 1-based rows per column
  static constexpr int pattern[6][3] = {{1, 2, 3}, {1, 4, 5}, {5, 8, 9}, {3, 7, 9}, {4, 6, 7}, {2, 6, 8}};
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = 0; i < 9; ++i) {
      const bool expected = std::find(std::begin(pattern[j]), std::end(pattern[j]), int(i + 1)) != std::end(pattern[j]);
      if (!expected && !is_zero(sm.columns(i, j))) sm.pattern_ok = false;
    }
  const auto& R = sm.rescaled;
  sm.A = R(1, 0);
  sm.B = R(2, 0);
  sm.C = R(3, 1);
  sm.D = R(4, 1);
  sm.E = R(5, 4);
  sm.F = R(5, 5);
  sm.G = R(6, 3);
  sm.H = R(6, 4);
  sm.I = R(7, 2);
  sm.J = R(7, 5);
  sm.K = R(8, 2);
  sm.L = R(8, 3);
  sm.omega = {S(1), S(-1), sm.D, -sm.B, sm.C, -sm.A};

  auto& cr = rep.consistency;
  cr.values = {sm.E * sm.C - sm.F * sm.A, sm.H * sm.C - sm.G * sm.B, sm.I * sm.D - sm.J * sm.A,
               sm.K * sm.D - sm.L * sm.B};
  for (const auto& v : cr.values) {
    bool zero;
    if constexpr (is_exact_v<S>)
      zero = is_zero(v);
    else
      zero = std::fabs(v) <= tolerance;
    if (zero) ++cr.vanishing;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Conjecture sweep and plane data

/// n * 3^(n-1), the number of sigma candidates for n pins.
inline std::size_t sigma_candidate_count(std::size_t n) {
  std::size_t c = n;
  for (std::size_t i = 1; i < n; ++i) c *= 3;
  return n == 0 ? 0 : c;
}

template <Scalar S>
CoplanarityReport<S> conjecture_test(const Digraph<S>& g, std::span<const PairId> pinned,
                                     Backend backend = Backend::automatic, bool with_sigmas = true) {
  return check_coplanarity(g, pinned, backend, default_rank_tolerance, with_sigmas);
}

/// Rows (root label, tau^0, tau^+, tau^-) for every root, then the plane normal.
template <Scalar S>
std::string plane_data_csv(const Digraph<S>& g, const CoplanarityReport<S>& rep) {
  if (rep.pin_count() != 1 || rep.sigmas.size() != 1)
    throw Error(ErrorCode::wrong_arity, "plane data needs exactly one pinned pair");
  std::ostringstream os;
  os << "root,tau_none,tau_plus,tau_minus\n";
  for (const auto& t : rep.vectors)
    os << g.label(t.root) << ',' << to_string(t[0]) << ',' << to_string(t[1]) << ',' << to_string(t[2]) << '\n';
  const auto& n = rep.sigmas.front().vector;
  os << "normal," << to_string(n[0]) << ',' << to_string(n[1]) << ',' << to_string(n[2]) << '\n';
  return os.str();
}

}  // namespace treesurgeon
