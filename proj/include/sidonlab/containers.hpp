#pragma once

// Counting machinery around a Sidon seed S:
//
//  * the collision graph G_S on [n]^d \ S, where v1 ~ v2 iff v1 + b1 = v2 + b2
//    for some b1, b2 in S (independent sets of G_S are Sidon extensions of S);
//  * the bipartite graph B between sums w and vertices u with w = u + b, whose
//    4-cycle-freeness gives e(U) = sum_w C(deg_B(w), 2);
//  * exhaustive/sampled verifiers for the edge-density lemma and the
//    container lemma on small instances;
//  * log2-space evaluators of the counting bounds.
//
// All logarithms inside the bound formulas are natural; results are log2.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sidonlab/errors.hpp"
#include "sidonlab/executor.hpp"
#include "sidonlab/grid.hpp"
#include "sidonlab/pointset_io.hpp"
#include "sidonlab/rng.hpp"

namespace sidon {

// Undirected graph on vertices 0..vertex_count-1; edges sorted, u < v, unique.
struct SimpleGraph {
  std::size_t vertex_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;

  static SimpleGraph from_edges(std::size_t vertex_count, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
    for (auto& [u, v] : edges) {
      if (u >= vertex_count || v >= vertex_count) throw ValidationError("edge endpoint out of range");
      if (u == v) throw ValidationError("self-loop");
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return SimpleGraph{vertex_count, std::move(edges)};
  }

  std::vector<std::vector<std::uint32_t>> adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(vertex_count);
    for (auto [u, v] : edges) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
  }

  friend bool operator==(const SimpleGraph&, const SimpleGraph&) = default;
};

struct CollisionGraph {
  GridParams grid{1, 1};
  RankSet seed;
  RankSet vertices;   // [n]^d \ seed, sorted; graph vertex i is vertices[i]
  SimpleGraph graph;  // on vertex indices

  std::size_t vertex_count() const { return vertices.size(); }
  std::vector<std::pair<Rank, Rank>> rank_edges() const {
    std::vector<std::pair<Rank, Rank>> out;
    out.reserve(graph.edges.size());
    for (auto [u, v] : graph.edges) out.emplace_back(vertices[u], vertices[v]);
    return out;
  }
};

inline constexpr std::uint64_t kMaxCollisionIncidences = 200'000'000;

namespace detail {

inline void require_sidon(std::span<const Rank> seed, const GridParams& g) {
  if (!is_sidon(seed, g).is_sidon) throw ValidationError("seed set is not a Sidon set");
}

inline std::size_t index_of(const RankSet& sorted, Rank r) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), r);
  if (it == sorted.end() || *it != r) return sorted.size();
  return static_cast<std::size_t>(it - sorted.begin());
}

}  // namespace detail

// Vertices sharing a sum w = v + b form a clique; G_S is the union of these
// cliques. For a Sidon seed no pair lies in two cliques.
inline CollisionGraph build_collision_graph(std::span<const Rank> seed_points, const GridParams& g) {
  CollisionGraph out;
  out.grid = g;
  out.seed = normalize(seed_points, g);
  detail::require_sidon(out.seed, g);
  if (g.size() > (std::uint64_t{1} << 31)) throw FeasibilityError("grid too large for an explicit collision graph");
  const std::uint64_t vcount = g.size() - out.seed.size();
  if (vcount * out.seed.size() > kMaxCollisionIncidences)
    throw FeasibilityError("collision graph too large: (n^d - s) * s exceeds " +
                           std::to_string(kMaxCollisionIncidences));

  out.vertices.reserve(vcount);
  for (Rank r = 0, k = 0; r < g.size(); ++r) {
    if (k < out.seed.size() && out.seed[k] == r) {
      ++k;
      continue;
    }
    out.vertices.push_back(r);
  }
  std::vector<Rank> seed_embed;
  for (auto b : out.seed) seed_embed.push_back(sum_embed(b, g));

  std::vector<std::pair<Rank, std::uint32_t>> incidences;
  incidences.reserve(vcount * out.seed.size());
  for (std::uint32_t i = 0; i < out.vertices.size(); ++i) {
    Rank ev = sum_embed(out.vertices[i], g);
    for (auto eb : seed_embed) incidences.emplace_back(ev + eb, i);
  }
  std::sort(incidences.begin(), incidences.end());

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::size_t lo = 0; lo < incidences.size();) {
    std::size_t hi = lo;
    while (hi < incidences.size() && incidences[hi].first == incidences[lo].first) ++hi;
    for (std::size_t a = lo; a < hi; ++a)
      for (std::size_t b = a + 1; b < hi; ++b) edges.emplace_back(incidences[a].second, incidences[b].second);
    lo = hi;
  }
  out.graph = SimpleGraph::from_edges(out.vertices.size(), std::move(edges));
  return out;
}

// Left side: sums w (sum ranks, sorted). Right side: the vertex set U.
struct BipartiteGraph {
  std::vector<Rank> sums;
  RankSet right;
  std::vector<std::vector<std::uint32_t>> right_adj;  // indices into sums

  std::vector<std::size_t> sum_degrees() const {
    std::vector<std::size_t> deg(sums.size(), 0);
    for (const auto& a : right_adj)
      for (auto w : a) ++deg[w];
    return deg;
  }
};

inline BipartiteGraph build_bipartite_B(std::span<const Rank> u_points, std::span<const Rank> seed_points,
                                        const GridParams& g) {
  const RankSet seed = normalize(seed_points, g);
  detail::require_sidon(seed, g);
  BipartiteGraph out;
  out.right = normalize(u_points, g);
  for (auto u : out.right)
    if (std::binary_search(seed.begin(), seed.end(), u)) throw ValidationError("U must avoid the seed set");

  std::vector<Rank> all;
  all.reserve(out.right.size() * seed.size());
  for (auto u : out.right)
    for (auto b : seed) all.push_back(sum_embed(u, g) + sum_embed(b, g));
  out.sums = all;
  std::sort(out.sums.begin(), out.sums.end());
  out.sums.erase(std::unique(out.sums.begin(), out.sums.end()), out.sums.end());

  out.right_adj.resize(out.right.size());
  for (std::size_t i = 0; i < out.right.size(); ++i) {
    for (std::size_t j = 0; j < seed.size(); ++j) {
      Rank w = all[i * seed.size() + j];
      out.right_adj[i].push_back(
          static_cast<std::uint32_t>(std::lower_bound(out.sums.begin(), out.sums.end(), w) - out.sums.begin()));
    }
    std::sort(out.right_adj[i].begin(), out.right_adj[i].end());
  }
  return out;
}

// No two right vertices share two left neighbours.
inline bool check_four_cycle_free(const BipartiteGraph& b) {
  std::vector<std::vector<std::uint32_t>> by_sum(b.sums.size());
  for (std::uint32_t u = 0; u < b.right_adj.size(); ++u)
    for (auto w : b.right_adj[u]) by_sum[w].push_back(u);
  std::unordered_set<std::uint64_t> seen_pairs;
  for (const auto& us : by_sum) {
    for (std::size_t i = 0; i < us.size(); ++i) {
      for (std::size_t j = i + 1; j < us.size(); ++j) {
        std::uint64_t key = (std::uint64_t{us[i]} << 32) | us[j];
        if (!seen_pairs.insert(key).second) return false;
      }
    }
  }
  return true;
}

struct EdgeCountIdentity {
  std::uint64_t induced_edges = 0;      // e(U) in G_S, by pairwise difference test
  std::uint64_t sum_degree_pairs = 0;   // sum_w C(deg_B(w), 2)
};

// Both sides of e(U) = sum_w C(deg_B(w), 2), computed independently.
inline EdgeCountIdentity edge_count_identity(std::span<const Rank> u_points, std::span<const Rank> seed_points,
                                             const GridParams& g) {
  const RankSet seed = normalize(seed_points, g);
  const RankSet u = normalize(u_points, g);
  EdgeCountIdentity out;

  // v1 + b1 = v2 + b2  <=>  e(v1) - e(v2) = e(b2) - e(b1) with e the carry-free embedding.
  std::unordered_set<std::int64_t> diffs;
  for (auto b1 : seed)
    for (auto b2 : seed)
      if (b1 != b2) diffs.insert(static_cast<std::int64_t>(sum_embed(b2, g)) - static_cast<std::int64_t>(sum_embed(b1, g)));
  std::vector<std::int64_t> eu;
  for (auto x : u) eu.push_back(static_cast<std::int64_t>(sum_embed(x, g)));
  for (std::size_t i = 0; i < eu.size(); ++i)
    for (std::size_t j = i + 1; j < eu.size(); ++j)
      if (diffs.count(eu[i] - eu[j])) ++out.induced_edges;

  auto b = build_bipartite_B(u, seed, g);
  for (auto deg : b.sum_degrees()) out.sum_degree_pairs += deg * (deg - (deg > 0 ? 1 : 0)) / 2;
  return out;
}

// ---------------------------------------------------------------------------
// Edge density of G_S

enum class LemmaStatus { pass, fail, vacuous };

inline const char* to_string(LemmaStatus s) {
  switch (s) {
    case LemmaStatus::pass: return "pass";
    case LemmaStatus::fail: return "fail";
    case LemmaStatus::vacuous: return "vacuous";
  }
  return "?";
}

struct DensityReport {
  LemmaStatus status = LemmaStatus::vacuous;
  double threshold = 0;  // |U| >= 2^{d+1} n^d / s
  double beta = 0;       // s^2 / (2^{d+1} n^d)
  double worst_ratio = 0;  // min e(U) / (beta C(|U|,2)) over checked U
  std::uint64_t sets_checked = 0;
  bool exhaustive = false;
};

inline constexpr std::size_t kDensityExhaustiveLimit = 20;
inline constexpr std::size_t kDefaultDensitySamples = 10'000;

namespace detail {

// e(U) * 2^{d+1} n^d >= s^2 C(|U|,2), in exact integer arithmetic.
inline bool density_holds(std::uint64_t edges, std::uint64_t usize, std::uint64_t s, const GridParams& g) {
  unsigned __int128 lhs = static_cast<unsigned __int128>(edges) * (std::uint64_t{1} << (g.d() + 1)) * g.size();
  unsigned __int128 rhs = static_cast<unsigned __int128>(s) * s * (usize * (usize - 1) / 2);
  return lhs >= rhs;
}

}  // namespace detail

// Checks e(U) >= beta C(|U|,2) for every U with |U| >= threshold when the
// vertex count is at most 20, otherwise for `samples` random U whose size is
// uniform over the qualifying sizes. Deterministic for a fixed seed.
inline DensityReport verify_density_lemma(std::span<const Rank> seed_points, const GridParams& g,
                                          std::size_t samples = kDefaultDensitySamples, std::uint64_t seed = 1,
                                          const Executor& exec = Executor(1)) {
  const RankSet seed_set = normalize(seed_points, g);
  const std::uint64_t s = seed_set.size();
  DensityReport out;
  if (s == 0) return out;
  out.threshold = std::ldexp(static_cast<double>(g.size()), static_cast<int>(g.d()) + 1) / static_cast<double>(s);
  out.beta = static_cast<double>(s * s) / std::ldexp(static_cast<double>(g.size()), static_cast<int>(g.d()) + 1);

  auto cg = build_collision_graph(seed_set, g);
  const std::size_t nv = cg.vertex_count();
  const auto min_size = static_cast<std::uint64_t>(std::ceil(out.threshold));
  if (min_size > nv) return out;
  out.worst_ratio = std::numeric_limits<double>::infinity();

  auto ratio = [&](std::uint64_t edges, std::uint64_t usize) {
    double denom = out.beta * static_cast<double>(usize * (usize - 1) / 2);
    return denom > 0 ? static_cast<double>(edges) / denom : std::numeric_limits<double>::infinity();
  };
  bool all_hold = true;

  if (nv <= kDensityExhaustiveLimit) {
    out.exhaustive = true;
    std::vector<std::uint32_t> masks(nv, 0);
    for (auto [u, v] : cg.graph.edges) {
      masks[u] |= 1u << v;
      masks[v] |= 1u << u;
    }
    for (std::uint32_t set = 0; set < (1u << nv); ++set) {
      const auto usize = static_cast<std::uint64_t>(std::popcount(set));
      if (usize < min_size) continue;
      std::uint64_t twice = 0;
      for (std::uint32_t rest = set; rest; rest &= rest - 1) twice += std::popcount(masks[std::countr_zero(rest)] & set);
      const std::uint64_t edges = twice / 2;
      ++out.sets_checked;
      all_hold = all_hold && detail::density_holds(edges, usize, s, g);
      out.worst_ratio = std::min(out.worst_ratio, ratio(edges, usize));
    }
  } else {
    const auto adj = cg.graph.adjacency();
    struct Sample {
      std::uint64_t edges, usize;
    };
    auto results = exec.map(samples, [&](std::size_t i) {
      auto rng = make_stream(seed, i, 0xd3a5);
      const std::uint64_t usize = min_size + uniform_below(rng, nv - min_size + 1);
      std::vector<std::uint32_t> order(nv);
      for (std::uint32_t v = 0; v < nv; ++v) order[v] = v;
      for (std::uint64_t k = 0; k < usize; ++k) std::swap(order[k], order[k + uniform_below(rng, nv - k)]);
      std::vector<char> in(nv, 0);
      for (std::uint64_t k = 0; k < usize; ++k) in[order[k]] = 1;
      std::uint64_t twice = 0;
      for (std::uint64_t k = 0; k < usize; ++k)
        for (auto w : adj[order[k]]) twice += in[w];
      return Sample{twice / 2, usize};
    });
    for (const auto& r : results) {
      ++out.sets_checked;
      all_hold = all_hold && detail::density_holds(r.edges, r.usize, s, g);
      out.worst_ratio = std::min(out.worst_ratio, ratio(r.edges, r.usize));
    }
  }
  out.status = all_hold ? LemmaStatus::pass : LemmaStatus::fail;
  return out;
}

// ---------------------------------------------------------------------------
// Independent sets and the container lemma

inline constexpr std::size_t kIndependentSetGuard = 30;

namespace detail {

inline std::vector<std::uint64_t> adjacency_masks(const SimpleGraph& g) {
  std::vector<std::uint64_t> masks(g.vertex_count, 0);
  for (auto [u, v] : g.edges) {
    masks[u] |= std::uint64_t{1} << v;
    masks[v] |= std::uint64_t{1} << u;
  }
  return masks;
}

inline std::uint64_t count_independent(const std::vector<std::uint64_t>& masks, std::uint64_t allowed,
                                       std::size_t remaining) {
  if (remaining == 0) return 1;
  if (static_cast<std::size_t>(std::popcount(allowed)) < remaining) return 0;
  std::uint64_t total = 0;
  while (allowed) {
    if (static_cast<std::size_t>(std::popcount(allowed)) < remaining) break;
    const int v = std::countr_zero(allowed);
    allowed &= allowed - 1;
    total += count_independent(masks, allowed & ~masks[v], remaining - 1);
  }
  return total;
}

}  // namespace detail

// Number of independent sets of size k, by backtracking over vertex masks.
inline std::uint64_t count_independent_sets(const SimpleGraph& g, std::size_t k,
                                            std::size_t guard = kIndependentSetGuard) {
  if (g.vertex_count > guard || g.vertex_count > 64)
    throw FeasibilityError("independent-set count limited to " + std::to_string(std::min<std::size_t>(guard, 64)) +
                           " vertices");
  const auto masks = detail::adjacency_masks(g);
  const std::uint64_t all = g.vertex_count == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << g.vertex_count) - 1;
  return detail::count_independent(masks, all, k);
}

// min e(U) over |U| = k, by enumerating k-subsets (Gosper's hack).
inline std::uint64_t min_induced_edges(const SimpleGraph& g, std::size_t k) {
  if (g.vertex_count > 64) throw FeasibilityError("min_induced_edges limited to 64 vertices");
  if (k > g.vertex_count) throw ValidationError("subset size exceeds vertex count");
  if (k == 0) return 0;
  const auto masks = detail::adjacency_masks(g);
  const std::size_t n = g.vertex_count;
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t set = (k == 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  const std::uint64_t limit = n == 64 ? 0 : std::uint64_t{1} << n;
  for (;;) {
    std::uint64_t twice = 0;
    for (std::uint64_t rest = set; rest; rest &= rest - 1) twice += std::popcount(masks[std::countr_zero(rest)] & set);
    best = std::min(best, twice / 2);
    if (best == 0) break;
    const std::uint64_t c = set & (~set + 1);
    const std::uint64_t r = set + c;
    if (r == 0 || (limit && r >= limit)) break;
    set = (((r ^ set) >> 2) / c) | r;
    if (limit && set >= limit) break;
  }
  return best;
}

inline long double log2_binomial(long double n, long double k) {
  if (k < 0 || k > n) return -std::numeric_limits<long double>::infinity();
  return (std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)) / std::numbers::ln2_v<long double>;
}

inline std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("binomial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

struct ContainerReport {
  bool hypothesis_ok = false;
  std::string reason;  // why the hypothesis failed, if it did
  std::uint64_t independent_sets = 0;
  std::uint64_t bound = 0;  // C(N, q) C(R, r)
  bool holds = false;
};

// Container inequality #indep(G, q+r) <= C(N,q) C(R,r). The density
// hypothesis (every U with |U| >= R has e(U) >= beta C(|U|,2)) is verified
// exhaustively over |U| = R: averaging over the (|U|-1)-subsets shows the
// size-R condition implies it for every larger U.
inline ContainerReport verify_container_lemma(const SimpleGraph& g, std::size_t big_r, double beta, std::size_t q,
                                              std::size_t r) {
  ContainerReport out;
  const std::size_t n = g.vertex_count;
  if (big_r == 0 || big_r > n) {
    out.reason = "R must lie in [1, N]";
    return out;
  }
  if (!(beta > 0)) {
    out.reason = "beta must be positive";
    return out;
  }
  if (q == 0) {
    out.reason = "q must be positive";
    return out;
  }
  const long double need_q = std::log(static_cast<long double>(n) / big_r) / beta;
  if (static_cast<long double>(q) < need_q) {
    out.reason = "q < beta^-1 log(N/R)";
    return out;
  }
  if (big_r >= 2) {
    const std::uint64_t min_edges = min_induced_edges(g, big_r);
    if (static_cast<long double>(min_edges) < static_cast<long double>(beta) * (big_r * (big_r - 1) / 2.0L)) {
      out.reason = "density hypothesis fails at |U| = R";
      return out;
    }
  }
  out.hypothesis_ok = true;
  out.independent_sets = count_independent_sets(g, q + r, std::max<std::size_t>(kIndependentSetGuard, n));
  out.bound = binomial_u64(n, q) * binomial_u64(big_r, r);
  out.holds = out.independent_sets <= out.bound;
  return out;
}

// ---------------------------------------------------------------------------
// Bound evaluators (log2 of the right-hand sides)

struct BoundReport {
  nlohmann::json inputs;
  long double log2_bound = 0;
  bool hypothesis_ok = false;
};

inline nlohmann::json to_json(const BoundReport& r) {
  return nlohmann::json{{"inputs", r.inputs}, {"log2_bound", static_cast<double>(r.log2_bound)},
                        {"hypothesis_ok", r.hypothesis_ok}};
}

inline long double s0_large(std::uint64_t n, unsigned d) {
  const long double nd = static_cast<long double>(d);
  return std::cbrt(nd * std::ldexp(1.0L, static_cast<int>(d) + 1)) *
         std::pow(static_cast<long double>(n), nd / 3) * std::cbrt(std::log(static_cast<long double>(n)));
}

struct BoundInputsLarge {
  std::uint64_t n = 0;
  unsigned d = 1;
  long double t = 0;
};

// Z_{n,d}(t) <= n^{2(d+1) s0} (e 2^{d+5} n^d / t^2)^t for t >= 2 s0.
inline BoundReport bound_large(const BoundInputsLarge& in) {
  if (in.n < 1 || in.d < 1 || !(in.t > 0)) throw ValidationError("bound_large needs n, d >= 1 and t > 0");
  const long double s0 = s0_large(in.n, in.d);
  BoundReport out;
  out.inputs = {{"n", in.n}, {"d", in.d}, {"t", static_cast<double>(in.t)}, {"s0", static_cast<double>(s0)}};
  if (in.t < 2 * s0)
    throw HypothesisError("bound_large requires t >= 2 s0 (t=" + std::to_string(static_cast<double>(in.t)) +
                          ", 2 s0=" + std::to_string(static_cast<double>(2 * s0)) + ")");
  const long double log2n = std::log2(static_cast<long double>(in.n));
  const long double base = std::log2(std::numbers::e_v<long double>) + (in.d + 5) + in.d * log2n - 2 * std::log2(in.t);
  out.log2_bound = 2.0L * (in.d + 1) * s0 * log2n + in.t * base;
  out.hypothesis_ok = true;
  return out;
}

inline long double c_omega(long double omega) {
  return std::numbers::e_v<long double> * omega / std::pow(omega - 2, 1 - 2 / omega);
}

struct BoundInputsSmall {
  std::uint64_t n = 0;
  unsigned d = 1;
  long double gamma = 0;
  long double omega = 0;
};

inline long double s_star(std::uint64_t n, unsigned d, long double gamma) {
  const long double lg = std::log(gamma);
  return std::cbrt(std::ldexp(1.0L, static_cast<int>(d) + 1)) *
         std::pow(static_cast<long double>(n), static_cast<long double>(d) / 3) * std::cbrt(lg);
}

struct SmallBoundReport : BoundReport {
  long double s_star = 0;
  long double t = 0;
  long double c_omega = 0;
  long double log2_bound_c_omega = 0;  // same bound with C_omega in place of 4e
};

// Z_{n,d}(t) <= (4e n^d / (t gamma^{1-2/omega}))^t with t = omega s*,
// for 0 < gamma < s*/2^{d+1} and omega >= 4.
inline SmallBoundReport bound_small(const BoundInputsSmall& in) {
  if (in.n < 1 || in.d < 1) throw ValidationError("bound_small needs n, d >= 1");
  SmallBoundReport out;
  out.inputs = {{"n", in.n}, {"d", in.d}, {"gamma", static_cast<double>(in.gamma)}, {"omega", static_cast<double>(in.omega)}};
  if (!(in.gamma > 0)) throw HypothesisError("bound_small requires gamma > 0");
  if (!(in.omega >= 4)) throw HypothesisError("bound_small requires omega >= 4");
  out.s_star = s_star(in.n, in.d, in.gamma);
  if (!(in.gamma < out.s_star / std::ldexp(1.0L, static_cast<int>(in.d) + 1)))
    throw HypothesisError("bound_small requires gamma < s*/2^{d+1}");
  out.t = in.omega * out.s_star;
  out.c_omega = c_omega(in.omega);
  if (out.c_omega > 4 * std::numbers::e_v<long double>) throw std::logic_error("C_omega exceeds 4e");
  out.inputs["s_star"] = static_cast<double>(out.s_star);
  out.inputs["t"] = static_cast<double>(out.t);
  const long double log2_rest = in.d * std::log2(static_cast<long double>(in.n)) - std::log2(out.t) -
                                (1 - 2 / in.omega) * std::log2(in.gamma);
  out.log2_bound = out.t * (std::log2(4 * std::numbers::e_v<long double>) + log2_rest);
  out.log2_bound_c_omega = out.t * (std::log2(out.c_omega) + log2_rest);
  out.hypothesis_ok = true;
  return out;
}

struct DoublingSchedule {
  long double t = 0, s0 = 0;
  std::size_t K = 0;
  std::vector<long double> s;  // s_1 .. s_{K+1}, s_{K+1} = t
  std::vector<long double> q;  // q_1 .. q_K
  std::vector<long double> r;  // r_1 .. r_K
  long double q_sum = 0;
  bool extension_condition_ok = false;  // s_k^2 q_k >= s0^3 for all k
  std::vector<std::string> degeneracies;
};

// K is the largest integer with t 2^{-K} >= s0; s_k = t 2^{-K+k-1},
// q_k = s0 / 4^{k-1}, r_k = s_{k+1} - s_k - q_k.
inline DoublingSchedule schedule(long double t, long double s0) {
  if (!(s0 > 0)) throw ValidationError("schedule requires s0 > 0");
  if (t < 2 * s0) throw HypothesisError("schedule requires t >= 2 s0");
  DoublingSchedule out;
  out.t = t;
  out.s0 = s0;
  while (std::ldexp(t, -static_cast<int>(out.K + 1)) >= s0) ++out.K;
  for (std::size_t k = 1; k <= out.K + 1; ++k) out.s.push_back(std::ldexp(t, static_cast<int>(k) - 1 - static_cast<int>(out.K)));
  out.extension_condition_ok = true;
  const long double target = s0 * s0 * s0;
  for (std::size_t k = 1; k <= out.K; ++k) {
    const long double qk = std::ldexp(s0, -2 * (static_cast<int>(k) - 1));
    out.q.push_back(qk);
    out.r.push_back(out.s[k] - out.s[k - 1] - qk);
    out.q_sum += qk;
    // s_k^2 q_k is the same for every k; compare with a relative slack for rounding
    if (out.s[k - 1] * out.s[k - 1] * qk < target * (1 - 1e-15L)) out.extension_condition_ok = false;
    if (out.r.back() < 0) out.degeneracies.push_back("r_" + std::to_string(k) + " < 0");
    const long double qk_int = std::ceil(qk);
    if (out.s[k] - out.s[k - 1] - qk_int < 0)
      out.degeneracies.push_back("r_" + std::to_string(k) + " < 0 after rounding q_" + std::to_string(k) + " up");
  }
  return out;
}

inline nlohmann::json to_json(const DoublingSchedule& s) {
  auto reals = [](const std::vector<long double>& v) {
    std::vector<double> out(v.begin(), v.end());
    return out;
  };
  return nlohmann::json{{"t", static_cast<double>(s.t)}, {"s0", static_cast<double>(s.s0)}, {"K", s.K},
                        {"s", reals(s.s)}, {"q", reals(s.q)}, {"r", reals(s.r)},
                        {"q_sum", static_cast<double>(s.q_sum)},
                        {"extension_condition_ok", s.extension_condition_ok}, {"degeneracies", s.degeneracies}};
}

// log2 of sum_{t=1}^{T} C(n^d, t) with T = floor(n^{d/3} ln n), capped at n^d.
inline BoundReport bound_small_t_regime(std::uint64_t n, unsigned d) {
  if (n < 3) throw ValidationError("bound_small_t_regime requires n >= 3");
  const long double size = std::pow(static_cast<long double>(n), static_cast<long double>(d));
  long double top = std::floor(std::pow(static_cast<long double>(n), d / 3.0L) * std::log(static_cast<long double>(n)));
  top = std::min(top, size);
  BoundReport out;
  out.inputs = {{"n", n}, {"d", d}, {"t_max", static_cast<double>(top)}};
  long double peak = -std::numeric_limits<long double>::infinity();
  for (long double t = 1; t <= top; t += 1) peak = std::max(peak, log2_binomial(size, t));
  long double acc = 0;
  for (long double t = 1; t <= top; t += 1) acc += std::exp2(log2_binomial(size, t) - peak);
  out.log2_bound = peak + std::log2(acc);
  out.hypothesis_ok = true;
  return out;
}

// Base of the first-moment bound in the sparse middle regime,
// 4e n^d p / (t gamma^{1-2/omega}) with gamma = n^{2d} p^3 and t = omega s*.
struct FirstMomentBase {
  long double gamma = 0, s_star = 0, t = 0, base = 0;
  bool in_range = false;       // 2 n^{-2d/3} <= p <= n^{-2d/3 + delta}
  bool hypothesis_ok = false;  // 0 < gamma < s*/2^{d+1}, omega >= 4
};

inline FirstMomentBase first_moment_base(std::uint64_t n, unsigned d, long double p, long double omega,
                                         long double delta) {
  FirstMomentBase out;
  const long double ln_n = std::log(static_cast<long double>(n));
  const long double log_gamma = 2 * d * ln_n + 3 * std::log(p);
  out.gamma = std::exp(log_gamma);
  const long double lo = std::log(2.0L) - (2.0L * d / 3) * ln_n;
  const long double hi = (-2.0L * d / 3 + delta) * ln_n;
  out.in_range = std::log(p) >= lo && std::log(p) <= hi;
  if (!(log_gamma > 0)) return out;
  out.s_star = std::cbrt(std::ldexp(1.0L, static_cast<int>(d) + 1)) * std::exp(d * ln_n / 3) * std::cbrt(log_gamma);
  out.t = omega * out.s_star;
  out.hypothesis_ok = omega >= 4 && out.gamma < out.s_star / std::ldexp(1.0L, static_cast<int>(d) + 1);
  const long double log_base = std::log(4 * std::numbers::e_v<long double>) + d * ln_n + std::log(p) -
                               std::log(out.t) - (1 - 2 / omega) * log_gamma;
  out.base = std::exp(log_base);
  return out;
}

// ---------------------------------------------------------------------------
// Graph text formats

inline std::string format_edge_list(const CollisionGraph& g) {
  std::ostringstream os;
  for (auto [u, v] : g.rank_edges()) os << u << ' ' << v << '\n';
  return os.str();
}

inline std::vector<std::pair<Rank, Rank>> parse_edge_list(std::string_view text) {
  std::vector<std::pair<Rank, Rank>> out;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto hash = raw.find('#');
    auto line = detail::trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto sp = line.find_first_of(" \t");
    if (sp == std::string_view::npos) throw ParseError(line_no, "edge line needs two vertices");
    out.emplace_back(detail::parse_u64(line.substr(0, sp), line_no), detail::parse_u64(line.substr(sp + 1), line_no));
  }
  return out;
}

// "p edge N M" header, "e u v" lines with 1-based vertex indices.
inline std::string format_dimacs(const SimpleGraph& g, std::string_view comment = {}) {
  std::ostringstream os;
  if (!comment.empty()) os << "c " << comment << '\n';
  os << "p edge " << g.vertex_count << ' ' << g.edges.size() << '\n';
  for (auto [u, v] : g.edges) os << "e " << u + 1 << ' ' << v + 1 << '\n';
  return os.str();
}

inline SimpleGraph parse_dimacs(std::string_view text) {
  std::optional<std::size_t> vertices;
  std::size_t declared_edges = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == 'c') continue;
    auto fields = detail::split(line, ' ');
    std::erase_if(fields, [](std::string_view f) { return f.empty(); });
    if (fields[0] == "p") {
      if (fields.size() != 4 || fields[1] != "edge") throw ParseError(line_no, "expected 'p edge N M'");
      vertices = detail::parse_u64(fields[2], line_no);
      declared_edges = detail::parse_u64(fields[3], line_no);
    } else if (fields[0] == "e") {
      if (!vertices) throw ParseError(line_no, "edge before 'p edge' header");
      if (fields.size() != 3) throw ParseError(line_no, "expected 'e u v'");
      auto u = detail::parse_u64(fields[1], line_no), v = detail::parse_u64(fields[2], line_no);
      if (u < 1 || v < 1 || u > *vertices || v > *vertices) throw ParseError(line_no, "vertex index out of range");
      edges.emplace_back(static_cast<std::uint32_t>(u - 1), static_cast<std::uint32_t>(v - 1));
    } else {
      throw ParseError(line_no, "unknown line type '" + std::string(fields[0]) + "'");
    }
  }
  if (!vertices) throw ParseError(0, "missing 'p edge N M' header");
  if (edges.size() != declared_edges) throw ParseError(0, "edge count does not match header");
  try {
    return SimpleGraph::from_edges(*vertices, std::move(edges));
  } catch (const ValidationError& e) {
    throw ParseError(0, e.what());
  }
}

}  // namespace sidon
