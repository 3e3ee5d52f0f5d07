#pragma once

// Exact maximum Sidon subsets and exact counts Z_{n,d}(t) by backtracking.
//
// All searches extend a Sidon set S one point at a time over rank-ordered
// candidates. The set of pairwise sums of S is kept in a bitset over sum
// ranks (base 2n-1), so testing whether y extends S costs |S|+1 lookups:
// every y+s (s in S) and 2y must be new.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "json.hpp"
#include "sidonlab/constructions.hpp"
#include "sidonlab/errors.hpp"
#include "sidonlab/grid.hpp"

namespace sidon {

struct MaxSidonResult {
  std::size_t size = 0;
  RankSet witness;
  std::uint64_t nodes_explored = 0;
  bool optimal = false;
};

struct CountProfile {
  GridParams grid{1, 1};
  std::vector<std::uint64_t> counts;  // counts[t] = Z_{n,d}(t), t = 0..F
  std::uint64_t total = 0;            // includes the empty set
};

inline constexpr std::uint64_t kDefaultCountGuard = 1'000'000'000;

namespace detail {

// Pairwise sums of the current set, over sum ranks. Dense bitset when the sum
// space is small enough, hash set otherwise.
class SumSet {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 30;

  explicit SumSet(const GridParams& g) {
    std::uint64_t space = g.sum_size_or_zero();
    if (space != 0 && space <= kDenseLimit) dense_.resize(space);
  }
  bool test(Rank w) const { return dense_.size() ? dense_.test(w) : sparse_.count(w) != 0; }
  void set(Rank w) {
    if (dense_.size()) dense_.set(w);
    else sparse_.insert(w);
  }
  void reset(Rank w) {
    if (dense_.size()) dense_.reset(w);
    else sparse_.erase(w);
  }

 private:
  boost::dynamic_bitset<std::uint64_t> dense_;
  std::unordered_set<Rank> sparse_;
};

using Index = std::uint32_t;

class Extender {
 public:
  Extender(std::span<const Rank> candidates, const GridParams& g) : sums_(g) {
    if (candidates.size() >= std::numeric_limits<Index>::max()) throw FeasibilityError("too many candidate points");
    embed_.reserve(candidates.size());
    for (auto r : candidates) embed_.push_back(sum_embed(r, g));
  }

  std::size_t candidate_count() const { return embed_.size(); }
  std::size_t size() const { return chosen_.size(); }
  const std::vector<Index>& chosen() const { return chosen_; }

  bool compatible(Index y) const {
    const Rank ey = embed_[y];
    if (sums_.test(2 * ey)) return false;
    for (Index s : chosen_)
      if (sums_.test(ey + embed_[s])) return false;
    return true;
  }

  void push(Index x) {
    const Rank ex = embed_[x];
    for (Index s : chosen_) sums_.set(ex + embed_[s]);
    sums_.set(2 * ex);
    chosen_.push_back(x);
  }

  void pop() {
    Index x = chosen_.back();
    chosen_.pop_back();
    const Rank ex = embed_[x];
    for (Index s : chosen_) sums_.reset(ex + embed_[s]);
    sums_.reset(2 * ex);
  }

  // Candidates of `from` that still extend the current set.
  void filter(std::span<const Index> from, std::vector<Index>& out) const {
    out.clear();
    for (Index y : from)
      if (compatible(y)) out.push_back(y);
  }

 private:
  std::vector<Rank> embed_;
  std::vector<Index> chosen_;
  SumSet sums_;
};

struct BudgetExhausted {};

inline std::vector<Index> iota_indices(std::size_t count) {
  std::vector<Index> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<Index>(i);
  return out;
}

class Counter {
 public:
  Counter(std::span<const Rank> points, const GridParams& g, std::uint64_t guard,
          std::optional<std::size_t> target)
      : ext_(points, g), guard_(guard), target_(target) {}

  std::vector<std::uint64_t> run() {
    auto all = iota_indices(ext_.candidate_count());
    levels_.resize(1);
    recurse(all, 0);
    while (counts_.size() > 1 && counts_.back() == 0) counts_.pop_back();
    return counts_;
  }
  std::uint64_t nodes() const { return nodes_; }

 private:
  void recurse(std::span<const Index> cands, std::size_t depth) {
    if (++nodes_ > guard_ && guard_ != 0)
      throw FeasibilityError("too large for exact count: more than " + std::to_string(guard_) +
                             " search nodes (feasibility guard)");
    const std::size_t size = ext_.size();
    if (counts_.size() <= size) counts_.resize(size + 1, 0);
    ++counts_[size];
    if (target_ && size >= *target_) return;
    if (levels_.size() <= depth + 1) levels_.resize(depth + 2);
    for (std::size_t k = 0; k < cands.size(); ++k) {
      if (target_ && size + (cands.size() - k) < *target_) return;
      ext_.push(cands[k]);
      ext_.filter(cands.subspan(k + 1), levels_[depth + 1]);
      recurse(levels_[depth + 1], depth + 1);
      ext_.pop();
    }
  }

  Extender ext_;
  std::uint64_t guard_;
  std::optional<std::size_t> target_;
  std::uint64_t nodes_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::vector<Index>> levels_;
};

// Knuth's random-probe estimate of the number of Sidon subsets (search-tree
// nodes) of `points`. Deterministic for a fixed seed.
inline double estimate_tree_size(std::span<const Rank> points, const GridParams& g, std::size_t probes,
                                 std::uint64_t seed) {
  Extender ext(points, g);
  std::mt19937_64 rng(seed);
  double sum = 0;
  std::vector<Index> cands, next;
  for (std::size_t p = 0; p < probes; ++p) {
    cands = iota_indices(points.size());
    double weight = 1, total = 1;
    while (!cands.empty()) {
      weight *= static_cast<double>(cands.size());
      total += weight;
      std::size_t k = rng() % cands.size();
      ext.push(cands[k]);
      ext.filter(std::span<const Index>(cands).subspan(k + 1), next);
      cands.swap(next);
    }
    while (ext.size()) ext.pop();
    sum += total;
  }
  return probes ? sum / static_cast<double>(probes) : 0.0;
}

// Russian-doll search: best[i] is the maximum Sidon subset of points[i..].
// Stage i asks only whether points[i] starts a set of size best[i+1]+1, and
// every deeper branch at candidate j is cut when |S| + best[j] cannot reach
// the target.
class MaxSearch {
 public:
  MaxSearch(std::span<const Rank> points, const GridParams& g, std::uint64_t budget)
      : points_(points), ext_(points, g), budget_(budget) {}

  MaxSidonResult run(const RankSet& incumbent) {
    const std::size_t m = points_.size();
    best_.assign(m + 1, 0);
    MaxSidonResult out;
    bool complete = true;
    try {
      for (std::size_t i = m; i-- > 0;) {
        target_ = best_[i + 1] + 1;
        ext_.push(static_cast<Index>(i));
        if (levels_.empty()) levels_.resize(1);
        std::vector<Index> tail;
        tail.reserve(m - i - 1);
        for (std::size_t j = i + 1; j < m; ++j) tail.push_back(static_cast<Index>(j));
        ext_.filter(tail, levels_[0]);
        bool found = extend(levels_[0], 0);
        while (ext_.size()) ext_.pop();
        best_[i] = found ? target_ : best_[i + 1];
      }
    } catch (const BudgetExhausted&) {
      complete = false;
      while (ext_.size()) ext_.pop();
    }
    out.nodes_explored = nodes_;
    out.optimal = complete;
    out.witness = witness_;
    if (!complete && incumbent.size() > out.witness.size()) out.witness = incumbent;
    if (complete && out.witness.empty() && m > 0) out.witness = {points_[0]};
    out.size = out.witness.size();
    return out;
  }

 private:
  bool extend(std::span<const Index> cands, std::size_t depth) {
    if (budget_ != 0 && nodes_ >= budget_) throw BudgetExhausted{};
    ++nodes_;
    const std::size_t size = ext_.size();
    if (size >= target_) {
      witness_.clear();
      for (Index x : ext_.chosen()) witness_.push_back(points_[x]);
      std::sort(witness_.begin(), witness_.end());
      return true;
    }
    if (levels_.size() <= depth + 1) levels_.resize(depth + 2);
    for (std::size_t k = 0; k < cands.size(); ++k) {
      if (size + (cands.size() - k) < target_) return false;
      if (size + best_[cands[k]] < target_) return false;
      ext_.push(cands[k]);
      ext_.filter(cands.subspan(k + 1), levels_[depth + 1]);
      bool found = extend(levels_[depth + 1], depth + 1);
      ext_.pop();
      if (found) return true;
    }
    return false;
  }

  std::span<const Rank> points_;
  Extender ext_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::size_t target_ = 0;
  std::vector<std::size_t> best_;
  std::vector<std::vector<Index>> levels_;
  RankSet witness_;
};

inline RankSet all_points(const GridParams& g) {
  if (g.size() > (std::uint64_t{1} << 26)) throw FeasibilityError("grid too large for exhaustive search");
  RankSet out(g.size());
  for (Rank r = 0; r < g.size(); ++r) out[r] = r;
  return out;
}

}  // namespace detail

// Maximum Sidon subset of R. budget is a node limit (0 = unlimited); when it
// runs out the larger of the best set found and `incumbent` is returned with
// optimal = false.
inline MaxSidonResult max_sidon_subset(std::span<const Rank> points, const GridParams& g, std::uint64_t budget = 0,
                                       const RankSet& incumbent = {}) {
  const RankSet r = normalize(points, g);
  if (is_sidon(r, g).is_sidon) return MaxSidonResult{r.size(), r, 0, true};
  detail::MaxSearch search(r, g, budget);
  return search.run(incumbent);
}

// F([n]^d), seeded with the dense construction as the fallback incumbent.
inline MaxSidonResult max_sidon_exact(const GridParams& g, std::uint64_t budget = 0) {
  const RankSet all = detail::all_points(g);
  return max_sidon_subset(all, g, budget, dense_sidon_in_grid(g));
}

inline CountProfile count_profile(const GridParams& g, std::uint64_t guard = kDefaultCountGuard) {
  const RankSet all = detail::all_points(g);
  if (guard != 0) {
    double estimate = detail::estimate_tree_size(all, g, 64, 0x5eed);
    if (estimate > static_cast<double>(guard))
      throw FeasibilityError("too large for exact count: estimated " + std::to_string(estimate) +
                             " Sidon subsets exceeds the feasibility guard of " + std::to_string(guard));
  }
  detail::Counter counter(all, g, guard, std::nullopt);
  CountProfile out{g, counter.run(), 0};
  for (auto c : out.counts) out.total += c;
  return out;
}

// Z_{n,d}(t) alone; branches that cannot reach size t are abandoned.
inline std::uint64_t count_of_size(const GridParams& g, std::size_t t, std::uint64_t guard = kDefaultCountGuard) {
  if (t == 0) return 1;
  const RankSet all = detail::all_points(g);
  if (t > all.size()) return 0;
  detail::Counter counter(all, g, guard, t);
  auto counts = counter.run();
  return t < counts.size() ? counts[t] : 0;
}

inline std::string to_csv(const CountProfile& p) {
  std::ostringstream os;
  for (std::size_t t = 0; t < p.counts.size(); ++t) os << t << ',' << p.counts[t] << '\n';
  return os.str();
}

inline nlohmann::json to_json(const CountProfile& p) {
  return nlohmann::json{{"n", p.grid.n()}, {"d", p.grid.d()}, {"counts", p.counts}, {"total", p.total}};
}

inline nlohmann::json to_json(const MaxSidonResult& r) {
  return nlohmann::json{{"size", r.size},
                        {"witness", r.witness},
                        {"nodes_explored", r.nodes_explored},
                        {"optimal", r.optimal}};
}

}  // namespace sidon
