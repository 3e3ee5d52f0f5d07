#pragma once

// Monte Carlo experiments on random subsets [n]^d_p: sampling, estimates of
// the maximum Sidon subset, parameter sweeps, exponent fits, concentration
// checks and the coupled interval/grid comparison.
//
// Trial i of a run draws from the stream make_stream(seed, i, purpose), so
// every number is reproducible from (seed, i) alone and independent of the
// thread count.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sidonlab/constructions.hpp"
#include "sidonlab/errors.hpp"
#include "sidonlab/exact.hpp"
#include "sidonlab/executor.hpp"
#include "sidonlab/grid.hpp"
#include "sidonlab/pointset_io.hpp"
#include "sidonlab/rng.hpp"

namespace sidon {

namespace stream_purpose {
inline constexpr std::uint64_t sample = 0;
inline constexpr std::uint64_t greedy = 1;
inline constexpr std::uint64_t coupled = 2;
}  // namespace stream_purpose

struct SampleSpec {
  GridParams grid{1, 1};
  double p = 1;
  std::optional<double> a;
  std::uint64_t seed = 0;
  std::size_t trials = 0;

  void validate() const {
    if (!(p > 0 && p <= 1)) throw ValidationError("p must lie in (0, 1]");
    if (a) {
      const double d = grid.d();
      if (!(*a > -d && *a <= 0)) throw ValidationError("a must lie in (-d, 0]");
      const double expected = std::pow(static_cast<double>(grid.n()), *a);
      if (std::abs(expected - p) > 1e-9 * std::max(1.0, expected)) throw ValidationError("p != n^a");
    }
  }
};

inline SampleSpec spec_from_exponent(const GridParams& g, double a, std::uint64_t seed, std::size_t trials) {
  SampleSpec s{g, std::pow(static_cast<double>(g.n()), a), a, seed, trials};
  s.validate();
  return s;
}

// Keeps rank r iff the r-th uniform draw of the trial's stream is below p.
inline RankSet sample_grid(const SampleSpec& spec, std::uint64_t trial) {
  auto rng = make_stream(spec.seed, trial, stream_purpose::sample);
  RankSet out;
  for (Rank r = 0; r < spec.grid.size(); ++r)
    if (uniform01(rng) < spec.p) out.push_back(r);
  return out;
}

enum class EstimateMode { exact, hybrid, greedy };

inline const char* to_string(EstimateMode m) {
  switch (m) {
    case EstimateMode::exact: return "exact";
    case EstimateMode::hybrid: return "hybrid";
    case EstimateMode::greedy: return "greedy";
  }
  return "?";
}

inline EstimateMode parse_estimate_mode(std::string_view s) {
  if (s == "exact") return EstimateMode::exact;
  if (s == "hybrid") return EstimateMode::hybrid;
  if (s == "greedy") return EstimateMode::greedy;
  throw ValidationError("mode must be exact, hybrid or greedy");
}

enum class SolverStatus { optimal, budget_exhausted, heuristic };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::budget_exhausted: return "budget-exhausted";
    case SolverStatus::heuristic: return "heuristic";
  }
  return "?";
}

struct FEstimate {
  std::size_t F_lower = 0;
  std::optional<std::size_t> F_exact;
  SolverStatus status = SolverStatus::heuristic;
  RankSet witness;
  std::uint64_t nodes = 0;
};

inline constexpr std::size_t kExactSampleLimit = 400;
inline constexpr std::uint64_t kDefaultSampleBudget = 100'000'000;

// One pass over R in the stream's random order, keeping every point that
// preserves the Sidon property.
inline RankSet greedy_sidon(std::span<const Rank> points, const GridParams& g, std::mt19937_64& rng) {
  RankSet order = normalize(points, g);
  shuffle_pinned(order.begin(), order.end(), rng);
  detail::Extender ext(order, g);
  for (detail::Index i = 0; i < order.size(); ++i)
    if (ext.compatible(i)) ext.push(i);
  RankSet out;
  for (auto i : ext.chosen()) out.push_back(order[i]);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline constexpr std::size_t kDefaultLocalSearchMoves = 20'000;

// Iterated local search from `start`: force a random outside point in, keep
// the old points that still fit (in random order), refill greedily from the
// rest of R, and move whenever the result is no smaller. Returns the largest
// set seen.
inline RankSet local_search_sidon(std::span<const Rank> points, const GridParams& g, const RankSet& start,
                                  std::size_t moves, std::mt19937_64& rng) {
  const RankSet r = normalize(points, g);
  if (r.empty() || moves == 0) return start;
  detail::Extender ext(r, g);
  std::vector<char> in(r.size(), 0);
  std::vector<detail::Index> current;
  for (auto x : start) {
    auto i = static_cast<detail::Index>(std::lower_bound(r.begin(), r.end(), x) - r.begin());
    if (i < r.size() && r[i] == x) current.push_back(i);
  }
  std::vector<detail::Index> best = current, order(r.size()), next;
  for (detail::Index i = 0; i < r.size(); ++i) order[i] = i;

  for (std::size_t move = 0; move < moves; ++move) {
    if (current.size() == r.size()) break;
    std::fill(in.begin(), in.end(), 0);
    for (auto i : current) in[i] = 1;
    detail::Index forced;
    do forced = static_cast<detail::Index>(uniform_below(rng, r.size()));
    while (in[forced]);

    ext.push(forced);
    shuffle_pinned(current.begin(), current.end(), rng);
    for (auto i : current)
      if (ext.compatible(i)) ext.push(i);
    shuffle_pinned(order.begin(), order.end(), rng);
    for (auto i : order)
      if (!in[i] && i != forced && ext.compatible(i)) ext.push(i);
    next = ext.chosen();
    while (ext.size()) ext.pop();

    if (next.size() >= current.size()) current = next;
    if (current.size() > best.size()) best = current;
  }
  RankSet out;
  for (auto i : best) out.push_back(r[i]);
  std::sort(out.begin(), out.end());
  return out;
}

inline constexpr std::uint64_t kStructuredWork = 50'000'000;

// Largest intersection of R with a translate of a dilated Singer set cut to
// [0, n^d), lifted to the grid. Empty when the scan would be too expensive.
inline RankSet structured_incumbent(std::span<const Rank> sorted_points, const GridParams& g) {
  const std::uint64_t size = g.size();
  if (sorted_points.empty() || size < 2) return {};
  std::uint64_t top = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::sqrt(static_cast<double>(size))));
  while (top > 1 && pds_modulus(top) >= size) --top;
  std::vector<std::uint64_t> qs;
  for (std::uint64_t q = top; qs.size() < 3 && q < 20'000; ++q)
    if (is_prime(q) && pds_modulus(q) >= size) qs.push_back(q);
  std::vector<char> in(size, 0);
  for (auto r : sorted_points) in[r] = 1;

  RankSet best;
  for (auto q : qs) {
    const std::uint64_t m = pds_modulus(q);
    if (m * (q + 1) * kWindowMultipliers > kStructuredWork) break;
    auto table = window_table(q);
    for (std::size_t mi = 0; mi < table->multipliers.size(); ++mi) {
      const auto& e = table->sorted[mi];
      std::size_t best_count = best.size();
      std::optional<std::uint64_t> best_shift;
      for (std::uint64_t s = 0; s < m; ++s) {
        std::size_t count = 0;
        for (auto x : e) {
          std::uint64_t y = x + s >= m ? x + s - m : x + s;
          count += y < size && in[y];
        }
        if (count > best_count) {
          best_count = count;
          best_shift = s;
        }
      }
      if (!best_shift) continue;
      best.clear();
      for (auto x : e) {
        std::uint64_t y = (x + *best_shift) % m;
        if (y < size && in[y]) best.push_back(y);
      }
      std::sort(best.begin(), best.end());
    }
  }
  return best;  // ranks in [0, n^d) are also grid ranks; Sidon in [n^d] implies Sidon in [n]^d
}

}  // namespace detail

// exact: branch and bound on R with a Singer-based fallback incumbent (falls
// back to hybrid when |R| > 400); hybrid: the same plus a greedy incumbent;
// greedy: one random-order pass.
inline FEstimate estimate_F(std::span<const Rank> points, const GridParams& g, std::uint64_t budget, EstimateMode mode,
                            std::mt19937_64& rng, std::size_t local_moves = detail::kDefaultLocalSearchMoves) {
  const RankSet r = normalize(points, g);
  FEstimate out;
  if (is_sidon(r, g).is_sidon) {
    out.F_lower = r.size();
    out.F_exact = r.size();
    out.status = SolverStatus::optimal;
    out.witness = r;
    return out;
  }
  if (mode == EstimateMode::exact && r.size() > kExactSampleLimit) mode = EstimateMode::hybrid;

  RankSet incumbent = detail::structured_incumbent(r, g);
  if (mode != EstimateMode::exact) {
    auto greedy = greedy_sidon(r, g, rng);
    if (mode == EstimateMode::greedy) {
      out.F_lower = greedy.size();
      out.witness = std::move(greedy);
      out.status = SolverStatus::heuristic;
      return out;
    }
    if (greedy.size() > incumbent.size()) incumbent = std::move(greedy);
    incumbent = detail::local_search_sidon(r, g, incumbent, local_moves, rng);
  }
  auto res = max_sidon_subset(r, g, budget, incumbent);
  out.F_lower = res.size;
  out.witness = std::move(res.witness);
  out.nodes = res.nodes_explored;
  if (res.optimal) {
    out.F_exact = res.size;
    out.status = SolverStatus::optimal;
  } else {
    out.status = SolverStatus::budget_exhausted;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

struct ExperimentRecord {
  std::uint64_t n = 0;
  unsigned d = 1;
  double p = 1;
  std::optional<double> a;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::size_t sample_size = 0;
  std::size_t F_lower = 0;
  std::optional<std::size_t> F_exact;
  SolverStatus status = SolverStatus::heuristic;
  std::optional<double> elapsed_s;  // only when timing was requested
};

inline constexpr const char* kRecordCsvHeader = "n,d,p,a,seed,trial,sample_size,F_lower,F_exact,status,elapsed_s";

// Shortest round-trip representation, independent of the locale.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string to_csv_line(const ExperimentRecord& r) {
  std::string out;
  out += std::to_string(r.n) + ',' + std::to_string(r.d) + ',' + format_double(r.p) + ',';
  if (r.a) out += format_double(*r.a);
  out += ',' + std::to_string(r.seed) + ',' + std::to_string(r.trial) + ',' + std::to_string(r.sample_size) + ',' +
         std::to_string(r.F_lower) + ',';
  if (r.F_exact) out += std::to_string(*r.F_exact);
  out += ',';
  out += to_string(r.status);
  out += ',';
  if (r.elapsed_s) out += format_double(*r.elapsed_s);
  return out;
}

inline nlohmann::json to_json(const ExperimentRecord& r) {
  nlohmann::json j{{"n", r.n}, {"d", r.d}, {"p", r.p}, {"a", nullptr}, {"seed", r.seed}, {"trial", r.trial},
                   {"sample_size", r.sample_size}, {"F_lower", r.F_lower}, {"F_exact", nullptr},
                   {"status", to_string(r.status)}, {"elapsed_s", nullptr}};
  if (r.a) j["a"] = *r.a;
  if (r.F_exact) j["F_exact"] = *r.F_exact;
  if (r.elapsed_s) j["elapsed_s"] = *r.elapsed_s;
  return j;
}

namespace detail {

inline SolverStatus parse_status(std::string_view s) {
  if (s == "optimal") return SolverStatus::optimal;
  if (s == "budget-exhausted") return SolverStatus::budget_exhausted;
  if (s == "heuristic") return SolverStatus::heuristic;
  throw ValidationError("unknown solver status '" + std::string(s) + "'");
}

inline double parse_double(std::string_view s, std::size_t line) {
  double x = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(line, "invalid number '" + std::string(s) + "'");
  return x;
}

}  // namespace detail

// Parses the CSV produced by to_csv_line (header line required).
inline std::vector<ExperimentRecord> parse_records_csv(std::string_view text) {
  std::vector<ExperimentRecord> out;
  auto lines = detail::split(text, '\n');
  std::size_t line_no = 0;
  bool header_seen = false;
  for (auto raw : lines) {
    ++line_no;
    auto line = detail::trim(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kRecordCsvHeader) throw ParseError(line_no, "missing record header");
      header_seen = true;
      continue;
    }
    auto f = detail::split(line, ',');
    if (f.size() != 11) throw ParseError(line_no, "expected 11 fields");
    ExperimentRecord r;
    r.n = detail::parse_u64(f[0], line_no);
    r.d = static_cast<unsigned>(detail::parse_u64(f[1], line_no));
    r.p = detail::parse_double(f[2], line_no);
    if (!f[3].empty()) r.a = detail::parse_double(f[3], line_no);
    r.seed = detail::parse_u64(f[4], line_no);
    r.trial = detail::parse_u64(f[5], line_no);
    r.sample_size = detail::parse_u64(f[6], line_no);
    r.F_lower = detail::parse_u64(f[7], line_no);
    if (!f[8].empty()) r.F_exact = detail::parse_u64(f[8], line_no);
    try {
      r.status = detail::parse_status(f[9]);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    if (!f[10].empty()) r.elapsed_s = detail::parse_double(f[10], line_no);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
  unsigned d = 1;
  double a = 0;
  std::vector<std::uint64_t> n_values;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  EstimateMode mode = EstimateMode::exact;
  std::uint64_t budget = kDefaultSampleBudget;
  bool timing = false;
};

inline ExperimentRecord run_trial(const SampleSpec& spec, std::uint64_t trial, EstimateMode mode,
                                  std::uint64_t budget, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  const RankSet r = sample_grid(spec, trial);
  auto rng = make_stream(spec.seed, trial, stream_purpose::greedy);
  const FEstimate est = estimate_F(r, spec.grid, budget, mode, rng);
  ExperimentRecord rec;
  rec.n = spec.grid.n();
  rec.d = spec.grid.d();
  rec.p = spec.p;
  rec.a = spec.a;
  rec.seed = spec.seed;
  rec.trial = trial;
  rec.sample_size = r.size();
  rec.F_lower = est.F_lower;
  rec.F_exact = est.F_exact;
  rec.status = est.status;
  if (timing)
    rec.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// Runs every (n, trial) pair; `sink` sees records in (n-list order, trial)
// order as soon as each prefix is complete, so callers can append to a file
// incrementally. Trial indices run on across the n-list, so each record is
// reproducible from its (n, d, p, seed, trial) alone.
inline std::vector<ExperimentRecord> run_sweep(const SweepConfig& cfg, const Executor& exec,
                                               const std::function<void(const ExperimentRecord&)>& sink = {}) {
  if (!(cfg.a > -static_cast<double>(cfg.d) && cfg.a <= 0)) throw ValidationError("a must lie in (-d, 0]");
  std::vector<SampleSpec> specs;
  for (auto n : cfg.n_values) specs.push_back(spec_from_exponent(GridParams(n, cfg.d), cfg.a, cfg.seed, cfg.trials));
  std::vector<ExperimentRecord> out;
  exec.map_ordered(
      specs.size() * cfg.trials,
      [&](std::size_t i) { return run_trial(specs[i / cfg.trials], i, cfg.mode, cfg.budget, cfg.timing); },
      [&](std::size_t, ExperimentRecord&& rec) {
        if (sink) sink(rec);
        out.push_back(std::move(rec));
      });
  return out;
}

// ---------------------------------------------------------------------------
// Exponent fits

// Piecewise exponent with F([n]^d_p) = n^{b + o(1)} for p = n^a.
inline double b_of_a(double a, unsigned d) {
  const double dd = d;
  if (!(a > -dd && a <= 0)) throw ValidationError("a must lie in (-d, 0]");
  if (a <= -2 * dd / 3) return a + dd;
  if (a <= -dd / 3) return dd / 3;
  return (a + dd) / 2;
}

struct ExponentFit {
  double a = 0;
  unsigned d = 1;
  std::vector<std::uint64_t> n_values;
  std::vector<double> mean_log_F;
  double b_hat = 0;
  double stderr_ = 0;
  double b_predicted = 0;
  double gap = 0;
};

inline constexpr std::size_t kMinFitPoints = 4;
inline constexpr std::size_t kMinFitTrials = 8;

// Least-squares slope of mean_i log max(F_i, 1) against log n. The floor at
// 1 keeps empty samples (F = 0) finite.
inline ExponentFit fit_exponent(std::span<const ExperimentRecord> records) {
  if (records.empty()) throw ValidationError("no records to fit");
  ExponentFit fit;
  fit.d = records.front().d;
  if (!records.front().a) throw ValidationError("records carry no exponent a");
  fit.a = *records.front().a;
  std::map<std::uint64_t, std::pair<double, std::size_t>> by_n;
  for (const auto& r : records) {
    if (r.d != fit.d || !r.a || std::abs(*r.a - fit.a) > 1e-12)
      throw ValidationError("records mix different (a, d)");
    auto& [sum, count] = by_n[r.n];
    sum += std::log(static_cast<double>(std::max<std::size_t>(r.F_lower, 1)));
    ++count;
  }
  if (by_n.size() < kMinFitPoints)
    throw ValidationError("insufficient data: need at least " + std::to_string(kMinFitPoints) + " distinct n");
  for (const auto& [n, acc] : by_n) {
    if (acc.second < kMinFitTrials)
      throw ValidationError("insufficient data: n=" + std::to_string(n) + " has fewer than " +
                            std::to_string(kMinFitTrials) + " trials");
    fit.n_values.push_back(n);
    fit.mean_log_F.push_back(acc.first / static_cast<double>(acc.second));
  }
  const std::size_t k = fit.n_values.size();
  double mx = 0, my = 0;
  std::vector<double> x(k);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::log(static_cast<double>(fit.n_values[i]));
    mx += x[i];
    my += fit.mean_log_F[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (fit.mean_log_F[i] - my);
  }
  fit.b_hat = sxy / sxx;
  double ssr = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double resid = fit.mean_log_F[i] - (my + fit.b_hat * (x[i] - mx));
    ssr += resid * resid;
  }
  fit.stderr_ = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
  fit.b_predicted = b_of_a(fit.a, fit.d);
  fit.gap = std::abs(fit.b_hat - fit.b_predicted);
  return fit;
}

inline nlohmann::json to_json(const ExponentFit& f) {
  return nlohmann::json{{"a", f.a},           {"d", f.d},           {"n_values", f.n_values},
                        {"mean_log_F", f.mean_log_F}, {"b_hat", f.b_hat}, {"stderr", f.stderr_},
                        {"b_predicted", f.b_predicted}, {"gap", f.gap}};
}

// Rows "a,b_hat,b_predicted" for plotting the exponent curve.
inline std::string plot_csv(std::span<const ExponentFit> fits) {
  std::string out = "a,b_hat,b_predicted\n";
  for (const auto& f : fits)
    out += format_double(f.a) + ',' + format_double(f.b_hat) + ',' + format_double(f.b_predicted) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Concentration of |R|

struct ChernoffReport {
  double lambda = 0;
  double expected = 0;      // n^d p
  std::size_t trials = 0;
  std::size_t deviations = 0;  // trials with ||R| - n^d p| >= lambda n^d p
  double empirical = 0;
  double ceiling = 0;       // 2 exp(-lambda^2 E / 3)
  double stderr_ = 0;       // binomial standard error at rate min(ceiling, 1)
  bool pass = false;
};

inline double chernoff_ceiling(double lambda, double expected) {
  return 2 * std::exp(-lambda * lambda * expected / 3);
}

// |R| for the same trial streams sample_grid uses, without storing R.
inline std::size_t sample_size(const SampleSpec& spec, std::uint64_t trial) {
  auto rng = make_stream(spec.seed, trial, stream_purpose::sample);
  std::size_t count = 0;
  for (Rank r = 0; r < spec.grid.size(); ++r) count += uniform01(rng) < spec.p;
  return count;
}

inline ChernoffReport chernoff_check(const SampleSpec& spec, double lambda, const Executor& exec = Executor(1)) {
  spec.validate();
  if (!(lambda > 0 && lambda < 1)) throw ValidationError("lambda must lie in (0, 1)");
  ChernoffReport out;
  out.lambda = lambda;
  out.trials = spec.trials;
  out.expected = static_cast<double>(spec.grid.size()) * spec.p;
  auto sizes = exec.map(spec.trials, [&](std::size_t i) { return sample_size(spec, i); });
  for (auto x : sizes)
    if (std::abs(static_cast<double>(x) - out.expected) >= lambda * out.expected) ++out.deviations;
  out.empirical = spec.trials ? static_cast<double>(out.deviations) / static_cast<double>(spec.trials) : 0.0;
  out.ceiling = chernoff_ceiling(lambda, out.expected);
  const double rate = std::min(out.ceiling, 1.0);
  out.stderr_ = spec.trials ? std::sqrt(rate * (1 - rate) / static_cast<double>(spec.trials)) : 0.0;
  out.pass = out.empirical <= out.ceiling + 3 * out.stderr_;
  return out;
}

inline nlohmann::json to_json(const ChernoffReport& r) {
  return nlohmann::json{{"lambda", r.lambda},       {"expected", r.expected}, {"trials", r.trials},
                        {"deviations", r.deviations}, {"empirical", r.empirical}, {"ceiling", r.ceiling},
                        {"stderr", r.stderr_},       {"pass", r.pass}};
}

// ---------------------------------------------------------------------------
// Regimes of F([n]^d_p)

struct RegimeConstants {
  double c1 = 1, c2 = 1, c3 = 1, c4 = 1, c5 = 1, c6 = 1;
  double small_lower = 1.0 / 3;  // F >= (1/3) n^d p up to p = 2 n^{-2d/3}
};

struct RegimeEntry {
  std::string name;  // "small", "middle", "middle_large", "large"
  double lower = 0;  // bracketing expressions with the configured constants
  double upper = 0;
  std::optional<double> c_lower_hat;  // F / (lower expression without its constant)
  std::optional<double> c_upper_hat;  // F / (upper expression without its constant)
};

struct RegimeReport {
  std::uint64_t n = 0;
  unsigned d = 1;
  double p = 0;
  double epsilon = 0;
  std::optional<double> F;
  std::vector<RegimeEntry> regimes;  // two entries on a boundary
};

// Thresholds (natural logarithms):
//   small:         n^{-d} < p <= 2 n^{-2d/3}
//   middle:        2 n^{-2d/3} <= p <= n^{-d/3-eps}
//   middle_large:  n^{-d/3-eps} <= p <= n^{-d/3} (log n)^{8/3}
//   large:         n^{-d/3} (log n)^{8/3} <= p <= 1
// eps defaults to d/9. A p within relative 1e-9 of a threshold belongs to both
// neighbouring regimes.
inline RegimeReport regime_bounds_report(std::uint64_t n, unsigned d, double p, std::optional<double> F = std::nullopt,
                                         const RegimeConstants& c = {}, std::optional<double> epsilon = std::nullopt) {
  if (n < 2) throw ValidationError("regime report needs n >= 2");
  const double dd = d, nn = static_cast<double>(n), ln = std::log(nn);
  const double eps = epsilon.value_or(dd / 9);
  if (!(eps > 0 && eps < dd / 3)) throw ValidationError("epsilon must lie in (0, d/3)");
  if (!(p > std::pow(nn, -dd) && p <= 1)) throw ValidationError("p must lie in (n^-d, 1]");
  RegimeReport out{n, d, p, eps, F, {}};

  const double t1 = 2 * std::pow(nn, -2 * dd / 3);
  const double t2 = std::pow(nn, -dd / 3 - eps);
  const double t3 = std::pow(nn, -dd / 3) * std::pow(ln, 8.0 / 3);
  auto le = [](double x, double bound) { return x <= bound * (1 + 1e-9); };
  auto ge = [](double x, double bound) { return x >= bound * (1 - 1e-9); };

  auto entry = [&](std::string name, double lower_expr, double upper_expr, double cl, double cu) {
    RegimeEntry e{std::move(name), cl * lower_expr, cu * upper_expr, std::nullopt, std::nullopt};
    if (F) {
      e.c_lower_hat = *F / lower_expr;
      e.c_upper_hat = *F / upper_expr;
    }
    out.regimes.push_back(std::move(e));
  };
  const double np = std::pow(nn, dd) * p;
  const double n13 = std::pow(nn, dd / 3);
  if (le(p, t1)) entry("small", np, np, c.small_lower, 1.0);
  if (ge(p, t1) && le(p, t2) && t1 <= t2 * (1 + 1e-9)) {
    const double expr = n13 * std::cbrt(std::log(std::pow(nn, 2 * dd) * p * p * p));
    entry("middle", expr, expr, c.c1, c.c2);
  }
  if (ge(p, t2) && le(p, t3)) entry("middle_large", n13 * std::cbrt(ln), n13 * std::pow(ln, 4.0 / 3), c.c3, c.c4);
  if (ge(p, t3)) {
    const double expr = std::pow(nn, dd / 2) * std::sqrt(p);
    entry("large", expr, expr, c.c5, c.c6);
  }
  return out;
}

inline nlohmann::json to_json(const RegimeReport& r) {
  nlohmann::json regimes = nlohmann::json::array();
  for (const auto& e : r.regimes) {
    nlohmann::json j{{"name", e.name}, {"lower", e.lower}, {"upper", e.upper}};
    if (e.c_lower_hat) j["c_lower_hat"] = *e.c_lower_hat;
    if (e.c_upper_hat) j["c_upper_hat"] = *e.c_upper_hat;
    regimes.push_back(j);
  }
  nlohmann::json j{{"n", r.n}, {"d", r.d}, {"p", r.p}, {"epsilon", r.epsilon}, {"regimes", regimes}};
  if (r.F) j["F"] = *r.F;
  return j;
}

// ---------------------------------------------------------------------------
// Interval sample vs. its digit image

struct TransferPair {
  std::uint64_t trial = 0;
  std::size_t sample_size = 0;
  std::size_t F_interval = 0;
  std::size_t F_grid = 0;
  bool resolved = false;  // both searches proved optimality
  bool holds = true;      // F_grid >= F_interval, and the lifted witness is Sidon
};

struct TransferReport {
  std::uint64_t n = 0;
  unsigned d = 1;
  double p = 0;
  std::uint64_t seed = 0;
  std::vector<TransferPair> pairs;
  std::size_t failures = 0;
  std::size_t unresolved = 0;
};

// One Bernoulli(p) draw per integer a < n^d decides membership on both sides:
// R1 = {a} in [n^d] and R2 = phi_d(R1) in [n]^d.
inline TransferReport transfer_check(std::uint64_t n, unsigned d, double p, std::size_t trials, std::uint64_t seed,
                                     std::uint64_t budget = kDefaultSampleBudget,
                                     const Executor& exec = Executor(1)) {
  const GridParams grid(n, d);
  const GridParams interval(grid.size(), 1);
  SampleSpec spec{grid, p, std::nullopt, seed, trials};
  spec.validate();
  TransferReport out{n, d, p, seed, {}, 0, 0};
  out.pairs = exec.map(trials, [&](std::size_t trial) {
    auto rng = make_stream(seed, trial, stream_purpose::coupled);
    RankSet r;
    for (Rank a = 0; a < grid.size(); ++a)
      if (uniform01(rng) < p) r.push_back(a);
    TransferPair tp;
    tp.trial = trial;
    tp.sample_size = r.size();
    auto f1 = max_sidon_subset(r, interval, budget);
    auto f2 = max_sidon_subset(lift_sidon(r, grid), grid, budget);
    tp.F_interval = f1.size;
    tp.F_grid = f2.size;
    tp.resolved = f1.optimal && f2.optimal;
    const bool lifted_ok = is_sidon(lift_sidon(f1.witness, grid), grid).is_sidon;
    tp.holds = lifted_ok && (!tp.resolved || tp.F_grid >= tp.F_interval);
    return tp;
  });
  for (const auto& tp : out.pairs) {
    out.failures += !tp.holds;
    out.unresolved += !tp.resolved;
  }
  return out;
}

inline nlohmann::json to_json(const TransferReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& tp : r.pairs)
    pairs.push_back({{"trial", tp.trial}, {"sample_size", tp.sample_size}, {"F_interval", tp.F_interval},
                     {"F_grid", tp.F_grid}, {"resolved", tp.resolved}, {"holds", tp.holds}});
  return nlohmann::json{{"n", r.n}, {"d", r.d}, {"p", r.p}, {"seed", r.seed}, {"trials", r.pairs.size()},
                        {"failures", r.failures}, {"unresolved", r.unresolved}, {"pairs", pairs}};
}

}  // namespace sidon
