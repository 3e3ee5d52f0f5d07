// sidonlab command-line tool.
//
// Exit codes: 0 success / affirmative, 1 negative finding, 2 usage or parse
// error, 3 budget or feasibility limit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sidonlab/constructions.hpp"
#include "sidonlab/containers.hpp"
#include "sidonlab/exact.hpp"
#include "sidonlab/grid.hpp"
#include "sidonlab/pointset_io.hpp"
#include "sidonlab/random_lab.hpp"

namespace {

using nlohmann::json;
using namespace sidon;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitLimit = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out;
  std::string format;
  std::uint64_t budget = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Writes to --out (truncating) or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw ValidationError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void line(const std::string& s) {
    stream() << s << '\n';
    stream().flush();
  }

 private:
  std::ofstream file_;
};

void log_config(const json& config) { std::cerr << "config: " << config.dump() << '\n'; }

std::uint64_t resolve_seed(Globals& g) {
  if (!g.seed) {
    std::random_device rd;
    g.seed = (std::uint64_t{rd()} << 32) | rd();
    std::cerr << "seed: " << *g.seed << '\n';
  }
  return *g.seed;
}

PointSetFile load_points(const std::string& path, std::optional<GridParams> fallback) {
  std::string text = read_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '['))
    return parse_rank_list_json(text, fallback);
  return parse_point_text(text, fallback);
}

json coords_json(Rank r, const GridParams& g) { return unrank(r, g).coords; }

void add_grid_options(CLI::App* cmd, std::uint64_t& n, unsigned& d) {
  cmd->add_option("-n,--n", n, "grid side length")->envname("SIDONLAB_N");
  cmd->add_option("-d,--d", d, "grid dimension")->envname("SIDONLAB_D")->capture_default_str();
}

void add_global_options(CLI::App* cmd, Globals& g, bool randomized) {
  if (randomized) cmd->add_option("--seed", g.seed, "RNG seed (generated and printed when omitted)")->envname("SIDONLAB_SEED");
  cmd->add_option("--threads", g.threads, "worker threads (0 = all cores)")->envname("SIDONLAB_THREADS")->capture_default_str();
  cmd->add_option("--out", g.out, "output file (default stdout)")->envname("SIDONLAB_OUT");
  cmd->add_option("--budget", g.budget, "search node budget (0 = unlimited)")->envname("SIDONLAB_BUDGET")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sidon sets in [n]^d: verification, exact search and counting, constructions, container bounds, "
               "random-subset experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sidonlab 1.0.0");
  Globals g;

  // verify
  std::string verify_file;
  std::uint64_t n = 0;
  unsigned d = 1;
  auto* verify = app.add_subcommand("verify", "check whether a point set is Sidon (exit 0 yes, 1 no)");
  verify->add_option("file", verify_file, "point-set file (text or rank-list JSON)")->required();
  add_grid_options(verify, n, d);
  verify->add_option("--out", g.out, "output file (default stdout)")->envname("SIDONLAB_OUT");

  // search-max
  std::string points_file;
  auto* search = app.add_subcommand("search-max", "maximum Sidon subset of [n]^d or of a given point set");
  add_grid_options(search, n, d);
  add_global_options(search, g, false);
  search->add_option("--points", points_file, "restrict the search to this point set");

  // count
  std::optional<std::size_t> count_t;
  std::uint64_t guard = kDefaultCountGuard;
  auto* count = app.add_subcommand("count", "exact counts Z_{n,d}(t) of Sidon sets by size");
  add_grid_options(count, n, d);
  add_global_options(count, g, false);
  count->add_option("-t,--t", count_t, "only count sets of this size")->envname("SIDONLAB_T");
  count->add_option("--guard", guard, "feasibility guard on search nodes (0 = none)")->capture_default_str();
  count->add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->envname("SIDONLAB_FORMAT");

  // construct
  std::string kind = "grid";
  std::uint64_t q = 0;
  auto* construct = app.add_subcommand("construct", "dense Sidon sets and Singer difference sets");
  add_grid_options(construct, n, d);
  construct->add_option("--kind", kind, "grid, interval or singer")
      ->check(CLI::IsMember({"grid", "interval", "singer"}))
      ->capture_default_str();
  construct->add_option("--q", q, "prime for --kind singer");
  construct->add_option("--out", g.out, "output file (default stdout)")->envname("SIDONLAB_OUT");
  construct->add_option("--format", g.format, "text or json")->check(CLI::IsMember({"text", "json"}))->envname("SIDONLAB_FORMAT");

  // graph
  std::string seed_file, graph_format = "edges";
  auto* graph = app.add_subcommand("graph", "collision graph of a Sidon seed set");
  graph->add_option("seed-file", seed_file, "Sidon seed set (text or rank-list JSON)")->required();
  add_grid_options(graph, n, d);
  graph->add_option("--out", g.out, "output file (default stdout)")->envname("SIDONLAB_OUT");
  graph->add_option("--graph-format", graph_format, "edges (rank pairs) or dimacs")
      ->check(CLI::IsMember({"edges", "dimacs"}))
      ->capture_default_str();

  // bound
  std::string which;
  double t_real = 0, gamma = 0, omega = 4, s0 = 0, p = 0, delta = 0.01;
  std::optional<double> epsilon, f_obs;
  auto* bound = app.add_subcommand("bound", "counting-bound evaluators (log2 values)");
  bound->add_option("which", which, "large, small, schedule, small-t, first-moment or regime")
      ->required()
      ->check(CLI::IsMember({"large", "small", "schedule", "small-t", "first-moment", "regime"}));
  add_grid_options(bound, n, d);
  bound->add_option("-t,--t", t_real, "target size t")->envname("SIDONLAB_T");
  bound->add_option("--gamma", gamma, "gamma (small)");
  bound->add_option("--omega", omega, "omega (small, first-moment)")->capture_default_str();
  bound->add_option("--s0", s0, "s0 (schedule; default the large-t value for n, d)");
  bound->add_option("-p,--p", p, "probability (first-moment, regime)")->envname("SIDONLAB_P");
  bound->add_option("--delta", delta, "delta (first-moment)")->capture_default_str();
  bound->add_option("--epsilon", epsilon, "epsilon (regime; default d/9)");
  bound->add_option("--F", f_obs, "observed F for measured constants (regime)");
  bound->add_option("--out", g.out, "output file (default stdout)")->envname("SIDONLAB_OUT");

  // random-run
  std::vector<std::uint64_t> n_list;
  std::optional<double> a_opt, p_opt;
  std::size_t trials = 0;
  std::string mode = "exact";
  bool timing = false;
  auto* run = app.add_subcommand("random-run", "Monte Carlo estimates of F([n]^d_p)");
  run->add_option("-n,--n", n_list, "grid side lengths (comma separated)")
      ->delimiter(',')
      ->required()
      ->envname("SIDONLAB_N");
  run->add_option("-d,--d", d, "grid dimension")->envname("SIDONLAB_D")->capture_default_str();
  auto* a_flag = run->add_option("-a,--a", a_opt, "exponent a with p = n^a, -d < a <= 0")->envname("SIDONLAB_A");
  run->add_option("-p,--p", p_opt, "fixed probability p")->envname("SIDONLAB_P")->excludes(a_flag);
  run->add_option("--trials", trials, "trials per n")->required()->envname("SIDONLAB_TRIALS");
  run->add_option("--mode", mode, "exact, hybrid or greedy")
      ->check(CLI::IsMember({"exact", "hybrid", "greedy"}))
      ->capture_default_str();
  run->add_option("--format", g.format, "csv or json (JSON lines)")->check(CLI::IsMember({"csv", "json"}))->envname("SIDONLAB_FORMAT");
  run->add_flag("--timing", timing, "record wall time per trial (output no longer reproducible)");
  add_global_options(run, g, true);

  // fit-exponent
  std::string records_file;
  auto* fit = app.add_subcommand("fit-exponent", "fit b_hat from random-run CSV records, one fit per a");
  fit->add_option("records", records_file, "records CSV written by random-run")->required();
  fit->add_option("--format", g.format, "json or csv (a,b_hat,b_predicted)")->check(CLI::IsMember({"csv", "json"}));
  fit->add_option("--out", g.out, "output file (default stdout)")->envname("SIDONLAB_OUT");

  // chernoff
  double lambda = 0.5;
  auto* chernoff = app.add_subcommand("chernoff", "empirical concentration of |[n]^d_p| against the Chernoff ceiling");
  add_grid_options(chernoff, n, d);
  chernoff->add_option("-p,--p", p, "probability")->required()->envname("SIDONLAB_P");
  chernoff->add_option("--lambda", lambda, "relative deviation, 0 < lambda < 1")->capture_default_str();
  chernoff->add_option("--trials", trials, "trials")->required()->envname("SIDONLAB_TRIALS");
  add_global_options(chernoff, g, true);

  // transfer
  auto* transfer = app.add_subcommand("transfer", "compare F on coupled interval and grid samples");
  add_grid_options(transfer, n, d);
  transfer->add_option("-p,--p", p, "probability")->required()->envname("SIDONLAB_P");
  transfer->add_option("--trials", trials, "coupled pairs")->required()->envname("SIDONLAB_TRIALS");
  add_global_options(transfer, g, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto need_n = [&] {
    if (n == 0) throw ValidationError("--n is required");
    return GridParams(n, d);
  };

  try {
    if (*verify) {
      std::optional<GridParams> fallback;
      if (n) fallback = GridParams(n, d);
      auto file = load_points(verify_file, fallback);
      auto w = is_sidon(file.ranks, file.grid);
      json j{{"n", file.grid.n()}, {"d", file.grid.d()}, {"size", file.ranks.size()}, {"is_sidon", w.is_sidon},
             {"violation", nullptr}};
      if (w.violation) {
        json quad = json::array(), ranks = json::array();
        for (auto r : *w.violation) {
          quad.push_back(coords_json(r, file.grid));
          ranks.push_back(r);
        }
        j["violation"] = quad;
        j["violation_ranks"] = ranks;
      }
      Output(g.out).line(j.dump());
      return w.is_sidon ? kExitOk : kExitNegative;
    }

    if (*search) {
      const GridParams grid = need_n();
      log_config({{"command", "search-max"}, {"n", n}, {"d", d}, {"budget", g.budget}, {"points", points_file}});
      MaxSidonResult res;
      if (points_file.empty()) {
        res = max_sidon_exact(grid, g.budget);
      } else {
        auto file = load_points(points_file, grid);
        if (file.grid != grid) throw ValidationError("point file grid does not match --n/--d");
        res = max_sidon_subset(file.ranks, grid, g.budget);
      }
      Output(g.out).line(to_json(res).dump());
      return res.optimal ? kExitOk : kExitLimit;
    }

    if (*count) {
      const GridParams grid = need_n();
      const std::string format = g.format.empty() ? "csv" : g.format;
      log_config({{"command", "count"}, {"n", n}, {"d", d}, {"guard", guard}, {"format", format}});
      Output out(g.out);
      if (count_t) {
        auto value = count_of_size(grid, *count_t, guard);
        if (format == "json")
          out.line(json{{"n", n}, {"d", d}, {"t", *count_t}, {"count", value}}.dump());
        else
          out.stream() << *count_t << ',' << value << '\n';
        return kExitOk;
      }
      auto profile = count_profile(grid, guard);
      if (format == "json") {
        out.line(to_json(profile).dump());
      } else {
        out.stream() << to_csv(profile);
        std::cerr << "total: " << profile.total << '\n';
      }
      return kExitOk;
    }

    if (*construct) {
      Output out(g.out);
      if (kind == "singer") {
        if (!q && !construct->count("--q")) throw ValidationError("--q is required for --kind singer");
        out.line(to_json(singer_sidon(q)).dump());
        return kExitOk;
      }
      const GridParams grid = kind == "grid" ? need_n() : GridParams(need_n().size(), 1);
      RankSet s = dense_sidon_in_grid(grid);
      if (!is_sidon(s, grid).is_sidon) throw std::logic_error("construction produced a non-Sidon set");
      if (g.format == "json")
        out.line(rank_list_json(s, grid).dump());
      else
        out.stream() << format_point_text(s, grid);
      return kExitOk;
    }

    if (*graph) {
      std::optional<GridParams> fallback;
      if (n) fallback = GridParams(n, d);
      auto file = load_points(seed_file, fallback);
      auto cg = build_collision_graph(file.ranks, file.grid);
      Output out(g.out);
      if (graph_format == "dimacs")
        out.stream() << format_dimacs(cg.graph, "collision graph, vertex i is the i-th non-seed rank");
      else
        out.stream() << format_edge_list(cg);
      std::cerr << "vertices: " << cg.vertex_count() << " edges: " << cg.graph.edges.size() << '\n';
      return kExitOk;
    }

    if (*bound) {
      Output out(g.out);
      json j;
      if (which == "large") {
        j = to_json(bound_large({need_n().n(), d, t_real}));
      } else if (which == "small") {
        auto r = bound_small({need_n().n(), d, gamma, omega});
        j = to_json(static_cast<const BoundReport&>(r));
        j["c_omega"] = static_cast<double>(r.c_omega);
        j["log2_bound_c_omega"] = static_cast<double>(r.log2_bound_c_omega);
      } else if (which == "schedule") {
        const long double s0v = s0 > 0 ? s0 : s0_large(need_n().n(), d);
        j = to_json(schedule(t_real, s0v));
      } else if (which == "small-t") {
        j = to_json(bound_small_t_regime(need_n().n(), d));
      } else if (which == "first-moment") {
        auto r = first_moment_base(need_n().n(), d, p, omega, delta);
        j = {{"n", n}, {"d", d}, {"p", p}, {"omega", omega}, {"delta", delta}, {"gamma", static_cast<double>(r.gamma)},
             {"s_star", static_cast<double>(r.s_star)}, {"t", static_cast<double>(r.t)},
             {"base", static_cast<double>(r.base)}, {"in_range", r.in_range}, {"hypothesis_ok", r.hypothesis_ok}};
      } else {
        j = to_json(regime_bounds_report(need_n().n(), d, p, f_obs, {}, epsilon));
      }
      out.line(j.dump());
      return kExitOk;
    }

    if (*run) {
      const std::uint64_t seed = resolve_seed(g);
      const std::string format = g.format.empty() ? "csv" : g.format;
      if (!a_opt && !p_opt) throw ValidationError("one of --a or --p is required");
      if (g.budget == 0) g.budget = kDefaultSampleBudget;
      // threads stay out of the recorded config so outputs do not depend on them
      json config{{"command", "random-run"}, {"n", n_list}, {"d", d},       {"trials", trials},
                  {"seed", seed},            {"mode", mode}, {"budget", g.budget}, {"format", format},
                  {"timing", timing}};
      if (a_opt) config["a"] = *a_opt;
      if (p_opt) config["p"] = *p_opt;
      log_config(config);
      if (!g.out.empty()) {
        std::ofstream side(g.out + ".config.json", std::ios::binary | std::ios::trunc);
        side << config.dump(2) << '\n';
      }
      Output out(g.out);
      if (format == "csv") out.line(kRecordCsvHeader);
      auto sink = [&](const ExperimentRecord& r) { out.line(format == "csv" ? to_csv_line(r) : to_json(r).dump()); };
      const Executor exec(g.threads);
      if (a_opt) {
        SweepConfig cfg{d, *a_opt, n_list, trials, seed, parse_estimate_mode(mode), g.budget, timing};
        run_sweep(cfg, exec, sink);
      } else {
        // fixed p: same trial numbering as a sweep, without the exponent column
        std::vector<SampleSpec> specs;
        for (auto nv : n_list) {
          SampleSpec s{GridParams(nv, d), *p_opt, std::nullopt, seed, trials};
          s.validate();
          specs.push_back(s);
        }
        exec.map_ordered(
            specs.size() * trials,
            [&](std::size_t i) { return run_trial(specs[i / trials], i, parse_estimate_mode(mode), g.budget, timing); },
            [&](std::size_t, ExperimentRecord&& r) { sink(r); });
      }
      return kExitOk;
    }

    if (*fit) {
      auto records = parse_records_csv(read_file(records_file));
      std::map<std::pair<unsigned, double>, std::vector<ExperimentRecord>> groups;
      for (const auto& r : records) {
        if (!r.a) throw ValidationError("records without an exponent a cannot be fitted");
        groups[{r.d, *r.a}].push_back(r);
      }
      std::vector<ExponentFit> fits;
      for (const auto& [key, recs] : groups) fits.push_back(fit_exponent(recs));
      Output out(g.out);
      if (g.format == "csv") {
        out.stream() << plot_csv(fits);
      } else {
        json arr = json::array();
        for (const auto& f : fits) arr.push_back(to_json(f));
        out.line((fits.size() == 1 ? arr[0] : arr).dump());
      }
      return kExitOk;
    }

    if (*chernoff) {
      const std::uint64_t seed = resolve_seed(g);
      SampleSpec spec{need_n(), p, std::nullopt, seed, trials};
      log_config({{"command", "chernoff"}, {"n", n}, {"d", d}, {"p", p}, {"lambda", lambda}, {"trials", trials},
                  {"seed", seed}});
      auto r = chernoff_check(spec, lambda, Executor(g.threads));
      json j = to_json(r);
      j["seed"] = seed;
      Output(g.out).line(j.dump());
      return r.pass ? kExitOk : kExitNegative;
    }

    if (*transfer) {
      const std::uint64_t seed = resolve_seed(g);
      const GridParams grid = need_n();
      const std::uint64_t budget = g.budget ? g.budget : kDefaultSampleBudget;
      log_config({{"command", "transfer"}, {"n", n}, {"d", d}, {"p", p}, {"trials", trials}, {"seed", seed},
                  {"budget", budget}});
      auto r = transfer_check(grid.n(), grid.d(), p, trials, seed, budget, Executor(g.threads));
      Output(g.out).line(to_json(r).dump());
      if (r.failures) return kExitNegative;
      return r.unresolved ? kExitLimit : kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FeasibilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitLimit;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const HypothesisError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
