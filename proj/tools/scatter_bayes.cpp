// Command-line experiment runner: simulate, reconstruct, evaluate, plot, catalog.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "scatter_bayes/config.hpp"
#include "scatter_bayes/data.hpp"
#include "scatter_bayes/errors.hpp"
#include "scatter_bayes/experiment.hpp"
#include "scatter_bayes/plot.hpp"

namespace fs = std::filesystem;
using namespace scatter_bayes;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kChain = 4 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  bool prior_only = false;
  bool json = false;
  std::string output;
  std::string data;
  std::string boundary;
  std::string chain;
  std::string truth;
  double threshold = 0.15;
};

ExperimentConfig resolve(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  auto cfg = load_config(o.config);
  if (!o.output.empty()) cfg.output_dir = o.output;
  if (o.chains) cfg.chains = *o.chains;
  cfg.validate();
  return cfg;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory " + dir.string() + " is not writable");
}

int cmd_simulate(const Options& o) {
  auto cfg = resolve(o);
  if (o.seed) cfg.noise.seed = *o.seed;
  ensure_dir(cfg.output_dir);
  const auto obs = simulate(cfg);
  const auto path = cfg.output_dir / "observations.txt";
  save_observations(obs, path);
  std::cout << path.string() << "\n";
  return kOk;
}

int cmd_reconstruct(const Options& o) {
  auto cfg = resolve(o);
  if (o.seed) cfg.chain.seed = *o.seed;
  ensure_dir(cfg.output_dir);
  const fs::path log_path = cfg.output_dir / "reconstruct.log";
  std::ostringstream log;
  auto flush_log = [&] { detail::write_atomic(log_path, log.str()); };
  try {
    const fs::path data = o.data.empty() ? cfg.output_dir / "observations.txt" : fs::path(o.data);
    ObservationSet obs;
    if (!o.prior_only) {
      obs = load_observations(data);
      if (std::abs(obs.kappa - cfg.kappa) > 1e-12 * cfg.kappa)
        throw ConfigError("observation kappa differs from config kappa");
      log << "data " << data.string() << " rows " << obs.y.values.rows() << " cols " << obs.y.values.cols() << "\n";
    }
    log << "config\n" << dump_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = reconstruct(cfg, obs, o.prior_only);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (std::size_t c = 0; c < r.chains.size(); ++c)
      log << "chain " << c << " seed " << r.chains[c].seed << " acceptance " << r.chains[c].acceptance_rate()
          << " final_beta " << r.chains[c].final_beta << "\n";
    if (r.warm_start_cost) log << "warm_start_cost " << *r.warm_start_cost << "\n";
    if (r.discrepancy) log << "boundary_discrepancy " << *r.discrepancy << "\n";
    log << "wall_seconds " << secs << "\n";

    const ShapePrior prior(cfg.prior);
    detail::write_atomic(cfg.output_dir / "chain.csv", chain_csv(r.chains, prior.dimension()));
    std::optional<Point> true_center;
    if (obs.truth) true_center = obs.truth->center;
    detail::write_atomic(cfg.output_dir / "boundary.csv",
                         boundary_csv(boundary_table(r.summary, r.truth, true_center)));
    detail::write_atomic(cfg.output_dir / "summary.json", summary_json(cfg, r));
    flush_log();
    if (o.json) {
      std::cout << summary_json(cfg, r);
    } else {
      std::cout << "acceptance " << r.summary.acceptance_rate << "\n";
      if (r.discrepancy) std::cout << "boundary_discrepancy " << *r.discrepancy << "\n";
      std::cout << "wrote " << cfg.output_dir.string() << "\n";
    }
    return kOk;
  } catch (const std::exception& e) {
    log << "error " << e.what() << "\n";
    flush_log();
    throw;
  }
}

int cmd_evaluate(const Options& o) {
  if (o.boundary.empty() || o.truth.empty()) throw ConfigError("evaluate needs --boundary and --truth");
  const auto table = load_boundary_csv(o.boundary);
  const Point truth_center = table.true_center.value_or(Point::Zero());
  const auto e = evaluate(table, truth_from_spec(o.truth, truth_center));
  if (o.json) {
    nlohmann::json j{{"discrepancy", e.discrepancy}, {"radial_max", e.radial_max},
                     {"radial_mean", e.radial_mean}, {"radial_rms", e.radial_rms},
                     {"points", e.points}, {"threshold", o.threshold},
                     {"pass", e.discrepancy < o.threshold}};
    std::cout << j.dump() << "\n";
  } else {
    std::cout << verdict_line(e, o.threshold) << "\n";
  }
  return kOk;
}

int cmd_plot(const Options& o) {
  if (o.boundary.empty()) throw ConfigError("plot needs --boundary");
  const fs::path out = o.output.empty() ? fs::path(o.boundary).parent_path() : fs::path(o.output);
  ensure_dir(out.empty() ? fs::path(".") : out);
  const auto table = load_boundary_csv(o.boundary);
  detail::write_atomic(out / "boundary.svg", boundary_svg(table));
  std::cout << (out / "boundary.svg").string() << "\n";
  if (!o.chain.empty()) {
    const auto svg = trace_svg(load_phi_trace(o.chain));
    if (svg.empty()) {
      std::cerr << "warning: chain file has no samples; trace plot omitted\n";
    } else {
      detail::write_atomic(out / "trace.svg", svg);
      std::cout << (out / "trace.svg").string() << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian shape reconstruction from far-field data"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "generate noisy far-field data for the configured truth");
  sim->add_option("--config", o.config, "experiment config (JSON)")->required();
  sim->add_option("--seed", o.seed, "noise seed override");
  sim->add_option("--output", o.output, "output directory override");

  auto* rec = app.add_subcommand("reconstruct", "run pCN chains and write summaries");
  rec->add_option("--config", o.config, "experiment config (JSON)")->required();
  rec->add_option("--data", o.data, "observation file (default <output>/observations.txt)");
  rec->add_option("--seed", o.seed, "chain seed override");
  rec->add_option("--chains", o.chains, "number of independent chains");
  rec->add_flag("--prior-only", o.prior_only, "sample the prior (Phi = 0)");
  rec->add_flag("--json", o.json, "print the summary as JSON");
  rec->add_option("--output", o.output, "output directory override");

  auto* ev = app.add_subcommand("evaluate", "compare a boundary CSV with a truth shape");
  ev->add_option("--boundary", o.boundary, "boundary CSV")->required();
  ev->add_option("--truth", o.truth, "catalog name or circle:R")->required();
  ev->add_option("--threshold", o.threshold, "pass threshold on the discrepancy");
  ev->add_flag("--json", o.json, "JSON output");

  auto* pl = app.add_subcommand("plot", "write SVG boundary overlay and phi trace");
  pl->add_option("--boundary", o.boundary, "boundary CSV")->required();
  pl->add_option("--chain", o.chain, "chain CSV for the phi trace");
  pl->add_option("--output", o.output, "output directory (default: next to the boundary CSV)");

  auto* cat = app.add_subcommand("catalog", "list the shape catalog");
  cat->add_flag("--json", o.json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (rec->parsed()) return cmd_reconstruct(o);
    if (ev->parsed()) return cmd_evaluate(o);
    if (pl->parsed()) return cmd_plot(o);
    if (cat->parsed()) {
      std::cout << catalog_listing(o.json);
      return kOk;
    }
  } catch (const ChainAbort& e) {
    std::cerr << "chain aborted: " << e.what() << "\n";
    return kChain;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (rcond " << e.rcond() << ")\n";
    return kSolver;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kConfig;
  } catch (const InvalidShapeError& e) {
    std::cerr << "invalid shape: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
