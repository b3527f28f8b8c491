// Command-line front end: generate, solve, oracle, report.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmalm/experiment.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      std::size_t used = 0;
      if (dash != std::string::npos && dash > 0) {
        const auto lo = std::stoull(item.substr(0, dash), &used);
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument("range");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(item, &used));
        if (used != item.size()) throw std::invalid_argument("trailing");
      }
    } catch (const std::exception&) {
      rmalm::fail(rmalm::ErrorKind::Validation, "--seeds: cannot parse '" + item + "' (use e.g. 0,1,5-9)");
    }
  }
  if (seeds.empty()) rmalm::fail(rmalm::ErrorKind::Validation, "--seeds: empty list");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robbins-Monro augmented Lagrangian experiments"};
  app.require_subcommand(1);

  std::string config, out, seeds;
  unsigned threads = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides output_dir)");
  };

  auto* generate = app.add_subcommand("generate", "write the generated instance to <out>/instance.json");
  add_common(generate);
  auto* solve = app.add_subcommand("solve", "run the configured solver for every seed");
  add_common(solve);
  solve->add_option("--seeds", seeds, "seed list overriding the config, e.g. 0,1,5-9");
  solve->add_option("--threads", threads, "worker threads across seeds")->check(CLI::Range(1u, 1024u));
  auto* oracle = app.add_subcommand("oracle", "compute ground truth with the deterministic oracle");
  add_common(oracle);

  std::vector<std::string> csvs;
  std::string report_out = "rate_report.txt";
  double alpha = 0.0, c = 0.0;
  long max_k = -1;
  auto* report = app.add_subcommand("report", "seed-averaged rate fit from metrics CSVs");
  report->add_option("csv", csvs, "metrics CSV files (one per seed)")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "report file");
  report->add_option("--alpha", alpha, "dual strong concavity, enables the predicted rate");
  report->add_option("--c", c, "penalty parameter used by the runs");
  report->add_option("--max-k", max_k, "only use outer iterations k <= max-k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*report) {
      const auto rep = rmalm::rate_report(csvs, alpha > 0.0 ? std::optional<double>(alpha) : std::nullopt,
                                          c > 0.0 ? std::optional<double>(c) : std::nullopt,
                                          max_k >= 0 ? std::optional<long>(max_k) : std::nullopt);
      rmalm::write_rate_report(report_out, rep);
      std::printf("slope %.6g  R^2 %.6g  measured rho %.6g", rep.fit.slope, rep.fit.r_squared, rep.measured_rho);
      if (rep.predicted_rho) std::printf("  predicted rho %.6g", *rep.predicted_rho);
      std::printf("\nwrote %s\n", report_out.c_str());
      return 0;
    }

    rmalm::ExperimentConfig cfg = rmalm::load_experiment_config(config);
    if (!out.empty()) {
      cfg.output_dir = out;
      cfg.raw["output_dir"] = out;
    }
    if (!seeds.empty()) {
      cfg.seeds = parse_seed_list(seeds);
      cfg.salm.seeds = cfg.seeds;
      cfg.raw["seeds"] = cfg.seeds;
    }
    if (threads > 0) cfg.threads = threads;

    if (*generate) {
      std::printf("wrote %s\n", rmalm::run_generate(cfg).c_str());
    } else if (*oracle) {
      const auto gt = rmalm::run_oracle(cfg);
      std::printf("f_opt %.17g\nwrote %s/ground_truth.json\n", gt.f_opt, cfg.output_dir.c_str());
    } else {
      const auto res = rmalm::run_experiment(cfg);
      for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
    }
    return 0;
  } catch (const rmalm::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", rmalm::to_string(e.kind()), e.what());
    return rmalm::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
