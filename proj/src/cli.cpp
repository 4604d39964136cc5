#include "diffstep/cli.hpp"

#include <exception>
#include <fstream>
#include <iostream>
#include <string_view>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "diffstep/config_io.hpp"
#include "diffstep/experiments.hpp"
#include "diffstep/oracle.hpp"
#include "diffstep/sca.hpp"

namespace diffstep::cli {
namespace {

SystemConfig load_system_config(const CliInvocation& inv) {
  SystemConfig config = config_from_json(load_json_file(inv.config_path));
  if (inv.seed) config.seed = *inv.seed;
  validate(config);
  return config;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("--out", fmt::format("cannot open '{}' for writing", path));
  return out;
}

int exit_code_for(std::string_view status) {
  if (status == "error:invalid_config") return kInvalidConfig;
  if (status.starts_with("error:")) return kInternalError;
  if (status == "max_iterations") return kNonConvergence;
  return kOk;
}

void log_record(std::ostream& log, const ExperimentRecord& r) {
  fmt::print(log, "{} seed={} objective={:.9g} offloaded={} outer={} inner={} status={}\n",
             to_string(r.method), r.seed, r.objective, r.offloaded_count, r.iterations_outer,
             r.iterations_inner, r.status);
}

nlohmann::ordered_json allocation_json(const Allocation& x) {
  nlohmann::ordered_json j;
  j["a"] = x.a;
  j["s"] = x.s;
  return j;
}

int cmd_print_default_config(std::ostream& out) {
  nlohmann::ordered_json j = config_to_json(default_paper_config());
  const ConfigProvenance prov = config_provenance();
  j["provenance"] = {{"paper", prov.paper}, {"non_paper", prov.non_paper}};
  out << j.dump(2) << '\n';
  return kOk;
}

int cmd_point(const CliInvocation& inv, Method method, std::ostream& log) {
  const SystemConfig config = load_system_config(inv);
  const ExperimentRecord rec = run_point(config, method, inv.grid_step, inv.record_timing);
  {
    auto out = open_output(inv.out_path);
    const ExperimentRecord records[] = {rec};
    write_csv(out, records);
  }
  if (inv.verbosity >= 0) log_record(log, rec);

  if (method == Method::kProposed && !inv.allocation_path.empty()) {
    const Model model(config);
    const SolveReport report = inter_solve(model);
    nlohmann::ordered_json j;
    j["status"] = to_string(report.status);
    j["objective_relaxed"] = report.objective_relaxed;
    j["objective_binary"] = report.objective_binary;
    j["relaxed"] = allocation_json(report.allocation_relaxed);
    j["binary"] = allocation_json(report.allocation_binary);
    j["multipliers"] = {{"beta", report.multipliers.beta},
                        {"gamma", report.multipliers.gamma},
                        {"zeta", report.multipliers.zeta},
                        {"delta", report.multipliers.delta}};
    if (inv.verbosity >= 2) {
      nlohmann::ordered_json trace = nlohmann::ordered_json::array();
      for (const TraceEntry& t : report.trace)
        trace.push_back({{"outer", t.outer}, {"inner", t.inner}, {"p2", t.p2}, {"p1", t.p1}});
      j["trace"] = std::move(trace);
    }
    std::ofstream f(inv.allocation_path);
    if (!f) throw ConfigError("--allocation", "cannot open for writing");
    f << j.dump(2) << '\n';
  }
  return exit_code_for(rec.status);
}

int cmd_sweep(const CliInvocation& inv, std::ostream& log) {
  std::vector<SweepSpec> specs = sweeps_from_json(load_json_file(inv.config_path));
  for (SweepSpec& spec : specs) {
    if (inv.seed) spec.seeds = {*inv.seed};
    validate(spec.base);
  }
  std::vector<ExperimentRecord> all;
  const SweepOptions options{inv.jobs, inv.record_timing};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto records = run_sweep(specs[i], options);
    if (inv.verbosity >= 1)
      fmt::print(log, "spec {}/{}: {} records\n", i + 1, specs.size(), records.size());
    if (inv.verbosity >= 2)
      for (const auto& r : records) log_record(log, r);
    all.insert(all.end(), records.begin(), records.end());
  }
  {
    auto out = open_output(inv.out_path);
    write_csv(out, all);
  }
  int code = kOk;
  for (const auto& r : all) {
    const int c = exit_code_for(r.status);
    if (c == kInternalError || c == kInvalidConfig) return kInternalError;
    if (c == kNonConvergence) code = kNonConvergence;
  }
  fmt::print(log, "wrote {} records to {}\n", all.size(), inv.out_path);
  return code;
}

int cmd_compare_oracle(const CliInvocation& inv, std::ostream& log) {
  const SystemConfig config = load_system_config(inv);
  if (config.ues.size() > kOracleMaxUes)
    throw ConfigError("ues", fmt::format("compare-oracle needs N <= {}", kOracleMaxUes));
  const Model model(config);
  const SolveReport sca = inter_solve(model);
  const OracleResult oracle = brute_force(model, inv.grid_step);
  const double ratio = sca.objective_binary / oracle.best_objective;
  {
    auto out = open_output(inv.out_path);
    out << "N,grid_step,sca_objective,oracle_objective,ratio,assignments_evaluated,sca_status\n";
    fmt::print(out, "{},{:.9g},{:.9g},{:.9g},{:.9g},{},{}\n", config.ues.size(), inv.grid_step,
               sca.objective_binary, oracle.best_objective, ratio, oracle.assignments_evaluated,
               to_string(sca.status));
  }
  fmt::print(log, "sca={:.9g} oracle={:.9g} ratio={:.6f}\n", sca.objective_binary,
             oracle.best_objective, ratio);
  if (sca.status == SolveStatus::kError) return kInternalError;
  if (sca.status == SolveStatus::kMaxIterations) return kNonConvergence;
  return kOk;
}

}  // namespace

int run(const CliInvocation& inv, std::ostream& stdout_stream, std::ostream& log,
        std::ostream& err) {
  try {
    if (inv.subcommand == "print-default-config") return cmd_print_default_config(stdout_stream);
    if (inv.config_path.empty()) throw ConfigError("--config", "required for " + inv.subcommand);
    if (inv.out_path.empty()) throw ConfigError("--out", "required for " + inv.subcommand);
    if (inv.subcommand == "solve") return cmd_point(inv, Method::kProposed, log);
    if (inv.subcommand == "baseline") return cmd_point(inv, Method::kBaseline, log);
    if (inv.subcommand == "sweep") return cmd_sweep(inv, log);
    if (inv.subcommand == "compare-oracle") return cmd_compare_oracle(inv, log);
    fmt::print(err, "unknown subcommand '{}'\n", inv.subcommand);
    return kInvalidConfig;
  } catch (const ConfigError& e) {
    fmt::print(err, "invalid configuration: {}\n", e.what());
    return kInvalidConfig;
  } catch (const std::exception& e) {
    fmt::print(err, "internal error: {}\n", e.what());
    return kInternalError;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Diffusion step allocation between local devices and an edge server"};
  app.require_subcommand(1);
  CliInvocation inv;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", inv.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", inv.out_path, "output CSV path");
    if (needs_out) out->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_flag("-v", "more progress output (repeat for more)");
    sub->add_flag("--timing", inv.record_timing, "record wall-clock time in wall_ms");
  };

  auto* solve = app.add_subcommand("solve", "run the proposed solver on one config");
  add_common(solve, true);
  solve->add_option("--allocation", inv.allocation_path, "write allocations as JSON");

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep file");
  add_common(sweep, true);
  sweep->add_option("--jobs", inv.jobs, "worker threads (0 = all cores)");

  auto* oracle = app.add_subcommand("compare-oracle", "compare against brute force (N <= 20)");
  add_common(oracle, true);
  oracle->add_option("--grid-step", inv.grid_step, "oracle step grid")->check(CLI::PositiveNumber);

  auto* baseline = app.add_subcommand("baseline", "evaluate the random baseline");
  add_common(baseline, true);

  app.add_subcommand("print-default-config", "print the default config with provenance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  inv.subcommand = app.get_subcommands().front()->get_name();
  for (auto* sub : app.get_subcommands()) {
    const auto* opt = sub->get_option_no_throw("--seed");
    if (opt != nullptr && opt->count() > 0) inv.seed = seed;
    if (const auto* v = sub->get_option_no_throw("-v")) inv.verbosity = static_cast<int>(v->count());
  }
  return run(inv, std::cout, std::cout, std::cerr);
}

}  // namespace diffstep::cli
