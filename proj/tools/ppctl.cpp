// ppctl: build, verify, simulate and inspect population protocols under
// crash faults.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pp/builders.hpp"
#include "pp/dot.hpp"
#include "pp/protocol_io.hpp"
#include "pp/simulator.hpp"
#include "pp/verifier.hpp"

using nlohmann::json;
using namespace pp;

namespace {

enum Exit { kOk = 0, kViolation = 1, kUsage = 2, kBudget = 3 };

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Source {
  std::string builder;
  std::string protocol;

  void attach(CLI::App* app) {
    auto* b = app->add_option("--builder,-b", builder, "builder expression, e.g. \"tower(4)\"");
    auto* p = app->add_option("--protocol,-p", protocol, "protocol JSON file");
    b->excludes(p);
  }

  ProtocolDocument load() const {
    if (!builder.empty()) {
      auto bp = build_from_expression(builder);
      return {bp.protocol, bp.predicate, bp.inputs};
    }
    if (!protocol.empty()) return parse_protocol_file(protocol);
    throw UsageError("one of --builder or --protocol is required");
  }

  // Builders keep their invariants; files carry none.
  BoundProtocol bound() const {
    if (!builder.empty()) return build_from_expression(builder);
    auto doc = load();
    auto bp = doc.bound();
    if (!bp) throw UsageError(protocol + ": the file has no predicate with a complete input binding");
    return *bp;
  }
};

struct Start {
  std::string input;
  std::string config;

  void attach(CLI::App* app) {
    auto* i = app->add_option("--input", input, "input vector, e.g. x=3,y=4");
    auto* c = app->add_option("--config", config, "configuration, e.g. \"3×1, 2×0\" (or 3*1)");
    i->excludes(c);
  }

  bool given() const { return !input.empty() || !config.empty(); }

  Configuration resolve(const Protocol& p, const std::optional<BoundProtocol>& bp) const {
    if (!config.empty()) return parse_configuration(p, config);
    if (!bp) throw UsageError("--input needs a predicate binding; use --config");
    const auto& vars = bp->predicate.variables();
    std::vector<std::int64_t> x(vars.size(), 0);
    std::stringstream ss(input);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--input: expected name=value, got \"" + item + "\"");
      const auto name = item.substr(0, eq);
      auto it = std::find(vars.begin(), vars.end(), name);
      if (it == vars.end()) throw UsageError("--input: unknown variable \"" + name + "\"");
      try {
        x[static_cast<std::size_t>(it - vars.begin())] = std::stoll(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("--input: bad value in \"" + item + "\"");
      }
    }
    return bp->initial_configuration(x);
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string verdict(const ToleranceReport& r) {
  if (!r.error.empty()) return "error";
  if (!r.well_specified) return "ill-specified";
  return r.robust ? "robust" : "non-robust";
}

std::string tol_text(const Tolerance& t) {
  return t.unbounded ? "unbounded (" + std::to_string(t.value) + ")" : std::to_string(t.value);
}

void print_report(const BoundProtocol& bp, const ToleranceReport& r) {
  const auto& p = bp.protocol;
  std::cout << format_configuration(p, r.config) << "  out0=" << to_string(r.out0)
            << "  predicate=" << (r.expected ? "true" : "false") << "  InTol=" << tol_text(r.intol)
            << "  Tol=" << (r.tol ? tol_text(*r.tol) : "-") << "  " << verdict(r);
  if (!r.error.empty()) std::cout << " (" << r.error << ")";
  std::cout << "\n";
  for (const auto& t : r.invariants) {
    if (t.violated) std::cout << "  invariant \"" << t.name << "\" violated on " << t.violated << " edges\n";
  }
  if (r.counterexample) {
    const auto& ce = *r.counterexample;
    std::cout << "  witness (" << ce.snipe_count() << " snipes, " << ce.steps.size() << " steps): "
              << format_configuration(p, ce.start);
    for (const auto& s : ce.steps) {
      std::cout << (s.label.kind == StepLabel::Kind::Snipe ? "  ~> " : "  -> ") << format_configuration(p, s.config);
    }
    const auto out = output_of(p, ce.final_config());
    std::cout << "  [" << to_string(out) << (ce.terminal ? ", terminal" : "") << "]\n";
  }
}

ExploreOptions explore_options(std::uint64_t budget) {
  ExploreOptions o;
  if (budget) o.node_budget = budget;
  return o;
}

// -- subcommands --------------------------------------------------------------

int cmd_build(const Source& src, const std::string& out, std::uint64_t limit) {
  if (src.builder.empty()) throw UsageError("build needs --builder");
  const auto bp = build_from_expression(src.builder);
  write_output(out, protocol_to_json(bp, limit).dump(2) + "\n");
  return kOk;
}

struct VerifyArgs {
  std::uint64_t population = 8;
  std::uint64_t budget = 0;
  int jobs = 0;
  bool expect_nonrobust = false;
  bool cross_check = false;
  bool composed = false;
  std::string format = "text";
};

int cmd_verify(const Source& src, const Start& start, const VerifyArgs& a) {
  const auto bp = src.bound();
  const auto opts = explore_options(a.budget);
  std::vector<ToleranceReport> reports;
  if (start.given()) {
    const auto c = start.resolve(bp.protocol, bp);
    reports.push_back(a.composed ? analyze_composed(bp, c, opts) : analyze(bp, c, opts));
  } else {
    if (a.population < 1) throw UsageError("--population must be at least 1");
    if (a.composed) {
      for (const auto& c : initial_configurations(bp, a.population)) reports.push_back(analyze_composed(bp, c, opts));
    } else {
      reports = check_robustness(bp, a.population, opts, a.jobs);
    }
  }
  std::size_t robust = 0, nonrobust = 0, ill = 0, errors = 0, violations = 0, mismatches = 0;
  for (const auto& r : reports) {
    if (!r.error.empty()) {
      ++errors;
    } else if (!r.well_specified) {
      ++ill;
    } else if (r.robust) {
      ++robust;
    } else {
      ++nonrobust;
    }
    for (const auto& t : r.invariants) violations += t.violated;
  }
  json cross = json::array();
  if (a.cross_check) {
    for (const auto& r : reports) {
      if (!r.error.empty() || r.out0 == Decision::Undecided) continue;
      const auto by_protocol = initial_tolerance_by_protocol(bp, r.config, opts);
      if (by_protocol != r.intol) {
        ++mismatches;
        cross.push_back({{"config", configuration_to_json(bp.protocol, r.config)},
                         {"intol", tolerance_to_json(r.intol)},
                         {"intol_by_protocol", tolerance_to_json(by_protocol)}});
      }
    }
  }

  if (a.format == "json") {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(bp, r));
    if (a.cross_check) {
      std::cout << json{{"reports", std::move(arr)}, {"intol_mismatches", std::move(cross)}}.dump(2) << "\n";
    } else {
      std::cout << arr.dump(2) << "\n";
    }
  } else {
    std::cout << bp.protocol.name() << "  " << bp.predicate.to_string() << "\n";
    for (const auto& r : reports) print_report(bp, r);
    std::cout << "checked " << reports.size() << " configurations: " << robust << " robust, " << nonrobust
              << " non-robust, " << ill << " ill-specified, " << errors << " errors, " << violations
              << " invariant violations";
    if (a.cross_check) std::cout << ", " << mismatches << " InTol cross-check mismatches";
    std::cout << "\n";
  }
  if (errors) return kBudget;
  if (ill || violations || mismatches) return kViolation;
  if (a.expect_nonrobust) return nonrobust ? kOk : kViolation;
  return nonrobust ? kViolation : kOk;
}

int cmd_tolerance(const Source& src, const Start& start, std::uint64_t budget, bool composed,
                  const std::string& format) {
  const auto bp = src.bound();
  if (!start.given()) throw UsageError("tolerance needs --input or --config");
  const auto c = start.resolve(bp.protocol, bp);
  const auto r = composed ? analyze_composed(bp, c, explore_options(budget)) : analyze(bp, c, explore_options(budget));
  if (format == "json") {
    std::cout << report_to_json(bp, r).dump(2) << "\n";
  } else {
    print_report(bp, r);
  }
  return r.error.empty() ? kOk : kBudget;
}

struct SimulateArgs {
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> snipes{0};
  std::uint64_t max_steps = 1'000'000;
  std::uint64_t window = 0;
  int jobs = 0;
  std::string trace_out;
  std::string replay;
  std::string format = "text";
};

int cmd_simulate(const Source& src, const Start& start, const SimulateArgs& a) {
  const auto doc = src.load();
  std::optional<BoundProtocol> bp;
  if (!src.builder.empty()) {
    bp = build_from_expression(src.builder);
  } else {
    bp = doc.bound();
  }
  const auto& p = doc.protocol;
  if (!start.given() && a.replay.empty()) throw UsageError("simulate needs --input, --config or --replay");
  SchedulerConfig sc;
  sc.seed = a.seed;
  sc.max_steps = a.max_steps;
  sc.convergence_window = a.window;

  if (a.trials == 1 || !a.replay.empty()) {
    SniperStrategy sniper;
    Configuration c0;
    if (!a.replay.empty()) {
      auto trace = trace_from_json(p, json::parse(read_file(a.replay)));
      c0 = trace.start;
      sniper = SniperStrategy::replay(std::move(trace));
    } else {
      c0 = start.resolve(p, bp);
      sniper = SniperStrategy::random_budget(a.snipes.empty() ? 0 : a.snipes.front());
    }
    const auto run = run_execution(p, c0, sc, sniper);
    if (!a.trace_out.empty()) write_output(a.trace_out, trace_to_jsonl(p, run.trace));
    json summary = {{"start", configuration_to_json(p, c0)},
                    {"final", configuration_to_json(p, run.final_config)},
                    {"output", std::string(to_string(run.output))},
                    {"converged", run.converged},
                    {"terminal", run.terminal},
                    {"steps", run.steps},
                    {"snipes", run.snipes}};
    if (bp) summary["predicate"] = bp->eval(c0);
    if (a.format == "json") {
      std::cout << summary.dump(2) << "\n";
    } else {
      std::cout << format_configuration(p, c0) << "  =>  " << format_configuration(p, run.final_config) << "\n"
                << "output=" << to_string(run.output) << "  converged=" << run.converged
                << "  terminal=" << run.terminal << "  steps=" << run.steps << "  snipes=" << run.snipes << "\n";
    }
    return kOk;
  }

  if (!bp) throw UsageError("batch simulation needs a predicate binding");
  const auto c0 = start.resolve(p, bp);
  BatchOptions bo;
  bo.trials = a.trials;
  bo.master_seed = a.seed;
  bo.scheduler = sc;
  bo.snipe_budgets = a.snipes.empty() ? std::vector<std::uint64_t>{0} : a.snipes;
  bo.jobs = a.jobs;
  const auto stats = batch_estimate(*bp, c0, bo);
  if (a.format == "json") {
    json per = json::array();
    for (const auto& s : stats.per_budget) {
      per.push_back({{"snipes", s.budget},
                     {"trials", s.trials},
                     {"converged", s.converged},
                     {"correct", s.correct},
                     {"exhausted", s.exhausted},
                     {"converged_fraction", s.converged_fraction()},
                     {"correct_fraction", s.correct_fraction()},
                     {"mean_steps", s.mean_steps}});
    }
    std::cout << json{{"start", configuration_to_json(p, c0)}, {"predicate", stats.expected}, {"budgets", per}}.dump(2)
              << "\n";
  } else {
    std::cout << format_configuration(p, c0) << "  predicate=" << (stats.expected ? "true" : "false") << "\n";
    for (const auto& s : stats.per_budget) {
      std::cout << "snipes=" << s.budget << "  trials=" << s.trials << "  converged=" << s.converged
                << "  correct=" << s.correct << "  exhausted=" << s.exhausted << "  mean_steps=" << s.mean_steps
                << "\n";
    }
  }
  return kOk;
}

int cmd_export_dot(const Source& src, const std::string& out, std::uint64_t limit) {
  const auto doc = src.load();
  write_output(out, export_dot(doc.protocol, limit));
  return kOk;
}

int cmd_replay(const Source& src, const std::string& trace_path, const std::string& format) {
  const auto doc = src.load();
  const auto& p = doc.protocol;
  const auto j = json::parse(read_file(trace_path));
  const auto trace = trace_from_json(p, j.contains("counterexample") ? j["counterexample"] : j);
  Configuration end;
  try {
    end = replay(p, trace);
  } catch (const std::invalid_argument& e) {
    std::cerr << "replay failed: " << e.what() << "\n";
    return kViolation;
  }
  const auto out = output_of(p, end);
  if (format == "json") {
    std::cout << json{{"final", configuration_to_json(p, end)},
                      {"output", std::string(to_string(out))},
                      {"terminal", is_terminal(p, end)},
                      {"snipes", trace.snipe_count()},
                      {"steps", trace.steps.size()}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "replayed " << trace.steps.size() << " steps (" << trace.snipe_count()
              << " snipes): " << format_configuration(p, end) << "  output=" << to_string(out)
              << (is_terminal(p, end) ? "  terminal" : "") << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population protocols under crash faults"};
  app.require_subcommand(1);
  app.footer(
      "Builders: pebbles(t) tower(t) gen_majority(a..) inhom_tower(a..;t) inhom_tower_cancel(a..;t)\n"
      "  threshold(a..;t) big_modulo(a..;m,t) modulo_combined(a..;m,t) modulo_combined_small(a..;m,t)\n"
      "  weak_convert(E) negate(E) and(E,E) or(E,E); coefficients may be named, e.g. threshold(x:2,y:-1;3)\n"
      "Exit codes: 0 ok, 1 violations found, 2 usage or parse error, 3 node budget exceeded");

  Source src;
  Start start;
  std::string out, format = "text";
  std::uint64_t limit = 1u << 16;

  auto* build = app.add_subcommand("build", "emit the protocol file of a builder expression");
  src.attach(build);
  build->add_option("--out,-o", out, "output path (default stdout)");
  build->add_option("--limit", limit, "maximum number of states to materialize");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "exhaustive robustness check of initial configurations");
  src.attach(verify);
  start.attach(verify);
  verify->add_option("--population,-n", va.population, "largest population to check");
  verify->add_option("--budget", va.budget, "node budget per configuration");
  verify->add_option("--jobs,-j", va.jobs, "worker threads");
  verify->add_flag("--expect-nonrobust", va.expect_nonrobust, "succeed only if a non-robust configuration exists");
  verify->add_flag("--cross-check", va.cross_check, "recompute InTol from the protocol");
  verify->add_flag("--composed", va.composed, "analyse products and negations component-wise (no witnesses)");
  verify->add_option("--format", va.format)->check(CLI::IsMember({"text", "json"}));

  std::uint64_t budget = 0;
  bool composed = false;
  auto* tolerance = app.add_subcommand("tolerance", "out0, InTol and Tol of one configuration");
  src.attach(tolerance);
  start.attach(tolerance);
  tolerance->add_option("--budget", budget, "node budget");
  tolerance->add_flag("--composed", composed, "analyse products and negations component-wise (no witnesses)");
  tolerance->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "random executions with an optional sniper");
  src.attach(simulate);
  start.attach(simulate);
  simulate->add_option("--trials", sa.trials, "number of runs")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sa.seed, "master seed");
  simulate->add_option("--snipes,-k", sa.snipes, "snipe budgets (random timing)")->delimiter(',');
  simulate->add_option("--max-steps", sa.max_steps, "interaction budget per run")->check(CLI::PositiveNumber);
  simulate->add_option("--window", sa.window, "convergence window (default 50 * max(n, n(n-1)/2))");
  simulate->add_option("--jobs,-j", sa.jobs, "worker threads");
  simulate->add_option("--trace", sa.trace_out, "write the run as JSON lines (single run only)");
  simulate->add_option("--replay", sa.replay, "apply the steps of a trace file first");
  simulate->add_option("--format", sa.format)->check(CLI::IsMember({"text", "json"}));

  auto* dot = app.add_subcommand("export-dot", "Petri-net view in Graphviz format");
  src.attach(dot);
  dot->add_option("--out,-o", out, "output path (default stdout)");
  dot->add_option("--limit", limit, "maximum number of states to materialize");

  std::string trace_path;
  auto* rep = app.add_subcommand("replay", "check a trace against the protocol's semantics");
  src.attach(rep);
  rep->add_option("--trace,-t", trace_path, "trace JSON (a report with a counterexample also works)")->required();
  rep->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*build) return cmd_build(src, out, limit);
    if (*verify) return cmd_verify(src, start, va);
    if (*tolerance) return cmd_tolerance(src, start, budget, composed, format);
    if (*simulate) return cmd_simulate(src, start, sa);
    if (*dot) return cmd_export_dot(src, out, limit);
    if (*rep) return cmd_replay(src, trace_path, format);
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
