#include "ltfnoise/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ltfnoise/serialize.hpp"

namespace ltfnoise {

namespace {

struct CommonArgs {
  std::string weights;
  std::size_t simple_majority = 0;
  double threshold = 0.0;
  std::string epsilon;
  bool rational = false;
  std::string output;
  bool stable = false;
  int workers = 0;
  std::uint64_t seed = 1;
  std::uint64_t samples = 0;
};

int workers_from_env() {
  if (const char* v = std::getenv("LTFNOISE_THREADS")) {
    try {
      return std::max(0, std::stoi(v));
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

void add_instance_options(CLI::App* app, CommonArgs& a) {
  app->add_option("-w,--weights", a.weights, "Comma-separated weights, or @file with one per line");
  app->add_option("--simple-majority", a.simple_majority, "Use n unit weights");
  app->add_option("-t,--threshold", a.threshold, "Threshold t");
}

void add_output_options(CLI::App* app, CommonArgs& a) {
  app->add_option("-o,--output", a.output, "Write the result to a file instead of stdout");
  app->add_flag("--stable", a.stable, "Omit the timestamp sidecar (byte-stable output)");
}

void add_epsilon_option(CLI::App* app, CommonArgs& a, bool required = true) {
  auto* opt = app->add_option("-e,--epsilon", a.epsilon, "Flip probability, decimal or p/q");
  if (required) opt->required();
  app->add_flag("--rational", a.rational, "Treat a decimal epsilon as its exact fraction");
}

std::optional<ThresholdFunction> instance_from(const CommonArgs& a, bool required = true) {
  const bool has_w = !a.weights.empty();
  const bool has_sm = a.simple_majority > 0;
  if (has_w && has_sm) throw InvalidArgument("give either --weights or --simple-majority, not both");
  if (has_w) return ThresholdFunction(parse_weights(a.weights), a.threshold);
  if (has_sm) return ThresholdFunction::simple_majority(a.simple_majority, a.threshold);
  if (required) throw InvalidArgument("an instance is required: --weights or --simple-majority");
  return std::nullopt;
}

FamilySpec family_from(const CommonArgs& a) {
  if (!a.weights.empty() && a.simple_majority > 0)
    throw InvalidArgument("give either --weights or --simple-majority, not both");
  if (a.simple_majority > 0) return FamilySpec::simple(a.simple_majority, a.threshold);
  if (!a.weights.empty()) return FamilySpec::explicit_weights(parse_weights(a.weights), a.threshold);
  throw InvalidArgument("an instance is required: --weights or --simple-majority");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json epsilon_rational_json(const NoiseParams& noise) {
  if (!noise.rational()) return nullptr;
  return Json{{"num", std::to_string(noise.rational()->num)},
              {"den", std::to_string(noise.rational()->den)}};
}

Json instance_json(const ThresholdFunction& f) {
  return Json{{"n", f.size()},
              {"weights", std::vector<double>(f.weights().begin(), f.weights().end())},
              {"t", f.threshold()}};
}

class Recorder {
 public:
  Recorder(const std::vector<std::string>& args, std::ostream& out)
      : args_(args.begin() + (args.empty() ? 0 : 1), args.end()),
        out_(out),
        start_(std::chrono::steady_clock::now()) {}

  Json base(const std::string& method) const {
    Json r;
    r["command"] = args_;
    r["version"] = kVersion;
    r["instance"] = nullptr;
    r["epsilon"] = nullptr;
    r["epsilon_rational"] = nullptr;
    r["realized_epsilon"] = nullptr;
    r["method"] = method;
    r["seed"] = nullptr;
    r["result"] = nullptr;
    return r;
  }

  void emit_json(Json record, const CommonArgs& a) const {
    if (!a.stable) {
      record["sidecar"] = Json{
          {"timestamp", utc_timestamp()},
          {"elapsed_seconds",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()}};
    }
    emit_text(record.dump(2) + "\n", a);
  }

  void emit_text(const std::string& text, const CommonArgs& a) const {
    if (a.output.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(a.output, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + a.output + "'");
    f << text;
  }

 private:
  std::vector<std::string> args_;
  std::ostream& out_;
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------

int cmd_exact(const CommonArgs& a, const std::string& engine, const ExactLimits& limits,
              const Recorder& rec) {
  const auto f = *instance_from(a);
  const NoiseParams noise = parse_epsilon(a.epsilon, a.rational);
  ExactResult r;
  if (engine == "enum")
    r = p_exact_enum(f, noise, {}, limits);
  else if (engine == "dp")
    r = p_exact_dp(f, noise, limits);
  else
    r = p_exact_auto(f, noise, limits);

  Json record = rec.base(to_string(r.method));
  record["instance"] = instance_json(f);
  record["epsilon"] = noise.epsilon();
  record["epsilon_rational"] = epsilon_rational_json(noise);
  Json result = to_json(r);
  result["bounds_apply"] = noise.epsilon() > 0.0 && noise.epsilon() <= 0.5;
  try {
    const auto tie = tie_probability(f, limits);
    result["tie_probability"] = tie.p;
    result["tie_probability_rational"] = rational_json(*tie.rational);
  } catch (const CapExceeded&) {
    result["tie_probability"] = nullptr;
  }
  record["result"] = std::move(result);
  rec.emit_json(std::move(record), a);
  return kExitOk;
}

int cmd_mc(const CommonArgs& a, bool fast, double level, const Recorder& rec) {
  const auto f = *instance_from(a);
  const NoiseParams noise = parse_epsilon(a.epsilon, a.rational);
  McOptions opt;
  opt.workers = a.workers;
  opt.level = level;
  McEstimate e;
  if (fast) {
    if (!f.unit_weights())
      throw InvalidArgument("--fast needs unit weights (use --simple-majority or all-ones weights)");
    e = estimate_bitparallel(f.size(), f.threshold(), noise, a.samples, a.seed, opt);
  } else {
    e = estimate(f, noise, a.samples, a.seed, opt);
  }
  Json record = rec.base(to_string(e.method));
  record["instance"] = instance_json(f);
  record["epsilon"] = noise.epsilon();
  record["epsilon_rational"] = epsilon_rational_json(noise);
  record["realized_epsilon"] = e.realized_epsilon;
  record["seed"] = a.seed;
  record["result"] = to_json(e);
  rec.emit_json(std::move(record), a);
  return kExitOk;
}

int cmd_bounds(const CommonArgs& a, std::int64_t n, const Recorder& rec, std::ostream& err) {
  if (n < 1) throw InvalidArgument("-n must be >= 1");
  const NoiseParams noise = parse_epsilon(a.epsilon, a.rational);
  Json record = rec.base("bounds");
  record["epsilon"] = noise.epsilon();
  record["epsilon_rational"] = epsilon_rational_json(noise);
  Json result;
  result["n"] = n;
  const auto sp = sperner_bound(n);
  result["sperner_bound"] = sp.value;
  result["sperner_bound_rational"] = sp.exact ? rational_json(*sp.exact) : Json(nullptr);
  result["sperner_auxiliary"] = sp.auxiliary;
  result["sperner_auxiliary_holds"] = sp.auxiliary_holds;
  const auto sh = sheppard(noise);
  result["sheppard"] = sh.p;
  result["alpha"] = sh.alpha;
  const auto hyp = hypotheses_for(noise.epsilon());
  result["hypotheses"] = Json{{"eps_le_half", hyp.eps_le_half}, {"eps_le_quarter", hyp.eps_le_quarter}};

  int code = kExitOk;
  if (hyp.eps_le_half) {
    const auto refined = bound_refined(n, noise);
    result["m"] = refined.m;
    result["mad_binomial"] = to_json(refined.mad);
    result["bound_sqrt"] = bound_sqrt(noise).value;
    result["bound_refined"] = refined.bound.value;
    result["bound_refined_rational"] =
        refined.bound.exact ? rational_json(*refined.bound.exact) : Json(nullptr);
    result["bound_refined_terms"] = Json{{"mad_term", refined.mad_term}, {"tie_term", refined.tie_term}};
    result["errors"] = Json::array();
  } else {
    result["m"] = noise.epsilon() > 0.0 ? Json(noise.m()) : Json(nullptr);
    result["mad_binomial"] = noise.epsilon() > 0.0 ? to_json(mad_binomial(noise.m())) : Json(nullptr);
    result["bound_sqrt"] = nullptr;
    result["bound_refined"] = nullptr;
    result["errors"] = Json::array({"bound fields need 0 < epsilon <= 1/2"});
    err << "error: bound fields need 0 < epsilon <= 1/2; sheppard emitted only\n";
    code = kExitUsage;
  }
  record["result"] = std::move(result);
  rec.emit_json(std::move(record), a);
  return code;
}

int cmd_verify(const CommonArgs& a, VerifyConfig cfg, const Recorder& rec, std::ostream& err) {
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  if (auto f = instance_from(a, false)) {
    if (a.epsilon.empty()) throw InvalidArgument("--epsilon is required with an instance");
    cfg.instances.emplace_back(*f, parse_epsilon(a.epsilon, a.rational));
  }
  const VerificationReport report = run_verification(cfg);
  Json record = rec.base("verify");
  record["seed"] = a.seed;
  record["result"] = to_json(report);
  rec.emit_json(std::move(record), a);
  if (!report.all_passed()) {
    for (const auto& c : report.checks)
      if (!c.passed) err << "FAILED " << c.name << " [" << c.instance << "] " << c.detail << "\n";
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_search(const CommonArgs& a, std::size_t n, std::int64_t cap, bool thresholds, bool local,
               int restarts, const std::string& objective, std::int64_t max_weight,
               const Recorder& rec) {
  const NoiseParams noise = parse_epsilon(a.epsilon, a.rational);
  SearchReport report;
  if (local) {
    LocalSearchOptions opt;
    opt.workers = a.workers;
    opt.max_weight = max_weight;
    if (objective == "mc") {
      opt.objective = SearchObjective::montecarlo;
      if (a.samples > 0) opt.mc_samples = a.samples;
    }
    report = search_local(n, noise, restarts, a.seed, opt);
  } else {
    ExhaustiveOptions opt;
    opt.include_thresholds = thresholds;
    report = search_exhaustive(n, noise, cap, opt);
  }
  Json record = rec.base(report.method);
  record["epsilon"] = noise.epsilon();
  record["epsilon_rational"] = epsilon_rational_json(noise);
  if (local) record["seed"] = a.seed;
  record["result"] = to_json(report);
  rec.emit_json(std::move(record), a);
  return kExitOk;
}

int cmd_sweep(const CommonArgs& a, const std::string& grid_text, bool no_fast, double level,
              const Recorder& rec, std::ostream& err) {
  const FamilySpec family = family_from(a);
  const auto grid = parse_grid(grid_text);
  SweepOptions opt;
  opt.mc.workers = a.workers;
  opt.mc.level = level;
  opt.use_bitparallel = !no_fast;
  const auto rows = sweep(family, grid, a.samples, a.seed, opt);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  rec.emit_text(csv.str(), a);
  int code = kExitOk;
  for (const auto& r : rows)
    if (r.epsilon > 0.0 && r.epsilon <= 0.5 && r.estimate.ci_low > 2.0 * std::sqrt(r.epsilon)) {
      err << "error: ci_low exceeds 2*sqrt(eps) at eps=" << format_double(r.epsilon) << "\n";
      code = kExitVerification;
    }
  return code;
}

int cmd_ratio(const CommonArgs& a, std::size_t n, const std::string& family,
              const std::string& grid_text, const Recorder& rec) {
  std::size_t size = n > 0 ? n : a.simple_majority;
  if (size == 0) throw InvalidArgument("ratio needs -n or --simple-majority");
  RatioOptions opt;
  opt.seed = a.seed;
  opt.workers = a.workers;
  if (a.samples > 0) opt.samples = a.samples;
  RatioFamily fam;
  if (family == "simple")
    fam = RatioFamily::simple;
  else if (family == "best" || family == "best-found")
    fam = RatioFamily::best_found;
  else
    throw InvalidArgument("--family must be simple or best-found");
  const auto rows = ratio_curve(size, parse_grid(grid_text), fam, opt);
  std::ostringstream csv;
  write_ratio_csv(csv, rows);
  rec.emit_text(csv.str(), a);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noise sensitivity of weighted majority functions", "ltfnoise"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs a;
  a.workers = workers_from_env();

  // exact
  auto* exact = app.add_subcommand("exact", "Exact p_eps by enumeration or dynamic programming");
  std::string engine = "auto";
  ExactLimits limits;
  add_instance_options(exact, a);
  add_epsilon_option(exact, a);
  add_output_options(exact, a);
  exact->add_option("--engine", engine, "enum, dp or auto")
      ->check(CLI::IsMember({"enum", "dp", "auto"}));
  exact->add_option("--enum-cap", limits.max_enum_n, "Largest n for enumeration");
  exact->add_option("--dp-cap", limits.max_dp_total_weight, "Largest sum |w_i| for the dp");
  exact->add_option("--workers", a.workers, "Worker threads (default LTFNOISE_THREADS)");

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of p_eps");
  bool fast = false;
  double level = 0.99;
  a.samples = 1'000'000;
  add_instance_options(mc, a);
  add_epsilon_option(mc, a);
  add_output_options(mc, a);
  mc->add_option("-s,--samples", a.samples, "Number of paired samples");
  mc->add_option("--seed", a.seed, "Random seed");
  mc->add_option("--workers", a.workers, "Worker threads (default LTFNOISE_THREADS)");
  mc->add_flag("--fast", fast, "Bit-parallel path (unit weights only)");
  mc->add_option("--level", level, "Confidence level of the Wilson interval");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Closed-form bounds and limits");
  std::int64_t bounds_n = 0;
  bounds->add_option("-n", bounds_n, "Number of variables")->required();
  add_epsilon_option(bounds, a);
  add_output_options(bounds, a);

  // verify
  auto* verify = app.add_subcommand("verify", "Run the proof-machinery verification suite");
  VerifyConfig vcfg;
  bool quick = false;
  add_instance_options(verify, a);
  add_epsilon_option(verify, a, false);
  add_output_options(verify, a);
  verify->add_flag("--keypoint-grid", vcfg.keypoint_only, "Only the keypoint identity checks");
  verify->add_flag("--inject-fault", vcfg.inject_fault, "Perturb the keypoint rhs (negative control)");
  verify->add_option("--draws", vcfg.tight_draws, "Partition draws for the tight identity");
  verify->add_option("--traces", vcfg.pointwise_traces, "Traces for the pointwise inequality");
  verify->add_flag("--quick", quick, "Reduced draw counts");
  verify->add_option("--seed", a.seed, "Random seed");
  verify->add_option("--workers", a.workers, "Worker threads (default LTFNOISE_THREADS)");

  // search
  auto* search = app.add_subcommand("search", "Search for the most noise-sensitive weights");
  std::size_t search_n = 0;
  std::int64_t cap = 3;
  bool thresholds = false, local = false;
  int restarts = 20;
  std::string objective = "exact";
  std::int64_t max_weight = 64;
  search->add_option("-n", search_n, "Number of variables")->required();
  add_epsilon_option(search, a);
  add_output_options(search, a);
  search->add_option("--cap", cap, "Largest weight for the exhaustive search");
  search->add_flag("--thresholds", thresholds, "Also search thresholds k/2");
  search->add_flag("--local", local, "Random-restart local search instead of exhaustive");
  search->add_option("--restarts", restarts, "Local search restarts");
  search->add_option("--objective", objective, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
  search->add_option("--max-weight", max_weight, "Largest weight for local search");
  search->add_option("-s,--samples", a.samples, "Samples per evaluation for the mc objective");
  search->add_option("--seed", a.seed, "Random seed");
  search->add_option("--workers", a.workers, "Worker threads (default LTFNOISE_THREADS)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep over an epsilon grid (CSV)");
  std::string grid;
  bool no_fast = false;
  add_instance_options(sw, a);
  add_output_options(sw, a);
  sw->add_option("--eps", grid, "Grid: a,b,c or start:stop:log10|linear[:count]")->required();
  sw->add_option("-s,--samples", a.samples, "Samples per grid point");
  sw->add_option("--seed", a.seed, "Random seed");
  sw->add_option("--workers", a.workers, "Worker threads (default LTFNOISE_THREADS)");
  sw->add_flag("--no-fast", no_fast, "Use the general path even for unit weights");
  sw->add_option("--level", level, "Confidence level of the Wilson interval");

  // ratio
  auto* ratio = app.add_subcommand("ratio", "p / sqrt(eps) and p / sheppard over a grid (CSV)");
  std::size_t ratio_n = 0;
  std::string family = "simple";
  ratio->add_option("-n", ratio_n, "Number of variables");
  ratio->add_option("--simple-majority", a.simple_majority, "Same as -n for the simple family");
  ratio->add_option("--family", family, "simple or best-found");
  ratio->add_option("--eps", grid, "Grid within (0, 1/2]")->required();
  ratio->add_option("-s,--samples", a.samples, "Samples when Monte Carlo is used");
  ratio->add_option("--seed", a.seed, "Random seed");
  ratio->add_option("--workers", a.workers, "Worker threads (default LTFNOISE_THREADS)");
  add_output_options(ratio, a);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Recorder rec(args, out);
  try {
    if (*exact) return cmd_exact(a, engine, limits, rec);
    if (*mc) return cmd_mc(a, fast, level, rec);
    if (*bounds) return cmd_bounds(a, bounds_n, rec, err);
    if (*verify) {
      if (quick) {
        vcfg.tight_draws = std::min<std::uint64_t>(vcfg.tight_draws, 100'000);
        vcfg.pointwise_traces = std::min<std::uint64_t>(vcfg.pointwise_traces, 10'000);
        vcfg.setup_draws = 50'000;
        vcfg.keypoint_random_pairs = 10'000;
      }
      return cmd_verify(a, vcfg, rec, err);
    }
    if (*search) return cmd_search(a, search_n, cap, thresholds, local, restarts, objective, max_weight, rec);
    if (*sw) {
      if (a.samples == 0) a.samples = 100'000;
      return cmd_sweep(a, grid, no_fast, level, rec, err);
    }
    if (*ratio) return cmd_ratio(a, ratio_n, family, grid, rec);
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << " (cap " << e.cap_name << " = " << e.cap_value
        << "; suggested alternative: " << e.suggestion << ")\n";
    return kExitCap;
  } catch (const CounterexampleFound& e) {
    err << "error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ltfnoise
