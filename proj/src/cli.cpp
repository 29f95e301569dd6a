#include "learnrate/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <algorithm>

#include "CLI11.hpp"
#include "learnrate/distributions.hpp"
#include "learnrate/experiments.hpp"
#include "learnrate/harmonic_limits.hpp"
#include "learnrate/ks.hpp"
#include "learnrate/learners.hpp"
#include "learnrate/seeding.hpp"
#include "learnrate/spectral.hpp"

namespace learnrate::cli {

using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t default_trials(const std::string& subcommand) {
  if (subcommand == "spectrum") return 10;
  if (subcommand == "learn") return 10000;
  if (subcommand == "harmonic") return 1000;
  if (subcommand == "stable") return 100000;
  return 30;  // scaling: instances per grid point
}

OverlapDistribution distribution_of(const RunConfig& c) {
  const Family family = parse_family(c.family);
  if (family == Family::Empirical) {
    std::vector<double> gaps;
    for (double a : c.overlaps) gaps.push_back(1.0 - a);
    return make_distribution(family, c.beta, 1.0, std::move(gaps));
  }
  return make_distribution(family, c.beta);
}

std::vector<std::string> methods_of(const RunConfig& c) {
  if (c.method == "both") return {"memoryless", "fullmem"};
  return {c.method};
}

std::string format_cell(const json& cell) {
  if (cell.is_null()) return "nan";
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_number_unsigned()) return std::to_string(cell.get<std::uint64_t>());
  if (cell.is_number_integer()) return std::to_string(cell.get<std::int64_t>());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", cell.get<double>());
  return buf;
}

// Finite doubles as-is; non-finite values become null (printed as nan).
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  return f;
}

void finish(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("failed writing '" + path + "'");
}

void write_metadata(std::ostream& out, const RunConfig& config) {
  out << "# schema_version: " << kSchemaVersion << '\n';
  out << "# config: " << config.to_json().dump() << '\n';
}

Table run_spectrum(const RunConfig& c) {
  Table t{{"n", "seed", "lambda_star", "mu_star", "H", "C", "bound_lo_ok",
           "bound_hi_ok"},
          {}};
  const auto dist = distribution_of(c);
  for (std::size_t i = 0; i < c.trials; ++i) {
    const std::uint64_t seed = derive_seed(c.seed, i);
    const auto inst = make_instance(dist, c.n, seed);
    const auto s = summarize_spectrum(inst);
    t.rows.push_back(json::array(
        {s.n, seed, s.lambda_star, s.mu_star, s.harmonic,
         s.eigen_constant ? number(*s.eigen_constant) : json(nullptr),
         s.bound_lo_ok, s.bound_hi_ok}));
  }
  return t;
}

Table run_learn(const RunConfig& c) {
  Table t{{"method", "n", "delta", "N_delta", "trials", "ci_halfwidth"}, {}};
  const auto dist = distribution_of(c);
  const auto inst = make_instance(dist, c.n, c.seed);
  const std::uint64_t sim_seed = derive_seed(c.seed, 1);
  for (const auto& m : methods_of(c)) {
    LearnOutcome o;
    o.n = inst.n();
    o.delta = c.delta;
    if (m == "memoryless") {
      if (c.exact) {
        o.method = Method::MemorylessExact;
        o.n_delta = static_cast<double>(n_delta_memoryless(inst, c.delta).n_delta);
      } else {
        o.method = Method::MemorylessSim;
        const auto times = memoryless_absorption_times(inst, c.trials, sim_seed, c.jobs);
        o.n_delta = static_cast<double>(empirical_n_delta(times, c.delta));
        o.trials = c.trials;
        o.ci_halfwidth = quantile_ci_halfwidth(times, c.delta);
      }
    } else {
      if (c.exact) {
        o.method = Method::FullMemoryExact;
        o.n_delta = n_delta_full_memory(inst, c.delta);
      } else {
        o.method = Method::FullMemorySim;
        const auto sim = simulate_full_memory(inst, c.trials, sim_seed, c.jobs);
        o.n_delta = static_cast<double>(empirical_n_delta(sim.total_samples, c.delta));
        o.trials = c.trials;
        o.ci_halfwidth = quantile_ci_halfwidth(sim.total_samples, c.delta);
      }
    }
    t.rows.push_back(json::array({std::string(to_string(o.method)), o.n, o.delta,
                                  number(o.n_delta), o.trials, o.ci_halfwidth}));
  }
  return t;
}

Table run_harmonic(const RunConfig& c) {
  Table t{{"n", "beta", "trials", "statistic_name", "estimate", "stderr"}, {}};
  const auto dist = distribution_of(c);
  const std::vector<std::size_t> grid =
      c.n_grid.empty() ? std::vector<std::size_t>{c.n} : c.n_grid;

  for (const auto& e : estimate_limit_constant(dist, grid, c.trials, c.seed, c.jobs)) {
    t.rows.push_back(json::array({e.n, dist.beta, c.trials, e.statistic,
                                  number(e.estimate), number(e.stderr_)}));
  }
  const std::uint64_t check_seed = derive_seed(c.seed, 0xC0FFEE);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::size_t n = grid[g];
    if (c.tol > 0.0 && dist.beta >= 0.0) {
      const double p = lln_check(dist, n, c.trials, c.tol, derive_seed(check_seed, g), c.jobs);
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(c.trials));
      t.rows.push_back(json::array({n, dist.beta, c.trials, "lln_violation_fraction", p, se}));
    }
    if (c.selfcheck) {
      const auto sc = limit_law_selfconsistency(
          dist, n, c.trials, derive_seed(check_seed, grid.size() + g), c.jobs);
      t.rows.push_back(json::array({n, dist.beta, c.trials, "ks_n_vs_4n", sc.ks, 0.0}));
      t.rows.push_back(json::array({n, dist.beta, c.trials, "ks_critical_1pct", sc.critical_1pct, 0.0}));
      t.rows.push_back(json::array({n, dist.beta, c.trials, "transform_discrepancy", sc.transform, 0.0}));
    }
  }

  if (!c.dump.empty()) {
    auto f = open_output(c.dump);
    write_metadata(f, c);
    f << "n,trial,Y\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
      // Same streams as estimate_limit_constant.
      const auto s = sample_limit(dist, grid[g], c.trials, derive_seed(c.seed, g), c.jobs);
      for (std::size_t i = 0; i < s.trials; ++i) {
        f << grid[g] << ',' << i << ',' << format_cell(number(s.y[i])) << '\n';
      }
    }
    finish(f, c.dump);
  }
  return t;
}

Table run_stable(const RunConfig& c) {
  Table t{{"n", "beta", "trials", "statistic_name", "estimate", "stderr"}, {}};
  const auto samples = sample_one_sided_stable(c.alpha, c.trials, c.seed);
  const double beta = c.alpha - 1.0;
  t.rows.push_back(json::array({c.trials, beta, c.trials, "median", stats::median(samples), 0.0}));
  const std::size_t k = std::max<std::size_t>(1, c.trials / 100);
  if (k < samples.size()) {
    t.rows.push_back(json::array({c.trials, beta, c.trials, "hill_tail_index",
                                  stats::hill_estimator(samples, k),
                                  stats::hill_estimator(samples, k) / std::sqrt(static_cast<double>(k))}));
  }
  if (!c.dump.empty()) {
    auto f = open_output(c.dump);
    write_metadata(f, c);
    f << "trial,value\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      f << i << ',' << format_cell(number(samples[i])) << '\n';
    }
    finish(f, c.dump);
  }
  return t;
}

Table run_scaling(const RunConfig& c) {
  Table t{{"n", "beta", "delta", "method", "N_delta_estimate", "estimator", "stderr", "seed"}, {}};
  const auto dist = distribution_of(c);
  SweepOptions opts;
  opts.instances = c.trials;
  opts.jobs = c.jobs;
  opts.estimator = c.estimator == "simulated" ? Estimator::Simulated : Estimator::SpectralExact;

  json fits = json::array();
  for (const auto& m : methods_of(c)) {
    const auto table = scaling_sweep(dist, c.delta, c.n_grid, parse_learner(m), c.seed, opts);
    for (const auto& row : table) {
      t.rows.push_back(json::array({row.n, row.beta, row.delta, std::string(to_string(row.method)),
                                    row.n_delta, std::string(to_string(row.estimator)),
                                    row.stderr_, row.seed}));
    }
    if (table.size() >= 4) {
      const auto power = fit_scaling(table, ScalingModel::PowerLaw);
      const auto nlogn = fit_scaling(table, ScalingModel::NLogN);
      const auto linear = fit_scaling(table, ScalingModel::LinearN);
      fits.push_back({{"method", m},
                      {"power_law_slope", power.slope},
                      {"power_law_intercept", power.intercept},
                      {"power_law_r_squared", power.r_squared},
                      {"n_log_n_ratio_spread", nlogn.ratio_spread},
                      {"linear_n_ratio_spread", linear.ratio_spread}});
    }
  }
  if (!c.summary.empty()) {
    auto f = open_output(c.summary);
    json summary{{"schema_version", kSchemaVersion},
                 {"calibrated", true},
                 {"config", c.to_json()},
                 {"fits", fits}};
    f << summary.dump(2) << '\n';
    finish(f, c.summary);
  }
  return t;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

json RunConfig::to_json() const {
  return json{{"subcommand", subcommand}, {"family", family},   {"beta", beta},
              {"overlaps", overlaps},     {"n", n},             {"n_grid", n_grid},
              {"delta", delta},           {"trials", trials},   {"seed", seed},
              {"method", method},         {"exact", exact},     {"estimator", estimator},
              {"alpha", alpha},           {"tol", tol},         {"selfcheck", selfcheck},
              {"jobs", jobs},             {"format", format},   {"output", output},
              {"dump", dump},             {"summary", summary}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("subcommand", c.subcommand);
  get("family", c.family);
  get("beta", c.beta);
  get("overlaps", c.overlaps);
  get("n", c.n);
  get("n_grid", c.n_grid);
  get("delta", c.delta);
  get("trials", c.trials);
  get("seed", c.seed);
  get("method", c.method);
  get("exact", c.exact);
  get("estimator", c.estimator);
  get("alpha", c.alpha);
  get("tol", c.tol);
  get("selfcheck", c.selfcheck);
  get("jobs", c.jobs);
  get("format", c.format);
  get("output", c.output);
  get("dump", c.dump);
  get("summary", c.summary);
  return c;
}

void validate(RunConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  const std::vector<std::string> subcommands{"spectrum", "learn", "harmonic", "stable", "scaling"};
  if (std::find(subcommands.begin(), subcommands.end(), c.subcommand) == subcommands.end()) {
    fail("unknown subcommand '" + c.subcommand + "'");
  }
  if (!c.overlaps.empty()) c.family = "empirical";
  if (c.family == "uniform" && c.beta != 0.0) c.family = "powergap";
  const Family family = parse_family(c.family);
  if (family == Family::Empirical) {
    if (c.overlaps.empty()) fail("--family empirical needs --overlaps a2,a3,...");
    for (double a : c.overlaps) {
      if (!(a >= 0.0 && a < 1.0)) fail("--overlaps values must lie in [0, 1)");
    }
    c.n = c.overlaps.size() + 1;
  } else if (!(c.beta > -1.0)) {
    fail("--beta must be > -1");
  }
  if (c.trials == 0) c.trials = default_trials(c.subcommand);
  if (c.n < 2) fail("--n must be >= 2");
  if (!(c.delta > 0.0 && c.delta < 1.0)) fail("--delta must lie in (0, 1)");
  if (c.method != "memoryless" && c.method != "fullmem" && c.method != "both") {
    fail("--method must be memoryless, fullmem or both");
  }
  if (c.estimator != "spectral-exact" && c.estimator != "simulated") {
    fail("--estimator must be spectral-exact or simulated");
  }
  if (c.format != "csv" && c.format != "json") fail("--format must be csv or json");
  if (c.subcommand == "stable" && !(c.alpha > 0.0 && c.alpha < 1.0)) {
    fail("--alpha must lie in (0, 1)");
  }
  if (c.subcommand == "harmonic" && c.tol > 0.0 && c.beta < 0.0) {
    fail("--tol (law of large numbers) applies only to beta >= 0");
  }
  if (c.subcommand == "scaling") {
    if (c.n_grid.empty()) {
      for (std::size_t p = 7; p <= 14; ++p) c.n_grid.push_back(std::size_t{1} << p);
    }
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      if (c.n_grid[i] < 2) fail("--n-grid entries must be >= 2");
      if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) fail("--n-grid must be strictly increasing");
    }
  }
  if (c.subcommand == "harmonic") {
    for (std::size_t i = 1; i < c.n_grid.size(); ++i) {
      if (c.n_grid[i] <= c.n_grid[i - 1]) fail("--n-grid must be strictly increasing");
    }
  }
}

Table execute(const RunConfig& c) {
  if (c.subcommand == "spectrum") return run_spectrum(c);
  if (c.subcommand == "learn") return run_learn(c);
  if (c.subcommand == "harmonic") return run_harmonic(c);
  if (c.subcommand == "stable") return run_stable(c);
  if (c.subcommand == "scaling") return run_scaling(c);
  throw std::invalid_argument("unknown subcommand '" + c.subcommand + "'");
}

void write_csv(std::ostream& out, const RunConfig& config, const Table& table) {
  write_metadata(out, config);
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_cell(row[i]);
    }
    out << '\n';
  }
}

void write_json(std::ostream& out, const RunConfig& config, const Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < table.columns.size(); ++i) obj[table.columns[i]] = row[i];
    rows.push_back(std::move(obj));
  }
  json doc{{"schema_version", kSchemaVersion},
           {"config", config.to_json()},
           {"columns", table.columns},
           {"rows", rows}};
  out << doc.dump(2) << '\n';
}

ParsedCsv read_csv(std::istream& in) {
  ParsedCsv parsed;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      const auto key = line.substr(2, colon - 2);
      const auto value = line.substr(colon + 2);
      if (key == "schema_version") parsed.schema_version = std::stoi(value);
      if (key == "config") parsed.config = json::parse(value);
      continue;
    }
    if (!header_seen) {
      parsed.columns = split_csv_line(line);
      header_seen = true;
    } else {
      parsed.rows.push_back(split_csv_line(line));
    }
  }
  return parsed;
}

int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Convergence-rate laboratory for memoryless and full-memory learners"};
  app.require_subcommand(1, 1);

  RunConfig flags;
  std::string config_path;
  // Options the user actually passed override the config file.
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
  auto bind = [&](CLI::App* sub, const std::string& name, auto member,
                  const std::string& help) {
    auto* opt = sub->add_option(name, flags.*member, help);
    overrides.emplace_back(opt, [member, &flags](RunConfig& target) {
      target.*member = flags.*member;
    });
    return opt;
  };

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    bind(sub, "--family", &RunConfig::family, "uniform | powergap | empirical");
    bind(sub, "--beta", &RunConfig::beta, "gap-density exponent (> -1)");
    bind(sub, "--overlaps", &RunConfig::overlaps, "wrong-set overlaps a2,a3,... (empirical)")
        ->delimiter(',');
    bind(sub, "--n", &RunConfig::n, "number of sets");
    bind(sub, "--delta", &RunConfig::delta, "allowed failure probability");
    bind(sub, "--trials", &RunConfig::trials, "trials / instances (0 = default)");
    bind(sub, "--seed", &RunConfig::seed, "master seed");
    bind(sub, "--jobs", &RunConfig::jobs, "worker threads (0 = all cores)");
    bind(sub, "--format", &RunConfig::format, "csv | json");
    bind(sub, "--output,-o", &RunConfig::output, "output path (default stdout)");
  };

  auto* spectrum = app.add_subcommand("spectrum", "lambda*, mu*, H, C and bound checks per instance");
  common(spectrum);

  auto* learn = app.add_subcommand("learn", "N_delta of the two learners on one instance");
  common(learn);
  bind(learn, "--method", &RunConfig::method, "memoryless | fullmem | both");
  auto* exact_flag = learn->add_flag("--exact", "exact / analytic N_delta (default)");
  auto* sim_flag = learn->add_flag("--sim", "simulated N_delta");
  exact_flag->excludes(sim_flag);

  auto* harmonic = app.add_subcommand("harmonic", "harmonic-mean limit statistics");
  common(harmonic);
  bind(harmonic, "--n-grid", &RunConfig::n_grid, "comma-separated n values")->delimiter(',');
  bind(harmonic, "--tol", &RunConfig::tol, "law-of-large-numbers band (beta >= 0)");
  auto* selfcheck_flag = harmonic->add_flag("--selfcheck", "KS of Y_n vs Y_4n and transform check");
  bind(harmonic, "--dump", &RunConfig::dump, "write raw Y samples to this CSV");

  auto* stable = app.add_subcommand("stable", "one-sided stable reference samples");
  common(stable);
  bind(stable, "--alpha", &RunConfig::alpha, "stable exponent in (0, 1)");
  bind(stable, "--dump", &RunConfig::dump, "write raw samples to this CSV");

  auto* scaling = app.add_subcommand("scaling", "N_delta sweep over n");
  common(scaling);
  bind(scaling, "--n-grid", &RunConfig::n_grid, "comma-separated n values")->delimiter(',');
  bind(scaling, "--method", &RunConfig::method, "memoryless | fullmem | both");
  bind(scaling, "--estimator", &RunConfig::estimator, "spectral-exact | simulated");
  bind(scaling, "--summary", &RunConfig::summary, "write JSON fit summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) {
        err << "error: cannot read config file '" << config_path << "'\n";
        return 2;
      }
      config = RunConfig::from_json(json::parse(f));
    }
    for (const auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(config);
    }
    config.subcommand = app.get_subcommands().front()->get_name();
    if (exact_flag->count() > 0) config.exact = true;
    if (sim_flag->count() > 0) config.exact = false;
    if (selfcheck_flag->count() > 0) config.selfcheck = true;
    validate(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n\n" << app.get_subcommands().front()->help();
    return 2;
  }

  try {
    const Table table = execute(config);
    if (config.output.empty()) {
      config.format == "json" ? write_json(out, config, table) : write_csv(out, config, table);
      out.flush();
      if (!out) throw IoError("failed writing to stdout");
    } else {
      auto f = open_output(config.output);
      config.format == "json" ? write_json(f, config, table) : write_csv(f, config, table);
      finish(f, config.output);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace learnrate::cli
