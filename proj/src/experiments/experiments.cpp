#include "mobigg/experiments/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mobigg/broadcast/broadcast.hpp"
#include "mobigg/core/parallel.hpp"
#include "mobigg/coverage/coverage.hpp"
#include "mobigg/detection/detection.hpp"
#include "mobigg/percolation/percolation.hpp"
#include "mobigg/sausage/sausage.hpp"

namespace mobigg::experiments {

const char* kVersion = "0.1.0";

ExperimentKind kind_from_string(const std::string& name) {
  if (name == "detect") return ExperimentKind::Detect;
  if (name == "cover") return ExperimentKind::Cover;
  if (name == "perc") return ExperimentKind::Perc;
  if (name == "broadcast") return ExperimentKind::Broadcast;
  if (name == "sausage") return ExperimentKind::Sausage;
  if (name == "couple") return ExperimentKind::Couple;
  if (name == "density") return ExperimentKind::Density;
  if (name == "calibrate") return ExperimentKind::Calibrate;
  throw ValidationError("unknown experiment kind: " + name);
}

std::string kind_to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Detect: return "detect";
    case ExperimentKind::Cover: return "cover";
    case ExperimentKind::Perc: return "perc";
    case ExperimentKind::Broadcast: return "broadcast";
    case ExperimentKind::Sausage: return "sausage";
    case ExperimentKind::Couple: return "couple";
    case ExperimentKind::Density: return "density";
    case ExperimentKind::Calibrate: return "calibrate";
  }
  return "?";
}

// ------------------------------------------------------------- config schema

namespace {

struct Field {
  const char* name;
  char type;  // f: real, i: integer, s: string
  bool required;
  const char* fallback;  // default when optional ("auto" allowed for reals)
  const char* choices;   // comma-separated, strings only
};

const std::vector<Field>& schema_for(ExperimentKind kind) {
  static const std::vector<Field> detect{
      {"d", 'i', true, nullptr, nullptr},
      {"lambda", 'f', true, nullptr, nullptr},
      {"r", 'f', true, nullptr, nullptr},
      {"dt", 'f', true, nullptr, nullptr},
      {"horizon", 'f', true, nullptr, nullptr},
      {"trials", 'i', true, nullptr, nullptr},
      {"target", 's', false, "stationary", "stationary,brownian,linear"},
      {"speed", 'f', false, "1.0", nullptr},
      {"buffer", 'f', false, "auto", nullptr},
  };
  static const std::vector<Field> cover{
      {"set", 's', true, nullptr, "point,segment,cube,cantor"},
      {"R", 'f', true, nullptr, nullptr},
      {"epsilon", 'f', true, nullptr, nullptr},
      {"cantor_level", 'i', false, "0", nullptr},
      {"d", 'i', true, nullptr, nullptr},
      {"lambda", 'f', true, nullptr, nullptr},
      {"r", 'f', true, nullptr, nullptr},
      {"dt", 'f', true, nullptr, nullptr},
      {"horizon", 'f', true, nullptr, nullptr},
      {"trials", 'i', true, nullptr, nullptr},
      {"buffer", 'f', false, "auto", nullptr},
  };
  static const std::vector<Field> perc{
      {"d", 'i', true, nullptr, nullptr},
      {"lambda", 'f', true, nullptr, nullptr},
      {"r", 'f', true, nullptr, nullptr},
      {"L", 'f', true, nullptr, nullptr},
      {"horizon", 'i', true, nullptr, nullptr},
      {"trials", 'i', true, nullptr, nullptr},
      {"target", 's', false, "stationary", "stationary,brownian"},
      {"lambda_c", 'f', false, "auto", nullptr},
      {"margin", 'f', false, "0.1", nullptr},
      {"calib_trials", 'i', false, "400", nullptr},
      {"buffer", 'f', false, "auto", nullptr},
  };
  static const std::vector<Field> broadcast{
      {"n", 'f', true, nullptr, nullptr},
      {"lambda", 'f', true, nullptr, nullptr},
      {"r", 'f', true, nullptr, nullptr},
      {"d", 'i', true, nullptr, nullptr},
      {"trials", 'i', true, nullptr, nullptr},
      {"max_steps", 'i', false, "200", nullptr},
      {"lambda_c", 'f', false, "auto", nullptr},
      {"margin", 'f', false, "0.1", nullptr},
      {"calib_side", 'f', false, "30", nullptr},
      {"calib_trials", 'i', false, "400", nullptr},
  };
  static const std::vector<Field> sausage{
      {"d", 'i', true, nullptr, nullptr},
      {"r", 'f', true, nullptr, nullptr},
      {"t", 'f', true, nullptr, nullptr},
      {"dt", 'f', true, nullptr, nullptr},
      {"paths", 'i', true, nullptr, nullptr},
      {"method", 's', false, "auto", "auto,minmax,hitormiss,voxel"},
      {"drift", 's', false, "none", "none,brownian,linear"},
      {"speed", 'f', false, "1.0", nullptr},
      {"samples", 'i', false, "1024", nullptr},
  };
  static const std::vector<Field> couple{
      {"d", 'i', true, nullptr, nullptr},
      {"Kprime", 'f', true, nullptr, nullptr},
      {"ell", 'f', true, nullptr, nullptr},
      {"beta", 'f', true, nullptr, nullptr},
      {"eps", 'f', true, nullptr, nullptr},
      {"Delta", 'f', false, "auto", nullptr},
      {"K", 'f', false, "auto", nullptr},
      {"phi_intensity", 'f', false, "auto", nullptr},
      {"runs", 'i', true, nullptr, nullptr},
  };
  static const std::vector<Field> density{
      {"d", 'i', true, nullptr, nullptr},
      {"lambda", 'f', true, nullptr, nullptr},
      {"r", 'f', true, nullptr, nullptr},
      {"K", 'f', true, nullptr, nullptr},
      {"ell", 'f', true, nullptr, nullptr},
      {"xi", 'f', true, nullptr, nullptr},
      {"t", 'i', true, nullptr, nullptr},
      {"runs", 'i', false, "1", nullptr},
      {"buffer", 'f', false, "auto", nullptr},
  };
  static const std::vector<Field> calibrate{
      {"d", 'i', true, nullptr, nullptr},
      {"r", 'f', true, nullptr, nullptr},
      {"side", 'f', true, nullptr, nullptr},
      {"trials", 'i', true, nullptr, nullptr},
  };
  switch (kind) {
    case ExperimentKind::Detect: return detect;
    case ExperimentKind::Cover: return cover;
    case ExperimentKind::Perc: return perc;
    case ExperimentKind::Broadcast: return broadcast;
    case ExperimentKind::Sausage: return sausage;
    case ExperimentKind::Couple: return couple;
    case ExperimentKind::Density: return density;
    case ExperimentKind::Calibrate: return calibrate;
  }
  throw ValidationError("unknown experiment kind");
}

void check_value(const Field& field, const std::string& value) {
  switch (field.type) {
    case 'f': {
      if (value == "auto" && field.fallback &&
          std::string(field.fallback) == "auto")
        return;
      std::size_t used = 0;
      try {
        (void)std::stod(value, &used);
      } catch (...) {
        used = 0;
      }
      if (used != value.size())
        throw ValidationError("key '" + std::string(field.name) +
                              "': expected a real number, got '" + value + "'");
      return;
    }
    case 'i': {
      std::size_t used = 0;
      try {
        (void)std::stoll(value, &used);
      } catch (...) {
        used = 0;
      }
      if (used != value.size())
        throw ValidationError("key '" + std::string(field.name) +
                              "': expected an integer, got '" + value + "'");
      return;
    }
    case 's': {
      if (!field.choices) return;
      std::stringstream ss(field.choices);
      std::string item;
      while (std::getline(ss, item, ','))
        if (item == value) return;
      throw ValidationError("key '" + std::string(field.name) + "': '" + value +
                            "' not one of {" + field.choices + "}");
    }
    default:
      return;
  }
}

double as_f(const std::map<std::string, std::string>& p, const std::string& k) {
  return std::stod(p.at(k));
}
long long as_i(const std::map<std::string, std::string>& p, const std::string& k) {
  return std::stoll(p.at(k));
}
bool is_auto(const std::map<std::string, std::string>& p, const std::string& k) {
  return p.at(k) == "auto";
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> validate_spec(const ExperimentSpec& spec) {
  const auto& schema = schema_for(spec.kind);
  for (const auto& [key, value] : spec.parameters) {
    const auto it = std::find_if(schema.begin(), schema.end(),
                                 [&](const Field& f) { return key == f.name; });
    if (it == schema.end())
      throw ValidationError("unknown key '" + key + "' for kind '" +
                            kind_to_string(spec.kind) + "'");
    check_value(*it, value);
  }
  std::map<std::string, std::string> out = spec.parameters;
  for (const auto& field : schema) {
    if (out.count(field.name)) continue;
    if (field.required)
      throw ValidationError("missing required key '" + std::string(field.name) +
                            "' for kind '" + kind_to_string(spec.kind) + "'");
    out[field.name] = field.fallback;
  }
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": empty key or value");
    if (out.count(key))
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// -------------------------------------------------------------------- tables

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != schema.size())
    throw std::invalid_argument("ResultTable: row width mismatch");
  rows.push_back(std::move(row));
}

std::string format_cell(const Cell& cell) {
  if (std::holds_alternative<std::int64_t>(cell))
    return std::to_string(std::get<std::int64_t>(cell));
  if (std::holds_alternative<bool>(cell))
    return std::get<bool>(cell) ? "true" : "false";
  if (std::holds_alternative<double>(cell)) {
    const double v = std::get<double>(cell);
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (const char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string csv_body(const ResultTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.schema.size(); ++c) {
    if (c) out += ',';
    out += table.schema[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

// ------------------------------------------------------------------ dispatch

namespace {

core::Trajectory target_from(const std::string& name, int d, double speed) {
  if (name == "stationary") return core::Trajectory::stationary();
  if (name == "brownian") return core::Trajectory::brownian();
  core::Point v = core::Point::Zero(d);
  v[0] = speed;
  return core::Trajectory::linear(std::move(v));
}

Cell time_or_empty(bool present, double value) {
  if (present) return Cell{value};
  return Cell{std::string{}};
}

ResultTable run_detect(const ExperimentSpec& spec,
                       const std::map<std::string, std::string>& p,
                       const RunOptions& options) {
  core::SimConfig config;
  config.d = static_cast<int>(as_i(p, "d"));
  config.lambda = as_f(p, "lambda");
  config.r = as_f(p, "r");
  config.dt = as_f(p, "dt");
  config.horizon = as_f(p, "horizon");
  config.seed = spec.seed;
  const double buffer = is_auto(p, "buffer")
                            ? core::required_buffer(config.r, config.horizon)
                            : as_f(p, "buffer");
  config.domain = core::DomainSpec::boxed(1.0, buffer);
  const auto target = target_from(p.at("target"), config.d, as_f(p, "speed"));

  const auto trials = detection::detection_trials(
      config, target, static_cast<std::size_t>(as_i(p, "trials")),
      options.threads);
  ResultTable table;
  table.schema = {"trial", "detected", "detected_at", "censored"};
  for (const auto& t : trials)
    table.add_row({Cell{static_cast<std::int64_t>(t.trial_index)},
                   Cell{t.detected_at.has_value()},
                   time_or_empty(t.detected_at.has_value(),
                                 t.detected_at.value_or(0.0)),
                   Cell{t.censored}});
  return table;
}

ResultTable run_cover(const ExperimentSpec& spec,
                      const std::map<std::string, std::string>& p,
                      const RunOptions& options) {
  core::SimConfig config;
  config.d = static_cast<int>(as_i(p, "d"));
  config.lambda = as_f(p, "lambda");
  config.r = as_f(p, "r");
  config.dt = as_f(p, "dt");
  config.horizon = as_f(p, "horizon");
  config.seed = spec.seed;
  const double buffer = is_auto(p, "buffer")
                            ? core::required_buffer(config.r, config.horizon)
                            : as_f(p, "buffer");
  config.domain = core::DomainSpec::boxed(1.0, buffer);

  coverage::TargetKind kind = coverage::TargetKind::Point;
  const std::string set_name = p.at("set");
  if (set_name == "segment") kind = coverage::TargetKind::Segment;
  if (set_name == "cube") kind = coverage::TargetKind::Cube;
  if (set_name == "cantor") kind = coverage::TargetKind::CantorIterate;
  const auto set =
      coverage::build_target(kind, config.d, as_f(p, "R"), as_f(p, "epsilon"),
                             static_cast<int>(as_i(p, "cantor_level")));

  const auto sample = coverage::estimate_cover_time(
      set, config, static_cast<std::size_t>(as_i(p, "trials")),
      options.threads);
  ResultTable table;
  table.schema = {"trial", "covered", "t_cov", "censored"};
  std::int64_t idx = 0;
  for (const double t : sample.per_trial) {
    const bool covered = t >= 0;
    table.add_row({Cell{idx++}, Cell{covered}, time_or_empty(covered, t),
                   Cell{!covered}});
  }
  return table;
}

ResultTable run_perc(const ExperimentSpec& spec,
                     const std::map<std::string, std::string>& p,
                     const RunOptions& options) {
  core::SimConfig config;
  config.d = static_cast<int>(as_i(p, "d"));
  config.lambda = as_f(p, "lambda");
  config.r = as_f(p, "r");
  config.dt = 1.0;
  config.horizon = static_cast<double>(as_i(p, "horizon"));
  config.seed = spec.seed;
  const int horizon = static_cast<int>(as_i(p, "horizon"));
  const double buffer =
      is_auto(p, "buffer")
          ? core::required_buffer(config.r, static_cast<double>(horizon))
          : as_f(p, "buffer");
  config.domain = core::DomainSpec::boxed(1.0, buffer);
  const double L = as_f(p, "L");

  double lambda_c;
  if (is_auto(p, "lambda_c")) {
    lambda_c = percolation::calibrate_lambda_c_cached(
                   config.d, config.r, L,
                   static_cast<std::size_t>(as_i(p, "calib_trials")),
                   core::substream_key(spec.seed, 0xCA11B ^ 0))
                   .lambda_c;
  } else {
    lambda_c = as_f(p, "lambda_c");
  }

  const auto target = target_from(p.at("target"), config.d, 0.0);
  const auto result = percolation::estimate_perc_tail(
      config, L, static_cast<std::size_t>(as_i(p, "trials")), horizon, target,
      lambda_c, as_f(p, "margin"), options.threads);

  ResultTable table;
  table.schema = {"trial", "percolated", "perc_at", "censored"};
  std::int64_t idx = 0;
  for (const auto& t : result.trials) {
    table.add_row({Cell{idx++}, Cell{t.perc_at.has_value()},
                   t.perc_at ? Cell{static_cast<std::int64_t>(*t.perc_at)}
                             : Cell{std::string{}},
                   Cell{t.censored}});
  }
  return table;
}

ResultTable run_broadcast(const ExperimentSpec& spec,
                          const std::map<std::string, std::string>& p,
                          const RunOptions& options) {
  const int d = static_cast<int>(as_i(p, "d"));
  const double lambda = as_f(p, "lambda");
  const double r = as_f(p, "r");
  double lambda_c;
  if (is_auto(p, "lambda_c")) {
    lambda_c = percolation::calibrate_lambda_c_cached(
                   d, r, as_f(p, "calib_side"),
                   static_cast<std::size_t>(as_i(p, "calib_trials")),
                   core::substream_key(spec.seed, 0xCA11B ^ 1))
                   .lambda_c;
  } else {
    lambda_c = as_f(p, "lambda_c");
  }
  const auto sample = broadcast::simulate_broadcast(
      as_f(p, "n"), lambda, r, d, static_cast<std::size_t>(as_i(p, "trials")),
      static_cast<int>(as_i(p, "max_steps")), spec.seed, lambda_c,
      as_f(p, "margin"), options.threads);

  ResultTable table;
  table.schema = {"trial", "t_broad", "censored", "node_count", "resamples"};
  std::int64_t idx = 0;
  for (const auto& t : sample.trials)
    table.add_row({Cell{idx++},
                   t.censored ? Cell{std::string{}}
                              : Cell{static_cast<std::int64_t>(t.t_broad)},
                   Cell{t.censored},
                   Cell{static_cast<std::int64_t>(t.node_count)},
                   Cell{static_cast<std::int64_t>(t.resamples)}});
  return table;
}

ResultTable run_sausage(const ExperimentSpec& spec,
                        const std::map<std::string, std::string>& p,
                        const RunOptions&) {
  sausage::SausageSpec sspec;
  sspec.d = static_cast<int>(as_i(p, "d"));
  sspec.r = as_f(p, "r");
  sspec.t = as_f(p, "t");
  const std::string drift = p.at("drift");
  if (drift == "brownian")
    sspec.drift = core::Trajectory::brownian();
  else if (drift == "linear") {
    core::Point v = core::Point::Zero(sspec.d);
    v[0] = as_f(p, "speed");
    sspec.drift = core::Trajectory::linear(std::move(v));
  }
  std::optional<sausage::Method> method;
  const std::string m = p.at("method");
  if (m == "minmax") method = sausage::Method::ExactMinMax1D;
  if (m == "hitormiss") method = sausage::Method::HitOrMiss;
  if (m == "voxel") method = sausage::Method::Voxel;
  sausage::SausageParams params;
  params.hit_or_miss_samples = static_cast<std::size_t>(as_i(p, "samples"));

  const auto est = sausage::sausage_volume(
      sspec, static_cast<std::size_t>(as_i(p, "paths")), as_f(p, "dt"),
      spec.seed, method, params);
  ResultTable table;
  table.schema = {"d",     "r",      "t",           "dt",
                  "paths", "method", "volume_mean", "volume_stderr"};
  const char* method_name =
      est.method == sausage::Method::ExactMinMax1D
          ? "minmax"
          : est.method == sausage::Method::HitOrMiss ? "hitormiss" : "voxel";
  table.add_row({Cell{static_cast<std::int64_t>(sspec.d)}, Cell{sspec.r},
                 Cell{sspec.t}, Cell{est.dt},
                 Cell{static_cast<std::int64_t>(est.paths)},
                 Cell{std::string(method_name)}, Cell{est.mean},
                 Cell{est.std_error}});
  return table;
}

ResultTable run_couple(const ExperimentSpec& spec,
                       const std::map<std::string, std::string>& p,
                       const RunOptions& options) {
  percolation::CouplingSpec cs;
  cs.d = static_cast<int>(as_i(p, "d"));
  cs.K_prime = as_f(p, "Kprime");
  cs.ell = as_f(p, "ell");
  cs.beta = as_f(p, "beta");
  cs.eps = as_f(p, "eps");
  cs.Delta = is_auto(p, "Delta")
                 ? 16.0 * cs.d * cs.d * cs.ell * cs.ell / (cs.eps * cs.eps)
                 : as_f(p, "Delta");
  if (is_auto(p, "K")) {
    cs.K = cs.K_prime + 2.0 * cs.separation_radius();
    cs.K = std::ceil(cs.K / cs.ell) * cs.ell;  // whole number of cells
  } else {
    cs.K = as_f(p, "K");
  }
  const double phi_intensity =
      is_auto(p, "phi_intensity") ? 3.0 * cs.beta : as_f(p, "phi_intensity");
  const auto runs = static_cast<std::size_t>(as_i(p, "runs"));

  struct RunRow {
    bool success;
    std::size_t xi0, paired, moved, thinned, xi;
  };
  std::vector<RunRow> rows(runs);
  const core::Box qk = core::Box::centered_cube(cs.d, cs.K);
  core::parallel_for(runs, options.threads, [&](std::size_t run) {
    // Phi_0: Poisson at phi_intensity, redrawn until the per-cell floor holds
    core::SimConfig pcfg;
    pcfg.d = cs.d;
    pcfg.lambda = phi_intensity;
    pcfg.r = 1.0;
    pcfg.dt = 1.0;
    pcfg.horizon = 1.0;
    pcfg.domain = core::DomainSpec::boxed(cs.K, 0.0);
    core::NodeEnsemble phi0;
    for (std::uint64_t attempt = 0;; ++attempt) {
      pcfg.seed = core::substream_key(spec.seed, run * 1000 + attempt, 0x9D1ULL);
      phi0 = core::sample_poisson_points(pcfg, qk);
      const auto m = static_cast<std::size_t>(std::llround(cs.K / cs.ell));
      std::size_t cells = 1;
      for (int k = 0; k < cs.d; ++k) cells *= m;
      std::vector<std::size_t> counts(cells, 0);
      bool ok = true;
      for (std::size_t i = 0; i < phi0.size(); ++i) {
        std::size_t flat = 0;
        for (int k = cs.d - 1; k >= 0; --k) {
          auto idx = static_cast<long long>(std::floor(
              (phi0.positions(static_cast<Eigen::Index>(i), k) + cs.K / 2.0) /
              cs.ell));
          idx = std::clamp<long long>(idx, 0, static_cast<long long>(m) - 1);
          flat = flat * m + static_cast<std::size_t>(idx);
        }
        ++counts[flat];
      }
      const double floor_count = cs.beta * std::pow(cs.ell, cs.d);
      for (const auto c : counts)
        if (static_cast<double>(c) < floor_count) ok = false;
      if (ok) break;
      if (attempt > 50)
        throw std::runtime_error(
            "couple: cannot draw a Phi_0 meeting the density floor; raise "
            "phi_intensity");
    }
    const auto result = percolation::run_coupling(
        cs, phi0, core::substream_key(spec.seed, run, 0xC0ULL));
    rows[run] = {result.success,   result.xi0_count,
                 result.paired,    result.jointly_moved,
                 result.pair_thinned, result.xi.size()};
  });

  ResultTable table;
  table.schema = {"run",            "success", "xi0_count", "paired",
                  "jointly_moved",  "pair_thinned", "xi_count"};
  std::int64_t idx = 0;
  for (const auto& r : rows)
    table.add_row({Cell{idx++}, Cell{r.success},
                   Cell{static_cast<std::int64_t>(r.xi0)},
                   Cell{static_cast<std::int64_t>(r.paired)},
                   Cell{static_cast<std::int64_t>(r.moved)},
                   Cell{static_cast<std::int64_t>(r.thinned)},
                   Cell{static_cast<std::int64_t>(r.xi)}});
  return table;
}

ResultTable run_density(const ExperimentSpec& spec,
                        const std::map<std::string, std::string>& p,
                        const RunOptions& options) {
  core::SimConfig config;
  config.d = static_cast<int>(as_i(p, "d"));
  config.lambda = as_f(p, "lambda");
  config.r = as_f(p, "r");
  config.dt = 1.0;
  const int t = static_cast<int>(as_i(p, "t"));
  config.horizon = std::max(1.0, static_cast<double>(t));
  const double buffer =
      is_auto(p, "buffer")
          ? core::required_buffer(config.r, static_cast<double>(t))
          : as_f(p, "buffer");
  config.domain = core::DomainSpec::boxed(1.0, buffer);
  const auto tess = percolation::Tessellation::make(
      config.d, as_f(p, "K"), as_f(p, "ell"), as_f(p, "xi"), config.lambda);
  const auto runs = static_cast<std::size_t>(as_i(p, "runs"));

  struct RunRow {
    double fraction;
    std::size_t min_occ;
    std::size_t dense_steps;
    bool warn;
  };
  std::vector<RunRow> rows(runs);
  core::parallel_for(runs, options.threads, [&](std::size_t run) {
    core::SimConfig rcfg = config;
    rcfg.seed = core::substream_key(spec.seed, run, 0xDE45ULL);
    const auto rep = percolation::density_fraction(rcfg, tess, t);
    std::size_t dense = 0;
    for (const bool b : rep.dense) dense += b ? 1 : 0;
    rows[run] = {rep.fraction,
                 *std::min_element(rep.min_occupancy.begin(),
                                   rep.min_occupancy.end()),
                 dense, rep.slack_warning};
  });

  ResultTable table;
  table.schema = {"run", "dense_fraction", "min_occupancy", "dense_steps",
                  "total_steps", "slack_warning"};
  std::int64_t idx = 0;
  for (const auto& r : rows)
    table.add_row({Cell{idx++}, Cell{r.fraction},
                   Cell{static_cast<std::int64_t>(r.min_occ)},
                   Cell{static_cast<std::int64_t>(r.dense_steps)},
                   Cell{static_cast<std::int64_t>(t + 1)}, Cell{r.warn}});
  return table;
}

ResultTable run_calibrate(const ExperimentSpec& spec,
                          const std::map<std::string, std::string>& p,
                          const RunOptions& options) {
  const auto cal = percolation::calibrate_lambda_c(
      static_cast<int>(as_i(p, "d")), as_f(p, "r"), as_f(p, "side"),
      static_cast<std::size_t>(as_i(p, "trials")), spec.seed, options.threads);
  ResultTable table;
  table.schema = {"lambda_c", "ci_lo", "ci_hi", "side", "trials_per_probe"};
  table.add_row({Cell{cal.lambda_c}, Cell{cal.ci_lo}, Cell{cal.ci_hi},
                 Cell{cal.side},
                 Cell{static_cast<std::int64_t>(cal.trials_per_probe)}});
  return table;
}

nlohmann::json metadata_json(const ExperimentSpec& spec,
                             const std::map<std::string, std::string>& params,
                             const RunOptions& options, std::size_t rows,
                             double wall_seconds, const std::string& status) {
  nlohmann::json meta;
  meta["kind"] = kind_to_string(spec.kind);
  meta["parameters"] = params;
  meta["seed"] = spec.seed;
  meta["version"] = kVersion;
  meta["threads"] = options.threads;
  meta["rows"] = rows;
  meta["wall_time_s"] = wall_seconds;
  meta["status"] = status;
  return meta;
}

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec,
                           const RunOptions& options) {
  const auto params = validate_spec(spec);  // before any simulation
  const auto start = std::chrono::steady_clock::now();
  ResultTable table;
  switch (spec.kind) {
    case ExperimentKind::Detect: table = run_detect(spec, params, options); break;
    case ExperimentKind::Cover: table = run_cover(spec, params, options); break;
    case ExperimentKind::Perc: table = run_perc(spec, params, options); break;
    case ExperimentKind::Broadcast:
      table = run_broadcast(spec, params, options);
      break;
    case ExperimentKind::Sausage: table = run_sausage(spec, params, options); break;
    case ExperimentKind::Couple: table = run_couple(spec, params, options); break;
    case ExperimentKind::Density: table = run_density(spec, params, options); break;
    case ExperimentKind::Calibrate:
      table = run_calibrate(spec, params, options);
      break;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  table.metadata_json =
      metadata_json(spec, params, options, table.rows.size(), wall, "complete")
          .dump(2);
  return table;
}

void write_result(const ResultTable& table, const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << csv_body(table);
  }
  std::ofstream meta(path + ".meta.json", std::ios::binary);
  if (!meta) throw std::runtime_error("cannot write " + path + ".meta.json");
  meta << table.metadata_json << '\n';
}

ResultTable run_experiment_to_files(const ExperimentSpec& spec,
                                    const RunOptions& options) {
  const auto params = validate_spec(spec);
  try {
    ResultTable table = run_experiment(spec, options);
    write_result(table, spec.output_path);
    return table;
  } catch (const ValidationError&) {
    throw;
  } catch (...) {
    // flag the partial output as incomplete
    ResultTable partial;
    partial.metadata_json =
        metadata_json(spec, params, options, 0, 0.0, "incomplete").dump(2);
    try {
      write_result(partial, spec.output_path);
    } catch (...) {
    }
    throw;
  }
}

ResultTable aggregate(const std::vector<ResultTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("aggregate: no tables");
  for (std::size_t i = 1; i < tables.size(); ++i) {
    if (tables[i].schema != tables[0].schema) {
      std::string msg = "aggregate: schema mismatch; columns differ:";
      for (const auto& c : tables[i].schema)
        if (std::find(tables[0].schema.begin(), tables[0].schema.end(), c) ==
            tables[0].schema.end())
          msg += " " + c;
      for (const auto& c : tables[0].schema)
        if (std::find(tables[i].schema.begin(), tables[i].schema.end(), c) ==
            tables[i].schema.end())
          msg += " " + c;
      throw std::invalid_argument(msg);
    }
  }

  // canonical content order makes the fold permutation-invariant bit for bit
  std::vector<const ResultTable*> ordered;
  ordered.reserve(tables.size());
  for (const auto& t : tables) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const ResultTable* a, const ResultTable* b) {
              return csv_body(*a) < csv_body(*b);
            });

  ResultTable out;
  out.schema = {"column", "count", "mean", "std_error"};
  for (std::size_t c = 0; c < tables[0].schema.size(); ++c) {
    core::RunningMoments m;
    for (const ResultTable* t : ordered) {
      for (const auto& row : t->rows) {
        const Cell& cell = row[c];
        if (std::holds_alternative<double>(cell))
          m.add(std::get<double>(cell));
        else if (std::holds_alternative<std::int64_t>(cell))
          m.add(static_cast<double>(std::get<std::int64_t>(cell)));
        else if (std::holds_alternative<bool>(cell))
          m.add(std::get<bool>(cell) ? 1.0 : 0.0);
      }
    }
    if (m.count() == 0) continue;
    out.add_row({Cell{tables[0].schema[c]},
                 Cell{static_cast<std::int64_t>(m.count())}, Cell{m.mean()},
                 Cell{m.std_error()}});
  }
  out.metadata_json = nlohmann::json{{"kind", "aggregate"},
                                     {"inputs", tables.size()},
                                     {"version", kVersion}}
                          .dump(2);
  return out;
}

}  // namespace mobigg::experiments
