// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

#include "eulerci/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "eulerci/spectral.hpp"
#include "eulerci/verification.hpp"

namespace eulerci
{

namespace fs = std::filesystem;

namespace
{

const std::set<std::string> kKeys = {
  "dim",          "grid",          "time_samples",  "T",             "energy",
  "n_steps",      "alpha",         "beta",          "eps",           "seed",
  "out",          "mode",          "lambda",        "lambda_min",    "lambda_max",
  "slow_points",  "families",      "nu",            "spread_target", "search_bound",
  "require_gamma", "system",       "resume",        "verify_dims",   "verify_fields",
  "verify_sets",  "verify_samples", "verify_points", "tolerances"};

std::string hex(std::uint64_t h)
{
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_json(const fs::path &path, const nlohmann::json &j)
{
  std::ofstream out(path);
  if (!out)
  {
    throw ConfigError("cannot write " + path.string());
  }
  out << j.dump(2) << "\n";
}

fs::path prepare_out(const RunConfig &cfg)
{
  fs::path out(cfg.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
  {
    throw ConfigError("cannot create output directory " + cfg.out + ": " + ec.message());
  }
  return out;
}

nlohmann::json report_header(const RunConfig &cfg, const std::string &command)
{
  return {{"command", command}, {"config", cfg.to_json()}, {"config_hash", hex(cfg.hash())}};
}

void require_gamma_data(const DirectionFamilySystem &sys, int dim)
{
  if (sys.dim != dim)
  {
    throw ConfigError("system dimension " + std::to_string(sys.dim) + " does not match dim " +
                      std::to_string(dim));
  }
  if (sys.gammas.empty())
  {
    throw ConfigError("the direction-family system carries no gamma data");
  }
}

// One norms.csv row.
struct NormsRow
{
  int step = 0;
  int lambda = 0;
  int mu = 0;
  double sup_R = 0.0;
  double sup_w = 0.0;
  double gap_min = 0.0;
  double gap_max = 0.0;
  double h_minus1 = 0.0;
  double anisotropy = 0.0;
};

void write_norms(const fs::path &path, const std::vector<NormsRow> &rows)
{
  std::ofstream out(path);
  out << "step,lambda,mu,sup_R,sup_w,energy_gap_min,energy_gap_max,h_minus1,anisotropy\n";
  out << std::setprecision(17);
  for (const auto &r : rows)
  {
    out << r.step << ',' << r.lambda << ',' << r.mu << ',' << r.sup_R << ',' << r.sup_w << ','
        << r.gap_min << ',' << r.gap_max << ',' << r.h_minus1 << ',' << r.anisotropy << "\n";
  }
}

// Row and energy trace for a state that was not produced by a step report
// (the initial or resumed state).
NormsRow state_row(const EulerReynoldsState &s, const EnergyProfile &e,
                   const TwoScaleSampling &sampling)
{
  NormsRow row;
  row.step = s.level;
  row.gap_min = std::numeric_limits<double>::infinity();
  row.gap_max = -std::numeric_limits<double>::infinity();
  const int d = s.dim();
  for (int i = 0; i < s.frames(); ++i)
  {
    if (!s.times.interior(i))
    {
      continue;
    }
    const double t = s.times.at(i);
    const double energy = integral(dot(s.v[i], s.v[i]))[0];
    row.gap_min = std::min(row.gap_min, e.value(t) - energy);
    row.gap_max = std::max(row.gap_max, e.value(t) - energy);
    row.sup_R = std::max(row.sup_R, sup_norm(s.stress[i], sampling));
    const auto m = integral(sym_outer(s.v[i], s.v[i]));
    Eigen::MatrixXd mm(d, d);
    for (int a = 0; a < d; ++a)
    {
      for (int b = 0; b < d; ++b)
      {
        mm(a, b) = m[sym_index(a, b, d)];
      }
    }
    mm -= (e.value(t) / d) * Eigen::MatrixXd::Identity(d, d);
    row.anisotropy = std::max(row.anisotropy, operator_norm(mm));
  }
  return row;
}

NormsRow step_row(const RunStepRecord &rec)
{
  NormsRow row;
  row.step = rec.step;
  row.lambda = rec.lambda;
  row.mu = rec.mu;
  row.sup_R = rec.sup_R;
  row.sup_w = rec.increment;
  row.anisotropy = rec.anisotropy;
  row.gap_min = std::numeric_limits<double>::infinity();
  row.gap_max = -std::numeric_limits<double>::infinity();
  if (rec.report)
  {
    for (const auto &f : rec.report->frames)
    {
      if (f.interior)
      {
        row.gap_min = std::min(row.gap_min, f.energy_gap);
        row.gap_max = std::max(row.gap_max, f.energy_gap);
      }
    }
    row.h_minus1 = rec.report->max_interior(&FrameDiagnostics::h_minus1);
  }
  return row;
}

// Energy trace of a state with the band of its level: 3/4 and 5/4 of
// 2^-n e(t) for the gap e - int |v|^2.
nlohmann::json energy_trace(const EulerReynoldsState &s, const EnergyProfile &e)
{
  nlohmann::json frames = nlohmann::json::array();
  const double delta = std::ldexp(1.0, -s.level);
  for (int i = 0; i < s.frames(); ++i)
  {
    const double t = s.times.at(i);
    const double energy = integral(dot(s.v[i], s.v[i]))[0];
    const double et = e.value(t);
    frames.push_back({{"t", t},
                      {"e", et},
                      {"energy", energy},
                      {"gap", et - energy},
                      {"band_low", 0.75 * delta * et},
                      {"band_high", 1.25 * delta * et},
                      {"interior", s.times.interior(i)}});
  }
  return {{"level", s.level}, {"frames", frames}};
}

// Saves a state; carrier states that do not fit on their grid are skipped.
std::string try_save(const fs::path &dir, const EulerReynoldsState &s, std::ostream &log)
{
  try
  {
    save_state(dir.string(), s);
    return dir.filename().string();
  }
  catch (const ConfigError &err)
  {
    log << "note: state at level " << s.level << " not saved (" << err.what() << ")\n";
    return {};
  }
}

EulerReynoldsState initial_state(const RunConfig &cfg, std::ostream &log)
{
  if (!cfg.resume.empty())
  {
    auto s = load_state(cfg.resume);
    if (s.dim() != cfg.dim)
    {
      throw ConfigError("resumed state has dimension " + std::to_string(s.dim()));
    }
    log << "resuming from " << cfg.resume << " at level " << s.level << "\n";
    return s;
  }
  return EulerReynoldsState::zero(TorusGrid(cfg.dim, cfg.grid), cfg.times());
}

template <class F>
int guarded(std::ostream &log, F &&body)
{
  try
  {
    return body();
  }
  catch (const PreconditionError &err)
  {
    log << "error: hypothesis of the incoming state: " << err.what() << "\n";
    return kExitConfig;
  }
  catch (const ConfigError &err)
  {
    log << "error: " << err.what() << "\n";
    return kExitConfig;
  }
  catch (const std::exception &err)
  {
    log << "error: " << err.what() << "\n";
    return kExitConfig;
  }
}

void print_checks(const SuiteResult &r, std::ostream &log)
{
  for (const auto &c : r.checks)
  {
    log << (c.pass ? "PASS" : (c.gated ? "FAIL" : "INFO")) << "  [" << c.suite << "] " << c.name
        << "  value=" << std::setprecision(4) << c.value << " tol=" << c.tolerance;
    if (!c.detail.empty())
    {
      log << "  (" << c.detail << ")";
    }
    log << "\n";
  }
}

}  // namespace

// ---------------------------------------------------------------- config

RunConfig RunConfig::from_json(const nlohmann::json &j)
{
  if (!j.is_object())
  {
    throw ConfigError("configuration must be a JSON object");
  }
  for (const auto &[key, _] : j.items())
  {
    if (!kKeys.count(key))
    {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  RunConfig c;
  try
  {
    c.dim = j.value("dim", c.dim);
    c.grid = j.value("grid", c.grid);
    c.time_samples = j.value("time_samples", c.time_samples);
    c.T = j.value("T", c.T);
    c.energy = j.value("energy", c.energy);
    c.n_steps = j.value("n_steps", c.n_steps);
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.eps = j.value("eps", c.eps);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.mode = j.value("mode", c.mode);
    c.lambda = j.value("lambda", c.lambda);
    c.lambda_min = j.value("lambda_min", c.lambda_min);
    c.lambda_max = j.value("lambda_max", c.lambda_max);
    c.slow_points = j.value("slow_points", c.slow_points);
    c.families = j.value("families", c.families);
    c.nu = j.value("nu", c.nu);
    c.spread_target = j.value("spread_target", c.spread_target);
    c.search_bound = j.value("search_bound", c.search_bound);
    c.require_gamma = j.value("require_gamma", c.require_gamma);
    c.system = j.value("system", c.system);
    c.resume = j.value("resume", c.resume);
    c.verify_dims = j.value("verify_dims", c.verify_dims);
    c.verify_fields = j.value("verify_fields", c.verify_fields);
    c.verify_sets = j.value("verify_sets", c.verify_sets);
    c.verify_samples = j.value("verify_samples", c.verify_samples);
    c.verify_points = j.value("verify_points", c.verify_points);
    if (j.contains("tolerances"))
    {
      const auto &t = j.at("tolerances");
      for (const auto &[key, _] : t.items())
      {
        if (key != "mean" && key != "null_step")
        {
          throw ConfigError("unknown tolerance '" + key + "'");
        }
      }
      c.mean_tol = t.value("mean", c.mean_tol);
      c.null_tol = t.value("null_step", c.null_tol);
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot read configuration " + path);
  }
  nlohmann::json j;
  try
  {
    in >> j;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const
{
  return {{"dim", dim},
          {"grid", grid},
          {"time_samples", time_samples},
          {"T", T},
          {"energy", energy},
          {"n_steps", n_steps},
          {"alpha", alpha},
          {"beta", beta},
          {"eps", eps},
          {"seed", seed},
          {"out", out},
          {"mode", mode},
          {"lambda", lambda},
          {"lambda_min", lambda_min},
          {"lambda_max", lambda_max},
          {"slow_points", slow_points},
          {"families", families},
          {"nu", nu},
          {"spread_target", spread_target},
          {"search_bound", search_bound},
          {"require_gamma", require_gamma},
          {"system", system},
          {"resume", resume},
          {"verify_dims", verify_dims},
          {"verify_fields", verify_fields},
          {"verify_sets", verify_sets},
          {"verify_samples", verify_samples},
          {"verify_points", verify_points},
          {"tolerances", {{"mean", mean_tol}, {"null_step", null_tol}}}};
}

std::uint64_t RunConfig::hash() const
{
  // The output directory does not change results.
  auto j = to_json();
  j.erase("out");
  return fnv1a(j.dump());
}

EnergyProfile RunConfig::energy_profile() const
{
  auto j = energy;
  if (j.value("kind", std::string("constant")) == "sinusoid" && !j.contains("period"))
  {
    j["period"] = T;
  }
  return EnergyProfile::from_json(j);
}

TimeGrid RunConfig::times() const { return TimeGrid{0.0, T, time_samples}; }

EngineOptions RunConfig::engine() const
{
  EngineOptions o;
  o.carrier_mode = mode == "carrier";
  o.sampling.max_slow_points = static_cast<std::size_t>(slow_points);
  return o;
}

void RunConfig::validate() const
{
  auto fail = [](const std::string &m) { throw ConfigError(m); };
  if (dim != 2 && dim != 3)
  {
    fail("dim must be 2 or 3");
  }
  if (grid < 8 || grid % 2 != 0)
  {
    fail("grid must be even and at least 8");
  }
  if (time_samples < 1)
  {
    fail("time_samples must be positive");
  }
  if (!(T > 0.0))
  {
    fail("T must be positive");
  }
  if (n_steps < 0)
  {
    fail("n_steps must be nonnegative");
  }
  if (!(alpha > 0.0 && beta > alpha && alpha + 2.0 * beta < 1.0))
  {
    fail("exponents need 0 < alpha < beta and alpha + 2 beta < 1");
  }
  if (!(eps > 0.0))
  {
    fail("eps must be positive");
  }
  if (mode != "grid" && mode != "carrier")
  {
    fail("mode must be 'grid' or 'carrier'");
  }
  if (lambda < 0 || lambda_min < 1 || lambda_max < 0)
  {
    fail("lambda must be >= 0, lambda_min >= 1 and lambda_max >= 0");
  }
  if (mode == "carrier" && lambda == 0 && lambda_max == 0)
  {
    fail("carrier mode searching lambda needs lambda_max");
  }
  if (slow_points < 1)
  {
    fail("slow_points must be positive");
  }
  if (families < 0 || nu < 0 || !(spread_target > 0.0) || search_bound < 1)
  {
    fail("planning options out of range");
  }
  for (int d : verify_dims)
  {
    if (d != 2 && d != 3)
    {
      fail("verify_dims entries must be 2 or 3");
    }
  }
  if (verify_fields < 1 || verify_sets < 1 || verify_samples < 1 || verify_points < 1)
  {
    fail("verification sizes must be positive");
  }
  if (!(mean_tol > 0.0) || !(null_tol > 0.0))
  {
    fail("tolerances must be positive");
  }
  energy_profile().check_positive(0.0, T, 2048);
}

void check_feasibility(const RunConfig &cfg, int nu)
{
  if (cfg.mode != "grid")
  {
    return;
  }
  const int lam = cfg.lambda > 0 ? cfg.lambda : cfg.lambda_min;
  const double need = 4.0 * lam * std::sqrt(static_cast<double>(nu));
  if (need > cfg.grid)
  {
    std::ostringstream os;
    os << "grid " << cfg.grid << " cannot resolve lambda = " << lam << " at nu = " << nu
       << " (needs 4 lambda sqrt(nu) = " << need << " <= n); largest feasible lambda is "
       << static_cast<int>(std::floor(cfg.grid / (4.0 * std::sqrt(static_cast<double>(nu)))));
    throw ConfigError(os.str());
  }
}

// ---------------------------------------------------------------- planning

DirectionFamilySystem plan_from_config(const RunConfig &cfg)
{
  NuSearchOptions opts;
  opts.spread_target = cfg.spread_target;
  opts.search_bound = cfg.search_bound;
  opts.require_gamma = cfg.require_gamma;
  const int N = cfg.families > 0 ? cfg.families : (1 << cfg.dim);
  if (cfg.nu == 0 && N == (1 << cfg.dim) && cfg.require_gamma)
  {
    return plan_system(cfg.dim, opts);
  }
  DirectionFamilySystem sys;
  sys.dim = cfg.dim;
  sys.nu = cfg.nu > 0 ? cfg.nu : choose_nu(cfg.dim, N, opts);
  sys.spread_target = cfg.spread_target;
  const auto points = lattice_sphere(cfg.dim, sys.nu);
  if (points.empty())
  {
    throw ConfigError("no lattice points with |k|^2 = " + std::to_string(sys.nu));
  }
  sys.families = partition_families(cfg.dim, points, N);
  sys.r0 = std::numeric_limits<double>::infinity();
  try
  {
    for (const auto &f : sys.families)
    {
      sys.gammas.push_back(build_gamma(cfg.dim, f));
      sys.r0 = std::min(sys.r0, sys.gammas.back().r0);
    }
  }
  catch (const Error &err)
  {
    if (cfg.require_gamma)
    {
      throw ConfigError(std::string("gamma construction failed: ") + err.what());
    }
    sys.gammas.clear();
    sys.r0 = 0.0;
  }
  return sys;
}

DirectionFamilySystem system_for(const RunConfig &cfg)
{
  if (cfg.system.empty())
  {
    return plan_from_config(cfg);
  }
  std::ifstream in(cfg.system);
  if (!in)
  {
    throw ConfigError("cannot read system file " + cfg.system);
  }
  try
  {
    nlohmann::json j;
    in >> j;
    return DirectionFamilySystem::from_json(j);
  }
  catch (const nlohmann::json::exception &e)
  {
    throw ConfigError(std::string("system file is not valid JSON: ") + e.what());
  }
  catch (const Error &e)
  {
    throw ConfigError(e.what());
  }
}

void read_series_csv(const std::string &path, std::vector<double> &x, std::vector<double> &y)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot read " + path);
  }
  auto split = [](const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
      out.push_back(cell);
    }
    return out;
  };
  std::string line;
  std::size_t cx = 0, cy = 1;
  bool first = true;
  x.clear();
  y.clear();
  while (std::getline(in, line))
  {
    if (line.empty() || line[0] == '#')
    {
      continue;
    }
    const auto cells = split(line);
    if (first)
    {
      first = false;
      const auto lx = std::find(cells.begin(), cells.end(), "lambda");
      const auto ly = std::find(cells.begin(), cells.end(), "sup_R");
      if (lx != cells.end() && ly != cells.end())
      {
        cx = lx - cells.begin();
        cy = ly - cells.begin();
        continue;
      }
      if (!cells.empty() && !std::isdigit(static_cast<unsigned char>(cells[0][0])) &&
          cells[0][0] != '-' && cells[0][0] != '.')
      {
        continue;  // other header
      }
    }
    if (cells.size() <= std::max(cx, cy))
    {
      throw ConfigError("short row in " + path + ": " + line);
    }
    try
    {
      x.push_back(std::stod(cells[cx]));
      y.push_back(std::stod(cells[cy]));
    }
    catch (const std::exception &)
    {
      throw ConfigError("non-numeric row in " + path + ": " + line);
    }
  }
}

// ---------------------------------------------------------------- commands

int cmd_plan(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&] {
    cfg.validate();
    const auto out = prepare_out(cfg);
    const auto sys = plan_from_config(cfg);
    write_json(out / "system.json", sys.to_json());
    auto rep = report_header(cfg, "plan");
    rep["system_hash"] = hex(sys.hash());
    rep["nu"] = sys.nu;
    rep["families"] = sys.family_count();
    rep["r0"] = sys.r0;
    rep["gamma"] = !sys.gammas.empty();
    log << "nu = " << sys.nu << ", " << sys.family_count() << " families, r0 = " << sys.r0
        << ", system hash " << hex(sys.hash()) << "\n";
    int code = kExitOk;
    if (sys.gammas.empty())
    {
      rep["self_test"] = "skipped: no gamma data (degenerate families)";
      log << "reconstruction self-test skipped: no gamma data\n";
    }
    else
    {
      const auto st = reconstruction_suite(sys, cfg.verify_samples, cfg.seed);
      rep["self_test"] = st.to_json();
      print_checks(st, log);
      code = st.ok() ? kExitOk : kExitCheckFailed;
    }
    write_json(out / "report.json", rep);
    return code;
  });
}

int cmd_verify(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&] {
    cfg.validate();
    const auto out = prepare_out(cfg);
    auto rep = report_header(cfg, "verify");
    SuiteResult all;
    nlohmann::json hashes;
    std::optional<DirectionFamilySystem> loaded;
    if (!cfg.system.empty())
    {
      loaded = system_for(cfg);
    }
    for (int dim : cfg.verify_dims)
    {
      RunConfig dc = cfg;
      dc.dim = dim;
      dc.system.clear();
      const std::uint64_t seed = cfg.seed + 100 * dim;
      std::vector<SuiteResult> parts;
      parts.push_back(operator_suite(dim, dim == 2 ? 128 : 32, cfg.verify_fields, seed + 1));
      parts.push_back(stationarity_suite(
        dim, dim == 2 ? std::vector<int>{1, 5, 25} : std::vector<int>{1, 5}, cfg.verify_sets,
        seed + 2));
      const auto sys = loaded && loaded->dim == dim ? *loaded : plan_from_config(dc);
      hashes[std::to_string(dim)] = hex(sys.hash());
      parts.push_back(reconstruction_suite(sys, cfg.verify_samples, seed + 3));
      parts.push_back(partition_suite(dim, cfg.verify_points, seed + 4, false));
      if (dim == 2)
      {
        const auto planar =
          loaded && loaded->dim == 2 && !loaded->gammas.empty() ? *loaded : plan_from_config(dc);
        parts.push_back(step_suite(planar, seed + 5));
      }
      auto ns = null_step_suite(dim, seed + 6);
      for (auto &c : ns.checks)
      {
        if (c.name != "zero pressure control detected")
        {
          c.tolerance = cfg.null_tol;
          c.pass = c.value <= cfg.null_tol;
        }
      }
      parts.push_back(ns);
      for (const auto &p : parts)
      {
        print_checks(p, log);
        all.append(p);
      }
    }
    rep["system_hash"] = hashes;
    rep["suites"] = all.to_json();
    write_json(out / "verify.json", rep);
    const bool ok = all.ok();
    log << (ok ? "verify: all gated checks pass" : "verify: some gated checks FAIL") << " ("
        << std::setprecision(3) << all.seconds << " s)\n";
    return ok ? kExitOk : kExitCheckFailed;
  });
}

int cmd_step(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&] {
    cfg.validate();
    const auto sys = system_for(cfg);
    require_gamma_data(sys, cfg.dim);
    check_feasibility(cfg, sys.nu);
    const auto out = prepare_out(cfg);
    const auto e = cfg.energy_profile();
    const auto s = initial_state(cfg, log);
    const auto opts = cfg.engine();
    auto base = schedule_params(sys, e, s.times, s.level, std::max(1, cfg.lambda), cfg.eps,
                                cfg.beta, cfg.alpha);
    base.mean_tol = cfg.mean_tol;
    auto rep = report_header(cfg, "step");
    rep["system_hash"] = hex(sys.hash());
    std::optional<StepResult> res;
    bool ok = false;
    if (cfg.lambda > 0)
    {
      res = iteration_step(s, e, base, sys, opts);
      ok = res->report.bounds_ok();
    }
    else
    {
      auto ar = auto_lambda(s, e, base, sys, [](const StepReport &r) { return r.bounds_ok(); },
                            cfg.lambda_min, cfg.lambda_max, opts);
      rep["auto_lambda"] = {{"found", ar.found}, {"tried", ar.tried}, {"failure", ar.failure}};
      if (!ar.result)
      {
        write_json(out / "report.json", rep);
        log << "no lambda could be tried: " << ar.failure << "\n";
        return kExitCheckFailed;
      }
      res = std::move(ar.result);
      ok = ar.found;
    }
    const auto &r = res->report;
    rep["step"] = r.to_json();
    rep["energy_trace"] = {energy_trace(s, e), energy_trace(res->state, e)};
    const auto saved = try_save(out / ("state_" + std::to_string(res->state.level)),
                                res->state, log);
    rep["state"] = saved;
    write_json(out / "report.json", rep);
    RunStepRecord rec;
    rec.step = res->state.level;
    rec.lambda = r.params.lambda;
    rec.mu = r.params.mu;
    rec.sup_R = r.max_interior(&FrameDiagnostics::sup_R1);
    rec.increment = r.max_interior(&FrameDiagnostics::sup_w);
    rec.report = r;
    for (const auto &f : r.frames)
    {
      if (f.interior)
      {
        const int d = s.dim();
        rec.anisotropy = std::max(
          rec.anisotropy,
          operator_norm(f.moment - (f.e / d) * Eigen::MatrixXd::Identity(d, d)));
      }
    }
    write_norms(out / "norms.csv", {state_row(s, e, opts.sampling), step_row(rec)});
    log << "lambda = " << r.params.lambda << ", mu = " << r.params.mu
        << ", sup R1 = " << rec.sup_R << " (bound " << 0.5 * r.params.eta * r.params.delta
        << "), sup w = " << rec.increment << " (bound " << r.params.M * std::sqrt(r.params.delta)
        << ")\n";
    log << "energy " << (r.energy_ok ? "ok" : "FAIL") << ", stress "
        << (r.stress_ok ? "ok" : "FAIL") << ", velocity " << (r.velocity_ok ? "ok" : "FAIL")
        << ", pressure " << (r.pressure_ok ? "ok" : "FAIL") << "\n";
    return ok ? kExitOk : kExitCheckFailed;
  });
}

int cmd_run(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&] {
    cfg.validate();
    const auto sys = system_for(cfg);
    require_gamma_data(sys, cfg.dim);
    check_feasibility(cfg, sys.nu);
    const auto out = prepare_out(cfg);
    const auto e = cfg.energy_profile();
    const auto start = initial_state(cfg, log);
    RunOptions ro;
    ro.n_steps = cfg.n_steps;
    ro.eps = cfg.eps;
    ro.beta = cfg.beta;
    ro.holder_alpha = cfg.alpha;
    ro.lambda_min = cfg.lambda_min;
    ro.lambda_max = cfg.lambda_max;
    if (cfg.lambda > 0)
    {
      ro.lambdas = {cfg.lambda};
    }
    ro.mean_tol = cfg.mean_tol;
    ro.engine = cfg.engine();
    nlohmann::json states = nlohmann::json::array();
    nlohmann::json traces = nlohmann::json::array();
    ro.on_state = [&](const EulerReynoldsState &s) {
      const auto name = try_save(out / ("state_" + std::to_string(s.level)), s, log);
      states.push_back(name.empty() ? nlohmann::json(nullptr) : nlohmann::json(name));
      traces.push_back(energy_trace(s, e));
      log << "state at level " << s.level << (name.empty() ? "" : " -> " + name) << "\n";
    };
    const auto res = full_run(start, e, sys, ro);
    std::vector<NormsRow> rows{state_row(start, e, ro.engine.sampling)};
    for (const auto &rec : res.report.steps)
    {
      rows.push_back(step_row(rec));
    }
    write_norms(out / "norms.csv", rows);
    auto rep = report_header(cfg, "run");
    rep["system_hash"] = hex(sys.hash());
    rep["run"] = res.report.to_json();
    rep["states"] = states;
    rep["energy_trace"] = traces;
    write_json(out / "report.json", rep);
    for (const auto &rec : res.report.steps)
    {
      log << "step " << rec.step << ": lambda = " << rec.lambda << ", band "
          << (rec.band_ok ? "ok" : "FAIL") << " [" << rec.gap_ratio_min << ", "
          << rec.gap_ratio_max << "], stress " << (rec.stress_ok ? "ok" : "FAIL") << " ("
          << rec.sup_R << " <= " << rec.sup_R_bound << "), increment "
          << (rec.increment_ok ? "ok" : "FAIL") << "\n";
    }
    if (!res.report.failure.empty())
    {
      log << "run stopped: " << res.report.failure << "\n";
    }
    return res.report.completed && res.report.all_ok() ? kExitOk : kExitCheckFailed;
  });
}

int cmd_export(const RunConfig &cfg, const std::string &state_dir, std::ostream &log)
{
  return guarded(log, [&] {
    const std::string dir = state_dir.empty() ? cfg.resume : state_dir;
    if (dir.empty())
    {
      throw ConfigError("export needs a state directory (--state or resume)");
    }
    const auto s = load_state(dir);
    const auto out = prepare_out(cfg) / "export";
    fs::create_directories(out);
    const auto &g = s.grid();
    const auto chk = check_state(s);
    nlohmann::json frames = nlohmann::json::array();
    for (int i = 0; i < s.frames(); ++i)
    {
      const auto v = materialize(s.v[i], g);
      const auto p = materialize(s.p[i], g);
      const auto R = materialize(s.stress[i], g);
      const double t = s.times.at(i);
      const std::string idx = std::to_string(i);
      write_pfield((out / ("v_" + idx + ".pfield")).string(), v, t);
      write_pfield((out / ("p_" + idx + ".pfield")).string(), p, t);
      write_pfield((out / ("R_" + idx + ".pfield")).string(), R, t);
      frames.push_back({{"t", t},
                        {"energy", integral(dot(v, v))[0]},
                        {"sup_v", sup_norm(v)},
                        {"sup_p", sup_norm(p)},
                        {"sup_R", sup_norm(R)},
                        {"sup_div_v", sup_norm(divergence(v))},
                        {"h_minus1_v", h_minus1_norm(v)}});
    }
    nlohmann::json rep = report_header(cfg, "export");
    rep["system_hash"] = nullptr;
    rep["state"] = dir;
    rep["level"] = s.level;
    rep["grid"] = {{"dim", g.dim()}, {"n", g.n()}};
    rep["frames"] = frames;
    rep["state_check"] = {{"max_divergence", chk.max_divergence},
                          {"max_trace", chk.max_trace},
                          {"max_residual", chk.max_residual}};
    write_json(out / "summary.json", rep);
    log << "exported " << s.frames() << " frames at level " << s.level << " to " << out.string()
        << "\n";
    return kExitOk;
  });
}

int cmd_fit(const RunConfig &cfg, const std::string &input, std::ostream &log)
{
  return guarded(log, [&] {
    if (input.empty())
    {
      throw ConfigError("fit needs --input <csv>");
    }
    std::vector<double> x, y;
    read_series_csv(input, x, y);
    const auto f = fit_scaling(x, y);
    const auto out = prepare_out(cfg);
    auto rep = report_header(cfg, "fit");
    rep["system_hash"] = nullptr;
    rep["input"] = input;
    rep["x"] = x;
    rep["y"] = y;
    rep["fit"] = f.to_json();
    write_json(out / "fit.json", rep);
    log << std::setprecision(6) << "slope = " << f.slope << ", intercept = " << f.intercept
        << ", r2 = " << f.r2 << " (" << f.points << " points)\n";
    return kExitOk;
  });
}

}  // namespace eulerci
