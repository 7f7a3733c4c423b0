// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// Batch front door: configuration and the plan / verify / step / run / export /
// fit commands. Each command writes into the configured output directory and
// returns an exit code: 0 when every gated check passes, 1 when some check
// fails, 2 on configuration or feasibility errors.

#ifndef EULERCI_HARNESS_HPP
#define EULERCI_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "eulerci/convex_integration.hpp"

namespace eulerci
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig
{
  int dim = 2;
  int grid = 128;
  int time_samples = 9;
  double T = 1.0;
  // {"kind": "constant" | "sinusoid" | "polynomial", ...}; a sinusoid without
  // "period" uses T.
  nlohmann::json energy = {{"kind", "constant"}, {"value", 1.0}};
  int n_steps = 1;
  double alpha = 0.05;
  double beta = 1.0 / 3.0;
  double eps = 0.1;
  std::uint64_t seed = 0;
  std::string out = "eulerci-out";

  // "grid" or "carrier".
  std::string mode = "grid";
  int lambda = 0;  // 0 searches
  int lambda_min = 1;
  int lambda_max = 0;
  int slow_points = 4096;

  // Planning. families = 0 means 2^dim; nu = 0 searches.
  int families = 0;
  int nu = 0;
  double spread_target = 1.5707963267948966;
  int search_bound = 20000;
  bool require_gamma = true;
  std::string system;  // saved system file; planned when empty
  std::string resume;  // saved state directory; zero state when empty

  // Verification sizes.
  std::vector<int> verify_dims = {2, 3};
  int verify_fields = 100;
  int verify_sets = 200;
  int verify_samples = 500;
  int verify_points = 1000;

  // Tolerance overrides.
  double mean_tol = 1e-8;
  double null_tol = 1e-6;

  // Unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json &j);
  static RunConfig load(const std::string &path);
  nlohmann::json to_json() const;
  std::uint64_t hash() const;

  EnergyProfile energy_profile() const;
  TimeGrid times() const;
  EngineOptions engine() const;
  // Ranges, energy positivity on [0, T] (2048 samples); ConfigError otherwise.
  void validate() const;
};

// Grid mode: the smallest lambda the run may use must satisfy
// 4 lambda sqrt(nu) <= n. Checked before any field is allocated.
void check_feasibility(const RunConfig &cfg, int nu);

// choose_nu + partition_families + build_gamma with the configured family
// count. Without require_gamma a degenerate family leaves the system without
// gamma data instead of failing.
DirectionFamilySystem plan_from_config(const RunConfig &cfg);

// Loads cfg.system when set, plans otherwise.
DirectionFamilySystem system_for(const RunConfig &cfg);

// Reads (x, y) pairs from a CSV file: a header naming "lambda" and "sup_R"
// selects those columns, otherwise the first two columns are used.
void read_series_csv(const std::string &path, std::vector<double> &x, std::vector<double> &y);

int cmd_plan(const RunConfig &cfg, std::ostream &log);
int cmd_verify(const RunConfig &cfg, std::ostream &log);
int cmd_step(const RunConfig &cfg, std::ostream &log);
int cmd_run(const RunConfig &cfg, std::ostream &log);
int cmd_export(const RunConfig &cfg, const std::string &state_dir, std::ostream &log);
int cmd_fit(const RunConfig &cfg, const std::string &input, std::ostream &log);

}  // namespace eulerci

#endif
