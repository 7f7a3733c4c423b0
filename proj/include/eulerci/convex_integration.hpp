// Copyright The eulerci Authors
// SPDX-License-Identifier: Apache-2.0

// One step of the Euler-Reynolds iteration: given (v, p, R) solving
//   d_t v + div(v (x) v) + grad p = div R
// and an energy profile e(t), add the oscillatory perturbation
//   w_o = sqrt(rho) sum_j sum_k gamma_k(R/rho) phi_k^(j)(v, lambda t) b_k(lambda x),
// its corrector w_c = -Q w_o and the pressure q, then measure everything the
// construction promises about (v1, p1, R1).
//
// Two execution modes share one code path. In grid mode the perturbation is
// sampled directly on the state grid, which then has to resolve lambda sqrt(nu).
// In carrier mode the perturbation is kept as envelopes on carriers k (see
// CarrierField), so lambda is limited only by the slow resolution of the
// coefficients; the incoming state must then be a slow grid field.

#ifndef EULERCI_CONVEX_INTEGRATION_HPP
#define EULERCI_CONVEX_INTEGRATION_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "eulerci/carrier_field.hpp"
#include "eulerci/field.hpp"
#include "eulerci/geometric_lemma.hpp"
#include "eulerci/velocity_partition.hpp"

namespace eulerci
{

// A hypothesis of the step does not hold for the incoming state.
class PreconditionError : public Error
{
public:
  using Error::Error;
};

class EnergyProfile
{
public:
  enum class Kind
  {
    Constant,
    Sinusoid,   // base + amplitude sin(2 pi frequency t / period)
    Polynomial  // sum_i coeffs[i] t^i
  };

  static EnergyProfile constant(double e);
  static EnergyProfile sinusoid(double base, double amplitude, double frequency, double period);
  static EnergyProfile polynomial(std::vector<double> coeffs);

  Kind kind() const { return kind_; }
  double value(double t) const;
  double derivative(double t) const;
  // Dense sampling (plus both end points) of [t0, t1].
  double min_over(double t0, double t1, int samples = 2048) const;
  double max_over(double t0, double t1, int samples = 2048) const;
  // ConfigError unless e > 0 at every dense sample.
  void check_positive(double t0, double t1, int samples = 2048) const;

  nlohmann::json to_json() const;
  static EnergyProfile from_json(const nlohmann::json &j);

private:
  Kind kind_ = Kind::Constant;
  double base_ = 1.0;
  double amplitude_ = 0.0;
  double frequency_ = 1.0;
  double period_ = 1.0;
  std::vector<double> coeffs_;
};

struct EulerReynoldsState
{
  TimeGrid times;
  int level = 0;
  std::vector<CarrierField> v;       // vector, divergence free
  std::vector<CarrierField> p;       // scalar
  std::vector<CarrierField> stress;  // symmetric trace free
  // Analytic d_t stress per frame; finite differences are used when empty.
  std::vector<CarrierField> stress_dt;

  const TorusGrid &grid() const { return v.front().grid(); }
  int dim() const { return grid().dim(); }
  int frames() const { return static_cast<int>(v.size()); }
  bool is_grid_state() const;

  static EulerReynoldsState zero(const TorusGrid &grid, const TimeGrid &times, int level = 0);
  // From sampled grid fields.
  static EulerReynoldsState from_fields(const EvolvingField &v, const EvolvingField &p,
                                        const EvolvingField &stress, int level);
};

// d_t v from the equation: div R - div(v (x) v) - grad p.
CarrierField velocity_time_derivative(const EulerReynoldsState &s, int frame);
// d_t R per frame: analytic when present, 6th order differences otherwise.
std::vector<CarrierField> stress_time_derivative(const EulerReynoldsState &s);
// Finite-difference time derivative of a family of carrier fields.
std::vector<CarrierField> time_derivative(const TimeGrid &times,
                                          const std::vector<CarrierField> &frames);

struct StateCheck
{
  double max_divergence = 0.0;
  double max_trace = 0.0;
  // sup over interior frames of |d_t v + div(v (x) v) + grad p - div R|, d_t v by
  // finite differences.
  double max_residual = 0.0;
};
StateCheck check_state(const EulerReynoldsState &s, const TwoScaleSampling &sampling = {});

struct IterationParams
{
  int dim = 2;
  int level = 0;
  double delta = 1.0;
  double eta = 0.0;
  double M = 0.0;
  double M_prime = 0.0;
  int lambda = 1;
  int mu = 1;
  double beta = 1.0 / 3.0;
  double holder_alpha = 0.05;
  double eps = 0.1;
  double eps_prime = 0.05;
  double c_const = 0.0;      // 1 / (4 d (2 pi)^d)
  double residual_tol = 1e-6;
  double mean_tol = 1e-8;

  // mu = 2^round(beta log2 lambda).
  static int mu_for(int lambda, double beta);
  // Throws ConfigError on exponents, integrality of lambda / mu, eta or M.
  void validate() const;
  IterationParams with_lambda(int lambda) const;
  nlohmann::json to_json() const;
};

// Parameter schedule for level n: delta = 2^-n, eps' = eps 2^(-n-1),
// eta = c min e r0 / 2 and M from the coefficient bound.
IterationParams schedule_params(const DirectionFamilySystem &sys, const EnergyProfile &e,
                                const TimeGrid &times, int level, int lambda, double eps,
                                double beta = 1.0 / 3.0, double holder_alpha = 0.05);

// Upper bound of sum_j sum_k sup gamma_k sup|phi| sup|b_k| over the admissible ball.
double coefficient_bound(const DirectionFamilySystem &sys);

struct EngineOptions
{
  bool carrier_mode = false;
  TwoScaleSampling sampling{};
  // Holder seminorms of the Reynolds parts (grid mode only).
  bool holder = false;
};

struct RhoSeries
{
  std::vector<double> rho;
  std::vector<double> drho;
  std::vector<double> energy;   // integral of |v|^2
  std::vector<double> denergy;  // its time derivative, 2 int v . d_t v
};

// rho = (e (1 - delta/2) - int |v|^2) / (d (2 pi)^d). PreconditionError when
// rho <= 0 at some frame.
RhoSeries compute_rho(const EulerReynoldsState &s, const EnergyProfile &e, double delta);

// R = rho Id - stress per frame. PreconditionError when |R / rho - Id| >= r0.
std::vector<CarrierField> compute_big_r(const EulerReynoldsState &s, const RhoSeries &rho,
                                        double r0, const TwoScaleSampling &sampling = {});

struct Perturbation
{
  CarrierField w_o, dtw_o, psi_o, w_c, dtw_c, w, dtw;
  double sup_a = 0.0;       // sup |a_k| over k and x
  double sup_ds_a = 0.0;    // sup |d_s a_k|
  double sup_dtau_a = 0.0;  // sup |d_tau a_k|
  double ball_distance = 0.0;
  int active_directions = 0;
};

// Perturbation at one frame. dtv is d_t v and dt_stress is d_t R at that frame.
Perturbation build_perturbation(const EulerReynoldsState &s, int frame, const CarrierField &dtv,
                                const CarrierField &dt_stress, const RhoSeries &rho,
                                const DirectionFamilySystem &sys, const VelocityPartition &part,
                                const IterationParams &params, const EngineOptions &opts);

// q = -(|w_o|^2/2 + nu psi_o^2/2) in 2D, -|w_o|^2/2 in 3D; returns p + q.
CarrierField update_pressure(const CarrierField &p, const CarrierField &w_o,
                             const CarrierField &psi_o, int nu);

struct ReynoldsUpdate
{
  CarrierField stress;  // R1
  CarrierField argument;
  double mean_argument = 0.0;
};
// R1 = div^-1(d_t v1 + div(v1 (x) v1) + grad p1) with d_t v from the equation.
ReynoldsUpdate update_reynolds(const CarrierField &v, const CarrierField &stress,
                               const Perturbation &pert, const CarrierField &q);

struct ReynoldsParts
{
  CarrierField transport, oscillation, error_I, error_II, error_III;
  CarrierField sum() const;
};
ReynoldsParts decompose_reynolds(const CarrierField &v, const CarrierField &stress,
                                 const Perturbation &pert, const CarrierField &q);

struct FrameDiagnostics
{
  double t = 0.0;
  bool interior = true;
  double e = 0.0;
  double rho = 0.0;
  double drho = 0.0;
  double ball_distance = 0.0;
  double energy_gap = 0.0;  // e - int |v1|^2
  double sup_R1 = 0.0;
  double sup_w = 0.0;
  double sup_w_o = 0.0;
  double sup_w_c = 0.0;
  double sup_psi = 0.0;     // sqrt(nu) sup |psi_o| in 2D
  double sup_q = 0.0;
  double h_minus1 = 0.0;
  double moment_increment_err = 0.0;  // |int v1 v1 - int v v - int w_o w_o|
  double moment_stress_err = 0.0;     // |int w_o w_o - int R|
  double moment_rho_err = 0.0;        // |int v1 v1 - int v v - ((2pi)^d rho Id - int stress)|
  double max_offdiag_moment = 0.0;    // largest off-diagonal entry of int v1 v1
  Eigen::MatrixXd moment;             // int v1 (x) v1
  double mean_argument = 0.0;
  double max_trace_R1 = 0.0;
  double div_check = 0.0;             // |div R1 - (F - mean F)|
  double divergence_w = 0.0;
  double mean_w = 0.0;
  double sum_of_parts = 0.0;          // |R1 - sum of parts|
  double part_sup[5] = {0, 0, 0, 0, 0};
  double part_holder[5] = {-1, -1, -1, -1, -1};
  double sup_a = 0.0, sup_ds_a = 0.0, sup_dtau_a = 0.0;
};

inline constexpr const char *kPartNames[5] = {"transport", "oscillation", "error_I", "error_II",
                                              "error_III"};

struct StepReport
{
  IterationParams params;
  bool carrier_mode = false;
  std::vector<FrameDiagnostics> frames;
  double sup_R_in = 0.0;

  // Pass flags over interior frames.
  bool energy_ok = false;    // 3/8 delta e <= gap <= 5/8 delta e
  bool stress_ok = false;    // sup |R1| <= eta delta / 2
  bool velocity_ok = false;  // sup |w| <= M sqrt(delta)
  bool pressure_ok = false;  // sup |q| <= M delta
  bool h_minus1_ok = false;  // |w|_{H^-1} <= eps'
  bool moments_ok = false;   // both second-moment checks <= eps'
  bool mean_gate_ok = false; // |mean F| <= mean_tol

  bool bounds_ok() const { return energy_ok && stress_ok && velocity_ok && pressure_ok; }
  bool all_ok() const { return bounds_ok() && h_minus1_ok && moments_ok && mean_gate_ok; }
  // Largest value of a diagnostic over interior frames.
  double max_interior(double FrameDiagnostics::*field) const;
  double max_interior_part(int part) const;
  nlohmann::json to_json() const;
};

struct StepResult
{
  EulerReynoldsState state;
  StepReport report;
};

// One iteration. PreconditionError (before any work) when the energy window or
// the stress bound of the incoming state fails on interior frames.
StepResult iteration_step(const EulerReynoldsState &s, const EnergyProfile &e,
                          const IterationParams &params, const DirectionFamilySystem &sys,
                          const EngineOptions &opts = {});

// Grid mode needs 4 lambda sqrt(nu) <= n.
int max_grid_lambda(const TorusGrid &grid, int nu);

struct AutoLambdaResult
{
  bool found = false;
  int lambda = 0;
  std::vector<int> tried;
  std::optional<StepResult> result;  // passing step, or the last one tried
  std::string failure;
};

// Doubles lambda from lambda_min until `accept(report)`; the ceiling is the grid
// limit in grid mode and lambda_max in carrier mode.
AutoLambdaResult auto_lambda(const EulerReynoldsState &s, const EnergyProfile &e,
                             const IterationParams &base, const DirectionFamilySystem &sys,
                             const std::function<bool(const StepReport &)> &accept,
                             int lambda_min = 1, int lambda_max = 0,
                             const EngineOptions &opts = {});

struct RunStepRecord
{
  int step = 0;  // level of the state produced
  int lambda = 0;
  int mu = 0;
  bool accepted = false;
  double gap_ratio_min = 0.0;  // (e - int |v|^2) / (2^-n e)
  double gap_ratio_max = 0.0;
  double sup_R = 0.0;
  double sup_R_bound = 0.0;    // eta 2^-n
  double increment = 0.0;      // sup |v_n - v_{n-1}|
  double increment_bound = 0.0;
  double h_minus1 = 0.0;       // cumulative sum of |v_n - v_{n-1}|_{H^-1}
  double h_minus1_bound = 0.0; // sum of eps'
  double anisotropy = 0.0;     // |int v (x) v - (e/d) Id| (operator norm, interior max)
  bool band_ok = false;
  bool stress_ok = false;
  bool increment_ok = false;
  std::optional<StepReport> report;
};

struct RunReport
{
  int dim = 2;
  double eta = 0.0;
  double M = 0.0;
  double eps = 0.0;
  std::vector<RunStepRecord> steps;
  bool completed = false;
  std::string failure;
  bool all_ok() const;
  nlohmann::json to_json() const;
};

struct RunOptions
{
  int n_steps = 1;
  double eps = 0.1;
  double beta = 1.0 / 3.0;
  double holder_alpha = 0.05;
  int lambda_min = 1;
  int lambda_max = 0;
  // Fixed lambda per step instead of the search, when nonempty.
  std::vector<int> lambdas;
  double mean_tol = 1e-8;
  EngineOptions engine{};
  // Called with every state produced, including the initial one.
  std::function<void(const EulerReynoldsState &)> on_state;
};

struct RunResult
{
  EulerReynoldsState final_state;
  RunReport report;
};

// Iterates from `start` (usually the zero state) for n_steps.
RunResult full_run(const EulerReynoldsState &start, const EnergyProfile &e,
                   const DirectionFamilySystem &sys, const RunOptions &opts);

// Persistence of grid states: state.json plus one .pfield per frame and field.
void save_state(const std::string &dir, const EulerReynoldsState &s);
EulerReynoldsState load_state(const std::string &dir);

// Euler flow v = U + W(x - U t), p = -(|W|^2/2 + nu Psi^2/2)(x - U t) in 2D and
// -|W|^2/2 in 3D, stress zero.
EulerReynoldsState translated_stationary_state(const CoefficientSet &c, int lambda,
                                               const std::array<double, 3> &U,
                                               const TorusGrid &grid, const TimeGrid &times);

struct NullStepReport
{
  std::vector<double> energy;
  double max_energy_drift = 0.0;  // relative to the first frame
  double max_residual = 0.0;      // Euler residual, finite-difference d_t v
  double max_R1 = 0.0;            // sup |div^-1(residual)|
  double tolerance = 0.0;
  bool ok = false;
  nlohmann::json to_json() const;
};

// Step with w = 0 on a state with zero stress: measures conservation of
// int |v|^2 and the Euler residual across the time samples.
NullStepReport null_step(const EulerReynoldsState &s, double tolerance = 1e-6);

}  // namespace eulerci

#endif
