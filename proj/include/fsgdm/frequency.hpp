#pragma once

// Frequency-domain view of one quasi-stationary momentum stage. With
// constant coefficients the recursion m_t = u m_{t-1} + v g_t has transfer
// function
//
//   H(w) = v / (1 - u e^{-jw}),   w in [0, pi]
//
// |H(w)| = |v| / sqrt(1 - 2u cos w + u^2) and
// arg H(w) = arg(v) - atan(u sin w / (1 - u cos w)).
//
// The denominators are evaluated in cancellation-free form,
//   1 - 2u cos w + u^2 = (1 - u)^2 + 4u sin^2(w/2)   (u >= 0)
//                      = (1 + u)^2 - 4u cos^2(w/2)   (u <  0)
// so both terms are non-negative and the result stays accurate as |u| -> 1.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsgdm/schedule.hpp"

namespace fsgdm {

class FrequencyGrid {
 public:
  static constexpr std::size_t kDefaultPoints = 512;

  // `count` points evenly spaced on [0, pi], both ends included.
  static FrequencyGrid uniform(std::size_t count = kDefaultPoints);

  // Throws std::invalid_argument unless strictly increasing within [0, pi].
  explicit FrequencyGrid(std::vector<double> omegas);

  std::span<const double> omegas() const { return omegas_; }
  std::size_t size() const { return omegas_.size(); }
  double operator[](std::size_t i) const { return omegas_[i]; }

  // sin^2(w/2) and cos^2(w/2) per point.
  std::span<const double> half_sin_sq() const { return half_sin_sq_; }
  std::span<const double> half_cos_sq() const { return half_cos_sq_; }

 private:
  std::vector<double> omegas_;
  std::vector<double> half_sin_sq_;
  std::vector<double> half_cos_sq_;
};

std::complex<double> transfer_at(double u, double v, double omega);

double magnitude(double u, double v, double omega);

// Wrapped to (-pi, pi]. Throws std::invalid_argument for v == 0.
double phase(double u, double v, double omega);

// Grid evaluation through the dispatched kernels; bitwise equal to magnitude().
void magnitude_response(double u, double v, const FrequencyGrid& grid, std::span<double> out);

double wrap_phase(double radians);

enum class PassBand { kLowPass, kHighPass, kAllPass };
enum class Regime { kOrthodox, kUnorthodox };

std::string_view to_string(PassBand band);
std::string_view to_string(Regime regime);

struct FilterClass {
  PassBand pass_band;
  Regime regime;
  double peak_gain;  // max |H| over [0, pi]
};

// Orthodox iff the peak gain is at most 1 + 1e-12. The peak sits at w = 0 for
// u >= 0 and at w = pi for u < 0, since |H| is monotone in w.
FilterClass classify(double u, double v);

struct StageResponse {
  std::int64_t stage = 1;
  double u = 0.0;  // effective, signed coefficient
  double v = 1.0;
  std::vector<double> magnitude;
  std::vector<double> phase;
};

StageResponse stage_response(const CoefficientSchedule& schedule, std::int64_t k,
                             const FrequencyGrid& grid);

std::vector<StageResponse> dynamic_response(const CoefficientSchedule& schedule,
                                            const FrequencyGrid& grid,
                                            std::span<const std::int64_t> stages);

// Header: stage,k,u,v,omega,magnitude,phase. `stage` is the 1-based position
// in the requested list; `k` is the stage index.
void write_response_csv(std::ostream& out, std::span<const StageResponse> responses,
                        const FrequencyGrid& grid);

struct SinusoidFit {
  double amplitude = 0.0;
  double phase = 0.0;  // y ~ amplitude * sin(w t + phase)
};

// Least squares on {sin(w t), cos(w t)} for samples y[i] taken at
// t = first_t + i.
SinusoidFit fit_sinusoid(std::span<const double> y, double omega, std::int64_t first_t);

struct EmpiricalResponse {
  double amp_ratio = 0.0;
  double phase_shift = 0.0;
};

// Drives m_t = u m_{t-1} + v sin(w t) for t = 1..steps from m_0 = 0 and fits
// the output over t > burn_in. Requires at least four periods after burn-in.
EmpiricalResponse empirical_response(double u, double v, double omega, std::int64_t steps,
                                     std::int64_t burn_in);

struct StageInvarianceReport {
  bool pass = true;
  double max_cross_run_error = 0.0;
  double max_closed_form_error = 0.0;
  // Set on failure: the run and one-based stage where lists first disagree.
  std::optional<std::size_t> first_mismatch_run;
  std::optional<std::int64_t> first_mismatch_stage;
  std::string message;
};

// Builds the FSGDM schedule for each plan and checks that the stage lists
// agree across plans and match (k - 1) / (k - 1 + cN) within 1e-15. Every
// plan must have total_steps divisible by num_stages.
StageInvarianceReport check_stage_invariance(double c, std::span<const StagePlan> plans);

bool fsgdm_stages_invariant(double c, std::int64_t num_stages, std::span<const std::int64_t> sigmas);

struct OracleAgreement {
  double max_magnitude_error = 0.0;
  double max_phase_error = 0.0;
  std::size_t evaluations = 0;
};

// Compares the closed forms against modulus and argument of transfer_at.
OracleAgreement closed_form_agreement(std::span<const double> us, std::span<const double> vs,
                                      const FrequencyGrid& grid);

}  // namespace fsgdm
