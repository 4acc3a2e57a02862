#include "fsgdm/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fsgdm/config.hpp"
#include "fsgdm/kernels.hpp"

namespace fsgdm {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOrthodoxTolerance = 1e-12;
constexpr double kInvarianceTolerance = 1e-15;

double half_sin_sq(double omega) {
  const double s = std::sin(0.5 * omega);
  return s * s;
}

double half_cos_sq(double omega) {
  const double c = std::cos(0.5 * omega);
  return c * c;
}

// Real part of 1 - u e^{-jw}, i.e. 1 - u cos w.
double denominator_real(double u, double omega) {
  return u >= 0.0 ? (1.0 - u) + 2.0 * u * half_sin_sq(omega)
                  : (1.0 + u) - 2.0 * u * half_cos_sq(omega);
}

struct AffineForm {
  double offset;
  double slope;
  bool uses_sin;
};

// 1 - 2u cos w + u^2 = offset + slope * w_half
AffineForm magnitude_form(double u) {
  if (u >= 0.0) return {(1.0 - u) * (1.0 - u), 4.0 * u, true};
  return {(1.0 + u) * (1.0 + u), -4.0 * u, false};
}

void require_stable(double u) {
  if (!(std::abs(u) < 1.0)) throw std::invalid_argument("transfer function needs |u| < 1");
}

}  // namespace

FrequencyGrid FrequencyGrid::uniform(std::size_t count) {
  if (count < 2) throw std::invalid_argument("a uniform grid needs at least two points");
  std::vector<double> omegas(count);
  for (std::size_t i = 0; i < count; ++i) {
    omegas[i] = kPi * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  omegas.back() = kPi;
  return FrequencyGrid(std::move(omegas));
}

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) throw std::invalid_argument("frequency grid is empty");
  if (omegas_.front() < 0.0 || omegas_.back() > kPi) {
    throw std::invalid_argument("frequency grid must lie within [0, pi]");
  }
  for (std::size_t i = 1; i < omegas_.size(); ++i) {
    if (!(omegas_[i] > omegas_[i - 1])) {
      throw std::invalid_argument("frequency grid must be strictly increasing");
    }
  }
  half_sin_sq_.reserve(omegas_.size());
  half_cos_sq_.reserve(omegas_.size());
  for (double w : omegas_) {
    half_sin_sq_.push_back(fsgdm::half_sin_sq(w));
    half_cos_sq_.push_back(fsgdm::half_cos_sq(w));
  }
}

std::complex<double> transfer_at(double u, double v, double omega) {
  require_stable(u);
  const std::complex<double> denom(denominator_real(u, omega), u * std::sin(omega));
  return v / denom;
}

double magnitude(double u, double v, double omega) {
  require_stable(u);
  const AffineForm form = magnitude_form(u);
  const double w = form.uses_sin ? half_sin_sq(omega) : half_cos_sq(omega);
  return std::abs(v) / std::sqrt(form.offset + form.slope * w);
}

double wrap_phase(double radians) {
  double r = std::remainder(radians, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double phase(double u, double v, double omega) {
  require_stable(u);
  if (v == 0.0) throw std::invalid_argument("phase is undefined for v = 0");
  const double arg_v = v > 0.0 ? 0.0 : kPi;
  return wrap_phase(arg_v - std::atan(u * std::sin(omega) / denominator_real(u, omega)));
}

void magnitude_response(double u, double v, const FrequencyGrid& grid, std::span<double> out) {
  require_stable(u);
  if (out.size() != grid.size()) throw std::invalid_argument("output size differs from grid");
  const AffineForm form = magnitude_form(u);
  const auto w = form.uses_sin ? grid.half_sin_sq() : grid.half_cos_sq();
  kernels::active().scaled_inverse_sqrt(w.data(), out.data(), out.size(), form.offset, form.slope,
                                        std::abs(v));
}

std::string_view to_string(PassBand band) {
  switch (band) {
    case PassBand::kLowPass: return "low-pass";
    case PassBand::kHighPass: return "high-pass";
    case PassBand::kAllPass: return "all-pass";
  }
  return "unknown";
}

std::string_view to_string(Regime regime) {
  return regime == Regime::kOrthodox ? "orthodox" : "unorthodox";
}

FilterClass classify(double u, double v) {
  require_stable(u);
  if (!(v > 0.0)) throw std::invalid_argument("classify needs v > 0");
  FilterClass result{};
  result.pass_band = u > 0.0 ? PassBand::kLowPass : (u < 0.0 ? PassBand::kHighPass : PassBand::kAllPass);
  result.peak_gain = magnitude(u, v, u >= 0.0 ? 0.0 : kPi);
  result.regime = result.peak_gain <= 1.0 + kOrthodoxTolerance ? Regime::kOrthodox : Regime::kUnorthodox;
  return result;
}

StageResponse stage_response(const CoefficientSchedule& schedule, std::int64_t k,
                             const FrequencyGrid& grid) {
  const StageCoefficients& coeffs = schedule.stage(k);
  StageResponse response;
  response.stage = k;
  response.u = coeffs.effective_u();
  response.v = coeffs.v;
  response.magnitude.resize(grid.size());
  magnitude_response(response.u, response.v, grid, response.magnitude);
  response.phase.reserve(grid.size());
  for (double w : grid.omegas()) response.phase.push_back(phase(response.u, response.v, w));
  return response;
}

std::vector<StageResponse> dynamic_response(const CoefficientSchedule& schedule,
                                            const FrequencyGrid& grid,
                                            std::span<const std::int64_t> stages) {
  std::vector<StageResponse> out;
  out.reserve(stages.size());
  for (auto k : stages) out.push_back(stage_response(schedule, k, grid));
  return out;
}

void write_response_csv(std::ostream& out, std::span<const StageResponse> responses,
                        const FrequencyGrid& grid) {
  out << "stage,k,u,v,omega,magnitude,phase\n";
  for (std::size_t s = 0; s < responses.size(); ++s) {
    const auto& r = responses[s];
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out << (s + 1) << ',' << r.stage << ',' << format_double(r.u) << ',' << format_double(r.v)
          << ',' << format_double(grid[i]) << ',' << format_double(r.magnitude[i]) << ','
          << format_double(r.phase[i]) << '\n';
    }
  }
}

SinusoidFit fit_sinusoid(std::span<const double> y, double omega, std::int64_t first_t) {
  double sss = 0.0, ssc = 0.0, scc = 0.0, sys = 0.0, syc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = static_cast<double>(first_t + static_cast<std::int64_t>(i));
    const double s = std::sin(omega * t);
    const double c = std::cos(omega * t);
    sss += s * s;
    ssc += s * c;
    scc += c * c;
    sys += y[i] * s;
    syc += y[i] * c;
  }
  const double det = sss * scc - ssc * ssc;
  if (!(det > 0.0)) throw std::invalid_argument("sinusoid fit is singular; too few samples");
  const double a = (sys * scc - syc * ssc) / det;
  const double b = (syc * sss - sys * ssc) / det;
  return {std::hypot(a, b), std::atan2(b, a)};
}

EmpiricalResponse empirical_response(double u, double v, double omega, std::int64_t steps,
                                     std::int64_t burn_in) {
  require_stable(u);
  if (!(omega > 0.0 && omega < kPi)) throw std::invalid_argument("omega must lie in (0, pi)");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be non-negative");
  const double period = 2.0 * kPi / omega;
  if (static_cast<double>(steps - burn_in) < 4.0 * period) {
    throw std::invalid_argument("need at least four periods after burn-in");
  }
  std::vector<double> tail;
  tail.reserve(static_cast<std::size_t>(steps - burn_in));
  double m = 0.0;
  for (std::int64_t t = 1; t <= steps; ++t) {
    m = u * m + v * std::sin(omega * static_cast<double>(t));
    if (t > burn_in) tail.push_back(m);
  }
  const SinusoidFit fit = fit_sinusoid(tail, omega, burn_in + 1);
  return {fit.amplitude, wrap_phase(fit.phase)};
}

StageInvarianceReport check_stage_invariance(double c, std::span<const StagePlan> plans) {
  if (plans.empty()) throw std::invalid_argument("need at least one plan");
  for (const auto& plan : plans) {
    if (plan.total_steps() % plan.num_stages() != 0) {
      throw std::invalid_argument("total_steps " + std::to_string(plan.total_steps()) +
                                  " is not divisible by num_stages " +
                                  std::to_string(plan.num_stages()));
    }
  }
  StageInvarianceReport report;
  std::vector<std::vector<double>> lists;
  for (const auto& plan : plans) {
    const auto schedule = make_fsgdm_schedule(c, 1.0, plan);
    std::vector<double> us;
    const double cn = c * static_cast<double>(plan.num_stages());
    for (std::int64_t k = 1; k <= plan.num_stages(); ++k) {
      const double u = schedule.stage(k).u;
      const double km1 = static_cast<double>(k - 1);
      report.max_closed_form_error =
          std::max(report.max_closed_form_error, std::abs(u - km1 / (km1 + cn)));
      us.push_back(u);
    }
    lists.push_back(std::move(us));
  }
  const auto& reference = lists.front();
  for (std::size_t r = 1; r < lists.size() && !report.first_mismatch_stage; ++r) {
    const auto& us = lists[r];
    const std::size_t common = std::min(us.size(), reference.size());
    for (std::size_t i = 0; i < common; ++i) {
      const double err = std::abs(us[i] - reference[i]);
      report.max_cross_run_error = std::max(report.max_cross_run_error, err);
      if (err > kInvarianceTolerance && !report.first_mismatch_stage) {
        report.first_mismatch_run = r;
        report.first_mismatch_stage = static_cast<std::int64_t>(i + 1);
      }
    }
    if (!report.first_mismatch_stage && us.size() != reference.size()) {
      report.first_mismatch_run = r;
      report.first_mismatch_stage = static_cast<std::int64_t>(common + 1);
    }
  }
  if (report.first_mismatch_stage) {
    report.pass = false;
    report.message = "run " + std::to_string(*report.first_mismatch_run) +
                     " differs from run 0 first at stage " +
                     std::to_string(*report.first_mismatch_stage);
  } else if (report.max_closed_form_error > kInvarianceTolerance) {
    report.pass = false;
    report.message = "stage coefficients deviate from (k-1)/(k-1+cN)";
  } else {
    report.message = "stage coefficients are invariant across total step counts";
  }
  return report;
}

bool fsgdm_stages_invariant(double c, std::int64_t num_stages, std::span<const std::int64_t> sigmas) {
  std::vector<StagePlan> plans;
  for (auto sigma : sigmas) plans.emplace_back(sigma, num_stages);
  return check_stage_invariance(c, plans).pass;
}

OracleAgreement closed_form_agreement(std::span<const double> us, std::span<const double> vs,
                                      const FrequencyGrid& grid) {
  OracleAgreement result;
  std::vector<double> mags(grid.size());
  for (double u : us) {
    for (double v : vs) {
      magnitude_response(u, v, grid, mags);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto h = transfer_at(u, v, grid[i]);
        result.max_magnitude_error = std::max(result.max_magnitude_error, std::abs(mags[i] - std::abs(h)));
        const double dphi = wrap_phase(phase(u, v, grid[i]) - std::arg(h));
        result.max_phase_error = std::max(result.max_phase_error, std::abs(dphi));
        ++result.evaluations;
      }
    }
  }
  return result;
}

}  // namespace fsgdm
