#include "fsgdm/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fsgdm/kernels.hpp"

namespace fsgdm {
namespace {

constexpr double kUpperClamp = 1.0 - 1e-12;
constexpr double kGrossMisconfiguration = 1.5;

std::invalid_argument bad(const std::string& what) { return std::invalid_argument(what); }

}  // namespace

StagePlan::StagePlan(std::int64_t total_steps, std::int64_t num_stages)
    : total_steps_(total_steps), num_stages_(num_stages) {
  if (num_stages < 1) throw bad("num_stages must be at least 1");
  if (total_steps < num_stages) {
    throw bad("total_steps (" + std::to_string(total_steps) + ") must be >= num_stages (" +
              std::to_string(num_stages) + ")");
  }
  stage_length_ = static_cast<double>(total_steps) / static_cast<double>(num_stages);
}

std::int64_t StagePlan::stage_offset(std::int64_t t) const {
  if (t <= 0) return 0;
  // floor(t / (S / N)) == floor(t * N / S) for positive integers.
  const auto scaled = static_cast<__int128>(t) * num_stages_;
  const auto offset = static_cast<std::int64_t>(scaled / total_steps_);
  return offset >= num_stages_ ? num_stages_ - 1 : offset;
}

double StagePlan::stage_start(std::int64_t k) const {
  return static_cast<double>(k - 1) * stage_length_;
}

std::string_view to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::kIncreasing: return "increasing";
    case SequenceKind::kDecreasing: return "decreasing";
    case SequenceKind::kFixed: return "fixed";
    case SequenceKind::kLinear: return "linear";
    case SequenceKind::kExponential: return "exponential";
    case SequenceKind::kSine: return "sine";
    case SequenceKind::kLogarithmic: return "logarithmic";
    case SequenceKind::kTransition: return "transition";
  }
  return "unknown";
}

std::string_view to_string(VRule rule) {
  return rule == VRule::kCoupled ? "coupled" : "constant";
}

SequenceKind parse_sequence_kind(std::string_view text) {
  for (auto kind : {SequenceKind::kIncreasing, SequenceKind::kDecreasing, SequenceKind::kFixed,
                    SequenceKind::kLinear, SequenceKind::kExponential, SequenceKind::kSine,
                    SequenceKind::kLogarithmic, SequenceKind::kTransition}) {
    if (text == to_string(kind)) return kind;
  }
  if (text == "piecewise-transition") return SequenceKind::kTransition;
  throw bad("unknown schedule kind '" + std::string(text) + "'");
}

VRule parse_v_rule(std::string_view text) {
  if (text == "coupled") return VRule::kCoupled;
  if (text == "constant") return VRule::kConstant;
  throw bad("unknown v_rule '" + std::string(text) + "' (expected constant or coupled)");
}

std::string_view to_string(TransitionPreset preset) {
  switch (preset) {
    case TransitionPreset::kLp2hp: return "lp2hp";
    case TransitionPreset::kHp2lp: return "hp2lp";
    case TransitionPreset::kLpg2hpg: return "lpg2hpg";
    case TransitionPreset::kHpg2lpg: return "hpg2lpg";
  }
  return "unknown";
}

TransitionPreset parse_transition_preset(std::string_view text) {
  for (auto preset : {TransitionPreset::kLp2hp, TransitionPreset::kHp2lp,
                      TransitionPreset::kLpg2hpg, TransitionPreset::kHpg2lpg}) {
    if (text == to_string(preset)) return preset;
  }
  throw bad("unknown transition preset '" + std::string(text) + "'");
}

void validate(const SequenceParams& p) {
  if (p.sign != 1 && p.sign != -1) throw bad("sign must be +1 or -1");
  if (p.v_rule == VRule::kConstant && !(p.v_value > 0.0)) {
    // A negative gain adds pi to the phase everywhere and reverses updates.
    throw bad("v must be positive");
  }
  switch (p.kind) {
    case SequenceKind::kIncreasing:
      if (!(p.mu > 0.0)) throw bad("mu must be positive");
      break;
    case SequenceKind::kDecreasing:
      if (!(p.nu > 1.0)) throw bad("nu must be greater than 1");
      break;
    case SequenceKind::kFixed:
      if (!(p.fixed_value >= 0.0 && p.fixed_value < 1.0)) {
        throw bad("fixed must lie in [0, 1); use sign = -1 for the high-pass family");
      }
      break;
    case SequenceKind::kLinear:
    case SequenceKind::kExponential:
    case SequenceKind::kSine:
    case SequenceKind::kLogarithmic:
      if (!(p.a_coeff > 0.0)) throw bad("a must be positive");
      break;
    case SequenceKind::kTransition:
      throw bad("a transition is built from two non-transition sequences");
  }
}

double evaluate_sequence(const SequenceParams& p, double t) {
  if (!(t >= 0.0)) throw std::domain_error("sequence argument must be non-negative");
  double raw = 0.0;
  switch (p.kind) {
    case SequenceKind::kIncreasing:
      return t / (t + p.mu);
    case SequenceKind::kDecreasing:
      return 1.0 - (t + 1.0) / (t + p.nu);
    case SequenceKind::kFixed:
      return p.fixed_value;
    case SequenceKind::kLinear:
      raw = p.a_coeff * t;
      break;
    case SequenceKind::kExponential:
      return -std::expm1(-p.a_coeff * t);
    case SequenceKind::kSine:
      if (p.a_coeff * t > std::numbers::pi) {
        throw std::domain_error("sine sequence evaluated past pi; a is too large for the plan");
      }
      raw = std::sin(p.a_coeff * t);
      break;
    case SequenceKind::kLogarithmic:
      raw = t > 0.0 ? std::log(p.a_coeff * t) : 0.0;
      break;
    case SequenceKind::kTransition:
      throw std::domain_error("evaluate_sequence needs a non-transition sequence");
  }
  if (raw > kGrossMisconfiguration) {
    throw std::domain_error(std::string(to_string(p.kind)) + " sequence reaches " +
                            std::to_string(raw) + "; coefficient a is misconfigured");
  }
  if (raw < 0.0) return 0.0;
  if (raw > kUpperClamp) return kUpperClamp;
  return raw;
}

CoefficientSchedule::CoefficientSchedule(SequenceParams params, StagePlan plan)
    : CoefficientSchedule(params.kind, params, std::nullopt, plan) {}

CoefficientSchedule::CoefficientSchedule(SequenceKind kind, SequenceParams params,
                                         std::optional<Transition> transition, StagePlan plan)
    : kind_(kind), params_(params), transition_(std::move(transition)), plan_(plan) {
  if (transition_) {
    validate(transition_->first);
    validate(transition_->second);
    const auto s = transition_->switch_stage;
    if (s < 2 || s > plan_.num_stages()) {
      throw bad("transition_stage must lie in [2, num_stages]");
    }
  } else {
    validate(params_);
  }
  build_stage_table();
}

CoefficientSchedule CoefficientSchedule::piecewise(SequenceParams first, SequenceParams second,
                                                   std::int64_t switch_stage, StagePlan plan) {
  Transition transition{first, second, switch_stage};
  return CoefficientSchedule(SequenceKind::kTransition, first, transition, plan);
}

CoefficientSchedule CoefficientSchedule::preset(TransitionPreset preset, StagePlan plan, double c,
                                                std::optional<std::int64_t> switch_stage) {
  if (!(c > 0.0)) throw bad("c must be positive");
  const auto n = plan.num_stages();
  const double cn = c * static_cast<double>(n);
  // Final FSGDM stage coefficient; both segments peak near it.
  const double u_peak = static_cast<double>(n - 1) / (static_cast<double>(n - 1) + cn);

  SequenceParams decreasing;
  decreasing.kind = SequenceKind::kDecreasing;
  decreasing.nu = 1.0 / (1.0 - u_peak);
  SequenceParams increasing;
  increasing.kind = SequenceKind::kIncreasing;
  increasing.mu = 0.5 * c * static_cast<double>(plan.total_steps());

  const bool gain = preset == TransitionPreset::kLpg2hpg || preset == TransitionPreset::kHpg2lpg;
  for (auto* p : {&decreasing, &increasing}) {
    p->v_rule = gain ? VRule::kConstant : VRule::kCoupled;
    p->v_value = 1.0;
  }
  const bool low_first = preset == TransitionPreset::kLp2hp || preset == TransitionPreset::kLpg2hpg;
  decreasing.sign = low_first ? 1 : -1;
  increasing.sign = low_first ? -1 : 1;
  return piecewise(decreasing, increasing, switch_stage.value_or(n / 2 + 1), plan);
}

double CoefficientSchedule::switch_time() const {
  return plan_.stage_start(transition_->switch_stage);
}

const SequenceParams& CoefficientSchedule::active_params(double t) const {
  if (!transition_) return params_;
  return t >= switch_time() ? transition_->second : transition_->first;
}

double CoefficientSchedule::sequence_value(double t) const {
  if (transition_ && t >= switch_time()) {
    return evaluate_sequence(transition_->second, t - switch_time());
  }
  return evaluate_sequence(active_params(t), t);
}

const StageCoefficients& CoefficientSchedule::stage(std::int64_t k) const {
  if (k < 1 || k > plan_.num_stages()) {
    throw std::out_of_range("stage index " + std::to_string(k) + " outside [1, " +
                            std::to_string(plan_.num_stages()) + "]");
  }
  return stages_[static_cast<std::size_t>(k - 1)];
}

void CoefficientSchedule::build_stage_table() {
  stages_.clear();
  stages_.reserve(static_cast<std::size_t>(plan_.num_stages()));
  for (std::int64_t k = 1; k <= plan_.num_stages(); ++k) {
    const double start = plan_.stage_start(k);
    const SequenceParams& p = active_params(start);
    StageCoefficients coeffs;
    coeffs.u = sequence_value(start);
    coeffs.v = p.v_rule == VRule::kCoupled ? 1.0 - coeffs.u : p.v_value;
    coeffs.sign = p.sign;
    stages_.push_back(coeffs);
  }
}

CoefficientSchedule make_fsgdm_schedule(double c, double v, StagePlan plan) {
  if (!(c > 0.0)) throw bad("c must be positive");
  SequenceParams p;
  p.kind = SequenceKind::kIncreasing;
  p.mu = c * static_cast<double>(plan.total_steps());
  p.v_rule = VRule::kConstant;
  p.v_value = v;
  return CoefficientSchedule(p, plan);
}

void advance(MomentumState& state, std::span<const double> g, double u, double v, int sign) {
  if (g.size() != state.buffer.size()) {
    throw std::invalid_argument("gradient has " + std::to_string(g.size()) +
                                " entries but the momentum buffer has " +
                                std::to_string(state.buffer.size()));
  }
  if (!(std::abs(u) < 1.0)) throw std::invalid_argument("momentum coefficient must satisfy |u| < 1");
  kernels::momentum_update(state.buffer, g, sign * u, v);
  ++state.step;
}

MomentumState momentum_step(MomentumState state, std::span<const double> g, double u, double v,
                            int sign) {
  advance(state, g, u, v, sign);
  return state;
}

}  // namespace fsgdm
