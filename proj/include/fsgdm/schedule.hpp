#pragma once

// Time-variant momentum coefficients and the first-order momentum recursion
//
//   m_t = (s * u_t) * m_{t-1} + v_t * g_t
//
// Coefficients are held constant over quasi-stationary stages of length
// delta = total_steps / num_stages. A step t belongs to the stage with
// zero-based offset floor(t / delta), clamped to num_stages - 1, and the
// stage coefficient is the continuous sequence evaluated at offset * delta.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsgdm {

class StagePlan {
 public:
  StagePlan(std::int64_t total_steps, std::int64_t num_stages);

  std::int64_t total_steps() const { return total_steps_; }
  std::int64_t num_stages() const { return num_stages_; }
  double stage_length() const { return stage_length_; }

  // floor(t / delta) computed exactly, clamped to [0, num_stages - 1]. Steps
  // past total_steps stay in the last stage.
  std::int64_t stage_offset(std::int64_t t) const;

  // One-based stage index of step t.
  std::int64_t stage_of(std::int64_t t) const { return stage_offset(t) + 1; }

  // Real sequence argument (k - 1) * delta for one-based stage k.
  double stage_start(std::int64_t k) const;

  friend bool operator==(const StagePlan&, const StagePlan&) = default;

 private:
  std::int64_t total_steps_;
  std::int64_t num_stages_;
  double stage_length_;
};

enum class SequenceKind {
  kIncreasing,
  kDecreasing,
  kFixed,
  kLinear,
  kExponential,
  kSine,
  kLogarithmic,
  kTransition,
};

enum class VRule { kConstant, kCoupled };

std::string_view to_string(SequenceKind kind);
std::string_view to_string(VRule rule);
SequenceKind parse_sequence_kind(std::string_view text);
VRule parse_v_rule(std::string_view text);

// Parameters of one continuous sequence u(t). Fields irrelevant to the kind
// are ignored.
struct SequenceParams {
  SequenceKind kind = SequenceKind::kFixed;
  double mu = 1.0e4;         // increasing: t / (t + mu)
  double nu = 1.0e4;         // decreasing: 1 - (t + 1) / (t + nu)
  double fixed_value = 0.0;  // fixed
  double a_coeff = 1.0e-5;   // linear, exponential, sine, logarithmic
  int sign = 1;              // +1 low-pass family, -1 high-pass family
  VRule v_rule = VRule::kConstant;
  double v_value = 1.0;
};

// Throws std::invalid_argument when a parameter is out of its domain.
void validate(const SequenceParams& params);

// Continuous, un-quantized u(t) for t >= 0. Values slightly outside [0, 1)
// are clamped into [0, 1 - 1e-12]; a raw value above 1.5, or a sine argument
// past pi, throws std::domain_error.
double evaluate_sequence(const SequenceParams& params, double t);

struct StageCoefficients {
  double u = 0.0;  // in [0, 1)
  double v = 1.0;
  int sign = 1;

  double effective_u() const { return sign * u; }
  friend bool operator==(const StageCoefficients&, const StageCoefficients&) = default;
};

enum class TransitionPreset { kLp2hp, kHp2lp, kLpg2hpg, kHpg2lpg };

std::string_view to_string(TransitionPreset preset);
TransitionPreset parse_transition_preset(std::string_view text);

struct Transition {
  SequenceParams first;
  SequenceParams second;
  std::int64_t switch_stage;  // first stage governed by `second`
};

class CoefficientSchedule {
 public:
  CoefficientSchedule(SequenceParams params, StagePlan plan);

  // Stages [1, switch_stage) follow `first`; the rest follow `second`, whose
  // clock restarts at the switch.
  static CoefficientSchedule piecewise(SequenceParams first, SequenceParams second,
                                       std::int64_t switch_stage, StagePlan plan);

  // Transition between filter families whose peak gain tracks the FSGDM
  // schedule with scaling factor c on the same plan. switch_stage defaults
  // to num_stages / 2 + 1.
  static CoefficientSchedule preset(TransitionPreset preset, StagePlan plan, double c = 0.033,
                                    std::optional<std::int64_t> switch_stage = std::nullopt);

  SequenceKind kind() const { return kind_; }
  const StagePlan& plan() const { return plan_; }
  // For transitions these are the parameters of the first segment.
  const SequenceParams& params() const { return params_; }
  const std::optional<Transition>& transition() const { return transition_; }

  double sequence_value(double t) const;

  // One-based stage index in [1, num_stages].
  const StageCoefficients& stage(std::int64_t k) const;

  const StageCoefficients& at_step(std::int64_t t) const {
    return stages_[static_cast<std::size_t>(plan_.stage_offset(t))];
  }

  std::span<const StageCoefficients> stages() const { return stages_; }

 private:
  CoefficientSchedule(SequenceKind kind, SequenceParams params, std::optional<Transition> transition,
                      StagePlan plan);

  const SequenceParams& active_params(double t) const;
  double switch_time() const;
  void build_stage_table();

  SequenceKind kind_;
  SequenceParams params_;
  std::optional<Transition> transition_;
  StagePlan plan_;
  std::vector<StageCoefficients> stages_;
};

// FSGDM coefficients: increasing u(t) = t / (t + c * total_steps), constant v.
CoefficientSchedule make_fsgdm_schedule(double c, double v, StagePlan plan);

inline double sequence_value(const CoefficientSchedule& schedule, double t) {
  return schedule.sequence_value(t);
}

inline StageCoefficients stage_coefficient(const CoefficientSchedule& schedule, std::int64_t t) {
  return schedule.at_step(t);
}

struct MomentumState {
  MomentumState() = default;
  explicit MomentumState(std::size_t size) : buffer(size, 0.0) {}

  std::vector<double> buffer;
  std::int64_t step = 0;
};

// In-place recursion: buffer = (sign * u) * buffer + v * g, step += 1.
void advance(MomentumState& state, std::span<const double> g, double u, double v, int sign);

inline void advance(MomentumState& state, std::span<const double> g,
                    const StageCoefficients& coeffs) {
  advance(state, g, coeffs.u, coeffs.v, coeffs.sign);
}

MomentumState momentum_step(MomentumState state, std::span<const double> g, double u, double v,
                            int sign);

}  // namespace fsgdm
