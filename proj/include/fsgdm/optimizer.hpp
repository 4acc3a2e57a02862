#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fsgdm/config.hpp"
#include "fsgdm/schedule.hpp"

namespace fsgdm {

enum class Variant { kFsgdm, kStandardSgdm, kEmaSgdm, kGeneralized };
enum class LrSchedule { kConstant, kCosine };

std::string_view to_string(Variant variant);
std::string_view to_string(LrSchedule schedule);
Variant parse_variant(std::string_view text);
LrSchedule parse_lr_schedule(std::string_view text);

struct OptimizerConfig {
  Variant variant = Variant::kFsgdm;
  double c = 0.033;  // fsgdm scaling factor, mu = c * total_steps
  double u = 0.9;    // standard_sgdm and ema_sgdm
  double v = 1.0;    // fsgdm and standard_sgdm
  double base_lr = 0.1;
  LrSchedule lr_schedule = LrSchedule::kConstant;
  double weight_decay = 0.0;
  std::int64_t total_steps = 3000;
  std::int64_t num_stages = 300;
  // Required for the generalized variant; its plan must match
  // (total_steps, num_stages).
  std::optional<CoefficientSchedule> schedule;
};

// The coefficient schedule a config implies.
//   fsgdm:         increasing, mu = c * total_steps, constant v
//   standard_sgdm: fixed u, constant v
//   ema_sgdm:      fixed u, v = 1 - u
CoefficientSchedule resolve_schedule(const OptimizerConfig& config);

// Step-indexed cosine annealing from base_lr at t = 1 down to 0 at
// t = total_steps.
double lr_at(const OptimizerConfig& config, std::int64_t t);

// u_t of FSGDM at step t, evaluated in closed form.
double fsgdm_coefficient(double c, std::int64_t num_stages, std::int64_t total_steps,
                         std::int64_t t);

struct ParameterGroup {
  ParameterGroup() = default;
  explicit ParameterGroup(std::vector<double> x)
      : params(std::move(x)), momentum(params.size()) {}

  std::vector<double> params;
  MomentumState momentum;
  std::int64_t step = 0;
};

struct StepInfo {
  std::int64_t step = 0;
  double lr = 0.0;
  StageCoefficients coefficients;
};

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  const OptimizerConfig& config() const { return config_; }
  const CoefficientSchedule& schedule() const { return schedule_; }

  // ghat = g + weight_decay * x; m = (s u) m + v ghat; x -= lr * m, with
  // coefficients and learning rate read at step group.step + 1.
  StepInfo step(ParameterGroup& group, std::span<const double> g) const;

 private:
  OptimizerConfig config_;
  CoefficientSchedule schedule_;
};

ParameterGroup optimizer_step(ParameterGroup group, std::span<const double> g,
                              const OptimizerConfig& config);

const std::set<std::string>& optimizer_keys();

// Reads [optimizer]; the generalized variant also reads `schedule_section`.
OptimizerConfig optimizer_config_from(const ConfigDocument& doc,
                                      const std::string& section = "optimizer",
                                      const std::string& schedule_section = "schedule");

void optimizer_config_to(const OptimizerConfig& config, ConfigDocument& doc,
                         const std::string& section = "optimizer",
                         const std::string& schedule_section = "schedule");

}  // namespace fsgdm
