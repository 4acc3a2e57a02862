#include "fsgdm/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fsgdm/kernels.hpp"

namespace fsgdm {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kFsgdm: return "fsgdm";
    case Variant::kStandardSgdm: return "standard_sgdm";
    case Variant::kEmaSgdm: return "ema_sgdm";
    case Variant::kGeneralized: return "generalized";
  }
  return "unknown";
}

std::string_view to_string(LrSchedule schedule) {
  return schedule == LrSchedule::kCosine ? "cosine" : "constant";
}

Variant parse_variant(std::string_view text) {
  for (auto v : {Variant::kFsgdm, Variant::kStandardSgdm, Variant::kEmaSgdm, Variant::kGeneralized}) {
    if (text == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown optimizer variant '" + std::string(text) + "'");
}

LrSchedule parse_lr_schedule(std::string_view text) {
  if (text == "constant") return LrSchedule::kConstant;
  if (text == "cosine") return LrSchedule::kCosine;
  throw std::invalid_argument("unknown lr_schedule '" + std::string(text) + "'");
}

CoefficientSchedule resolve_schedule(const OptimizerConfig& config) {
  const StagePlan plan(config.total_steps, config.num_stages);
  switch (config.variant) {
    case Variant::kFsgdm:
      return make_fsgdm_schedule(config.c, config.v, plan);
    case Variant::kStandardSgdm:
    case Variant::kEmaSgdm: {
      SequenceParams p;
      p.kind = SequenceKind::kFixed;
      p.fixed_value = config.u;
      p.v_rule = config.variant == Variant::kEmaSgdm ? VRule::kCoupled : VRule::kConstant;
      p.v_value = config.v;
      return CoefficientSchedule(p, plan);
    }
    case Variant::kGeneralized:
      if (!config.schedule) throw std::invalid_argument("generalized variant needs a schedule");
      if (!(config.schedule->plan() == plan)) {
        throw std::invalid_argument("schedule plan does not match total_steps/num_stages");
      }
      return *config.schedule;
  }
  throw std::invalid_argument("unknown optimizer variant");
}

double lr_at(const OptimizerConfig& config, std::int64_t t) {
  if (config.lr_schedule == LrSchedule::kConstant || config.total_steps <= 1) {
    return config.base_lr;
  }
  const double progress =
      static_cast<double>(t - 1) / static_cast<double>(config.total_steps - 1);
  return config.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double fsgdm_coefficient(double c, std::int64_t num_stages, std::int64_t total_steps,
                         std::int64_t t) {
  const StagePlan plan(total_steps, num_stages);
  const double start = plan.stage_start(plan.stage_of(t));
  return start / (start + c * static_cast<double>(total_steps));
}

Optimizer::Optimizer(OptimizerConfig config)
    : config_(std::move(config)), schedule_(resolve_schedule(config_)) {
  if (!(config_.base_lr > 0.0)) throw std::invalid_argument("base learning rate must be positive");
  if (!(config_.weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be non-negative");
}

StepInfo Optimizer::step(ParameterGroup& group, std::span<const double> g) const {
  if (g.size() != group.params.size() || group.momentum.buffer.size() != group.params.size()) {
    throw std::invalid_argument("gradient, parameters and momentum buffer must share a shape");
  }
  const std::int64_t t = group.step + 1;
  if (t > config_.total_steps) {
    throw std::out_of_range("step " + std::to_string(t) + " exceeds total_steps " +
                            std::to_string(config_.total_steps));
  }
  StepInfo info;
  info.step = t;
  info.coefficients = schedule_.at_step(t);
  info.lr = lr_at(config_, t);
  if (config_.weight_decay != 0.0) {
    std::vector<double> decayed(g.begin(), g.end());
    kernels::axpy(decayed, config_.weight_decay, group.params);
    advance(group.momentum, decayed, info.coefficients);
  } else {
    advance(group.momentum, g, info.coefficients);
  }
  kernels::axpy(group.params, -info.lr, group.momentum.buffer);
  group.step = t;
  return info;
}

ParameterGroup optimizer_step(ParameterGroup group, std::span<const double> g,
                              const OptimizerConfig& config) {
  Optimizer(config).step(group, g);
  return group;
}

const std::set<std::string>& optimizer_keys() {
  static const std::set<std::string> keys{"variant", "c", "u", "v", "lr", "lr_schedule",
                                          "weight_decay", "total_steps", "num_stages"};
  return keys;
}

OptimizerConfig optimizer_config_from(const ConfigDocument& doc, const std::string& section,
                                      const std::string& schedule_section) {
  doc.require_known_keys(section, optimizer_keys());
  OptimizerConfig config;
  try {
    config.variant = parse_variant(doc.get_string(section, "variant", "fsgdm"));
    config.lr_schedule = parse_lr_schedule(doc.get_string(section, "lr_schedule", "constant"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
  config.c = doc.get_double(section, "c", config.c);
  config.u = doc.get_double(section, "u", config.u);
  config.v = doc.get_double(section, "v", config.v);
  config.base_lr = doc.get_double(section, "lr", config.base_lr);
  config.weight_decay = doc.get_double(section, "weight_decay", config.weight_decay);
  config.total_steps = doc.get_int(section, "total_steps", config.total_steps);
  config.num_stages = doc.get_int(section, "num_stages", config.num_stages);
  if (config.variant == Variant::kGeneralized) {
    if (!doc.has_section(schedule_section)) {
      throw ConfigError("generalized optimizer needs a [" + schedule_section + "] section");
    }
    config.schedule = schedule_from_config(doc, schedule_section,
                                           StagePlan(config.total_steps, config.num_stages));
  }
  return config;
}

void optimizer_config_to(const OptimizerConfig& config, ConfigDocument& doc,
                         const std::string& section, const std::string& schedule_section) {
  doc.set(section, "variant", std::string(to_string(config.variant)));
  doc.set(section, "c", format_double(config.c));
  doc.set(section, "u", format_double(config.u));
  doc.set(section, "v", format_double(config.v));
  doc.set(section, "lr", format_double(config.base_lr));
  doc.set(section, "lr_schedule", std::string(to_string(config.lr_schedule)));
  doc.set(section, "weight_decay", format_double(config.weight_decay));
  doc.set(section, "total_steps", std::to_string(config.total_steps));
  doc.set(section, "num_stages", std::to_string(config.num_stages));
  if (config.schedule) schedule_to_config(*config.schedule, doc, schedule_section);
}

}  // namespace fsgdm
