#include "fsgdm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fsgdm {
namespace {

std::string trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  std::string current;
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!current.empty()) items.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) items.push_back(std::move(current));
  return items;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid number '" + s + "' for " + std::string(what));
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("invalid integer '" + s + "' for " + std::string(what));
  }
  return value;
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::general, 17);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

ConfigDocument ConfigDocument::parse(std::string_view text) {
  ConfigDocument doc;
  std::string current;
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const auto hash = line.find_first_of("#;");
    std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        throw ConfigError("line " + std::to_string(line_number) + ": unterminated section header");
      }
      current = trim(body.substr(1, body.size() - 2));
      if (current.empty()) {
        throw ConfigError("line " + std::to_string(line_number) + ": empty section name");
      }
      doc.sections_[current];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number) + ": expected key = value");
    }
    if (current.empty()) {
      throw ConfigError("line " + std::to_string(line_number) + ": key outside of a section");
    }
    std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_number) + ": empty key");
    doc.sections_[current][key] = trim(body.substr(eq + 1));
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void ConfigDocument::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not section.key=value");
  }
  const std::string path = trim(assignment.substr(0, eq));
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("override key '" + path + "' is not section.key");
  }
  set(path.substr(0, dot), path.substr(dot + 1), trim(assignment.substr(eq + 1)));
}

void ConfigDocument::set(const std::string& section, const std::string& key, std::string value) {
  sections_[section][key] = std::move(value);
}

bool ConfigDocument::has_section(const std::string& section) const {
  return sections_.contains(section);
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.contains(key);
}

const ConfigDocument::Section& ConfigDocument::section(const std::string& section) const {
  static const Section empty;
  auto it = sections_.find(section);
  return it == sections_.end() ? empty : it->second;
}

std::vector<std::string> ConfigDocument::section_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : sections_) names.push_back(name);
  return names;
}

std::optional<std::string> ConfigDocument::get(const std::string& section,
                                               const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return std::nullopt;
  auto kv = it->second.find(key);
  if (kv == it->second.end()) return std::nullopt;
  return kv->second;
}

std::string ConfigDocument::get_string(const std::string& section, const std::string& key,
                                       std::string fallback) const {
  return get(section, key).value_or(std::move(fallback));
}

double ConfigDocument::get_double(const std::string& section, const std::string& key,
                                  double fallback) const {
  auto value = get(section, key);
  return value ? parse_double(*value, section + "." + key) : fallback;
}

std::int64_t ConfigDocument::get_int(const std::string& section, const std::string& key,
                                     std::int64_t fallback) const {
  auto value = get(section, key);
  return value ? parse_int(*value, section + "." + key) : fallback;
}

std::vector<double> ConfigDocument::get_doubles(const std::string& section,
                                                const std::string& key,
                                                std::vector<double> fallback) const {
  auto value = get(section, key);
  if (!value) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*value)) out.push_back(parse_double(item, section + "." + key));
  if (out.empty()) throw ConfigError(section + "." + key + " is an empty list");
  return out;
}

std::vector<std::int64_t> ConfigDocument::get_ints(const std::string& section,
                                                   const std::string& key,
                                                   std::vector<std::int64_t> fallback) const {
  auto value = get(section, key);
  if (!value) return fallback;
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(*value)) out.push_back(parse_int(item, section + "." + key));
  if (out.empty()) throw ConfigError(section + "." + key + " is an empty list");
  return out;
}

void ConfigDocument::require_known_keys(const std::string& section,
                                        const std::set<std::string>& allowed) const {
  for (const auto& [key, _] : this->section(section)) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
  }
}

void ConfigDocument::require_known_sections(const std::set<std::string>& allowed) const {
  for (const auto& [name, _] : sections_) {
    if (!allowed.contains(name)) throw ConfigError("unknown section [" + name + "]");
  }
}

std::string ConfigDocument::to_text() const {
  std::string out;
  for (const auto& [name, entries] : sections_) {
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    for (const auto& [key, value] : entries) out += key + " = " + value + "\n";
  }
  return out;
}

const std::set<std::string>& schedule_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{"kind", "mu", "nu", "fixed", "a", "sign", "v_rule", "v",
                            "total_steps", "num_stages", "transition_stage", "preset", "c"};
    for (const char* prefix : {"first.", "second."}) {
      for (const char* leaf : {"kind", "mu", "nu", "fixed", "a", "sign", "v_rule", "v"}) {
        k.insert(std::string(prefix) + leaf);
      }
    }
    return k;
  }();
  return keys;
}

namespace {

SequenceParams sequence_from(const ConfigDocument& doc, const std::string& section,
                             const std::string& prefix) {
  SequenceParams p;
  const auto key = [&](const char* leaf) { return prefix + leaf; };
  p.kind = parse_sequence_kind(doc.get_string(section, key("kind"), "fixed"));
  p.mu = doc.get_double(section, key("mu"), p.mu);
  p.nu = doc.get_double(section, key("nu"), p.nu);
  p.fixed_value = doc.get_double(section, key("fixed"), p.fixed_value);
  p.a_coeff = doc.get_double(section, key("a"), p.a_coeff);
  p.sign = static_cast<int>(doc.get_int(section, key("sign"), p.sign));
  p.v_rule = parse_v_rule(doc.get_string(section, key("v_rule"), "constant"));
  p.v_value = doc.get_double(section, key("v"), p.v_value);
  return p;
}

void sequence_to(const SequenceParams& p, ConfigDocument& doc, const std::string& section,
                 const std::string& prefix) {
  const auto key = [&](const char* leaf) { return prefix + leaf; };
  doc.set(section, key("kind"), std::string(to_string(p.kind)));
  switch (p.kind) {
    case SequenceKind::kIncreasing: doc.set(section, key("mu"), format_double(p.mu)); break;
    case SequenceKind::kDecreasing: doc.set(section, key("nu"), format_double(p.nu)); break;
    case SequenceKind::kFixed: doc.set(section, key("fixed"), format_double(p.fixed_value)); break;
    case SequenceKind::kTransition: break;
    default: doc.set(section, key("a"), format_double(p.a_coeff)); break;
  }
  doc.set(section, key("sign"), std::to_string(p.sign));
  doc.set(section, key("v_rule"), std::string(to_string(p.v_rule)));
  if (p.v_rule == VRule::kConstant) doc.set(section, key("v"), format_double(p.v_value));
}

}  // namespace

CoefficientSchedule schedule_from_config(const ConfigDocument& doc, const std::string& section,
                                         std::optional<StagePlan> default_plan) {
  doc.require_known_keys(section, schedule_keys());
  const bool has_steps = doc.has(section, "total_steps");
  if (!has_steps && !default_plan) {
    throw ConfigError("[" + section + "] needs total_steps");
  }
  const std::int64_t total =
      doc.get_int(section, "total_steps", default_plan ? default_plan->total_steps() : 0);
  const std::int64_t stages =
      doc.get_int(section, "num_stages", default_plan ? default_plan->num_stages() : 300);
  try {
    StagePlan plan(total, stages);
    const auto kind = parse_sequence_kind(doc.get_string(section, "kind", "fixed"));
    if (kind != SequenceKind::kTransition) {
      return CoefficientSchedule(sequence_from(doc, section, ""), plan);
    }
    std::optional<std::int64_t> switch_stage;
    if (doc.has(section, "transition_stage")) {
      switch_stage = doc.get_int(section, "transition_stage", 0);
    }
    if (auto preset = doc.get(section, "preset")) {
      return CoefficientSchedule::preset(parse_transition_preset(*preset), plan,
                                         doc.get_double(section, "c", 0.033), switch_stage);
    }
    if (!doc.has(section, "first.kind") || !doc.has(section, "second.kind")) {
      throw ConfigError("[" + section + "] transition needs preset or first.kind/second.kind");
    }
    return CoefficientSchedule::piecewise(sequence_from(doc, section, "first."),
                                          sequence_from(doc, section, "second."),
                                          switch_stage.value_or(stages / 2 + 1), plan);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + section + "] " + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
}

void schedule_to_config(const CoefficientSchedule& schedule, ConfigDocument& doc,
                        const std::string& section) {
  doc.set(section, "total_steps", std::to_string(schedule.plan().total_steps()));
  doc.set(section, "num_stages", std::to_string(schedule.plan().num_stages()));
  if (const auto& transition = schedule.transition()) {
    doc.set(section, "kind", "transition");
    doc.set(section, "transition_stage", std::to_string(transition->switch_stage));
    sequence_to(transition->first, doc, section, "first.");
    sequence_to(transition->second, doc, section, "second.");
  } else {
    sequence_to(schedule.params(), doc, section, "");
  }
}

}  // namespace fsgdm
