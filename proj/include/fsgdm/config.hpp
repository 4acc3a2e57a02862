#pragma once

// Sectioned key = value documents:
//
//   # comment
//   [schedule]
//   kind = increasing
//   mu = 99
//
// Keys are addressed as "section.key". Overrides ("section.key=value") are
// applied in order after parsing, so later values win.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fsgdm/schedule.hpp"

namespace fsgdm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigDocument {
 public:
  using Section = std::map<std::string, std::string>;

  static ConfigDocument parse(std::string_view text);
  static ConfigDocument load(const std::string& path);

  // Applies "section.key=value".
  void apply_override(std::string_view assignment);
  void set(const std::string& section, const std::string& key, std::string value);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  const Section& section(const std::string& section) const;
  std::vector<std::string> section_names() const;

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         std::string fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  std::vector<double> fallback) const;
  std::vector<std::int64_t> get_ints(const std::string& section, const std::string& key,
                                     std::vector<std::int64_t> fallback) const;

  // Throws ConfigError naming the first key of `section` not in `allowed`.
  void require_known_keys(const std::string& section, const std::set<std::string>& allowed) const;
  // Throws ConfigError naming the first section not in `allowed`.
  void require_known_sections(const std::set<std::string>& allowed) const;

  // Canonical text: sections and keys in lexicographic order.
  std::string to_text() const;

 private:
  std::map<std::string, Section> sections_;
};

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

// Keys accepted in a [schedule] section.
const std::set<std::string>& schedule_keys();

// Builds a schedule from a [schedule] section. `default_plan` supplies
// total_steps and num_stages when the section omits them.
CoefficientSchedule schedule_from_config(const ConfigDocument& doc, const std::string& section,
                                         std::optional<StagePlan> default_plan = std::nullopt);

// Writes the schedule back as a section that schedule_from_config accepts.
void schedule_to_config(const CoefficientSchedule& schedule, ConfigDocument& doc,
                        const std::string& section);

std::string format_double(double value);

}  // namespace fsgdm
