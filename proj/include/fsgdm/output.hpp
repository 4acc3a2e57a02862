#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fsgdm/config.hpp"

namespace fsgdm {

using Json = nlohmann::json;

// Creates `dir` if absent. Throws std::runtime_error on failure.
void ensure_directory(const std::filesystem::path& dir);

// Writes through a sibling temp file, then renames.
void write_text(const std::filesystem::path& path, std::string_view content);

// Two-space indent, sorted keys, trailing newline.
std::string json_text(const Json& value);
void write_json(const std::filesystem::path& path, const Json& value);

// Sections -> {key: value} with the raw config strings.
Json config_json(const ConfigDocument& doc);

// Common manifest fields: tool, command, rng algorithm, the effective config
// both as canonical text and as an object, and the seeds.
Json make_manifest(std::string_view command, const ConfigDocument& effective,
                   std::span<const std::uint64_t> seeds);

// "<stem>.manifest.json" beside `artifact`.
std::filesystem::path manifest_path(const std::filesystem::path& artifact);

}  // namespace fsgdm
