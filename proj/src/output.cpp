#include "fsgdm/output.hpp"

#include <fstream>
#include <stdexcept>
#include <system_error>

#include "fsgdm/rng.hpp"

namespace fsgdm {

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string json_text(const Json& value) { return value.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const Json& value) {
  write_text(path, json_text(value));
}

Json config_json(const ConfigDocument& doc) {
  Json out = Json::object();
  for (const auto& name : doc.section_names()) {
    Json section = Json::object();
    for (const auto& [key, value] : doc.section(name)) section[key] = value;
    out[name] = std::move(section);
  }
  return out;
}

Json make_manifest(std::string_view command, const ConfigDocument& effective,
                   std::span<const std::uint64_t> seeds) {
  Json m;
  m["tool"] = "fsgdm";
  m["command"] = std::string(command);
  m["rng"] = Rng::kAlgorithm;
  m["config"] = config_json(effective);
  m["config_text"] = effective.to_text();
  m["seeds"] = Json::array();
  for (auto s : seeds) m["seeds"].push_back(s);
  return m;
}

std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  auto p = artifact;
  p.replace_extension();
  p += ".manifest.json";
  return p;
}

}  // namespace fsgdm
