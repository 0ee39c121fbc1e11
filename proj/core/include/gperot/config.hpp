#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gperot/optimizer.hpp"

namespace gperot {

/// On-disk configuration: model description plus run options.
struct ConfigFile {
  std::string name = "custom";
  ModelSpec model;
  RunOptions run;
};

nlohmann::json config_to_json(const ConfigFile& c);
ConfigFile config_from_json(const nlohmann::json& j);

ConfigFile parse_config(const std::string& toml_text);
std::string emit_config(const ConfigFile& c);
ConfigFile load_config(const std::filesystem::path& path);
void save_config(const ConfigFile& c, const std::filesystem::path& path);

/// Structural equality of everything that is written to disk.
bool equivalent(const ConfigFile& a, const ConfigFile& b);

/// Built-in models: "model1", "model2", "model3".
ConfigFile preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace gperot
