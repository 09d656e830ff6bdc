#pragma once

// Figure reproductions as config text, so every preset goes through the same parser
// as a user config.

#include <optional>
#include <string>
#include <vector>

namespace hesspec::cli {

struct Panel {
    std::string label;  // empty for single-panel presets
    std::string config;
};

struct Sweep {
    std::string param;
    std::string values;
};

struct ExperimentPreset {
    std::string name;
    std::string description;
    std::vector<Panel> panels;
    std::optional<Sweep> sweep;
    int trials = 10;
    std::vector<std::string> dists{"gaussian"};
    std::vector<std::string> outputs;  // file names written by `preset`
};

const std::vector<ExperimentPreset>& presets();
/// Throws ConfigError listing the known names.
const ExperimentPreset& find_preset(const std::string& name);

}  // namespace hesspec::cli
