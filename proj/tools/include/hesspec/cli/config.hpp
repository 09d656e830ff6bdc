#pragma once

// Text configuration for the CLI: "key = value" lines, '#' comments. Vector values are
// literal lists or named patterns resolved deterministically from the seed.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hesspec/error.hpp"
#include "hesspec/feature_model.hpp"

namespace hesspec::cli {

/// Thrown for malformed or inconsistent configurations (exit code 1).
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

const std::vector<std::string>& valid_keys();

/// Raw key/value pairs in file order.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

ConfigEntries parse_entries(std::string_view text);

/// Norm overrides applied right after a vector key is resolved (used by sweeps).
struct Overrides {
    std::map<std::string, double> norms;  // key -> |v|
    std::optional<int> n;
    std::optional<int> p;
};

struct Config {
    ProblemSpec spec;
    std::uint64_t seed = 1;
    FeatureLaw dist;
    double trim = 0.0;  // only meaningful for weight = trim
    ConfigEntries entries;
};

Config resolve(const ConfigEntries& entries, const Overrides& overrides = {});
Config parse_config(std::string_view text, const Overrides& overrides = {});
Config load_config(const std::string& path, const Overrides& overrides = {});

/// Fully resolved config text: vectors expanded as literal lists with 17 significant
/// digits, so parse_config(echo_text(c)) reproduces c.spec exactly.
std::string echo_text(const Config& config);
nlohmann::json echo_json(const Config& config);

/// Parses plain numbers, "a/b" and "sqrt(x)".
double parse_scalar(std::string_view text);

/// "a:b:n" (n evenly spaced values) or a comma-separated list.
std::vector<double> parse_values(std::string_view text);

std::string format_double(double x);

}  // namespace hesspec::cli
