#pragma once

// Output formats: `table` is '#'-headed CSV with 17 significant digits, `document` is a
// single JSON object with keys spec_echo, results, seeds and tool_version.

#include <cstdint>
#include <string>
#include <vector>

#include "hesspec/bulk_solver.hpp"
#include "hesspec/empirical.hpp"
#include "hesspec/spike_solver.hpp"
#include "json.hpp"

namespace hesspec::cli {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string render() const;
};

nlohmann::json document(const nlohmann::json& spec_echo, const nlohmann::json& results,
                        const std::vector<std::uint64_t>& seeds);
std::string render(const nlohmann::json& doc);

/// Writes `content` to `path`; throws std::runtime_error with the OS message on failure.
void write_file(const std::string& path, const std::string& content);

Table density_table(const DensityCurve& curve);
nlohmann::json to_json(const SupportReport& support);
nlohmann::json to_json(const SpikeReport& spike);
nlohmann::json to_json(const ComparisonReport& report);

}  // namespace hesspec::cli
