#include "hesspec/cli/report.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hesspec/cli/config.hpp"
#include "hesspec/version.hpp"

namespace hesspec::cli {

namespace {

// JSON has no NaN; absent values become null.
nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json entry(const ErrorEntry& e) {
    return {{"empirical", num(e.empirical)},
            {"theory", num(e.theory)},
            {"abs_error", num(e.abs_error)},
            {"std_error", num(e.std_error)}};
}

}  // namespace

std::string Table::render() const {
    std::string out = "# ";
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += format_double(row[i]);
        }
        out += "\n";
    }
    return out;
}

nlohmann::json document(const nlohmann::json& spec_echo, const nlohmann::json& results,
                        const std::vector<std::uint64_t>& seeds) {
    return {{"spec_echo", spec_echo},
            {"results", results},
            {"seeds", seeds},
            {"tool_version", std::string(version())}};
}

std::string render(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "': " + std::strerror(errno));
    out << content;
    out.close();
    if (!out) throw std::runtime_error("error writing '" + path + "': " + std::strerror(errno));
}

Table density_table(const DensityCurve& curve) {
    Table t{{"x", "density"}, {}};
    for (std::size_t i = 0; i < curve.grid.size(); ++i) t.rows.push_back({curve.grid[i], curve.density[i]});
    return t;
}

nlohmann::json to_json(const SupportReport& s) {
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto& [a, b] : s.intervals) intervals.push_back({a, b});
    return {{"intervals", intervals},
            {"bulk_count", s.bulk_count},
            {"bounded", s.bounded},
            {"refinement", s.refinement == EdgeRefinement::Exact ? "exact" : "density_threshold"}};
}

nlohmann::json to_json(const SpikeReport& s) {
    nlohmann::json alignment = nlohmann::json::array();
    for (int a = 0; a < 3; ++a) {
        alignment.push_back({num(s.alignment(a, 0)), num(s.alignment(a, 1)), num(s.alignment(a, 2))});
    }
    return {{"lambda", s.location},
            {"side", to_string(s.side)},
            {"edge", s.edge},
            {"gap", s.gap},
            {"cos2", {num(s.cos2(0)), num(s.cos2(1)), num(s.cos2(2))}},
            {"alignment", alignment},
            {"det_residual", s.det_residual},
            {"simple", s.simple}};
}

nlohmann::json to_json(const ComparisonReport& r) {
    nlohmann::json spikes = nlohmann::json::array();
    for (const auto& s : r.spikes) {
        nlohmann::json cos2 = nlohmann::json::array();
        for (int k = 0; k < 3; ++k) cos2.push_back(s.active[k] ? entry(s.cos2[k]) : nlohmann::json(nullptr));
        spikes.push_back({{"side", to_string(s.side)},
                          {"location", entry(s.location)},
                          {"gap", entry(s.gap)},
                          {"cos2", cos2},
                          {"detected_trials", s.detected_trials}});
    }
    return {{"density_l1", r.density_l1},
            {"bins", r.bins},
            {"trials", r.trials},
            {"outlier_counts", r.outlier_counts},
            {"spikes", spikes}};
}

}  // namespace hesspec::cli
