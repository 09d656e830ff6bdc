#include "hesspec/cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hesspec/cli/config.hpp"
#include "hesspec/cli/presets.hpp"
#include "hesspec/cli/report.hpp"
#include "hesspec/hesspec.hpp"

namespace hesspec::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config_path;
    std::string preset;
    std::string panel;
    std::string out_dir = ".";
    int quad_order = ExpectationEngine::kDefaultOrder;
    std::optional<double> eps;
    int grid = 400;
    std::string range;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::string dist;
    std::string param;
    std::string values;
};

struct Source {
    Config config;
    std::optional<ExperimentPreset> preset;
};

Overrides sweep_override(const std::string& param, double value) {
    Overrides o;
    if (param == "mu_norm") o.norms["mu"] = value;
    else if (param == "mu_norm2") o.norms["mu"] = std::sqrt(value);
    else if (param == "w_norm") o.norms["w"] = value;
    else if (param == "w_star_norm") o.norms["w_star"] = value;
    else if (param == "n") o.n = static_cast<int>(std::lround(value));
    else {
        throw ConfigError("unknown sweep parameter '" + param +
                          "' (valid: mu_norm, mu_norm2, w_norm, w_star_norm, n)");
    }
    return o;
}

const Panel& pick_panel(const ExperimentPreset& p, const std::string& label) {
    if (label.empty()) return p.panels.front();
    for (const auto& panel : p.panels) {
        if (panel.label == label) return panel;
    }
    throw ConfigError("preset " + p.name + " has no panel '" + label + "'");
}

/// Config text as given (file or preset panel).
std::string config_text(const Options& o, std::optional<ExperimentPreset>* preset) {
    if (!o.preset.empty() && !o.config_path.empty()) throw ConfigError("give --config or --preset, not both");
    if (!o.preset.empty()) {
        const ExperimentPreset& p = find_preset(o.preset);
        if (preset) *preset = p;
        return pick_panel(p, o.panel).config;
    }
    if (o.config_path.empty()) throw ConfigError("a --config file or --preset name is required");
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot open config '" + o.config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Source load(const Options& o) {
    Source s;
    s.config = parse_config(config_text(o, &s.preset));
    if (!o.dist.empty()) s.config.dist = parse_feature_law(o.dist);
    return s;
}

std::string out_path(const Options& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    return (fs::path(o.out_dir) / name).string();
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("--range expects lo:hi");
    const double lo = parse_scalar(text.substr(0, colon));
    const double hi = parse_scalar(text.substr(colon + 1));
    if (!(hi > lo)) throw ConfigError("--range needs lo < hi");
    return {lo, hi};
}

std::uint64_t base_seed(const Options& o, const Config& c) { return o.seed.value_or(c.seed); }

int trial_count(const Options& o, const Source& s) {
    const int t = o.trials.value_or(s.preset ? s.preset->trials : 10);
    if (t < 1) throw ConfigError("--trials must be positive");
    return t;
}

// Each command returns a summary line for stdout.

std::string do_density(const Options& o, const Config& c, const std::string& prefix) {
    const BulkSolver bulk(c.spec, o.quad_order);
    const SupportReport support = bulk.support();
    std::pair<double, double> range;
    if (!o.range.empty()) {
        range = parse_range(o.range);
    } else {
        const double pad = 0.1 * support.width();
        range = {support.left() - pad, support.right() + pad};
    }
    if (o.grid < 2) throw ConfigError("--grid must be at least 2");
    std::vector<double> grid(o.grid);
    for (int i = 0; i < o.grid; ++i) {
        grid[i] = range.first + (range.second - range.first) * i / (o.grid - 1);
    }
    const double eps = o.eps.value_or(BulkSolver::default_epsilon(range.second - range.first));
    if (!(eps > 0.0)) throw ConfigError("--eps must be positive");
    const DensityCurve curve = bulk.density(grid, eps, true);
    write_file(out_path(o, prefix + "density.csv"), density_table(curve).render());
    std::string summary = "support";
    for (const auto& [a, b] : support.intervals) summary += " [" + format_double(a) + ", " + format_double(b) + "]";
    return summary;
}

std::vector<SpikeReport> theory_spikes(const BulkSolver& bulk, SupportReport* support_out) {
    const SupportReport support = bulk.support();
    if (support_out) *support_out = support;
    return SpikeSolver(bulk).find_spikes(support);
}

std::string do_spikes(const Options& o, const Config& c, const std::string& file) {
    const BulkSolver bulk(c.spec, o.quad_order);
    SupportReport support;
    const auto spikes = theory_spikes(bulk, &support);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : spikes) list.push_back(to_json(s));
    const nlohmann::json results = {{"support", to_json(support)}, {"spikes", list}};
    write_file(out_path(o, file), render(document(echo_json(c), results, {})));
    return std::to_string(spikes.size()) + " spike(s)";
}

std::string do_align(const Options& o, const Config& c) {
    const BulkSolver bulk(c.spec, o.quad_order);
    const auto spikes = theory_spikes(bulk, nullptr);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : spikes) {
        const nlohmann::json j = to_json(s);
        list.push_back({{"lambda", j["lambda"]}, {"side", j["side"]}, {"cos2", j["cos2"]},
                        {"alignment", j["alignment"]}, {"simple", j["simple"]}});
    }
    write_file(out_path(o, "align.json"), render(document(echo_json(c), {{"alignments", list}}, {})));
    return std::to_string(spikes.size()) + " alignment(s)";
}

std::string do_simulate(const Options& o, const Source& s) {
    const Config& c = s.config;
    const int trials = trial_count(o, s);
    const FeatureGeometry geometry(c.spec);
    std::vector<EmpiricalSpectrum> spectra(trials);
    const std::uint64_t seed0 = base_seed(o, c);
    parallel_for(trials, [&](std::size_t t) { spectra[t] = run_trial(c.spec, geometry, c.dist, seed0 + t, 0); });
    Table table{{"trial", "seed", "eigenvalue"}, {}};
    for (int t = 0; t < trials; ++t) {
        for (Eigen::Index i = 0; i < spectra[t].eigenvalues.size(); ++i) {
            table.rows.push_back({static_cast<double>(t), static_cast<double>(spectra[t].seed),
                                  spectra[t].eigenvalues(i)});
        }
    }
    write_file(out_path(o, "eigenvalues.csv"), table.render());
    return std::to_string(trials) + " trial(s)";
}

std::string do_compare(const Options& o, const Source& s, const std::string& file) {
    const Config& c = s.config;
    const BulkSolver bulk(c.spec, o.quad_order);
    SupportReport support;
    const auto spikes = theory_spikes(bulk, &support);
    CompareOptions opt;
    opt.trials = trial_count(o, s);
    opt.base_seed = base_seed(o, c);
    opt.law = c.dist;
    const ComparisonReport r = compare(bulk, support, spikes, opt);
    nlohmann::json theory = nlohmann::json::array();
    for (const auto& sp : spikes) theory.push_back(to_json(sp));
    nlohmann::json results = to_json(r);
    results["support"] = to_json(support);
    results["theory_spikes"] = theory;
    results["dist"] = to_string(c.dist);
    write_file(out_path(o, file), render(document(echo_json(c), results, r.seeds)));
    char buf[64];
    std::snprintf(buf, sizeof buf, "density_l1 %.4f", r.density_l1);
    return buf;
}

std::string do_sweep(const Options& o, const std::string& config, const std::string& param,
                     const std::string& values_text, const std::string& file) {
    if (param.empty() || values_text.empty()) throw ConfigError("sweep needs --param and --values");
    const std::vector<double> values = parse_values(values_text);
    const ConfigEntries entries = parse_entries(config);
    std::vector<Config> configs;
    for (double v : values) configs.push_back(resolve(entries, sweep_override(param, v)));

    std::vector<std::vector<double>> rows(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        const BulkSolver bulk(configs[i].spec, o.quad_order);
        const auto spikes = theory_spikes(bulk, nullptr);
        const SpikeReport* best = nullptr;
        for (const auto& s : spikes) {
            if (!best || s.gap > best->gap) best = &s;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        if (!best) {
            rows[i] = {values[i], 0.0, nan, 0.0, 0.0, 0.0, 0.0, 0.0};
        } else {
            rows[i] = {values[i],
                       static_cast<double>(spikes.size()),
                       best->location,
                       best->side == Side::Left ? -1.0 : 1.0,
                       best->gap,
                       best->cos2(0),
                       best->cos2(1),
                       best->cos2(2)};
        }
    });
    Table table{{param, "spikes", "lambda", "side", "gap", "cos2_mu", "cos2_w_star", "cos2_w"}, rows};
    write_file(out_path(o, file), table.render());
    return std::to_string(values.size()) + " row(s)";
}

std::string dist_file(const std::string& prefix, const std::string& dist, bool many) {
    if (!many) return prefix + "compare.json";
    std::string s = dist;
    for (char& ch : s) {
        if (ch == ':' || ch == '(' || ch == ')') ch = '_';
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    return prefix + "compare_" + s + ".json";
}

std::string do_preset(const Options& o, const std::string& name, std::ostream& out) {
    const ExperimentPreset& p = find_preset(name);
    for (const auto& panel : p.panels) {
        const std::string prefix = panel.label.empty() ? "" : panel.label + "_";
        Source s{parse_config(panel.config), p};
        out << p.name << (panel.label.empty() ? "" : "/" + panel.label) << ": "
            << do_density(o, s.config, prefix) << "\n";
        if (p.sweep) {
            out << "  sweep: " << do_sweep(o, panel.config, p.sweep->param, p.sweep->values, prefix + "sweep.csv")
                << "\n";
        } else {
            out << "  spikes: " << do_spikes(o, s.config, prefix + "spikes.json") << "\n";
        }
        for (const auto& d : p.dists) {
            s.config.dist = parse_feature_law(o.dist.empty() ? d : o.dist);
            out << "  compare " << d << ": " << do_compare(o, s, dist_file(prefix, d, p.dists.size() > 1))
                << "\n";
        }
    }
    return std::to_string(p.outputs.size()) + " file(s) in " + o.out_dir;
}

void add_source(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "Config file (key = value lines)");
    cmd->add_option("--preset", o.preset, "Use a preset's config instead of a file");
    cmd->add_option("--panel", o.panel, "Panel of a multi-panel preset");
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--quad-order", o.quad_order, "Gauss-Hermite order per dimension")->check(CLI::Range(4, 2000));
}

void add_empirical(CLI::App* cmd, Options& o) {
    cmd->add_option("--trials", o.trials, "Monte Carlo trials");
    cmd->add_option("--seed", o.seed, "Base seed (trial t uses seed + t)");
    cmd->add_option("--dist", o.dist, "Feature law: gaussian, rademacher, student_t:dof");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hessian spectra of generalized linear models: theory and simulation"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    Options o;

    auto* density = app.add_subcommand("density", "Limiting eigenvalue density on a grid");
    add_source(density, o);
    add_common(density, o);
    density->add_option("--eps", o.eps, "Imaginary offset for Stieltjes inversion");
    density->add_option("--grid", o.grid, "Number of grid points");
    density->add_option("--range", o.range, "Grid range lo:hi (default: support +- 10%)");

    auto* spikes = app.add_subcommand("spikes", "Isolated eigenvalues and their alignments");
    add_source(spikes, o);
    add_common(spikes, o);

    auto* align = app.add_subcommand("align", "Eigenvector alignment matrices at each spike");
    add_source(align, o);
    add_common(align, o);

    auto* simulate = app.add_subcommand("simulate", "Raw eigenvalues of sampled Hessians");
    add_source(simulate, o);
    add_common(simulate, o);
    add_empirical(simulate, o);

    auto* cmp = app.add_subcommand("compare", "Theory versus Monte Carlo");
    add_source(cmp, o);
    add_common(cmp, o);
    add_empirical(cmp, o);

    auto* sweep = app.add_subcommand("sweep", "Spike location, gap and alignment over a parameter");
    add_source(sweep, o);
    add_common(sweep, o);
    sweep->add_option("--param", o.param, "mu_norm, mu_norm2, w_norm, w_star_norm or n");
    sweep->add_option("--values", o.values, "a:b:count or a comma-separated list");

    std::string preset_name;
    bool list = false;
    auto* preset = app.add_subcommand("preset", "Reproduce a figure");
    preset->add_option("name", preset_name, "Preset name");
    preset->add_flag("--list", list, "List presets");
    add_common(preset, o);
    add_empirical(preset, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        std::string summary;
        if (density->parsed()) {
            summary = do_density(o, load(o).config, "");
        } else if (spikes->parsed()) {
            summary = do_spikes(o, load(o).config, "spikes.json");
        } else if (align->parsed()) {
            summary = do_align(o, load(o).config);
        } else if (simulate->parsed()) {
            summary = do_simulate(o, load(o));
        } else if (cmp->parsed()) {
            summary = do_compare(o, load(o), "compare.json");
        } else if (sweep->parsed()) {
            std::optional<ExperimentPreset> p;
            const std::string text = config_text(o, &p);
            std::string param = o.param, values = o.values;
            if (p && p->sweep) {
                if (param.empty()) param = p->sweep->param;
                if (values.empty()) values = p->sweep->values;
            }
            summary = do_sweep(o, text, param, values, "sweep.csv");
        } else if (preset->parsed()) {
            if (list) {
                for (const auto& p : presets()) out << p.name << "  " << p.description << "\n";
                return kOk;
            }
            if (preset_name.empty()) throw ConfigError("preset needs a name (see preset --list)");
            summary = do_preset(o, preset_name, out);
        }
        out << summary << "\n";
        return kOk;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace hesspec::cli
