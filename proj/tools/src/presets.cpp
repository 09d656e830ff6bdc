#include "hesspec/cli/presets.hpp"

#include "hesspec/cli/config.hpp"

#include <utility>

namespace hesspec::cli {

namespace {

std::string file_prefix(const Panel& panel) { return panel.label.empty() ? "" : panel.label + "_"; }

std::string dist_suffix(const std::string& dist) {
    std::string s = dist;
    for (char& ch : s) {
        if (ch == ':' || ch == '(' || ch == ')') ch = '_';
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    return s;
}

ExperimentPreset make(std::string name, std::string description, std::vector<Panel> panels,
                      std::optional<Sweep> sweep = std::nullopt, int trials = 10,
                      std::vector<std::string> dists = {"gaussian"}) {
    ExperimentPreset p;
    p.name = std::move(name);
    p.description = std::move(description);
    p.panels = std::move(panels);
    p.sweep = std::move(sweep);
    p.trials = trials;
    p.dists = std::move(dists);
    for (const auto& panel : p.panels) {
        const std::string pre = file_prefix(panel);
        p.outputs.push_back(pre + "density.csv");
        p.outputs.push_back(pre + (p.sweep ? "sweep.csv" : "spikes.json"));
        if (p.dists.size() == 1) {
            p.outputs.push_back(pre + "compare.json");
        } else {
            for (const auto& d : p.dists) p.outputs.push_back(pre + "compare_" + dist_suffix(d) + ".json");
        }
    }
    return p;
}

std::vector<ExperimentPreset> build() {
    const std::string logistic = "model = logistic\nloss = logistic\n";
    std::vector<ExperimentPreset> out;
    out.push_back(make("fig1a", "logistic model and loss, w = w* = mu ~ N(0, I/p)",
                       {{"", "p = 800\nn = 6000\nseed = 1\n" + logistic +
                                 "mu = gaussian_norm(1)\nw_star = mu\nw = mu\n"}}));
    out.push_back(make("fig1b", "logistic model and loss, w* = mu ~ N(0, I/p), independent w ~ N(0, I/p)",
                       {{"", "p = 800\nn = 6000\nseed = 1\n" + logistic +
                                 "mu = gaussian_norm(1)\nw_star = mu\nw = gaussian_norm(1)\n"}}));
    out.push_back(make("fig1cd", "phase retrieval with square loss, w* = [-2, 2] blocks / sqrt(p), w ~ N(0, I/p)",
                       {{"", "p = 800\nn = 6000\nseed = 1\nmodel = phase_retrieval\nloss = phase_square\n"
                             "w_star = pm_block(2)\nw = gaussian_norm(1)\n"}}));
    out.push_back(make("fig2", "bounded (logistic) versus unbounded (exponential) loss",
                       {{"logistic", "p = 800\nn = 6000\nseed = 1\n" + logistic + "w = pm_block(1)\n"},
                        {"exponential", "p = 800\nn = 6000\nseed = 1\nmodel = logistic\n"
                                        "loss = exponential\nw = pm_block(1)\n"}}));
    out.push_back(make("fig3", "single versus multi-bulk spectrum from a two-scale covariance",
                       {{"left", "p = 800\nn = 6000\nseed = 1\n" + logistic +
                                     "cov = diag_blocks(1, 2)\nmu = gaussian_norm(1)\nw = mu\n"},
                        {"right", "p = 800\nn = 6000\nseed = 1\n" + logistic +
                                      "cov = diag_blocks(1, 4)\nmu = gaussian_norm(1)\nw = mu\n"}}));
    out.push_back(make("fig4", "Gaussian, Rademacher and Student-t(7) features",
                       {{"", "p = 800\nn = 1200\nseed = 1\n" + logistic + "mu = gaussian_norm(1)\nw = mu\n"}},
                       std::nullopt, 10, {"gaussian", "rademacher", "student_t:7"}));
    out.push_back(make("fig5", "right spike from the data signal, sweep over |mu|^2",
                       {{"", "p = 512\nn = 2048\nseed = 1\n" + logistic + "mu = pm_block(sqrt(0.8))\n"}},
                       Sweep{"mu_norm2", "0.1:1.5:15"}, 50));
    out.push_back(make("fig6", "left spike from the response model, sweep over |w|",
                       {{"", "p = 800\nn = 8000\nseed = 1\n" + logistic + "w = pm_block(2)\n"}},
                       Sweep{"w_norm", "0.1:8:30"}, 50));
    out.push_back(make("fig7", "phase retrieval with trimming preprocessing, sweep over |w*|",
                       {{"", "p = 800\nn = 4000\nseed = 1\nmodel = phase_retrieval\nweight = trim\n"
                             "w_star = pm_block(1)\nw = scaled(sqrt(2/3), w_star)\n"}},
                       Sweep{"w_star_norm", "0.1:2:30"}, 50));
    return out;
}

}  // namespace

const std::vector<ExperimentPreset>& presets() {
    static const std::vector<ExperimentPreset> all = build();
    return all;
}

const ExperimentPreset& find_preset(const std::string& name) {
    std::string names;
    for (const auto& p : presets()) {
        if (p.name == name) return p;
        names += (names.empty() ? "" : ", ") + p.name;
    }
    throw ConfigError("unknown preset '" + name + "' (valid: " + names + ")");
}

}  // namespace hesspec::cli
