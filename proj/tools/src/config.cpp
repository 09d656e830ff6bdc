#include "hesspec/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hesspec/error.hpp"

namespace hesspec::cli {

namespace {

// Stream of the seed used by gaussian_norm(r) for each vector key.
const std::map<std::string, std::uint32_t> kPatternStream = {{"mu", 10}, {"w_star", 11}, {"w", 12}};
const char* const kVectorKeys[] = {"mu", "w_star", "w"};

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += sep;
        out += s;
    }
    return out;
}

// "name(args)" -> args, if `text` has that shape.
std::optional<std::string> call_args(const std::string& text, std::string_view name) {
    if (text.size() < name.size() + 2 || text.compare(0, name.size(), name) != 0) return std::nullopt;
    std::string rest = trim(std::string_view(text).substr(name.size()));
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') return std::nullopt;
    return trim(std::string_view(rest).substr(1, rest.size() - 2));
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : text) {
        if (ch == '(' || ch == '[') ++depth;
        if (ch == ')' || ch == ']') --depth;
        if (ch == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
        throw ConfigError(key + ": expected a bracketed list, got '" + text + "'");
    }
    const std::string inner = trim(std::string_view(text).substr(1, text.size() - 2));
    std::vector<double> out;
    if (inner.empty()) return out;
    for (const auto& item : split(inner, ',')) out.push_back(parse_scalar(item));
    return out;
}

int parse_int(const std::string& text, const std::string& key) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used == text.size()) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
}

Eigen::VectorXd resolve_vector(const std::string& key, const std::string& value, int p,
                               std::uint64_t seed, const std::map<std::string, Eigen::VectorXd>& done) {
    if (value == "zeros") return Eigen::VectorXd::Zero(p);
    if (auto a = call_args(value, "pm_block")) return pm_block(p, parse_scalar(*a));
    if (auto a = call_args(value, "gaussian_norm")) {
        Philox4x32 rng(seed, kPatternStream.at(key));
        return gaussian_direction(p, parse_scalar(*a), rng);
    }
    if (auto a = call_args(value, "scaled")) {
        const auto parts = split(*a, ',');
        if (parts.size() != 2) throw ConfigError(key + ": scaled(k, key) takes two arguments");
        const auto it = done.find(parts[1]);
        if (it == done.end()) {
            throw ConfigError(key + ": scaled() refers to '" + parts[1] +
                              "', which must be a vector key defined earlier (mu, w_star, w)");
        }
        return parse_scalar(parts[0]) * it->second;
    }
    if (const auto it = done.find(value); it != done.end()) return it->second;
    if (!value.empty() && value.front() == '[') {
        const std::vector<double> v = parse_list(value, key);
        if (static_cast<int>(v.size()) != p) {
            throw ConfigError(key + ": list has " + std::to_string(v.size()) + " entries, p = " +
                              std::to_string(p));
        }
        return Eigen::Map<const Eigen::VectorXd>(v.data(), p);
    }
    throw ConfigError(key + ": cannot parse vector '" + value +
                      "' (valid: zeros, pm_block(r), gaussian_norm(r), scaled(k, key), a "
                      "vector key, [v1, ..., vp])");
}

CovSpec resolve_cov(const std::string& value, int p) {
    if (value == "identity") return cov::ScaledIdentity{1.0};
    if (auto a = call_args(value, "scaled")) return cov::ScaledIdentity{parse_scalar(*a)};
    if (auto a = call_args(value, "diag_blocks")) {
        const auto parts = split(*a, ',');
        const int k = static_cast<int>(parts.size());
        if (p % k != 0) {
            throw ConfigError("cov: diag_blocks with " + std::to_string(k) +
                              " blocks needs p divisible by " + std::to_string(k));
        }
        Eigen::VectorXd d(p);
        for (int b = 0; b < k; ++b) d.segment(b * (p / k), p / k).setConstant(parse_scalar(parts[b]));
        return cov::Diagonal{d};
    }
    if (value.rfind("diag", 0) == 0) {
        const std::vector<double> v = parse_list(trim(std::string_view(value).substr(4)), "cov");
        if (static_cast<int>(v.size()) != p) throw ConfigError("cov: diag list length differs from p");
        return cov::Diagonal{Eigen::Map<const Eigen::VectorXd>(v.data(), p)};
    }
    throw ConfigError("cov: cannot parse '" + value +
                      "' (valid: identity, scaled(s), diag_blocks(v1, ..., vk), diag[d1, ..., dp])");
}

std::string list_text(const Eigen::VectorXd& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v(i));
    }
    return out + "]";
}

}  // namespace

const std::vector<std::string>& valid_keys() {
    static const std::vector<std::string> keys = {"p",    "n",     "seed",  "model", "link",
                                                  "sigma", "activation", "loss", "weight", "trim",
                                                  "cov",  "mu",    "w_star", "w",    "dist"};
    return keys;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_scalar(std::string_view text) {
    const std::string s = trim(text);
    if (auto a = call_args(s, "sqrt")) {
        const double v = parse_scalar(*a);
        if (v < 0) throw ConfigError("sqrt of a negative number: '" + s + "'");
        return std::sqrt(v);
    }
    if (const auto slash = s.rfind('/'); slash != std::string::npos && s.find('(') == std::string::npos) {
        return parse_scalar(s.substr(0, slash)) / parse_scalar(s.substr(slash + 1));
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("expected a number, got '" + s + "'");
}

std::vector<double> parse_values(std::string_view text) {
    const std::string s = trim(text);
    const auto colon = split(s, ':');
    if (colon.size() == 3) {
        const double a = parse_scalar(colon[0]), b = parse_scalar(colon[1]);
        const int n = parse_int(colon[2], "values");
        if (n < 1) throw ConfigError("values: count must be positive");
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
        return out;
    }
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_scalar(item));
    return out;
}

ConfigEntries parse_entries(std::string_view text) {
    ConfigEntries out;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto& keys = valid_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key +
                              "' (valid keys: " + join(keys, ", ") + ")");
        }
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        out.emplace_back(key, value);
    }
    return out;
}

Config resolve(const ConfigEntries& entries, const Overrides& overrides) {
    std::map<std::string, std::string> kv(entries.begin(), entries.end());
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    Config c;
    c.entries = entries;
    ProblemSpec& s = c.spec;
    if (!get("p") || !get("n")) throw ConfigError("config needs both p and n");
    s.p = overrides.p.value_or(parse_int(*get("p"), "p"));
    s.n = overrides.n.value_or(parse_int(*get("n"), "n"));
    if (s.p < 1 || s.n < 1) throw ConfigError("p and n must be positive");
    if (auto v = get("seed")) {
        try {
            std::size_t used = 0;
            c.seed = std::stoull(*v, &used);
            if (used != v->size()) throw std::invalid_argument("seed");
        } catch (const std::exception&) {
            throw ConfigError("seed: expected a non-negative integer, got '" + *v + "'");
        }
    }
    if (auto v = get("dist")) c.dist = parse_feature_law(*v);

    const std::string model = get("model").value_or("logistic");
    if ((get("link") || get("sigma")) && model != "factor") {
        throw ConfigError("link and sigma only apply to model = factor");
    }
    if (get("activation") && model != "nn") throw ConfigError("activation only applies to model = nn");
    if (model == "logistic") {
        s.model = model::Logistic{};
    } else if (model == "phase_retrieval") {
        s.model = model::PhaseRetrieval{};
    } else if (model == "factor") {
        model::NoisyNonlinearFactor f{named_fn(get("link").value_or("identity")), 0.0};
        f.sigma = parse_scalar(get("sigma").value_or("0"));
        if (!(f.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
        s.model = f;
    } else if (model == "nn") {
        s.model = model::SingleLayerNN{named_fn(get("activation").value_or("tanh"))};
    } else {
        throw ConfigError("model: unknown '" + model + "' (valid: logistic, phase_retrieval, factor, nn)");
    }

    if (get("loss") && get("weight")) throw ConfigError("give either loss or weight, not both");
    if (get("trim") && get("weight") != "trim") throw ConfigError("trim only applies to weight = trim");
    if (auto w = get("weight")) {
        if (*w == "trim") {
            c.trim = get("trim") ? parse_scalar(*get("trim")) : s.c();
            s.weight = trim_preprocess(c.trim);
        } else {
            s.weight = Preprocess{named_fn(*w), std::nullopt};
        }
    } else {
        s.weight = LossCurvature{parse_loss(get("loss").value_or("logistic"))};
    }

    s.cov = resolve_cov(get("cov").value_or("identity"), s.p);

    std::map<std::string, Eigen::VectorXd> done;
    for (const char* key : kVectorKeys) {
        Eigen::VectorXd v = resolve_vector(key, get(key).value_or("zeros"), s.p, c.seed, done);
        if (const auto it = overrides.norms.find(key); it != overrides.norms.end()) {
            const double norm = v.norm();
            if (!(norm > 0.0)) {
                throw ConfigError(std::string("cannot set the norm of ") + key + ": it is zero");
            }
            v *= it->second / norm;
        }
        done[key] = v;
    }
    s.mu = done["mu"];
    s.w_star = done["w_star"];
    s.w = done["w"];
    s.validate();
    return c;
}

Config parse_config(std::string_view text, const Overrides& overrides) {
    return resolve(parse_entries(text), overrides);
}

Config load_config(const std::string& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

namespace {

std::string cov_text(const CovSpec& cov) {
    if (const auto* id = std::get_if<cov::ScaledIdentity>(&cov)) {
        return id->s == 1.0 ? "identity" : "scaled(" + format_double(id->s) + ")";
    }
    if (const auto* d = std::get_if<cov::Diagonal>(&cov)) return "diag" + list_text(d->entries);
    throw ConfigError("dense covariances cannot be expressed in a config");
}

std::vector<std::pair<std::string, std::string>> echo_pairs(const Config& c) {
    const ProblemSpec& s = c.spec;
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("p", std::to_string(s.p));
    out.emplace_back("n", std::to_string(s.n));
    out.emplace_back("seed", std::to_string(c.seed));
    out.emplace_back("model", model_name(s.model));
    if (const auto* f = std::get_if<model::NoisyNonlinearFactor>(&s.model)) {
        out.emplace_back("link", f->link.name);
        out.emplace_back("sigma", format_double(f->sigma));
    }
    if (const auto* nn = std::get_if<model::SingleLayerNN>(&s.model)) {
        out.emplace_back("activation", nn->activation.name);
    }
    if (const auto* lc = std::get_if<LossCurvature>(&s.weight)) {
        out.emplace_back("loss", std::string(to_string(lc->loss)));
    } else {
        const std::string name = weight_name(s.weight);
        out.emplace_back("weight", name);
        if (name == "trim") out.emplace_back("trim", format_double(c.trim));
    }
    out.emplace_back("dist", to_string(c.dist));
    out.emplace_back("cov", cov_text(s.cov));
    out.emplace_back("mu", list_text(s.mu));
    out.emplace_back("w_star", list_text(s.w_star));
    out.emplace_back("w", list_text(s.w));
    return out;
}

}  // namespace

std::string echo_text(const Config& config) {
    std::string out;
    for (const auto& [k, v] : echo_pairs(config)) out += k + " = " + v + "\n";
    return out;
}

nlohmann::json echo_json(const Config& config) {
    const ProblemSpec& s = config.spec;
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : echo_pairs(config)) j[k] = v;
    j["p"] = s.p;
    j["n"] = s.n;
    j["seed"] = config.seed;
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["mu"] = vec(s.mu);
    j["w_star"] = vec(s.w_star);
    j["w"] = vec(s.w);
    if (const auto* d = std::get_if<cov::Diagonal>(&s.cov)) j["cov"] = {{"diag", vec(d->entries)}};
    if (config.trim > 0.0 && j.contains("trim")) j["trim"] = config.trim;
    if (const auto* f = std::get_if<model::NoisyNonlinearFactor>(&s.model)) j["sigma"] = f->sigma;
    j["config"] = echo_text(config);
    return j;
}

}  // namespace hesspec::cli
