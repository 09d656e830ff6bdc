#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hesspec/cli/app.hpp"
#include "hesspec/cli/config.hpp"
#include "hesspec/cli/presets.hpp"
#include "json.hpp"

using namespace hesspec;
using namespace hesspec::cli;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "hesspec");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string tmpdir(const std::string& name) {
    const fs::path dir = fs::path(HESSPEC_TEST_TMPDIR) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string write_config(const std::string& dir, const std::string& text) {
    const std::string path = (fs::path(dir) / "spec.cfg").string();
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* const kMp = "# constant g = 1/4\np = 200\nn = 800\nloss = logistic\n";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("config entries: comments, unknown and duplicate keys") {
        const auto e = parse_entries("p = 10 # trailing\n\n# full line\nn=20\n");
        REQUIRE(e.size() == 2);
        CHECK(e[1].first == "n");
        CHECK(e[1].second == "20");
        try {
            parse_entries("p = 10\nbogus = 3\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError& err) {
            const std::string msg = err.what();
            CHECK(msg.find("bogus") != std::string::npos);
            CHECK(msg.find("valid keys: p, n, seed") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_entries("p = 1\np = 2\n"), ConfigError);
        CHECK_THROWS_AS(parse_entries("just words\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("p = 10\n"), ConfigError);
    }

    TEST_CASE("scalars and value lists") {
        CHECK(parse_scalar("sqrt(2/3)") == doctest::Approx(std::sqrt(2.0 / 3.0)));
        CHECK(parse_scalar(" 1/4 ") == 0.25);
        CHECK(parse_scalar("2.5e-1") == 0.25);
        CHECK_THROWS_AS(parse_scalar("abc"), ConfigError);
        CHECK_THROWS_AS(parse_scalar("1.5x"), ConfigError);
        const auto v = parse_values("0.1:8:30");
        REQUIRE(v.size() == 30);
        CHECK(v.front() == 0.1);
        CHECK(v.back() == doctest::Approx(8.0));
        CHECK(parse_values("1, 2,3").size() == 3);
    }

    TEST_CASE("vector patterns resolve deterministically") {
        const Config c = parse_config(
            "p = 10\nn = 40\nseed = 5\nmu = gaussian_norm(2)\nw_star = pm_block(3)\n"
            "w = scaled(sqrt(2/3), w_star)\n");
        CHECK(c.spec.mu.norm() == doctest::Approx(2.0));
        CHECK(c.spec.w_star.norm() == doctest::Approx(3.0));
        CHECK(c.spec.w_star(0) < 0.0);
        CHECK(c.spec.w_star(9) > 0.0);
        CHECK((c.spec.w - std::sqrt(2.0 / 3.0) * c.spec.w_star).norm() == 0.0);
        const Config again = parse_config("p = 10\nn = 40\nseed = 5\nmu = gaussian_norm(2)\n");
        CHECK((again.spec.mu - c.spec.mu).norm() == 0.0);
        const Config other = parse_config("p = 10\nn = 40\nseed = 6\nmu = gaussian_norm(2)\n");
        CHECK((other.spec.mu - c.spec.mu).norm() > 0.0);
        const Config ref = parse_config("p = 4\nn = 8\nmu = [1, 2, 3, 4]\nw = mu\n");
        CHECK(ref.spec.w(3) == 4.0);
        CHECK_THROWS_AS(parse_config("p = 4\nn = 8\nmu = [1, 2]\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("p = 4\nn = 8\nmu = w\n"), ConfigError);
        const Config blocks = parse_config("p = 4\nn = 8\ncov = diag_blocks(1, 4)\n");
        CHECK(std::get<cov::Diagonal>(blocks.spec.cov).entries(3) == 4.0);
    }

    TEST_CASE("norm overrides rescale and propagate to references") {
        Overrides o;
        o.norms["w_star"] = 0.5;
        const Config c = parse_config("p = 10\nn = 50\nw_star = pm_block(1)\nw = scaled(2, w_star)\n", o);
        CHECK(c.spec.w_star.norm() == doctest::Approx(0.5));
        CHECK(c.spec.w.norm() == doctest::Approx(1.0));
    }

    TEST_CASE("every preset panel round-trips through the echo") {
        CHECK(presets().size() == 9);
        for (const auto& p : presets()) {
            for (const auto& panel : p.panels) {
                INFO(p.name << " " << panel.label);
                const Config c = parse_config(panel.config);
                const Config back = parse_config(echo_text(c));
                CHECK(back.spec.p == c.spec.p);
                CHECK(back.spec.n == c.spec.n);
                CHECK((back.spec.mu - c.spec.mu).norm() == 0.0);
                CHECK((back.spec.w - c.spec.w).norm() == 0.0);
                CHECK((back.spec.w_star - c.spec.w_star).norm() == 0.0);
                CHECK(model_name(back.spec.model) == model_name(c.spec.model));
                CHECK(weight_name(back.spec.weight) == weight_name(c.spec.weight));
                CHECK(echo_text(back) == echo_text(c));
            }
        }
        CHECK(find_preset("fig5").outputs.size() == 3);
        CHECK_THROWS_AS(find_preset("fig9"), ConfigError);
    }

    TEST_CASE("density table for the Marchenko-Pastur config") {
        const std::string dir = tmpdir("density");
        const RunResult r = run_cli({"density", "--config", write_config(dir, kMp), "--out", dir, "--grid", "50"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("support [0.0625") != std::string::npos);
        const std::string table = slurp(dir + "/density.csv");
        CHECK(table.rfind("# x,density\n", 0) == 0);
        CHECK(std::count(table.begin(), table.end(), '\n') == 51);
    }

    TEST_CASE("spikes document shape and spec echo") {
        const std::string dir = tmpdir("spikes");
        const std::string cfg = "p = 200\nn = 800\nmu = pm_block(sqrt(1.5))\n";
        const RunResult r = run_cli({"spikes", "--config", write_config(dir, cfg), "--out", dir});
        REQUIRE(r.code == 0);
        const auto doc = nlohmann::json::parse(slurp(dir + "/spikes.json"));
        for (const char* key : {"spec_echo", "results", "seeds", "tool_version"}) CHECK(doc.contains(key));
        REQUIRE(doc["results"]["spikes"].size() == 1);
        const auto& s = doc["results"]["spikes"][0];
        CHECK(s["side"] == "right");
        CHECK(s["lambda"].get<double>() == doctest::Approx(0.25 * (2.5 + 0.25 * 2.5 / 1.5)));
        CHECK(s["cos2"].size() == 3);
        const auto mu = doc["spec_echo"]["mu"].get<std::vector<double>>();
        REQUIRE(mu.size() == 200);
        const Config resolved = parse_config(cfg);
        for (int i = 0; i < 200; ++i) CHECK(mu[i] == resolved.spec.mu(i));
        const Config echoed = parse_config(doc["spec_echo"]["config"].get<std::string>());
        CHECK(echoed.spec.mu.norm() == doctest::Approx(std::sqrt(1.5)));
    }

    TEST_CASE("simulate and compare are byte-identical on rerun") {
        const std::string a = tmpdir("rerun_a"), b = tmpdir("rerun_b");
        const std::string cfg = write_config(a, "p = 60\nn = 240\nmu = pm_block(1.2)\nseed = 3\n");
        for (const auto& dir : {a, b}) {
            REQUIRE(run_cli({"simulate", "--config", cfg, "--out", dir, "--trials", "3"}).code == 0);
            REQUIRE(run_cli({"compare", "--config", cfg, "--out", dir, "--trials", "3"}).code == 0);
        }
        CHECK(slurp(a + "/eigenvalues.csv") == slurp(b + "/eigenvalues.csv"));
        CHECK(slurp(a + "/compare.json") == slurp(b + "/compare.json"));
        const std::string table = slurp(a + "/eigenvalues.csv");
        CHECK(table.rfind("# trial,seed,eigenvalue\n", 0) == 0);
        CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 3 * 60);
        const auto doc = nlohmann::json::parse(slurp(a + "/compare.json"));
        CHECK(doc["seeds"] == nlohmann::json({3, 4, 5}));
        const RunResult rad = run_cli({"compare", "--config", cfg, "--out", b, "--trials", "2", "--dist", "rademacher", "--seed", "9"});
        CHECK(rad.code == 0);
        CHECK(nlohmann::json::parse(slurp(b + "/compare.json"))["seeds"] == nlohmann::json({9, 10}));
    }

    TEST_CASE("sweep over |w| on the signal-free logistic preset gives 30 rows") {
        const std::string dir = tmpdir("sweep");
        const RunResult r = run_cli({"sweep", "--preset", "fig6", "--param", "w_norm", "--values", "0.1:8:30", "--out", dir});
        REQUIRE(r.code == 0);
        std::istringstream in(slurp(dir + "/sweep.csv"));
        std::string line;
        std::getline(in, line);
        CHECK(line == "# w_norm,spikes,lambda,side,gap,cos2_mu,cos2_w_star,cos2_w");
        int rows = 0;
        double gap_337 = 0.0;
        while (std::getline(in, line)) {
            ++rows;
            if (rows == 13) gap_337 = std::stod(line.substr(line.find(',', line.find(',', line.find(',', line.find(',') + 1) + 1) + 1) + 1));
        }
        CHECK(rows == 30);
        CHECK(gap_337 == doctest::Approx(0.0190).epsilon(0.05));
    }

    TEST_CASE("preset fig5 writes its three files") {
        const std::string dir = tmpdir("fig5");
        const RunResult r = run_cli({"preset", "fig5", "--out", dir, "--trials", "2"});
        REQUIRE(r.code == 0);
        for (const auto& f : find_preset("fig5").outputs) CHECK(fs::exists(fs::path(dir) / f));
        const RunResult list = run_cli({"preset", "--list"});
        CHECK(list.code == 0);
        CHECK(list.out.find("fig1cd") != std::string::npos);
    }

    TEST_CASE("exit codes and diagnostics") {
        const std::string dir = tmpdir("errors");
        const RunResult unknown = run_cli({"density", "--config", write_config(dir, "p = 4\nn = 8\nfoo = 1\n")});
        CHECK(unknown.code == 1);
        CHECK(unknown.err.find("valid keys") != std::string::npos);
        CHECK(run_cli({}).code == 1);
        CHECK(run_cli({"density"}).code == 1);
        CHECK(run_cli({"frobnicate"}).code == 1);
        CHECK(run_cli({"preset", "nope"}).code == 1);
        CHECK(run_cli({"sweep", "--preset", "fig5", "--param", "colour", "--values", "1"}).code == 1);
    }
}
