#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = CARMA_FIXTURE_DIR;

struct Result {
    int code{-1};
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct ScratchDir {
    fs::path path;
    ScratchDir() : path(fs::temp_directory_path() / ("carma_cli_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

fs::path scratch() {
    static const ScratchDir dir;
    return dir.path;
}

Result cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const auto out = scratch() / ("stdout_" + std::to_string(counter));
    const auto err = scratch() / ("stderr_" + std::to_string(counter++));
    const std::string cmd = env + (env.empty() ? "" : " ") + CARMA_CLI_PATH + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string write_model(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

const std::string kModel = R"({"model": "univariate", "order": {"p": 1, "q": 0}, "mu": 0.5, "a": [2.0], "b": [1.0]})";

}  // namespace

TEST_CASE("help and version") {
    for (const char* sub : {"ingest", "spread-stats", "detect-jumps", "simulate", "fit", "pipeline"}) {
        const auto r = cli(std::string(sub) + " --help");
        INFO(sub);
        CHECK(r.code == 0);
        CHECK(r.out.find("--out") != std::string::npos);
        CHECK(r.out.find("--seed") != std::string::npos);
    }
    const auto top = cli("--help");
    CHECK(top.code == 0);
    CHECK(top.out.find("pipeline") != std::string::npos);
    CHECK(cli("--version").code == 0);
    CHECK(cli("").code == 1);
}

TEST_CASE("user errors exit 1 with a message") {
    const auto missing = cli("ingest --input /no/such/ticks.csv --out " + (scratch() / "m").string());
    CHECK(missing.code == 1);
    CHECK(missing.err.find("/no/such/ticks.csv") != std::string::npos);

    const auto corrupt = cli("ingest --input " + kFixtures + "/ticks_corrupt.csv --out " + (scratch() / "c").string());
    CHECK(corrupt.code == 1);
    CHECK(corrupt.err.find("line 43") != std::string::npos);

    const auto alpha = cli("detect-jumps --input " + kFixtures + "/ticks_small.csv --alpha 1.5");
    CHECK(alpha.code == 1);
    CHECK(alpha.err.find("1.5") != std::string::npos);

    CHECK(cli("fit --events x.csv --order 1,0,7").code == 1);
    CHECK(cli("simulate --model " + write_model("bad.json", "{\"model\": \"univariate\"}")).code == 1);
    const auto unstable = write_model(
        "unstable.json", R"({"model": "univariate", "order": {"p": 1, "q": 0}, "mu": 0.5, "a": [1.0], "b": [2.0]})");
    CHECK(cli("simulate --model " + unstable + " --horizon 10 --out " + (scratch() / "u").string()).code == 1);
    CHECK(cli("pipeline --input " + kFixtures + "/ticks_small.csv --ks-level 0").code == 1);
}

TEST_CASE("internal errors exit 2") {
    const auto r = cli("ingest --input " + kFixtures + "/ticks_small.csv --out " + (scratch() / "f").string(),
                       "CARMA_HAWKES_FAULT_INJECT=1");
    CHECK(r.code == 2);
    CHECK(r.err.find("internal error") != std::string::npos);
}

TEST_CASE("ingest writes cleaned ticks and spread statistics") {
    const auto dir = scratch() / "ingest";
    const auto r = cli("ingest --input " + kFixtures + "/ticks_small.csv --out " + dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find(dir.string()) != std::string::npos);
    for (const char* f : {"ticks_clean.csv", "ingest.json", "manifest.json", "spread_stats_XS0000000001.csv"}) {
        CHECK(fs::exists(dir / f));
    }
    std::istringstream stats(slurp(dir / "spread_stats_XS0000000001.csv"));
    std::string header;
    std::string row;
    std::getline(stats, header);
    std::getline(stats, row);
    CHECK(header == "mean,median,mode,std,excess_kurtosis,skewness,iqr,min,max");
    CHECK(std::count(row.begin(), row.end(), ',') == 8);

    const auto rep = json::parse(slurp(dir / "ingest.json"));
    CHECK(rep.dump().find("duplicate") != std::string::npos);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.contains("inputs"));
}

TEST_CASE("simulate then fit recovers the model") {
    const auto model = write_model("model.json", kModel);
    const auto sim = scratch() / "sim";
    REQUIRE(cli("simulate --model " + model + " --horizon 10000 --seed 5 --out " + sim.string()).code == 0);
    const auto summary = json::parse(slurp(sim / "simulation.json"));
    CHECK(summary["n_events"].get<int>() > 5000);
    CHECK(slurp(sim / "events.csv").rfind("business_time,mark\n", 0) == 0);

    const auto fit = scratch() / "fit";
    REQUIRE(cli("fit --events " + (sim / "events.csv").string() + " --order 1,0 --std-errors --out " + fit.string())
                .code == 0);
    const auto j = json::parse(slurp(fit / "fit.json"));
    CHECK(j["spec"]["mu"].get<double>() == doctest::Approx(0.5).epsilon(0.1));
    CHECK(j["spec"]["a"][0].get<double>() == doctest::Approx(2.0).epsilon(0.1));
    CHECK(j["spec"]["b"][0].get<double>() == doctest::Approx(1.0).epsilon(0.1));
    CHECK(j["n_params"].get<int>() == 3);
}

TEST_CASE("outputs are byte-reproducible apart from the manifest") {
    const auto model = write_model("model_det.json", kModel);
    for (const std::string& args :
         {std::string("simulate --model ") + model + " --horizon 500 --seed 9",
          std::string("detect-jumps --input ") + kFixtures + "/ticks_small.csv --side ask --calendar eur"}) {
        const auto a = scratch() / "det_a";
        const auto b = scratch() / "det_b";
        fs::remove_all(a);
        fs::remove_all(b);
        REQUIRE(cli(args + " --out " + a.string()).code == 0);
        REQUIRE(cli(args + " --threads 1 --out " + b.string()).code == 0);
        for (const auto& e : fs::directory_iterator(a)) {
            const auto name = e.path().filename().string();
            if (name == "manifest.json") continue;
            INFO(args << " " << name);
            CHECK(slurp(e.path()) == slurp(b / name));
        }
    }
}

TEST_CASE("config file supplies flags") {
    const auto cfg = scratch() / "sim.ini";
    std::ofstream(cfg) << "[simulate]\nhorizon = 200\nseed = 4\n";
    const auto model = write_model("model_cfg.json", kModel);
    const auto a = scratch() / "cfg_a";
    const auto b = scratch() / "cfg_b";
    REQUIRE(cli("--config " + cfg.string() + " simulate --model " + model + " --out " + a.string()).code == 0);
    REQUIRE(cli("simulate --model " + model + " --horizon 200 --seed 4 --out " + b.string()).code == 0);
    CHECK(slurp(a / "events.csv") == slurp(b / "events.csv"));
}

TEST_CASE("pipeline escalates on the layered fixture" * doctest::timeout(300)) {
    const auto dir = scratch() / "pipe";
    const auto r = cli("pipeline --input " + kFixtures + "/ticks_layered.csv --calendar utc24 --out " + dir.string());
    REQUIRE(r.code == 0);
    const auto rep = json::parse(slurp(dir / "report.json"));
    CHECK(rep["success"].get<bool>());
    CHECK(rep["final_framework"].get<std::string>() == "uCHLM");
    std::istringstream stages(slurp(dir / "stages.csv"));
    std::string header;
    std::string first;
    std::getline(stages, header);
    std::getline(stages, first);
    CHECK(header.rfind("framework,alpha,n_events,order", 0) == 0);
    CHECK(first.rfind("bCH,", 0) == 0);
    CHECK(first.substr(first.size() - 2) == ",0");
}
