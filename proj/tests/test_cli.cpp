// End-to-end checks of the command-line tool: spawns the built binary.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "rvfuse/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(RVFUSE_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path workdir() {
    const fs::path p = fs::temp_directory_path() / "rvfuse_cli_tests";
    fs::create_directories(p);
    return p;
}

std::string write_training_csv(const std::string& name, double shift,
                               std::uint64_t seed, int cols = 3, int rows = 700) {
    const fs::path path = workdir() / name;
    std::ofstream out(path);
    for (int c = 1; c <= cols; ++c) out << "s" << c << (c < cols ? "," : "\n");
    rvfuse::Rng rng(seed);
    for (int r = 0; r < rows; ++r) {
        const double common = rng.normal();
        for (int c = 0; c < cols; ++c) {
            out << (shift + 0.8 * common + rng.normal()) << (c + 1 < cols ? "," : "\n");
        }
    }
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("fit writes a schema-complete model and is reproducible") {
    const auto data = write_training_csv("fit_data.csv", 0.0, 11);
    const auto out1 = (workdir() / "fit1").string();
    const auto out2 = (workdir() / "fit2").string();
    const std::string args = "fit --data " + data +
                             " --families gauss,clayton,frank --seed 5 --out ";
    const auto r1 = run_cli(args + out1);
    CHECK(r1.exit_code == 0);
    CHECK(r1.output.find("loglik") != std::string::npos);
    CHECK(r1.output.find("tree") != std::string::npos);

    const auto j = nlohmann::json::parse(slurp(out1 + "/model.json"));
    CHECK(j.at("d").get<int>() == 3);
    CHECK(j.contains("matrix"));
    CHECK(j.contains("families"));
    CHECK(j.contains("params"));
    CHECK(j.contains("marginals"));
    CHECK(j.contains("loglik"));
    CHECK(j.at("seed_provenance").at("seed").get<int>() == 5);
    CHECK(j.at("matrix").size() == 3);
    CHECK(j.at("families").at(2).size() == 2);

    const auto r2 = run_cli(args + out2);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(out1 + "/model.json") == slurp(out2 + "/model.json"));
}

TEST_CASE("fit rejects single-column and malformed input with exit code 2") {
    const auto one = write_training_csv("one_col.csv", 0.0, 3, 1);
    const auto r = run_cli("fit --data " + one);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find(">= 2 variables") != std::string::npos);

    const fs::path bad = workdir() / "bad.csv";
    std::ofstream(bad) << "s1,s2\n1.0,2.0\n3.0,oops\n";
    const auto rb = run_cli("fit --data " + bad.string());
    CHECK(rb.exit_code == 2);

    const auto rm = run_cli("fit --data /nonexistent/file.csv");
    CHECK(rm.exit_code == 2);
}

TEST_CASE("sample and gof run against a fitted model") {
    const auto data = write_training_csv("gof_data.csv", 0.0, 21);
    const auto out = (workdir() / "gof_fit").string();
    CHECK(run_cli("fit --data " + data + " --families gauss --seed 2 --out " + out)
              .exit_code == 0);
    const std::string model = out + "/model.json";

    const auto rs = run_cli("sample --model " + model + " --n 100 --seed 9 --out " + out);
    CHECK(rs.exit_code == 0);
    const auto meta = nlohmann::json::parse(slurp(out + "/samples_meta.json"));
    CHECK(meta.at("seed").get<int>() == 9);

    const auto rg =
        run_cli("gof --model " + model + " --data " + data + " --B 60 --seed 3 --threads 2");
    CHECK(rg.exit_code == 0);
    CHECK(rg.output.find("p_value") != std::string::npos);
    double pval = -1.0;
    std::sscanf(rg.output.c_str() + rg.output.find("p_value"), "p_value %lf", &pval);
    CHECK(pval >= 0.0);
    CHECK(pval <= 1.0);

    CHECK(run_cli("gof --model " + model + " --data " + data + " --B 0").exit_code == 2);

    const auto two = write_training_csv("two_col.csv", 0.0, 4, 2);
    const auto rdim = run_cli("gof --model " + model + " --data " + two + " --B 60");
    CHECK(rdim.exit_code == 2);
}

TEST_CASE("gof distinguishes a deliberately wrong model (majority over seeds)") {
    // Model fitted to shifted-dependence data, tested against fresh data from
    // a different dependence structure.
    const auto right = write_training_csv("right.csv", 0.0, 31);
    const auto out = (workdir() / "wrongfit").string();
    CHECK(run_cli("fit --data " + right + " --families gauss --seed 2 --out " + out)
              .exit_code == 0);
    // Data with strong lower-tail dependence (Clayton-style) via squaring.
    const fs::path heavy = workdir() / "heavy.csv";
    {
        std::ofstream o(heavy);
        o << "s1,s2,s3\n";
        rvfuse::Rng rng(77);
        for (int r = 0; r < 700; ++r) {
            const double v = rng.gamma(0.5);
            for (int c = 0; c < 3; ++c) {
                const double e = rng.exponential();
                o << std::exp(-std::log1p(e / v) / 2.0) << (c < 2 ? "," : "\n");
            }
        }
    }
    int wins = 0;
    for (int seed = 1; seed <= 5; ++seed) {
        const auto pm = run_cli("gof --model " + out + "/model.json --data " + right +
                                " --B 60 --seed " + std::to_string(seed));
        const auto pw = run_cli("gof --model " + out + "/model.json --data " +
                                heavy.string() + " --B 60 --seed " + std::to_string(seed));
        double p_match = -1, p_wrong = -1;
        std::sscanf(pm.output.c_str() + pm.output.find("p_value"), "p_value %lf", &p_match);
        std::sscanf(pw.output.c_str() + pw.output.find("p_value"), "p_value %lf", &p_wrong);
        wins += (p_wrong < p_match) ? 1 : 0;
    }
    CHECK(wins >= 3);
}

TEST_CASE("pmf and fuse round trip") {
    const auto h1 = write_training_csv("pipe_h1.csv", 1.0, 41);
    const auto h0 = write_training_csv("pipe_h0.csv", 0.0, 42);
    const auto out = (workdir() / "pipe").string();
    const auto rp = run_cli("pmf --h1 " + h1 + " --h0 " + h0 +
                            " --beta 0.1 --families gauss,frank --mc-budget 40000 "
                            "--seed 6 --out " + out);
    CHECK(rp.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(out + "/pmf.json"));
    CHECK(j.at("P").size() == 8);
    CHECK(j.at("P").contains("000"));
    CHECK(j.at("P").contains("111"));
    CHECK(j.at("weights").size() == 7);
    CHECK(j.at("subset_count").get<int>() == 4);

    const fs::path dec = workdir() / "decisions.csv";
    {
        std::ofstream o(dec);
        o << "s1,s2,s3\n";
        for (int r = 0; r < 50; ++r) o << "1,1,0\n";
    }
    const auto rf = run_cli("fuse --pmf " + out + "/pmf.json --decisions " +
                            dec.string() + " --alpha 0.1");
    CHECK(rf.exit_code == 0);
    CHECK(rf.output.find("statistic") != std::string::npos);
    CHECK(rf.output.find("decision") != std::string::npos);

    const fs::path badbits = workdir() / "badbits.csv";
    std::ofstream(badbits) << "s1,s2,s3\n1,0,2\n";
    CHECK(run_cli("fuse --pmf " + out + "/pmf.json --decisions " + badbits.string())
              .exit_code == 2);
}

TEST_CASE("roc subcommand writes curves for both rules") {
    const fs::path conf = workdir() / "scen.conf";
    {
        std::ofstream o(conf);
        o << "L = 3\nN = 100\ntrials = 60\ncase = signal\n";
        o << "dep_family = gumbel\ndep_tau = 0.6\nsignal = 2.4\n";
        o << "sigma_w = 1.0,0.9,0.8\nbeta = 0.1\ntraining_n = 1000\n";
        o << "seed = 12\nfamilies = gauss,gumbel\nmc_budget = 150000\n";
    }
    const auto out = (workdir() / "roc").string();
    const auto r = run_cli("roc --config " + conf.string() + " --threads 2 --out " + out);
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(out + "/roc.csv");
    CHECK(csv.find("rule,pf,pd,se_pd") != std::string::npos);
    CHECK(csv.find("rvine") != std::string::npos);
    CHECK(csv.find("chair_varshney") != std::string::npos);

    // pd is nondecreasing within each rule block.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    std::string prev_rule;
    double prev_pd = 0.0;
    bool monotone = true;
    while (std::getline(lines, line)) {
        const auto c1 = line.find(',');
        const auto rule = line.substr(0, c1);
        double pf, pd, se;
        std::sscanf(line.c_str() + c1 + 1, "%lf,%lf,%lf", &pf, &pd, &se);
        if (rule != prev_rule) {
            prev_rule = rule;
            prev_pd = 0.0;
        }
        monotone = monotone && pd >= prev_pd - 1e-12;
        prev_pd = pd;
    }
    CHECK(monotone);

    const auto summary = nlohmann::json::parse(slurp(out + "/summary.json"));
    CHECK(summary.at("config").at("seed").get<int>() == 12);
    CHECK(summary.at("rules").contains("rvine"));

    // Same config and seed: output files identical byte for byte.
    const auto out_b = (workdir() / "roc_b").string();
    CHECK(run_cli("roc --config " + conf.string() + " --threads 2 --out " + out_b)
              .exit_code == 0);
    CHECK(slurp(out + "/roc.csv") == slurp(out_b + "/roc.csv"));
    CHECK(slurp(out + "/summary.json") == slurp(out_b + "/summary.json"));

    // trials = 0 is a config error.
    const fs::path bad = workdir() / "bad.conf";
    std::ofstream(bad) << "L = 3\ntrials = 0\n";
    CHECK(run_cli("roc --config " + bad.string()).exit_code == 2);

    // Unknown keys are named.
    const fs::path unk = workdir() / "unk.conf";
    std::ofstream(unk) << "L = 3\nwibble = 1\n";
    const auto ru = run_cli("roc --config " + unk.string());
    CHECK(ru.exit_code == 2);
    CHECK(ru.output.find("wibble") != std::string::npos);
}

TEST_CASE("criteria subcommand emits three arms") {
    const fs::path conf = workdir() / "crit.conf";
    {
        std::ofstream o(conf);
        o << "L = 3\nN = 100\ntrials = 40\ncase = signal\n";
        o << "dep_family = gumbel\ndep_tau = 0.6\nsignal = 2.4\n";
        o << "beta = 0.1\ntraining_n = 800\nseed = 13\n";
        o << "families = gauss,gumbel\nmc_budget = 120000\n";
    }
    const auto out = (workdir() / "crit").string();
    const auto r = run_cli("criteria --config " + conf.string() + " --threads 2 --out " + out);
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(out + "/criteria_summary.json"));
    CHECK(j.at("auc").size() == 3);
    const std::string csv = slurp(out + "/roc_criteria.csv");
    CHECK(csv.find("rvine_aic") != std::string::npos);
    CHECK(csv.find("rvine_bic") != std::string::npos);
    CHECK(csv.find("rvine_mle") != std::string::npos);
}
