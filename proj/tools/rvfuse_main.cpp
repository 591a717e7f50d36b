#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rvfuse/csv.hpp"
#include "rvfuse/fusion.hpp"
#include "rvfuse/sim.hpp"
#include "rvfuse/vine_gof.hpp"
#include "rvfuse/vine_select.hpp"
#include "rvfuse/vine_serialize.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string criterion = "aic";
    std::string families;
    int verbosity = 0;
};

void add_common(CLI::App* cmd, CommonOpts* o, bool with_model_opts) {
    cmd->add_option("--out", o->out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", o->seed, "seed recorded in every output")
        ->capture_default_str();
    cmd->add_option("--threads", o->threads, "worker cap (0 = hardware)");
    if (with_model_opts) {
        cmd->add_option("--criterion", o->criterion,
                        "edge selection criterion: aic|bic|mle (aic/bic follow the "
                        "-loglik + penalty convention, see README)")
            ->capture_default_str();
        cmd->add_option("--families", o->families,
                        "comma list of family codes (indep,gauss,t,clayton,gumbel,"
                        "frank,joe with @90/@180/@270 rotations)");
    }
    cmd->add_flag("-v", o->verbosity, "verbosity (-v, -vv)");
}

rvfuse::SelectOptions select_options(const CommonOpts& o) {
    rvfuse::SelectOptions s;
    s.criterion = rvfuse::parse_criterion(o.criterion);
    if (!o.families.empty()) s.library = rvfuse::parse_family_list(o.families);
    return s;
}

std::string out_path(const CommonOpts& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    return (fs::path(o.out_dir) / name).string();
}

rvfuse::BitMatrix read_decisions(const std::string& path) {
    const auto table = rvfuse::read_csv(path);
    rvfuse::BitMatrix bits(table.values.rows(), table.values.cols());
    for (std::size_t r = 0; r < table.values.rows(); ++r) {
        for (std::size_t c = 0; c < table.values.cols(); ++c) {
            const double v = table.values(r, c);
            if (v != 0.0 && v != 1.0)
                throw rvfuse::domain_error("decision CSV must contain only 0/1 bits");
            bits(r, c) = static_cast<std::uint8_t>(v);
        }
    }
    return bits;
}

int cmd_fit(const std::string& data_path, const CommonOpts& o) {
    const auto table = rvfuse::read_csv(data_path);
    if (table.values.cols() < 2)
        throw rvfuse::domain_error("need >= 2 variables (columns) to fit a vine");
    const rvfuse::Matrix pseudo = rvfuse::ecdf_transform(table.values);
    auto vine = rvfuse::select_structure(pseudo, select_options(o));
    for (std::size_t c = 0; c < table.values.cols(); ++c)
        vine.marginals.push_back(rvfuse::kde_fit(table.values.column(c)));

    json prov;
    prov["command"] = "fit";
    prov["data"] = data_path;
    prov["seed"] = o.seed;
    prov["n"] = table.values.rows();
    const std::string model_path = out_path(o, "model.json");
    rvfuse::save_vine(vine, model_path, prov);

    std::printf("loglik %.6f\n", vine.loglik);
    std::printf("%-5s %-14s %-12s %8s\n", "tree", "edge", "family", "tau");
    for (const auto& er : vine.edge_reports()) {
        std::string edge = std::to_string(er.edge.a) + "," + std::to_string(er.edge.b);
        if (!er.edge.conditioning.empty()) {
            edge += "|";
            for (std::size_t i = 0; i < er.edge.conditioning.size(); ++i)
                edge += (i ? "," : "") + std::to_string(er.edge.conditioning[i]);
        }
        std::printf("%-5d %-14s %-12s %8.4f\n", er.tree, edge.c_str(),
                    er.copula.code().c_str(), er.copula.tau());
    }
    std::printf("model written to %s\n", model_path.c_str());
    return 0;
}

int cmd_sample(const std::string& model_path, std::size_t n, bool raw,
               const CommonOpts& o) {
    if (n == 0) throw rvfuse::domain_error("--n must be positive");
    const auto vine = rvfuse::load_vine(model_path);
    rvfuse::Matrix s = vine.sample(n, o.seed);
    if (raw) {
        if (vine.marginals.size() != static_cast<std::size_t>(vine.dim()))
            throw rvfuse::domain_error("model has no marginals; cannot emit raw samples");
        for (std::size_t r = 0; r < s.rows(); ++r)
            for (std::size_t c = 0; c < s.cols(); ++c)
                s(r, c) = vine.marginals[c].quantile(s(r, c));
    }
    std::vector<std::string> header;
    for (int c = 1; c <= vine.dim(); ++c) header.push_back("s" + std::to_string(c));
    const std::string csv_path = out_path(o, "samples.csv");
    rvfuse::write_csv(csv_path, header, s);
    json meta;
    meta["command"] = "sample";
    meta["model"] = model_path;
    meta["n"] = n;
    meta["seed"] = o.seed;
    meta["space"] = raw ? "raw" : "u";
    std::ofstream(out_path(o, "samples_meta.json")) << meta.dump(2) << "\n";
    std::printf("wrote %zu samples to %s (seed %llu)\n", n, csv_path.c_str(),
                static_cast<unsigned long long>(o.seed));
    return 0;
}

int cmd_gof(const std::string& model_path, const std::string& data_path, int B,
            const CommonOpts& o) {
    if (B <= 0) throw rvfuse::domain_error("--B must be positive");
    const auto vine = rvfuse::load_vine(model_path);
    const auto table = rvfuse::read_csv(data_path);
    if (static_cast<int>(table.values.cols()) != vine.dim())
        throw rvfuse::domain_error("data column count does not match the model dimension");
    const rvfuse::Matrix pseudo = rvfuse::ecdf_transform(table.values);
    const auto res = rvfuse::gof_bootstrap(vine, pseudo, B, o.seed, o.threads);
    std::printf("cvm_statistic %.8f\n", res.statistic);
    std::printf("p_value %.6f\n", res.p_value);
    std::printf("replicates %d\n", res.replicates);
    std::printf("skipped %d\n", res.skipped);
    return 0;
}

int cmd_pmf(const std::string& h1_path, const std::string& h0_path,
            std::vector<double> beta, std::size_t mc_budget, const CommonOpts& o) {
    const auto h1 = rvfuse::read_csv(h1_path);
    const auto h0 = rvfuse::read_csv(h0_path);
    const std::size_t L = h1.values.cols();
    if (h0.values.cols() != L)
        throw rvfuse::domain_error("H1/H0 training files disagree on sensor count");
    if (beta.size() == 1) beta.assign(L, beta[0]);
    if (beta.size() != L)
        throw rvfuse::domain_error("--beta needs one value or one per sensor");

    rvfuse::PipelineOptions po;
    po.beta = beta;
    po.select = select_options(o);
    po.mc_budget = mc_budget;
    po.seed = o.seed;
    const auto model = rvfuse::run_fusion_pipeline(h1.values, h0.values, po);

    json j;
    j["command"] = "pmf";
    j["h1_data"] = h1_path;
    j["h0_data"] = h0_path;
    j["beta"] = beta;
    j["seed"] = o.seed;
    j["mc_budget"] = mc_budget;
    j["criterion"] = o.criterion;
    j["thresholds"] = model.bank.tau;
    j["rates"] = {{"p", model.rates.p}, {"q", model.rates.q}};
    const int P = 1 << model.pmf.L;
    for (int s = 0; s < P; ++s) {
        j["P"][rvfuse::pattern_string(s, model.pmf.L)] = model.pmf.p[s];
        j["Q"][rvfuse::pattern_string(s, model.pmf.L)] = model.pmf.q[s];
    }
    for (int m = 1; m < P; ++m)
        j["weights"][rvfuse::pattern_string(m, model.pmf.L)] = model.weights.a[m];
    j["clamped_mass_p"] = model.pmf.clamped_mass_p;
    j["clamped_mass_q"] = model.pmf.clamped_mass_q;
    j["subset_count"] = model.h1_subsets.count();
    const std::string path = out_path(o, "pmf.json");
    std::ofstream(path) << j.dump(2) << "\n";
    std::printf("subset evaluators per hypothesis: %zu\n", model.h1_subsets.count());
    std::printf("pmf written to %s\n", path.c_str());
    return 0;
}

int cmd_fuse(const std::string& pmf_path, const std::string& decisions_path,
             double alpha, const CommonOpts& o) {
    std::ifstream in(pmf_path);
    if (!in) throw rvfuse::domain_error("cannot open pmf file: " + pmf_path);
    json j;
    in >> j;
    const auto& P = j.at("P");
    rvfuse::DecisionPMF pmf;
    pmf.L = static_cast<int>(P.begin().key().size());
    const int np = 1 << pmf.L;
    pmf.p.resize(np);
    pmf.q.resize(np);
    for (int s = 0; s < np; ++s) {
        const std::string key = rvfuse::pattern_string(s, pmf.L);
        pmf.p[s] = j.at("P").at(key).get<double>();
        pmf.q[s] = j.at("Q").at(key).get<double>();
    }
    const auto bits = read_decisions(decisions_path);
    if (static_cast<int>(bits.cols()) != pmf.L)
        throw rvfuse::domain_error("decision columns do not match the PMF sensor count");
    const auto w = rvfuse::weights_from_pmf(pmf);
    const double stat = rvfuse::eval_statistic(w, bits);
    const auto st = rvfuse::asymptotic_stats(pmf, w, bits.rows());
    const auto op = rvfuse::np_operating_point(st, alpha);
    const int decision = rvfuse::fuse(stat, op.gamma);
    std::printf("statistic %.8f\n", stat);
    std::printf("gamma %.8f\n", op.gamma);
    std::printf("alpha %.4f\n", alpha);
    std::printf("decision %d\n", decision);
    return 0;
}

int cmd_roc(const std::string& config_path, const CommonOpts& o, bool seed_set) {
    rvfuse::ScenarioConfig cfg = rvfuse::parse_scenario_file(config_path);
    if (seed_set) cfg.seed = o.seed;
    if (o.threads) cfg.threads = o.threads;
    const auto models = rvfuse::train_models(cfg);
    const auto roc = rvfuse::run_roc(cfg, models);
    rvfuse::write_roc_csv(out_path(o, "roc.csv"), roc.curves);
    std::ofstream(out_path(o, "summary.json"))
        << rvfuse::summary_json(cfg, models, roc).dump(2) << "\n";
    for (const auto& c : roc.curves) {
        std::printf("%-16s pd@alpha=%.3f: %.4f (auc %.4f)\n", c.rule.c_str(), cfg.alpha,
                    roc.pd_at_pf(c.rule, cfg.alpha), rvfuse::curve_auc(c));
    }
    std::printf("outputs: %s, %s\n", out_path(o, "roc.csv").c_str(),
                out_path(o, "summary.json").c_str());
    return 0;
}

int cmd_criteria(const std::string& config_path, const CommonOpts& o, bool seed_set) {
    rvfuse::ScenarioConfig cfg = rvfuse::parse_scenario_file(config_path);
    if (seed_set) cfg.seed = o.seed;
    if (o.threads) cfg.threads = o.threads;
    const auto res = rvfuse::compare_criteria(cfg);
    rvfuse::write_roc_csv(out_path(o, "roc_criteria.csv"), res.roc.curves);
    json j;
    j["config"] = rvfuse::scenario_to_json(cfg);
    for (const auto& [rule, auc] : res.auc) j["auc"][rule] = auc;
    std::ofstream(out_path(o, "criteria_summary.json")) << j.dump(2) << "\n";
    for (const auto& [rule, auc] : res.auc)
        std::printf("%-12s auc %.4f\n", rule.c_str(), auc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"R-vine copula decision fusion toolkit"};
    app.require_subcommand(1);

    CommonOpts o_fit, o_sample, o_gof, o_pmf, o_fuse, o_roc, o_crit;
    std::string fit_data, sample_model, gof_model, gof_data, pmf_h1, pmf_h0;
    std::string fuse_pmf, fuse_dec, roc_config, crit_config;
    std::size_t sample_n = 1000;
    bool sample_raw = false;
    int gof_B = 200;
    std::vector<double> pmf_beta{0.1};
    std::size_t pmf_budget = 200000;
    double fuse_alpha = 0.1;

    auto* fit = app.add_subcommand("fit", "fit an R-vine copula model to sensor CSV data");
    fit->add_option("--data", fit_data, "CSV with header s1..sL")->required();
    add_common(fit, &o_fit, true);

    auto* sample = app.add_subcommand("sample", "draw samples from a fitted model");
    sample->add_option("--model", sample_model, "model.json")->required();
    sample->add_option("--n", sample_n, "sample count")->capture_default_str();
    sample->add_flag("--raw", sample_raw, "map through the stored marginals");
    add_common(sample, &o_sample, false);

    auto* gof = app.add_subcommand("gof", "parametric bootstrap goodness-of-fit test");
    gof->add_option("--model", gof_model, "model.json")->required();
    gof->add_option("--data", gof_data, "CSV with header s1..sL")->required();
    gof->add_option("--B", gof_B, "bootstrap replicates")->capture_default_str();
    add_common(gof, &o_gof, false);

    auto* pmf = app.add_subcommand(
        "pmf", "train the fusion pipeline and dump PMF tables and weights");
    pmf->add_option("--h1", pmf_h1, "H1 training CSV")->required();
    pmf->add_option("--h0", pmf_h0, "H0 training CSV")->required();
    pmf->add_option("--beta", pmf_beta, "local false-alarm constraint(s)")
        ->capture_default_str();
    pmf->add_option("--mc-budget", pmf_budget, "subset CDF Monte Carlo budget")
        ->capture_default_str();
    add_common(pmf, &o_pmf, true);

    auto* fusec = app.add_subcommand("fuse", "fuse a decision CSV with trained weights");
    fusec->add_option("--pmf", fuse_pmf, "pmf.json from the pmf subcommand")->required();
    fusec->add_option("--decisions", fuse_dec, "CSV of 0/1 bits")->required();
    fusec->add_option("--alpha", fuse_alpha, "system false-alarm constraint")
        ->capture_default_str();
    add_common(fusec, &o_fuse, false);

    auto* roc = app.add_subcommand("roc", "simulate a scenario and write ROC curves");
    roc->add_option("--config", roc_config, "scenario config file")->required();
    add_common(roc, &o_roc, false);

    auto* crit = app.add_subcommand("criteria",
                                    "compare AIC/BIC/MLE edge selection on one scenario");
    crit->add_option("--config", crit_config, "scenario config file")->required();
    add_common(crit, &o_crit, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_data, o_fit);
        if (sample->parsed()) return cmd_sample(sample_model, sample_n, sample_raw, o_sample);
        if (gof->parsed()) return cmd_gof(gof_model, gof_data, gof_B, o_gof);
        if (pmf->parsed()) return cmd_pmf(pmf_h1, pmf_h0, pmf_beta, pmf_budget, o_pmf);
        if (fusec->parsed()) return cmd_fuse(fuse_pmf, fuse_dec, fuse_alpha, o_fuse);
        if (roc->parsed()) return cmd_roc(roc_config, o_roc, roc->count("--seed") > 0);
        if (crit->parsed())
            return cmd_criteria(crit_config, o_crit, crit->count("--seed") > 0);
    } catch (const rvfuse::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    }
    return 0;
}
