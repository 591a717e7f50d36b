#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "rvfuse/fusion.hpp"
#include "rvfuse/rng.hpp"

namespace rvfuse {

enum class DependenceCase { Fading, Signal, Noise };

DependenceCase parse_case(const std::string& s);
std::string case_name(DependenceCase c);

// Generating copula for the spatially dependent component. Families:
// indep, gauss (equicorrelated, any tau), clayton/gumbel/frank (tau > 0,
// sampled by their frailty representations).
struct DependenceSpec {
    std::string family = "indep";
    double tau = 0.0;
};

struct ScenarioConfig {
    int L = 3;
    int N = 100;          // decision instants per trial
    int trials = 2000;
    std::vector<double> signal = {2.4, 2.4, 2.4};
    double rayleigh_xi = 1.0;
    std::vector<double> sigma_w = {1.0, 0.9, 0.8};
    DependenceCase dep_case = DependenceCase::Signal;
    DependenceSpec dependence;
    double signal_g_sd = 0.2;  // dispersion of the random signal factor (case 2)
    std::vector<double> beta = {0.1, 0.1, 0.1};
    int training_n = 4000;
    std::uint64_t seed = 1;
    double alpha = 0.1;
    std::size_t mc_budget = 200000;
    unsigned threads = 0;
    SelectOptions select;

    void validate() const;
};

ScenarioConfig parse_scenario_file(const std::string& path);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

// Draws one L-vector of dependent uniforms from the configured copula.
class DependenceSampler {
public:
    DependenceSampler(const DependenceSpec& spec, int L);
    void draw(Rng& rng, std::vector<double>* u) const;
    double tau() const { return spec_.tau; }

private:
    DependenceSpec spec_;
    int L_;
    double phi_ = 0.0;       // Archimedean parameter
    Matrix chol_;            // Gaussian factor
};

// One N x L matrix of raw observations under the given hypothesis.
Matrix generate_trial(const ScenarioConfig& cfg, int hypothesis, Rng& rng);

struct TrainedModels {
    PipelineModel pipeline;
    AsymptoticStats stats;  // at cfg.N instants
    OperatingPoint op;      // asymptotic threshold at cfg.alpha
};

TrainedModels train_models(const ScenarioConfig& cfg);

struct RocPoint {
    double pf = 0.0, pd = 0.0, se_pd = 0.0;
};

struct RocCurve {
    std::string rule;
    int trials = 0;
    std::vector<RocPoint> points;  // sorted by pf, (0,0) and (1,1) included
};

double curve_auc(const RocCurve& c);

struct RocResult {
    std::vector<RocCurve> curves;
    // Per-rule trial statistics under H1 / H0, for operating-point checks.
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> stats;

    double pd_at_pf(const std::string& rule, double alpha) const;
    double se_at_pf(const std::string& rule, double alpha) const;
    double empirical_rate(const std::string& rule, bool under_h1, double gamma) const;
};

RocCurve build_roc_curve(const std::string& rule, const std::vector<double>& s1,
                         const std::vector<double>& s0);

// Simulates `trials` paired trials and evaluates both fusion rules.
RocResult run_roc(const ScenarioConfig& cfg, const TrainedModels& models);

// Same trials evaluated under models trained with AIC, BIC and MLE edge
// selection (identical seeds across arms).
struct CriteriaResult {
    RocResult roc;                     // curves rvine_aic / rvine_bic / rvine_mle
    std::map<std::string, double> auc;
};
CriteriaResult compare_criteria(const ScenarioConfig& cfg);

void write_roc_csv(const std::string& path, const std::vector<RocCurve>& curves);

nlohmann::json summary_json(const ScenarioConfig& cfg, const TrainedModels& models,
                            const RocResult& roc);

}  // namespace rvfuse
