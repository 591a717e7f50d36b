#include "rvfuse/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rvfuse/math.hpp"
#include "rvfuse/mvcop.hpp"
#include "rvfuse/parallel.hpp"

namespace rvfuse {

using nlohmann::json;

DependenceCase parse_case(const std::string& s) {
    if (s == "fading") return DependenceCase::Fading;
    if (s == "signal") return DependenceCase::Signal;
    if (s == "noise") return DependenceCase::Noise;
    throw domain_error("unknown dependence case: " + s + " (fading|signal|noise)");
}

std::string case_name(DependenceCase c) {
    switch (c) {
        case DependenceCase::Fading: return "fading";
        case DependenceCase::Signal: return "signal";
        default: return "noise";
    }
}

void ScenarioConfig::validate() const {
    if (L < 1) throw domain_error("scenario: L must be >= 1");
    if (N < 1) throw domain_error("scenario: N must be >= 1");
    if (trials < 1) throw domain_error("scenario: trials must be >= 1");
    if (training_n < 200) throw domain_error("scenario: training_n must be >= 200");
    if (static_cast<int>(signal.size()) != L)
        throw domain_error("scenario: signal needs one entry per sensor");
    if (static_cast<int>(sigma_w.size()) != L)
        throw domain_error("scenario: sigma_w needs one entry per sensor");
    if (static_cast<int>(beta.size()) != L)
        throw domain_error("scenario: beta needs one entry per sensor");
    for (double s : sigma_w)
        if (!(s > 0.0)) throw domain_error("scenario: sigma_w must be positive");
    for (double b : beta)
        if (!(b > 0.0 && b < 1.0)) throw domain_error("scenario: beta must lie in (0,1)");
    if (!(rayleigh_xi > 0.0)) throw domain_error("scenario: rayleigh_xi must be positive");
    if (!(signal_g_sd > 0.0)) throw domain_error("scenario: signal_g_sd must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw domain_error("scenario: alpha must lie in (0,1)");
}

namespace {

std::vector<double> parse_list(const std::string& value, int L, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    if (out.size() == 1) out.assign(L, out[0]);
    if (static_cast<int>(out.size()) != L)
        throw domain_error("scenario key '" + key + "' needs 1 or L values");
    return out;
}

}  // namespace

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw domain_error("cannot open scenario file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }

    ScenarioConfig cfg;
    if (kv.count("L")) cfg.L = std::stoi(kv["L"]);
    if (kv.count("N")) cfg.N = std::stoi(kv["N"]);
    if (kv.count("trials")) cfg.trials = std::stoi(kv["trials"]);
    if (kv.count("training_n")) cfg.training_n = std::stoi(kv["training_n"]);
    if (kv.count("seed")) cfg.seed = std::stoull(kv["seed"]);
    if (kv.count("rayleigh_xi")) cfg.rayleigh_xi = std::stod(kv["rayleigh_xi"]);
    if (kv.count("signal_g_sd")) cfg.signal_g_sd = std::stod(kv["signal_g_sd"]);
    if (kv.count("alpha")) cfg.alpha = std::stod(kv["alpha"]);
    if (kv.count("mc_budget")) cfg.mc_budget = std::stoull(kv["mc_budget"]);
    if (kv.count("threads")) cfg.threads = static_cast<unsigned>(std::stoul(kv["threads"]));
    if (kv.count("case")) cfg.dep_case = parse_case(kv["case"]);
    if (kv.count("dep_family")) cfg.dependence.family = kv["dep_family"];
    if (kv.count("dep_tau")) cfg.dependence.tau = std::stod(kv["dep_tau"]);
    if (kv.count("criterion")) cfg.select.criterion = parse_criterion(kv["criterion"]);
    if (kv.count("families")) cfg.select.library = parse_family_list(kv["families"]);
    cfg.signal = kv.count("signal") ? parse_list(kv["signal"], cfg.L, "signal")
                                    : std::vector<double>(cfg.L, 2.4);
    cfg.sigma_w = kv.count("sigma_w") ? parse_list(kv["sigma_w"], cfg.L, "sigma_w")
                                      : std::vector<double>(cfg.L, 1.0);
    cfg.beta = kv.count("beta") ? parse_list(kv["beta"], cfg.L, "beta")
                                : std::vector<double>(cfg.L, 0.1);
    static const char* known[] = {"L", "N", "trials", "training_n", "seed",
                                  "rayleigh_xi", "signal_g_sd", "alpha", "mc_budget",
                                  "threads", "case", "dep_family", "dep_tau",
                                  "criterion", "families", "signal", "sigma_w", "beta"};
    for (const auto& [key, value] : kv) {
        (void)value;
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw domain_error("unknown scenario key: " + key);
    }
    cfg.validate();
    return cfg;
}

json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["L"] = cfg.L;
    j["N"] = cfg.N;
    j["trials"] = cfg.trials;
    j["signal"] = cfg.signal;
    j["rayleigh_xi"] = cfg.rayleigh_xi;
    j["sigma_w"] = cfg.sigma_w;
    j["case"] = case_name(cfg.dep_case);
    j["dep_family"] = cfg.dependence.family;
    j["dep_tau"] = cfg.dependence.tau;
    j["signal_g_sd"] = cfg.signal_g_sd;
    j["beta"] = cfg.beta;
    j["training_n"] = cfg.training_n;
    j["seed"] = cfg.seed;
    j["alpha"] = cfg.alpha;
    j["mc_budget"] = cfg.mc_budget;
    j["criterion"] = criterion_name(cfg.select.criterion);
    json lib = json::array();
    for (const auto& f : cfg.select.library) lib.push_back(family_code(f));
    j["families"] = lib;
    return j;
}

// ---------------------------------------------------------------------------
// Dependence injection
// ---------------------------------------------------------------------------

DependenceSampler::DependenceSampler(const DependenceSpec& spec, int L)
    : spec_(spec), L_(L) {
    const std::string& fam = spec_.family;
    if (fam == "indep" || spec_.tau == 0.0) {
        spec_.family = "indep";
        return;
    }
    if (fam == "gauss") {
        const double rho = std::sin(math::kPi * spec_.tau / 2.0);
        if (rho <= -1.0 / (L - 1.0))
            throw domain_error("gauss dependence: tau too negative for this L");
        Matrix corr(L, L, rho);
        for (int i = 0; i < L; ++i) corr(i, i) = 1.0;
        chol_ = cholesky(corr);
        return;
    }
    if (spec_.tau < 0.0)
        throw domain_error("dependence family '" + fam + "' supports tau > 0 only");
    if (fam == "clayton") {
        phi_ = params_from_tau({FamilyKind::Clayton, 0}, spec_.tau).phi;
    } else if (fam == "gumbel") {
        phi_ = params_from_tau({FamilyKind::Gumbel, 0}, spec_.tau).phi;
    } else if (fam == "frank") {
        phi_ = params_from_tau({FamilyKind::Frank, 0}, spec_.tau).phi;
    } else {
        throw domain_error("unsupported dependence family: " + fam);
    }
}

namespace {

// Devroye's constant-time logarithmic-series sampler.
double sample_logseries(Rng& rng, double p) {
    const double u = rng.uniform();
    if (u > p) return 1.0;
    const double v = rng.uniform();
    const double q = -std::expm1(v * std::log1p(-p));  // 1 - (1-p)^v
    if (u < q * q) return std::floor(1.0 + std::log(u) / std::log(q));
    if (u > q) return 1.0;
    return 2.0;
}

// Positive alpha-stable frailty (Laplace transform exp(-t^alpha)).
double sample_positive_stable(Rng& rng, double alpha) {
    const double theta = rng.uniform() * math::kPi;
    const double w = rng.exponential();
    const double la = std::log(std::sin(alpha * theta)) * alpha +
                      std::log(std::sin((1.0 - alpha) * theta)) * (1.0 - alpha) -
                      std::log(std::sin(theta));
    const double a = std::exp(la / (1.0 - alpha));
    return std::pow(a / w, (1.0 - alpha) / alpha);
}

}  // namespace

void DependenceSampler::draw(Rng& rng, std::vector<double>* u) const {
    u->resize(L_);
    const std::string& fam = spec_.family;
    if (fam == "indep") {
        for (int l = 0; l < L_; ++l) (*u)[l] = rng.uniform();
        return;
    }
    if (fam == "gauss") {
        std::vector<double> z(L_);
        for (int l = 0; l < L_; ++l) z[l] = rng.normal();
        for (int i = 0; i < L_; ++i) {
            double s = 0.0;
            for (int k = 0; k <= i; ++k) s += chol_(i, k) * z[k];
            (*u)[i] = clamp_unit(math::norm_cdf(s));
        }
        return;
    }
    if (fam == "clayton") {
        const double v = rng.gamma(1.0 / phi_);
        for (int l = 0; l < L_; ++l)
            (*u)[l] = clamp_unit(std::exp(-std::log1p(rng.exponential() / v) / phi_));
        return;
    }
    if (fam == "gumbel") {
        const double alpha = 1.0 / phi_;
        const double v = sample_positive_stable(rng, alpha);
        for (int l = 0; l < L_; ++l)
            (*u)[l] = clamp_unit(std::exp(-std::pow(rng.exponential() / v, alpha)));
        return;
    }
    // frank
    const double p = -std::expm1(-phi_);
    const double v = sample_logseries(rng, p);
    for (int l = 0; l < L_; ++l) {
        const double t = rng.exponential() / v;
        (*u)[l] = clamp_unit(-std::log1p(-p * std::exp(-t)) / phi_);
    }
}

Matrix generate_trial(const ScenarioConfig& cfg, int hypothesis, Rng& rng) {
    const int L = cfg.L;
    const int N = cfg.N;
    Matrix z(N, L);
    const DependenceSampler sampler(cfg.dependence, L);
    std::vector<double> u;
    for (int n = 0; n < N; ++n) {
        switch (cfg.dep_case) {
            case DependenceCase::Fading: {
                if (hypothesis == 1) {
                    sampler.draw(rng, &u);
                    for (int l = 0; l < L; ++l) {
                        const double h =
                            cfg.rayleigh_xi * std::sqrt(-2.0 * std::log1p(-u[l]));
                        z(n, l) = h * cfg.signal[l] + rng.normal(0.0, cfg.sigma_w[l]);
                    }
                } else {
                    for (int l = 0; l < L; ++l) z(n, l) = rng.normal(0.0, cfg.sigma_w[l]);
                }
                break;
            }
            case DependenceCase::Signal: {
                if (hypothesis == 1) {
                    sampler.draw(rng, &u);
                    for (int l = 0; l < L; ++l) {
                        const double g = cfg.signal_g_sd * math::norm_quantile(u[l]);
                        z(n, l) = cfg.signal[l] * g + rng.normal(0.0, cfg.sigma_w[l]);
                    }
                } else {
                    for (int l = 0; l < L; ++l) z(n, l) = rng.normal(0.0, cfg.sigma_w[l]);
                }
                break;
            }
            case DependenceCase::Noise: {
                sampler.draw(rng, &u);
                for (int l = 0; l < L; ++l) {
                    const double w = cfg.sigma_w[l] * math::norm_quantile(u[l]);
                    z(n, l) = (hypothesis == 1 ? cfg.signal[l] : 0.0) + w;
                }
                break;
            }
        }
    }
    return z;
}

TrainedModels train_models(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioConfig train_cfg = cfg;
    train_cfg.N = cfg.training_n;
    Rng rng1(Rng::derive(cfg.seed, 1000001));
    Rng rng0(Rng::derive(cfg.seed, 1000002));
    const Matrix h1 = generate_trial(train_cfg, 1, rng1);
    const Matrix h0 = generate_trial(train_cfg, 0, rng0);

    PipelineOptions po;
    po.beta = cfg.beta;
    po.select = cfg.select;
    po.mc_budget = cfg.mc_budget;
    po.seed = Rng::derive(cfg.seed, 999);

    TrainedModels tm;
    tm.pipeline = run_fusion_pipeline(h1, h0, po);
    tm.stats = asymptotic_stats(tm.pipeline.pmf, tm.pipeline.weights,
                                static_cast<std::size_t>(cfg.N));
    tm.op = np_operating_point(tm.stats, cfg.alpha);
    return tm;
}

// ---------------------------------------------------------------------------
// ROC machinery
// ---------------------------------------------------------------------------

RocCurve build_roc_curve(const std::string& rule, const std::vector<double>& s1,
                         const std::vector<double>& s0) {
    const int T = static_cast<int>(s1.size());
    std::vector<double> pooled;
    pooled.reserve(s1.size() + s0.size());
    pooled.insert(pooled.end(), s1.begin(), s1.end());
    pooled.insert(pooled.end(), s0.begin(), s0.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    std::vector<double> ss1 = s1, ss0 = s0;
    std::sort(ss1.begin(), ss1.end());
    std::sort(ss0.begin(), ss0.end());
    auto frac_above = [](const std::vector<double>& v, double g) {
        const auto it = std::upper_bound(v.begin(), v.end(), g);
        return static_cast<double>(v.end() - it) / static_cast<double>(v.size());
    };

    RocCurve c;
    c.rule = rule;
    c.trials = T;
    c.points.push_back({0.0, 0.0, 0.0});  // threshold above every statistic
    for (auto it = pooled.rbegin(); it != pooled.rend(); ++it) {
        const double pf = frac_above(ss0, *it);
        const double pd = frac_above(ss1, *it);
        if (pf == c.points.back().pf && pd == c.points.back().pd) continue;
        const double se = std::sqrt(std::max(0.0, pd * (1.0 - pd)) / T);
        c.points.push_back({pf, pd, se});
    }
    if (c.points.back().pf != 1.0 || c.points.back().pd != 1.0)
        c.points.push_back({1.0, 1.0, 0.0});
    return c;
}

double curve_auc(const RocCurve& c) {
    double auc = 0.0;
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const auto& a = c.points[i - 1];
        const auto& b = c.points[i];
        auc += (b.pf - a.pf) * 0.5 * (a.pd + b.pd);
    }
    return auc;
}

double RocResult::pd_at_pf(const std::string& rule, double alpha) const {
    const auto& [s1, s0] = stats.at(rule);
    std::vector<double> sorted0 = s0;
    std::sort(sorted0.begin(), sorted0.end(), std::greater<double>());
    const int T = static_cast<int>(s0.size());
    int k = static_cast<int>(std::floor(alpha * T));
    if (k < 1) k = 1;
    const double gamma = sorted0[k - 1];  // pf = frac(s0 > gamma) <= alpha
    int count = 0;
    for (double s : s1) count += (s > gamma) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(s1.size());
}

double RocResult::se_at_pf(const std::string& rule, double alpha) const {
    const double pd = pd_at_pf(rule, alpha);
    const double T = static_cast<double>(stats.at(rule).first.size());
    return std::sqrt(std::max(0.0, pd * (1.0 - pd)) / T);
}

double RocResult::empirical_rate(const std::string& rule, bool under_h1,
                                 double gamma) const {
    const auto& pair = stats.at(rule);
    const auto& v = under_h1 ? pair.first : pair.second;
    int count = 0;
    for (double s : v) count += (s > gamma) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(v.size());
}

RocResult run_roc(const ScenarioConfig& cfg, const TrainedModels& models) {
    const int T = cfg.trials;
    std::vector<double> s1_rv(T), s0_rv(T), s1_cv(T), s0_cv(T);
    parallel_for(static_cast<std::size_t>(T), cfg.threads, [&](std::size_t t) {
        Rng r1(Rng::derive(cfg.seed, 2 * t + 1));
        Rng r0(Rng::derive(cfg.seed, 2 * t + 2));
        const BitMatrix b1 = quantize(generate_trial(cfg, 1, r1), models.pipeline.bank);
        const BitMatrix b0 = quantize(generate_trial(cfg, 0, r0), models.pipeline.bank);
        s1_rv[t] = eval_statistic(models.pipeline.weights, b1);
        s0_rv[t] = eval_statistic(models.pipeline.weights, b0);
        s1_cv[t] = chair_varshney(models.pipeline.rates, b1);
        s0_cv[t] = chair_varshney(models.pipeline.rates, b0);
    });
    RocResult out;
    out.curves.push_back(build_roc_curve("rvine", s1_rv, s0_rv));
    out.curves.push_back(build_roc_curve("chair_varshney", s1_cv, s0_cv));
    out.stats["rvine"] = {std::move(s1_rv), std::move(s0_rv)};
    out.stats["chair_varshney"] = {std::move(s1_cv), std::move(s0_cv)};
    return out;
}

CriteriaResult compare_criteria(const ScenarioConfig& cfg) {
    const Criterion crits[3] = {Criterion::AIC, Criterion::BIC, Criterion::MLE};
    const std::string names[3] = {"rvine_aic", "rvine_bic", "rvine_mle"};
    TrainedModels models[3];
    for (int i = 0; i < 3; ++i) {
        ScenarioConfig arm = cfg;
        arm.select.criterion = crits[i];
        models[i] = train_models(arm);
    }
    // Thresholds come from the marginals, which do not depend on the edge
    // criterion, so all arms share the quantizer bank and the trial decisions.
    const int T = cfg.trials;
    std::vector<std::vector<double>> s1(3, std::vector<double>(T));
    std::vector<std::vector<double>> s0(3, std::vector<double>(T));
    parallel_for(static_cast<std::size_t>(T), cfg.threads, [&](std::size_t t) {
        Rng r1(Rng::derive(cfg.seed, 2 * t + 1));
        Rng r0(Rng::derive(cfg.seed, 2 * t + 2));
        const BitMatrix b1 =
            quantize(generate_trial(cfg, 1, r1), models[0].pipeline.bank);
        const BitMatrix b0 =
            quantize(generate_trial(cfg, 0, r0), models[0].pipeline.bank);
        for (int i = 0; i < 3; ++i) {
            s1[i][t] = eval_statistic(models[i].pipeline.weights, b1);
            s0[i][t] = eval_statistic(models[i].pipeline.weights, b0);
        }
    });
    CriteriaResult out;
    for (int i = 0; i < 3; ++i) {
        out.roc.curves.push_back(build_roc_curve(names[i], s1[i], s0[i]));
        out.auc[names[i]] = curve_auc(out.roc.curves.back());
        out.roc.stats[names[i]] = {std::move(s1[i]), std::move(s0[i])};
    }
    return out;
}

void write_roc_csv(const std::string& path, const std::vector<RocCurve>& curves) {
    std::ofstream out(path);
    if (!out) throw domain_error("cannot write ROC csv: " + path);
    out << "rule,pf,pd,se_pd\n";
    char buf[128];
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g,%.10g\n", c.rule.c_str(),
                          p.pf, p.pd, p.se_pd);
            out << buf;
        }
    }
}

json summary_json(const ScenarioConfig& cfg, const TrainedModels& models,
                  const RocResult& roc) {
    json j;
    j["config"] = scenario_to_json(cfg);
    j["thresholds"] = models.pipeline.bank.tau;
    j["rates"] = {{"p", models.pipeline.rates.p}, {"q", models.pipeline.rates.q}};
    json pmf;
    const int P = 1 << models.pipeline.pmf.L;
    for (int s = 0; s < P; ++s) {
        pmf["P"][pattern_string(s, models.pipeline.pmf.L)] = models.pipeline.pmf.p[s];
        pmf["Q"][pattern_string(s, models.pipeline.pmf.L)] = models.pipeline.pmf.q[s];
    }
    pmf["clamped_mass_p"] = models.pipeline.pmf.clamped_mass_p;
    pmf["clamped_mass_q"] = models.pipeline.pmf.clamped_mass_q;
    j["pmf"] = pmf;
    json weights;
    for (int m = 1; m < (1 << models.pipeline.weights.L); ++m)
        weights[pattern_string(m, models.pipeline.weights.L)] =
            models.pipeline.weights.a[m];
    j["weights"] = weights;
    j["asymptotic"] = {{"mu0", models.stats.mu0},
                       {"var0", models.stats.var0},
                       {"mu1", models.stats.mu1},
                       {"var1", models.stats.var1},
                       {"N", models.stats.n}};
    j["operating_point"] = {{"gamma", models.op.gamma},
                            {"predicted_pd", models.op.predicted_pd},
                            {"alpha", cfg.alpha}};
    json digest;
    digest["h1_loglik"] = models.pipeline.h1_subsets.full_vine.loglik;
    digest["h0_loglik"] = models.pipeline.h0_subsets.full_vine.loglik;
    auto edge_table = [](const FittedRVine& v) {
        json rows = json::array();
        for (const auto& er : v.edge_reports()) {
            json r;
            r["tree"] = er.tree;
            r["pair"] = {er.edge.a, er.edge.b};
            r["conditioning"] = er.edge.conditioning;
            r["family"] = er.copula.code();
            r["tau"] = er.copula.tau();
            rows.push_back(r);
        }
        return rows;
    };
    digest["h1_edges"] = edge_table(models.pipeline.h1_subsets.full_vine);
    digest["h0_edges"] = edge_table(models.pipeline.h0_subsets.full_vine);
    j["model_digest"] = digest;
    json per_rule;
    for (const auto& c : roc.curves) {
        json r;
        r["pd_at_alpha"] = roc.pd_at_pf(c.rule, cfg.alpha);
        r["se_at_alpha"] = roc.se_at_pf(c.rule, cfg.alpha);
        r["auc"] = curve_auc(c);
        if (roc.stats.count(c.rule)) {
            r["empirical_pf_at_gamma"] = roc.empirical_rate(c.rule, false, models.op.gamma);
            r["empirical_pd_at_gamma"] = roc.empirical_rate(c.rule, true, models.op.gamma);
        }
        per_rule[c.rule] = r;
    }
    j["rules"] = per_rule;
    return j;
}

}  // namespace rvfuse
