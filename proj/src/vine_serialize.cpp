#include "rvfuse/vine_serialize.hpp"

#include <fstream>

namespace rvfuse {

using nlohmann::json;

json marginal_to_json(const MarginalModel& m) {
    json j;
    switch (m.kind()) {
        case MarginalKind::Kde:
            j["kind"] = "kde";
            j["bandwidth"] = m.bandwidth();
            j["samples"] = m.samples();
            break;
        case MarginalKind::Gaussian:
            j["kind"] = "gauss";
            j["mu"] = m.param(0);
            j["sigma"] = m.param(1);
            break;
        case MarginalKind::Rayleigh:
            j["kind"] = "rayleigh";
            j["xi"] = m.param(0);
            break;
    }
    return j;
}

MarginalModel marginal_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "kde") {
        return kde_fit_with_bandwidth(j.at("samples").get<std::vector<double>>(),
                                      j.at("bandwidth").get<double>());
    }
    if (kind == "gauss") {
        return MarginalModel::gaussian(j.at("mu").get<double>(),
                                       j.at("sigma").get<double>());
    }
    if (kind == "rayleigh") {
        return MarginalModel::rayleigh(j.at("xi").get<double>());
    }
    throw domain_error("unknown marginal kind in model file: " + kind);
}

namespace {

json params_to_json(const BivariateCopula& c) {
    switch (c.family().kind) {
        case FamilyKind::Independence: return json::array();
        case FamilyKind::Gaussian: return json::array({c.params().rho});
        case FamilyKind::StudentT: return json::array({c.params().rho, c.params().nu});
        default: return json::array({c.params().phi});
    }
}

BivariateCopula copula_from_json(const std::string& code, const json& params) {
    const CopulaFamily fam = parse_family_code(code);
    CopulaParams p;
    switch (fam.kind) {
        case FamilyKind::Independence:
            break;
        case FamilyKind::Gaussian:
            p.rho = params.at(0).get<double>();
            break;
        case FamilyKind::StudentT:
            p.rho = params.at(0).get<double>();
            p.nu = params.at(1).get<double>();
            break;
        default:
            p.phi = params.at(0).get<double>();
            break;
    }
    return BivariateCopula(fam, p);
}

}  // namespace

json vine_to_json(const FittedRVine& vine, const json& seed_provenance) {
    json j;
    const int d = vine.dim();
    j["d"] = d;
    j["matrix"] = vine.array().rows();

    json fams = json::array();
    json params = json::array();
    for (int i = 1; i <= d; ++i) {
        json frow = json::array();
        json prow = json::array();
        for (int col = 1; col < i; ++col) {
            const auto& c = vine.edge_copula(i, col);
            frow.push_back(c.code());
            prow.push_back(params_to_json(c));
        }
        fams.push_back(frow);
        params.push_back(prow);
    }
    j["families"] = fams;
    j["params"] = params;

    json margs = json::array();
    for (const auto& m : vine.marginals) margs.push_back(marginal_to_json(m));
    j["marginals"] = margs;

    j["loglik"] = vine.loglik;
    json prov = seed_provenance.is_null() ? json::object() : seed_provenance;
    prov["criterion"] = criterion_name(vine.fit_options.criterion);
    json lib = json::array();
    for (const auto& f : vine.fit_options.library) lib.push_back(family_code(f));
    prov["families"] = lib;
    prov["independence_shortcut"] = vine.fit_options.independence_shortcut;
    j["seed_provenance"] = prov;
    return j;
}

FittedRVine vine_from_json(const json& j) {
    const int d = j.at("d").get<int>();
    const RVineArray arr(j.at("matrix").get<std::vector<std::vector<int>>>());
    if (arr.dim() != d) throw domain_error("model file: d does not match matrix");

    const auto& fams = j.at("families");
    const auto& params = j.at("params");
    std::vector<std::vector<BivariateCopula>> cops(std::max(0, d - 1));
    for (int col = 1; col <= d - 1; ++col) cops[col - 1].resize(d - col);
    for (int i = 1; i <= d; ++i) {
        if (static_cast<int>(fams.at(i - 1).size()) != i - 1)
            throw domain_error("model file: families row size mismatch");
        for (int col = 1; col < i; ++col) {
            cops[col - 1][i - col - 1] = copula_from_json(
                fams.at(i - 1).at(col - 1).get<std::string>(),
                params.at(i - 1).at(col - 1));
        }
    }
    FittedRVine vine(arr, std::move(cops));
    vine.loglik = j.value("loglik", 0.0);
    if (j.contains("marginals")) {
        for (const auto& mj : j.at("marginals"))
            vine.marginals.push_back(marginal_from_json(mj));
    }
    if (j.contains("seed_provenance")) {
        const auto& prov = j.at("seed_provenance");
        if (prov.contains("criterion"))
            vine.fit_options.criterion = parse_criterion(prov.at("criterion"));
        if (prov.contains("families")) {
            vine.fit_options.library.clear();
            for (const auto& f : prov.at("families"))
                vine.fit_options.library.push_back(parse_family_code(f));
        }
        if (prov.contains("independence_shortcut"))
            vine.fit_options.independence_shortcut =
                prov.at("independence_shortcut").get<bool>();
    }
    return vine;
}

void save_vine(const FittedRVine& vine, const std::string& path,
               const json& seed_provenance) {
    std::ofstream out(path);
    if (!out) throw domain_error("cannot write model file: " + path);
    out << vine_to_json(vine, seed_provenance).dump(2) << "\n";
}

FittedRVine load_vine(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw domain_error("cannot open model file: " + path);
    json j;
    in >> j;
    return vine_from_json(j);
}

}  // namespace rvfuse
