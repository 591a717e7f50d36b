#pragma once

#include <string>

#include "json.hpp"
#include "rvfuse/vine_model.hpp"

namespace rvfuse {

// Model file layout:
// { "d": int, "matrix": [[...]], "families": [[codes]], "params": [[[...]]],
//   "marginals": [...], "loglik": float, "seed_provenance": {...} }
// matrix rows are the lower-triangular array rows; families/params rows hold
// the sub-diagonal entries of each row.
nlohmann::json vine_to_json(const FittedRVine& vine,
                            const nlohmann::json& seed_provenance);
FittedRVine vine_from_json(const nlohmann::json& j);

void save_vine(const FittedRVine& vine, const std::string& path,
               const nlohmann::json& seed_provenance);
FittedRVine load_vine(const std::string& path);

nlohmann::json marginal_to_json(const MarginalModel& m);
MarginalModel marginal_from_json(const nlohmann::json& j);

}  // namespace rvfuse
