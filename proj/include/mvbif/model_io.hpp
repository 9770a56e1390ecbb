#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>

#include "mvbif/model.hpp"

namespace mvbif {

/// Model document:
///
///   { "name": str, "V0": expr,
///     "theta": {"kind": "linear", "slope": real}
///            | {"kind": "expr", "body": expr, "deriv": expr},
///     "beta": real, "V1": expr?, "v_basis": [expr], "J": [[real]],
///     "k_basis": [expr], "G": [[real]], "domain_L": real,
///     "sigma_scale": real?, "alpha_range": [lo, hi]?, "symmetric": bool? }
///
/// Potentials use the variable x, theta expressions the variable alpha.
/// Derivatives of x-expressions are taken symbolically.
ModelSpec load_model(const nlohmann::json& doc);
ModelSpec load_model_text(const std::string& text);
ModelSpec load_model_file(const std::filesystem::path& path);

}  // namespace mvbif
