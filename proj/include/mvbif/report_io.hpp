#pragma once

#include "json.hpp"

#include <Eigen/Dense>

#include "mvbif/bifurcation.hpp"
#include "mvbif/particles.hpp"
#include "mvbif/selfconsistency.hpp"
#include "mvbif/spectral.hpp"

namespace mvbif {

/// Matrices serialize as {"rows": r, "cols": c, "data": [row-major]}.
nlohmann::json to_json(const Eigen::MatrixXd& M);
nlohmann::json to_json(const Eigen::VectorXd& v);
nlohmann::json to_json(const MeanField& mf);

/// {alpha, meanfield, residual, iterations, converged}
nlohmann::json to_json(const FixedPointResult& r);
nlohmann::json to_json(const MultiStartResult& r);
nlohmann::json to_json(const SpectralReport& r, bool with_eigenvalues = false);
nlohmann::json to_json(const CrossingScan& s);
nlohmann::json to_json(const BifurcationReport& r);
nlohmann::json to_json(const DawsonAudit& a);
nlohmann::json to_json(const SimReport& r);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

/// Serializes with every floating-point number at 17 significant digits
/// (%.17g) so identical runs give byte-identical files. Non-finite -> null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace mvbif
