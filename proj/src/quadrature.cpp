#include "mvbif/quadrature.hpp"

namespace mvbif {

template struct BasicQuadrature<double>;

Quadrature default_grid(double L) { return build_grid<double>(L, 20, 40); }

}  // namespace mvbif
