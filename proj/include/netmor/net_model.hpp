#pragma once

#include <functional>
#include <string>
#include <vector>

#include "netmor/dae.hpp"
#include "netmor/types.hpp"

namespace netmor {

/// A domain model lowered to the unified DAE, together with the pieces the
/// integrator and CLI need: a default initial state, the constant boundary
/// input vector, channel labels, and (where the domain defines one) a
/// per-state constraint residual used for conservation reporting.
struct AssembledNetwork {
    UnifiedDae dae;
    Vector x0;
    Vector u0;
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    /// Max-norm residual of the domain's coupling constraints at a state;
    /// empty when the domain has none (single pipe, pure line).
    std::function<double(const Vector&)> constraint_residual;
};

}  // namespace netmor
