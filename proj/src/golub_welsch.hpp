#pragma once

#include <vector>

namespace nkspec::detail {

struct NodesWeights {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss rule from the Jacobi matrix of a three-term recurrence: `diag` has n
/// entries, `offdiag` n - 1 (the square roots of the recurrence β_k), and
/// `mass` is the total mass of the weight function.
NodesWeights golub_welsch(const std::vector<double>& diag, const std::vector<double>& offdiag, double mass);

}  // namespace nkspec::detail
