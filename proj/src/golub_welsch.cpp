#include "golub_welsch.hpp"

#include <Eigen/Eigenvalues>

#include "nkspec/errors.hpp"

namespace nkspec::detail {

NodesWeights golub_welsch(const std::vector<double>& diag, const std::vector<double>& offdiag, double mass) {
    const auto n = static_cast<Eigen::Index>(diag.size());
    if (n == 0 || offdiag.size() + 1 != diag.size()) {
        throw InvalidInput("golub_welsch: inconsistent recurrence sizes");
    }
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(diag.data(), n);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(offdiag.data(), n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(a, b, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw NumericalInconsistency("golub_welsch: tridiagonal eigensolver failed");
    }
    NodesWeights out;
    out.nodes.resize(static_cast<std::size_t>(n));
    out.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        out.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        out.weights[static_cast<std::size_t>(i)] = mass * v0 * v0;
    }
    return out;
}

}  // namespace nkspec::detail
