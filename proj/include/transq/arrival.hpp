#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace transq {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Tolerance on row sums of D(1) and on the sum of the initial distribution.
inline constexpr double kStochasticTol = 1e-12;

struct Violation {
    std::string where;   // "D_3", "sum(D_l)", "initial", ...
    int row = -1;        // -1 when the violation is not tied to a row
    double defect = 0.0; // magnitude of the defect
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Finite-state discrete-time batch Markovian arrival process.
///
/// Holds the batch matrices D_0..D_L (entry (i,j) of D_l is the probability
/// of moving from state i to state j while l customers arrive) and the
/// distribution of the background state at time 0. The raw constructor only
/// checks shapes; use validate() or the from_* constructors for content.
class DBmapModel {
public:
    DBmapModel(std::vector<Matrix> batches, RowVector initial);

    /// Single-state Bernoulli(p) arrivals.
    static DBmapModel from_bernoulli(double p);
    /// Markov-modulated Bernoulli process, D(z) = D_0 + D_1 z.
    static DBmapModel from_mmbp(Matrix d0, Matrix d1, RowVector initial);
    static DBmapModel from_matrices(std::vector<Matrix> batches, RowVector initial);

    int num_states() const { return static_cast<int>(initial_.size()); }
    /// Largest batch size L.
    int max_batch() const { return static_cast<int>(batches_.size()) - 1; }
    const std::vector<Matrix>& batches() const { return batches_; }
    const Matrix& batch(int l) const { return batches_.at(static_cast<std::size_t>(l)); }
    const RowVector& initial() const { return initial_; }
    /// Background transition matrix P = D(1).
    const Matrix& transition_matrix() const { return transition_; }

    /// d_ij(0..L), the batch-size weights of the (i,j) transition.
    std::vector<double> batch_weights(int i, int j) const;

    friend bool operator==(const DBmapModel& a, const DBmapModel& b);

private:
    std::vector<Matrix> batches_;
    RowVector initial_;
    Matrix transition_;
};

ValidationReport validate(const DBmapModel& model);

/// D(x) = sum_l D_l x^l for x in [0,1].
Matrix eval_pgf_matrix(const DBmapModel& model, double x);

/// k-th derivative of D at 1, i.e. the matrix of k-th factorial moments of
/// the batch sizes. k = 0 gives P.
Matrix derivative_matrix_at_one(const DBmapModel& model, int k);

} // namespace transq
