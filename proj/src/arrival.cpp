#include "transq/arrival.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace transq {

std::string ValidationReport::to_string() const
{
    if (ok()) {
        return "ok\n";
    }
    std::ostringstream os;
    os.precision(17);
    for (const auto& v : violations) {
        os << v.where;
        if (v.row >= 0) {
            os << " row " << v.row;
        }
        os << ": " << v.message << " (defect " << v.defect << ")\n";
    }
    return os.str();
}

DBmapModel::DBmapModel(std::vector<Matrix> batches, RowVector initial)
    : batches_(std::move(batches)), initial_(std::move(initial))
{
    const auto k = initial_.size();
    if (k == 0) {
        throw std::invalid_argument("D-BMAP needs at least one background state");
    }
    if (batches_.empty()) {
        throw std::invalid_argument("D-BMAP needs at least the matrix D_0");
    }
    for (std::size_t l = 0; l < batches_.size(); ++l) {
        if (batches_[l].rows() != k || batches_[l].cols() != k) {
            std::ostringstream os;
            os << "D_" << l << " is " << batches_[l].rows() << "x" << batches_[l].cols()
               << ", expected " << k << "x" << k;
            throw std::invalid_argument(os.str());
        }
    }
    transition_ = Matrix::Zero(k, k);
    for (const auto& d : batches_) {
        transition_ += d;
    }
}

DBmapModel DBmapModel::from_bernoulli(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("Bernoulli arrival probability must lie in [0,1]");
    }
    Matrix d0(1, 1), d1(1, 1);
    d0(0, 0) = 1.0 - p;
    d1(0, 0) = p;
    RowVector init(1);
    init(0) = 1.0;
    return from_matrices({d0, d1}, init);
}

DBmapModel DBmapModel::from_mmbp(Matrix d0, Matrix d1, RowVector initial)
{
    return from_matrices({std::move(d0), std::move(d1)}, std::move(initial));
}

DBmapModel DBmapModel::from_matrices(std::vector<Matrix> batches, RowVector initial)
{
    DBmapModel model(std::move(batches), std::move(initial));
    auto report = validate(model);
    if (!report.ok()) {
        throw std::invalid_argument("invalid D-BMAP: " + report.to_string());
    }
    return model;
}

std::vector<double> DBmapModel::batch_weights(int i, int j) const
{
    std::vector<double> w(batches_.size());
    for (std::size_t l = 0; l < batches_.size(); ++l) {
        w[l] = batches_[l](i, j);
    }
    return w;
}

bool operator==(const DBmapModel& a, const DBmapModel& b)
{
    if (a.batches_.size() != b.batches_.size() || a.initial_.size() != b.initial_.size()) {
        return false;
    }
    for (std::size_t l = 0; l < a.batches_.size(); ++l) {
        if (a.batches_[l] != b.batches_[l]) {
            return false;
        }
    }
    return a.initial_ == b.initial_;
}

ValidationReport validate(const DBmapModel& model)
{
    ValidationReport report;
    const int k = model.num_states();

    for (int l = 0; l <= model.max_batch(); ++l) {
        const auto& d = model.batch(l);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                const double v = d(i, j);
                if (!(v >= 0.0 && v <= 1.0)) {
                    std::ostringstream msg;
                    msg << "entry (" << i << "," << j << ") = " << v << " outside [0,1]";
                    const double defect = std::isfinite(v) ? (v < 0.0 ? -v : v - 1.0) : INFINITY;
                    report.violations.push_back({"D_" + std::to_string(l), i, defect, msg.str()});
                }
            }
        }
    }

    const auto& p = model.transition_matrix();
    for (int i = 0; i < k; ++i) {
        const double s = p.row(i).sum();
        if (!(std::abs(s - 1.0) <= kStochasticTol)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "row sum " << s << " != 1";
            report.violations.push_back({"sum(D_l)", i, std::abs(s - 1.0), msg.str()});
        }
    }

    const auto& p0 = model.initial();
    for (int i = 0; i < k; ++i) {
        if (!(p0(i) >= 0.0 && p0(i) <= 1.0)) {
            std::ostringstream msg;
            msg << "entry " << i << " = " << p0(i) << " outside [0,1]";
            report.violations.push_back({"initial", i, std::abs(p0(i)), msg.str()});
        }
    }
    const double total = p0.sum();
    if (!(std::abs(total - 1.0) <= kStochasticTol)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "sums to " << total << " != 1";
        report.violations.push_back({"initial", -1, std::abs(total - 1.0), msg.str()});
    }
    return report;
}

Matrix eval_pgf_matrix(const DBmapModel& model, double x)
{
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("D(x) is only evaluated for x in [0,1]");
    }
    // Horner over the batch index.
    Matrix acc = model.batch(model.max_batch());
    for (int l = model.max_batch() - 1; l >= 0; --l) {
        acc = acc * x + model.batch(l);
    }
    return acc;
}

Matrix derivative_matrix_at_one(const DBmapModel& model, int k)
{
    if (k < 0) {
        throw std::invalid_argument("derivative order must be nonnegative");
    }
    const int n = model.num_states();
    Matrix out = Matrix::Zero(n, n);
    for (int l = k; l <= model.max_batch(); ++l) {
        double falling = 1.0;
        for (int r = 0; r < k; ++r) {
            falling *= static_cast<double>(l - r);
        }
        out += falling * model.batch(l);
    }
    return out;
}

} // namespace transq
