#include "transq/models.hpp"

#include <cmath>

namespace transq::models {

namespace {

Matrix m2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

double binomial_pmf(int n, double p, int l)
{
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(l + 1.0) - std::lgamma(n - l + 1.0);
    return std::exp(log_c + l * std::log(p) + (n - l) * std::log1p(-p));
}

} // namespace

DBmapModel five_batch_two_state()
{
    RowVector init(2);
    init << 1.0, 0.0;
    return DBmapModel::from_matrices(
        {
            m2(0.1, 0.2, 0.05, 0.2),
            m2(0.1, 0.1, 0.1, 0.1),
            m2(0.1, 0.15, 0.1, 0.1),
            m2(0.05, 0.1, 0.1, 0.05),
            m2(0.05, 0.05, 0.1, 0.1),
        },
        init);
}

ServiceLaw five_batch_service()
{
    return ServiceLaw::shifted_poisson(3.0);
}

DBmapModel binomial_two_state()
{
    std::vector<Matrix> batches;
    for (int l = 0; l <= 20; ++l) {
        const double b1 = l <= 10 ? binomial_pmf(10, 0.3, l) : 0.0;
        const double b2 = binomial_pmf(20, 0.6, l);
        batches.push_back(m2(0.6 * b1, 0.4 * b1, 0.1 * b2, 0.9 * b2));
    }
    RowVector init(2);
    init << 1.0, 0.0;
    return DBmapModel::from_matrices(std::move(batches), init);
}

ServiceLaw binomial_two_state_service()
{
    return ServiceLaw::shifted_poisson(2.0);
}

} // namespace transq::models
