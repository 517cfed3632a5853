#include "transq/poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace transq {

Poly::Poly(std::vector<double> coeffs, double truncation_loss)
    : coeffs_(std::move(coeffs)), truncation_loss_(truncation_loss)
{
    if (coeffs_.empty()) {
        coeffs_.push_back(0.0);
    }
}

Poly::Poly(std::initializer_list<double> coeffs) : Poly(std::vector<double>(coeffs)) {}

Poly add(const Poly& a, const Poly& b)
{
    std::vector<double> c(std::max(a.coeffs().size(), b.coeffs().size()), 0.0);
    for (std::size_t m = 0; m < c.size(); ++m) {
        c[m] = a[m] + b[m];
    }
    return Poly(std::move(c), a.truncation_loss() + b.truncation_loss());
}

Poly scale(const Poly& a, double c)
{
    std::vector<double> out(a.coeffs());
    for (auto& x : out) {
        x *= c;
    }
    return Poly(std::move(out), a.truncation_loss() * std::abs(c));
}

Poly mul(const Poly& a, const Poly& b, std::optional<std::size_t> max_degree)
{
    const auto& ac = a.coeffs();
    const auto& bc = b.coeffs();
    const std::size_t full = ac.size() + bc.size() - 1;
    const std::size_t kept = max_degree ? std::min(full, *max_degree + 1) : full;

    std::vector<double> c(kept, 0.0);
    double dropped = 0.0;
    for (std::size_t i = 0; i < ac.size(); ++i) {
        if (ac[i] == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < bc.size(); ++j) {
            const double v = ac[i] * bc[j];
            if (i + j < kept) {
                c[i + j] += v;
            } else {
                dropped += v;
            }
        }
    }
    // The missing part of (a + la)(b + lb) at z = 1 beyond the stored product.
    const double la = a.truncation_loss();
    const double lb = b.truncation_loss();
    const double loss = dropped + la * (eval(b, 1.0) + lb) + lb * eval(a, 1.0);
    return Poly(std::move(c), loss);
}

Poly affine_compose(const Poly& p, double a, double b)
{
    if (!(a >= 0.0 && b >= 0.0 && a + b <= 1.0 + 1e-12)) {
        throw std::domain_error("affine_compose needs a, b >= 0 and a + b <= 1");
    }
    const auto& c = p.coeffs();
    const std::size_t n = c.size();
    // Horner: acc <- acc * (a z + b) + c_m, from the top coefficient down.
    std::vector<double> acc(n, 0.0);
    std::size_t len = 1;
    acc[0] = c[n - 1];
    for (std::size_t m = n - 1; m-- > 0;) {
        for (std::size_t r = len; r-- > 0;) {
            acc[r + 1] += a * acc[r];
            acc[r] *= b;
        }
        ++len;
        acc[0] += c[m];
    }
    return Poly(std::move(acc), p.truncation_loss());
}

Poly derivative(const Poly& p, int k)
{
    if (k < 0) {
        throw std::invalid_argument("derivative order must be nonnegative");
    }
    const auto& c = p.coeffs();
    const auto uk = static_cast<std::size_t>(k);
    if (uk >= c.size()) {
        return Poly::constant(0.0);
    }
    std::vector<double> out(c.size() - uk);
    for (std::size_t m = uk; m < c.size(); ++m) {
        double falling = 1.0;
        for (std::size_t r = 0; r < uk; ++r) {
            falling *= static_cast<double>(m - r);
        }
        out[m - uk] = falling * c[m];
    }
    return Poly(std::move(out));
}

double eval(const Poly& p, double x)
{
    const auto& c = p.coeffs();
    double acc = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) {
        acc = acc * x + c[m];
    }
    return acc;
}

double coefficient(const Poly& p, std::size_t m)
{
    return p[m];
}

Poly PgfVector::total() const
{
    Poly sum = Poly::constant(0.0);
    for (const auto& e : entries) {
        sum = add(sum, e);
    }
    return sum;
}

double PgfVector::truncation_loss() const
{
    double loss = 0.0;
    for (const auto& e : entries) {
        loss += e.truncation_loss();
    }
    return loss;
}

} // namespace transq
