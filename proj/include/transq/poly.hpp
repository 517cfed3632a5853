#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

namespace transq {

/// Truncated power series c_0 + c_1 z + ... + c_N z^N in the generating
/// function variable z.
///
/// truncation_loss carries the mass (value at z = 1) dropped by any degree
/// cap applied while building this series, so that for a probability
/// generating function eval(p, 1) + truncation_loss stays at 1.
class Poly {
public:
    Poly() : coeffs_{0.0} {}
    explicit Poly(std::vector<double> coeffs, double truncation_loss = 0.0);
    Poly(std::initializer_list<double> coeffs);

    static Poly constant(double c) { return Poly(std::vector<double>{c}); }

    std::size_t degree() const { return coeffs_.size() - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double truncation_loss() const { return truncation_loss_; }
    double operator[](std::size_t m) const { return m < coeffs_.size() ? coeffs_[m] : 0.0; }

private:
    std::vector<double> coeffs_;
    double truncation_loss_ = 0.0;
};

Poly add(const Poly& a, const Poly& b);
Poly scale(const Poly& a, double c);

/// Convolution of a and b. Terms above max_degree are dropped and their value
/// at z = 1 is added to the truncation loss of the result.
Poly mul(const Poly& a, const Poly& b, std::optional<std::size_t> max_degree = std::nullopt);

/// p(a z + b) for a, b >= 0 with a + b <= 1; the degree is kept.
Poly affine_compose(const Poly& p, double a, double b);

/// k-th formal derivative.
Poly derivative(const Poly& p, int k);
double eval(const Poly& p, double x);
/// Coefficient of z^m, zero past the stored degree.
double coefficient(const Poly& p, std::size_t m);

/// A generating function per background state.
struct PgfVector {
    std::vector<Poly> entries;

    std::size_t size() const { return entries.size(); }
    /// Sum over states, G(z) = g(z) 1^T.
    Poly total() const;
    double truncation_loss() const;
};

} // namespace transq
