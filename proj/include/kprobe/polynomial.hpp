#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kprobe {

using Exponents = std::vector<int>;

/// Sparse multivariate polynomial with exact evaluation of the value and of
/// all first and second partial derivatives.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::size_t num_vars) : num_vars_(num_vars) {}

    std::size_t num_vars() const noexcept { return num_vars_; }
    const std::map<Exponents, double>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    /// Adds coeff * x^exponents, accumulating onto an existing monomial.
    void add_term(const Exponents& exponents, double coeff);

    /// Total degree of the highest monomial (0 for the empty polynomial).
    int degree() const;

    double operator()(std::span<const double> x) const;
    double partial(std::span<const double> x, std::size_t i) const;
    double second_partial(std::span<const double> x, std::size_t i, std::size_t j) const;

    Eigen::VectorXd gradient(std::span<const double> x) const;
    Eigen::MatrixXd hessian(std::span<const double> x) const;

    /// Exact partial derivative as a polynomial.
    Polynomial derivative(std::size_t i) const;

    /// Same polynomial with variables reordered: variable v of the result is
    /// variable order[v] of this one.
    Polynomial permuted(std::span<const std::size_t> order) const;

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    std::size_t num_vars_ = 0;
    std::map<Exponents, double> terms_;
};

}  // namespace kprobe
