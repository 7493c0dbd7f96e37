#include "kprobe/polynomial.hpp"

#include <numeric>
#include <string>

#include "kprobe/error.hpp"

namespace kprobe {

namespace {

double monomial(std::span<const double> x, const Exponents& e) {
    double v = 1.0;
    for (std::size_t i = 0; i < e.size(); ++i)
        for (int r = 0; r < e[i]; ++r) v *= x[i];
    return v;
}

}  // namespace

void Polynomial::add_term(const Exponents& exponents, double coeff) {
    if (exponents.size() != num_vars_)
        throw ConfigError("monomial has " + std::to_string(exponents.size()) +
                          " exponents, polynomial has " + std::to_string(num_vars_) + " variables");
    for (int e : exponents)
        if (e < 0) throw ConfigError("negative exponent in monomial");
    terms_[exponents] += coeff;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
}

double Polynomial::operator()(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * monomial(x, e);
    return s;
}

Polynomial Polynomial::derivative(std::size_t i) const {
    Polynomial d(num_vars_);
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0) continue;
        Exponents de = e;
        --de[i];
        d.terms_[de] += c * e[i];
    }
    return d;
}

double Polynomial::partial(std::span<const double> x, std::size_t i) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0) continue;
        Exponents de = e;
        --de[i];
        s += c * e[i] * monomial(x, de);
    }
    return s;
}

double Polynomial::second_partial(std::span<const double> x, std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
        Exponents de = e;
        double f = c;
        f *= de[i];
        if (de[i]-- == 0) continue;
        f *= de[j];
        if (de[j]-- == 0) continue;
        s += f * monomial(x, de);
    }
    return s;
}

Eigen::VectorXd Polynomial::gradient(std::span<const double> x) const {
    Eigen::VectorXd g(num_vars_);
    for (std::size_t i = 0; i < num_vars_; ++i) g(i) = partial(x, i);
    return g;
}

Eigen::MatrixXd Polynomial::hessian(std::span<const double> x) const {
    Eigen::MatrixXd h(num_vars_, num_vars_);
    for (std::size_t i = 0; i < num_vars_; ++i)
        for (std::size_t j = i; j < num_vars_; ++j) h(i, j) = h(j, i) = second_partial(x, i, j);
    return h;
}

Polynomial Polynomial::permuted(std::span<const std::size_t> order) const {
    Polynomial p(num_vars_);
    for (const auto& [e, c] : terms_) {
        Exponents pe(num_vars_);
        for (std::size_t v = 0; v < num_vars_; ++v) pe[v] = e[order[v]];
        p.terms_[pe] = c;
    }
    return p;
}

}  // namespace kprobe
