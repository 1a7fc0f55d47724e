// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace mmnoma {

template <std::floating_point T>
using BasicComplexVector = std::vector<std::complex<T>>;

using ComplexVector = BasicComplexVector<double>;

/// x^H y
template <std::floating_point T>
std::complex<T> inner(std::span<const std::complex<T>> x, std::span<const std::complex<T>> y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("inner: length mismatch");
    std::complex<T> acc{};
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += std::conj(x[i]) * y[i];
    return acc;
}

template <std::floating_point T>
T squared_norm(std::span<const std::complex<T>> x)
{
    T acc{};
    for (const auto& v : x)
        acc += std::norm(v);
    return acc;
}

template <std::floating_point T>
T norm2(std::span<const std::complex<T>> x)
{
    return std::sqrt(squared_norm(x));
}

template <std::floating_point T>
T max_modulus(std::span<const std::complex<T>> x)
{
    T m{};
    for (const auto& v : x)
        m = std::max(m, std::abs(v));
    return m;
}

// Convenience overloads so std::vector arguments bind without spelling out spans.
inline std::complex<double> inner(const ComplexVector& x, const ComplexVector& y)
{
    return inner<double>(std::span<const std::complex<double>>(x), std::span<const std::complex<double>>(y));
}

inline double squared_norm(const ComplexVector& x)
{
    return squared_norm<double>(std::span<const std::complex<double>>(x));
}

inline double norm2(const ComplexVector& x)
{
    return norm2<double>(std::span<const std::complex<double>>(x));
}

inline double max_modulus(const ComplexVector& x)
{
    return max_modulus<double>(std::span<const std::complex<double>>(x));
}

} // namespace mmnoma
