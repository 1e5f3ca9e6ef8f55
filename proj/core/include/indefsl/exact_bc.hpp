#pragma once

#include <array>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "indefsl/bc_algebra.hpp"

namespace indefsl {

using Rational = boost::multiprecision::cpp_rational;

/// Gaussian rational re + i*im.
struct GaussRational {
    Rational re = 0;
    Rational im = 0;

    cplx to_complex() const;
};

GaussRational operator+(const GaussRational& a, const GaussRational& b);
GaussRational operator-(const GaussRational& a, const GaussRational& b);
GaussRational operator*(const GaussRational& a, const GaussRational& b);
GaussRational operator/(const GaussRational& a, const GaussRational& b);
GaussRational conj(const GaussRational& a);
bool is_zero(const GaussRational& a);

/// Parses "3", "-1/2", "2i", "1/3-2/5i", "i", "-i", "0.25", "1e-3+2i".
/// Decimals are read exactly. Returns false on malformed input.
bool parse_gauss_rational(const std::string& text, GaussRational& out);

/// Canonical text form, e.g. "1/3-2/5i"; parses back to the same value.
std::string to_string(const GaussRational& v);

using ExactRow = std::array<GaussRational, 4>;

/// Exact x Q y^*.
GaussRational q_form_exact(const ExactRow& x, const ExactRow& y);

/// Same contract as validate_triple, but every identity is decided in
/// rational arithmetic. The returned triple carries the rounded rows,
/// exact = true and all residuals zero.
BoundaryTriple validate_triple_exact(const ExactRow& L, const ExactRow& M, const ExactRow& N);

}  // namespace indefsl
