#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace pdcsample {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Real arithmetic for tilt solving and reporting; 50 decimal digits.
using HighPrec = boost::multiprecision::cpp_bin_float_50;

BigInt binomial(std::uint64_t n, std::uint64_t k);
BigInt factorial(std::uint64_t n);

/// Natural log of a positive big integer, accurate to double precision
/// regardless of magnitude. Returns -inf for zero.
double log_of(const BigInt& value);

/// log(num) - log(den) without forming the quotient as a double.
double log_of(const Rational& value);

/// Exact value of a finite double as a rational (always dyadic).
Rational rational_from_double(double value);

/// Dyadic rational with `bits` significant bits nearest to `value`.
Rational rational_from_high_prec(const HighPrec& value, unsigned bits);

HighPrec to_high_prec(const Rational& value);

Rational pow(const Rational& base, std::uint64_t exponent);

std::string to_string(const BigInt& value);

}  // namespace pdcsample
