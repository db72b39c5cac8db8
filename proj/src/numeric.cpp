#include "pdcsample/numeric.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdcsample {

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  BigInt out;
  if (k > n) return out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

BigInt factorial(std::uint64_t n) {
  BigInt out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

double log_of(const BigInt& value) {
  if (sgn(value) < 0) throw std::domain_error("log_of: negative argument");
  if (sgn(value) == 0) return -std::numeric_limits<double>::infinity();
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, value.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exponent) * std::log(2.0);
}

double log_of(const Rational& value) {
  return log_of(BigInt(value.get_num())) - log_of(BigInt(value.get_den()));
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw std::domain_error("rational_from_double: non-finite");
  Rational out;
  mpq_set_d(out.get_mpq_t(), value);
  return out;
}

Rational rational_from_high_prec(const HighPrec& value, unsigned bits) {
  if (value == 0) return Rational(0);
  int exponent = 0;
  HighPrec mantissa = boost::multiprecision::frexp(value, &exponent);  // |m| in [0.5, 1)
  mantissa = boost::multiprecision::ldexp(mantissa, static_cast<int>(bits));
  mantissa = boost::multiprecision::round(mantissa);
  BigInt numerator(mantissa.convert_to<std::string>());
  const int shift = exponent - static_cast<int>(bits);
  Rational out(numerator);
  if (shift >= 0) {
    mpq_mul_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<unsigned long>(shift));
  } else {
    mpq_div_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<unsigned long>(-shift));
  }
  out.canonicalize();
  return out;
}

HighPrec to_high_prec(const Rational& value) {
  HighPrec num(value.get_num().get_str());
  HighPrec den(value.get_den().get_str());
  return num / den;
}

Rational pow(const Rational& base, std::uint64_t exponent) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  return out;  // powers of coprime integers stay coprime
}

std::string to_string(const BigInt& value) { return value.get_str(10); }

}  // namespace pdcsample
