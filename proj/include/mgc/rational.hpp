/**
 * Exact rational and integer scalars.
 */

#ifndef MGC_RATIONAL_HPP
#define MGC_RATIONAL_HPP

#include <string>
#include <boost/multiprecision/gmp.hpp>

namespace mgc {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

/**
 * Parse "p", "-p" or "p/q" into a reduced rational.
 */
Rational parseRational(const std::string& text);

/**
 * Format as "p" or "p/q".
 */
std::string formatRational(const Rational& value);

}   // namespace mgc

#endif
