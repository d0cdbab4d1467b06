#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>

namespace tangdim {

// log of a positive big integer without overflowing double range:
// mpz_get_d_2exp returns d in [0.5,1) and exp with z = d * 2^exp.
inline double log_mpz(const mpz_class& z) {
    long exp = 0;
    double d = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log(d) + static_cast<double>(exp) * M_LN2;
}

inline double log_mpq(const mpq_class& q) {
    return log_mpz(q.get_num()) - log_mpz(q.get_den());
}

// Rounds to nearest double; fine for display and logs, never used in predicates.
inline double to_double(const mpq_class& q) {
    return mpz_get_d(q.get_num_mpz_t()) / mpz_get_d(q.get_den_mpz_t());
}

mpz_class pow_z(const mpz_class& base, unsigned long e);

// floor(sqrt(n)) for small nonnegative n.
long isqrt_long(long n);

// Accepts "3/4", "2", "0.125" (decimals converted exactly). Throws
// std::invalid_argument on anything else or on a zero denominator.
mpq_class parse_rational(const std::string& text);

// Canonical "num/den" (or plain "num" for integers).
std::string rational_str(const mpq_class& q);

}
