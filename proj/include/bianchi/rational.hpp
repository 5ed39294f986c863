#pragma once

#include <gmpxx.h>
#include <optional>
#include <stdexcept>
#include <string>

namespace bianchi {

using Int = mpz_class;
using Rat = mpq_class;

// Invariant violations are hard failures (CLI exit code 3), never warnings.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

#define BIANCHI_CHECK(cond, msg)                                              \
    do {                                                                       \
        if (!(cond)) throw ::bianchi::internal_error(msg);                     \
    } while (0)

// mpq_class(p, q) does not canonicalize; this does.
Rat make_rat(const Int& num, const Int& den);
Rat make_rat(long num, long den);

Int floor_rat(const Rat& x);
Int ceil_rat(const Rat& x);

// floor(sqrt(n)) for n >= 0
Int isqrt(const Int& n);
bool is_square(const Int& n, Int& root);

// Exact rational square root: returns root with root^2 == x, if one exists.
std::optional<Rat> sqrt_exact(const Rat& x);

// Canonical text rendering "p/q" (lowest terms, positive denominator,
// "/q" omitted when q == 1). parse_rat round-trips it.
std::string render_rat(const Rat& x);
Rat parse_rat(const std::string& s);

std::string render_int(const Int& x);
Int parse_int(const std::string& s);

} // namespace bianchi
