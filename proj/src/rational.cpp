#include "bianchi/rational.hpp"

namespace bianchi {

Rat make_rat(const Int& num, const Int& den) {
    BIANCHI_CHECK(den != 0, "make_rat: zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

Rat make_rat(long num, long den) { return make_rat(Int(num), Int(den)); }

Int floor_rat(const Rat& x) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

Int ceil_rat(const Rat& x) {
    Int q;
    mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

Int isqrt(const Int& n) {
    BIANCHI_CHECK(n >= 0, "isqrt: negative argument");
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

bool is_square(const Int& n, Int& root) {
    if (n < 0) return false;
    root = isqrt(n);
    return root * root == n;
}

std::optional<Rat> sqrt_exact(const Rat& x) {
    if (x < 0) return std::nullopt;
    Int rn, rd;
    if (!is_square(x.get_num(), rn)) return std::nullopt;
    if (!is_square(x.get_den(), rd)) return std::nullopt;
    return make_rat(rn, rd);
}

std::string render_rat(const Rat& x) {
    if (x.get_den() == 1) return x.get_num().get_str();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return make_rat(parse_int(s), Int(1));
    return make_rat(parse_int(s.substr(0, slash)), parse_int(s.substr(slash + 1)));
}

std::string render_int(const Int& x) { return x.get_str(); }

Int parse_int(const std::string& s) {
    Int v;
    if (mpz_set_str(v.get_mpz_t(), s.c_str(), 10) != 0)
        throw std::domain_error("parse_int: not an integer: " + s);
    return v;
}

} // namespace bianchi
