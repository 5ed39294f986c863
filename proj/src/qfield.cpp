#include "bianchi/qfield.hpp"

namespace bianchi {

namespace {

bool square_free(long m) {
    for (long d = 2; d * d <= m; ++d)
        if (m % (d * d) == 0) return false;
    return true;
}

} // namespace

FieldCtx::FieldCtx(long m_) : m(m_) {
    if (m < 1) throw std::domain_error("FieldCtx: m must be positive");
    if (m == 1 || m == 3)
        throw std::domain_error("FieldCtx: excluded case m = " + std::to_string(m));
    if (!square_free(m))
        throw std::domain_error("FieldCtx: m = " + std::to_string(m) + " is not square-free");
    three_mod_four = (m % 4 == 3);
    discriminant = three_mod_four ? -m : -4 * m;
    omega_trace = three_mod_four ? -1 : 0;
    omega_norm = three_mod_four ? Int((1 + m) / 4) : Int(m);
}

std::string AlgInt::str() const { return a.get_str() + " + " + b.get_str() + "*w"; }

AlgInt mul(const AlgInt& x, const AlgInt& y, const FieldCtx& ctx) {
    // w^2 = t*w - n with t = trace(w), n = norm(w)
    Int bd = x.b * y.b;
    return {x.a * y.a - ctx.omega_norm * bd, x.a * y.b + x.b * y.a + ctx.omega_trace * bd};
}

AlgInt conj(const AlgInt& x, const FieldCtx& ctx) {
    // conj(w) = t - w
    return {x.a + ctx.omega_trace * x.b, -x.b};
}

Int norm(const AlgInt& x, const FieldCtx& ctx) {
    return x.a * x.a + ctx.omega_trace * x.a * x.b + ctx.omega_norm * x.b * x.b;
}

bool lex_less(const AlgInt& x, const AlgInt& y) {
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
}

namespace {

// Splits "<lhs> + <rhs>*w"; both parts are rendered by render_*.
std::pair<std::string, std::string> split_basis(const std::string& s) {
    auto plus = s.rfind(" + ");
    auto star = s.rfind("*w");
    if (plus == std::string::npos || star == std::string::npos || star < plus)
        throw std::domain_error("parse: malformed element: " + s);
    return {s.substr(0, plus), s.substr(plus + 3, star - plus - 3)};
}

} // namespace

AlgInt parse_algint(const std::string& s) {
    auto [sa, sb] = split_basis(s);
    return {parse_int(sa), parse_int(sb)};
}

std::string FieldElem::str() const { return render_rat(x) + " + " + render_rat(y) + "*w"; }

FieldElem parse_fieldelem(const std::string& s) {
    auto [sx, sy] = split_basis(s);
    return {parse_rat(sx), parse_rat(sy)};
}

FieldElem mul(const FieldElem& u, const FieldElem& v, const FieldCtx& ctx) {
    Rat bd = u.y * v.y;
    return {u.x * v.x - Rat(ctx.omega_norm) * bd,
            u.x * v.y + u.y * v.x + Rat(ctx.omega_trace) * bd};
}

FieldElem conj(const FieldElem& u, const FieldCtx& ctx) {
    return {u.x + Rat(ctx.omega_trace) * u.y, -u.y};
}

Rat norm(const FieldElem& u, const FieldCtx& ctx) {
    return u.x * u.x + Rat(ctx.omega_trace) * u.x * u.y + Rat(ctx.omega_norm) * u.y * u.y;
}

FieldElem div(const FieldElem& u, const FieldElem& v, const FieldCtx& ctx) {
    Rat n = norm(v, ctx);
    if (n == 0) throw std::domain_error("FieldElem division by zero");
    FieldElem w = mul(u, conj(v, ctx), ctx);
    return {w.x / n, w.y / n};
}

Coords coords(const FieldElem& u, const FieldCtx& ctx) {
    if (ctx.three_mod_four) return {u.x - u.y / 2, u.y / 2};
    return {u.x, u.y};
}

FieldElem from_coords(const Coords& c, const FieldCtx& ctx) {
    if (ctx.three_mod_four) return {c.x + c.y, c.y * 2};
    return {c.x, c.y};
}

bool lex_less(const Coords& a, const Coords& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
}

bool is_integral(const FieldElem& u) { return u.x.get_den() == 1 && u.y.get_den() == 1; }

AlgInt to_algint(const FieldElem& u) {
    BIANCHI_CHECK(is_integral(u), "to_algint: element not integral");
    return {u.x.get_num(), u.y.get_num()};
}

} // namespace bianchi
