#include "bianchi/isom.hpp"

#include <algorithm>

namespace bianchi {

namespace {

bool lex_positive(const AlgInt& v) { return v.a > 0 || (v.a == 0 && v.b > 0); }

} // namespace

bool Matrix2::operator<(const Matrix2& o) const {
    if (!(a == o.a)) return lex_less(a, o.a);
    if (!(b == o.b)) return lex_less(b, o.b);
    if (!(c == o.c)) return lex_less(c, o.c);
    return lex_less(d, o.d);
}

bool Matrix2::is_identity() const {
    return a == AlgInt(1, 0) && b == AlgInt(0, 0) && c == AlgInt(0, 0) && d == AlgInt(1, 0);
}

Matrix2 Matrix2::make(const AlgInt& a, const AlgInt& b, const AlgInt& c, const AlgInt& d,
                      const FieldCtx& ctx) {
    AlgInt det = mul(a, d, ctx) - mul(b, c, ctx);
    BIANCHI_CHECK(det == AlgInt(1, 0), "Matrix2: determinant != 1");
    Matrix2 g{a, b, c, d};
    for (const AlgInt* e : {&g.c, &g.d, &g.a}) {
        if (e->is_zero()) continue;
        if (!lex_positive(*e)) {
            g.a = -g.a;
            g.b = -g.b;
            g.c = -g.c;
            g.d = -g.d;
        }
        break;
    }
    return g;
}

Matrix2 Matrix2::identity() { return {AlgInt(1, 0), AlgInt(0, 0), AlgInt(0, 0), AlgInt(1, 0)}; }

Matrix2 Matrix2::translation(const AlgInt& t, const FieldCtx& ctx) {
    return make(AlgInt(1, 0), t, AlgInt(0, 0), AlgInt(1, 0), ctx);
}

Matrix2 Matrix2::mul(const Matrix2& o, const FieldCtx& ctx) const {
    return make(bianchi::mul(a, o.a, ctx) + bianchi::mul(b, o.c, ctx),
                bianchi::mul(a, o.b, ctx) + bianchi::mul(b, o.d, ctx),
                bianchi::mul(c, o.a, ctx) + bianchi::mul(d, o.c, ctx),
                bianchi::mul(c, o.b, ctx) + bianchi::mul(d, o.d, ctx), ctx);
}

Matrix2 Matrix2::inverse(const FieldCtx& ctx) const { return make(d, -b, -c, a, ctx); }

std::string Matrix2::str() const {
    return "[" + a.str() + ", " + b.str() + "; " + c.str() + ", " + d.str() + "]";
}

PointH apply(const Matrix2& g, const PointH& p, const FieldCtx& ctx) {
    FieldElem cz_d = mul(FieldElem(g.c), p.z, ctx) + FieldElem(g.d);
    FieldElem az_b = mul(FieldElem(g.a), p.z, ctx) + FieldElem(g.b);
    if (p.sq_height == 0) {
        Rat nc = norm(cz_d, ctx);
        BIANCHI_CHECK(nc != 0, "apply: boundary point maps to infinity");
        return {div(az_b, cz_d, ctx), Rat(0)};
    }
    Rat D = norm(cz_d, ctx) + p.sq_height * Rat(norm(g.c, ctx));
    BIANCHI_CHECK(D > 0, "apply: vanishing denominator");
    FieldElem num = mul(az_b, conj(cz_d, ctx), ctx);
    FieldElem corr = mul(FieldElem(g.a), conj(FieldElem(g.c), ctx), ctx);
    num = num + FieldElem{corr.x * p.sq_height, corr.y * p.sq_height};
    return {FieldElem{num.x / D, num.y / D}, p.sq_height / (D * D)};
}

FieldElem apply_cusp(const Matrix2& g, const FieldElem& z, const FieldCtx& ctx) {
    return apply(g, PointH{z, Rat(0)}, ctx).z;
}

namespace {

void push_unique(std::vector<Matrix2>& out, const Matrix2& g) {
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
}

} // namespace

std::vector<Matrix2> identify(const PointH& p, const PointH& q, const FieldCtx& ctx) {
    BIANCHI_CHECK(p.sq_height > 0 && q.sq_height > 0, "identify: boundary input");
    std::vector<Matrix2> out;
    // r/rho must be rational (r^2, rho^2 are; the quotient square must be a
    // rational square, else no matrix exists).
    auto ror = sqrt_exact(p.sq_height / q.sq_height);
    if (!ror) return out;
    Rat r_over_rho = *ror;          // r/rho
    Rat r_rho = p.sq_height / r_over_rho; // r*rho = r^2/(r/rho)
    Rat c_norm_max = 1 / r_rho;

    // Enumerate c = j + k*w with 0 < norm(c) <= c_norm_max.
    Int jmax, kmax;
    if (!ctx.three_mod_four) {
        jmax = isqrt(ceil_rat(c_norm_max)) + 1;
        kmax = isqrt(ceil_rat(c_norm_max / ctx.m)) + 1;
    } else {
        jmax = isqrt(ceil_rat(c_norm_max * (Rat(1) + make_rat(1, ctx.m)))) + 1;
        kmax = isqrt(ceil_rat(4 * c_norm_max / ctx.m)) + 1;
    }
    for (Int j = -jmax; j <= jmax; ++j)
        for (Int k = -kmax; k <= kmax; ++k) {
            AlgInt c(j, k);
            if (c.is_zero()) continue;
            Int nc = norm(c, ctx);
            if (Rat(nc) > c_norm_max) continue;
            // |c z + d|^2 = T with T = r/rho - r^2 |c|^2
            Rat T = r_over_rho - p.sq_height * Rat(nc);
            if (T < 0) continue;
            FieldElem u = mul(FieldElem(c), p.z, ctx);
            // d = q0 + s*w; basis-coordinate bound on s from the norm form.
            // y-part of u + d is (u.y + s); norm >= weight * (u.y + s)^2
            Rat weight = ctx.three_mod_four ? make_rat(ctx.m, 4) : Rat(ctx.m);
            // |u.y + s| <= sqrt(T/weight)
            Rat span_sq = T / weight;
            Int span = isqrt(ceil_rat(span_sq)) + 1;
            Int s_lo = floor_rat(-u.y) - span, s_hi = ceil_rat(-u.y) + span;
            for (Int s = s_lo; s <= s_hi; ++s) {
                Rat Y = u.y + Rat(s);
                Rat disc = T - weight * Y * Y;
                if (disc < 0) continue;
                auto root = sqrt_exact(disc);
                if (!root) continue;
                for (int sign = 0; sign < (disc == 0 ? 1 : 2); ++sign) {
                    Rat rt = sign ? -*root : *root;
                    // X = u.x + q0 solves the norm equation
                    Rat X = ctx.three_mod_four ? (Y / 2 + rt) : rt;
                    Rat q0r = X - u.x;
                    if (q0r.get_den() != 1) continue;
                    AlgInt d(q0r.get_num(), s);
                    FieldElem czd = u + FieldElem(d);
                    BIANCHI_CHECK(norm(czd, ctx) == T, "identify: norm equation broken");
                    if (!is_unimodular(c, d, ctx)) continue;
                    // a = c*z2 + (rho/r) * conj(c*z1 + d)
                    FieldElem ae = mul(FieldElem(c), q.z, ctx);
                    FieldElem cj = conj(czd, ctx);
                    ae = ae + FieldElem{cj.x / r_over_rho, cj.y / r_over_rho};
                    if (!is_integral(ae)) continue;
                    AlgInt a = to_algint(ae);
                    // b from the determinant
                    FieldElem be = div(FieldElem(mul(a, d, ctx) - AlgInt(1, 0)), FieldElem(c), ctx);
                    if (!is_integral(be)) continue;
                    AlgInt b = to_algint(be);
                    Matrix2 g = Matrix2::make(a, b, c, d, ctx);
                    if (apply(g, p, ctx) == q) push_unique(out, g);
                }
            }
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Matrix2> identify_with_translations(const PointH& p, const PointH& q,
                                                const FieldCtx& ctx) {
    std::vector<Matrix2> out = identify(p, q, ctx);
    if (p.sq_height == q.sq_height) {
        FieldElem diff = q.z - p.z;
        if (is_integral(diff)) push_unique(out, Matrix2::translation(to_algint(diff), ctx));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool FiniteGroup::contains(const Matrix2& g) const { return index_of(g) >= 0; }

int FiniteGroup::index_of(const Matrix2& g) const {
    auto it = std::find(elems.begin(), elems.end(), g);
    return it == elems.end() ? -1 : static_cast<int>(it - elems.begin());
}

FiniteGroup FiniteGroup::trivial() { return FiniteGroup{{Matrix2::identity()}}; }

FiniteGroup FiniteGroup::closure(std::vector<Matrix2> gens, const FieldCtx& ctx) {
    std::vector<Matrix2> elems{Matrix2::identity()};
    for (const Matrix2& g : gens)
        if (std::find(elems.begin(), elems.end(), g) == elems.end()) elems.push_back(g);
    bool grew = true;
    while (grew) {
        grew = false;
        size_t n = elems.size();
        BIANCHI_CHECK(n <= 24, "FiniteGroup::closure: order exceeds finite bound");
        for (size_t i = 0; i < n && !grew; ++i)
            for (size_t j = 0; j < n && !grew; ++j) {
                Matrix2 g = elems[i].mul(elems[j], ctx);
                if (std::find(elems.begin(), elems.end(), g) == elems.end()) {
                    elems.push_back(g);
                    grew = true;
                }
            }
    }
    std::sort(elems.begin() + 1, elems.end());
    // identity stays first
    auto id = std::find_if(elems.begin(), elems.end(),
                           [](const Matrix2& g) { return g.is_identity(); });
    std::iter_swap(elems.begin(), id);
    std::sort(elems.begin() + 1, elems.end());
    return FiniteGroup{std::move(elems)};
}

std::vector<std::vector<int>> FiniteGroup::multiplication_table(const FieldCtx& ctx) const {
    long n = order();
    std::vector<std::vector<int>> t(n, std::vector<int>(n, -1));
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            int k = index_of(elems[i].mul(elems[j], ctx));
            BIANCHI_CHECK(k >= 0, "FiniteGroup: not closed under multiplication");
            t[i][j] = k;
        }
    return t;
}

long FiniteGroup::element_order(const Matrix2& g, const FieldCtx& ctx) const {
    Matrix2 acc = g;
    long k = 1;
    while (!acc.is_identity()) {
        acc = acc.mul(g, ctx);
        ++k;
        BIANCHI_CHECK(k <= 12, "element order exceeds finite bound");
    }
    return k;
}

FiniteGroup stabilizer(const PointH& p, const FieldCtx& ctx) {
    BIANCHI_CHECK(p.sq_height > 0, "stabilizer: boundary point");
    FiniteGroup g = FiniteGroup::closure(identify_with_translations(p, p, ctx), ctx);
    static const long allowed[] = {1, 2, 3, 4, 6, 12};
    BIANCHI_CHECK(std::find(std::begin(allowed), std::end(allowed), g.order()) !=
                      std::end(allowed),
                  "stabilizer: unexpected order");
    return g;
}

FiniteGroup edge_stabilizer(const PointH& p, const PointH& q, const FieldCtx& ctx) {
    BIANCHI_CHECK(!(p == q), "edge_stabilizer: equal endpoints");
    FiniteGroup sp = stabilizer(p, ctx);
    std::vector<Matrix2> fix;
    for (const Matrix2& g : sp.elems)
        if (apply(g, q, ctx) == q) fix.push_back(g);
    return FiniteGroup::closure(std::move(fix), ctx);
}

Abelianization abelianization(const FiniteGroup& g, const FieldCtx& ctx) {
    long n = g.order();
    auto table = g.multiplication_table(ctx);
    // Cayley-table presentation: generators e_0..e_{n-1}, relations
    // e_i + e_j - e_{table[i][j]} = 0 (abelianized).
    IntMatrix rel(n, n * n);
    long col = 0;
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j, ++col) {
            rel.at(i, col) += 1;
            rel.at(j, col) += 1;
            rel.at(table[i][j], col) -= 1;
        }
    SmithResult s = smith_normal_form(rel, /*with_transforms=*/true);
    Abelianization ab;
    std::vector<long> torsion_rows;
    std::vector<Int> factors;
    for (long i = 0; i < static_cast<long>(s.diag.size()); ++i)
        if (s.diag[i] > 1) {
            torsion_rows.push_back(i);
            factors.push_back(s.diag[i]);
        }
    // Finite group: no free part can survive.
    long free_rank = n - s.rank;
    BIANCHI_CHECK(free_rank == 0, "abelianization of finite group has free rank");
    ab.group = AbelianGroup::from_factors(0, factors);
    // Element i has canonical coordinates (L * e_i) at the torsion rows,
    // reduced mod the invariant.
    ab.coords.assign(n, std::vector<Int>(torsion_rows.size(), Int(0)));
    for (long i = 0; i < n; ++i)
        for (size_t t = 0; t < torsion_rows.size(); ++t) {
            Int v = s.L.at(torsion_rows[t], i);
            Int m = s.diag[torsion_rows[t]];
            mpz_fdiv_r(v.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
            ab.coords[i][t] = v;
        }
    // from_factors keeps the invariant list; coordinate order must match.
    BIANCHI_CHECK(ab.group.torsion == factors, "abelianization: coordinate order mismatch");
    return ab;
}

} // namespace bianchi
