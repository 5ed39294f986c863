#include "bianchi/arith.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

namespace bianchi {

// ---------------------------------------------------------------------------
// AbelianGroup

AbelianGroup AbelianGroup::from_factors(long free_rank, const std::vector<Int>& factors) {
    // Split every factor into prime powers, then reassemble invariant factors.
    std::map<Int, std::vector<int>> expts; // prime -> exponents, one per cyclic factor
    for (const Int& f : factors) {
        BIANCHI_CHECK(f >= 1, "AbelianGroup: factor < 1");
        Int n = f;
        for (Int p = 2; p * p <= n; ++p) {
            if (n % p == 0) {
                int e = 0;
                while (n % p == 0) { n /= p; ++e; }
                expts[p].push_back(e);
            }
        }
        if (n > 1) expts[n].push_back(1);
    }
    size_t slots = 0;
    for (auto& [p, es] : expts) {
        std::sort(es.begin(), es.end(), std::greater<int>());
        slots = std::max(slots, es.size());
    }
    std::vector<Int> inv(slots, Int(1));
    for (auto& [p, es] : expts)
        for (size_t i = 0; i < es.size(); ++i) {
            Int pk;
            mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), es[i]);
            inv[i] *= pk; // inv[0] largest
        }
    std::reverse(inv.begin(), inv.end()); // ascending divisibility d1 | d2 | ...
    AbelianGroup g;
    g.free_rank = free_rank;
    g.torsion = std::move(inv);
    return g;
}

std::vector<Int> AbelianGroup::primary_factors() const {
    std::vector<Int> out;
    for (const Int& d : torsion) {
        Int n = d;
        for (Int p = 2; p * p <= n; ++p)
            if (n % p == 0) {
                Int pk(1);
                while (n % p == 0) { n /= p; pk *= p; }
                out.push_back(pk);
            }
        if (n > 1) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::string power_group(const std::string& base, long e) {
    if (e == 1) return base;
    bool simple = base.find('/') == std::string::npos;
    std::string b = simple ? base : "(" + base + ")";
    return b + "^" + std::to_string(e);
}

} // namespace

std::string AbelianGroup::render_invariant() const {
    if (is_trivial()) return "{1}";
    std::vector<std::string> parts;
    if (free_rank > 0) parts.push_back(power_group("Z", free_rank));
    for (auto it = torsion.rbegin(); it != torsion.rend(); ++it)
        parts.push_back("Z/" + it->get_str());
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? " x " : "") + parts[i];
    return out;
}

std::string AbelianGroup::render_primary() const {
    if (is_trivial()) return "0";
    std::vector<std::string> parts;
    if (free_rank > 0) parts.push_back(power_group("Z", free_rank));
    auto pf = primary_factors();
    for (size_t i = 0; i < pf.size();) {
        size_t j = i;
        while (j < pf.size() && pf[j] == pf[i]) ++j;
        parts.push_back(power_group("Z/" + pf[i].get_str(), static_cast<long>(j - i)));
        i = j;
    }
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? " (+) " : "") + parts[i];
    return out;
}

// ---------------------------------------------------------------------------
// Ideal HNF arithmetic

namespace {

// Row-reduce integer vectors (u, v) meaning u + v*w to the basis
// { (A, 0), (B, C) } with A, C > 0, 0 <= B < A.
struct Vec2 {
    Int u, v;
};

IdealBasis hnf_of_rows(std::vector<Vec2> rows) {
    // Euclid on the w-coefficients.
    while (true) {
        int piv = -1;
        for (size_t i = 0; i < rows.size(); ++i)
            if (rows[i].v != 0 && (piv < 0 || abs(rows[i].v) < abs(rows[piv].v)))
                piv = static_cast<int>(i);
        BIANCHI_CHECK(piv >= 0, "hnf: rank-deficient module (no w-component)");
        bool done = true;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) == piv || rows[i].v == 0) continue;
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), rows[i].v.get_mpz_t(), rows[piv].v.get_mpz_t());
            rows[i].u -= q * rows[piv].u;
            rows[i].v -= q * rows[piv].v;
            if (rows[i].v != 0) done = false;
        }
        if (done) {
            if (rows[piv].v < 0) { rows[piv].u = -rows[piv].u; rows[piv].v = -rows[piv].v; }
            Vec2 second = rows[piv];
            Int A(0);
            for (size_t i = 0; i < rows.size(); ++i) {
                if (static_cast<int>(i) == piv) continue;
                Int g;
                mpz_gcd(g.get_mpz_t(), A.get_mpz_t(), rows[i].u.get_mpz_t());
                A = g;
            }
            BIANCHI_CHECK(A != 0, "hnf: rank-deficient module (no rational part)");
            Int B;
            mpz_fdiv_r(B.get_mpz_t(), second.u.get_mpz_t(), A.get_mpz_t());
            return {A, B, second.v};
        }
    }
}

std::vector<Vec2> module_rows(const std::vector<AlgInt>& gens, const FieldCtx& ctx) {
    std::vector<Vec2> rows;
    for (const AlgInt& g : gens) {
        if (g.is_zero()) continue;
        AlgInt gw = mul(g, AlgInt(0, 1), ctx);
        rows.push_back({g.a, g.b});
        rows.push_back({gw.a, gw.b});
    }
    return rows;
}

} // namespace

IdealBasis ideal_from_generators(const std::vector<AlgInt>& gens, const FieldCtx& ctx) {
    auto rows = module_rows(gens, ctx);
    BIANCHI_CHECK(!rows.empty(), "ideal_from_generators: all generators zero");
    return hnf_of_rows(std::move(rows));
}

IdealBasis ideal_mul(const IdealBasis& I, const IdealBasis& J, const FieldCtx& ctx) {
    AlgInt i1(I.A, 0), i2(I.B, I.C), j1(J.A, 0), j2(J.B, J.C);
    std::vector<AlgInt> gens = {mul(i1, j1, ctx), mul(i1, j2, ctx), mul(i2, j1, ctx),
                                mul(i2, j2, ctx)};
    return ideal_from_generators(gens, ctx);
}

IdealBasis ideal_conj(const IdealBasis& I, const FieldCtx& ctx) {
    return ideal_from_generators({conj(AlgInt(I.A, 0), ctx), conj(AlgInt(I.B, I.C), ctx)}, ctx);
}

bool is_unimodular(const AlgInt& mu, const AlgInt& lam, const FieldCtx& ctx) {
    if (mu.is_zero() && lam.is_zero())
        throw std::domain_error("is_unimodular: both arguments zero");
    IdealBasis I = ideal_from_generators({mu, lam}, ctx);
    return I.A == 1 && I.C == 1;
}

std::optional<std::pair<AlgInt, AlgInt>> unimodular_bezout(const AlgInt& mu, const AlgInt& lam,
                                                           const FieldCtx& ctx) {
    // Same reduction as hnf_of_rows, tracking each row as x*mu + y*lam.
    struct TRow {
        Int u, v;
        AlgInt x, y;
    };
    std::vector<TRow> rows;
    auto push = [&](const AlgInt& g, const AlgInt& x, const AlgInt& y) {
        rows.push_back({g.a, g.b, x, y});
        AlgInt gw = mul(g, AlgInt(0, 1), ctx);
        rows.push_back({gw.a, gw.b, mul(x, AlgInt(0, 1), ctx), mul(y, AlgInt(0, 1), ctx)});
    };
    if (!mu.is_zero()) push(mu, AlgInt(1, 0), AlgInt(0, 0));
    if (!lam.is_zero()) push(lam, AlgInt(0, 0), AlgInt(1, 0));
    if (rows.empty()) return std::nullopt;

    // Clear the w-column except for one pivot row.
    while (true) {
        int piv = -1;
        for (size_t i = 0; i < rows.size(); ++i)
            if (rows[i].v != 0 && (piv < 0 || abs(rows[i].v) < abs(rows[piv].v)))
                piv = static_cast<int>(i);
        if (piv < 0) break;
        bool done = true;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) == piv || rows[i].v == 0) continue;
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), rows[i].v.get_mpz_t(), rows[piv].v.get_mpz_t());
            rows[i].u -= q * rows[piv].u;
            rows[i].v -= q * rows[piv].v;
            AlgInt qa(q, 0);
            rows[i].x = rows[i].x - mul(qa, rows[piv].x, ctx);
            rows[i].y = rows[i].y - mul(qa, rows[piv].y, ctx);
            if (rows[i].v != 0) done = false;
        }
        if (done) break;
    }
    // Euclid over the rational-integer rows: their gcd generates the
    // ideal's intersection with Z, which is (1) exactly when unimodular.
    std::vector<size_t> zrows;
    for (size_t i = 0; i < rows.size(); ++i)
        if (rows[i].v == 0 && rows[i].u != 0) zrows.push_back(i);
    if (zrows.empty()) return std::nullopt;
    size_t g = zrows[0];
    for (size_t k = 1; k < zrows.size(); ++k) {
        size_t i = zrows[k];
        while (rows[i].u != 0) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), rows[g].u.get_mpz_t(), rows[i].u.get_mpz_t());
            AlgInt qa(q, 0);
            rows[g].u -= q * rows[i].u;
            rows[g].x = rows[g].x - mul(qa, rows[i].x, ctx);
            rows[g].y = rows[g].y - mul(qa, rows[i].y, ctx);
            std::swap(rows[g], rows[i]);
        }
    }
    if (abs(rows[g].u) != 1) return std::nullopt;
    if (rows[g].u == -1) {
        rows[g].x = -rows[g].x;
        rows[g].y = -rows[g].y;
    }
    AlgInt check = mul(rows[g].x, mu, ctx) + mul(rows[g].y, lam, ctx);
    BIANCHI_CHECK(check == AlgInt(1, 0), "bezout: combination does not reach 1");
    return std::make_pair(rows[g].x, rows[g].y);
}

// ---------------------------------------------------------------------------
// Binary quadratic forms and the class group

Form principal_form(const FieldCtx& ctx) {
    if (ctx.three_mod_four) return {Int(1), Int(1), Int((1 + ctx.m) / 4)};
    return {Int(1), Int(0), Int(ctx.m)};
}

Form reduce_form(Form f) {
    BIANCHI_CHECK(f.a > 0, "reduce_form: not positive definite");
    while (true) {
        // Normalize: -a < b <= a
        if (f.b > f.a || f.b <= -f.a) {
            Int r, q;
            // b' = b - 2aq with b' in (-a, a]
            Int twoa = 2 * f.a;
            mpz_fdiv_r(r.get_mpz_t(), f.b.get_mpz_t(), twoa.get_mpz_t()); // 0 <= r < 2a
            if (r > f.a) r -= twoa;
            q = (f.b - r) / twoa;
            f.c = f.c - q * f.b + q * q * f.a;
            f.b = r;
        }
        if (f.a > f.c) {
            std::swap(f.a, f.c);
            f.b = -f.b;
            continue;
        }
        if (f.a == f.c && f.b < 0) f.b = -f.b;
        return f;
    }
}

std::vector<Form> reduced_forms(const FieldCtx& ctx) {
    Int D(ctx.discriminant);
    std::vector<Form> out;
    // |b| <= a <= c, b == D mod 2, b^2 - 4ac = D, primitive,
    // b >= 0 when |b| == a or a == c.
    for (Int a = 1; 3 * a * a <= -D; ++a) {
        for (Int b = -a + 1; b <= a; ++b) {
            if (((b - D) % 2) != 0) continue;
            Int num = b * b - D;
            if (num % (4 * a) != 0) continue;
            Int c = num / (4 * a);
            if (c < a) continue;
            if (b < 0 && a == c) continue;
            Int g, g2;
            mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            mpz_gcd(g2.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
            if (g2 != 1) continue;
            out.push_back({a, b, c});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

IdealBasis ideal_of_form(const Form& f, const FieldCtx& ctx) {
    // Z*a + Z*(-b + sqrt(D))/2
    AlgInt second = ctx.three_mod_four ? AlgInt((1 - f.b) / 2, 1) : AlgInt(-f.b / 2, 1);
    return ideal_from_generators({AlgInt(f.a, 0), second}, ctx);
}

Form form_of_ideal(const IdealBasis& I0, const FieldCtx& ctx) {
    // Divide out the content so the form is primitive of discriminant D.
    IdealBasis I = I0;
    Int content, g;
    mpz_gcd(g.get_mpz_t(), I.A.get_mpz_t(), I.B.get_mpz_t());
    mpz_gcd(content.get_mpz_t(), g.get_mpz_t(), I.C.get_mpz_t());
    I.A /= content;
    I.B /= content;
    I.C /= content;
    AlgInt g1(I.A, 0), g2(I.B, I.C);
    Int NI = I.ideal_norm();
    Int n1 = norm(g1, ctx), n2 = norm(g2, ctx), n12 = norm(g1 + g2, ctx);
    Int qa = n1 / NI, qb = (n12 - n1 - n2) / NI, qc = n2 / NI;
    BIANCHI_CHECK(qa * NI == n1 && qc * NI == n2 && qb * NI == n12 - n1 - n2,
                  "form_of_ideal: non-integral form");
    Form f{qa, qb, qc};
    BIANCHI_CHECK(f.b * f.b - 4 * f.a * f.c == Int(ctx.discriminant),
                  "form_of_ideal: wrong discriminant");
    return reduce_form(f);
}

bool is_principal(const IdealBasis& I, const FieldCtx& ctx) {
    return form_of_ideal(I, ctx) == principal_form(ctx);
}

bool same_ideal_class(const IdealBasis& I, const IdealBasis& J, const FieldCtx& ctx) {
    return is_principal(ideal_mul(I, ideal_conj(J, ctx), ctx), ctx);
}

namespace {

AbelianGroup structure_from_abelian_table(const std::vector<std::vector<int>>& table,
                                          int identity) {
    // Finite abelian group: primary decomposition from the counts of
    // elements killed by p^k.
    int n = static_cast<int>(table.size());
    auto pow_elt = [&](int g, const Int& e) {
        int acc = identity, base = g;
        Int k = e;
        while (k > 0) {
            if (mpz_odd_p(k.get_mpz_t())) acc = table[acc][base];
            base = table[base][base];
            k >>= 1;
        }
        return acc;
    };
    std::vector<Int> primes;
    {
        Int rest(n);
        for (Int p = 2; p * p <= rest; ++p)
            if (rest % p == 0) {
                primes.push_back(p);
                while (rest % p == 0) rest /= p;
            }
        if (rest > 1) primes.push_back(rest);
    }
    std::vector<Int> factors;
    for (const Int& p : primes) {
        // n_k = #{g : g^(p^k) = id}; the number of cyclic factors of order
        // >= p^k is log_p(n_k) - log_p(n_{k-1}).
        long prev_log = 0;
        Int pk(1);
        std::vector<long> geq;
        while (true) {
            pk *= p;
            long cnt = 0;
            for (int g = 0; g < n; ++g)
                if (pow_elt(g, pk) == identity) ++cnt;
            long lg = 0;
            Int c(cnt);
            while (c > 1) { c /= p; ++lg; }
            long at_least = lg - prev_log;
            if (at_least == 0) break;
            geq.push_back(at_least);
            prev_log = lg;
        }
        for (size_t k = 0; k < geq.size(); ++k) {
            long exactly = geq[k] - (k + 1 < geq.size() ? geq[k + 1] : 0);
            Int val;
            mpz_pow_ui(val.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(k + 1));
            for (long i = 0; i < exactly; ++i) factors.push_back(val);
        }
    }
    return AbelianGroup::from_factors(0, factors);
}

std::map<long, ClassGroup> g_class_cache;
std::mutex g_class_mutex;

ClassGroup compute_class_group(const FieldCtx& ctx) {
    ClassGroup cg;
    cg.forms = reduced_forms(ctx);
    Form prin = principal_form(ctx);
    auto it = std::find(cg.forms.begin(), cg.forms.end(), prin);
    BIANCHI_CHECK(it != cg.forms.end(), "class_group: principal form missing");
    std::iter_swap(cg.forms.begin(), it);

    int h = static_cast<int>(cg.forms.size());
    std::vector<IdealBasis> ideals;
    ideals.reserve(h);
    for (const Form& f : cg.forms) {
        IdealBasis I = ideal_of_form(f, ctx);
        BIANCHI_CHECK(form_of_ideal(I, ctx) == f, "class_group: form/ideal mismatch");
        ideals.push_back(I);
    }
    cg.table.assign(h, std::vector<int>(h, -1));
    for (int i = 0; i < h; ++i)
        for (int j = 0; j <= i; ++j) {
            Form f = form_of_ideal(ideal_mul(ideals[i], ideals[j], ctx), ctx);
            auto k = std::find(cg.forms.begin(), cg.forms.end(), f);
            BIANCHI_CHECK(k != cg.forms.end(), "class_group: product not reduced-listed");
            cg.table[i][j] = cg.table[j][i] = static_cast<int>(k - cg.forms.begin());
        }
    for (int i = 0; i < h; ++i)
        BIANCHI_CHECK(cg.table[0][i] == i, "class_group: identity law fails");
    cg.structure = structure_from_abelian_table(cg.table, 0);
    return cg;
}

} // namespace

const ClassGroup& class_group(const FieldCtx& ctx) {
    std::lock_guard<std::mutex> lock(g_class_mutex);
    auto it = g_class_cache.find(ctx.m);
    if (it != g_class_cache.end()) return it->second;
    return g_class_cache.emplace(ctx.m, compute_class_group(ctx)).first->second;
}

// ---------------------------------------------------------------------------
// Singular points

std::vector<FieldElem> singular_points(const FieldCtx& ctx) {
    const long m = ctx.m;
    std::vector<FieldElem> pts;
    for (long s = 1; s * s <= 4 * m; ++s) {
        for (long r = -(s - 1) / 2; 2 * r <= s; ++r) {
            if (s * s > r * r + m) continue;
            if (!ctx.three_mod_four) {
                if (s == 1) continue;
                if ((r * r + m) % s != 0) continue;
                for (long p = 1; p <= s; ++p) {
                    if (std::gcd(p, s) != 1) continue;
                    // p*(r + sqrt(-m))/s with w = sqrt(-m)
                    pts.emplace_back(make_rat(p * r, s), make_rat(p, s));
                }
            } else {
                if (s % 2 != 0 || s == 2) continue;
                if ((r * r + m) % (2 * s) != 0) continue;
                for (long p = 1; p <= s / 2; ++p) {
                    if (std::gcd(p, s / 2) != 1) continue;
                    // sqrt(-m) = 1 + 2w
                    pts.emplace_back(make_rat(p * (r + 1), s), make_rat(2 * p, s));
                }
            }
        }
    }
    // Deduplicate mod O and move representatives into D0.
    std::vector<FieldElem> out;
    for (const FieldElem& z : pts) {
        FieldElem zr = translate_to_rectangle(z, ctx).first;
        bool dup = false;
        for (const FieldElem& w : out) {
            FieldElem d = zr - w;
            if (is_integral(d)) { dup = true; break; }
        }
        if (!dup) out.push_back(zr);
    }
    std::sort(out.begin(), out.end(), [&](const FieldElem& a, const FieldElem& b) {
        return lex_less(coords(a, ctx), coords(b, ctx));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Norm values

std::vector<Int> norm_values_upto(const FieldCtx& ctx, const Int& bound) {
    std::set<Int> vals;
    if (!ctx.three_mod_four) {
        // a^2 + m b^2 <= bound
        for (Int b = 0; ctx.m * b * b <= bound; ++b)
            for (Int a = 0; a * a + ctx.m * b * b <= bound; ++a) {
                if (a == 0 && b == 0) continue;
                vals.insert(a * a + ctx.m * b * b);
            }
    } else {
        // ((2a - b)^2 + m b^2)/4 <= bound, u = 2a - b == b mod 2
        for (Int b = 0; ctx.m * b * b <= 4 * bound; ++b)
            for (Int u = ((b % 2 == 0) ? Int(0) : Int(1)); u * u + ctx.m * b * b <= 4 * bound;
                 u += 2) {
                if (u == 0 && b == 0) continue;
                vals.insert((u * u + ctx.m * b * b) / 4);
            }
    }
    return {vals.begin(), vals.end()};
}

NormValueStream::NormValueStream(const FieldCtx& ctx) : ctx_(ctx), horizon_(16) { refill(); }

void NormValueStream::refill() { window_ = norm_values_upto(ctx_, horizon_); }

Int NormValueStream::next() {
    while (pos_ >= window_.size()) {
        horizon_ *= 4;
        refill();
    }
    return window_[pos_++];
}

// ---------------------------------------------------------------------------
// Elements of given norm

std::vector<AlgInt> elements_of_norm(const Int& N, const FieldCtx& ctx) {
    BIANCHI_CHECK(N >= 1, "elements_of_norm: N < 1");
    std::vector<AlgInt> out;
    auto keep = [](const Int& a, const Int& b) { return a > 0 || (a == 0 && b > 0); };
    if (!ctx.three_mod_four) {
        for (Int b = 0; ctx.m * b * b <= N; ++b) {
            Int rem = N - ctx.m * b * b, a;
            if (!is_square(rem, a)) continue;
            for (Int sa : {a, -a})
                for (Int sb : {b, -b}) {
                    if (keep(sa, sb)) out.push_back({sa, sb});
                    if (b == 0) break;
                }
        }
    } else {
        // (2a - b)^2 + m b^2 = 4N
        for (Int b = 0; ctx.m * b * b <= 4 * N; ++b) {
            Int rem = 4 * N - ctx.m * b * b, u;
            if (!is_square(rem, u)) continue;
            for (Int su : {u, -u}) {
                for (Int sb : {b, -b}) {
                    if ((su - sb) % 2 != 0) continue;
                    Int a = (su + sb) / 2;
                    if (keep(a, sb)) out.push_back({a, sb});
                    if (b == 0) break;
                }
                if (u == 0) break;
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const AlgInt& x, const AlgInt& y) { return lex_less(x, y); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Fundamental rectangle

bool in_rectangle(const FieldElem& z, const FieldCtx& ctx) {
    Coords c = coords(z, ctx);
    if (!ctx.three_mod_four)
        return 0 <= c.x && c.x <= 1 && 0 <= c.y && c.y <= 1;
    return -2 * c.x <= 1 && 2 * c.x <= 1 && 0 <= c.y && 2 * c.y <= 1;
}

std::pair<FieldElem, AlgInt> translate_to_rectangle(const FieldElem& z, const FieldCtx& ctx) {
    if (in_rectangle(z, ctx)) return {z, AlgInt(0, 0)};
    // Integer b-coordinates stay on the closed upper edge rather than
    // wrapping to the lower one.
    auto shift = [](const Rat& t) -> Int {
        Int c = ceil_rat(t);
        if (c >= 1) return c - 1;
        return floor_rat(t);
    };
    Int tb = shift(z.y);
    Int ta;
    if (ctx.three_mod_four) {
        // x_re of z - tb*w, moved into [-1/2, 1/2)
        Rat xre = z.x - (z.y - Rat(tb)) / 2;
        ta = floor_rat(xre + make_rat(1, 2));
    } else {
        ta = shift(z.x);
    }
    AlgInt t(ta, tb);
    FieldElem zr = z - FieldElem(t);
    BIANCHI_CHECK(in_rectangle(zr, ctx), "translate_to_rectangle: landed outside D0");
    return {zr, t};
}

} // namespace bianchi
