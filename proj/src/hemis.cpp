#include "bianchi/hemis.hpp"

namespace bianchi {

Hemisphere Hemisphere::from_pair(const AlgInt& mu, const AlgInt& lam, const FieldCtx& ctx) {
    BIANCHI_CHECK(!mu.is_zero(), "Hemisphere: mu = 0");
    BIANCHI_CHECK(is_unimodular(mu, lam, ctx), "Hemisphere: pair not unimodular");
    Hemisphere h;
    h.mu = mu;
    h.lam = lam;
    h.center = div(FieldElem(lam), FieldElem(mu), ctx);
    h.sq_radius = make_rat(Int(1), norm(mu, ctx));
    return h;
}

Hemisphere Hemisphere::from_center(FieldElem center, Rat sq_radius) {
    BIANCHI_CHECK(sq_radius > 0, "Hemisphere: nonpositive radius");
    Hemisphere h;
    h.center = std::move(center);
    h.sq_radius = std::move(sq_radius);
    return h;
}

Hemisphere Hemisphere::translated(const AlgInt& t, const FieldCtx& ctx) const {
    Hemisphere h = *this;
    h.center = h.center + FieldElem(t);
    h.lam = h.lam + mul(t, h.mu, ctx);
    return h;
}

Rat Hemisphere::defect_at(const FieldElem& z, const FieldCtx& ctx) const {
    return norm(z - center, ctx) - sq_radius;
}

bool strictly_below_at(const FieldElem& z, const Hemisphere& lower, const Hemisphere& upper,
                       const FieldCtx& ctx) {
    return upper.defect_at(z, ctx) < lower.defect_at(z, ctx);
}

bool point_strictly_below(const PointH& p, const Hemisphere& h, const FieldCtx& ctx) {
    return norm(p.z - h.center, ctx) + p.sq_height < h.sq_radius;
}

namespace {

// sqrt(A) + sqrt(C) <= sqrt(B) for nonnegative rationals, decided by squaring.
bool sqrt_sum_leq(const Rat& A, const Rat& C, const Rat& B) {
    Rat s = B - A - C;
    if (s < 0) return false;
    return s * s >= 4 * A * C;
}

// sqrt(A) + sqrt(C) >= sqrt(B)
bool sqrt_sum_geq(const Rat& A, const Rat& C, const Rat& B) {
    Rat s = B - A - C;
    if (s <= 0) return true;
    return s * s <= 4 * A * C;
}

} // namespace

bool everywhere_below(const Hemisphere& h1, const Hemisphere& h2, const FieldCtx& ctx) {
    // |c1 - c2| + r1 <= r2, i.e. sqrt(A) + sqrt(C) <= sqrt(B)
    Rat A = norm(h1.center - h2.center, ctx);
    return sqrt_sum_leq(A, h1.sq_radius, h2.sq_radius);
}

bool touches(const Hemisphere& h1, const Hemisphere& h2, const FieldCtx& ctx) {
    // (r1 - r2)^2 <= |c1 - c2|^2 <= (r1 + r2)^2
    Rat A = norm(h1.center - h2.center, ctx);
    const Rat &B = h1.sq_radius, &C = h2.sq_radius;
    if (!sqrt_sum_geq(B, C, A)) return false;          // sqrt(B)+sqrt(C) >= sqrt(A)
    return sqrt_sum_geq(A, C, B) && sqrt_sum_geq(A, B, C); // |r1 - r2| <= sqrt(A)
}

PlaneLine agree_line(const Hemisphere& h1, const Hemisphere& h2, const FieldCtx& ctx) {
    if (h1.same_sphere(h2))
        throw std::domain_error("agree_line: identical hemispheres");
    Coords c1 = coords(h1.center, ctx), c2 = coords(h2.center, ctx);
    Rat mm(ctx.m);
    // |z - c1|^2 - r1^2 = |z - c2|^2 - r2^2 in coordinates (x, y*sqrt(m))
    Rat a = 2 * (c2.x - c1.x);
    Rat b = 2 * mm * (c2.y - c1.y);
    Rat n1 = c1.x * c1.x + mm * c1.y * c1.y;
    Rat n2 = c2.x * c2.x + mm * c2.y * c2.y;
    Rat c = (n2 - h2.sq_radius) - (n1 - h1.sq_radius);
    BIANCHI_CHECK(a != 0 || b != 0, "agree_line: concentric hemispheres");
    Rat lead = (a != 0) ? a : b;
    PlaneLine l{a / lead, b / lead, c / lead};
    return l;
}

std::optional<std::pair<Rat, Rat>> intersect_lines(const PlaneLine& l1, const PlaneLine& l2) {
    Rat det = l1.a * l2.b - l2.a * l1.b;
    if (det == 0) return std::nullopt;
    Rat x = (l1.c * l2.b - l2.c * l1.b) / det;
    Rat y = (l1.a * l2.c - l2.a * l1.c) / det;
    return std::make_pair(x, y);
}

std::optional<PointH> lift(const FieldElem& z, const Hemisphere& h, const FieldCtx& ctx) {
    Rat sq = h.sq_radius - norm(z - h.center, ctx);
    if (sq < 0) return std::nullopt;
    return PointH{z, sq};
}

std::pair<Rat, AlgInt> min_defect_over_translates(const FieldElem& z, const Hemisphere& h,
                                                  const FieldCtx& ctx) {
    // Minimize norm(d - t) over t in O, where d = z - center. The norm form
    // is positive definite with near-diagonal Gram matrix, so the optimum is
    // within one step of the coordinatewise rounding.
    FieldElem d = z - h.center;
    Int b0 = floor_rat(d.y);
    bool first = true;
    Rat best;
    AlgInt best_t;
    for (Int db = -1; db <= 2; ++db) {
        Int tb = b0 + db;
        // With b fixed, norm(x' + y'w) in x' is minimized near
        // x' = -trace(w)*y'/2.
        Rat yr = d.y - Rat(tb);
        Rat xopt = d.x + Rat(ctx.omega_trace) * yr / 2;
        Int a0 = floor_rat(xopt);
        for (Int da = -1; da <= 2; ++da) {
            Int ta = a0 + da;
            FieldElem r{d.x - Rat(ta), yr};
            Rat val = norm(r, ctx);
            if (first || val < best) {
                first = false;
                best = val;
                best_t = AlgInt(ta, tb);
            }
        }
    }
    return {best - h.sq_radius, best_t};
}

} // namespace bianchi
