#pragma once

#include "bianchi/arith.hpp"

#include <optional>

namespace bianchi {

// Hemisphere S_{mu,lam} with centre lam/mu and squared radius 1/norm(mu).
struct Hemisphere {
    AlgInt mu, lam;
    FieldElem center;
    Rat sq_radius;

    // Checked constructor for pipeline use: (mu, lam) must be unimodular.
    static Hemisphere from_pair(const AlgInt& mu, const AlgInt& lam, const FieldCtx& ctx);
    // Unchecked geometric hemisphere (tests, translates).
    static Hemisphere from_center(FieldElem center, Rat sq_radius);

    // The same hemisphere shifted by t in O.
    Hemisphere translated(const AlgInt& t, const FieldCtx& ctx) const;

    // |z - center|^2 - sq_radius; negative strictly under the dome.
    Rat defect_at(const FieldElem& z, const FieldCtx& ctx) const;

    bool same_sphere(const Hemisphere& o) const {
        return center == o.center && sq_radius == o.sq_radius;
    }
};

// Point (z, zeta) of the closed upper half-space, with zeta stored as zeta^2.
// sq_height == 0 encodes a boundary point (singular cusps).
struct PointH {
    FieldElem z;
    Rat sq_height;
    bool operator==(const PointH& o) const { return z == o.z && sq_height == o.sq_height; }
};

// Rational line a*x + b*y = c in coords() coordinates, normalized so the
// first nonzero of (a, b) is 1.
struct PlaneLine {
    Rat a, b, c;
    bool operator==(const PlaneLine& o) const { return a == o.a && b == o.b && c == o.c; }
    bool operator<(const PlaneLine& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        return c < o.c;
    }
};

// True iff `lower` is strictly below `upper` at z (the defect of `upper`
// at z is strictly smaller).
bool strictly_below_at(const FieldElem& z, const Hemisphere& lower, const Hemisphere& upper,
                       const FieldCtx& ctx);

bool point_strictly_below(const PointH& p, const Hemisphere& h, const FieldCtx& ctx);

// Decides |c1 - c2| <= r2 - r1 exactly (h1 everywhere below h2).
bool everywhere_below(const Hemisphere& h1, const Hemisphere& h2, const FieldCtx& ctx);

// The hemispheres intersect in H union C (tangency included).
bool touches(const Hemisphere& h1, const Hemisphere& h2, const FieldCtx& ctx);

// Locus where the two defects agree; undefined for identical spheres.
PlaneLine agree_line(const Hemisphere& h1, const Hemisphere& h2, const FieldCtx& ctx);

std::optional<std::pair<Rat, Rat>> intersect_lines(const PlaneLine& l1, const PlaneLine& l2);

// Point of h above z, when z is within the projection.
std::optional<PointH> lift(const FieldElem& z, const Hemisphere& h, const FieldCtx& ctx);

// min over t in O of defect of (h + t) at z, with a witness translate.
std::pair<Rat, AlgInt> min_defect_over_translates(const FieldElem& z, const Hemisphere& h,
                                                  const FieldCtx& ctx);

} // namespace bianchi
