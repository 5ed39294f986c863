#pragma once

#include "bianchi/hemis.hpp"
#include "bianchi/homology.hpp"

#include <vector>

namespace bianchi {

// Element of PSL_2(O): determinant 1, canonical sign (the first nonzero of
// (c, d, a) is lexicographically positive).
struct Matrix2 {
    AlgInt a, b, c, d;

    bool operator==(const Matrix2& o) const {
        return a == o.a && b == o.b && c == o.c && d == o.d;
    }
    bool operator<(const Matrix2& o) const;
    bool is_identity() const;

    static Matrix2 make(const AlgInt& a, const AlgInt& b, const AlgInt& c, const AlgInt& d,
                        const FieldCtx& ctx); // checks det, canonicalizes sign
    static Matrix2 identity();
    static Matrix2 translation(const AlgInt& t, const FieldCtx& ctx); // z -> z + t

    Matrix2 mul(const Matrix2& o, const FieldCtx& ctx) const;
    Matrix2 inverse(const FieldCtx& ctx) const;
    std::string str() const;
};

// Exact Poincare action on upper half-space; sq_height == 0 points move by
// the fractional-linear action on the boundary.
PointH apply(const Matrix2& g, const PointH& p, const FieldCtx& ctx);

// Action on boundary cusps.
FieldElem apply_cusp(const Matrix2& g, const FieldElem& z, const FieldCtx& ctx);

// All matrices with c != 0 (mod +-1) sending p to q; empty when no such
// matrix exists (in particular when r/rho is irrational).
std::vector<Matrix2> identify(const PointH& p, const PointH& q, const FieldCtx& ctx);

// identify() together with the translations (c = 0 case).
std::vector<Matrix2> identify_with_translations(const PointH& p, const PointH& q,
                                                const FieldCtx& ctx);

struct FiniteGroup {
    std::vector<Matrix2> elems; // identity first, then sorted

    long order() const { return static_cast<long>(elems.size()); }
    bool contains(const Matrix2& g) const;
    int index_of(const Matrix2& g) const; // -1 if absent
    bool is_trivial() const { return elems.size() == 1; }

    static FiniteGroup trivial();
    static FiniteGroup closure(std::vector<Matrix2> gens, const FieldCtx& ctx);

    std::vector<std::vector<int>> multiplication_table(const FieldCtx& ctx) const;
    long element_order(const Matrix2& g, const FieldCtx& ctx) const;
};

FiniteGroup stabilizer(const PointH& p, const FieldCtx& ctx);
FiniteGroup edge_stabilizer(const PointH& p, const PointH& q, const FieldCtx& ctx);

// H_1(G) = G/[G,G] with the coordinate map from group elements into the
// canonical torsion coordinates (for inclusion-induced maps).
struct Abelianization {
    AbelianGroup group;
    // coords[i] = image of element i in the canonical coordinates
    // (one column per torsion invariant of `group`).
    std::vector<std::vector<Int>> coords;
};

Abelianization abelianization(const FiniteGroup& g, const FieldCtx& ctx);

} // namespace bianchi
