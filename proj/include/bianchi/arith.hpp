#pragma once

#include "bianchi/qfield.hpp"

#include <optional>
#include <vector>

namespace bianchi {

// Finitely generated abelian group in canonical form: free rank plus
// torsion invariants d1 | d2 | ... , each > 1.
struct AbelianGroup {
    long free_rank = 0;
    std::vector<Int> torsion;

    bool operator==(const AbelianGroup& o) const {
        return free_rank == o.free_rank && torsion == o.torsion;
    }
    bool is_trivial() const { return free_rank == 0 && torsion.empty(); }

    // Canonicalizes an arbitrary list of cyclic factor orders (>= 1).
    static AbelianGroup from_factors(long free_rank, const std::vector<Int>& factors);

    // Multiset of prime-power cyclic factors, sorted by (p, k).
    std::vector<Int> primary_factors() const;

    // "{1}" / "Z/6 x Z/2" - invariant factors, largest first (class groups).
    std::string render_invariant() const;
    // "0" / "Z^2 (+) (Z/2)^2 (+) Z/3" - free part, then prime powers (homology).
    std::string render_primary() const;
};

// Z-basis of an O-ideal: generators { A, B + C*w } with A, C > 0 and
// 0 <= B < A; determinant A*C is the ideal norm.
struct IdealBasis {
    Int A, B, C;
    bool operator==(const IdealBasis& o) const { return A == o.A && B == o.B && C == o.C; }
    Int ideal_norm() const { return A * C; }
};

// HNF basis of the O-module generated by the given nonzero elements.
IdealBasis ideal_from_generators(const std::vector<AlgInt>& gens, const FieldCtx& ctx);
IdealBasis ideal_mul(const IdealBasis& I, const IdealBasis& J, const FieldCtx& ctx);
IdealBasis ideal_conj(const IdealBasis& I, const FieldCtx& ctx);

// True iff the ideal mu*O + lam*O is all of O.
bool is_unimodular(const AlgInt& mu, const AlgInt& lam, const FieldCtx& ctx);

// x, y with x*mu + y*lam = 1, when (mu, lam) is unimodular.
std::optional<std::pair<AlgInt, AlgInt>> unimodular_bezout(const AlgInt& mu, const AlgInt& lam,
                                                           const FieldCtx& ctx);

// Primitive positive definite binary quadratic form a x^2 + b xy + c y^2
// of discriminant Delta(ctx).
struct Form {
    Int a, b, c;
    bool operator==(const Form& o) const { return a == o.a && b == o.b && c == o.c; }
    bool operator<(const Form& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        return c < o.c;
    }
};

Form principal_form(const FieldCtx& ctx);
Form reduce_form(Form f);
std::vector<Form> reduced_forms(const FieldCtx& ctx);

IdealBasis ideal_of_form(const Form& f, const FieldCtx& ctx);
Form form_of_ideal(const IdealBasis& I, const FieldCtx& ctx);

bool is_principal(const IdealBasis& I, const FieldCtx& ctx);
bool same_ideal_class(const IdealBasis& I, const IdealBasis& J, const FieldCtx& ctx);

// Class group of O_{-m}: forms under composition (via ideal products).
struct ClassGroup {
    std::vector<Form> forms;                      // reduced forms; index 0 is principal
    std::vector<std::vector<int>> table;          // composition table
    AbelianGroup structure;
    long h() const { return static_cast<long>(forms.size()); }
};

const ClassGroup& class_group(const FieldCtx& ctx);

// Swan's enumeration of the singular points mod O, translated into the
// fundamental rectangle. Empty exactly when the class number is 1.
std::vector<FieldElem> singular_points(const FieldCtx& ctx);

// Values taken by the norm on nonzero elements of O, ascending.
std::vector<Int> norm_values_upto(const FieldCtx& ctx, const Int& bound);

class NormValueStream {
  public:
    explicit NormValueStream(const FieldCtx& ctx);
    Int next(); // successive norm values 1, ...
  private:
    const FieldCtx& ctx_;
    std::vector<Int> window_;
    size_t pos_ = 0;
    Int horizon_;
    void refill();
};

// All mu with norm(mu) = N, one representative per {mu, -mu},
// lexicographically ordered on (a, b).
std::vector<AlgInt> elements_of_norm(const Int& N, const FieldCtx& ctx);

// Closed fundamental rectangle D0 for the translation action on C.
bool in_rectangle(const FieldElem& z, const FieldCtx& ctx);

// z' = z - t with z' in D0; identity translate when z is already inside.
std::pair<FieldElem, AlgInt> translate_to_rectangle(const FieldElem& z, const FieldCtx& ctx);

} // namespace bianchi
