#pragma once

#include "bianchi/arith.hpp"

#include <vector>

namespace bianchi {

// Dense arbitrary-precision integer matrix, row major.
struct IntMatrix {
    long rows = 0, cols = 0;
    std::vector<Int> a;

    IntMatrix() = default;
    IntMatrix(long r, long c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, Int(0)) {}
    Int& at(long i, long j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Int& at(long i, long j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static IntMatrix identity(long n);
    IntMatrix mul(const IntMatrix& o) const;
    bool operator==(const IntMatrix& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

// L * M * R = D with L, R unimodular and D diagonal with d1 | d2 | ...
struct SmithResult {
    std::vector<Int> diag;  // min(rows, cols) entries, trailing zeros allowed
    long rank = 0;          // number of nonzero diagonal entries
    IntMatrix L, Linv, R, Rinv;
    std::vector<Int> invariants() const; // nonzero diagonal entries > 1
};

SmithResult smith_normal_form(const IntMatrix& M, bool with_transforms = false);

// Quotient Z^n / columnspan(M) in canonical form (M is n x k).
AbelianGroup cokernel(const IntMatrix& M);

struct ChainHomology {
    AbelianGroup h0, h1, h2;
};

// Homology of 0 <- Z^V <-d1- Z^E <-d2- Z^F <- 0. Checks d1*d2 = 0.
ChainHomology homology_of_chain(const IntMatrix& d1, const IntMatrix& d2);

} // namespace bianchi
