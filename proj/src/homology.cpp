#include "bianchi/homology.hpp"

namespace bianchi {

IntMatrix IntMatrix::identity(long n) {
    IntMatrix I(n, n);
    for (long i = 0; i < n; ++i) I.at(i, i) = 1;
    return I;
}

IntMatrix IntMatrix::mul(const IntMatrix& o) const {
    BIANCHI_CHECK(cols == o.rows, "IntMatrix::mul: dimension mismatch");
    IntMatrix out(rows, o.cols);
    for (long i = 0; i < rows; ++i)
        for (long k = 0; k < cols; ++k) {
            const Int& v = at(i, k);
            if (v == 0) continue;
            for (long j = 0; j < o.cols; ++j) out.at(i, j) += v * o.at(k, j);
        }
    return out;
}

std::vector<Int> SmithResult::invariants() const {
    std::vector<Int> out;
    for (const Int& d : diag)
        if (d > 1) out.push_back(d);
    return out;
}

SmithResult smith_normal_form(const IntMatrix& M, bool with_transforms) {
    SmithResult res;
    IntMatrix D = M;
    long m = D.rows, n = D.cols, nmin = std::min(m, n);
    if (with_transforms) {
        res.L = IntMatrix::identity(m);
        res.Linv = IntMatrix::identity(m);
        res.R = IntMatrix::identity(n);
        res.Rinv = IntMatrix::identity(n);
    }

    auto swap_rows = [&](long i, long j) {
        if (i == j) return;
        for (long k = 0; k < n; ++k) std::swap(D.at(i, k), D.at(j, k));
        if (with_transforms)
            for (long k = 0; k < m; ++k) {
                std::swap(res.L.at(i, k), res.L.at(j, k));     // L <- S L
                std::swap(res.Linv.at(k, i), res.Linv.at(k, j)); // Linv <- Linv S
            }
    };
    auto swap_cols = [&](long i, long j) {
        if (i == j) return;
        for (long k = 0; k < m; ++k) std::swap(D.at(k, i), D.at(k, j));
        if (with_transforms)
            for (long k = 0; k < n; ++k) {
                std::swap(res.R.at(k, i), res.R.at(k, j));
                std::swap(res.Rinv.at(i, k), res.Rinv.at(j, k));
            }
    };
    auto add_row = [&](long dst, long src, const Int& f) { // row dst += f * row src
        if (f == 0) return;
        for (long k = 0; k < n; ++k) D.at(dst, k) += f * D.at(src, k);
        if (with_transforms)
            for (long k = 0; k < m; ++k) {
                res.L.at(dst, k) += f * res.L.at(src, k);
                res.Linv.at(k, src) -= f * res.Linv.at(k, dst);
            }
    };
    auto add_col = [&](long dst, long src, const Int& f) {
        if (f == 0) return;
        for (long k = 0; k < m; ++k) D.at(k, dst) += f * D.at(k, src);
        if (with_transforms)
            for (long k = 0; k < n; ++k) {
                res.R.at(k, dst) += f * res.R.at(k, src);
                res.Rinv.at(src, k) -= f * res.Rinv.at(dst, k);
            }
    };
    auto negate_row = [&](long i) {
        for (long k = 0; k < n; ++k) D.at(i, k) = -D.at(i, k);
        if (with_transforms)
            for (long k = 0; k < m; ++k) {
                res.L.at(i, k) = -res.L.at(i, k);
                res.Linv.at(k, i) = -res.Linv.at(k, i);
            }
    };

    for (long s = 0; s < nmin; ++s) {
        // Find the minimal nonzero |entry| in the trailing block.
        long pi = -1, pj = -1;
        for (long i = s; i < m; ++i)
            for (long j = s; j < n; ++j)
                if (D.at(i, j) != 0 &&
                    (pi < 0 || abs(D.at(i, j)) < abs(D.at(pi, pj)))) {
                    pi = i;
                    pj = j;
                }
        if (pi < 0) break;
        swap_rows(s, pi);
        swap_cols(s, pj);
        while (true) {
            bool clean = true;
            for (long i = s + 1; i < m; ++i) {
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), D.at(i, s).get_mpz_t(), D.at(s, s).get_mpz_t());
                add_row(i, s, -q);
                if (D.at(i, s) != 0) clean = false;
            }
            for (long j = s + 1; j < n; ++j) {
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), D.at(s, j).get_mpz_t(), D.at(s, s).get_mpz_t());
                add_col(j, s, -q);
                if (D.at(s, j) != 0) clean = false;
            }
            if (!clean) {
                // Move a smaller remainder into the pivot and repeat.
                long qi = s, qj = s;
                for (long i = s; i < m; ++i)
                    for (long j = s; j < n; ++j)
                        if (D.at(i, j) != 0 && abs(D.at(i, j)) < abs(D.at(qi, qj))) {
                            qi = i;
                            qj = j;
                        }
                swap_rows(s, qi);
                swap_cols(s, qj);
                continue;
            }
            // Divisibility: pivot must divide the rest of the block.
            bool divides = true;
            for (long i = s + 1; i < m && divides; ++i)
                for (long j = s + 1; j < n && divides; ++j)
                    if (D.at(i, j) % D.at(s, s) != 0) {
                        add_row(s, i, Int(1));
                        divides = false;
                    }
            if (divides) break;
        }
        if (D.at(s, s) < 0) negate_row(s);
    }

    res.diag.resize(nmin);
    res.rank = 0;
    for (long s = 0; s < nmin; ++s) {
        res.diag[s] = D.at(s, s);
        if (res.diag[s] != 0) ++res.rank;
    }
    return res;
}

AbelianGroup cokernel(const IntMatrix& M) {
    SmithResult s = smith_normal_form(M);
    std::vector<Int> factors = s.invariants();
    long free_rank = M.rows - s.rank;
    return AbelianGroup::from_factors(free_rank, factors);
}

ChainHomology homology_of_chain(const IntMatrix& d1, const IntMatrix& d2) {
    BIANCHI_CHECK(d1.cols == d2.rows, "homology: boundary dimension mismatch");
    IntMatrix z = d1.mul(d2);
    for (const Int& v : z.a) BIANCHI_CHECK(v == 0, "homology: d1*d2 != 0");

    long V = d1.rows, E = d1.cols, F = d2.cols;
    SmithResult s1 = smith_normal_form(d1);
    SmithResult s2 = smith_normal_form(d2);

    ChainHomology h;
    // H0 = Z^V / im d1
    h.h0 = AbelianGroup::from_factors(V - s1.rank, s1.invariants());
    // H1 = ker d1 / im d2: torsion is the invariants of d2 (im d2 sits in
    // the pure subgroup ker d1), free rank is dim ker d1 - rank d2.
    h.h1 = AbelianGroup::from_factors(E - s1.rank - s2.rank, s2.invariants());
    // H2 = ker d2 (top dimension, free)
    h.h2 = AbelianGroup::from_factors(F - s2.rank, {});
    return h;
}

} // namespace bianchi
