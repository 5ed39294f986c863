#pragma once

#include "bianchi/cellcomplex.hpp"

#include <string>

namespace bianchi {

struct TableRow {
    long delta = 0;
    long m = 0;
    AbelianGroup class_group;
    AbelianGroup h1_cusp;
    AbelianGroup farrell_supplement;
};

struct SpectralReport {
    long h = 0;
    long singular_orbits = 0;
    long rank_h2 = 0;
    bool ok = true;
    std::string detail;
};

// H1 of the quotient complex splits off one free Z factor; the rest is the
// cusp-complementary homology.
AbelianGroup h1_cusp(const ChainHomology& hom);

// Cokernel of the map induced by edge-into-vertex stabilizer inclusions on
// abelianizations, over the torsion coordinates.
AbelianGroup farrell_supplement(const QuotientComplex& qc, const FieldCtx& ctx);

SpectralReport spectral_checks(const QuotientComplex& qc, const ChainHomology& hom,
                               const FieldCtx& ctx);

struct PipelineResult {
    Polyhedron polyhedron;
    QuotientComplex complex;
    ChainHomology homology;
    TableRow row;
    SpectralReport spectral;
    bool termination_verified = false;
};

// Full computation for one field.
PipelineResult run_pipeline(long m, const SwanConfig& cfg = {}, bool audit_termination = true);

std::string render_row_text(const TableRow& row);

} // namespace bianchi
