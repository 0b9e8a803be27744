#pragma once

#include "specflag/tuples.hpp"

namespace specflag {

/// Exterior algebra on n generators with orthonormal monomial basis indexed
/// by bitmasks (bit j set = generator j+1 present, factors in increasing
/// order) and left-wedge partial isometries L(s_j).
struct ExteriorAlgebra {
    int n;
    int dim;                     // 2^n
    std::vector<CMatrix> wedge;  // L(s_1) .. L(s_n), each dim x dim

    /// Sign of wedging generator j (1-based) into the monomial mask, or 0
    /// when the generator is already present.
    static int wedge_sign(int j, unsigned mask);
};

/// n is guarded to 1..6.
ExteriorAlgebra exterior_ops(int n);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// alpha_{T-w} = delta + delta^* with delta = sum_j L(s_j) (x) (T_j - w_j),
/// a self-adjoint matrix of size 2^n k; sigma_min is its smallest singular
/// value (full decomposition up to size 512, inverse iteration beyond).
struct KoszulOperator {
    int n;
    int k;
    CMatrix matrix;
    double sigma_min;
};

KoszulOperator alpha(const CommutingTuple& t, const std::vector<Complex>& w);

/// Smallest singular value of a self-adjoint matrix.
double selfadjoint_sigma_min(const CMatrix& a);

enum class HarteSide { kLeft, kRight };

/// Harte membership via the positive element sum (T_i - l_i)^* (T_i - l_i)
/// (adjoints on the other side for the right spectrum): member iff the
/// smallest eigenvalue is at or below abs_eps + rel_eps (1 + sum ||T_i||^2).
struct HarteVerdict {
    bool member;
    double margin;  // smallest eigenvalue of the positive element
};

HarteVerdict harte_member(const CommutingTuple& t, const std::vector<Complex>& lambda,
                          HarteSide side, const Tolerance& tol = {});

/// Surjectivity of the last Koszul boundary map (row space of [T_1 .. T_n])
/// and bounded-below-ness of the first (the stacked column), with least
/// squares witness coefficients when solvable.
struct KoszulEndReport {
    bool delta0_surjective;
    bool deltan_bounded_below;
    double sigma_row;  // sigma_min of [T_1 ... T_n]
    double sigma_col;  // sigma_min of [T_1; ...; T_n]
    std::vector<CMatrix> b_witness;  // sum T_i B_i ~ 1 when surjective
    std::vector<CMatrix> s_witness;  // sum S_i T_i ~ 1 when bounded below
    double b_residual;
    double s_residual;
};

KoszulEndReport koszul_end_checks(const CommutingTuple& t, const Tolerance& tol = {});

/// Margins for both non-singularity criteria over a finite grid, rows in
/// grid order regardless of the execution schedule.
struct SpectrumScan {
    std::vector<std::vector<Complex>> grid;
    std::vector<double> harte_margins;
    std::vector<double> alpha_margins;
    Tolerance tol;
};

SpectrumScan scan(const CommutingTuple& t, const std::vector<std::vector<Complex>>& grid,
                  const Tolerance& tol = {}, int threads = 1);

}  // namespace specflag
