#pragma once

#include <functional>

#include "specflag/tuples.hpp"

namespace specflag {

/// Simultaneous Schur form: U unitary with U^* T_i U upper triangular for
/// every i. residual is the largest strictly-lower norm relative to ||T_i||.
struct SchurFlag {
    CMatrix u;
    std::vector<CMatrix> triangulars;
    double residual = 0.0;

    int k() const { return static_cast<int>(u.rows()); }
    int n() const { return static_cast<int>(triangulars.size()); }
};

struct CommonEigenvector {
    CVector vector;
    std::vector<Complex> eigenvalue;  // point in C^n
};

/// Common unit eigenvector of a certified tuple, with joint eigenvalue
/// minimal in lexicographic order on (Re l_1, Im l_1, ..., Re l_n, Im l_n).
/// Works with numerical kernels (invariant subspaces), so Jordan blocks are
/// handled. Throws ResidualTooLarge when no vector meets the tolerance.
CommonEigenvector common_eigenvector(const CommutingTuple& t, const Tolerance& tol = {});

/// Deflation by repeated common eigenvectors. Deterministic given the
/// lexicographic tie-break; an already-triangular tuple with lex-sorted
/// diagonal yields U = I.
SchurFlag simultaneous_schur(const CommutingTuple& t, const Tolerance& tol = {});

/// p-th point is the n-tuple of p-th diagonal entries of the triangulars.
std::vector<std::vector<Complex>> joint_eigenvalues(const SchurFlag& flag);

/// Reorders the simultaneous Schur form by adjacent unitary swaps so that the
/// diagonal positions appear in the order given by perm (perm[j] = index of
/// the input position that ends up at position j). Positions carrying equal
/// joint eigenvalues must not be separated by the permutation's ranking.
SchurFlag reorder_schur_flag(const SchurFlag& flag, const std::vector<int>& perm);

/// Weighted atomic probability measure on C^n. Weights are exact rationals
/// count/denominator; atoms are merged within radius 1e-7 * (1 + max norm)
/// and kept sorted lexicographically.
class JointSpectralMeasure {
  public:
    JointSpectralMeasure(int n, const std::vector<std::vector<Complex>>& points,
                         const std::vector<long>& counts, long denominator);
    /// Uniform counting measure: one count per point.
    JointSpectralMeasure(int n, const std::vector<std::vector<Complex>>& points,
                         long denominator);

    int n() const { return n_; }
    long denominator() const { return denom_; }
    int size() const { return static_cast<int>(atoms_.size()); }
    const std::vector<std::vector<Complex>>& atoms() const { return atoms_; }
    const std::vector<Complex>& atom(int i) const { return atoms_[static_cast<size_t>(i)]; }
    long count(int i) const { return counts_[static_cast<size_t>(i)]; }
    double weight(int i) const {
        return static_cast<double>(counts_[static_cast<size_t>(i)]) / static_cast<double>(denom_);
    }
    double merge_radius() const { return merge_radius_; }

    double max_atom_norm() const;

  private:
    int n_;
    long denom_;
    std::vector<std::vector<Complex>> atoms_;
    std::vector<long> counts_;
    double merge_radius_;
};

/// Finite joint Brown measure: uniform atoms at the joint eigenvalues read
/// off a simultaneous triangular form, weights multiplicity/k.
JointSpectralMeasure joint_measure(const CommutingTuple& t, const Tolerance& tol = {});

/// Push atoms to coordinate i (1-based), merge, keep weights.
JointSpectralMeasure marginal(const JointSpectralMeasure& nu, int i);

using PointMap = std::function<std::vector<Complex>(const std::vector<Complex>&)>;

/// Atoms mapped through f into C^m, weights carried, merged.
JointSpectralMeasure pushforward(const JointSpectralMeasure& nu, const PointMap& f, int m);
JointSpectralMeasure pushforward(const JointSpectralMeasure& nu,
                                 const std::vector<CommPolynomial>& f);

/// Max-over-atoms matching distance between two measures seen as multisets of
/// expanded rational-weight points; +inf when the multisets have different
/// total mass profiles.
double measure_distance(const JointSpectralMeasure& a, const JointSpectralMeasure& b);

/// Direct-sum composition: blocks share n, weights proportional to block
/// dimensions.
struct BlockTuple {
    std::vector<CommutingTuple> blocks;

    int total_dim() const;
    std::vector<double> weights() const;
};

CommutingTuple direct_sum(const BlockTuple& blocks);

/// Mixture sum_b weight_b * nu_b computed exactly at the atom level; equals
/// the joint measure of the direct sum.
JointSpectralMeasure mixture_measure(const BlockTuple& blocks, const Tolerance& tol = {});

}  // namespace specflag
