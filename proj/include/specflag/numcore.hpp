#pragma once

#include "specflag/types.hpp"

namespace specflag {

/// A subspace of C^k stored as an orthonormal frame (k x m, m possibly 0).
/// The induced orthogonal projector is frame * frame^*.
class Subspace {
  public:
    Subspace(int ambient_dim, CMatrix frame);

    static Subspace zero(int ambient_dim);
    static Subspace full(int ambient_dim);
    /// Span of the columns of a at numerical rank given by tol.
    static Subspace span_of(const CMatrix& a, const Tolerance& tol);

    int ambient_dim() const { return ambient_dim_; }
    int dim() const { return static_cast<int>(frame_.cols()); }
    const CMatrix& frame() const { return frame_; }
    CMatrix projector() const;
    Subspace orthogonal_complement() const;

    /// Largest residual of the orthonormality relation frame^* frame = I.
    double frame_defect() const;

  private:
    int ambient_dim_;
    CMatrix frame_;
};

/// Projection onto the closure of the range of a square matrix ([T] in
/// lattice notation), at the numerical rank determined by tol.
Subspace range_projection(const CMatrix& a, const Tolerance& tol);

/// Intersection of two subspaces, computed via principal angles: the SVD of
/// P.frame()^* Q.frame() yields cosines; pairs with cosine above the
/// tol-derived threshold span the meet.
Subspace meet(const Subspace& p, const Subspace& q, const Tolerance& tol);

/// Closure of P + Q: column-space union at numerical rank.
Subspace join(const Subspace& p, const Subspace& q, const Tolerance& tol);

/// Operator-norm distance of the orthogonal projectors; 0 iff equal subspaces.
double projection_distance(const Subspace& p, const Subspace& q);

/// Whether p <= q as projections, up to tol (every frame vector of p lies in q).
bool subspace_leq(const Subspace& p, const Subspace& q, const Tolerance& tol);

}  // namespace specflag
