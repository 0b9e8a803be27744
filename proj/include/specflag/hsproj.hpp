#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "specflag/numcore.hpp"
#include "specflag/triangular.hpp"

namespace specflag {

/// One-dimensional region: a finite union of disks and halfplanes, or the
/// full plane. Supports membership and distance-to-boundary queries.
class Region1D {
  public:
    struct Disk {
        Complex center;
        double radius;
    };
    /// { z : Re(conj(normal) * z) <= offset }, normal normalized to |.| = 1.
    struct Halfplane {
        Complex normal;
        double offset;
    };

    static Region1D full_plane();
    static Region1D disk(Complex center, double radius);
    static Region1D halfplane(Complex normal, double offset);
    /// Union with another 1-d region.
    Region1D unite(const Region1D& other) const;

    bool is_full() const { return full_; }
    bool contains(Complex z) const;
    /// Distance from z to the union of the primitive boundaries
    /// (conservative: boundaries swallowed by other members still count).
    double boundary_distance(Complex z) const;
    Region1D conjugate() const;

  private:
    bool full_ = false;
    std::vector<Disk> disks_;
    std::vector<Halfplane> halfplanes_;
};

/// Region of C^n: rectangle (per-coordinate 1-d regions), finite union,
/// complement, or a predicate (verification only, never construction).
class Region {
  public:
    enum class Kind { kRectangle, kUnion, kComplement, kPredicate };

    static Region rectangle(std::vector<Region1D> coords);
    static Region union_of(std::vector<Region> members);
    static Region complement(Region inner);
    static Region predicate(int n, std::function<bool(const std::vector<Complex>&)> fn);
    /// Product of disks around a center point.
    static Region polydisk(const std::vector<Complex>& center, double radius);
    static Region full(int n);

    Kind kind() const { return kind_; }
    int n() const { return n_; }
    bool contains(const std::vector<Complex>& z) const;
    /// Conservative distance from z to any primitive boundary involved.
    double boundary_distance(const std::vector<Complex>& z) const;
    Region conjugate() const;
    /// Whether the region tree is built only from constructible pieces
    /// (no predicates).
    bool constructible() const;

    const std::vector<Region1D>& coords() const { return coords_; }
    const std::vector<Region>& members() const { return members_; }
    const Region& inner() const { return *inner_; }

  private:
    Region(Kind k, int n) : kind_(k), n_(n) {}

    Kind kind_;
    int n_;
    std::vector<Region1D> coords_;                            // rectangle
    std::vector<Region> members_;                             // union
    std::shared_ptr<const Region> inner_;                     // complement
    std::function<bool(const std::vector<Complex>&)> pred_;   // predicate
};

/// Spectral projection onto the sum of generalized eigenspaces with
/// (joint) eigenvalues in a region. Non-orthogonal to its lattice complement
/// in general; the stored subspace is the range, the trace is the exact
/// rational eigenvalue count over k.
struct HSProjection {
    Subspace subspace;
    long trace_num = 0;
    long trace_den = 1;

    double trace() const {
        return static_cast<double>(trace_num) / static_cast<double>(trace_den);
    }
};

/// Single-operator spectral projection for the eigenvalues inside b,
/// via Schur reordering (eigenvalues in b sorted first). Eigenvalues within
/// the tolerance band of the boundary raise BoundaryAmbiguous.
HSProjection hs_single(const CMatrix& a, const Region1D& b, const Tolerance& tol = {});

/// Joint projection: rectangles as meets of per-coordinate hs_single,
/// unions as joins, complements via the sorted-Schur invariant-subspace
/// construction (never by orthocomplement).
HSProjection hs_joint(const CommutingTuple& t, const Region& x, const Tolerance& tol = {});

/// Both compressions of t by an invariant subspace q, each expressed in an
/// orthonormal frame, with the atom-level mixture check of the measure
/// decomposition. Trivial sides (q = 0 or q = 1) are absent.
struct Compression {
    std::optional<CommutingTuple> on_range;
    std::optional<CommutingTuple> on_corner;  // (1-Q) T (1-Q) in the orthocomplement
    double invariance_residual = 0.0;
    double mixture_distance = 0.0;
};

Compression compress(const CommutingTuple& t, const Subspace& q, const Tolerance& tol = {});

/// Distance between the two independently computed sides of the adjoint
/// duality: hs_joint on T^* with E versus the orthocomplement of the
/// complement-region projection of T.
struct DualityReport {
    double distance;
    HSProjection lhs;   // P(T^* : E)
    Subspace rhs;       // 1 - P(T : C^n \ E^*)
};

DualityReport adjoint_dual(const CommutingTuple& t, const Region& e, const Tolerance& tol = {});

/// Distance between hs_joint(S T S^{-1} : X) and the range projection of
/// S P(T : X), with the condition number of S reported.
struct TransportReport {
    double distance;
    double condition_number;
    HSProjection transported;  // P(S T S^-1 : X)
    Subspace image;            // [S P(T : X)]
};

TransportReport similarity_transport(const CMatrix& s, const CommutingTuple& t,
                                     const Region& x, const Tolerance& tol = {});

/// Invariance residual max_i ||(1-P) T_i P|| / max(1, ||T_i||).
double invariance_residual(const CommutingTuple& t, const Subspace& q);

}  // namespace specflag
