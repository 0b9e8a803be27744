#pragma once

#include "specflag/hsproj.hpp"
#include "specflag/triangular.hpp"

namespace specflag {

/// Space-filling spectral ordering: a depth-d piecewise-linear approximation
/// of a continuous surjection [0,1] -> product of disks {|z_j| <= r_j}.
/// The base 2-d curve is the Hilbert curve with h(0) = (0,0), h(1) = (1,0);
/// higher dimensions expand the last coordinate through the base curve
/// recursively; each complex coordinate is reached through a concentric
/// (area-style) square-to-disk map scaled by its radius.
class PeanoCurve {
  public:
    PeanoCurve(int n, std::vector<double> radii, int depth);

    int n() const { return n_; }
    int depth() const { return depth_; }
    const std::vector<double>& radii() const { return radii_; }

    /// Point on the curve in C^n.
    std::vector<Complex> operator()(double t) const;
    /// Underlying point in [0,1]^{2n} before the square-to-disk maps.
    std::vector<double> cube_point(double t) const;
    /// Pull a point of the polydisk back into [0,1]^{2n}; clamps coordinates
    /// within tol of the disk boundary, throws AtomOutsidePolydisk beyond.
    std::vector<double> to_cube(const std::vector<Complex>& z, const Tolerance& tol) const;

  private:
    int n_;
    std::vector<double> radii_;
    int depth_;
};

/// Depth-d piecewise-linear 2-d Hilbert curve with h(0)=(0,0), h(1)=(1,0).
void hilbert_point(double t, int depth, double& x, double& y);
/// Index in [0, 4^depth) of the curve cell containing (x, y); ties resolve
/// toward the smaller parameter.
std::uint64_t hilbert_cell_index(double x, double y, int depth);

/// Concentric square-to-disk map [0,1]^2 -> closed unit disk and its inverse.
Complex square_to_disk(double u, double v);
void disk_to_square(Complex z, double& u, double& v);

/// Curve parameter per atom: the smallest t whose depth-d curve cell
/// contains the atom (exact cell search for n = 1, sampled minimal-preimage
/// search otherwise). Ties between atoms at equal t break lexicographically
/// on the atom coordinates.
struct SpectralOrdering {
    JointSpectralMeasure measure;
    std::vector<double> params;  // t-value per atom, aligned with measure atoms
    int depth;
};

SpectralOrdering assign_params(const PeanoCurve& curve, const JointSpectralMeasure& nu,
                               const Tolerance& tol = {});

/// Increasing family of invariant projections q_t = P(T : rho([0,t])) at the
/// atom breakpoints, together with the orthonormal basis refining the flag.
struct Flag {
    std::vector<double> breakpoints;    // increasing t-values
    std::vector<Subspace> projections;  // strictly increasing, last = identity
    std::vector<long> dims;             // cumulative multiplicities
    SchurFlag schur;                    // simultaneous Schur form in flag order
    std::vector<std::vector<Complex>> atom_order;  // atom per breakpoint
};

Flag build_flag(const CommutingTuple& t, const SpectralOrdering& ordering,
                const Tolerance& tol = {});

/// The unitary whose columns refine the flag, with the triangular forms
/// (diagonals ordered by curve parameter).
struct FlagTriangularization {
    CMatrix v;
    std::vector<CMatrix> triangulars;
    double residual;
};

FlagTriangularization triangularize_by_flag(const CommutingTuple& t, const Flag& flag);

/// Conditional expectation onto the flag diagonal: the diagonal part of
/// V^* S V in the flag basis, returned in the original basis. Requires S
/// upper triangular with respect to the flag (NotTriangular otherwise).
CMatrix diag_expectation(const CMatrix& s, const Flag& flag, const Tolerance& tol = {});

/// Checks of the upper-triangularization theorem for S = f(T): the
/// eigenvalue distribution of S against the pushforward of the joint
/// measure, and the nilpotency of S - E_D(S).
struct SimultUTReport {
    double measure_dist;
    bool defect_nilpotent;
};

SimultUTReport verify_simultut(const CommPolynomial& f, const CommutingTuple& t,
                               const Flag& flag, const Tolerance& tol = {});

}  // namespace specflag
