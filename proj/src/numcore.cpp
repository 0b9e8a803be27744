#include "specflag/numcore.hpp"

#include <Eigen/SVD>

namespace specflag {

namespace {

// Orthonormal basis of the column space of a, keeping singular directions
// with sigma > abs_eps + rel_eps * sigma_max.
CMatrix column_space_frame(const CMatrix& a, const Tolerance& tol) {
    if (a.cols() == 0) return CMatrix(a.rows(), 0);
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = tol.threshold(sv.size() > 0 ? sv(0) : 0.0);
    int r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return svd.matrixU().leftCols(r);
}

}  // namespace

Subspace::Subspace(int ambient_dim, CMatrix frame)
    : ambient_dim_(ambient_dim), frame_(std::move(frame)) {
    if (ambient_dim_ <= 0) throw Error("Subspace: ambient dimension must be positive");
    if (frame_.rows() != ambient_dim_)
        throw DimensionMismatch("Subspace: frame rows != ambient dimension");
    require_finite(frame_, "Subspace");
    if (frame_defect() > 1e-8)
        throw Error("Subspace: frame columns are not orthonormal");
}

Subspace Subspace::zero(int ambient_dim) {
    return Subspace(ambient_dim, CMatrix(ambient_dim, 0));
}

Subspace Subspace::full(int ambient_dim) {
    return Subspace(ambient_dim, CMatrix::Identity(ambient_dim, ambient_dim));
}

Subspace Subspace::span_of(const CMatrix& a, const Tolerance& tol) {
    return Subspace(static_cast<int>(a.rows()), column_space_frame(a, tol));
}

CMatrix Subspace::projector() const {
    if (dim() == 0) return CMatrix::Zero(ambient_dim_, ambient_dim_);
    return frame_ * frame_.adjoint();
}

Subspace Subspace::orthogonal_complement() const {
    if (dim() == 0) return full(ambient_dim_);
    if (dim() == ambient_dim_) return zero(ambient_dim_);
    // Null space of frame^*: the trailing left singular vectors of the frame.
    Eigen::JacobiSVD<CMatrix> svd(frame_, Eigen::ComputeFullU);
    return Subspace(ambient_dim_, svd.matrixU().rightCols(ambient_dim_ - dim()));
}

double Subspace::frame_defect() const {
    if (dim() == 0) return 0.0;
    CMatrix g = frame_.adjoint() * frame_;
    return (g - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

Subspace range_projection(const CMatrix& a, const Tolerance& tol) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("range_projection: input must be square");
    require_finite(a, "range_projection");
    return Subspace::span_of(a, tol);
}

Subspace meet(const Subspace& p, const Subspace& q, const Tolerance& tol) {
    if (p.ambient_dim() != q.ambient_dim())
        throw DimensionMismatch("meet: ambient dimensions differ");
    if (p.dim() == 0 || q.dim() == 0) return Subspace::zero(p.ambient_dim());

    // Principal angles: singular values of F_p^* F_q are the cosines.
    // Directions with cosine ~ 1 lie in both subspaces.
    CMatrix m = p.frame().adjoint() * q.frame();
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinV);
    const auto& cosines = svd.singularValues();
    const double cos_cut = 1.0 - tol.threshold(1.0);
    int r = 0;
    while (r < cosines.size() && cosines(r) >= cos_cut) ++r;
    if (r == 0) return Subspace::zero(p.ambient_dim());
    // Q-frame images of the principal directions are orthonormal already.
    CMatrix frame = q.frame() * svd.matrixV().leftCols(r);
    return Subspace(p.ambient_dim(), frame);
}

Subspace join(const Subspace& p, const Subspace& q, const Tolerance& tol) {
    if (p.ambient_dim() != q.ambient_dim())
        throw DimensionMismatch("join: ambient dimensions differ");
    if (p.dim() == 0) return q;
    if (q.dim() == 0) return p;
    CMatrix stacked(p.ambient_dim(), p.dim() + q.dim());
    stacked << p.frame(), q.frame();
    return Subspace::span_of(stacked, tol);
}

double projection_distance(const Subspace& p, const Subspace& q) {
    if (p.ambient_dim() != q.ambient_dim())
        throw DimensionMismatch("projection_distance: ambient dimensions differ");
    return operator_norm(p.projector() - q.projector());
}

bool subspace_leq(const Subspace& p, const Subspace& q, const Tolerance& tol) {
    if (p.ambient_dim() != q.ambient_dim())
        throw DimensionMismatch("subspace_leq: ambient dimensions differ");
    if (p.dim() == 0) return true;
    if (p.dim() > q.dim()) return false;
    // (1 - Q) F_p should vanish.
    CMatrix rem = p.frame() - q.projector() * p.frame();
    return rem.cwiseAbs().maxCoeff() <= tol.threshold(1.0) * 10.0;
}

}  // namespace specflag
