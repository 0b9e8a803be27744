#include "specflag/hsproj.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace specflag {

Region1D Region1D::full_plane() {
    Region1D r;
    r.full_ = true;
    return r;
}

Region1D Region1D::disk(Complex center, double radius) {
    if (radius <= 0.0) throw Error("Region1D::disk: radius must be positive");
    Region1D r;
    r.disks_.push_back({center, radius});
    return r;
}

Region1D Region1D::halfplane(Complex normal, double offset) {
    const double mag = std::abs(normal);
    if (mag == 0.0) throw Error("Region1D::halfplane: zero normal");
    Region1D r;
    r.halfplanes_.push_back({normal / mag, offset / mag});
    return r;
}

Region1D Region1D::unite(const Region1D& other) const {
    if (full_ || other.full_) return full_plane();
    Region1D r = *this;
    r.disks_.insert(r.disks_.end(), other.disks_.begin(), other.disks_.end());
    r.halfplanes_.insert(r.halfplanes_.end(), other.halfplanes_.begin(),
                         other.halfplanes_.end());
    return r;
}

bool Region1D::contains(Complex z) const {
    if (full_) return true;
    for (const auto& d : disks_)
        if (std::abs(z - d.center) <= d.radius) return true;
    for (const auto& h : halfplanes_)
        if ((std::conj(h.normal) * z).real() <= h.offset) return true;
    return false;
}

double Region1D::boundary_distance(Complex z) const {
    if (full_) return std::numeric_limits<double>::infinity();
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& d : disks_)
        dist = std::min(dist, std::abs(std::abs(z - d.center) - d.radius));
    for (const auto& h : halfplanes_)
        dist = std::min(dist, std::abs((std::conj(h.normal) * z).real() - h.offset));
    return dist;
}

Region1D Region1D::conjugate() const {
    if (full_) return full_plane();
    Region1D r;
    for (const auto& d : disks_) r.disks_.push_back({std::conj(d.center), d.radius});
    for (const auto& h : halfplanes_) r.halfplanes_.push_back({std::conj(h.normal), h.offset});
    return r;
}

Region Region::rectangle(std::vector<Region1D> coords) {
    if (coords.empty()) throw Error("Region::rectangle: no coordinates");
    Region r(Kind::kRectangle, static_cast<int>(coords.size()));
    r.coords_ = std::move(coords);
    return r;
}

Region Region::union_of(std::vector<Region> members) {
    if (members.empty()) throw Error("Region::union_of: no members");
    const int n = members[0].n();
    for (const auto& m : members)
        if (m.n() != n) throw DimensionMismatch("Region::union_of: dimensions differ");
    Region r(Kind::kUnion, n);
    r.members_ = std::move(members);
    return r;
}

Region Region::complement(Region inner) {
    Region r(Kind::kComplement, inner.n());
    r.inner_ = std::make_shared<const Region>(std::move(inner));
    return r;
}

Region Region::predicate(int n, std::function<bool(const std::vector<Complex>&)> fn) {
    Region r(Kind::kPredicate, n);
    r.pred_ = std::move(fn);
    return r;
}

Region Region::polydisk(const std::vector<Complex>& center, double radius) {
    std::vector<Region1D> coords;
    coords.reserve(center.size());
    for (const Complex& c : center) coords.push_back(Region1D::disk(c, radius));
    return rectangle(std::move(coords));
}

Region Region::full(int n) {
    return rectangle(std::vector<Region1D>(static_cast<size_t>(n), Region1D::full_plane()));
}

bool Region::contains(const std::vector<Complex>& z) const {
    if (static_cast<int>(z.size()) != n_)
        throw DimensionMismatch("Region::contains: point dimension != n");
    switch (kind_) {
        case Kind::kRectangle:
            for (int i = 0; i < n_; ++i)
                if (!coords_[static_cast<size_t>(i)].contains(z[static_cast<size_t>(i)])) return false;
            return true;
        case Kind::kUnion:
            for (const auto& m : members_)
                if (m.contains(z)) return true;
            return false;
        case Kind::kComplement:
            return !inner_->contains(z);
        case Kind::kPredicate:
            return pred_(z);
    }
    return false;
}

double Region::boundary_distance(const std::vector<Complex>& z) const {
    switch (kind_) {
        case Kind::kRectangle: {
            double d = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n_; ++i)
                d = std::min(d, coords_[static_cast<size_t>(i)].boundary_distance(z[static_cast<size_t>(i)]));
            return d;
        }
        case Kind::kUnion: {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& m : members_) d = std::min(d, m.boundary_distance(z));
            return d;
        }
        case Kind::kComplement:
            return inner_->boundary_distance(z);
        case Kind::kPredicate:
            throw Error("Region: predicate regions have no boundary metric");
    }
    return 0.0;
}

Region Region::conjugate() const {
    switch (kind_) {
        case Kind::kRectangle: {
            std::vector<Region1D> coords;
            coords.reserve(coords_.size());
            for (const auto& c : coords_) coords.push_back(c.conjugate());
            return rectangle(std::move(coords));
        }
        case Kind::kUnion: {
            std::vector<Region> members;
            members.reserve(members_.size());
            for (const auto& m : members_) members.push_back(m.conjugate());
            return union_of(std::move(members));
        }
        case Kind::kComplement:
            return complement(inner_->conjugate());
        case Kind::kPredicate: {
            auto fn = pred_;
            return predicate(n_, [fn](const std::vector<Complex>& z) {
                std::vector<Complex> zc(z.size());
                for (size_t i = 0; i < z.size(); ++i) zc[i] = std::conj(z[i]);
                return fn(zc);
            });
        }
    }
    throw Error("Region::conjugate: unreachable");
}

bool Region::constructible() const {
    switch (kind_) {
        case Kind::kRectangle:
            return true;
        case Kind::kUnion:
            return std::all_of(members_.begin(), members_.end(),
                               [](const Region& m) { return m.constructible(); });
        case Kind::kComplement:
            return inner_->constructible();
        case Kind::kPredicate:
            return false;
    }
    return false;
}

double invariance_residual(const CommutingTuple& t, const Subspace& q) {
    if (q.dim() == 0 || q.dim() == q.ambient_dim()) return 0.0;
    const CMatrix p = q.projector();
    const CMatrix rest = CMatrix::Identity(t.k(), t.k()) - p;
    double worst = 0.0;
    for (int i = 0; i < t.n(); ++i) {
        const double scale = std::max(1.0, operator_norm(t.matrix(i)));
        worst = std::max(worst, operator_norm(rest * t.matrix(i) * p) / scale);
    }
    return worst;
}

namespace {

// Stable selected-first permutation.
std::vector<int> selected_first(const std::vector<bool>& sel) {
    std::vector<int> perm;
    perm.reserve(sel.size());
    for (size_t i = 0; i < sel.size(); ++i)
        if (sel[i]) perm.push_back(static_cast<int>(i));
    for (size_t i = 0; i < sel.size(); ++i)
        if (!sel[i]) perm.push_back(static_cast<int>(i));
    return perm;
}

void check_boundary(Complex ev, const Region1D& b, double band) {
    const double d = b.boundary_distance(ev);
    if (d < band) throw BoundaryAmbiguous(ev, d);
}

void check_boundary_joint(const std::vector<Complex>& ev, const Region& x, double band) {
    const double d = x.boundary_distance(ev);
    if (d < band) throw BoundaryAmbiguous(ev.empty() ? Complex(0) : ev[0], d);
}

HSProjection make_projection(Subspace sub, long num, long den) {
    return HSProjection{std::move(sub), num, den};
}

// Sorted simultaneous-Schur construction: invariant subspace spanned by the
// Schur vectors of the positions whose joint eigenvalue lies in x.
HSProjection hs_by_sorted_schur(const CommutingTuple& t, const Region& x,
                                const Tolerance& tol) {
    const SchurFlag flag = simultaneous_schur(t, tol);
    const auto evs = joint_eigenvalues(flag);
    double scale = 0.0;
    for (int i = 0; i < t.n(); ++i) scale = std::max(scale, operator_norm(t.matrix(i)));
    const double band = tol.threshold(scale);

    std::vector<bool> sel(static_cast<size_t>(t.k()));
    long count = 0;
    for (int p = 0; p < t.k(); ++p) {
        check_boundary_joint(evs[static_cast<size_t>(p)], x, band);
        sel[static_cast<size_t>(p)] = x.contains(evs[static_cast<size_t>(p)]);
        if (sel[static_cast<size_t>(p)]) ++count;
    }
    if (count == 0) return make_projection(Subspace::zero(t.k()), 0, t.k());
    if (count == t.k()) return make_projection(Subspace::full(t.k()), t.k(), t.k());

    const SchurFlag sorted = reorder_schur_flag(flag, selected_first(sel));
    Subspace sub(t.k(), sorted.u.leftCols(count));
    const double inv_res = invariance_residual(t, sub);
    if (inv_res > 1e-7)
        throw NumericalFailure("hs_joint: invariance residual " + std::to_string(inv_res));
    return make_projection(std::move(sub), count, t.k());
}

}  // namespace

HSProjection hs_single(const CMatrix& a, const Region1D& b, const Tolerance& tol) {
    if (a.rows() != a.cols()) throw DimensionMismatch("hs_single: input must be square");
    const int k = static_cast<int>(a.rows());
    Eigen::ComplexSchur<CMatrix> schur(a, true);
    if (schur.info() != Eigen::Success)
        throw NumericalFailure("hs_single: Schur decomposition failed");

    const double band = tol.threshold(operator_norm(a));
    std::vector<bool> sel(static_cast<size_t>(k));
    long count = 0;
    for (int p = 0; p < k; ++p) {
        const Complex ev = schur.matrixT()(p, p);
        check_boundary(ev, b, band);
        sel[static_cast<size_t>(p)] = b.contains(ev);
        if (sel[static_cast<size_t>(p)]) ++count;
    }
    if (count == 0) return make_projection(Subspace::zero(k), 0, k);
    if (count == k) return make_projection(Subspace::full(k), k, k);

    SchurFlag flag;
    flag.u = schur.matrixU();
    flag.triangulars = {schur.matrixT()};
    const SchurFlag sorted = reorder_schur_flag(flag, selected_first(sel));
    return make_projection(Subspace(k, sorted.u.leftCols(count)), count, k);
}

HSProjection hs_joint(const CommutingTuple& t, const Region& x, const Tolerance& tol) {
    if (x.n() != t.n()) throw DimensionMismatch("hs_joint: region dimension != n");
    if (!x.constructible())
        throw Error("hs_joint: predicate regions are for verification only");

    switch (x.kind()) {
        case Region::Kind::kRectangle: {
            // Meet of the single-operator projections over the coordinates.
            Subspace acc = Subspace::full(t.k());
            for (int i = 0; i < t.n(); ++i) {
                const HSProjection pi =
                    hs_single(t.matrix(i), x.coords()[static_cast<size_t>(i)], tol);
                acc = meet(acc, pi.subspace, tol);
            }
            // The trace must equal the joint eigenvalue count in the
            // rectangle, exactly as a rational.
            const JointSpectralMeasure nu = joint_measure(t, tol);
            long count = 0;
            for (int p = 0; p < nu.size(); ++p)
                if (x.contains(nu.atom(p))) count += nu.count(p);
            if (acc.dim() != count)
                throw NumericalFailure(
                    "hs_joint: meet dimension " + std::to_string(acc.dim()) +
                    " disagrees with the eigenvalue count " + std::to_string(count));
            const double inv_res = invariance_residual(t, acc);
            if (inv_res > 1e-7)
                throw NumericalFailure("hs_joint: invariance residual " +
                                       std::to_string(inv_res));
            return make_projection(std::move(acc), count, t.k());
        }
        case Region::Kind::kUnion: {
            Subspace acc = Subspace::zero(t.k());
            for (const auto& m : x.members()) acc = join(acc, hs_joint(t, m, tol).subspace, tol);
            const JointSpectralMeasure nu = joint_measure(t, tol);
            long count = 0;
            for (int p = 0; p < nu.size(); ++p)
                if (x.contains(nu.atom(p))) count += nu.count(p);
            if (acc.dim() != count)
                throw NumericalFailure(
                    "hs_joint: join dimension " + std::to_string(acc.dim()) +
                    " disagrees with the eigenvalue count " + std::to_string(count));
            const double inv_res = invariance_residual(t, acc);
            if (inv_res > 1e-7)
                throw NumericalFailure("hs_joint: invariance residual " +
                                       std::to_string(inv_res));
            return make_projection(std::move(acc), count, t.k());
        }
        case Region::Kind::kComplement:
            return hs_by_sorted_schur(t, x, tol);
        case Region::Kind::kPredicate:
            break;
    }
    throw Error("hs_joint: unsupported region kind");
}

Compression compress(const CommutingTuple& t, const Subspace& q, const Tolerance& tol) {
    if (q.ambient_dim() != t.k())
        throw DimensionMismatch("compress: subspace ambient dimension != k");
    const double res = invariance_residual(t, q);
    if (res > tol.threshold(1.0) * 10.0)
        throw NotInvariant("compress: invariance residual " + std::to_string(res));

    Compression out;
    out.invariance_residual = res;
    if (q.dim() > 0) {
        const CMatrix f = q.frame();
        std::vector<CMatrix> mats;
        for (int i = 0; i < t.n(); ++i) mats.push_back(f.adjoint() * t.matrix(i) * f);
        out.on_range = certify_commuting(mats, tol, 1e-6);
    }
    if (q.dim() < t.k()) {
        const CMatrix g = q.orthogonal_complement().frame();
        std::vector<CMatrix> mats;
        for (int i = 0; i < t.n(); ++i) mats.push_back(g.adjoint() * t.matrix(i) * g);
        out.on_corner = certify_commuting(mats, tol, 1e-6);
    }

    // nu_T = tau(Q) nu_range + tau(1-Q) nu_corner, checked at atom level.
    BlockTuple mix;
    if (out.on_range) mix.blocks.push_back(*out.on_range);
    if (out.on_corner) mix.blocks.push_back(*out.on_corner);
    out.mixture_distance = measure_distance(joint_measure(t, tol), mixture_measure(mix, tol));
    return out;
}

DualityReport adjoint_dual(const CommutingTuple& t, const Region& e, const Tolerance& tol) {
    const HSProjection lhs = hs_joint(t.adjoint(), e, tol);
    const HSProjection inner =
        hs_joint(t, Region::complement(e.conjugate()), tol);
    Subspace rhs = inner.subspace.orthogonal_complement();
    const double d = projection_distance(lhs.subspace, rhs);
    return DualityReport{d, lhs, std::move(rhs)};
}

TransportReport similarity_transport(const CMatrix& s, const CommutingTuple& t,
                                     const Region& x, const Tolerance& tol) {
    if (s.rows() != s.cols() || static_cast<int>(s.rows()) != t.k())
        throw DimensionMismatch("similarity_transport: S must be k x k");
    Eigen::JacobiSVD<CMatrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(s.rows() - 1);
    if (smin <= tol.abs_eps)
        throw Error("similarity_transport: S is numerically singular");
    const double cond = svd.singularValues()(0) / smin;

    const CMatrix sinv = s.inverse();
    std::vector<CMatrix> conj;
    conj.reserve(static_cast<size_t>(t.n()));
    for (int i = 0; i < t.n(); ++i) conj.push_back(s * t.matrix(i) * sinv);
    const CommutingTuple st = certify_commuting(conj, tol, std::max(1e-10, 1e-13 * cond));

    HSProjection lhs = hs_joint(st, x, tol);
    const HSProjection base = hs_joint(t, x, tol);
    Subspace rhs = range_projection(s * base.subspace.projector(), tol);
    const double d = projection_distance(lhs.subspace, rhs);
    return TransportReport{d, cond, std::move(lhs), std::move(rhs)};
}

}  // namespace specflag
