#include "specflag/triangular.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace specflag {

namespace {

// Orthonormal basis of the numerical kernel of m (threshold from tol).
CMatrix kernel_frame(const CMatrix& m, const Tolerance& tol) {
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = tol.threshold(sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    const int d = static_cast<int>(m.cols()) - rank;
    if (d <= 0) return CMatrix(m.cols(), 0);
    return svd.matrixV().rightCols(d);
}

// Depth-first search over eigenvalue branches in lexicographic order.
// frame spans a subspace invariant under t.matrix(i..n-1).
bool find_min_eigenvector(const CommutingTuple& t, const Tolerance& tol, int i,
                          const CMatrix& frame, std::vector<Complex>& lambda_out,
                          CVector& v_out) {
    if (i == t.n()) {
        v_out = frame.col(0);
        return true;
    }
    const CMatrix restricted = frame.adjoint() * t.matrix(i) * frame;
    Eigen::ComplexEigenSolver<CMatrix> es(restricted, false);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("common_eigenvector: eigensolver failed");

    std::vector<Complex> evs(es.eigenvalues().data(),
                             es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(evs.begin(), evs.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    // Skip near-duplicates; the kernel at one representative covers them.
    const double dedup = 1e-12 * (1.0 + std::abs(evs.back()));

    Complex prev;
    bool have_prev = false;
    for (const Complex lam : evs) {
        if (have_prev && std::abs(lam - prev) <= dedup) continue;
        prev = lam;
        have_prev = true;
        const CMatrix ker = kernel_frame(
            restricted - lam * CMatrix::Identity(restricted.rows(), restricted.cols()), tol);
        if (ker.cols() == 0) continue;
        lambda_out[static_cast<size_t>(i)] = lam;
        if (find_min_eigenvector(t, tol, i + 1, CMatrix(frame * ker), lambda_out, v_out))
            return true;
    }
    return false;
}

// Unitary (Householder) H with H e1 = v for unit v; identity when v = e1.
CMatrix completing_unitary(const CVector& v) {
    const int m = static_cast<int>(v.size());
    CVector w = v;
    if (std::abs(w(0)) > 0) w *= std::conj(w(0)) / std::abs(w(0));
    CVector u = w;
    u(0) -= 1.0;
    const double nu2 = u.squaredNorm();
    if (nu2 <= 1e-30) return CMatrix::Identity(m, m);
    return CMatrix::Identity(m, m) - (2.0 / nu2) * (u * u.adjoint());
}

double strict_lower_norm(const CMatrix& m) {
    CMatrix low = m;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i; j < m.cols(); ++j) low(i, j) = 0.0;
    return operator_norm(low);
}

}  // namespace

CommonEigenvector common_eigenvector(const CommutingTuple& t, const Tolerance& tol) {
    std::vector<Complex> lambda(static_cast<size_t>(t.n()));
    CVector v;
    if (!find_min_eigenvector(t, tol, 0, CMatrix::Identity(t.k(), t.k()), lambda, v))
        throw ResidualTooLarge("common_eigenvector: no branch met the kernel tolerance");

    v.normalize();
    // Deterministic phase: largest-modulus entry made real positive.
    int imax = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(imax))) imax = i;
    if (std::abs(v(imax)) > 0) v *= std::conj(v(imax)) / std::abs(v(imax));

    for (int i = 0; i < t.n(); ++i) {
        // Rayleigh refinement of the branch eigenvalue.
        lambda[static_cast<size_t>(i)] = v.adjoint() * t.matrix(i) * v;
        const double norm_i = operator_norm(t.matrix(i));
        const double res = (t.matrix(i) * v - lambda[static_cast<size_t>(i)] * v).norm();
        if (res > tol.threshold(norm_i) * 100.0)
            throw ResidualTooLarge("common_eigenvector: residual " + std::to_string(res) +
                                   " exceeds tolerance (ill-conditioned tuple)");
    }
    return CommonEigenvector{v, lambda};
}

SchurFlag simultaneous_schur(const CommutingTuple& t, const Tolerance& tol) {
    const int k = t.k();
    const int n = t.n();
    CMatrix u = CMatrix::Identity(k, k);
    std::vector<CMatrix> work(t.matrices());

    for (int step = 0; step < k - 1; ++step) {
        const int m = k - step;
        std::vector<CMatrix> sub;
        sub.reserve(static_cast<size_t>(n));
        for (const auto& w : work) sub.push_back(w.block(step, step, m, m));

        // The deflated corner of a commuting family stays commuting up to
        // roundoff, so certify with a relaxed threshold.
        CommutingTuple corner = certify_commuting(sub, tol, 1e-6);
        const CVector v = common_eigenvector(corner, tol).vector;

        const CMatrix h = completing_unitary(v);
        for (auto& w : work) {
            CMatrix blk = h.adjoint() * w.block(step, step, m, m) * h;
            w.block(step, step, m, m) = blk;
            if (step > 0) {
                // Upper coupling block also rotates.
                w.block(0, step, step, m) = w.block(0, step, step, m) * h;
            }
        }
        u.block(0, step, k, m) = u.block(0, step, k, m) * h;
    }

    SchurFlag flag;
    flag.u = u;
    flag.triangulars.reserve(static_cast<size_t>(n));
    double residual = 0.0;
    for (int i = 0; i < n; ++i) {
        CMatrix r = u.adjoint() * t.matrix(i) * u;
        const double scale = std::max(1.0, operator_norm(t.matrix(i)));
        residual = std::max(residual, strict_lower_norm(r) / scale);
        // Clean the strictly-lower part; the residual above records what was
        // discarded.
        for (int row = 1; row < k; ++row)
            for (int col = 0; col < row; ++col) r(row, col) = 0.0;
        flag.triangulars.push_back(std::move(r));
    }
    flag.residual = residual;
    if (residual > 1e-8)
        throw ResidualTooLarge("simultaneous_schur: strictly-lower residual " +
                               std::to_string(residual));
    return flag;
}

std::vector<std::vector<Complex>> joint_eigenvalues(const SchurFlag& flag) {
    std::vector<std::vector<Complex>> out(static_cast<size_t>(flag.k()),
                                          std::vector<Complex>(static_cast<size_t>(flag.n())));
    for (int p = 0; p < flag.k(); ++p)
        for (int i = 0; i < flag.n(); ++i)
            out[static_cast<size_t>(p)][static_cast<size_t>(i)] = flag.triangulars[static_cast<size_t>(i)](p, p);
    return out;
}

namespace {

// Swap adjacent diagonal positions p, p+1 of a simultaneous triangular
// family by one common Givens rotation. The rotation exists because the
// 2x2 compressions commute, which forces the per-coordinate eigenvector
// candidates (t_i, b_i - a_i) to be proportional across i.
void swap_adjacent(std::vector<CMatrix>& tri, CMatrix& u, int p) {
    const int n = static_cast<int>(tri.size());
    int best = -1;
    double best_mag = 0.0;
    for (int i = 0; i < n; ++i) {
        const Complex a = tri[static_cast<size_t>(i)](p, p);
        const Complex b = tri[static_cast<size_t>(i)](p + 1, p + 1);
        const Complex tcoup = tri[static_cast<size_t>(i)](p, p + 1);
        const double mag = std::norm(tcoup) + std::norm(b - a);
        if (mag > best_mag) {
            best_mag = mag;
            best = i;
        }
    }

    CMatrix g(2, 2);
    if (best < 0) {
        // Equal joint values with no coupling: plain transposition.
        g << 0.0, 1.0, 1.0, 0.0;
    } else {
        const Complex a = tri[static_cast<size_t>(best)](p, p);
        const Complex b = tri[static_cast<size_t>(best)](p + 1, p + 1);
        const Complex tcoup = tri[static_cast<size_t>(best)](p, p + 1);
        Eigen::Vector2cd v;
        v << tcoup, b - a;
        v.normalize();
        g << v(0), -std::conj(v(1)), v(1), std::conj(v(0));
    }

    for (auto& r : tri) {
        r.middleRows(p, 2) = g.adjoint() * r.middleRows(p, 2);
        r.middleCols(p, 2) = r.middleCols(p, 2) * g;
        r(p + 1, p) = 0.0;
    }
    u.middleCols(p, 2) = u.middleCols(p, 2) * g;
}

}  // namespace

SchurFlag reorder_schur_flag(const SchurFlag& flag, const std::vector<int>& perm) {
    const int k = flag.k();
    if (static_cast<int>(perm.size()) != k)
        throw DimensionMismatch("reorder_schur_flag: permutation size != k");

    std::vector<int> rank(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) rank[static_cast<size_t>(perm[static_cast<size_t>(j)])] = j;

    SchurFlag out = flag;
    std::vector<int> cur(static_cast<size_t>(k));
    std::iota(cur.begin(), cur.end(), 0);

    // Bubble sort with unitary adjacent swaps.
    bool moved = true;
    while (moved) {
        moved = false;
        for (int p = 0; p + 1 < k; ++p) {
            if (rank[static_cast<size_t>(cur[static_cast<size_t>(p)])] >
                rank[static_cast<size_t>(cur[static_cast<size_t>(p + 1)])]) {
                swap_adjacent(out.triangulars, out.u, p);
                std::swap(cur[static_cast<size_t>(p)], cur[static_cast<size_t>(p + 1)]);
                moved = true;
            }
        }
    }
    return out;
}

namespace {

double chebyshev(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

JointSpectralMeasure::JointSpectralMeasure(int n,
                                           const std::vector<std::vector<Complex>>& points,
                                           const std::vector<long>& counts, long denominator)
    : n_(n), denom_(denominator) {
    if (points.size() != counts.size())
        throw DimensionMismatch("JointSpectralMeasure: points/counts size mismatch");
    if (denominator <= 0) throw Error("JointSpectralMeasure: denominator must be positive");
    long total = 0;
    double max_norm = 0.0;
    for (size_t p = 0; p < points.size(); ++p) {
        if (static_cast<int>(points[p].size()) != n)
            throw DimensionMismatch("JointSpectralMeasure: point dimension != n");
        if (counts[p] <= 0) throw Error("JointSpectralMeasure: counts must be positive");
        total += counts[p];
        for (const Complex& z : points[p]) max_norm = std::max(max_norm, std::abs(z));
    }
    if (total != denominator)
        throw Error("JointSpectralMeasure: weights must sum to 1 (counts != denominator)");
    merge_radius_ = 1e-7 * (1.0 + max_norm);

    // Union-find clustering within the merge radius.
    const size_t m = points.size();
    std::vector<size_t> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j)
            if (chebyshev(points[i], points[j]) <= merge_radius_) parent[find(i)] = find(j);

    std::map<size_t, std::pair<std::vector<Complex>, long>> clusters;
    for (size_t i = 0; i < m; ++i) {
        const size_t root = find(i);
        auto it = clusters.find(root);
        if (it == clusters.end()) {
            clusters[root] = {points[i], counts[i]};
        } else {
            if (lex_less(points[i], it->second.first)) it->second.first = points[i];
            it->second.second += counts[i];
        }
    }
    for (auto& [root, ac] : clusters) {
        atoms_.push_back(std::move(ac.first));
        counts_.push_back(ac.second);
    }
    // Sort atoms lexicographically, carrying counts.
    std::vector<size_t> order(atoms_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return lex_less(atoms_[a], atoms_[b]); });
    std::vector<std::vector<Complex>> atoms2;
    std::vector<long> counts2;
    for (size_t i : order) {
        atoms2.push_back(std::move(atoms_[i]));
        counts2.push_back(counts_[i]);
    }
    atoms_ = std::move(atoms2);
    counts_ = std::move(counts2);
}

JointSpectralMeasure::JointSpectralMeasure(int n,
                                           const std::vector<std::vector<Complex>>& points,
                                           long denominator)
    : JointSpectralMeasure(n, points, std::vector<long>(points.size(), 1), denominator) {}

double JointSpectralMeasure::max_atom_norm() const {
    double m = 0.0;
    for (const auto& a : atoms_)
        for (const Complex& z : a) m = std::max(m, std::abs(z));
    return m;
}

JointSpectralMeasure joint_measure(const CommutingTuple& t, const Tolerance& tol) {
    const SchurFlag flag = simultaneous_schur(t, tol);
    return JointSpectralMeasure(t.n(), joint_eigenvalues(flag), t.k());
}

JointSpectralMeasure marginal(const JointSpectralMeasure& nu, int i) {
    if (i < 1 || i > nu.n()) throw Error("marginal: coordinate index out of range");
    std::vector<std::vector<Complex>> pts;
    std::vector<long> counts;
    for (int p = 0; p < nu.size(); ++p) {
        pts.push_back({nu.atom(p)[static_cast<size_t>(i - 1)]});
        counts.push_back(nu.count(p));
    }
    return JointSpectralMeasure(1, pts, counts, nu.denominator());
}

JointSpectralMeasure pushforward(const JointSpectralMeasure& nu, const PointMap& f, int m) {
    std::vector<std::vector<Complex>> pts;
    std::vector<long> counts;
    for (int p = 0; p < nu.size(); ++p) {
        std::vector<Complex> img = f(nu.atom(p));
        if (static_cast<int>(img.size()) != m)
            throw DimensionMismatch("pushforward: map output dimension != m");
        pts.push_back(std::move(img));
        counts.push_back(nu.count(p));
    }
    return JointSpectralMeasure(m, pts, counts, nu.denominator());
}

JointSpectralMeasure pushforward(const JointSpectralMeasure& nu,
                                 const std::vector<CommPolynomial>& f) {
    for (const auto& fj : f)
        if (fj.n() != nu.n()) throw DimensionMismatch("pushforward: polynomial arity != n");
    return pushforward(
        nu,
        [&f](const std::vector<Complex>& z) {
            std::vector<Complex> out;
            out.reserve(f.size());
            for (const auto& fj : f) out.push_back(fj.eval(z));
            return out;
        },
        static_cast<int>(f.size()));
}

double measure_distance(const JointSpectralMeasure& a, const JointSpectralMeasure& b) {
    if (a.n() != b.n()) throw DimensionMismatch("measure_distance: dimensions differ");
    const long l = std::lcm(a.denominator(), b.denominator());
    std::vector<std::vector<Complex>> ea, eb;
    for (int p = 0; p < a.size(); ++p)
        for (long c = 0; c < a.count(p) * (l / a.denominator()); ++c) ea.push_back(a.atom(p));
    for (int p = 0; p < b.size(); ++p)
        for (long c = 0; c < b.count(p) * (l / b.denominator()); ++c) eb.push_back(b.atom(p));
    if (ea.size() != eb.size()) return std::numeric_limits<double>::infinity();
    std::sort(ea.begin(), ea.end(), lex_less);
    std::sort(eb.begin(), eb.end(), lex_less);
    double d = 0.0;
    for (size_t i = 0; i < ea.size(); ++i) d = std::max(d, chebyshev(ea[i], eb[i]));
    return d;
}

int BlockTuple::total_dim() const {
    int k = 0;
    for (const auto& b : blocks) k += b.k();
    return k;
}

std::vector<double> BlockTuple::weights() const {
    const double total = total_dim();
    std::vector<double> w;
    w.reserve(blocks.size());
    for (const auto& b : blocks) w.push_back(b.k() / total);
    return w;
}

CommutingTuple direct_sum(const BlockTuple& blocks) {
    if (blocks.blocks.empty()) throw Error("direct_sum: no blocks");
    const int n = blocks.blocks[0].n();
    for (const auto& b : blocks.blocks)
        if (b.n() != n) throw DimensionMismatch("direct_sum: blocks disagree on n");
    const int k = blocks.total_dim();
    std::vector<CMatrix> mats(static_cast<size_t>(n), CMatrix::Zero(k, k));
    int off = 0;
    for (const auto& b : blocks.blocks) {
        for (int i = 0; i < n; ++i) mats[static_cast<size_t>(i)].block(off, off, b.k(), b.k()) = b.matrix(i);
        off += b.k();
    }
    return certify_commuting(mats);
}

JointSpectralMeasure mixture_measure(const BlockTuple& blocks, const Tolerance& tol) {
    // An atom with count c in a block of size k_b carries weight
    // (c / k_b) * (k_b / total) = c / total.
    const int total = blocks.total_dim();
    std::vector<std::vector<Complex>> pts;
    std::vector<long> counts;
    for (const auto& b : blocks.blocks) {
        const JointSpectralMeasure nu = joint_measure(b, tol);
        for (int p = 0; p < nu.size(); ++p) {
            pts.push_back(nu.atom(p));
            counts.push_back(nu.count(p));
        }
    }
    return JointSpectralMeasure(blocks.blocks[0].n(), pts, counts, total);
}

}  // namespace specflag
