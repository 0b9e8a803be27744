#include "specflag/jointspec.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <bit>
#include <cmath>
#include <thread>

namespace specflag {

int ExteriorAlgebra::wedge_sign(int j, unsigned mask) {
    const unsigned bit = 1u << (j - 1);
    if (mask & bit) return 0;
    const unsigned below = mask & (bit - 1);
    return (std::popcount(below) % 2 == 0) ? 1 : -1;
}

ExteriorAlgebra exterior_ops(int n) {
    if (n < 1 || n > 6) throw UnsupportedDimension("exterior_ops: n must be in 1..6");
    ExteriorAlgebra ext;
    ext.n = n;
    ext.dim = 1 << n;
    ext.wedge.reserve(static_cast<size_t>(n));
    for (int j = 1; j <= n; ++j) {
        CMatrix l = CMatrix::Zero(ext.dim, ext.dim);
        for (unsigned mask = 0; mask < static_cast<unsigned>(ext.dim); ++mask) {
            const int sign = ExteriorAlgebra::wedge_sign(j, mask);
            if (sign != 0) l(static_cast<int>(mask | (1u << (j - 1))), static_cast<int>(mask)) = sign;
        }
        ext.wedge.push_back(std::move(l));
    }
    return ext;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

double selfadjoint_sigma_min(const CMatrix& a) {
    const int dim = static_cast<int>(a.rows());
    if (dim <= 512) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw NumericalFailure("selfadjoint_sigma_min: eigensolver failed");
        return es.eigenvalues().cwiseAbs().minCoeff();
    }
    // Inverse iteration on the shifted operator; self-adjointness makes the
    // smallest singular value the reciprocal of the largest of the inverse.
    Eigen::PartialPivLU<CMatrix> lu(a);
    CVector v = CVector::Ones(dim);
    v.normalize();
    double mu = 0.0;
    for (int it = 0; it < 60; ++it) {
        CVector w = lu.solve(v);
        const double norm = w.norm();
        if (!std::isfinite(norm) || norm == 0.0) return 0.0;
        w /= norm;
        const double mu_new = std::abs((w.adjoint() * a * w)(0, 0));
        if (it > 4 && std::abs(mu_new - mu) <= 1e-14 * (1.0 + std::abs(mu_new))) {
            mu = mu_new;
            break;
        }
        mu = mu_new;
        v = w;
    }
    return mu;
}

KoszulOperator alpha(const CommutingTuple& t, const std::vector<Complex>& w) {
    if (static_cast<int>(w.size()) != t.n())
        throw DimensionMismatch("alpha: point dimension != n");
    const ExteriorAlgebra ext = exterior_ops(t.n());
    const int dim = ext.dim * t.k();
    CMatrix delta = CMatrix::Zero(dim, dim);
    for (int j = 0; j < t.n(); ++j) {
        const CMatrix shifted =
            t.matrix(j) - w[static_cast<size_t>(j)] * CMatrix::Identity(t.k(), t.k());
        delta += kron(ext.wedge[static_cast<size_t>(j)], shifted);
    }
    KoszulOperator out;
    out.n = t.n();
    out.k = t.k();
    out.matrix = delta + delta.adjoint();
    out.sigma_min = selfadjoint_sigma_min(out.matrix);
    return out;
}

HarteVerdict harte_member(const CommutingTuple& t, const std::vector<Complex>& lambda,
                          HarteSide side, const Tolerance& tol) {
    if (static_cast<int>(lambda.size()) != t.n())
        throw DimensionMismatch("harte_member: point dimension != n");
    CMatrix h = CMatrix::Zero(t.k(), t.k());
    double norm2 = 0.0;
    for (int i = 0; i < t.n(); ++i) {
        const CMatrix d =
            t.matrix(i) - lambda[static_cast<size_t>(i)] * CMatrix::Identity(t.k(), t.k());
        h += (side == HarteSide::kLeft) ? CMatrix(d.adjoint() * d) : CMatrix(d * d.adjoint());
        const double nrm = operator_norm(t.matrix(i));
        norm2 += nrm * nrm;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("harte_member: eigensolver failed");
    const double margin = std::max(0.0, es.eigenvalues().minCoeff());
    // The positive element is quadratic in the tuple, so the threshold
    // carries the quadratic scale.
    const double cut = tol.abs_eps + tol.rel_eps * (1.0 + norm2);
    return HarteVerdict{margin <= cut, margin};
}

KoszulEndReport koszul_end_checks(const CommutingTuple& t, const Tolerance& tol) {
    const int k = t.k();
    const int n = t.n();
    CMatrix row(k, n * k);
    CMatrix col(n * k, k);
    for (int i = 0; i < n; ++i) {
        row.middleCols(i * k, k) = t.matrix(i);
        col.middleRows(i * k, k) = t.matrix(i);
    }
    Eigen::JacobiSVD<CMatrix> svd_row(row, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::JacobiSVD<CMatrix> svd_col(col, Eigen::ComputeThinU | Eigen::ComputeThinV);
    KoszulEndReport report;
    report.sigma_row = svd_row.singularValues()(k - 1);
    report.sigma_col = svd_col.singularValues()(k - 1);
    const double cut = tol.threshold(std::max(svd_row.singularValues()(0),
                                              svd_col.singularValues()(0)));
    report.delta0_surjective = report.sigma_row > cut;
    report.deltan_bounded_below = report.sigma_col > cut;
    report.b_residual = report.s_residual = std::numeric_limits<double>::infinity();

    const CMatrix eye = CMatrix::Identity(k, k);
    if (report.delta0_surjective) {
        // Minimal-norm solution of [T_1 ... T_n] B = I.
        const CMatrix b = svd_row.solve(eye);
        CMatrix recon = CMatrix::Zero(k, k);
        for (int i = 0; i < n; ++i) {
            report.b_witness.push_back(b.middleRows(i * k, k));
            recon += t.matrix(i) * report.b_witness.back();
        }
        report.b_residual = operator_norm(recon - eye);
    }
    if (report.deltan_bounded_below) {
        // Want S with S [T_1; ...; T_n] = I; solve the adjoint system
        // col^* Y = I (minimal norm) and take S = Y^*.
        Eigen::JacobiSVD<CMatrix> svd_colH(CMatrix(col.adjoint()),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
        const CMatrix s_full = svd_colH.solve(eye).adjoint();
        CMatrix recon = CMatrix::Zero(k, k);
        for (int i = 0; i < n; ++i) {
            report.s_witness.push_back(s_full.middleCols(i * k, k));
            recon += report.s_witness.back() * t.matrix(i);
        }
        report.s_residual = operator_norm(recon - eye);
    }
    return report;
}

SpectrumScan scan(const CommutingTuple& t, const std::vector<std::vector<Complex>>& grid,
                  const Tolerance& tol, int threads) {
    SpectrumScan out;
    out.grid = grid;
    out.tol = tol;
    out.harte_margins.assign(grid.size(), 0.0);
    out.alpha_margins.assign(grid.size(), 0.0);

    auto worker = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            out.harte_margins[i] = harte_member(t, grid[i], HarteSide::kLeft, tol).margin;
            out.alpha_margins[i] = alpha(t, grid[i]).sigma_min;
        }
    };

    threads = std::max(1, threads);
    if (threads == 1 || grid.size() < 2) {
        worker(0, grid.size());
        return out;
    }
    // Rows are written by index, so the result is identical for any schedule.
    std::vector<std::thread> pool;
    const size_t chunk = (grid.size() + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
    for (int w = 0; w < threads; ++w) {
        const size_t begin = static_cast<size_t>(w) * chunk;
        const size_t end = std::min(grid.size(), begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace specflag
