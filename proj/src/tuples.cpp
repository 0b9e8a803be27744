#include "specflag/tuples.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>

namespace specflag {

CommutingTuple certify_commuting(const std::vector<CMatrix>& matrices,
                                 const Tolerance& tol,
                                 double certification_threshold) {
    (void)tol;
    if (matrices.empty()) throw Error("certify_commuting: empty tuple");
    const int k = static_cast<int>(matrices[0].rows());
    for (const auto& m : matrices) {
        if (m.rows() != m.cols())
            throw DimensionMismatch("certify_commuting: matrices must be square");
        if (m.rows() != k)
            throw DimensionMismatch("certify_commuting: sizes differ across the tuple");
        require_finite(m, "certify_commuting");
    }
    const int n = static_cast<int>(matrices.size());
    std::vector<double> norms(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) norms[static_cast<size_t>(i)] = operator_norm(matrices[static_cast<size_t>(i)]);

    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const CMatrix comm = matrices[static_cast<size_t>(i)] * matrices[static_cast<size_t>(j)] -
                                 matrices[static_cast<size_t>(j)] * matrices[static_cast<size_t>(i)];
            const double denom = std::max(1.0, norms[static_cast<size_t>(i)] * norms[static_cast<size_t>(j)]);
            const double r = operator_norm(comm) / denom;
            if (r > certification_threshold) throw NonCommuting(i, j, r);
            worst = std::max(worst, r);
        }
    }
    return CommutingTuple(k, n, matrices, worst);
}

CommutingTuple CommutingTuple::adjoint() const {
    std::vector<CMatrix> adj;
    adj.reserve(mats_.size());
    for (const auto& m : mats_) adj.push_back(m.adjoint());
    return CommutingTuple(k_, n_, std::move(adj), comm_residual_);
}

CommutingTuple CommutingTuple::subtuple(const std::vector<int>& indices) const {
    std::vector<CMatrix> sel;
    sel.reserve(indices.size());
    for (int i : indices) {
        if (i < 0 || i >= n_) throw Error("subtuple: index out of range");
        sel.push_back(mats_[static_cast<size_t>(i)]);
    }
    return CommutingTuple(k_, static_cast<int>(sel.size()), std::move(sel), comm_residual_);
}

CommPolynomial CommPolynomial::coordinate(int n, int j) {
    if (j < 1 || j > n) throw Error("CommPolynomial::coordinate: index out of range");
    CommPolynomial p(n);
    MultiIndex idx(static_cast<size_t>(n), 0);
    idx[static_cast<size_t>(j - 1)] = 1;
    p.add_term(idx, 1.0);
    return p;
}

CommPolynomial CommPolynomial::constant(int n, Complex c) {
    CommPolynomial p(n);
    p.add_term(MultiIndex(static_cast<size_t>(n), 0), c);
    return p;
}

void CommPolynomial::add_term(const MultiIndex& idx, Complex coeff) {
    if (static_cast<int>(idx.size()) != n_)
        throw DimensionMismatch("CommPolynomial: multi-index length != n");
    for (int d : idx)
        if (d < 0) throw Error("CommPolynomial: negative exponent");
    auto it = terms_.find(idx);
    if (it == terms_.end()) {
        if (coeff != Complex(0.0)) terms_[idx] = coeff;
    } else {
        it->second += coeff;
        if (it->second == Complex(0.0)) terms_.erase(it);
    }
}

int CommPolynomial::total_degree() const {
    int d = 0;
    for (const auto& [idx, c] : terms_) {
        int s = 0;
        for (int e : idx) s += e;
        d = std::max(d, s);
    }
    return d;
}

Complex CommPolynomial::eval(const std::vector<Complex>& z) const {
    if (static_cast<int>(z.size()) != n_)
        throw DimensionMismatch("CommPolynomial::eval: point dimension != n");
    Complex acc = 0.0;
    for (const auto& [idx, c] : terms_) {
        Complex term = c;
        for (int j = 0; j < n_; ++j)
            for (int e = 0; e < idx[static_cast<size_t>(j)]; ++e) term *= z[static_cast<size_t>(j)];
        acc += term;
    }
    return acc;
}

CommPolynomial CommPolynomial::operator+(const CommPolynomial& other) const {
    if (n_ != other.n_) throw DimensionMismatch("CommPolynomial: arity mismatch");
    CommPolynomial out = *this;
    for (const auto& [idx, c] : other.terms_) out.add_term(idx, c);
    return out;
}

CommPolynomial CommPolynomial::operator*(const CommPolynomial& other) const {
    if (n_ != other.n_) throw DimensionMismatch("CommPolynomial: arity mismatch");
    CommPolynomial out(n_);
    for (const auto& [ia, ca] : terms_) {
        for (const auto& [ib, cb] : other.terms_) {
            MultiIndex idx(static_cast<size_t>(n_));
            for (int j = 0; j < n_; ++j) idx[static_cast<size_t>(j)] = ia[static_cast<size_t>(j)] + ib[static_cast<size_t>(j)];
            out.add_term(idx, ca * cb);
        }
    }
    return out;
}

CommPolynomial CommPolynomial::operator*(Complex c) const {
    CommPolynomial out(n_);
    for (const auto& [idx, coeff] : terms_) out.add_term(idx, coeff * c);
    return out;
}

CMatrix eval_poly(const CommPolynomial& f, const CommutingTuple& t) {
    if (f.n() != t.n()) throw DimensionMismatch("eval_poly: arity mismatch");
    const int k = t.k();

    // Cache powers of each T_j up to the maximum exponent appearing in f.
    std::vector<int> max_exp(static_cast<size_t>(t.n()), 0);
    for (const auto& [idx, c] : f.terms())
        for (int j = 0; j < t.n(); ++j)
            max_exp[static_cast<size_t>(j)] = std::max(max_exp[static_cast<size_t>(j)], idx[static_cast<size_t>(j)]);

    std::vector<std::vector<CMatrix>> powers(static_cast<size_t>(t.n()));
    for (int j = 0; j < t.n(); ++j) {
        auto& pj = powers[static_cast<size_t>(j)];
        pj.push_back(CMatrix::Identity(k, k));
        for (int e = 1; e <= max_exp[static_cast<size_t>(j)]; ++e) pj.push_back(pj.back() * t.matrix(j));
    }

    CMatrix acc = CMatrix::Zero(k, k);
    for (const auto& [idx, c] : f.terms()) {
        CMatrix term = CMatrix::Identity(k, k);
        bool first = true;
        for (int j = 0; j < t.n(); ++j) {
            const int e = idx[static_cast<size_t>(j)];
            if (e == 0) continue;
            const CMatrix& p = powers[static_cast<size_t>(j)][static_cast<size_t>(e)];
            term = first ? p : CMatrix(term * p);
            first = false;
        }
        acc += c * term;
    }
    return acc;
}

bool is_nilpotent(const CMatrix& a, const Tolerance& tol) {
    if (a.rows() != a.cols()) throw DimensionMismatch("is_nilpotent: input must be square");
    const int k = static_cast<int>(a.rows());
    const double scale = operator_norm(a);
    if (scale <= tol.abs_eps) return true;  // below the absolute floor

    // Both decisions are made on the normalized matrix. The power threshold
    // pi and the spectral threshold pi^(1/k) are consistent: any matrix with
    // ||A^k|| <= pi has all eigenvalue moduli <= pi^(1/k).
    const CMatrix as = a / scale;
    const double pi_thresh = static_cast<double>(k) * tol.threshold(1.0);
    CMatrix p = as;
    for (int e = 1; e < k; ++e) p = p * as;
    const bool power_nil = operator_norm(p) <= pi_thresh;

    const double eig_thresh = std::pow(pi_thresh, 1.0 / static_cast<double>(k));
    Eigen::ComplexEigenSolver<CMatrix> es(as, false);
    const bool eig_nil = es.eigenvalues().cwiseAbs().maxCoeff() <= eig_thresh;

    if (power_nil != eig_nil)
        throw NumericalFailure(
            "is_nilpotent: power test and eigenvalue test disagree "
            "(borderline or badly scaled input)");
    return power_nil;
}

CMatrix random_gaussian_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            m(i, j) = Complex(re, im) / std::sqrt(2.0);
        }
    return m;
}

CMatrix random_unitary(int k, std::uint64_t seed) {
    CMatrix g = random_gaussian_matrix(k, k, seed);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    // Fix the phase ambiguity of QR so the result is Haar distributed and
    // deterministic: scale columns by the phases of R's diagonal.
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < k; ++j) {
        Complex d = r(j, j);
        if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

CMatrix random_invertible(int k, std::uint64_t seed, double cond_cap) {
    CMatrix u = random_unitary(k, seed * 2 + 1);
    CMatrix v = random_unitary(k, seed * 2 + 2);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double s = std::sqrt(cond_cap);
    RVector sing(k);
    for (int i = 0; i < k; ++i) {
        // log-uniform in [1/s, s]
        sing(i) = std::exp((2.0 * unif(rng) - 1.0) * std::log(s));
    }
    return u * sing.asDiagonal() * v.adjoint();
}

namespace {

// Commuting upper triangulars: block diagonal with one joint eigenvalue per
// block. Blocks are semisimple (scalar), so the planted joint values are
// recoverable to roundoff; defective coupling would smear any eigensolver's
// output to the eps^(1/m) scale and the plant could no longer serve as a
// tight oracle. Non-normality enters through the conjugator instead.
std::vector<CMatrix> planted_triangulars(int k, int n, std::mt19937_64& rng,
                                         std::vector<std::vector<Complex>>* diagonal,
                                         double min_separation) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> block_size(1, 3);

    std::vector<int> blocks;
    int left = k;
    while (left > 0) {
        int b = std::min(block_size(rng), left);
        blocks.push_back(b);
        left -= b;
    }

    // Joint block eigenvalues on a jittered grid so they are separated by at
    // least min_separation in the first coordinate.
    const int nblocks = static_cast<int>(blocks.size());
    std::vector<std::vector<Complex>> lambdas(static_cast<size_t>(nblocks),
                                              std::vector<Complex>(static_cast<size_t>(n)));
    for (int b = 0; b < nblocks; ++b) {
        for (int j = 0; j < n; ++j) {
            double re = unif(rng);
            double im = unif(rng);
            if (j == 0) re = static_cast<double>(b) * (min_separation + 1.0) + 0.2 * re;
            lambdas[static_cast<size_t>(b)][static_cast<size_t>(j)] = Complex(re, im);
        }
    }

    std::vector<CMatrix> mats(static_cast<size_t>(n), CMatrix::Zero(k, k));
    if (diagonal) diagonal->assign(static_cast<size_t>(k), std::vector<Complex>(static_cast<size_t>(n)));

    int off = 0;
    for (int b = 0; b < nblocks; ++b) {
        const int m = blocks[static_cast<size_t>(b)];
        for (int j = 0; j < n; ++j)
            mats[static_cast<size_t>(j)].block(off, off, m, m) =
                lambdas[static_cast<size_t>(b)][static_cast<size_t>(j)] * CMatrix::Identity(m, m);
        if (diagonal)
            for (int i = 0; i < m; ++i)
                (*diagonal)[static_cast<size_t>(off + i)] = lambdas[static_cast<size_t>(b)];
        off += m;
    }
    return mats;
}

}  // namespace

PlantedTuple random_planted_tuple(int k, int n, std::uint64_t seed,
                                  bool unitary_conjugator, double cond_cap,
                                  double min_separation) {
    if (k < 1 || n < 1) throw Error("random_planted_tuple: k, n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<Complex>> diag;
    std::vector<CMatrix> tri = planted_triangulars(k, n, rng, &diag, min_separation);
    CMatrix s = unitary_conjugator ? random_unitary(k, seed + 17)
                                   : random_invertible(k, seed + 17, cond_cap);
    CMatrix sinv = s.inverse();
    std::vector<CMatrix> mats;
    mats.reserve(static_cast<size_t>(n));
    for (const auto& r : tri) mats.push_back(s * r * sinv);
    // Conjugation preserves commutation exactly in exact arithmetic; the
    // floating-point residual stays well below the certificate for the
    // condition numbers used here.
    return PlantedTuple{certify_commuting(mats, {}, 1e-8), std::move(diag), std::move(s)};
}

CommutingTuple random_commuting_tuple(int k, int n, std::uint64_t seed, TupleStyle style) {
    if (k < 1 || n < 1) throw Error("random_commuting_tuple: k, n must be >= 1");
    switch (style) {
        case TupleStyle::kPolyOfOne: {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unif(-1.0, 1.0);
            CMatrix x = random_gaussian_matrix(k, k, seed + 1);
            x /= std::max(1.0, operator_norm(x));
            std::vector<CMatrix> mats;
            mats.reserve(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) {
                CMatrix m = CMatrix::Zero(k, k);
                CMatrix p = CMatrix::Identity(k, k);
                for (int deg = 0; deg <= 2; ++deg) {
                    m += Complex(unif(rng), unif(rng)) * p;
                    p = p * x;
                }
                mats.push_back(m);
            }
            return certify_commuting(mats);
        }
        case TupleStyle::kConjugatedTriangular:
            return random_planted_tuple(k, n, seed).tuple;
    }
    throw Error("random_commuting_tuple: unknown style");
}

}  // namespace specflag
