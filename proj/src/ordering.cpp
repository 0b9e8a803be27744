#include "specflag/ordering.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace specflag {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadrant transforms of the Hilbert recursion. Quadrant q covers parameter
// [q/4, (q+1)/4); entry/exit corners chain so that h(0)=(0,0), h(1)=(1,0).
inline void hilbert_step_forward(int q, double& x, double& y) {
    switch (q) {
        case 0: {
            const double t = x;
            x = y * 0.5;
            y = t * 0.5;
            break;
        }
        case 1:
            x = x * 0.5;
            y = (y + 1.0) * 0.5;
            break;
        case 2:
            x = (x + 1.0) * 0.5;
            y = (y + 1.0) * 0.5;
            break;
        case 3: {
            const double t = x;
            x = (2.0 - y) * 0.5;
            y = (1.0 - t) * 0.5;
            break;
        }
        default:
            break;
    }
}

}  // namespace

void hilbert_point(double t, int depth, double& x, double& y) {
    t = std::clamp(t, 0.0, 1.0);
    depth = std::min(depth, 30);
    if (depth <= 0) {
        x = t;
        y = 0.0;
        return;
    }
    int qs[32];
    for (int level = 0; level < depth; ++level) {
        t *= 4.0;
        int q = static_cast<int>(t);
        if (q > 3) q = 3;
        t -= q;
        qs[level] = q;
    }
    // Terminal segment from the entry corner (0,0) to the exit corner (1,0)
    // through the cell center, so samples land in the open cell rather than
    // running along its edges.
    if (t <= 0.5) {
        x = t;
        y = t;
    } else {
        x = t;
        y = 1.0 - t;
    }
    for (int level = depth - 1; level >= 0; --level) hilbert_step_forward(qs[level], x, y);
}

std::uint64_t hilbert_cell_index(double x, double y, int depth) {
    x = std::clamp(x, 0.0, 1.0);
    y = std::clamp(y, 0.0, 1.0);
    std::uint64_t idx = 0;
    for (int level = 0; level < depth; ++level) {
        idx <<= 2;
        // Closed quadrants tested in parameter order: ties take the smaller
        // parameter, approximating the minimal preimage.
        if (x <= 0.5 && y <= 0.5) {
            const double t = x;
            x = 2.0 * y;
            y = 2.0 * t;
        } else if (x <= 0.5) {
            idx |= 1;
            x = 2.0 * x;
            y = 2.0 * y - 1.0;
        } else if (y >= 0.5) {
            idx |= 2;
            x = 2.0 * x - 1.0;
            y = 2.0 * y - 1.0;
        } else {
            idx |= 3;
            const double t = x;
            x = 1.0 - 2.0 * y;
            y = 2.0 - 2.0 * t;
        }
    }
    return idx;
}

Complex square_to_disk(double u, double v) {
    const double a = 2.0 * u - 1.0;
    const double b = 2.0 * v - 1.0;
    if (a == 0.0 && b == 0.0) return Complex(0.0, 0.0);
    double r, phi;
    if (a * a > b * b) {
        r = a;
        phi = (kPi / 4.0) * (b / a);
    } else {
        r = b;
        phi = (kPi / 2.0) - (kPi / 4.0) * (a / b);
    }
    return Complex(r * std::cos(phi), r * std::sin(phi));
}

void disk_to_square(Complex z, double& u, double& v) {
    const double rr = std::abs(z);
    if (rr == 0.0) {
        u = 0.5;
        v = 0.5;
        return;
    }
    const double psi = std::arg(z);
    double a, b;
    if (psi >= -kPi / 4.0 && psi <= kPi / 4.0) {
        a = rr;
        b = rr * (4.0 * psi / kPi);
    } else if (psi >= kPi / 4.0 && psi <= 3.0 * kPi / 4.0) {
        b = rr;
        a = rr * (4.0 / kPi) * (kPi / 2.0 - psi);
    } else if (psi <= -kPi / 4.0 && psi >= -3.0 * kPi / 4.0) {
        b = -rr;
        a = rr * (4.0 / kPi) * (psi + kPi / 2.0);
    } else if (psi > 3.0 * kPi / 4.0) {
        a = -rr;
        b = -rr * (4.0 / kPi) * (psi - kPi);
    } else {
        a = -rr;
        b = -rr * (4.0 / kPi) * (psi + kPi);
    }
    u = (a + 1.0) / 2.0;
    v = (b + 1.0) / 2.0;
}

PeanoCurve::PeanoCurve(int n, std::vector<double> radii, int depth)
    : n_(n), radii_(std::move(radii)), depth_(depth) {
    if (n_ < 1) throw Error("PeanoCurve: n must be >= 1");
    if (depth_ < 1) throw Error("PeanoCurve: depth must be >= 1");
    if (2 * n_ * depth_ > 60)
        throw Error("PeanoCurve: 2*n*depth must stay below 60 (cell keys are packed)");
    if (static_cast<int>(radii_.size()) != n_)
        throw DimensionMismatch("PeanoCurve: radii count != n");
    for (double r : radii_)
        if (r < 0.0) throw Error("PeanoCurve: negative radius");
}

std::vector<double> PeanoCurve::cube_point(double t) const {
    // rho^(2) = h; rho^(m) expands the last coordinate of rho^(m-1) through h.
    // Unrolled: coords (h1(t), h1(h2(t)), h1(h2^2(t)), ..., h2^{m-1}(t)).
    const int m = 2 * n_;
    std::vector<double> out(static_cast<size_t>(m));
    double carry = t;
    for (int j = 0; j < m - 1; ++j) {
        double x, y;
        hilbert_point(carry, depth_, x, y);
        out[static_cast<size_t>(j)] = x;
        carry = y;
    }
    out[static_cast<size_t>(m - 1)] = carry;
    return out;
}

std::vector<Complex> PeanoCurve::operator()(double t) const {
    const std::vector<double> c = cube_point(t);
    std::vector<Complex> z(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j) {
        if (radii_[static_cast<size_t>(j)] == 0.0) {
            z[static_cast<size_t>(j)] = 0.0;
            continue;
        }
        z[static_cast<size_t>(j)] = radii_[static_cast<size_t>(j)] *
                                    square_to_disk(c[static_cast<size_t>(2 * j)], c[static_cast<size_t>(2 * j + 1)]);
    }
    return z;
}

std::vector<double> PeanoCurve::to_cube(const std::vector<Complex>& z,
                                        const Tolerance& tol) const {
    if (static_cast<int>(z.size()) != n_)
        throw DimensionMismatch("PeanoCurve::to_cube: point dimension != n");
    std::vector<double> out(static_cast<size_t>(2 * n_));
    for (int j = 0; j < n_; ++j) {
        const double r = radii_[static_cast<size_t>(j)];
        Complex w = z[static_cast<size_t>(j)];
        if (r == 0.0) {
            if (std::abs(w) > tol.threshold(1.0))
                throw AtomOutsidePolydisk("atom has nonzero coordinate on a zero-radius axis");
            out[static_cast<size_t>(2 * j)] = 0.5;
            out[static_cast<size_t>(2 * j + 1)] = 0.5;
            continue;
        }
        const double excess = std::abs(w) - r;
        if (excess > tol.threshold(r))
            throw AtomOutsidePolydisk("atom coordinate modulus " + std::to_string(std::abs(w)) +
                                      " exceeds polydisk radius " + std::to_string(r));
        if (excess > 0.0) w *= r / std::abs(w);
        double u, v;
        disk_to_square(w / r, u, v);
        out[static_cast<size_t>(2 * j)] = u;
        out[static_cast<size_t>(2 * j + 1)] = v;
    }
    return out;
}

namespace {

std::uint64_t cube_cell(const std::vector<double>& p, int depth) {
    // Packs per-axis cell coordinates at resolution 2^depth into one key
    // (depth bits per axis; the curve constructor guards the total width).
    std::uint64_t key = 0;
    const double scale = std::pow(2.0, depth);
    for (double c : p) {
        auto cell = static_cast<std::uint64_t>(std::min(scale - 1.0, std::floor(c * scale)));
        key = (key << depth) | cell;
    }
    return key;
}

double cube_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

SpectralOrdering assign_params(const PeanoCurve& curve, const JointSpectralMeasure& nu,
                               const Tolerance& tol) {
    if (nu.n() != curve.n())
        throw DimensionMismatch("assign_params: measure dimension != curve dimension");
    const int d = curve.depth();
    std::vector<double> params(static_cast<size_t>(nu.size()),
                               std::numeric_limits<double>::quiet_NaN());

    if (curve.n() == 1) {
        // Exact: the cell index along the base curve is the entry parameter.
        const double cells = std::pow(4.0, d);
        for (int p = 0; p < nu.size(); ++p) {
            const std::vector<double> c = curve.to_cube(nu.atom(p), tol);
            params[static_cast<size_t>(p)] =
                static_cast<double>(hilbert_cell_index(c[0], c[1], d)) / cells;
        }
        return SpectralOrdering{nu, std::move(params), d};
    }

    // Sampled minimal-preimage search: first sample whose cube cell matches
    // the atom's cell wins; atoms never hit fall back to the nearest sample
    // (deterministic tie-break toward smaller t).
    std::vector<std::vector<double>> atom_cubes;
    std::vector<std::uint64_t> atom_cells;
    for (int p = 0; p < nu.size(); ++p) {
        atom_cubes.push_back(curve.to_cube(nu.atom(p), tol));
        atom_cells.push_back(cube_cell(atom_cubes.back(), d));
    }
    std::vector<double> best_dist(static_cast<size_t>(nu.size()),
                                  std::numeric_limits<double>::infinity());
    std::vector<double> best_t(static_cast<size_t>(nu.size()), 0.0);
    std::vector<bool> hit(static_cast<size_t>(nu.size()), false);

    const int sample_levels = std::min(2 * curve.n() * d, 18);
    const std::uint64_t samples = 1ull << sample_levels;
    int remaining = nu.size();
    for (std::uint64_t j = 0; j <= samples && remaining > 0; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(samples);
        const std::vector<double> c = curve.cube_point(t);
        const std::uint64_t cell = cube_cell(c, d);
        for (int p = 0; p < nu.size(); ++p) {
            if (hit[static_cast<size_t>(p)]) continue;
            if (cell == atom_cells[static_cast<size_t>(p)]) {
                hit[static_cast<size_t>(p)] = true;
                params[static_cast<size_t>(p)] = t;
                --remaining;
            } else {
                const double dist = cube_dist(c, atom_cubes[static_cast<size_t>(p)]);
                if (dist < best_dist[static_cast<size_t>(p)] - 1e-15) {
                    best_dist[static_cast<size_t>(p)] = dist;
                    best_t[static_cast<size_t>(p)] = t;
                }
            }
        }
    }
    for (int p = 0; p < nu.size(); ++p)
        if (!hit[static_cast<size_t>(p)]) params[static_cast<size_t>(p)] = best_t[static_cast<size_t>(p)];
    return SpectralOrdering{nu, std::move(params), d};
}

namespace {

// Flag position key: (curve parameter, atom lexicographic order).
struct PositionKey {
    double t;
    const std::vector<Complex>* atom;
    int measure_index;
};

}  // namespace

Flag build_flag(const CommutingTuple& t, const SpectralOrdering& ordering,
                const Tolerance& tol) {
    const SchurFlag base = simultaneous_schur(t, tol);
    const auto evs = joint_eigenvalues(base);
    const auto& nu = ordering.measure;
    if (nu.n() != t.n()) throw DimensionMismatch("build_flag: ordering/tuple dimension");

    // Attach each Schur position to its measure atom.
    std::vector<int> atom_of(static_cast<size_t>(t.k()), -1);
    for (int p = 0; p < t.k(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < nu.size(); ++a) {
            double dist = 0.0;
            for (int j = 0; j < t.n(); ++j)
                dist = std::max(dist, std::abs(evs[static_cast<size_t>(p)][static_cast<size_t>(j)] -
                                               nu.atom(a)[static_cast<size_t>(j)]));
            if (dist < best) {
                best = dist;
                atom_of[static_cast<size_t>(p)] = a;
            }
        }
        if (best > 10.0 * nu.merge_radius())
            throw NumericalFailure("build_flag: a Schur position matches no measure atom");
    }

    // Stable sort positions by (t, atom lex).
    std::vector<int> perm(static_cast<size_t>(t.k()));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
        const int ia = atom_of[static_cast<size_t>(a)];
        const int ib = atom_of[static_cast<size_t>(b)];
        if (ia == ib) return false;
        const double ta = ordering.params[static_cast<size_t>(ia)];
        const double tb = ordering.params[static_cast<size_t>(ib)];
        if (ta != tb) return ta < tb;
        return lex_less(nu.atom(ia), nu.atom(ib));
    });

    Flag flag;
    flag.schur = reorder_schur_flag(base, perm);
    long dim = 0;
    for (int j = 0; j < t.k(); ++j) {
        const int atom = atom_of[static_cast<size_t>(perm[static_cast<size_t>(j)])];
        ++dim;
        const bool last_of_atom =
            (j + 1 == t.k()) || atom_of[static_cast<size_t>(perm[static_cast<size_t>(j + 1)])] != atom;
        if (!last_of_atom) continue;
        flag.breakpoints.push_back(ordering.params[static_cast<size_t>(atom)]);
        flag.dims.push_back(dim);
        flag.atom_order.push_back(nu.atom(atom));
        Subspace q(t.k(), flag.schur.u.leftCols(dim));
        const double res = invariance_residual(t, q);
        if (res > 1e-8)
            throw NumericalFailure("build_flag: flag projection invariance residual " +
                                   std::to_string(res));
        flag.projections.push_back(std::move(q));
    }
    return flag;
}

FlagTriangularization triangularize_by_flag(const CommutingTuple& t, const Flag& flag) {
    FlagTriangularization out;
    out.v = flag.schur.u;
    out.residual = 0.0;
    for (int i = 0; i < t.n(); ++i) {
        CMatrix r = out.v.adjoint() * t.matrix(i) * out.v;
        const double scale = std::max(1.0, operator_norm(t.matrix(i)));
        CMatrix low = r;
        for (int a = 0; a < r.rows(); ++a)
            for (int b = a; b < r.cols(); ++b) low(a, b) = 0.0;
        out.residual = std::max(out.residual, operator_norm(low) / scale);
        out.triangulars.push_back(std::move(r));
    }
    return out;
}

CMatrix diag_expectation(const CMatrix& s, const Flag& flag, const Tolerance& tol) {
    const int k = static_cast<int>(s.rows());
    if (s.rows() != s.cols() || k != flag.schur.k())
        throw DimensionMismatch("diag_expectation: size mismatch");
    const double scale = std::max(1.0, operator_norm(s));
    for (const Subspace& q : flag.projections) {
        if (q.dim() == k) continue;
        const CMatrix p = q.projector();
        const double res =
            operator_norm((CMatrix::Identity(k, k) - p) * s * p) / scale;
        if (res > tol.threshold(1.0) * 10.0)
            throw NotTriangular("diag_expectation: flag invariance residual " +
                                std::to_string(res));
    }
    const CMatrix in_basis = flag.schur.u.adjoint() * s * flag.schur.u;
    return flag.schur.u * in_basis.diagonal().asDiagonal() * flag.schur.u.adjoint();
}

SimultUTReport verify_simultut(const CommPolynomial& f, const CommutingTuple& t,
                               const Flag& flag, const Tolerance& tol) {
    const CMatrix s = eval_poly(f, t);

    // Eigenvalue distribution of S against the pushforward of the joint
    // measure through f, both as exact-weight atomic measures.
    Eigen::ComplexEigenSolver<CMatrix> es(s, false);
    std::vector<std::vector<Complex>> eig_pts;
    for (int i = 0; i < t.k(); ++i) eig_pts.push_back({es.eigenvalues()(i)});
    const JointSpectralMeasure nu_s(1, eig_pts, t.k());
    const JointSpectralMeasure pushed = pushforward(joint_measure(t, tol), {f});

    SimultUTReport report{};
    report.measure_dist = measure_distance(nu_s, pushed);
    const CMatrix defect = s - diag_expectation(s, flag, tol);
    // A defect at the roundoff scale of S counts as zero.
    report.defect_nilpotent = operator_norm(defect) <= tol.threshold(operator_norm(s)) ||
                              is_nilpotent(defect, tol);
    return report;
}

}  // namespace specflag
