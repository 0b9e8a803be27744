#include "specflag/holocalc.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace specflag {

namespace {

constexpr double kPi = 3.14159265358979323846;

void enumerate_shell(int n, int degree, std::vector<int>& idx, int pos, int left,
                     const std::function<void(const std::vector<int>&)>& emit) {
    if (pos == n - 1) {
        idx[static_cast<size_t>(pos)] = left;
        emit(idx);
        return;
    }
    for (int e = 0; e <= left; ++e) {
        idx[static_cast<size_t>(pos)] = e;
        enumerate_shell(n, degree, idx, pos + 1, left - e, emit);
    }
}

void for_each_multiindex(int n, int degree, const std::function<void(const std::vector<int>&)>& emit) {
    std::vector<int> idx(static_cast<size_t>(n), 0);
    enumerate_shell(n, degree, idx, 0, degree, emit);
}

double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

}  // namespace

HoloFunction HoloFunction::polynomial(CommPolynomial p) {
    HoloFunction f(p.n());
    f.polyradius_.assign(static_cast<size_t>(p.n()), std::numeric_limits<double>::infinity());
    f.poly_ = std::make_shared<const CommPolynomial>(std::move(p));
    return f;
}

HoloFunction HoloFunction::coordinate(int n, int j) {
    return polynomial(CommPolynomial::coordinate(n, j));
}

HoloFunction HoloFunction::exp_linear(int n, std::vector<Complex> weights) {
    if (static_cast<int>(weights.size()) != n)
        throw DimensionMismatch("exp_linear: weight count != n");
    HoloFunction f(n);
    f.polyradius_.assign(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    auto w = std::make_shared<const std::vector<Complex>>(std::move(weights));
    f.coeffs_ = [n, w](int degree) {
        ShellTerms terms;
        for_each_multiindex(n, degree, [&](const std::vector<int>& idx) {
            Complex c = 1.0;
            for (int j = 0; j < n; ++j) {
                for (int e = 0; e < idx[static_cast<size_t>(j)]; ++e) c *= (*w)[static_cast<size_t>(j)];
                c /= factorial(idx[static_cast<size_t>(j)]);
            }
            if (c != Complex(0.0)) terms.emplace_back(idx, c);
        });
        return terms;
    };
    f.tail_ = [n, w](int degree, const std::vector<double>& radii) {
        // Shell sum is x^m / m! with x = sum |w_j| r_j; bound the tail by the
        // remainder of the exponential series.
        double x = 0.0;
        for (int j = 0; j < n; ++j) x += std::abs((*w)[static_cast<size_t>(j)]) * radii[static_cast<size_t>(j)];
        const int m = degree + 1;
        if (x < static_cast<double>(m + 1)) {
            double lead = std::pow(x, m) / factorial(std::min(m, 170));
            if (m > 170) {
                // Work in logs past the factorial overflow point.
                lead = std::exp(static_cast<double>(m) * std::log(x) - std::lgamma(static_cast<double>(m) + 1.0));
            }
            return lead / (1.0 - x / static_cast<double>(m + 1));
        }
        return std::exp(x);
    };
    f.closed_eval_ = [n, w](const std::vector<Complex>& z) {
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j) acc += (*w)[static_cast<size_t>(j)] * z[static_cast<size_t>(j)];
        return std::exp(acc);
    };
    return f;
}

HoloFunction HoloFunction::power_series(int n, std::vector<double> polyradius,
                                        ShellCoeffs coeffs, TailBound tail) {
    if (static_cast<int>(polyradius.size()) != n)
        throw DimensionMismatch("power_series: polyradius count != n");
    HoloFunction f(n);
    f.polyradius_ = std::move(polyradius);
    f.coeffs_ = std::move(coeffs);
    f.tail_ = std::move(tail);
    return f;
}

const CommPolynomial& HoloFunction::poly() const {
    if (!poly_) throw Error("HoloFunction: not a polynomial");
    return *poly_;
}

HoloFunction::ShellTerms HoloFunction::shell(int degree) const {
    if (poly_) {
        ShellTerms terms;
        for (const auto& [idx, c] : poly_->terms()) {
            int total = 0;
            for (int e : idx) total += e;
            if (total == degree) terms.emplace_back(idx, c);
        }
        return terms;
    }
    return coeffs_(degree);
}

double HoloFunction::tail_bound(int degree, const std::vector<double>& radii) const {
    if (poly_) return degree >= poly_->total_degree() ? 0.0 : std::numeric_limits<double>::infinity();
    return tail_(degree, radii);
}

Complex HoloFunction::eval(const std::vector<Complex>& z) const {
    if (static_cast<int>(z.size()) != n_)
        throw DimensionMismatch("HoloFunction::eval: point dimension != n");
    if (poly_) return poly_->eval(z);
    if (closed_eval_) return closed_eval_(z);
    std::vector<double> rad(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j) {
        rad[static_cast<size_t>(j)] = std::abs(z[static_cast<size_t>(j)]);
        if (rad[static_cast<size_t>(j)] >= polyradius_[static_cast<size_t>(j)])
            throw DomainViolation("HoloFunction::eval: point outside the polyradius");
    }
    Complex acc = 0.0;
    for (int degree = 0; degree <= 400; ++degree) {
        for (const auto& [idx, c] : coeffs_(degree)) {
            Complex term = c;
            for (int j = 0; j < n_; ++j)
                for (int e = 0; e < idx[static_cast<size_t>(j)]; ++e) term *= z[static_cast<size_t>(j)];
            acc += term;
        }
        if (tail_(degree, rad) <= 1e-15 * (1.0 + std::abs(acc))) return acc;
    }
    throw NumericalFailure("HoloFunction::eval: series not certified at degree 400");
}

namespace {

// Sum the series over a tuple of matrices with known norms, to a certified
// truncation target (absolute, on the sum of dropped terms).
CMatrix sum_series(const HoloFunction& f, const std::vector<CMatrix>& mats,
                   const std::vector<double>& norms, double target, bool* ok) {
    const int k = static_cast<int>(mats[0].rows());
    const int n = static_cast<int>(mats.size());
    *ok = false;

    std::vector<std::vector<CMatrix>> powers(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) powers[static_cast<size_t>(j)].push_back(CMatrix::Identity(k, k));
    auto power = [&](int j, int e) -> const CMatrix& {
        auto& pj = powers[static_cast<size_t>(j)];
        while (static_cast<int>(pj.size()) <= e) pj.push_back(pj.back() * mats[static_cast<size_t>(j)]);
        return pj[static_cast<size_t>(e)];
    };

    CMatrix acc = CMatrix::Zero(k, k);
    for (int degree = 0; degree <= 400; ++degree) {
        for (const auto& [idx, c] : f.shell(degree)) {
            CMatrix term = CMatrix::Identity(k, k);
            bool first = true;
            for (int j = 0; j < n; ++j) {
                const int e = idx[static_cast<size_t>(j)];
                if (e == 0) continue;
                term = first ? power(j, e) : CMatrix(term * power(j, e));
                first = false;
            }
            acc += c * term;
        }
        if (f.tail_bound(degree, norms) <= target) {
            *ok = true;
            return acc;
        }
    }
    return acc;
}

}  // namespace

CMatrix apply_series(const HoloFunction& f, const CommutingTuple& t, const Tolerance& tol) {
    if (f.n() != t.n()) throw DimensionMismatch("apply_series: arity mismatch");
    if (f.is_polynomial()) return eval_poly(f.poly(), t);

    const SchurFlag flag = simultaneous_schur(t, tol);
    const auto evs = joint_eigenvalues(flag);
    const auto& rad = f.polyradius();
    std::vector<double> spectral_radius(static_cast<size_t>(t.n()), 0.0);
    for (const auto& ev : evs)
        for (int j = 0; j < t.n(); ++j)
            spectral_radius[static_cast<size_t>(j)] =
                std::max(spectral_radius[static_cast<size_t>(j)], std::abs(ev[static_cast<size_t>(j)]));
    for (int j = 0; j < t.n(); ++j)
        if (spectral_radius[static_cast<size_t>(j)] >= rad[static_cast<size_t>(j)])
            throw DomainViolation("apply_series: joint eigenvalue outside the polyradius");

    // Direct summation when the operator norms already certify the tail.
    std::vector<double> norms(static_cast<size_t>(t.n()));
    bool norms_inside = true;
    for (int j = 0; j < t.n(); ++j) {
        norms[static_cast<size_t>(j)] = operator_norm(t.matrix(j));
        if (norms[static_cast<size_t>(j)] >= rad[static_cast<size_t>(j)]) norms_inside = false;
    }
    const double scale_target = 1e-12;
    if (norms_inside) {
        bool ok = false;
        CMatrix out = sum_series(f, t.matrices(), norms, scale_target, &ok);
        if (ok) return out;
    }

    // Rescale the triangular form so the norms collapse toward the spectral
    // radii: with D = diag(1, eps, ..., eps^{k-1}), the strictly upper part
    // of D^-1 R D shrinks by eps while the diagonal is untouched. The
    // truncation target absorbs cond(D) = eps^{1-k} for the transform back.
    const int k = t.k();
    double eps = 0.5;
    for (int attempt = 0; attempt < 40; ++attempt, eps *= 0.5) {
        RVector dpow(k);
        for (int i = 0; i < k; ++i) dpow(i) = std::pow(eps, i);
        std::vector<CMatrix> scaled;
        std::vector<double> snorms(static_cast<size_t>(t.n()));
        bool inside = true;
        for (int j = 0; j < t.n(); ++j) {
            CMatrix r = flag.triangulars[static_cast<size_t>(j)];
            for (int a = 0; a < k; ++a)
                for (int b = a; b < k; ++b) r(a, b) *= dpow(b) / dpow(a);
            snorms[static_cast<size_t>(j)] = operator_norm(r);
            const double room = rad[static_cast<size_t>(j)] - spectral_radius[static_cast<size_t>(j)];
            if (std::isfinite(rad[static_cast<size_t>(j)]) &&
                snorms[static_cast<size_t>(j)] > spectral_radius[static_cast<size_t>(j)] + 0.5 * room)
                inside = false;
            scaled.push_back(std::move(r));
        }
        if (!inside) continue;
        const double cond = std::pow(eps, 1 - k);
        const double target = scale_target / cond;
        if (target < 1e-300) break;
        bool ok = false;
        CMatrix summed = sum_series(f, scaled, snorms, target, &ok);
        if (!ok) continue;
        CMatrix d = dpow.cast<Complex>().asDiagonal();
        CMatrix dinv = dpow.cwiseInverse().cast<Complex>().asDiagonal();
        return flag.u * (d * summed * dinv) * flag.u.adjoint();
    }
    throw NumericalFailure("apply_series: could not certify the series truncation");
}

CommutingTuple apply_tuple(const std::vector<HoloFunction>& h, const CommutingTuple& t,
                           const Tolerance& tol) {
    std::vector<CMatrix> mats;
    mats.reserve(h.size());
    for (const auto& hj : h) mats.push_back(apply_series(hj, t, tol));
    // Functions of one tuple commute; certify with a relaxed threshold to
    // absorb truncation noise.
    return certify_commuting(mats, tol, 1e-8);
}

MartinelliContext::MartinelliContext(const CommutingTuple& t, const Tolerance& tol)
    : t_(t),
      tol_(tol),
      ext_s_(exterior_ops(t.n())),
      ext_full_(exterior_ops(std::min(2 * t.n(), 6))),
      nu_(joint_measure(t, tol)) {
    if (2 * t.n() > 6)
        throw UnsupportedDimension("MartinelliContext: extended algebra needs 2n <= 6");

    // Symbolic expansion of M_T = beta (dbar beta)^{n-1} L(s_1)...L(s_n).
    Term base;
    base.dz_mask = 0;
    base.sign = 1.0;
    for (int j = t.n(); j >= 1; --j) base.seq.push_back(j - 1);  // wedge s_n first
    base.seq.push_back(-1);
    terms_ = {base};

    for (int round = 0; round < t.n() - 1; ++round) {
        std::vector<Term> next;
        for (const Term& term : terms_) {
            for (int kk = 1; kk <= t.n(); ++kk) {
                const int wsign = ExteriorAlgebra::wedge_sign(kk, term.dz_mask);
                if (wsign == 0) continue;
                for (size_t p = 0; p < term.seq.size(); ++p) {
                    if (term.seq[p] != -1) continue;
                    // Product rule over the alpha-inverse occurrences:
                    // d/dzk-bar alpha^-1 = -alpha^-1 L(s_k)^* alpha^-1.
                    Term d = term;
                    d.dz_mask |= 1u << (kk - 1);
                    d.sign *= -wsign;
                    d.seq.insert(d.seq.begin() + static_cast<long>(p) + 1, {-(kk + 1), -1});
                    next.push_back(std::move(d));
                }
            }
        }
        for (Term& term : next) term.seq.push_back(-1);
        terms_ = std::move(next);
    }
}

double MartinelliContext::spectrum_margin(const std::vector<Complex>& z) const {
    double best = std::numeric_limits<double>::infinity();
    for (int p = 0; p < nu_.size(); ++p) {
        double d = 0.0;
        for (int j = 0; j < t_.n(); ++j)
            d = std::max(d, std::abs(z[static_cast<size_t>(j)] - nu_.atom(p)[static_cast<size_t>(j)]));
        best = std::min(best, d);
    }
    return best;
}

CMatrix MartinelliContext::eval_terms(const CMatrix& x_cols, const std::vector<Complex>& z,
                                      std::map<unsigned, CMatrix>& by_mask) const {
    const int k = t_.k();
    const int sdim = ext_s_.dim;
    const int rows = sdim * k;

    if (spectrum_margin(z) < std::max(tol_.abs_eps, 1e-9))
        throw SingularAlpha("MartinelliContext: z is on or near the joint spectrum");

    // alpha_{z-T} on Lambda[s] (x) C^k.
    CMatrix delta = CMatrix::Zero(rows, rows);
    for (int j = 0; j < t_.n(); ++j) {
        const CMatrix shifted =
            z[static_cast<size_t>(j)] * CMatrix::Identity(k, k) - t_.matrix(j);
        delta += kron(ext_s_.wedge[static_cast<size_t>(j)], shifted);
    }
    const CMatrix alpha_m = delta + delta.adjoint();
    Eigen::PartialPivLU<CMatrix> lu(alpha_m);

    auto solve_checked = [&](const CMatrix& rhs) {
        CMatrix y = lu.solve(rhs);
        const double res = (alpha_m * y - rhs).norm() / std::max(1e-300, rhs.norm());
        if (res > 1e-10)
            throw SingularAlpha("MartinelliContext: alpha solve residual " + std::to_string(res));
        return y;
    };

    by_mask.clear();
    const int cols = static_cast<int>(x_cols.cols());
    for (const Term& term : terms_) {
        // Vector lives in Lambda[s] (x) C^k per column; row = smask*k + r.
        CMatrix v = CMatrix::Zero(rows, cols);
        v.topRows(k) = x_cols;  // Omega slot
        for (int op : term.seq) {
            if (op == -1) {
                v = solve_checked(v);
            } else if (op >= 0) {
                // wedge s_{op+1}
                CMatrix w = CMatrix::Zero(rows, cols);
                const unsigned bit = 1u << op;
                for (unsigned mask = 0; mask < static_cast<unsigned>(sdim); ++mask) {
                    const int sgn = ExteriorAlgebra::wedge_sign(op + 1, mask);
                    if (sgn == 0) continue;
                    w.middleRows(static_cast<int>(mask | bit) * k, k) =
                        double(sgn) * v.middleRows(static_cast<int>(mask) * k, k);
                }
                v = std::move(w);
            } else {
                const int g = -op - 2;  // 0-based generator of L(s_{g+1})^*
                CMatrix w = CMatrix::Zero(rows, cols);
                const unsigned bit = 1u << g;
                for (unsigned mask = 0; mask < static_cast<unsigned>(sdim); ++mask) {
                    if (!(mask & bit)) continue;
                    const int sgn = ExteriorAlgebra::wedge_sign(g + 1, mask & ~bit);
                    w.middleRows(static_cast<int>(mask & ~bit) * k, k) =
                        double(sgn) * v.middleRows(static_cast<int>(mask) * k, k);
                }
                v = std::move(w);
            }
        }
        auto it = by_mask.find(term.dz_mask);
        if (it == by_mask.end())
            by_mask[term.dz_mask] = term.sign * v;
        else
            it->second += term.sign * v;
    }
    return alpha_m;
}

CVector MartinelliContext::mt_eval(const CVector& x, const std::vector<Complex>& z) const {
    if (static_cast<int>(z.size()) != n())
        throw DimensionMismatch("mt_eval: point dimension != n");
    if (x.size() != k()) throw DimensionMismatch("mt_eval: vector size != k");
    std::map<unsigned, CMatrix> by_mask;
    eval_terms(x, z, by_mask);

    const int full_dim = ext_full_.dim * k();
    CVector out = CVector::Zero(full_dim);
    for (const auto& [dzmask, vec] : by_mask) {
        for (unsigned smask = 0; smask < static_cast<unsigned>(ext_s_.dim); ++smask) {
            const unsigned full_mask = dzmask | (smask << n());
            out.segment(static_cast<int>(full_mask) * k(), k()) +=
                vec.block(static_cast<int>(smask) * k(), 0, k(), 1);
        }
    }
    return out;
}

std::map<unsigned, CMatrix> MartinelliContext::omega_coefficients(
    const std::vector<Complex>& z) const {
    std::map<unsigned, CMatrix> by_mask;
    eval_terms(CMatrix::Identity(k(), k()), z, by_mask);
    std::map<unsigned, CMatrix> omega;
    for (const auto& [dzmask, vec] : by_mask) omega[dzmask] = vec.topRows(k());
    return omega;
}

void gauss_legendre(int count, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    nodes.assign(static_cast<size_t>(count), 0.0);
    weights.assign(static_cast<size_t>(count), 0.0);
    const int m = (count + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration from the Chebyshev estimate.
        double x = std::cos(kPi * (i + 0.75) / (count + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < count; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1);
            }
            pp = count * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double xl = 0.5 * (b - a);
        const double xm = 0.5 * (b + a);
        nodes[static_cast<size_t>(i)] = xm - xl * x;
        nodes[static_cast<size_t>(count - 1 - i)] = xm + xl * x;
        weights[static_cast<size_t>(i)] = 2.0 * xl / ((1.0 - x * x) * pp * pp);
        weights[static_cast<size_t>(count - 1 - i)] = weights[static_cast<size_t>(i)];
    }
}

namespace {

struct Domain {
    std::vector<Complex> center;
    std::vector<double> radii;
};

Domain integration_domain(const JointSpectralMeasure& nu, const QuadratureSpec& quad) {
    const int n = nu.n();
    Domain d;
    if (!quad.center.empty() && !quad.radii.empty()) {
        d.center = quad.center;
        d.radii = quad.radii;
        if (static_cast<int>(d.center.size()) != n || static_cast<int>(d.radii.size()) != n)
            throw DimensionMismatch("vasilescu_integral: domain dimension != n");
    } else {
        d.center.assign(static_cast<size_t>(n), Complex(0));
        d.radii.assign(static_cast<size_t>(n), 0.0);
        double total_w = 0.0;
        for (int p = 0; p < nu.size(); ++p) total_w += nu.weight(p);
        for (int j = 0; j < n; ++j) {
            Complex c = 0.0;
            for (int p = 0; p < nu.size(); ++p) c += nu.atom(p)[static_cast<size_t>(j)] * nu.weight(p);
            c /= total_w;
            double spread = 0.0;
            for (int p = 0; p < nu.size(); ++p)
                spread = std::max(spread, std::abs(nu.atom(p)[static_cast<size_t>(j)] - c));
            d.center[static_cast<size_t>(j)] = c;
            d.radii[static_cast<size_t>(j)] = std::max(1.0, 1.25 * spread);
        }
    }
    // Margin: every eigenvalue strictly inside every coordinate disk.
    for (int p = 0; p < nu.size(); ++p)
        for (int j = 0; j < n; ++j) {
            const double gap = d.radii[static_cast<size_t>(j)] -
                               std::abs(nu.atom(p)[static_cast<size_t>(j)] - d.center[static_cast<size_t>(j)]);
            if (gap < quad.min_margin)
                throw DomainViolation(
                    "vasilescu_integral: eigenvalue within margin of the boundary (gap " +
                    std::to_string(gap) + ")");
        }
    return d;
}

CMatrix integrate(const MartinelliContext& ctx, const HoloFunction& f, const Domain& dom,
                  int angular, int radial) {
    const int k = ctx.k();
    const int n = ctx.n();
    CMatrix acc = CMatrix::Zero(k, k);

    if (n == 1) {
        const Complex c = dom.center[0];
        const double r = dom.radii[0];
        for (int j = 0; j < angular; ++j) {
            const double th = 2.0 * kPi * j / angular;
            const Complex e = std::polar(1.0, th);
            const Complex z = c + r * e;
            const auto omega = ctx.omega_coefficients({z});
            acc += f.eval({z}) * (r * e) * omega.at(0u);
        }
        return acc / static_cast<double>(angular);
    }

    if (n == 2) {
        std::vector<double> gl_nodes, gl_weights;
        // Face A: |z1 - c1| = r1, z2 = c2 + rho e^{i phi}, integrand keeps the
        // dz2-bar coefficient; face B symmetric with the roles swapped.
        for (int face = 0; face < 2; ++face) {
            const int circ = face == 0 ? 0 : 1;  // coordinate on the circle
            const int disk = 1 - circ;
            const unsigned keep_mask = 1u << disk;  // dz-bar of the disk coordinate
            gauss_legendre(radial, 0.0, dom.radii[static_cast<size_t>(disk)], gl_nodes, gl_weights);
            const double rc = dom.radii[static_cast<size_t>(circ)];
            // Face A carries +2 r1 rho, face B carries -2 rho r2 after the
            // boundary orientation (outward normal first) is applied.
            const double orient = face == 0 ? 1.0 : -1.0;
            CMatrix face_acc = CMatrix::Zero(k, k);
            for (int it = 0; it < angular; ++it) {
                const double th = 2.0 * kPi * it / angular;
                const Complex ec = std::polar(1.0, th);
                const Complex zc = dom.center[static_cast<size_t>(circ)] + rc * ec;
                for (int ir = 0; ir < radial; ++ir) {
                    const double rho = gl_nodes[static_cast<size_t>(ir)];
                    const double wr = gl_weights[static_cast<size_t>(ir)];
                    for (int ip = 0; ip < angular; ++ip) {
                        const double ph = 2.0 * kPi * ip / angular;
                        const Complex zd = dom.center[static_cast<size_t>(disk)] +
                                           rho * std::polar(1.0, ph);
                        std::vector<Complex> z(2);
                        z[static_cast<size_t>(circ)] = zc;
                        z[static_cast<size_t>(disk)] = zd;
                        const auto omega = ctx.omega_coefficients(z);
                        const auto it_mask = omega.find(keep_mask);
                        if (it_mask == omega.end()) continue;
                        face_acc += (f.eval(z) * wr * rho * ec) * it_mask->second;
                    }
                }
            }
            // (2 pi / angular)^2 from the two trapezoid rules against the
            // 1/(2 pi i)^2 prefactor leaves -1/angular^2; the face forms
            // contribute (+/-) 2 r_c rho e^{i theta}.
            acc += face_acc * (orient * -2.0 * rc /
                               (static_cast<double>(angular) * static_cast<double>(angular)));
        }
        return acc;
    }

    throw UnsupportedDimension("vasilescu_integral: only n in {1, 2} is supported");
}

}  // namespace

CMatrix vasilescu_integral(const CommutingTuple& t, const HoloFunction& f,
                           const QuadratureSpec& quad, const Tolerance& tol) {
    if (f.n() != t.n()) throw DimensionMismatch("vasilescu_integral: arity mismatch");
    if (t.n() > 2)
        throw UnsupportedDimension("vasilescu_integral: only n in {1, 2} is supported");
    MartinelliContext ctx(t, tol);
    const Domain dom = integration_domain(ctx.spectrum(), quad);
    CMatrix value = integrate(ctx, f, dom, quad.angular_nodes, quad.radial_nodes);
    if (quad.richardson_check) {
        const CMatrix coarse = integrate(ctx, f, dom, std::max(4, quad.angular_nodes / 2),
                                         std::max(2, quad.radial_nodes / 2));
        const double delta = operator_norm(value - coarse);
        if (delta > quad.richardson_tol * std::max(1.0, operator_norm(value)))
            throw NumericalFailure("vasilescu_integral: refinement delta " +
                                   std::to_string(delta) + " fails the convergence check");
    }
    return value;
}

IntegralReport vasilescu_integral_report(const CommutingTuple& t, const HoloFunction& f,
                                         const QuadratureSpec& quad, const Tolerance& tol) {
    if (f.n() != t.n()) throw DimensionMismatch("vasilescu_integral: arity mismatch");
    MartinelliContext ctx(t, tol);
    const Domain dom = integration_domain(ctx.spectrum(), quad);
    IntegralReport report;
    report.value = integrate(ctx, f, dom, quad.angular_nodes, quad.radial_nodes);
    const CMatrix coarse = integrate(ctx, f, dom, std::max(4, quad.angular_nodes / 2),
                                     std::max(2, quad.radial_nodes / 2));
    report.richardson_delta = operator_norm(report.value - coarse);
    return report;
}

PushforwardReport verify_pushforward(const std::vector<HoloFunction>& h,
                                     const CommutingTuple& t,
                                     const std::vector<Region>& regions,
                                     const Tolerance& tol) {
    if (h.empty()) throw Error("verify_pushforward: empty function tuple");
    const int m = static_cast<int>(h.size());
    const CommutingTuple ht = apply_tuple(h, t, tol);
    const JointSpectralMeasure nu_t = joint_measure(t, tol);
    const JointSpectralMeasure nu_ht = joint_measure(ht, tol);

    auto h_map = [&h, m](const std::vector<Complex>& z) {
        std::vector<Complex> out(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j) out[static_cast<size_t>(j)] = h[static_cast<size_t>(j)].eval(z);
        return out;
    };
    const JointSpectralMeasure pushed = pushforward(nu_t, h_map, m);

    PushforwardReport report;
    report.measure_dist = measure_distance(nu_ht, pushed);

    // Disk radius for the atomic preimage realization: below half the
    // minimal atom separation, above the merge jitter.
    double min_gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < nu_t.size(); ++a)
        for (int b = a + 1; b < nu_t.size(); ++b) {
            double d = 0.0;
            for (int j = 0; j < nu_t.n(); ++j)
                d = std::max(d, std::abs(nu_t.atom(a)[static_cast<size_t>(j)] -
                                         nu_t.atom(b)[static_cast<size_t>(j)]));
            min_gap = std::min(min_gap, d);
        }
    const double radius = std::isfinite(min_gap) ? std::max(min_gap / 4.0, 1e-6) : 1.0;

    for (const Region& x : regions) {
        if (x.n() != m) throw DimensionMismatch("verify_pushforward: region dimension != m");
        const HSProjection lhs = hs_joint(ht, x, tol);

        std::vector<Region> qualifying;
        for (int a = 0; a < nu_t.size(); ++a)
            if (x.contains(h_map(nu_t.atom(a))))
                qualifying.push_back(Region::polydisk(nu_t.atom(a), radius));
        Subspace rhs = Subspace::zero(t.k());
        if (!qualifying.empty())
            rhs = hs_joint(t, Region::union_of(std::move(qualifying)), tol).subspace;
        report.projection_dists.push_back(projection_distance(lhs.subspace, rhs));
    }
    return report;
}

}  // namespace specflag
