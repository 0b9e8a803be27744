#pragma once

#include <map>

#include "specflag/hsproj.hpp"
#include "specflag/jointspec.hpp"
#include "specflag/ordering.hpp"
#include "specflag/triangular.hpp"

namespace specflag {

/// Holomorphic function of n variables: either a polynomial or a power
/// series with a declared polyradius of convergence and a certified tail
/// bound per truncation degree.
class HoloFunction {
  public:
    using MultiIndex = CommPolynomial::MultiIndex;
    using ShellTerms = std::vector<std::pair<MultiIndex, Complex>>;
    /// All terms of the given total degree.
    using ShellCoeffs = std::function<ShellTerms(int degree)>;
    /// Upper bound on sum_{|a| > degree} |c_a| r^a.
    using TailBound = std::function<double(int degree, const std::vector<double>& radii)>;

    static HoloFunction polynomial(CommPolynomial p);
    static HoloFunction coordinate(int n, int j);
    /// exp(sum_j w_j z_j); entire.
    static HoloFunction exp_linear(int n, std::vector<Complex> weights);
    static HoloFunction power_series(int n, std::vector<double> polyradius,
                                     ShellCoeffs coeffs, TailBound tail);

    int n() const { return n_; }
    bool is_polynomial() const { return static_cast<bool>(poly_); }
    const CommPolynomial& poly() const;
    /// Per-coordinate radius of convergence (infinity entries allowed).
    const std::vector<double>& polyradius() const { return polyradius_; }

    Complex eval(const std::vector<Complex>& z) const;
    ShellTerms shell(int degree) const;
    double tail_bound(int degree, const std::vector<double>& radii) const;

  private:
    HoloFunction(int n) : n_(n) {}

    int n_;
    std::shared_ptr<const CommPolynomial> poly_;
    std::vector<double> polyradius_;
    ShellCoeffs coeffs_;
    TailBound tail_;
    std::function<Complex(const std::vector<Complex>&)> closed_eval_;
};

/// Series evaluation on a commuting tuple with certified truncation error
/// <= 1e-12 * scale. Polynomials delegate to eval_poly and are exact.
/// When the operator norms exceed the polyradius but the joint eigenvalues
/// do not, the sum is taken in a diagonally rescaled Schur basis so that the
/// truncation certificate still holds after transforming back.
CMatrix apply_series(const HoloFunction& f, const CommutingTuple& t,
                     const Tolerance& tol = {});

/// h = (h_1,...,h_m) applied entrywise; the images commute.
CommutingTuple apply_tuple(const std::vector<HoloFunction>& h, const CommutingTuple& t,
                           const Tolerance& tol = {});

/// Evaluation context for the Martinelli-type boundary integral: the
/// extended exterior algebra on (dz1..dzn-bar, s_1..s_n), the tuple, and the
/// joint eigenvalues used for singularity margins. All dbar derivatives of
/// alpha inverses are expanded through the resolvent identity
/// d/dzk-bar (alpha^-1) = -alpha^-1 (L(s_k)^* (x) I) alpha^-1; nothing is
/// differenced numerically.
class MartinelliContext {
  public:
    explicit MartinelliContext(const CommutingTuple& t, const Tolerance& tol = {});

    const CommutingTuple& tuple() const { return t_; }
    int n() const { return t_.n(); }
    int k() const { return t_.k(); }
    const ExteriorAlgebra& lambda_s() const { return ext_s_; }
    const ExteriorAlgebra& lambda_s_dz() const { return ext_full_; }
    const JointSpectralMeasure& spectrum() const { return nu_; }

    /// Distance (coordinatewise max) from z to the nearest joint eigenvalue.
    double spectrum_margin(const std::vector<Complex>& z) const;

    /// (M_T x)(z) in Lambda[s,dz-bar] (x) C^k; index = mask*k + row with
    /// mask bits 0..n-1 the dz-bar generators and bits n..2n-1 the s
    /// generators. Throws SingularAlpha when z is within tol of the
    /// spectrum.
    CVector mt_eval(const CVector& x, const std::vector<Complex>& z) const;

    /// Omega-grade k x k coefficient blocks of the dz-bar monomials of
    /// (M_T .)(z); key = dz-bar bitmask. These are the kernels integrated
    /// over the boundary faces.
    std::map<unsigned, CMatrix> omega_coefficients(const std::vector<Complex>& z) const;

  private:
    struct Term {
        unsigned dz_mask;
        double sign;
        // Application sequence, first entry applied first:
        //   op >= 0       : left wedge by s_{op+1}
        //   op == -1      : apply alpha_{z-T}^{-1}
        //   op <= -2      : apply L(s_{-op-1})^* (x) I
        std::vector<int> seq;
    };

    CMatrix eval_terms(const CMatrix& x_cols, const std::vector<Complex>& z,
                       std::map<unsigned, CMatrix>& by_mask) const;

    CommutingTuple t_;
    Tolerance tol_;
    ExteriorAlgebra ext_s_;
    ExteriorAlgebra ext_full_;
    JointSpectralMeasure nu_;
    std::vector<Term> terms_;
};

/// Boundary of the integration polydisk and node counts. Empty center/radii
/// request the default domain: centered at the eigenvalue centroid with
/// radii 1.25 x the eigenvalue spread per coordinate (floor 1).
struct QuadratureSpec {
    std::vector<Complex> center;
    std::vector<double> radii;
    int angular_nodes = 256;
    int radial_nodes = 16;
    double min_margin = 1e-6;
    bool richardson_check = false;
    double richardson_tol = 1e-5;
};

/// f(T) by the boundary integral over the polydisk boundary: a circle with
/// the trapezoid rule for n = 1; for n = 2 the two three-dimensional faces
/// (circle x disk and disk x circle) with trapezoid rules on the periodic
/// directions and Gauss-Legendre radially. n > 2 is not supported.
CMatrix vasilescu_integral(const CommutingTuple& t, const HoloFunction& f,
                           const QuadratureSpec& quad = {}, const Tolerance& tol = {});

struct IntegralReport {
    CMatrix value;
    double richardson_delta;  // distance to the half-resolution evaluation
};

IntegralReport vasilescu_integral_report(const CommutingTuple& t, const HoloFunction& f,
                                         const QuadratureSpec& quad = {},
                                         const Tolerance& tol = {});

/// Push-forward verification: the measure identity between the spectral
/// distribution of h(T) and the image of the distribution of T, and the
/// projection identity P(h(T):X) = P(T:h^{-1}(X)) with the preimage realized
/// as small disks around the qualifying atoms.
struct PushforwardReport {
    double measure_dist;
    std::vector<double> projection_dists;
};

PushforwardReport verify_pushforward(const std::vector<HoloFunction>& h,
                                     const CommutingTuple& t,
                                     const std::vector<Region>& regions,
                                     const Tolerance& tol = {});

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int count, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace specflag
