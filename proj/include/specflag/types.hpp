#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace specflag {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Absolute/relative tolerance pair. Rank and membership decisions use
/// abs_eps + rel_eps * scale, where scale is derived from the input.
struct Tolerance {
    double abs_eps = 1e-10;
    double rel_eps = 1e-8;

    double threshold(double scale) const { return abs_eps + rel_eps * scale; }
};

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

struct NonCommuting : Error {
    int i, j;
    double residual;
    NonCommuting(int i_, int j_, double r)
        : Error("matrices " + std::to_string(i_) + " and " + std::to_string(j_) +
                " do not commute (residual " + std::to_string(r) + ")"),
          i(i_), j(j_), residual(r) {}
};

struct ResidualTooLarge : Error {
    explicit ResidualTooLarge(const std::string& msg) : Error(msg) {}
};

/// An eigenvalue sits inside the tolerance band around a region boundary,
/// so in/out cannot be decided.
struct BoundaryAmbiguous : Error {
    Complex eigenvalue;
    BoundaryAmbiguous(Complex ev, double dist)
        : Error("eigenvalue (" + std::to_string(ev.real()) + "," +
                std::to_string(ev.imag()) + ") is within " + std::to_string(dist) +
                " of a region boundary"),
          eigenvalue(ev) {}
};

struct NotInvariant : Error {
    explicit NotInvariant(const std::string& msg) : Error(msg) {}
};

struct NotTriangular : Error {
    explicit NotTriangular(const std::string& msg) : Error(msg) {}
};

struct DomainViolation : Error {
    explicit DomainViolation(const std::string& msg) : Error(msg) {}
};

struct SingularAlpha : Error {
    explicit SingularAlpha(const std::string& msg) : Error(msg) {}
};

struct UnsupportedDimension : Error {
    explicit UnsupportedDimension(const std::string& msg) : Error(msg) {}
};

struct AtomOutsidePolydisk : Error {
    explicit AtomOutsidePolydisk(const std::string& msg) : Error(msg) {}
};

/// Internal numerical failure (exit code 70 at the CLI boundary).
struct NumericalFailure : Error {
    explicit NumericalFailure(const std::string& msg) : Error(msg) {}
};

inline double operator_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::JacobiSVD<CMatrix>(a).singularValues()(0);
}

inline void require_finite(const CMatrix& a, const char* what) {
    if (!a.allFinite()) throw Error(std::string(what) + ": non-finite entries");
}

/// Lexicographic order on (Re z_1, Im z_1, ..., Re z_n, Im z_n).
inline bool lex_less(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return a.size() < b.size();
}

}  // namespace specflag
