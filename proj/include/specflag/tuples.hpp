#pragma once

#include <cstdint>
#include <map>

#include "specflag/types.hpp"

namespace specflag {

/// A tuple of pairwise commuting k x k matrices with a certified commutation
/// residual: max over i<j of ||T_i T_j - T_j T_i|| / max(1, ||T_i|| ||T_j||).
class CommutingTuple {
  public:
    int k() const { return k_; }
    int n() const { return n_; }
    const CMatrix& matrix(int i) const { return mats_[static_cast<size_t>(i)]; }
    const std::vector<CMatrix>& matrices() const { return mats_; }
    double comm_residual() const { return comm_residual_; }

    /// Entrywise adjoint tuple (T_1^*, ..., T_n^*).
    CommutingTuple adjoint() const;
    /// Subtuple or reordering by coordinate indices.
    CommutingTuple subtuple(const std::vector<int>& indices) const;

    friend CommutingTuple certify_commuting(const std::vector<CMatrix>& matrices,
                                            const Tolerance& tol,
                                            double certification_threshold);

  private:
    CommutingTuple(int k, int n, std::vector<CMatrix> mats, double residual)
        : k_(k), n_(n), mats_(std::move(mats)), comm_residual_(residual) {}

    int k_;
    int n_;
    std::vector<CMatrix> mats_;
    double comm_residual_;
};

/// Certifies pairwise commutation; throws NonCommuting with the offending
/// pair when the scale-free residual exceeds the threshold.
CommutingTuple certify_commuting(const std::vector<CMatrix>& matrices,
                                 const Tolerance& tol = {},
                                 double certification_threshold = 1e-10);

/// Polynomial in n commuting variables: multi-index -> coefficient.
class CommPolynomial {
  public:
    using MultiIndex = std::vector<int>;

    explicit CommPolynomial(int n) : n_(n) {
        if (n <= 0) throw Error("CommPolynomial: n must be positive");
    }

    static CommPolynomial coordinate(int n, int j);
    static CommPolynomial constant(int n, Complex c);

    int n() const { return n_; }
    const std::map<MultiIndex, Complex>& terms() const { return terms_; }

    void add_term(const MultiIndex& idx, Complex coeff);
    int total_degree() const;

    Complex eval(const std::vector<Complex>& z) const;

    CommPolynomial operator+(const CommPolynomial& other) const;
    CommPolynomial operator*(const CommPolynomial& other) const;
    CommPolynomial operator*(Complex c) const;

  private:
    int n_;
    std::map<MultiIndex, Complex> terms_;
};

/// Sum of coeff * T_1^{a_1} ... T_n^{a_n}; the order of factors is irrelevant
/// by commutation.
CMatrix eval_poly(const CommPolynomial& f, const CommutingTuple& t);

/// Dual nilpotency test (finite analog of s.o.t.-quasinilpotence): the power
/// norm ||A^k|| and the eigenvalue moduli must both decide "nilpotent" or
/// both decide "not"; disagreement raises NumericalFailure, because it
/// indicates a borderline instance the caller should not trust.
bool is_nilpotent(const CMatrix& a, const Tolerance& tol = {});

enum class TupleStyle {
    kPolyOfOne,             // polynomials in one random matrix
    kConjugatedTriangular,  // planted commuting triangulars, conjugated
};

/// Planted data for conjugated-triangular tuples: the diagonal joint values
/// (one n-vector per ambient dimension, in the planted triangular order).
struct PlantedTuple {
    CommutingTuple tuple;
    std::vector<std::vector<Complex>> diagonal;  // k entries of C^n
    CMatrix conjugator;                          // S with T_i = S R_i S^{-1}
};

CommutingTuple random_commuting_tuple(int k, int n, std::uint64_t seed,
                                      TupleStyle style);

/// Like random_commuting_tuple(kConjugatedTriangular) but returning the
/// planted diagonal as the test oracle. unitary_conjugator selects a Haar
/// unitary instead of a conditioned invertible (condition number <= cond_cap).
PlantedTuple random_planted_tuple(int k, int n, std::uint64_t seed,
                                  bool unitary_conjugator = false,
                                  double cond_cap = 100.0,
                                  double min_separation = 0.5);

/// Seeded complex Gaussian matrix; part of the public test API.
CMatrix random_gaussian_matrix(int rows, int cols, std::uint64_t seed);
/// Haar-distributed unitary via QR of a Gaussian matrix.
CMatrix random_unitary(int k, std::uint64_t seed);
/// Random invertible with singular values log-uniform in [1/sqrt(c), sqrt(c)].
CMatrix random_invertible(int k, std::uint64_t seed, double cond_cap);

}  // namespace specflag
