#include <doctest.h>

#include <cmath>

#include "specflag/hsproj.hpp"

using namespace specflag;

namespace {

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Subspace line(int dim, const CVector& v) { return Subspace(dim, v.normalized()); }

// Disjoint polydisk regions around the first two atoms.
std::pair<Region, Region> split_regions(const JointSpectralMeasure& nu) {
    REQUIRE(nu.size() >= 2);
    double sep = std::numeric_limits<double>::infinity();
    for (int a = 0; a < nu.size(); ++a)
        for (int b = a + 1; b < nu.size(); ++b) {
            double d = 0.0;
            for (int j = 0; j < nu.n(); ++j)
                d = std::max(d, std::abs(nu.atom(a)[static_cast<size_t>(j)] -
                                         nu.atom(b)[static_cast<size_t>(j)]));
            sep = std::min(sep, d);
        }
    const double r = sep / 4.0;
    return {Region::polydisk(nu.atom(0), r), Region::polydisk(nu.atom(1), r)};
}

}  // namespace

TEST_CASE("1-d regions: membership, boundary distance, conjugation") {
    const Region1D d = Region1D::disk(Complex(1, 0), 2.0);
    CHECK(d.contains(Complex(2, 0)));
    CHECK_FALSE(d.contains(Complex(4, 0)));
    CHECK(d.boundary_distance(Complex(1, 0)) == doctest::Approx(2.0));
    CHECK(d.boundary_distance(Complex(4, 0)) == doctest::Approx(1.0));

    const Region1D h = Region1D::halfplane(Complex(1, 0), 0.0);  // Re z <= 0
    CHECK(h.contains(Complex(-1, 5)));
    CHECK_FALSE(h.contains(Complex(0.5, 0)));

    const Region1D u = d.unite(h);
    CHECK(u.contains(Complex(-1, 5)));
    CHECK(u.contains(Complex(2, 0)));

    const Region1D dc = Region1D::disk(Complex(0, 1), 0.5).conjugate();
    CHECK(dc.contains(Complex(0, -1)));
}

TEST_CASE("hs_single on normal and non-normal matrices") {
    Tolerance tol;
    SUBCASE("diagonal matrix, disk around one eigenvalue") {
        const CMatrix a = mat2(0, 0, 0, 5);
        const HSProjection p = hs_single(a, Region1D::disk(0, 1), tol);
        CHECK(p.trace_num == 1);
        CHECK(p.trace_den == 2);
        CHECK(projection_distance(p.subspace, line(2, CVector::Unit(2, 0))) < 1e-10);
    }
    SUBCASE("Jordan block: both generalized eigenvalues inside") {
        const CMatrix j2 = mat2(0, 1, 0, 0);
        const HSProjection p = hs_single(j2, Region1D::disk(0, 1), tol);
        CHECK(p.subspace.dim() == 2);
        CHECK(p.trace_num == 2);
    }
    SUBCASE("non-normal split: the two spectral lines are oblique") {
        const CMatrix a = mat2(0, 1, 0, 5);
        const HSProjection p5 = hs_single(a, Region1D::disk(5, 1), tol);
        CVector v5(2);
        v5 << 1, 5;
        CHECK(projection_distance(p5.subspace, line(2, v5)) < 1e-10);

        const HSProjection p0 = hs_single(a, Region1D::disk(0, 1), tol);
        CHECK(projection_distance(p0.subspace, line(2, CVector::Unit(2, 0))) < 1e-10);

        CHECK(meet(p0.subspace, p5.subspace, tol).dim() == 0);
        CHECK(join(p0.subspace, p5.subspace, tol).dim() == 2);
        // Not orthogonal: the product of the projectors does not vanish.
        const CMatrix prod = p0.subspace.projector() * p5.subspace.projector();
        CHECK(operator_norm(prod) > 0.1);
    }
    SUBCASE("eigenvalue on the boundary is refused") {
        const CMatrix a = mat2(1, 0, 0, 5);
        CHECK_THROWS_AS(hs_single(a, Region1D::disk(0, 1), tol), BoundaryAmbiguous);
    }
}

TEST_CASE("hs_joint on rectangles, unions, complements") {
    Tolerance tol;
    const CommutingTuple t = certify_commuting({mat2(1, 0, 0, 2), mat2(3, 0, 0, 4)});

    SUBCASE("rectangle around one joint eigenvalue") {
        const Region x = Region::polydisk({Complex(1), Complex(3)}, 0.5);
        const HSProjection p = hs_joint(t, x, tol);
        CHECK(p.trace_num == 1);
        CHECK(p.trace_den == 2);
        CHECK(projection_distance(p.subspace, line(2, CVector::Unit(2, 0))) < 1e-10);
    }
    SUBCASE("full plane rectangle gives the identity") {
        const HSProjection p = hs_joint(t, Region::full(2), tol);
        CHECK(p.subspace.dim() == 2);
        CHECK(p.trace_num == 2);
    }
    SUBCASE("complement goes through the sorted Schur construction") {
        const Region x = Region::polydisk({Complex(1), Complex(3)}, 0.5);
        const HSProjection pc = hs_joint(t, Region::complement(x), tol);
        CHECK(pc.trace_num == 1);
        CHECK(projection_distance(pc.subspace, line(2, CVector::Unit(2, 1))) < 1e-10);
    }
    SUBCASE("predicate regions are rejected for construction") {
        const Region pred =
            Region::predicate(2, [](const std::vector<Complex>&) { return true; });
        CHECK_THROWS_AS(hs_joint(t, pred, tol), Error);
    }
}

TEST_CASE("disjointness and union laws on planted tuples") {
    Tolerance tol;
    for (std::uint64_t seed : {2u, 4u, 6u}) {
        const PlantedTuple plant = random_planted_tuple(6, 2, seed);
        const JointSpectralMeasure nu = joint_measure(plant.tuple);
        if (nu.size() < 2) continue;
        const auto [x1, x2] = split_regions(nu);

        const HSProjection p1 = hs_joint(plant.tuple, x1, tol);
        const HSProjection p2 = hs_joint(plant.tuple, x2, tol);
        CHECK(meet(p1.subspace, p2.subspace, tol).dim() == 0);

        const HSProjection pu = hs_joint(plant.tuple, Region::union_of({x1, x2}), tol);
        CHECK(projection_distance(pu.subspace, join(p1.subspace, p2.subspace, tol)) <= 1e-7);
        CHECK(pu.trace_num == p1.trace_num + p2.trace_num);
    }
}

TEST_CASE("trace counts are exact rationals") {
    Tolerance tol;
    const PlantedTuple plant = random_planted_tuple(7, 2, 11);
    const JointSpectralMeasure nu = joint_measure(plant.tuple);
    const auto [x1, x2] = split_regions(nu);
    const HSProjection p = hs_joint(plant.tuple, x1, tol);
    CHECK(p.trace_den == 7);
    CHECK(p.trace_num == nu.count(0));
    CHECK(p.subspace.dim() == nu.count(0));
}

TEST_CASE("monotonicity in the region") {
    Tolerance tol;
    const PlantedTuple plant = random_planted_tuple(6, 2, 31);
    const JointSpectralMeasure nu = joint_measure(plant.tuple);
    const Region small = Region::polydisk(nu.atom(0), 0.05);
    const Region big = Region::polydisk(nu.atom(0), 0.4);
    const HSProjection ps = hs_joint(plant.tuple, small, tol);
    const HSProjection pb = hs_joint(plant.tuple, big, tol);
    CHECK(subspace_leq(ps.subspace, pb.subspace, tol));
}

TEST_CASE("hyperinvariance under a commutant element") {
    Tolerance tol;
    const PlantedTuple plant = random_planted_tuple(6, 2, 41);
    const JointSpectralMeasure nu = joint_measure(plant.tuple);
    const auto [x1, x2] = split_regions(nu);
    const HSProjection p = hs_joint(plant.tuple, x1, tol);
    const CMatrix proj = p.subspace.projector();
    const CMatrix rest = CMatrix::Identity(6, 6) - proj;

    // A commutant element beyond the generated algebra: distinct scalars per
    // planted block, conjugated along. It commutes with every T_i.
    CMatrix d = CMatrix::Zero(6, 6);
    for (int i = 0; i < 6; ++i) {
        const double key = plant.diagonal[static_cast<size_t>(i)][0].real();
        d(i, i) = Complex(std::floor(key * 8.0) / 3.0, 0.5);
    }
    const CMatrix c = plant.conjugator * d * plant.conjugator.inverse();
    for (int i = 0; i < 2; ++i) {
        const CMatrix comm = c * plant.tuple.matrix(i) - plant.tuple.matrix(i) * c;
        REQUIRE(operator_norm(comm) <= 1e-8 * std::max(1.0, operator_norm(c)));
    }
    CHECK(operator_norm(rest * c * proj) <= 1e-7 * std::max(1.0, operator_norm(c)));
}

TEST_CASE("largest invariant projection dominates planted sub-invariants") {
    Tolerance tol;
    const PlantedTuple plant = random_planted_tuple(7, 2, 13);
    const JointSpectralMeasure nu = joint_measure(plant.tuple);
    const auto [x1, x2] = split_regions(nu);
    const HSProjection p = hs_joint(plant.tuple, x1, tol);
    REQUIRE(p.subspace.dim() >= 1);

    // A planted invariant line inside the region: the conjugated basis
    // vector of a position carrying atom 0.
    int pos = -1;
    for (int i = 0; i < 7; ++i) {
        if (std::abs(plant.diagonal[static_cast<size_t>(i)][0] - nu.atom(0)[0]) < 1e-9 &&
            std::abs(plant.diagonal[static_cast<size_t>(i)][1] - nu.atom(0)[1]) < 1e-9) {
            pos = i;
            break;
        }
    }
    REQUIRE(pos >= 0);
    const Subspace qprime = line(7, plant.conjugator.col(pos));
    CHECK(invariance_residual(plant.tuple, qprime) <= 1e-8);
    CHECK(projection_distance(meet(qprime, p.subspace, tol), qprime) <= 1e-7);
}

TEST_CASE("compression identities") {
    Tolerance tol;
    SUBCASE("identity projection compresses to the tuple itself") {
        const CommutingTuple t = certify_commuting({mat2(1, 1, 0, 2), mat2(1, 3, 0, 4)});
        const Compression c = compress(t, Subspace::full(2), tol);
        REQUIRE(c.on_range.has_value());
        CHECK_FALSE(c.on_corner.has_value());
        for (int i = 0; i < 2; ++i)
            CHECK((c.on_range->matrix(i) - t.matrix(i)).norm() <= 1e-12);
        CHECK(c.mixture_distance <= 1e-10);
    }
    SUBCASE("compressed measure is the renormalized restriction") {
        const PlantedTuple plant = random_planted_tuple(4, 2, 19);
        const JointSpectralMeasure nu = joint_measure(plant.tuple);
        const auto [x1, x2] = split_regions(nu);
        const HSProjection q = hs_joint(plant.tuple, x1, tol);
        const Compression c = compress(plant.tuple, q.subspace, tol);
        CHECK(c.mixture_distance <= 1e-8);
        REQUIRE(c.on_range.has_value());
        const JointSpectralMeasure nu_q = joint_measure(*c.on_range);
        for (int p = 0; p < nu_q.size(); ++p) CHECK(x1.contains(nu_q.atom(p)));
        CHECK(nu_q.denominator() == q.trace_num);
    }
    SUBCASE("middle corner carries the band between two nested regions") {
        const PlantedTuple plant = random_planted_tuple(6, 2, 23);
        const JointSpectralMeasure nu = joint_measure(plant.tuple);
        REQUIRE(nu.size() >= 2);
        const Region x1 = Region::polydisk(nu.atom(0), 0.2);
        const Region x2 = Region::union_of({x1, Region::polydisk(nu.atom(1), 0.2)});
        const HSProjection p2 = hs_joint(plant.tuple, x2, tol);

        const Compression c2 = compress(plant.tuple, p2.subspace, tol);
        REQUIRE(c2.on_range.has_value());
        const HSProjection inner = hs_joint(*c2.on_range, Region::complement(x1), tol);
        REQUIRE(inner.subspace.dim() > 0);
        REQUIRE(inner.subspace.dim() < c2.on_range->k());
        const Compression cm = compress(*c2.on_range, inner.subspace, tol);
        REQUIRE(cm.on_range.has_value());
        const JointSpectralMeasure nu_mid = joint_measure(*cm.on_range);
        for (int p = 0; p < nu_mid.size(); ++p) {
            CHECK(x2.contains(nu_mid.atom(p)));
            CHECK_FALSE(x1.contains(nu_mid.atom(p)));
        }
    }
    SUBCASE("non-invariant subspaces are refused") {
        const PlantedTuple plant = random_planted_tuple(5, 2, 29);
        const Subspace wild = Subspace::span_of(random_gaussian_matrix(5, 2, 3), tol);
        CHECK_THROWS_AS(compress(plant.tuple, wild, tol), NotInvariant);
    }
}

TEST_CASE("adjoint duality") {
    Tolerance tol;
    SUBCASE("normal tuples: both sides are the orthogonal spectral projection") {
        const CommutingTuple t = certify_commuting({mat2(1, 0, 0, 2), mat2(3, 0, 0, 4)});
        const Region e = Region::polydisk({Complex(1), Complex(3)}, 0.4);
        const DualityReport rep = adjoint_dual(t, e, tol);
        CHECK(rep.distance <= 1e-10);
        CHECK(projection_distance(rep.lhs.subspace, line(2, CVector::Unit(2, 0))) <= 1e-10);
    }
    SUBCASE("the worked 2x2 non-normal example") {
        const CMatrix a = mat2(0, 1, 0, 5);
        const CommutingTuple t = certify_commuting({a});
        const Region e = Region::rectangle({Region1D::disk(0, 1)});
        const DualityReport rep = adjoint_dual(t, e, tol);
        CVector v(2);
        v << 5, -1;
        CHECK(projection_distance(rep.lhs.subspace, line(2, v)) <= 1e-10);
        CHECK(rep.distance <= 1e-10);
    }
    SUBCASE("random tuples agree to 1e-8") {
        for (std::uint64_t seed : {3u, 5u}) {
            const PlantedTuple plant = random_planted_tuple(6, 2, seed);
            const JointSpectralMeasure nu = joint_measure(plant.tuple);
            const auto [x1, x2] = split_regions(nu);
            CHECK(adjoint_dual(plant.tuple, x1, tol).distance <= 1e-8);
        }
    }
}

TEST_CASE("similarity transport") {
    Tolerance tol;
    SUBCASE("unitary conjugation transports exactly") {
        const PlantedTuple plant = random_planted_tuple(5, 2, 7, /*unitary=*/true);
        const JointSpectralMeasure nu = joint_measure(plant.tuple);
        const auto [x1, x2] = split_regions(nu);
        const CMatrix u = random_unitary(5, 3);
        const TransportReport rep = similarity_transport(u, plant.tuple, x1, tol);
        CHECK(rep.condition_number == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(rep.distance <= 1e-9);
    }
    SUBCASE("diagonal scaling on the non-normal 2x2 example") {
        const CommutingTuple t = certify_commuting({mat2(0, 1, 0, 5)});
        CMatrix s = CMatrix::Zero(2, 2);
        s(0, 0) = 1.0;
        s(1, 1) = 10.0;
        const Region x = Region::rectangle({Region1D::disk(0, 1)});
        const TransportReport rep = similarity_transport(s, t, x, tol);
        CHECK(rep.distance <= 1e-8);
    }
    SUBCASE("random conditioned similarities stay within 1e-6") {
        for (std::uint64_t seed : {17u, 19u}) {
            const PlantedTuple plant = random_planted_tuple(6, 2, seed);
            const JointSpectralMeasure nu = joint_measure(plant.tuple);
            const auto [x1, x2] = split_regions(nu);
            const CMatrix s = random_invertible(6, seed + 1000, 1e3);
            const TransportReport rep = similarity_transport(s, plant.tuple, x1, tol);
            CHECK(rep.condition_number <= 1e3 * 1.01);
            CHECK(rep.distance <= 1e-6);
        }
    }
    SUBCASE("singular matrices are rejected") {
        const CommutingTuple t = certify_commuting({mat2(1, 0, 0, 2)});
        CHECK_THROWS_AS(
            similarity_transport(CMatrix::Zero(2, 2), t, Region::full(1), tol), Error);
    }
}

TEST_CASE("exact Jordan structure through the joint machinery") {
    // A genuinely defective pair given in exact triangular form, where the
    // eigenvalues stay exact and the projections remain sharp.
    Tolerance tol;
    CMatrix j = CMatrix::Zero(3, 3);
    j(0, 1) = 1.0;
    j(1, 2) = 1.0;
    CMatrix f = 2.0 * j * j + j + 4.0 * CMatrix::Identity(3, 3);
    const CommutingTuple t = certify_commuting({j, f});
    const Region around =
        Region::rectangle({Region1D::disk(0, 0.5), Region1D::disk(4, 0.5)});
    const HSProjection p = hs_joint(t, around, tol);
    CHECK(p.subspace.dim() == 3);
    const HSProjection none = hs_joint(
        t, Region::rectangle({Region1D::disk(2, 0.5), Region1D::disk(4, 0.5)}), tol);
    CHECK(none.subspace.dim() == 0);
}
