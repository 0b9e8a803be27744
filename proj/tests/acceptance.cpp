// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// Criterion 10 exercises the CLI binary; set SPECFLAG_BIN to its path
// (defaults to ./specflag next to the test binary, which is where the build
// puts it).

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "specflag/holocalc.hpp"
#include "specflag/io.hpp"
#include "specflag/jointspec.hpp"
#include "specflag/ordering.hpp"

using namespace specflag;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

struct Sizes {
    int k;
    int n;
};

Sizes sizes_for(std::uint64_t seed, int kmax, int nmax) {
    return Sizes{2 + static_cast<int>(seed % static_cast<std::uint64_t>(kmax - 1)),
                 1 + static_cast<int>((seed / 7) % static_cast<std::uint64_t>(nmax))};
}

// Disjoint polydisk regions around two distinct atoms.
std::pair<Region, Region> split_regions(const JointSpectralMeasure& nu) {
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

double atom_separation(const JointSpectralMeasure& nu) {
    double sep = std::numeric_limits<double>::infinity();
    for (int a = 0; a < nu.size(); ++a)
        for (int b = a + 1; b < nu.size(); ++b) {
            double d = 0.0;
            for (int j = 0; j < nu.n(); ++j)
                d = std::max(d, std::abs(nu.atom(a)[static_cast<size_t>(j)] -
                                         nu.atom(b)[static_cast<size_t>(j)]));
            sep = std::min(sep, d);
        }
    return sep;
}

void criterion1() {
    Tolerance tol;
    double worst_res = 0.0, worst_multiset = 0.0;
    bool pass = true;
    for (std::uint64_t seed = 1; seed <= 100 && pass; ++seed) {
        const Sizes sz = sizes_for(seed, 10, 3);
        const PlantedTuple plant = random_planted_tuple(sz.k, sz.n, seed);
        const SchurFlag flag = simultaneous_schur(plant.tuple, tol);
        worst_res = std::max(worst_res, flag.residual);
        const JointSpectralMeasure got(sz.n, joint_eigenvalues(flag), sz.k);
        const JointSpectralMeasure want(sz.n, plant.diagonal, sz.k);
        worst_multiset = std::max(worst_multiset, measure_distance(got, want));
        pass = flag.residual <= 1e-8 && worst_multiset <= 1e-7;
    }
    std::ostringstream detail;
    detail << "100 tuples, worst residual " << worst_res << ", worst multiset distance "
           << worst_multiset;
    report(1, "simultaneous triangularization on planted tuples", pass, detail.str());
}

void criterion2() {
    Tolerance tol;
    bool pass = true;
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 50 && pass; ++seed) {
        const Sizes sz = sizes_for(seed * 13 + 1, 9, 3);
        const PlantedTuple plant = random_planted_tuple(sz.k, sz.n, seed * 13 + 1);
        const JointSpectralMeasure nu = joint_measure(plant.tuple, tol);
        if (nu.size() < 2) continue;
        const auto [x1, x2] = split_regions(nu);
        const Region x = Region::union_of({x1, x2});
        const HSProjection p = hs_joint(plant.tuple, x, tol);
        long count = 0;
        for (int a = 0; a < nu.size(); ++a)
            if (x.contains(nu.atom(a))) count += nu.count(a);
        pass = (p.trace_num == count) && (p.trace_den == sz.k) &&
               (p.subspace.dim() == count);
        ++checked;
    }
    report(2, "trace of joint projections equals the joint measure exactly", pass,
           std::to_string(checked) + " instances, rational counts");
}

void criterion3() {
    Tolerance tol;
    bool pass = true;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50 && pass; ++seed) {
        const Sizes sz = sizes_for(seed * 29 + 5, 8, 3);
        const PlantedTuple plant = random_planted_tuple(sz.k, sz.n, seed * 29 + 5);
        const JointSpectralMeasure nu = joint_measure(plant.tuple, tol);
        if (nu.size() < 2) continue;
        const auto [x1, x2] = split_regions(nu);

        const HSProjection p1 = hs_joint(plant.tuple, x1, tol);
        const HSProjection p2 = hs_joint(plant.tuple, x2, tol);
        const HSProjection pu = hs_joint(plant.tuple, Region::union_of({x1, x2}), tol);

        const double dmeet = static_cast<double>(meet(p1.subspace, p2.subspace, tol).dim());
        const double djoin =
            projection_distance(pu.subspace, join(p1.subspace, p2.subspace, tol));
        worst = std::max({worst, dmeet, djoin});
        pass = dmeet == 0.0 && djoin <= 1e-7;
    }
    report(3, "lattice laws for unions, intersections, disjoint regions", pass,
           "worst deviation " + std::to_string(worst));
}

void criterion4() {
    Tolerance tol;
    bool pass = true;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 25 && pass; ++seed) {
        const Sizes sz = sizes_for(seed * 31 + 3, 8, 2);
        const PlantedTuple plant = random_planted_tuple(sz.k, sz.n, seed * 31 + 3);
        const JointSpectralMeasure nu = joint_measure(plant.tuple, tol);
        if (nu.size() < 2) continue;
        const auto [x1, x2] = split_regions(nu);

        const HSProjection q = hs_joint(plant.tuple, x1, tol);
        const Compression comp = compress(plant.tuple, q.subspace, tol);
        worst = std::max(worst, comp.mixture_distance);
        pass = comp.mixture_distance <= 1e-10;
        if (!pass) break;

        // P^(Q)(TQ : X) lifted back equals P(T : X) ^ Q.
        if (comp.on_range) {
            const HSProjection inner = hs_joint(*comp.on_range, x2, tol);
            const Subspace lifted(sz.k, CMatrix(q.subspace.frame() * inner.subspace.frame()));
            const HSProjection px2 = hs_joint(plant.tuple, x2, tol);
            const double d =
                projection_distance(lifted, meet(px2.subspace, q.subspace, tol));
            worst = std::max(worst, d);
            pass = pass && d <= 1e-7;
        }
        // Corner identity: P^(1-Q)((1-Q)T : X) = (Q v P(T : X)) ^ (1 - Q).
        if (comp.on_corner) {
            const HSProjection inner = hs_joint(*comp.on_corner, x2, tol);
            const Subspace qc = q.subspace.orthogonal_complement();
            const Subspace lifted(sz.k, CMatrix(qc.frame() * inner.subspace.frame()));
            const HSProjection px2 = hs_joint(plant.tuple, x2, tol);
            const double d = projection_distance(
                lifted, meet(join(q.subspace, px2.subspace, tol), qc, tol));
            worst = std::max(worst, d);
            pass = pass && d <= 1e-7;
        }
        // Largest-invariant dominance: a planted invariant line inside x1.
        int pos = -1;
        for (int i = 0; i < sz.k; ++i) {
            bool match = true;
            for (int j = 0; j < sz.n; ++j)
                match = match && std::abs(plant.diagonal[static_cast<size_t>(i)][static_cast<size_t>(j)] -
                                          nu.atom(0)[static_cast<size_t>(j)]) < 1e-9;
            if (match) {
                pos = i;
                break;
            }
        }
        if (pos >= 0) {
            const Subspace qprime(sz.k, plant.conjugator.col(pos).normalized());
            const double d =
                projection_distance(meet(qprime, q.subspace, tol), qprime);
            worst = std::max(worst, d);
            pass = pass && d <= 1e-7;
        }
    }
    report(4, "decomposition, compression and largest-invariant dominance", pass,
           "worst deviation " + std::to_string(worst));
}

void criterion5() {
    Tolerance tol;
    bool pass = true;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50 && pass; ++seed) {
        const Sizes sz = sizes_for(seed * 17 + 7, 8, 2);
        const PlantedTuple plant = random_planted_tuple(sz.k, sz.n, seed * 17 + 7);
        const JointSpectralMeasure nu = joint_measure(plant.tuple, tol);
        if (nu.size() < 2) continue;
        const auto [x1, x2] = split_regions(nu);

        const double ddual = adjoint_dual(plant.tuple, x1, tol).distance;
        const CMatrix s = random_invertible(sz.k, seed + 4000, 1e3);
        const TransportReport tr = similarity_transport(s, plant.tuple, x1, tol);
        worst = std::max({worst, ddual, tr.distance});
        pass = ddual <= 1e-6 && tr.distance <= 1e-6 && tr.condition_number <= 1e3 * 1.01;
    }
    report(5, "adjoint duality and similarity transport", pass,
           "worst distance " + std::to_string(worst));
}

void criterion6() {
    Tolerance tol;
    bool pass = true;
    double worst_at_atoms = 0.0;
    double floor_away = std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 20 && pass; ++seed) {
        const int n = 1 + static_cast<int>(seed % 3);
        const int k = std::min(6, 256 / (1 << n));
        const PlantedTuple plant = random_planted_tuple(k, n, seed * 37);
        const JointSpectralMeasure nu = joint_measure(plant.tuple, tol);
        double scale2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double nrm = operator_norm(plant.tuple.matrix(i));
            scale2 += nrm * nrm;
        }

        for (int a = 0; a < nu.size(); ++a) {
            const double h = harte_member(plant.tuple, nu.atom(a), HarteSide::kLeft, tol).margin;
            const double al = alpha(plant.tuple, nu.atom(a)).sigma_min;
            worst_at_atoms = std::max({worst_at_atoms, h / (1.0 + scale2),
                                       al / (1.0 + std::sqrt(scale2))});
        }
        pass = worst_at_atoms <= 1e-7;

        // Probes at distance >= 0.1 from every atom.
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(-2.5, 2.5);
        int found = 0;
        for (int trial = 0; trial < 100 && found < 5; ++trial) {
            std::vector<Complex> w(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) w[static_cast<size_t>(j)] = Complex(unif(rng), unif(rng));
            double dist = std::numeric_limits<double>::infinity();
            for (int a = 0; a < nu.size(); ++a) {
                double d = 0.0;
                for (int j = 0; j < n; ++j)
                    d = std::max(d, std::abs(w[static_cast<size_t>(j)] - nu.atom(a)[static_cast<size_t>(j)]));
                dist = std::min(dist, d);
            }
            if (dist < 0.1) continue;
            ++found;
            const double h = harte_member(plant.tuple, w, HarteSide::kLeft, tol).margin;
            const double al = alpha(plant.tuple, w).sigma_min;
            floor_away = std::min({floor_away, h, al});
        }
        pass = pass && floor_away > 1e-9;
    }
    std::ostringstream detail;
    detail << "margins at atoms <= " << worst_at_atoms << ", recorded floor away "
           << floor_away;
    report(6, "spectrum inclusion chain margins", pass, detail.str());
}

void criterion7() {
    Tolerance tol;
    bool pass = true;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50 && pass; ++seed) {
        const Sizes sz = sizes_for(seed * 11 + 9, 8, 3);
        const PlantedTuple plant = random_planted_tuple(sz.k, sz.n, seed * 11 + 9);
        const JointSpectralMeasure nu = joint_measure(plant.tuple, tol);
        std::vector<double> radii;
        for (int i = 0; i < sz.n; ++i) radii.push_back(operator_norm(plant.tuple.matrix(i)));
        const PeanoCurve curve(sz.n, radii, 3);
        const Flag flag =
            build_flag(plant.tuple, assign_params(curve, nu, tol), tol);

        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(-0.6, 0.6);
        CommPolynomial f(sz.n);
        for (int term = 0; term < 3; ++term) {
            std::vector<int> idx(static_cast<size_t>(sz.n), 0);
            int degree_left = 3;
            for (int j = 0; j < sz.n; ++j) {
                idx[static_cast<size_t>(j)] = static_cast<int>(rng() % 2);
                degree_left -= idx[static_cast<size_t>(j)];
                if (degree_left <= 0) break;
            }
            f.add_term(idx, Complex(unif(rng), unif(rng)));
        }
        f.add_term(std::vector<int>(static_cast<size_t>(sz.n), 0), Complex(unif(rng), 0.3));

        const SimultUTReport rep = verify_simultut(f, plant.tuple, flag, tol);
        worst = std::max(worst, rep.measure_dist);
        pass = rep.measure_dist <= 1e-7 && rep.defect_nilpotent;
    }
    report(7, "flag triangularization theorem for f(T)", pass,
           "50 pairs, worst multiset distance " + std::to_string(worst));
}

void criterion8() {
    Tolerance tol;
    bool pass = true;
    std::ostringstream detail;

    // n = 1: exponential and resolvent at 256 angular nodes.
    {
        CMatrix a(3, 3);
        a << Complex(0.9, 0.2), 1.0, 0.0, 0.0, Complex(-0.4, -0.5), 0.7, 0.0, 0.0,
            Complex(0.1, 0.8);
        const CommutingTuple t = certify_commuting({a});
        QuadratureSpec quad;
        quad.angular_nodes = 256;

        Eigen::ComplexEigenSolver<CMatrix> es(a, true);
        CVector expd(3);
        for (int i = 0; i < 3; ++i) expd(i) = std::exp(es.eigenvalues()(i));
        const CMatrix exp_want =
            es.eigenvectors() * expd.asDiagonal() * es.eigenvectors().inverse();
        const CMatrix exp_got =
            vasilescu_integral(t, HoloFunction::exp_linear(1, {Complex(1)}), quad, tol);
        const double de = operator_norm(exp_got - exp_want);

        const Complex w0(6.0, 1.0);
        auto coeffs = [w0](int degree) {
            HoloFunction::ShellTerms terms;
            terms.emplace_back(std::vector<int>{degree},
                               1.0 / std::pow(w0, degree + 1));
            return terms;
        };
        auto tail = [w0](int degree, const std::vector<double>& r) {
            const double q = r[0] / std::abs(w0);
            if (q >= 1.0) return std::numeric_limits<double>::infinity();
            return std::pow(q, degree + 1) / (std::abs(w0) * (1.0 - q));
        };
        const HoloFunction resolvent =
            HoloFunction::power_series(1, {std::abs(w0)}, coeffs, tail);
        const CMatrix res_want = (w0 * CMatrix::Identity(3, 3) - a).inverse();
        const CMatrix res_got = vasilescu_integral(t, resolvent, quad, tol);
        const double dr = operator_norm(res_got - res_want);

        const CMatrix one_got = vasilescu_integral(
            t, HoloFunction::polynomial(CommPolynomial::constant(1, 1.0)), quad, tol);
        const double d1 = operator_norm(one_got - CMatrix::Identity(3, 3));

        pass = de <= 1e-8 && dr <= 1e-8 && d1 <= 1e-10;
        detail << "n=1 exp " << de << ", resolvent " << dr << ", unit " << d1;

        // Richardson order on the periodic direction.
        auto err_at = [&](int nodes) {
            QuadratureSpec q2;
            q2.angular_nodes = nodes;
            return operator_norm(
                vasilescu_integral(t, HoloFunction::exp_linear(1, {Complex(1)}), q2, tol) -
                exp_want);
        };
        const double e16 = err_at(16);
        const double e32 = err_at(32);
        const double order = (e32 > 1e-14) ? std::log2(e16 / e32) : 16.0;
        pass = pass && order >= 4.0;
        detail << ", order " << order;
    }

    // n = 2: polynomial tests at 64 x 64 x 16 nodes.
    {
        const PlantedTuple plant = random_planted_tuple(3, 2, 19);
        QuadratureSpec quad;
        quad.angular_nodes = 64;
        quad.radial_nodes = 16;
        const CommPolynomial prod =
            CommPolynomial::coordinate(2, 1) * CommPolynomial::coordinate(2, 2);
        const CMatrix got =
            vasilescu_integral(plant.tuple, HoloFunction::polynomial(prod), quad, tol);
        const CMatrix want = plant.tuple.matrix(0) * plant.tuple.matrix(1);
        const double d2 = operator_norm(got - want) / std::max(1.0, operator_norm(want));
        const CMatrix unit = vasilescu_integral(
            plant.tuple, HoloFunction::polynomial(CommPolynomial::constant(2, 1.0)), quad,
            tol);
        const double d2u = operator_norm(unit - CMatrix::Identity(3, 3));
        pass = pass && d2 <= 1e-4 && d2u <= 1e-4;
        detail << "; n=2 product " << d2 << ", unit " << d2u;
    }

    report(8, "boundary-integral functional calculus", pass, detail.str());
}

void criterion9() {
    Tolerance tol;
    bool pass = true;
    double worst_measure = 0.0, worst_proj = 0.0;
    for (std::uint64_t seed = 1; seed <= 30 && pass; ++seed) {
        const Sizes sz = sizes_for(seed * 23 + 11, 7, 2);
        const PlantedTuple plant = random_planted_tuple(std::max(3, sz.k), 2, seed * 23 + 11);
        const JointSpectralMeasure nu = joint_measure(plant.tuple, tol);

        std::vector<HoloFunction> h;
        if (seed % 2 == 0) {
            h.push_back(HoloFunction::polynomial(CommPolynomial::coordinate(2, 1) +
                                                 CommPolynomial::coordinate(2, 2)));
            h.push_back(HoloFunction::polynomial(CommPolynomial::coordinate(2, 1) *
                                                 CommPolynomial::coordinate(2, 2)));
        } else {
            h.push_back(HoloFunction::exp_linear(2, {Complex(0.4), Complex(0.0)}));
            h.push_back(HoloFunction::exp_linear(2, {Complex(0.0), Complex(0.3)}));
        }

        // Region: a polydisk around the image of atom 0, with radius below
        // a quarter of the image separation.
        std::vector<Complex> img0 = {h[0].eval(nu.atom(0)), h[1].eval(nu.atom(0))};
        double img_sep = std::numeric_limits<double>::infinity();
        for (int a = 1; a < nu.size(); ++a) {
            const std::vector<Complex> img = {h[0].eval(nu.atom(a)), h[1].eval(nu.atom(a))};
            double d = std::max(std::abs(img[0] - img0[0]), std::abs(img[1] - img0[1]));
            img_sep = std::min(img_sep, d);
        }
        if (!(img_sep > 1e-4)) continue;  // collision: the region would be ambiguous
        const Region x = Region::polydisk(img0, std::min(0.25, img_sep / 4.0));

        const PushforwardReport rep = verify_pushforward(h, plant.tuple, {x}, tol);
        worst_measure = std::max(worst_measure, rep.measure_dist);
        worst_proj = std::max(worst_proj, rep.projection_dists[0]);
        pass = worst_measure <= 1e-7 && worst_proj <= 1e-7;
    }
    std::ostringstream detail;
    detail << "worst multiset " << worst_measure << ", worst projection " << worst_proj;
    report(9, "push-forward of measures and projections", pass, detail.str());
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion10() {
    const char* env_bin = std::getenv("SPECFLAG_BIN");
    const std::string bin = env_bin ? env_bin : "./specflag";
    if (!std::filesystem::exists(bin)) {
        report(10, "verify-all determinism across thread counts", false,
               "CLI binary not found at " + bin);
        return;
    }
    const auto dir = std::filesystem::temp_directory_path() / "specflag_accept10";
    std::filesystem::create_directories(dir);
    const PlantedTuple plant = random_planted_tuple(6, 2, 7);
    TupleFile doc;
    doc.k = 6;
    doc.n = 2;
    doc.matrices = plant.tuple.matrices();
    const auto input = dir / "tuple.json";
    write_tuple_file(input.string(), doc);

    std::string first;
    bool pass = true;
    for (int threads : {1, 2, 8}) {
        const auto out = dir / ("out" + std::to_string(threads));
        std::filesystem::create_directories(out);
        const std::string cmd = "SPECFLAG_THREADS=" + std::to_string(threads) + " " + bin +
                                " run --task verify-all --input " + input.string() +
                                " --out " + out.string() + " --seed 7 > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        if (rc != 0) {
            report(10, "verify-all determinism across thread counts", false,
                   "CLI exited with status " + std::to_string(rc));
            return;
        }
        const std::string body = read_file(out / "verify.json");
        if (first.empty())
            first = body;
        else
            pass = pass && (body == first);
    }
    pass = pass && !first.empty();
    report(10, "verify-all determinism across thread counts", pass,
           "threads 1, 2, 8 byte-identical");
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    std::cout << "all criteria passed" << std::endl;
    return 0;
}
