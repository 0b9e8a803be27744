// specflag: batch front door for the spectral-flag toolkit.
//
// Exit codes: 0 success, 2 certification failure, 3 boundary ambiguity,
// 64 usage/format error, 70 internal numerical failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "specflag/holocalc.hpp"
#include "specflag/io.hpp"
#include "specflag/jointspec.hpp"
#include "specflag/ordering.hpp"

namespace sf = specflag;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotCommuting = 2;
constexpr int kExitBoundary = 3;
constexpr int kExitFormat = 64;
constexpr int kExitNumerical = 70;

int thread_cap() {
    if (const char* env = std::getenv("SPECFLAG_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

ordered_json complex_json(const sf::Complex& z) {
    return ordered_json::array({z.real(), z.imag()});
}

ordered_json matrix_json(const sf::CMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json point_json(const std::vector<sf::Complex>& z) {
    ordered_json out = ordered_json::array();
    for (const auto& c : z) out.push_back(complex_json(c));
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sf::Error("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

struct Options {
    std::string input;
    std::string out_dir = ".";
    std::string task;
    std::string region_json;
    std::string func_spec = "exp";
    std::uint64_t seed = 1;
    int depth = 4;
    int grid_re = 21;
    int grid_im = 21;
    int angular_nodes = 256;
    int radial_nodes = 16;
    double tol_abs = 1e-10;
    double tol_rel = 1e-8;
};

sf::Tolerance tolerance(const Options& opt) { return sf::Tolerance{opt.tol_abs, opt.tol_rel}; }

sf::CommutingTuple load_tuple(const Options& opt) {
    const sf::TupleFile doc = sf::read_tuple_file(opt.input);
    return sf::certify_commuting(doc.matrices, tolerance(opt));
}

sf::HoloFunction parse_func(const std::string& spec, int n) {
    if (spec == "exp") {
        return sf::HoloFunction::exp_linear(n, std::vector<sf::Complex>(static_cast<size_t>(n), 1.0));
    }
    if (spec.rfind("coord:", 0) == 0) {
        const int j = std::stoi(spec.substr(6));
        return sf::HoloFunction::coordinate(n, j);
    }
    if (spec.rfind("poly:", 0) == 0) {
        const auto doc = nlohmann::json::parse(spec.substr(5));
        sf::CommPolynomial p(n);
        for (const auto& term : doc.at("terms")) {
            std::vector<int> idx = term.at("idx").get<std::vector<int>>();
            const auto& c = term.at("c");
            p.add_term(idx, sf::Complex(c.at(0).get<double>(), c.at(1).get<double>()));
        }
        return sf::HoloFunction::polynomial(std::move(p));
    }
    throw sf::Error("unknown --func '" + spec + "' (use exp | coord:j | poly:{...})");
}

ordered_json measure_json(const sf::JointSpectralMeasure& nu) {
    ordered_json out;
    out["n"] = nu.n();
    out["denominator"] = nu.denominator();
    ordered_json atoms = ordered_json::array();
    ordered_json counts = ordered_json::array();
    ordered_json weights = ordered_json::array();
    for (int p = 0; p < nu.size(); ++p) {
        atoms.push_back(point_json(nu.atom(p)));
        counts.push_back(nu.count(p));
        weights.push_back(nu.weight(p));
    }
    out["atoms"] = std::move(atoms);
    out["counts"] = std::move(counts);
    out["weights"] = std::move(weights);
    return out;
}

int cmd_check(const Options& opt) {
    try {
        const sf::CommutingTuple t = load_tuple(opt);
        std::cout << "certified: k=" << t.k() << " n=" << t.n()
                  << " residual=" << sf::format_double(t.comm_residual()) << "\n";
        return kExitOk;
    } catch (const sf::NonCommuting& e) {
        std::cerr << "not commuting: " << e.what() << "\n";
        return kExitNotCommuting;
    }
}

void task_triangularize(const Options& opt, const sf::CommutingTuple& t) {
    const sf::SchurFlag flag = sf::simultaneous_schur(t, tolerance(opt));
    ordered_json out;
    out["k"] = t.k();
    out["n"] = t.n();
    out["residual"] = flag.residual;
    out["u"] = matrix_json(flag.u);
    ordered_json tris = ordered_json::array();
    for (const auto& r : flag.triangulars) tris.push_back(matrix_json(r));
    out["triangulars"] = std::move(tris);
    ordered_json evs = ordered_json::array();
    for (const auto& ev : sf::joint_eigenvalues(flag)) evs.push_back(point_json(ev));
    out["joint_eigenvalues"] = std::move(evs);
    write_json(std::filesystem::path(opt.out_dir) / "triangularize.json", out);
}

void task_measure(const Options& opt, const sf::CommutingTuple& t) {
    write_json(std::filesystem::path(opt.out_dir) / "measure.json",
               measure_json(sf::joint_measure(t, tolerance(opt))));
}

void task_project(const Options& opt, const sf::CommutingTuple& t) {
    if (opt.region_json.empty())
        throw sf::Error("task project requires --region '<json>'");
    const sf::Region region = sf::parse_region_json(opt.region_json);
    const sf::HSProjection p = sf::hs_joint(t, region, tolerance(opt));
    ordered_json out;
    out["trace_num"] = p.trace_num;
    out["trace_den"] = p.trace_den;
    out["dim"] = p.subspace.dim();
    out["frame"] = matrix_json(p.subspace.frame());
    out["invariance_residual"] = sf::invariance_residual(t, p.subspace);
    write_json(std::filesystem::path(opt.out_dir) / "project.json", out);
}

void task_order(const Options& opt, const sf::CommutingTuple& t) {
    const sf::Tolerance tol = tolerance(opt);
    const sf::JointSpectralMeasure nu = sf::joint_measure(t, tol);
    std::vector<double> radii;
    for (int i = 0; i < t.n(); ++i) radii.push_back(sf::operator_norm(t.matrix(i)));
    const sf::PeanoCurve curve(t.n(), radii, opt.depth);
    const sf::SpectralOrdering ordering = sf::assign_params(curve, nu, tol);
    const sf::Flag flag = sf::build_flag(t, ordering, tol);

    ordered_json out;
    out["depth"] = opt.depth;
    ordered_json params = ordered_json::array();
    for (int p = 0; p < nu.size(); ++p) {
        ordered_json row;
        row["atom"] = point_json(nu.atom(p));
        row["t"] = ordering.params[static_cast<size_t>(p)];
        params.push_back(std::move(row));
    }
    out["params"] = std::move(params);
    out["breakpoints"] = flag.breakpoints;
    out["dims"] = flag.dims;
    out["flag_residual"] = flag.schur.residual;
    out["basis"] = matrix_json(flag.schur.u);
    write_json(std::filesystem::path(opt.out_dir) / "order.json", out);
}

std::vector<std::vector<sf::Complex>> build_grid(const sf::JointSpectralMeasure& nu,
                                                 int grid_re, int grid_im) {
    // Per-coordinate rectangular grid over the spectrum's bounding box with
    // half-a-unit padding; coordinates combine as a Cartesian product.
    const int n = nu.n();
    std::vector<std::vector<sf::Complex>> axes(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        double re_min = 0, re_max = 0, im_min = 0, im_max = 0;
        for (int p = 0; p < nu.size(); ++p) {
            const sf::Complex z = nu.atom(p)[static_cast<size_t>(j)];
            re_min = std::min(re_min, z.real());
            re_max = std::max(re_max, z.real());
            im_min = std::min(im_min, z.imag());
            im_max = std::max(im_max, z.imag());
        }
        const double pad = 0.5 * (1.0 + std::max(re_max - re_min, im_max - im_min));
        for (int a = 0; a < grid_re; ++a)
            for (int b = 0; b < grid_im; ++b) {
                const double x = grid_re == 1 ? 0.5 : static_cast<double>(a) / (grid_re - 1);
                const double y = grid_im == 1 ? 0.5 : static_cast<double>(b) / (grid_im - 1);
                axes[static_cast<size_t>(j)].push_back(
                    sf::Complex(re_min - pad + x * (re_max - re_min + 2 * pad),
                                im_min - pad + y * (im_max - im_min + 2 * pad)));
            }
    }
    std::vector<std::vector<sf::Complex>> grid;
    std::vector<size_t> idx(static_cast<size_t>(n), 0);
    while (true) {
        std::vector<sf::Complex> point(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) point[static_cast<size_t>(j)] = axes[static_cast<size_t>(j)][idx[static_cast<size_t>(j)]];
        grid.push_back(std::move(point));
        if (grid.size() > 200000) throw sf::Error("scan grid too large (cap 200000 points)");
        int j = n - 1;
        while (j >= 0) {
            if (++idx[static_cast<size_t>(j)] < axes[static_cast<size_t>(j)].size()) break;
            idx[static_cast<size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return grid;
}

std::string svg_scatter(const sf::SpectrumScan& scan, const sf::JointSpectralMeasure& nu) {
    // First-coordinate projection: margin heat cells under eigenvalue dots.
    const int width = 640, height = 640;
    double re_min = 1e300, re_max = -1e300, im_min = 1e300, im_max = -1e300;
    for (const auto& w : scan.grid) {
        re_min = std::min(re_min, w[0].real());
        re_max = std::max(re_max, w[0].real());
        im_min = std::min(im_min, w[0].imag());
        im_max = std::max(im_max, w[0].imag());
    }
    if (re_max <= re_min) re_max = re_min + 1;
    if (im_max <= im_min) im_max = im_min + 1;
    double margin_max = 0.0;
    for (double m : scan.alpha_margins) margin_max = std::max(margin_max, m);
    if (margin_max <= 0) margin_max = 1.0;

    auto px = [&](double re) { return (re - re_min) / (re_max - re_min) * (width - 40) + 20; };
    auto py = [&](double im) { return height - ((im - im_min) / (im_max - im_min) * (height - 40) + 20); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const double cw = (width - 40.0) / std::max<size_t>(1, scan.grid.size() / 8);
    (void)cw;
    for (size_t i = 0; i < scan.grid.size(); ++i) {
        const double frac = scan.alpha_margins[i] / margin_max;
        const int shade = static_cast<int>(255.0 * frac);
        svg += "<rect x=\"" + sf::format_double(px(scan.grid[i][0].real()) - 3) + "\" y=\"" +
               sf::format_double(py(scan.grid[i][0].imag()) - 3) +
               "\" width=\"6\" height=\"6\" fill=\"rgb(" + std::to_string(shade) + "," +
               std::to_string(shade) + ",255)\"/>\n";
    }
    for (int p = 0; p < nu.size(); ++p) {
        svg += "<circle cx=\"" + sf::format_double(px(nu.atom(p)[0].real())) + "\" cy=\"" +
               sf::format_double(py(nu.atom(p)[0].imag())) +
               "\" r=\"4\" fill=\"red\" stroke=\"black\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void task_scan(const Options& opt, const sf::CommutingTuple& t) {
    const sf::Tolerance tol = tolerance(opt);
    const sf::JointSpectralMeasure nu = sf::joint_measure(t, tol);
    const auto grid = build_grid(nu, opt.grid_re, opt.grid_im);
    const sf::SpectrumScan scan = sf::scan(t, grid, tol, thread_cap());

    std::string csv;
    for (int j = 1; j <= t.n(); ++j)
        csv += "re" + std::to_string(j) + ",im" + std::to_string(j) + ",";
    csv += "harte_margin,alpha_margin\n";
    for (size_t i = 0; i < scan.grid.size(); ++i) {
        for (int j = 0; j < t.n(); ++j)
            csv += sf::format_double(scan.grid[i][static_cast<size_t>(j)].real()) + "," +
                   sf::format_double(scan.grid[i][static_cast<size_t>(j)].imag()) + ",";
        csv += sf::format_double(scan.harte_margins[i]) + "," +
               sf::format_double(scan.alpha_margins[i]) + "\n";
    }
    const auto dir = std::filesystem::path(opt.out_dir);
    write_text(dir / "scan.csv", csv);
    write_text(dir / "scan.svg", svg_scatter(scan, nu));

    ordered_json out;
    out["points"] = scan.grid.size();
    out["csv"] = "scan.csv";
    out["svg"] = "scan.svg";
    write_json(dir / "scan.json", out);
}

void task_calc(const Options& opt, const sf::CommutingTuple& t) {
    if (t.n() > 2) throw sf::UnsupportedDimension("task calc supports n in {1, 2}");
    const sf::Tolerance tol = tolerance(opt);
    const sf::HoloFunction f = parse_func(opt.func_spec, t.n());
    sf::QuadratureSpec quad;
    quad.angular_nodes = opt.angular_nodes;
    quad.radial_nodes = opt.radial_nodes;
    const sf::IntegralReport report = sf::vasilescu_integral_report(t, f, quad, tol);
    const sf::CMatrix direct = sf::apply_series(f, t, tol);

    ordered_json out;
    out["func"] = opt.func_spec;
    out["angular_nodes"] = opt.angular_nodes;
    out["radial_nodes"] = opt.radial_nodes;
    out["value"] = matrix_json(report.value);
    out["richardson_delta"] = report.richardson_delta;
    out["series_distance"] = sf::operator_norm(report.value - direct);
    write_json(std::filesystem::path(opt.out_dir) / "calc.json", out);
}

// One row of the verify-all table.
struct VerifyRow {
    std::string id;
    std::string property;
    bool pass;
    double metric;
};

std::vector<VerifyRow> run_verify_all(const Options& opt, const sf::CommutingTuple& t) {
    const sf::Tolerance tol = tolerance(opt);
    std::vector<VerifyRow> rows;
    const sf::JointSpectralMeasure nu = sf::joint_measure(t, tol);

    // Rectangle around the lexicographically first atom.
    const auto& first_atom = nu.atom(0);
    double sep = 1.0;
    for (int p = 1; p < nu.size(); ++p) {
        double d = 0.0;
        for (int j = 0; j < t.n(); ++j)
            d = std::max(d, std::abs(nu.atom(p)[static_cast<size_t>(j)] - first_atom[static_cast<size_t>(j)]));
        sep = std::min(sep, d);
    }
    const double radius = std::max(sep / 4.0, 1e-6);
    const sf::Region x1 = sf::Region::polydisk(first_atom, radius);
    const sf::Region whole = sf::Region::polydisk(first_atom, 1e6);

    {
        const sf::HSProjection p = sf::hs_joint(t, x1, tol);
        const long expect = nu.count(0);
        rows.push_back({"6.1b", "trace of the joint projection equals the joint measure",
                        p.trace_num == expect && p.trace_den == t.k(),
                        static_cast<double>(p.trace_num - expect)});
    }
    if (nu.size() > 1) {
        const sf::Region x2 = sf::Region::polydisk(nu.atom(1), radius);
        const sf::HSProjection p1 = sf::hs_joint(t, x1, tol);
        const sf::HSProjection p2 = sf::hs_joint(t, x2, tol);
        const sf::Subspace m = sf::meet(p1.subspace, p2.subspace, tol);
        rows.push_back({"3.1", "projections of disjoint sets meet at zero", m.dim() == 0,
                        static_cast<double>(m.dim())});
        const sf::HSProjection pu =
            sf::hs_joint(t, sf::Region::union_of({x1, x2}), tol);
        const double d = sf::projection_distance(
            pu.subspace, sf::join(p1.subspace, p2.subspace, tol));
        rows.push_back({"3.2", "projection of a union is the join", d <= 1e-7, d});
    }
    {
        const sf::HSProjection p = sf::hs_joint(t, whole, tol);
        rows.push_back({"4.10", "projection of the full rectangle is the identity",
                        p.subspace.dim() == t.k(), static_cast<double>(p.subspace.dim())});
    }
    if (nu.size() > 1) {
        const sf::HSProjection q = sf::hs_joint(t, x1, tol);
        const sf::Compression comp = sf::compress(t, q.subspace, tol);
        rows.push_back({"6.6", "measure decomposition through an invariant projection",
                        comp.mixture_distance <= 1e-7, comp.mixture_distance});
        const sf::JointSpectralMeasure nu_q = sf::joint_measure(*comp.on_range, tol);
        bool concentrated = true;
        for (int p = 0; p < nu_q.size(); ++p)
            if (!x1.contains(nu_q.atom(p))) concentrated = false;
        rows.push_back({"6.8a", "compressed measure concentrates in the region",
                        concentrated, concentrated ? 0.0 : 1.0});
    }
    {
        const sf::DualityReport dual = sf::adjoint_dual(t, x1, tol);
        rows.push_back({"6.12", "adjoint projection equals the complement construction",
                        dual.distance <= 1e-6, dual.distance});
    }
    {
        sf::BlockTuple sum{{t, t}};
        const double d = sf::measure_distance(sf::joint_measure(sf::direct_sum(sum), tol),
                                              sf::mixture_measure(sum, tol));
        rows.push_back({"7.6", "direct sums mix the measures by dimension", d <= 1e-10, d});
    }
    {
        double worst_h = 0.0, worst_a = 0.0;
        double scale2 = 0.0;
        for (int i = 0; i < t.n(); ++i) {
            const double nrm = sf::operator_norm(t.matrix(i));
            scale2 += nrm * nrm;
        }
        if ((1 << t.n()) * t.k() <= 256) {
            for (int p = 0; p < nu.size(); ++p) {
                worst_h = std::max(
                    worst_h, sf::harte_member(t, nu.atom(p), sf::HarteSide::kLeft, tol).margin);
                worst_a = std::max(worst_a, sf::alpha(t, nu.atom(p)).sigma_min);
            }
            rows.push_back({"8.6", "joint eigenvalues are Harte-singular",
                            worst_h <= 1e-7 * (1.0 + scale2), worst_h});
            rows.push_back({"8.5", "joint eigenvalues are Koszul-singular",
                            worst_a <= 1e-7 * (1.0 + std::sqrt(scale2)), worst_a});
        }
    }
    {
        std::vector<double> radii;
        for (int i = 0; i < t.n(); ++i)
            radii.push_back(sf::operator_norm(t.matrix(i)));
        const sf::PeanoCurve curve(t.n(), radii, opt.depth);
        const sf::SpectralOrdering ordering = sf::assign_params(curve, nu, tol);
        const sf::Flag flag = sf::build_flag(t, ordering, tol);
        sf::CommPolynomial f = sf::CommPolynomial::coordinate(t.n(), 1) *
                               sf::CommPolynomial::coordinate(t.n(), std::min(2, t.n()));
        f = f + sf::CommPolynomial::constant(t.n(), sf::Complex(0.25, 0.0));
        const sf::SimultUTReport rep = sf::verify_simultut(f, t, flag, tol);
        rows.push_back({"1.3a", "spectral distribution of f(T) is the pushforward",
                        rep.measure_dist <= 1e-7, rep.measure_dist});
        rows.push_back({"1.3b", "f(T) minus its flag diagonal is nilpotent",
                        rep.defect_nilpotent, rep.defect_nilpotent ? 0.0 : 1.0});

        const sf::CMatrix s1 = sf::eval_poly(f, t);
        const sf::CMatrix s2 = sf::eval_poly(f * f, t);
        const sf::CMatrix e1 = sf::diag_expectation(s1, flag, tol);
        const sf::CMatrix e12 = sf::diag_expectation(sf::CMatrix(s1 * s2), flag, tol);
        const double hom =
            sf::operator_norm(e12 - e1 * sf::diag_expectation(s2, flag, tol));
        rows.push_back({"9.6", "flag-diagonal expectation is multiplicative",
                        hom <= 1e-7 * std::max(1.0, sf::operator_norm(e12)), hom});
    }
    if (t.n() <= 2) {
        const sf::HoloFunction one =
            sf::HoloFunction::polynomial(sf::CommPolynomial::constant(t.n(), 1.0));
        sf::QuadratureSpec quad;
        quad.angular_nodes = t.n() == 1 ? 256 : 64;
        quad.radial_nodes = 16;
        const sf::CMatrix id = sf::vasilescu_integral(t, one, quad, tol);
        const double d = sf::operator_norm(id - sf::CMatrix::Identity(t.k(), t.k()));
        rows.push_back({"10.1", "boundary calculus is unital",
                        d <= (t.n() == 1 ? 1e-10 : 1e-4), d});
    }
    {
        std::vector<sf::HoloFunction> h;
        sf::CommPolynomial sum = sf::CommPolynomial::coordinate(t.n(), 1);
        for (int j = 2; j <= t.n(); ++j) sum = sum + sf::CommPolynomial::coordinate(t.n(), j);
        h.push_back(sf::HoloFunction::polynomial(sum));
        const sf::Region image_region = sf::Region::polydisk(
            {h[0].eval(first_atom)}, radius);
        const sf::PushforwardReport rep = sf::verify_pushforward(h, t, {image_region}, tol);
        rows.push_back({"11.2a", "spectral distribution pushes forward through h",
                        rep.measure_dist <= 1e-7, rep.measure_dist});
        rows.push_back({"11.2b", "projections pull back through h",
                        rep.projection_dists[0] <= 1e-7, rep.projection_dists[0]});
    }
    {
        const sf::CMatrix s = sf::random_invertible(t.k(), opt.seed + 5, 100.0);
        const sf::TransportReport rep = sf::similarity_transport(s, t, x1, tol);
        rows.push_back({"12.4b", "projections transport through similarities",
                        rep.distance <= 1e-6, rep.distance});
    }
    return rows;
}

void task_verify_all(const Options& opt, const sf::CommutingTuple& t) {
    const auto rows = run_verify_all(opt, t);
    ordered_json out = ordered_json::array();
    bool all_pass = true;
    for (const auto& row : rows) {
        ordered_json r;
        r["id"] = row.id;
        r["property"] = row.property;
        r["pass"] = row.pass;
        r["metric"] = row.metric;
        out.push_back(std::move(r));
        all_pass = all_pass && row.pass;
        std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << row.id << "  " << row.property
                  << "\n";
    }
    ordered_json doc;
    doc["rows"] = std::move(out);
    doc["all_pass"] = all_pass;
    write_json(std::filesystem::path(opt.out_dir) / "verify.json", doc);
    if (!all_pass) throw sf::NumericalFailure("verify-all: some rows failed");
}

int cmd_run(const Options& opt) {
    std::filesystem::create_directories(opt.out_dir);
    sf::CommutingTuple t = [&] {
        try {
            return load_tuple(opt);
        } catch (const sf::NonCommuting&) {
            throw;
        }
    }();
    if (opt.task == "triangularize")
        task_triangularize(opt, t);
    else if (opt.task == "measure")
        task_measure(opt, t);
    else if (opt.task == "project")
        task_project(opt, t);
    else if (opt.task == "order")
        task_order(opt, t);
    else if (opt.task == "spectrum-scan")
        task_scan(opt, t);
    else if (opt.task == "calc")
        task_calc(opt, t);
    else if (opt.task == "verify-all")
        task_verify_all(opt, t);
    else
        throw sf::Error("unknown task '" + opt.task + "'");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral flags, joint measures and functional calculus for commuting tuples"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* check = app.add_subcommand("check", "certify that an input tuple commutes");
    check->add_option("--input", opt.input, "tuple JSON file")->required();
    check->add_option("--tol-abs", opt.tol_abs, "absolute tolerance");
    check->add_option("--tol-rel", opt.tol_rel, "relative tolerance");

    CLI::App* run = app.add_subcommand("run", "run a pipeline task");
    run->add_option("--task", opt.task,
                    "triangularize|measure|project|order|spectrum-scan|calc|verify-all")
        ->required();
    run->add_option("--input", opt.input, "tuple JSON file")->required();
    run->add_option("--out", opt.out_dir, "output directory");
    run->add_option("--seed", opt.seed, "seed for seeded checks");
    run->add_option("--depth", opt.depth, "curve depth for ordering tasks");
    run->add_option("--grid", [&opt](const std::vector<std::string>& vals) {
        const std::string& v = vals.back();
        const auto xpos = v.find('x');
        if (xpos == std::string::npos) return false;
        opt.grid_re = std::atoi(v.substr(0, xpos).c_str());
        opt.grid_im = std::atoi(v.substr(xpos + 1).c_str());
        return opt.grid_re > 0 && opt.grid_im > 0;
    }, "scan grid as RExIM, e.g. 41x41");
    run->add_option("--region", opt.region_json, "region JSON for task=project");
    run->add_option("--func", opt.func_spec, "function for task=calc (exp|coord:j|poly:{..})");
    run->add_option("--nodes", opt.angular_nodes, "angular quadrature nodes");
    run->add_option("--radial", opt.radial_nodes, "radial quadrature nodes");
    run->add_option("--tol-abs", opt.tol_abs, "absolute tolerance");
    run->add_option("--tol-rel", opt.tol_rel, "relative tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitFormat;
    }

    try {
        if (check->parsed()) return cmd_check(opt);
        return cmd_run(opt);
    } catch (const sf::NonCommuting& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotCommuting;
    } catch (const sf::BoundaryAmbiguous& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBoundary;
    } catch (const sf::NumericalFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const sf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
