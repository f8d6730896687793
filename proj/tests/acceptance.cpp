// One line per criterion: PASS/FAIL, the measured quantities and the wall time.
#include "homog/fields.hpp"
#include "homog/pipeline.hpp"
#include "homog/smoothing.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <iostream>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace homog;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(HOMOG_SOURCE_DIR) + "/docs/configs/";

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string f(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string f(const char* format, ...) {
    char b[512];
    va_list ap;
    va_start(ap, format);
    std::vsnprintf(b, sizeof b, format, ap);
    va_end(ap);
    return b;
}

PeriodicCoefficientField coefficient(const CoeffSpec& s) {
    PeriodicCoefficientField c = make_coefficient(s);
    validate_coefficient(c);
    return c;
}

PeriodicCoefficientField laminate(int axis, double base, double amp, double aniso = 1.0, double angle = 0.0) {
    CoeffSpec s;
    s.kind = "laminate";
    s.axis = axis;
    s.base = base;
    s.amp = amp;
    s.anisotropy = aniso;
    s.angle = angle;
    return coefficient(s);
}

// the contrasting pair of docs/configs/default.toml
TwoSided contrasting() { return {laminate(2, 2.0, 1.0, 0.25), laminate(2, 3.0, 1.5, 0.3, 0.4)}; }

double max_phi(const DualCorrectorSet& d) {
    double m = 0.0;
    for (const auto& a : d.phi)
        for (const auto& b : a)
            for (const Vec& v : b) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

double antisymmetry(const DualCorrectorSet& d) {
    double m = 0.0;
    for (int K = 0; K < 3; ++K)
        for (int I = 0; I < 3; ++I)
            for (int j = 0; j < 2; ++j) m = std::max(m, (d.phi[K][I][j] + d.phi[I][K][j]).cwiseAbs().maxCoeff());
    return m;
}

fs::path fresh(const std::string& name) {
    const fs::path p = fs::current_path() / "acceptance_out" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Outcome constant_closure() {
    const ExperimentConfig cfg = load_config(kConfigs + "constant.toml");
    CoeffSpec s = cfg.plus;
    const PeriodicCoefficientField A = coefficient(s);
    const Medium m = build_medium(A, cfg.ny, cfg.ns, cfg.cell_tol);
    const Mat2 Aconst = A.A(0.3, 0.7, 0.1);
    const double chi = std::max(m.cell.chi[0].cwiseAbs().maxCoeff(), m.cell.chi[1].cwiseAbs().maxCoeff());
    const double ahat = (m.cell.Ahat - Aconst).cwiseAbs().maxCoeff();
    const InterfaceProfile p = build_profile(m.cell.Ahat, m.cell.Ahat);
    const TwoSided AA{A, A};
    const InterfaceCorrector c = solve_interface_corrector(AA, p, make_cutoffs(), m, m, cfg.R, cfg.corrector_tol);
    const double w = std::max(c.w[0].cwiseAbs().maxCoeff(), c.w[1].cwiseAbs().maxCoeff());
    const DualCorrectorSet d = interface_dual(AA, p, make_cutoffs(), c, m, m);
    const double phi = std::max(max_phi(d), max_phi(m.dual));
    Pipeline pipe(cfg, {fresh("constant").string()});
    double err = 0.0;
    for (const auto& r : pipe.records()) err = std::max(err, r.err_L4);
    const bool ok = chi <= 1e-12 && ahat <= 1e-12 && p.theta.norm() <= 1e-12 && w <= 1e-12 && phi <= 1e-12 && err <= 1e-6;
    return {ok, f("max|chi| %.1e, |Ahat-A| %.1e, |theta| %.1e, max|w| %.1e, max|phi| %.1e, max L4 error %.1e over %zu eps",
                  chi, ahat, p.theta.norm(), w, phi, err, cfg.eps.size())};
}

Outcome laminate_oracle() {
    const PeriodicCoefficientField A = laminate(1, 2.0, 1.0);
    const CellSolution cell = solve_cells(A, 128, 4, 1e-12);
    // trapezoid rule on a periodic analytic integrand converges geometrically
    long double inv = 0.0L, mean = 0.0L;
    const int q = 1 << 14;
    for (int i = 0; i < q; ++i) {
        const long double a = 2.0L + std::sin(2.0L * std::numbers::pi_v<long double> * i / q);
        inv += 1.0L / a;
        mean += a;
    }
    const double harmonic = double(q / inv), arithmetic = double(mean / q);
    const double e1 = std::abs(cell.Ahat(0, 0) / harmonic - 1.0), e2 = std::abs(cell.Ahat(1, 1) / arithmetic - 1.0);
    const double off = std::max(std::abs(cell.Ahat(0, 1)), std::abs(cell.Ahat(1, 0)));
    return {e1 <= 1e-3 && e2 <= 1e-3 && off <= 1e-3 * arithmetic,
            f("Ahat = [%.6f %.1e; %.1e %.6f], quadrature (%.6f, %.6f), relative errors %.1e %.1e", cell.Ahat(0, 0),
              cell.Ahat(0, 1), cell.Ahat(1, 0), cell.Ahat(1, 1), harmonic, arithmetic, e1, e2)};
}

Outcome transmission() {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto tensor = [&] {
        const double a = 0.3 + 3.7 * U(rng), b = 0.3 + 3.7 * U(rng), th = 2 * std::numbers::pi * U(rng);
        Mat2 R;
        R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        Mat2 S = R * Vec2(a, b).asDiagonal() * R.transpose();
        const double k = (U(rng) - 0.5) * std::min(a, b);  // skew part keeps the tensor elliptic
        S(0, 1) += k;
        S(1, 0) -= k;
        return S;
    };
    double worst = 0.0;
    for (int r = 0; r < 20; ++r) {
        const InterfaceProfile p = build_profile(tensor(), tensor());
        const TransmissionJumps j = check_transmission(p);
        worst = std::max({worst, j.normal_flux[0], j.normal_flux[1]});
    }
    return {worst <= 1e-12, f("max normal-flux jump over 20 random pairs %.1e", worst)};
}

Outcome dual_identities() {
    CoeffSpec trig;
    trig.kind = "separable_trig";
    trig.base = 2.0;
    trig.amp = 0.8;
    const PeriodicCoefficientField P = coefficient(trig);
    std::vector<double> per, band, full;
    double anti = 0.0;
    for (int ny : {16, 32, 64}) {
        const CellSolution cell = solve_cells(P, ny, 4, 1e-13);
        const DualCorrectorSet d = periodic_dual(P, cell);
        anti = std::max(anti, antisymmetry(d));
        per.push_back(max_entry(divergence_mismatch(d, -1.0)));
    }
    const TwoSided A = contrasting();
    for (int ny : {8, 16, 32, 64}) {
        const Medium mp = build_medium(A.plus, ny, 4, 1e-12), mm = build_medium(A.minus, ny, 4, 1e-12);
        const InterfaceProfile p = build_profile(mp.cell.Ahat, mm.cell.Ahat);
        const CutoffPair cut = make_cutoffs();
        const InterfaceCorrector c = solve_interface_corrector(A, p, cut, mp, mm, 4.0, 1e-12);
        const DualCorrectorSet d = interface_dual(A, p, cut, c, mp, mm);
        anti = std::max(anti, antisymmetry(d));
        band.push_back(max_entry(divergence_mismatch(d, 2.0, 0.25)));
        full.push_back(max_entry(divergence_mismatch(d, 2.0, 0.0)));
    }
    auto orders = [](const std::vector<double>& e) {
        std::vector<double> o;
        for (size_t i = 0; i + 1 < e.size(); ++i) o.push_back(std::log2(e[i] / e[i + 1]));
        return o;
    };
    const auto op = orders(per), ob = orders(band), of = orders(full);
    bool ok = anti == 0.0;
    for (double o : op) ok = ok && o >= 0.9;
    for (double o : ob) ok = ok && o >= 0.9;
    return {ok, f("antisymmetry defect %.1e; periodic orders %.2f %.2f (ny 16-64); interface orders on "
                  "1/4<=|y1|<=R-2 %.2f %.2f %.2f (ny 8-64); with the interface row %.2f %.2f %.2f",
                  anti, op[0], op[1], ob[0], ob[1], ob[2], of[0], of[1], of[2])};
}

struct CorrectorPair {
    Medium plus, minus;
    InterfaceProfile profile;
    TwoSided A;
};

CorrectorPair corrector_media() {
    CorrectorPair c{{}, {}, {}, contrasting()};
    c.plus = build_medium(c.A.plus, 8, 8, 1e-12);
    c.minus = build_medium(c.A.minus, 8, 8, 1e-12);
    c.profile = build_profile(c.plus.cell.Ahat, c.minus.cell.Ahat);
    return c;
}

Outcome corrector_decay() {
    const CorrectorPair m = corrector_media();
    const InterfaceCorrector c = solve_interface_corrector(m.A, m.profile, make_cutoffs(), m.plus, m.minus, 8.0, 1e-12);
    double lam = 1e300, r2 = 1.0, flux = 0.0;
    for (int j = 0; j < 2; ++j) {
        const DecayReport r = fit_decay(c.grid, c.w[j]);
        for (const auto& s : r.side) {
            lam = std::min(lam, s.lambda);
            r2 = std::min(r2, s.r2);
        }
        flux = std::max(flux, flux_constancy_check(c.grid, m.A, c.w[j]).max_abs());
    }
    return {lam > 0.0 && r2 >= 0.9 && flux <= 1e-8,
            f("min fitted rate %.3f, min R^2 %.6f, max slice flux %.1e (R = 8)", lam, r2, flux)};
}

Outcome truncation() {
    const CorrectorPair m = corrector_media();
    const InterfaceCorrector a = solve_interface_corrector(m.A, m.profile, make_cutoffs(), m.plus, m.minus, 8.0, 1e-12);
    const InterfaceCorrector b = solve_interface_corrector(m.A, m.profile, make_cutoffs(), m.plus, m.minus, 10.0, 1e-12);
    const Grid3 &ga = a.grid, &gb = b.grid;
    double diff = 0.0, size = 0.0;
    for (int j = 0; j < 2; ++j)
        for (int ax = 0; ax < 2; ++ax) {
            const Vec da = diff_forward(ga, a.chi[j], ax), db = diff_forward(gb, b.chi[j], ax) ;
            for (int i = 0; i + 1 < ga.ax[0].n; ++i) {
                if (std::abs(ga.ax[0].coord(i)) > 4.0) continue;  // interior: |y1| <= R_small / 2
                const int ib = i - ga.ax[0].zero + gb.ax[0].zero;
                for (int k = 0; k < ga.ax[1].n; ++k)
                    for (int s = 0; s < ga.ax[2].n; ++s) {
                        diff = std::max(diff, std::abs(da(ga.idx(i, k, s)) - db(gb.idx(ib, k, s))));
                        size = std::max(size, std::abs(db(gb.idx(ib, k, s))));
                    }
            }
        }
    return {diff <= 1e-3 * size, f("max |grad chi(R=8) - grad chi(R=10)| on |y1| <= 4 is %.1e, relative %.1e", diff, diff / size)};
}

struct SweepResult {
    std::vector<ExpansionRecord> records;
    Json slopes, lipschitz;
};

SweepResult& default_sweep() {
    static SweepResult s = [] {
        const ExperimentConfig cfg = load_config(kConfigs + "default.toml");
        Pipeline p(cfg, {fresh("default").string(), true, &std::cerr});
        SweepResult r;
        r.slopes = p.sweep()["slopes"];
        r.lipschitz = p.lipschitz_probe()["trend"];
        r.records = p.records();
        p.report();
        return r;
    }();
    return s;
}

Outcome convergence() {
    const SweepResult& s = default_sweep();
    std::string eps;
    for (const auto& r : s.records) eps += (eps.empty() ? "" : ",") + f("1/%d", int(std::lround(1 / r.eps)));
    bool ok = true;
    std::string d = "eps {" + eps + "}:";
    for (const char* k : {"err_L4", "w_LinfL2", "w_gradL2"}) {
        const Json& j = s.slopes[k];
        const bool def = j["defined"].get<bool>();
        const double slope = def ? j["slope"].get<double>() : 0.0;
        ok = ok && def && slope >= 0.9;
        d += def ? f(" %s slope %.3f", k, slope) : f(" %s slope undefined", k);
    }
    return {ok, d + "; output in acceptance_out/default"};
}

Outcome smoothing_suite() {
    const double eps = 0.25, h = eps / 8, tau = eps * eps / 8;
    const Mollifier m = make_mollifier(eps, h, tau);
    BoxGrid g = centred_box(0.5, h, 24 * tau, tau);
    // mass: S(1) = 1 at every node whose kernel stays inside the box
    SpaceTimeField one(g.nt + 1, Vec::Ones(g.size()));
    const SpaceTimeField S1 = smooth(g, m, one);
    const int pad = int(std::ceil(0.5 * eps / h));
    double mass = 0.0;
    for (int n = 0; n <= g.nt; ++n)
        for (int i = pad; i < g.n - pad; ++i)
            for (int k = pad; k < g.n - pad; ++k) mass = std::max(mass, std::abs(S1[n](g.idx(i, k)) - 1.0));
    std::mt19937 rng(2024);
    std::normal_distribution<double> N(0.0, 1.0);
    double worst = 0.0, comm = 0.0;
    for (int r = 0; r < 50; ++r) {
        SpaceTimeField u(g.nt + 1, Vec::Zero(g.size()));
        for (auto& level : u)
            for (int i = 1; i + 1 < g.n; ++i)
                for (int k = 1; k + 1 < g.n; ++k) level(g.idx(i, k)) = N(rng);
        const SpaceTimeField xt = smooth_t(g, m, smooth_x(g, m, u)), tx = smooth_x(g, m, smooth_t(g, m, u));
        worst = std::max(worst, space_time_norm(xt, g, 2.0) / space_time_norm(u, g, 2.0));
        for (int n = 0; n <= g.nt; ++n) comm = std::max(comm, (xt[n] - tx[n]).cwiseAbs().maxCoeff());
    }
    const ManufacturedField F = gaussian_field(0.3);
    std::vector<double> err;
    for (double e : {0.125, 0.0625, 0.03125, 0.015625}) err.push_back(smoothing_error(F, e, 0.25, 0.1, 1.0 / 64).error);
    double order = 1e300;
    for (size_t i = 0; i + 1 < err.size(); ++i) order = std::min(order, std::log2(err[i] / err[i + 1]));
    return {mass <= 1e-14 && worst <= 1.0 && comm <= 1e-13 && order >= 0.9,
            f("mass defect %.1e, worst L2 ratio %.4f over 50 fields, commutator %.1e, min smoothing-error order %.3f", mass,
              worst, comm, order)};
}

Outcome lipschitz() {
    const SweepResult& s = default_sweep();
    std::string ratios;
    for (const auto& r : s.records) ratios += f(" %.4f", r.lip_ratio);
    const bool def = s.lipschitz["defined"].get<bool>();
    const double slope = def ? s.lipschitz["slope"].get<double>() : 0.0;
    return {def && std::abs(slope) <= 0.15, "ratios" + ratios + (def ? f(", trend slope %.4f", slope) : ", trend undefined")};
}

Outcome determinism() {
    const ExperimentConfig cfg = load_config(kConfigs + "small.toml");
    std::array<fs::path, 2> dirs{fresh("rerun_a"), fresh("rerun_b")};
    for (const auto& d : dirs) {
        Pipeline p(cfg, {d.string()});
        for (const auto& s : stage_names()) p.run(s);
    }
    int files = 0, same = 0;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
        if (e.path().extension() != ".csv") continue;
        ++files;
        const fs::path other = dirs[1] / e.path().filename();
        if (fs::exists(other) && read_text(e.path().string()) == read_text(other.string())) ++same;
    }
    // a third run served from the cache must agree as well
    Pipeline p(cfg, {dirs[0].string()});
    const std::string before = read_text((dirs[0] / "sweep.csv").string());
    p.sweep();
    const bool cached = read_text((dirs[0] / "sweep.csv").string()) == before && !p.cache_hits().empty();
    return {files > 0 && same == files && cached,
            f("%d of %d CSV files byte-identical across two fresh runs; cached rerun identical: %s", same, files,
              cached ? "yes" : "no")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "constant-coefficient closure", constant_closure},
        {2, "laminate oracle", laminate_oracle},
        {3, "transmission identity", transmission},
        {4, "dual-corrector identities", dual_identities},
        {5, "interface-corrector decay", corrector_decay},
        {6, "truncation stability", truncation},
        {7, "convergence rate", convergence},
        {8, "smoothing-operator suite", smoothing_suite},
        {9, "Lipschitz uniformity probe", lipschitz},
        {10, "determinism", determinism},
    };
    int failed = 0;
    std::ostringstream summary;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const std::string line = f("%s  [%2d] %s: ", o.pass ? "PASS" : "FAIL", c.id, c.name) + o.detail + f(" (%.1f s)", sec);
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        summary << line << "\n";
        failed += !o.pass;
    }
    write_text((fs::current_path() / "acceptance_out" / "acceptance.txt").string(), summary.str());
    std::printf("%d of %zu criteria passed\n", int(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
