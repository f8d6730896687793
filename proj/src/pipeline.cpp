#include "homog/pipeline.hpp"

#include "homog/fields.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace homog {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- archive

void Archive::put(const std::string& key, const Vec& v) { items_[key].assign(v.data(), v.data() + v.size()); }

void Archive::put(const std::string& key, const Grid3& g) {
    auto& d = items_[key];
    d.clear();
    for (const Axis& a : g.ax) d.insert(d.end(), {double(a.n), a.h, double(a.zero), a.periodic ? 1.0 : 0.0});
}

const std::vector<double>& Archive::at(const std::string& key) const {
    auto it = items_.find(key);
    if (it == items_.end()) throw std::runtime_error("cache entry '" + key + "' is missing");
    return it->second;
}

Vec Archive::vec(const std::string& key) const {
    const auto& d = at(key);
    return Eigen::Map<const Vec>(d.data(), Index(d.size()));
}

Mat2 Archive::mat(const std::string& key) const {
    const auto& d = at(key);
    Mat2 m;
    m << d.at(0), d.at(2), d.at(1), d.at(3);
    return m;
}

Grid3 Archive::grid(const std::string& key) const {
    const auto& d = at(key);
    if (d.size() != 12) throw std::runtime_error("cache entry '" + key + "' is not a grid");
    Grid3 g;
    for (int a = 0; a < 3; ++a) g.ax[a] = {int(d[4 * a]), d[4 * a + 1], int(d[4 * a + 2]), d[4 * a + 3] != 0.0};
    return g;
}

namespace {
constexpr char kMagic[8] = {'H', 'O', 'M', 'G', 'C', 'A', 'C', '1'};
}

void Archive::save(const std::string& path) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write cache '" + path + "'");
        out.write(kMagic, 8);
        const std::uint64_t n = items_.size();
        out.write(reinterpret_cast<const char*>(&n), 8);
        for (const auto& [k, v] : items_) {
            const std::uint64_t kl = k.size(), vl = v.size();
            out.write(reinterpret_cast<const char*>(&kl), 8);
            out.write(k.data(), std::streamsize(kl));
            out.write(reinterpret_cast<const char*>(&vl), 8);
            out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(vl * sizeof(double)));
        }
        if (!out) throw std::runtime_error("cannot write cache '" + path + "'");
    }
    fs::rename(tmp, path);
}

std::optional<Archive> Archive::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 8);
    Archive a;
    for (std::uint64_t i = 0; i < n && in; ++i) {
        std::uint64_t kl = 0, vl = 0;
        in.read(reinterpret_cast<char*>(&kl), 8);
        if (!in || kl > 4096) return std::nullopt;
        std::string k(kl, '\0');
        in.read(k.data(), std::streamsize(kl));
        in.read(reinterpret_cast<char*>(&vl), 8);
        if (!in || vl > (std::uint64_t(1) << 32)) return std::nullopt;
        std::vector<double> v(vl);
        in.read(reinterpret_cast<char*>(v.data()), std::streamsize(vl * sizeof(double)));
        a.items_[k] = std::move(v);
    }
    if (!in) return std::nullopt;
    return a;
}

// ---------------------------------------------------------------- (de)serialisation of stage outputs

namespace {

std::string ij(const char* p, int I, int j) { return std::string(p) + std::to_string(I) + std::to_string(j); }

void put_dual(Archive& a, const std::string& p, const DualCorrectorSet& d) {
    a.put(p + "grid", d.grid);
    a.put(p + "flux.grid", d.flux.grid);
    a.put(p + "flux.convention", d.flux.convention == Convention::Periodic ? 0.0 : 1.0);
    for (int I = 0; I < 3; ++I)
        for (int j = 0; j < 2; ++j) {
            a.put(p + ij("B", I, j), d.flux.B[I][j]);
            a.put(p + ij("nodal", I, j), d.flux.nodal[I][j]);
            a.put(p + ij("f", I, j), d.f[I][j]);
            for (int K = 0; K < 3; ++K) a.put(p + "phi" + std::to_string(K) + ij("", I, j), d.phi[K][I][j]);
        }
}

DualCorrectorSet get_dual(const Archive& a, const std::string& p) {
    DualCorrectorSet d;
    d.grid = a.grid(p + "grid");
    d.flux.grid = a.grid(p + "flux.grid");
    d.flux.convention = a.scalar(p + "flux.convention") == 0.0 ? Convention::Periodic : Convention::Interface;
    for (int I = 0; I < 3; ++I)
        for (int j = 0; j < 2; ++j) {
            d.flux.B[I][j] = a.vec(p + ij("B", I, j));
            d.flux.nodal[I][j] = a.vec(p + ij("nodal", I, j));
            d.f[I][j] = a.vec(p + ij("f", I, j));
            for (int K = 0; K < 3; ++K) d.phi[K][I][j] = a.vec(p + "phi" + std::to_string(K) + ij("", I, j));
        }
    return d;
}

void put_medium(Archive& a, const std::string& p, const Medium& m) {
    a.put(p + "cell.grid", m.cell.grid);
    a.put(p + "cell.chi0", m.cell.chi[0]);
    a.put(p + "cell.chi1", m.cell.chi[1]);
    a.put(p + "cell.Ahat", m.cell.Ahat);
    a.put(p + "cell.residual", m.cell.residual);
    put_dual(a, p + "dual.", m.dual);
}

Medium get_medium(const Archive& a, const std::string& p, const PeriodicCoefficientField& A) {
    Medium m;
    m.A = A;
    m.cell.grid = a.grid(p + "cell.grid");
    m.cell.chi = {a.vec(p + "cell.chi0"), a.vec(p + "cell.chi1")};
    m.cell.Ahat = a.mat(p + "cell.Ahat");
    m.cell.residual = a.scalar(p + "cell.residual");
    m.dual = get_dual(a, p + "dual.");
    return m;
}

void put_corrector(Archive& a, const InterfaceCorrector& c) {
    a.put("grid", c.grid);
    for (int j = 0; j < 2; ++j) {
        const std::string s = std::to_string(j);
        a.put("V" + s, c.V[j]);
        a.put("w" + s, c.w[j]);
        a.put("chi" + s, c.chi[j]);
        a.put("source" + s, c.source[j]);
        a.put("leak" + s, c.leak[j]);
        a.put("end_value" + s, c.end_value[j]);
        a.put("residual" + s, c.residual[j]);
    }
}

InterfaceCorrector get_corrector(const Archive& a) {
    InterfaceCorrector c;
    c.grid = a.grid("grid");
    for (int j = 0; j < 2; ++j) {
        const std::string s = std::to_string(j);
        c.V[j] = a.vec("V" + s);
        c.w[j] = a.vec("w" + s);
        c.chi[j] = a.vec("chi" + s);
        c.source[j] = a.vec("source" + s);
        c.leak[j] = a.scalar("leak" + s);
        c.end_value[j] = a.scalar("end_value" + s);
        c.residual[j] = a.scalar("residual" + s);
    }
    return c;
}

struct RecordField {
    const char* name;
    double ExpansionRecord::*d = nullptr;
    int ExpansionRecord::*i = nullptr;
    long ExpansionRecord::*l = nullptr;
};

const std::vector<RecordField>& record_fields() {
    using R = ExpansionRecord;
    static const std::vector<RecordField> f{
        {"eps", &R::eps},
        {"h", &R::h},
        {"tau", &R::tau},
        {"n", nullptr, &R::n},
        {"nt", nullptr, &R::nt},
        {"err_L4", &R::err_L4},
        {"w_LinfL2", &R::w_LinfL2},
        {"w_gradL2", &R::w_gradL2},
        {"diff_LinfL2", &R::diff_LinfL2},
        {"diff_gradL2", &R::diff_gradL2},
        {"f_L2", &R::f_L2},
        {"ft_L2", &R::ft_L2},
        {"energy_ratio", &R::energy_ratio},
        {"eta_tilde_ratio", &R::eta_tilde_ratio},
        {"w21_ratio", &R::w21_ratio},
        {"tangential_jump", &R::tangential_jump},
        {"w_initial", &R::w_initial},
        {"lip_sup_grad", &R::lip_sup_grad},
        {"lip_u_avg", &R::lip_u_avg},
        {"lip_f_avg", &R::lip_f_avg},
        {"lip_ratio", &R::lip_ratio},
        {"iterations", nullptr, nullptr, &R::iterations},
    };
    return f;
}

std::string hex(std::uint64_t h) {
    char b[20];
    std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(h));
    return b;
}

PeriodicCoefficientField field_of(const CoeffSpec& s) {
    PeriodicCoefficientField f = make_coefficient(s);
    validate_coefficient(f);
    return f;
}

Json mat_json(const Mat2& m) { return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})}); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
auto guarded(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

}  // namespace

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> c = [] {
        std::vector<std::string> v;
        for (const auto& f : record_fields()) v.push_back(f.name);
        return v;
    }();
    return c;
}

std::vector<std::string> sweep_row(const ExpansionRecord& r) {
    std::vector<std::string> row;
    for (const auto& f : record_fields())
        row.push_back(f.d ? fmt(r.*(f.d)) : f.i ? fmt(r.*(f.i)) : fmt(r.*(f.l)));
    return row;
}

double sweep_radius(const ExperimentConfig& cfg) {
    double emin = 1e300;
    for (double e : cfg.eps) emin = std::min(emin, e);
    return std::max(cfg.R, std::ceil(cfg.L / emin) + 2.0);
}

// ---------------------------------------------------------------- pipeline state

struct Pipeline::State {
    std::optional<TwoSided> A;
    std::optional<std::array<Medium, 2>> media;  // plus, minus
    std::map<double, InterfaceCorrector> corr;
    std::map<double, DualCorrectorSet> dual;
    std::optional<std::vector<ExpansionRecord>> records;
    std::array<double, 3> floor{};
};

Pipeline::Pipeline(ExperimentConfig cfg, PipelineOptions opt)
    : cfg_(std::move(cfg)), opt_(std::move(opt)), st_(std::make_unique<State>()) {
    validate_config(cfg_);
    std::error_code ec;
    fs::create_directories(fs::path(opt_.out_dir) / "cache", ec);
    const fs::path probe = fs::path(opt_.out_dir) / ".write-probe";
    std::ofstream t(probe);
    if (ec || !t) throw ConfigError({"output directory '" + opt_.out_dir + "' is not writable"});
    t.close();
    fs::remove(probe, ec);
}

Pipeline::~Pipeline() = default;

std::string Pipeline::path(const std::string& name) const { return (fs::path(opt_.out_dir) / name).string(); }

void Pipeline::log(const std::string& msg) const {
    if (opt_.log) *opt_.log << "[homog] " << msg << std::endl;
}

Json Pipeline::finish(const std::string& stage, Json body, double seconds) {
    Json j;
    j["stage"] = stage;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = cfg_.seed;
    j["runtime_seconds"] = seconds;
    j["cache_hits"] = hits_;
    for (const auto& el : body.items()) j[el.key()] = el.value();
    write_text(path(stage + ".json"), j.dump(2) + "\n");
    return j;
}

// media, correctors and duals are shared by several stages; these helpers compute or load them
namespace detail {

const TwoSided& two_sided(Pipeline::State& s, const ExperimentConfig& c) {
    if (!s.A) s.A = TwoSided{field_of(c.plus), field_of(c.minus)};
    return *s.A;
}

}  // namespace detail

Json Pipeline::run(const std::string& stage) {
    if (stage == "cell") return cell();
    if (stage == "profile") return profile();
    if (stage == "corrector") return corrector();
    if (stage == "dual") return dual();
    if (stage == "sweep") return sweep();
    if (stage == "decay") return decay();
    if (stage == "lipschitz-probe") return lipschitz_probe();
    if (stage == "report") return report();
    throw std::invalid_argument("unknown stage '" + stage + "'");
}

namespace {

std::string cache_file(const std::string& out, const std::string& stage, const std::string& key) {
    return (fs::path(out) / "cache" / (stage + "-" + hex(fnv1a(key)) + ".bin")).string();
}

}  // namespace

// The heavy shared artefacts live behind these three accessors.
static const std::array<Medium, 2>& media_of(Pipeline::State& s, const ExperimentConfig& c, const PipelineOptions& o,
                                             std::vector<std::string>& hits) {
    if (s.media) return *s.media;
    const TwoSided& A = detail::two_sided(s, c);
    const std::string file = cache_file(o.out_dir, "cell", stage_key(c, "cell"));
    if (o.use_cache)
        if (auto a = Archive::load(file)) {
            s.media = std::array<Medium, 2>{get_medium(*a, "plus.", A.plus), get_medium(*a, "minus.", A.minus)};
            hits.push_back("cell");
            return *s.media;
        }
    s.media = guarded("cell", [&] {
        return std::array<Medium, 2>{build_medium(A.plus, c.ny, c.ns, c.cell_tol),
                                     build_medium(A.minus, c.ny, c.ns, c.cell_tol)};
    });
    Archive a;
    put_medium(a, "plus.", (*s.media)[0]);
    put_medium(a, "minus.", (*s.media)[1]);
    a.save(file);
    return *s.media;
}

static InterfaceProfile profile_of(Pipeline::State& s, const ExperimentConfig& c, const PipelineOptions& o,
                                   std::vector<std::string>& hits) {
    const auto& m = media_of(s, c, o, hits);
    return build_profile(m[0].cell.Ahat, m[1].cell.Ahat);
}

static const InterfaceCorrector& corrector_of(Pipeline::State& s, const ExperimentConfig& c, const PipelineOptions& o,
                                              std::vector<std::string>& hits, double R) {
    if (auto it = s.corr.find(R); it != s.corr.end()) return it->second;
    const auto& m = media_of(s, c, o, hits);
    const std::string file = cache_file(o.out_dir, "corrector", stage_key(c, "corrector") + "R=" + fmt(R));
    if (o.use_cache)
        if (auto a = Archive::load(file)) {
            hits.push_back("corrector");
            return s.corr[R] = get_corrector(*a);
        }
    const InterfaceProfile p = build_profile(m[0].cell.Ahat, m[1].cell.Ahat);
    InterfaceCorrector corr = guarded("corrector", [&] {
        return solve_interface_corrector(*s.A, p, make_cutoffs(), m[0], m[1], R, c.corrector_tol);
    });
    Archive a;
    put_corrector(a, corr);
    a.save(file);
    return s.corr[R] = std::move(corr);
}

static const DualCorrectorSet& dual_of(Pipeline::State& s, const ExperimentConfig& c, const PipelineOptions& o,
                                       std::vector<std::string>& hits, double R) {
    if (auto it = s.dual.find(R); it != s.dual.end()) return it->second;
    const InterfaceCorrector& corr = corrector_of(s, c, o, hits, R);
    const auto& m = media_of(s, c, o, hits);
    const std::string file = cache_file(o.out_dir, "dual", stage_key(c, "dual") + "R=" + fmt(R));
    if (o.use_cache)
        if (auto a = Archive::load(file)) {
            hits.push_back("dual");
            return s.dual[R] = get_dual(*a, "");
        }
    const InterfaceProfile p = build_profile(m[0].cell.Ahat, m[1].cell.Ahat);
    DualCorrectorSet d = guarded("dual", [&] { return interface_dual(*s.A, p, make_cutoffs(), corr, m[0], m[1]); });
    Archive a;
    put_dual(a, "", d);
    a.save(file);
    return s.dual[R] = std::move(d);
}

// ---------------------------------------------------------------- stages

Json Pipeline::cell() {
    const auto t0 = std::chrono::steady_clock::now();
    log("cell: solving the periodic cell problems");
    const auto& m = media_of(*st_, cfg_, opt_, hits_);
    CsvTable t{{"side", "kind", "ny", "ns", "Ahat11", "Ahat12", "Ahat21", "Ahat22", "residual", "kappa", "M"}, {}};
    Json body;
    const char* names[] = {"plus", "minus"};
    for (int s = 0; s < 2; ++s) {
        const Medium& md = m[s];
        const Mat2& A = md.cell.Ahat;
        t.add({names[s], md.A.name, fmt(cfg_.ny), fmt(cfg_.ns), fmt(A(0, 0)), fmt(A(0, 1)), fmt(A(1, 0)), fmt(A(1, 1)),
               fmt(md.cell.residual), fmt(md.A.kappa), fmt(md.A.M)});
        body[names[s]] = {{"kind", md.A.name},
                          {"Ahat", mat_json(A)},
                          {"residual", md.cell.residual},
                          {"kappa", md.A.kappa},
                          {"time_lipschitz", md.A.M},
                          {"dual_identity_residual", max_entry(identity_residual(md.dual, -1.0))}};
    }
    write_text(path("cell.csv"), t.str());
    return finish("cell", body, seconds_since(t0));
}

Json Pipeline::profile() {
    const auto t0 = std::chrono::steady_clock::now();
    log("profile: interface slopes and transmission checks");
    const InterfaceProfile p = profile_of(*st_, cfg_, opt_, hits_);
    const TransmissionJumps tj = check_transmission(p);
    Json body;
    body["theta"] = {p.theta(0), p.theta(1)};
    body["Ahat_plus"] = mat_json(p.Ahat_plus);
    body["Ahat_minus"] = mat_json(p.Ahat_minus);
    body["normal_flux_jump"] = {tj.normal_flux[0], tj.normal_flux[1]};
    body["tangential_jump"] = {tj.tangential[0], tj.tangential[1]};
    body["divergence_free_check"] = divergence_free_check(p);

    // random valid pairs drawn from the seed
    std::mt19937_64 rng(cfg_.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto random_tensor = [&] {
        const double a = 0.5 + 3.5 * U(rng), b = 0.5 + 3.5 * U(rng), th = 6.283185307179586 * U(rng);
        Mat2 R;
        R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        Mat2 S = R * Eigen::Vector2d(a, b).asDiagonal() * R.transpose();
        const double k = (U(rng) - 0.5) * std::min(a, b);
        S(0, 1) += k;
        S(1, 0) -= k;
        return S;
    };
    CsvTable t{{"pair", "theta1", "theta2", "normal_flux_jump", "tangential_jump"}, {}};
    t.add({"config", fmt(p.theta(0)), fmt(p.theta(1)), fmt(std::max(tj.normal_flux[0], tj.normal_flux[1])),
           fmt(std::max(tj.tangential[0], tj.tangential[1]))});
    double worst = 0.0;
    for (int r = 0; r < 20; ++r) {
        const Mat2 Ap = random_tensor(), Am = random_tensor();
        const InterfaceProfile q = build_profile(Ap, Am);
        const TransmissionJumps j = check_transmission(q);
        worst = std::max(worst, j.max());
        t.add({fmt(r), fmt(q.theta(0)), fmt(q.theta(1)), fmt(std::max(j.normal_flux[0], j.normal_flux[1])),
               fmt(std::max(j.tangential[0], j.tangential[1]))});
    }
    body["random_pairs"] = 20;
    body["random_pairs_max_jump"] = worst;
    write_text(path("profile.csv"), t.str());
    return finish("profile", body, seconds_since(t0));
}

Json Pipeline::corrector() {
    const auto t0 = std::chrono::steady_clock::now();
    log("corrector: interface correctors on the truncated cylinder, R = " + fmt(cfg_.R));
    const InterfaceCorrector& c = corrector_of(*st_, cfg_, opt_, hits_, cfg_.R);
    CsvTable t{{"j", "R", "residual", "leak", "end_value", "max_slice_flux", "grad_norm", "time_derivative_energy"}, {}};
    Json rows = Json::array();
    for (int j = 0; j < 2; ++j) {
        const double flux = flux_constancy_check(c.grid, *st_->A, c.w[j]).max_abs();
        const double gn = gradient_norm(c.grid, c.w[j]), te = time_derivative_energy(c.grid, c.w[j]);
        t.add({fmt(j + 1), fmt(cfg_.R), fmt(c.residual[j]), fmt(c.leak[j]), fmt(c.end_value[j]), fmt(flux), fmt(gn), fmt(te)});
        rows.push_back({{"j", j + 1},
                        {"residual", c.residual[j]},
                        {"leak", c.leak[j]},
                        {"end_value", c.end_value[j]},
                        {"max_slice_flux", flux},
                        {"grad_norm", gn},
                        {"time_derivative_energy", te}});
        write_field_binary(path("chi" + std::to_string(j + 1) + ".bin"), c.grid, c.chi[j]);
    }
    write_text(path("corrector.csv"), t.str());
    return finish("corrector", {{"R", cfg_.R}, {"components", rows}}, seconds_since(t0));
}

Json Pipeline::dual() {
    const auto t0 = std::chrono::steady_clock::now();
    log("dual: periodic and interface dual correctors");
    const auto& m = media_of(*st_, cfg_, opt_, hits_);
    const DualCorrectorSet& d = dual_of(*st_, cfg_, opt_, hits_, cfg_.R);
    auto antisym = [](const DualCorrectorSet& s) {
        double a = 0.0;
        for (int K = 0; K < 3; ++K)
            for (int I = 0; I < 3; ++I)
                for (int j = 0; j < 2; ++j) a = std::max(a, (s.phi[K][I][j] + s.phi[I][K][j]).cwiseAbs().maxCoeff());
        return a;
    };
    CsvTable t{{"set", "identity_residual", "nodal_mismatch", "antisymmetry"}, {}};
    Json body;
    const double inner = cfg_.R - 2.0;
    const char* names[] = {"periodic_plus", "periodic_minus"};
    for (int s = 0; s < 2; ++s) {
        const double id = max_entry(identity_residual(m[s].dual, -1.0)), mm = max_entry(divergence_mismatch(m[s].dual, -1.0));
        const double as = antisym(m[s].dual);
        t.add({names[s], fmt(id), fmt(mm), fmt(as)});
        body[names[s]] = {{"identity_residual", id}, {"nodal_mismatch", mm}, {"antisymmetry", as}};
    }
    const double id = max_entry(identity_residual(d, inner)), mm = max_entry(divergence_mismatch(d, inner, 0.25));
    const double as = antisym(d);
    t.add({"interface", fmt(id), fmt(mm), fmt(as)});
    body["interface"] = {{"R", cfg_.R}, {"inner", inner}, {"identity_residual", id}, {"nodal_mismatch", mm}, {"antisymmetry", as}};
    write_text(path("dual.csv"), t.str());
    return finish("dual", body, seconds_since(t0));
}

Json Pipeline::decay() {
    const auto t0 = std::chrono::steady_clock::now();
    log("decay: slab energies of the decaying corrector part");
    const InterfaceCorrector& c = corrector_of(*st_, cfg_, opt_, hits_, cfg_.R);
    CsvTable t{{"j", "side", "slab", "energy", "used"}, {}};
    Json fits = Json::array();
    const char* sides[] = {"minus", "plus"};
    for (int j = 0; j < 2; ++j) {
        const DecayReport r = fit_decay(c.grid, c.w[j], cfg_.decay_floor);
        for (int s = 0; s < 2; ++s) {
            const DecayFit& f = r.side[s];
            for (size_t q = 0; q < f.slab.size(); ++q)
                t.add({fmt(j + 1), sides[s], fmt(f.slab[q]), fmt(f.energy[q]), fmt(int(f.used[q]))});
            fits.push_back({{"j", j + 1},
                            {"side", sides[s]},
                            {"lambda", f.lambda},
                            {"r2", f.r2},
                            {"below_floor", f.below_floor},
                            {"monotone", f.monotone}});
        }
    }
    write_text(path("decay.csv"), t.str());
    return finish("decay", {{"R", cfg_.R}, {"floor", cfg_.decay_floor}, {"fits", fits}}, seconds_since(t0));
}

const std::vector<ExpansionRecord>& Pipeline::records() {
    if (st_->records) return *st_->records;
    const std::string file = cache_file(opt_.out_dir, "sweep", stage_key(cfg_, "sweep"));
    const auto& fields = record_fields();
    if (opt_.use_cache)
        if (auto a = Archive::load(file)) {
            std::vector<ExpansionRecord> recs(size_t(a->scalar("count")));
            for (size_t r = 0; r < recs.size(); ++r)
                for (const auto& f : fields) {
                    const double v = a->scalar(std::to_string(r) + "." + f.name);
                    if (f.d) recs[r].*(f.d) = v;
                    else if (f.i) recs[r].*(f.i) = int(v);
                    else recs[r].*(f.l) = long(v);
                }
            for (int q = 0; q < 3; ++q) st_->floor[q] = a->scalar("floor" + std::to_string(q));
            hits_.push_back("sweep");
            return *(st_->records = std::move(recs));
        }

    const double R = sweep_radius(cfg_);
    ProblemSpec spec;
    spec.L = cfg_.L;
    spec.T = cfg_.T;
    spec.points_per_eps = cfg_.points_per_eps;
    spec.interior = cfg_.interior;
    spec.tol = cfg_.step_tol;
    spec.lipschitz_radius = cfg_.lipschitz_radius;
    spec.lipschitz_p = cfg_.lipschitz_p;
    const Source src = cfg_.source == "zero" ? zero_source() : bump_source(cfg_.source_radius, cfg_.T);

    const auto& m = media_of(*st_, cfg_, opt_, hits_);
    const InterfaceCorrector& corr = corrector_of(*st_, cfg_, opt_, hits_, R);
    const DualCorrectorSet& dual = dual_of(*st_, cfg_, opt_, hits_, R);
    ExpansionSetup setup{spec, src, *st_->A, build_profile(m[0].cell.Ahat, m[1].cell.Ahat), &corr, &dual};

    // discretisation floor from a constant-coefficient control at the coarsest eps
    double emax = 0.0;
    for (double e : cfg_.eps) emax = std::max(emax, e);
    ExpansionRecord control = guarded("sweep", [&] {
        CoeffSpec id;
        const PeriodicCoefficientField I = field_of(id);
        const Medium mi = build_medium(I, cfg_.ny, cfg_.ns, cfg_.cell_tol);
        const TwoSided AI{I, I};
        const InterfaceProfile pi = build_profile(mi.cell.Ahat, mi.cell.Ahat);
        const InterfaceCorrector ci = solve_interface_corrector(AI, pi, make_cutoffs(), mi, mi,
                                                                std::max(4.0, std::ceil(cfg_.L / emax) + 2.0),
                                                                cfg_.corrector_tol);
        const DualCorrectorSet di = interface_dual(AI, pi, make_cutoffs(), ci, mi, mi);
        return run_expansion({spec, src, AI, pi, &ci, &di}, emax);
    });
    const double round = 1e-13 * control.f_L2;
    st_->floor = {std::max(control.err_L4, round), std::max(control.w_LinfL2, round), std::max(control.w_gradL2, round)};

    std::vector<ExpansionRecord> recs;
    CsvTable t{sweep_columns(), {}};
    for (double e : cfg_.eps) {
        const auto t1 = std::chrono::steady_clock::now();
        log("sweep: eps = " + fmt(e) + ", n = " + fmt(problem_grid(spec, e).n));
        ExpansionRecord r = guarded("sweep", [&] { return run_expansion(setup, e); });
        char msg[128];
        std::snprintf(msg, sizeof msg, "sweep: eps = %g done in %.1f s, L4 error %.3e", e, seconds_since(t1), r.err_L4);
        log(msg);
        recs.push_back(r);
        t.add(sweep_row(r));
        write_text(path("sweep.csv"), t.str());  // partial results survive a later failure
    }
    Archive a;
    a.put("count", double(recs.size()));
    for (size_t r = 0; r < recs.size(); ++r)
        for (const auto& f : fields)
            a.put(std::to_string(r) + "." + f.name,
                  f.d ? recs[r].*(f.d) : f.i ? double(recs[r].*(f.i)) : double(recs[r].*(f.l)));
    for (int q = 0; q < 3; ++q) a.put("floor" + std::to_string(q), st_->floor[q]);
    a.save(file);
    return *(st_->records = std::move(recs));
}

Json Pipeline::sweep() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& recs = records();
    CsvTable t{sweep_columns(), {}};
    std::vector<double> x, err, wl, wg;
    Json rows = Json::array();
    for (const auto& r : recs) {
        t.add(sweep_row(r));
        x.push_back(r.eps);
        err.push_back(r.err_L4);
        wl.push_back(r.w_LinfL2);
        wg.push_back(r.w_gradL2);
        Json row;
        for (const auto& f : record_fields())
            row[f.name] = f.d ? Json(r.*(f.d)) : f.i ? Json(r.*(f.i)) : Json(r.*(f.l));
        rows.push_back(row);
    }
    write_text(path("sweep.csv"), t.str());
    const double k = cfg_.floor_factor;
    std::vector<PlotSeries> plot{{"|u_eps - u0| L4", x, err, fit_log_slope(x, err, st_->floor[0], k)},
                                 {"|w_eps| LinfL2", x, wl, fit_log_slope(x, wl, st_->floor[1], k)},
                                 {"|grad w_eps| L2", x, wg, fit_log_slope(x, wg, st_->floor[2], k)}};
    CsvTable s{{"norm", "defined", "slope", "ci_low", "ci_high", "points_used", "floor"}, {}};
    const char* keys[] = {"err_L4", "w_LinfL2", "w_gradL2"};
    Json slopes;
    for (int q = 0; q < 3; ++q) {
        const SlopeFit& f = plot[q].fit;
        int used = 0;
        for (char u : f.used) used += u;
        s.add({keys[q], f.defined ? "1" : "0", f.defined ? fmt(f.slope) : f.reason, fmt(f.slope - f.half_width),
               fmt(f.slope + f.half_width), fmt(used), fmt(st_->floor[q])});
        slopes[keys[q]] = to_json(f);
        slopes[keys[q]]["floor"] = st_->floor[q];
    }
    write_text(path("rates.csv"), s.str());
    write_text(path("sweep.svg"), loglog_svg("convergence in eps", plot));
    Json body;
    body["corrector_R"] = sweep_radius(cfg_);
    body["records"] = rows;
    body["slopes"] = slopes;
    return finish("sweep", body, seconds_since(t0));
}

Json Pipeline::lipschitz_probe() {
    const auto t0 = std::chrono::steady_clock::now();
    log("lipschitz-probe: interior gradient bound across eps");
    const auto& recs = records();
    CsvTable t{{"eps", "r", "p", "sup_grad", "u_avg", "f_avg", "ratio"}, {}};
    std::vector<double> x, y;
    Json rows = Json::array();
    for (const auto& r : recs) {
        t.add({fmt(r.eps), fmt(cfg_.lipschitz_radius), fmt(cfg_.lipschitz_p), fmt(r.lip_sup_grad), fmt(r.lip_u_avg),
               fmt(r.lip_f_avg), fmt(r.lip_ratio)});
        x.push_back(r.eps);
        y.push_back(r.lip_ratio);
        rows.push_back({{"eps", r.eps}, {"sup_grad", r.lip_sup_grad}, {"ratio", r.lip_ratio}});
    }
    write_text(path("lipschitz.csv"), t.str());
    const SlopeFit f = fit_log_slope(x, y, 0.0, 1.0);
    return finish("lipschitz-probe",
                  {{"radius", cfg_.lipschitz_radius}, {"p", cfg_.lipschitz_p}, {"rows", rows}, {"trend", to_json(f)}},
                  seconds_since(t0));
}

Json Pipeline::report() {
    const auto t0 = std::chrono::steady_clock::now();
    Json r = empty_report();
    r["config"] = to_toml(cfg_);
    for (const auto& s : stage_names()) {
        if (s == "report") continue;
        const fs::path p = path(s + ".json");
        if (!fs::exists(p)) continue;
        r["stages"][s] = Json::parse(read_text(p.string()));
    }
    const std::vector<std::string> bad = validate_schema(r, report_schema());
    if (!bad.empty()) {
        std::string m = "report does not match its schema:";
        for (const auto& b : bad) m += " " + b + ";";
        throw StageError("report", m);
    }
    r["runtime_seconds"] = seconds_since(t0);
    write_text(path("report.json"), r.dump(2) + "\n");
    return r;
}

const Json& report_schema() {
    static const Json s = Json::parse(R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "homog report",
  "type": "object",
  "required": ["schema_version", "stages"],
  "properties": {
    "schema_version": {"type": "integer", "enum": [1]},
    "config": {"type": "string"},
    "runtime_seconds": {"type": "number", "minimum": 0},
    "stages": {
      "type": "object",
      "properties": {
        "cell": {"type": "object", "required": ["stage", "plus", "minus"],
                 "properties": {"plus": {"type": "object", "required": ["Ahat", "residual"]},
                                "minus": {"type": "object", "required": ["Ahat", "residual"]}}},
        "profile": {"type": "object", "required": ["stage", "theta", "normal_flux_jump", "random_pairs_max_jump"]},
        "corrector": {"type": "object", "required": ["stage", "R", "components"],
                      "properties": {"components": {"type": "array",
                                                    "items": {"type": "object", "required": ["j", "residual", "max_slice_flux"]}}}},
        "dual": {"type": "object", "required": ["stage", "interface"]},
        "decay": {"type": "object", "required": ["stage", "fits"],
                  "properties": {"fits": {"type": "array",
                                          "items": {"type": "object", "required": ["j", "side", "lambda", "r2"]}}}},
        "sweep": {"type": "object", "required": ["stage", "records", "slopes"],
                  "properties": {"records": {"type": "array", "items": {"type": "object", "required": ["eps", "err_L4", "w_LinfL2", "w_gradL2"]}},
                                 "slopes": {"type": "object", "required": ["err_L4", "w_LinfL2", "w_gradL2"],
                                            "additionalProperties": {"type": "object", "required": ["defined", "slope", "points_used"]}}}},
        "lipschitz-probe": {"type": "object", "required": ["stage", "rows", "trend"]}
      },
      "additionalProperties": {"type": "object", "required": ["stage"]}
    }
  }
})");
    return s;
}

}  // namespace homog
