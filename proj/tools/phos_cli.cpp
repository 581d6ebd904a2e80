// phos: batch front-end for the interferometry toolkit.  Each subcommand
// writes plot-ready CSV/JSON artifacts plus a manifest into --out; with a
// fixed --seed the artifact bytes are identical across runs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phos/characterize.hpp"
#include "phos/fock.hpp"
#include "phos/io.hpp"
#include "phos/metrology.hpp"
#include "phos/spectral.hpp"
#include "phos/tomography.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phos;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = std::numbers::pi;

struct Context {
    fs::path out = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string convention = "jz";
    fs::path config_path;
    std::vector<fs::path> written;  // removed again if the scenario fails

    PhaseConvention conv() const {
        return convention == "single-arm" ? PhaseConvention::SingleArm
                                          : PhaseConvention::DifferentialJz;
    }

    fs::path artifact(const std::string& name) {
        fs::create_directories(out);
        fs::path p = out / name;
        written.push_back(p);
        return p;
    }

    void write_manifest(const std::string& scenario, const json& params) {
        json m;
        m["tool"] = "phos";
        m["version"] = kVersion;
        m["scenario"] = scenario;
        m["convention"] = convention;
        if (seed_given) m["seed"] = seed;
        m["parameters"] = params;
        json outputs = json::array();
        for (const auto& p : written) outputs.push_back(p.filename().string());
        m["outputs"] = outputs;
        std::ofstream f(artifact("manifest.json"), std::ios::binary);
        f << m.dump(2) << "\n";
    }
};

/// Applies --config FILE values to options of the active subcommand that
/// were not set on the command line.  Unknown fields are reported together.
void apply_config(CLI::App& sub, const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("--config", "cannot open " + path.string());
    json cfg;
    try {
        f >> cfg;
    } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", path.string() + ": " + e.what());
    }
    if (!cfg.is_object()) throw CLI::ValidationError("--config", "top level must be a JSON object");
    std::vector<std::string> unknown;
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (!opt) {
            unknown.push_back(key);
            continue;
        }
        if (opt->count() > 0) continue;  // explicit flags win
        opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
        opt->run_callback();
    }
    if (!unknown.empty()) {
        std::string msg = "unknown field(s):";
        for (const auto& u : unknown) msg += " '" + u + "'";
        throw CLI::ValidationError("--config", msg);
    }
}

std::string fmt(double x) { return io::format_double(x); }

json density_to_json(const DensityOperator& rho) {
    json j;
    j["n_modes"] = rho.basis->n_modes();
    j["max_total_photons"] = rho.basis->max_total_photons();
    json occ = json::array();
    for (Eigen::Index i = 0; i < rho.basis->size(); ++i) occ.push_back(rho.basis->occupation(i));
    j["occupations"] = occ;
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < rho.matrix.rows(); ++i) {
        json rrow = json::array(), irow = json::array();
        for (Eigen::Index k = 0; k < rho.matrix.cols(); ++k) {
            rrow.push_back(rho.matrix(i, k).real());
            irow.push_back(rho.matrix(i, k).imag());
        }
        re.push_back(rrow);
        im.push_back(irow);
    }
    j["real"] = re;
    j["imag"] = im;
    return j;
}

DensityOperator density_from_json(const json& j) {
    const int modes = j.at("n_modes").get<int>();
    const int cap = j.at("max_total_photons").get<int>();
    BasisPtr basis = FockBasis::enumerate(modes, cap);
    const auto& re = j.at("real");
    const auto& im = j.at("imag");
    if (static_cast<Eigen::Index>(re.size()) != basis->size())
        throw std::runtime_error("density matrix dimension does not match its declared basis");
    Eigen::MatrixXcd m(basis->size(), basis->size());
    for (Eigen::Index i = 0; i < basis->size(); ++i)
        for (Eigen::Index k = 0; k < basis->size(); ++k)
            m(i, k) = Complex(re.at(i).at(k).get<double>(), im.at(i).at(k).get<double>());
    return DensityOperator{basis, m};
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix - b.matrix);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// HB(1)-style probe: |1,1> through per-arm preparation loss eta_p and a
/// 50:50 splitter, on the two-mode conditioned basis.
DensityOperator hb1_probe(double eta_p, int cap) {
    BasisPtr basis = FockBasis::enumerate(2, cap);
    const int occ[] = {1, 1};
    PureState psi = PureState::fock(basis, occ);
    Circuit prep;
    prep.loss(0, eta_p).loss(1, eta_p).bs(0, 1, kPi / 4.0);
    return apply_circuit(psi, prep);
}

// --- scenarios --------------------------------------------------------------

void run_jsa_tradeoff(Context& ctx, const std::string& preset, double bw_min, double bw_max,
                      int points) {
    auto model = preset_by_name(preset);
    if (!model)
        throw CLI::ValidationError("--preset", "unknown preset '" + preset +
                                                   "'; valid: correlated, matched");
    const auto jsa = build_jsa(*model);
    const SourceFigures unfiltered = source_figures(jsa, {});
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(points, bw_min, bw_max);
    const auto curve = tradeoff_scan(jsa, grid);

    io::CsvWriter csv(ctx.artifact("tradeoff.csv"));
    csv.header({"bandwidth", "purity", "heralding_efficiency", "pass_probability"});
    for (const auto& p : curve)
        csv.row({fmt(p.bandwidth), fmt(p.purity), fmt(p.heralding_efficiency),
                 fmt(p.pass_probability)});
    csv.close();

    json params;
    params["preset"] = preset;
    params["bandwidth_min"] = bw_min;
    params["bandwidth_max"] = bw_max;
    params["points"] = points;
    params["unfiltered_purity"] = unfiltered.purity;
    params["phasematch_bandwidth"] = model->phasematch_bandwidth;
    ctx.write_manifest("jsa-tradeoff", params);
}

void run_fisher_surface(Context& ctx, int grid_points) {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(grid_points, 0.0, 1.0);
    const FisherSurface surface = fisher_surface(grid, grid, ctx.conv());

    io::CsvWriter csv(ctx.artifact("fisher_surface.csv"));
    csv.header({"v", "w", "max_fisher"});
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            csv.row({fmt(grid(i)), fmt(grid(j)), fmt(surface.values(i, j))});
    csv.close();

    json params;
    params["grid"] = grid_points;
    params["outcome"] = surface.outcome_descriptor;
    ctx.write_manifest("fisher-surface", params);
}

void run_hb_threshold(Context& ctx, double eta, double eta_d, const std::string& n_range) {
    int n_lo = 1, n_hi = 1;
    const auto dots = n_range.find("..");
    try {
        if (dots == std::string::npos) {
            n_lo = n_hi = std::stoi(n_range);
        } else {
            n_lo = std::stoi(n_range.substr(0, dots));
            n_hi = std::stoi(n_range.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw CLI::ValidationError("--n-range", "expected N or LO..HI, got '" + n_range + "'");
    }
    if (n_lo < 1 || n_hi < n_lo)
        throw CLI::ValidationError("--n-range", "range must satisfy 1 <= LO <= HI");

    io::CsvWriter csv(ctx.artifact("thresholds.csv"));
    csv.header({"n", "threshold_found", "eta_p_threshold", "qcrb_at_threshold", "sil",
                "convention"});
    for (int n = n_lo; n <= n_hi; ++n) {
        const HbThreshold t = hb_loss_threshold(n, eta, eta_d, ctx.conv());
        csv.row({std::to_string(n), t.found ? "1" : "0", fmt(t.eta_p), fmt(t.qcrb_at_threshold),
                 fmt(t.sil), to_string(t.convention)});
    }
    csv.close();

    json params;
    params["eta"] = eta;
    params["eta_d"] = eta_d;
    params["n_range"] = n_range;
    ctx.write_manifest("hb-threshold", params);
}

void run_mzi_map(Context& ctx, double target, int grid_points) {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(grid_points, 0.0, 1.0);
    const ReachabilityMap map = reachability_map(target, grid, grid);

    io::CsvWriter csv(ctx.artifact("mzi_map.csv"));
    csv.header({"v", "w", "phase_rad"});
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        for (Eigen::Index j = 0; j < grid.size(); ++j) {
            const double phase = map.phases(i, j);
            csv.row({fmt(grid(i)), fmt(grid(j)), std::isnan(phase) ? "" : fmt(phase)});
        }
    csv.close();

    json params;
    params["target"] = target;
    params["grid"] = grid_points;
    ctx.write_manifest("mzi-map", params);
}

std::vector<FringeSample> read_fringe_csv(const fs::path& path) {
    const io::CsvTable table = io::read_csv(path);
    const int c_power = table.column_index("power_W");
    const int c_v = table.column_index("v_eff");
    const int c_err = table.column_index("stderr");
    std::vector<std::string> errors;
    if (c_power < 0) errors.push_back("missing column 'power_W'");
    if (c_v < 0) errors.push_back("missing column 'v_eff'");
    std::vector<FringeSample> samples;
    if (errors.empty())
        for (const auto& row : table.rows) {
            FringeSample s;
            s.power_w = io::parse_double(row[static_cast<std::size_t>(c_power)], "power_W", errors);
            s.v_eff = io::parse_double(row[static_cast<std::size_t>(c_v)], "v_eff", errors);
            if (c_err >= 0 && !row[static_cast<std::size_t>(c_err)].text.empty())
                s.stderr_v = io::parse_double(row[static_cast<std::size_t>(c_err)], "stderr", errors);
            samples.push_back(s);
        }
    if (!errors.empty()) {
        std::string msg = path.string() + ":";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }
    return samples;
}

void run_fringe_fit(Context& ctx, const fs::path& input) {
    const auto samples = read_fringe_csv(input);
    const MziModel model = fit_fringe(samples);

    json j;
    j["v"] = model.v;
    j["w"] = model.w;
    j["phi0_rad"] = model.phi0;
    j["kappa_rad_per_W"] = model.kappa;
    j["residual_rms"] = model.residual_rms;
    j["exchange_ambiguous"] = model.exchange_ambiguous;
    j["converged"] = model.converged;
    std::ofstream f(ctx.artifact("fringe_fit.json"), std::ios::binary);
    f << j.dump(2) << "\n";

    json params;
    params["input"] = input.string();
    params["samples"] = samples.size();
    ctx.write_manifest("fringe-fit", params);
}

RatiometricData read_ratiometric_csv(const fs::path& path) {
    const io::CsvTable table = io::read_csv(path);
    const int c_in = table.column_index("input_mode");
    const int c_out = table.column_index("output_mode");
    const int c_i = table.column_index("intensity");
    const int c_s = table.column_index("stderr");
    std::vector<std::string> errors;
    if (c_in < 0) errors.push_back("missing column 'input_mode'");
    if (c_out < 0) errors.push_back("missing column 'output_mode'");
    if (c_i < 0) errors.push_back("missing column 'intensity'");

    RatiometricData d{};
    bool seen[4] = {false, false, false, false};
    if (errors.empty())
        for (const auto& row : table.rows) {
            const std::string in = row[static_cast<std::size_t>(c_in)].text;
            const std::string out = row[static_cast<std::size_t>(c_out)].text;
            const double val = io::parse_double(row[static_cast<std::size_t>(c_i)], "intensity", errors);
            double err = 0.0;
            if (c_s >= 0 && !row[static_cast<std::size_t>(c_s)].text.empty())
                err = io::parse_double(row[static_cast<std::size_t>(c_s)], "stderr", errors);
            int slot = -1;
            if (in == "a" && out == "c") slot = 0;
            else if (in == "a" && out == "d") slot = 1;
            else if (in == "b" && out == "c") slot = 2;
            else if (in == "b" && out == "d") slot = 3;
            if (slot < 0) {
                errors.push_back("line " + std::to_string(row[0].line) +
                                 ": input/output modes must be a|b / c|d, got '" + in + "'/'" + out + "'");
                continue;
            }
            if (seen[slot])
                errors.push_back("line " + std::to_string(row[0].line) + ": duplicate measurement " +
                                 in + "->" + out);
            seen[slot] = true;
            double* vals[] = {&d.i_ac, &d.i_ad, &d.i_bc, &d.i_bd};
            double* errs[] = {&d.s_ac, &d.s_ad, &d.s_bc, &d.s_bd};
            *vals[slot] = val;
            *errs[slot] = err;
        }
    for (int k = 0; k < 4; ++k)
        if (errors.empty() && !seen[k]) {
            const char* names[] = {"a->c", "a->d", "b->c", "b->d"};
            errors.push_back(std::string("missing measurement ") + names[k]);
        }
    if (!errors.empty()) {
        std::string msg = path.string() + ":";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }
    return d;
}

void run_ratiometric(Context& ctx, const fs::path& input) {
    const RatiometricData data = read_ratiometric_csv(input);
    const RatiometricResult result = ratiometric_reflectivity(data);

    json j;
    j["reflectivity"] = result.reflectivity;
    j["stderr"] = result.stderr_u;
    std::ofstream f(ctx.artifact("ratiometric.json"), std::ios::binary);
    f << j.dump(2) << "\n";

    json params;
    params["input"] = input.string();
    ctx.write_manifest("ratiometric", params);
}

void run_tomo_simulate(Context& ctx, double eta_p, double eta_det, std::vector<double> etas,
                       std::int64_t heralds, int cap) {
    if (!ctx.seed_given)
        throw CLI::ValidationError("--seed", "tomo-simulate is stochastic; a seed is required");
    if (etas.size() != 6) throw CLI::ValidationError("--etas", "expected six transmissivities");

    ApparatusConfig config;
    for (int k = 0; k < 6; ++k) config.eta[static_cast<std::size_t>(k)] = etas[static_cast<std::size_t>(k)];
    // Detector inefficiency folds into the final loss pair.
    config.eta[4] *= eta_det;
    config.eta[5] *= eta_det;
    config.photon_cap = cap;

    const DensityOperator rho_true = hb1_probe(eta_p, cap);
    const auto records = simulate_counts(rho_true, default_settings(), config, heralds, ctx.seed);
    write_count_records(ctx.artifact("counts.csv"), records);

    json truth;
    truth["state"] = density_to_json(rho_true);
    truth["eta_p"] = eta_p;
    truth["eta_det"] = eta_det;
    truth["etas"] = etas;
    truth["photon_cap"] = cap;
    std::ofstream f(ctx.artifact("true_state.json"), std::ios::binary);
    f << truth.dump(2) << "\n";

    json params;
    params["eta_p"] = eta_p;
    params["eta_det"] = eta_det;
    params["etas"] = etas;
    params["heralds"] = heralds;
    params["photon_cap"] = cap;
    ctx.write_manifest("tomo-simulate", params);
}

void run_tomo_fit(Context& ctx, const fs::path& input, const std::string& method, double eta_det,
                  std::vector<double> etas, int cap, const fs::path& truth_path) {
    if (etas.size() != 6) throw CLI::ValidationError("--etas", "expected six transmissivities");
    if (method != "mle" && method != "lsq" && method != "both")
        throw CLI::ValidationError("--method", "expected mle, lsq, or both");

    const auto records = read_count_records(input);
    ApparatusConfig base;
    for (int k = 0; k < 6; ++k) base.eta[static_cast<std::size_t>(k)] = etas[static_cast<std::size_t>(k)];
    base.eta[4] *= eta_det;
    base.eta[5] *= eta_det;
    base.photon_cap = cap;

    std::vector<std::vector<Eigen::MatrixXcd>> povms;
    for (const auto& r : records) {
        ApparatusConfig cfg = base;
        cfg.theta = r.theta;
        cfg.phi = r.phi;
        povms.push_back(setting_povm(cfg));
    }
    const BasisPtr cond = conditioned_basis(cap);

    json report;
    report["input"] = input.string();
    report["method"] = method;
    std::optional<DensityOperator> truth;
    if (!truth_path.empty()) {
        std::ifstream tf(truth_path);
        if (!tf) throw std::runtime_error("cannot open " + truth_path.string());
        json tj;
        tf >> tj;
        truth = density_from_json(tj.at("state"));
    }

    std::optional<DensityOperator> rho_mle, rho_lsq;
    if (method != "lsq") {
        const MleResult mle = mle_reconstruct(records, povms, cond);
        rho_mle = mle.rho;
        bool monotone = true;
        for (std::size_t k = 1; k < mle.log_likelihood.size(); ++k)
            if (mle.log_likelihood[k] < mle.log_likelihood[k - 1] - 1e-9) monotone = false;
        report["mle"]["converged"] = mle.converged;
        report["mle"]["iterations"] = mle.iterations;
        report["mle"]["log_likelihood_monotone"] = monotone;
        report["mle"]["final_log_likelihood"] = mle.log_likelihood.back();
        report["mle"]["qcrb"] = qcrb_of_reconstruction(mle.rho, ctx.conv());
        if (truth) report["mle"]["fidelity_to_truth"] = fidelity(mle.rho, *truth);
        std::ofstream f(ctx.artifact("rho_mle.json"), std::ios::binary);
        f << density_to_json(mle.rho).dump(2) << "\n";
    }
    if (method != "mle") {
        const LsqResult lsq = lsq_reconstruct(records, povms, cond);
        rho_lsq = lsq.rho;
        report["lsq"]["distance_to_unconstrained"] = lsq.distance_to_unconstrained;
        report["lsq"]["low_count_warning"] = lsq.low_count_warning;
        report["lsq"]["qcrb"] = qcrb_of_reconstruction(lsq.rho, ctx.conv());
        if (truth) report["lsq"]["fidelity_to_truth"] = fidelity(lsq.rho, *truth);
        std::ofstream f(ctx.artifact("rho_lsq.json"), std::ios::binary);
        f << density_to_json(lsq.rho).dump(2) << "\n";
    }
    if (rho_mle && rho_lsq)
        report["mle_lsq_trace_distance"] = trace_distance(*rho_mle, *rho_lsq);

    std::ofstream rf(ctx.artifact("tomo_report.json"), std::ios::binary);
    rf << report.dump(2) << "\n";

    json params;
    params["input"] = input.string();
    params["method"] = method;
    params["eta_det"] = eta_det;
    params["etas"] = etas;
    params["photon_cap"] = cap;
    ctx.write_manifest("tomo-fit", params);
}

int run_validate(const fs::path& input, std::string kind) {
    try {
        if (kind == "auto") {
            const io::CsvTable table = io::read_csv(input);
            if (table.column_index("n_alpha") >= 0) kind = "counts";
            else if (table.column_index("intensity") >= 0) kind = "ratiometric";
            else if (table.column_index("v_eff") >= 0) kind = "fringe";
            else
                throw std::runtime_error(input.string() +
                                         ": cannot infer schema from header; use --kind");
        }
        if (kind == "counts") {
            const auto records = read_count_records(input);
            std::cout << "OK: " << records.size() << " count record(s)\n";
        } else if (kind == "ratiometric") {
            const RatiometricData d = read_ratiometric_csv(input);
            ratiometric_reflectivity(d);  // also validates value ranges
            std::cout << "OK: ratiometric quartet\n";
        } else if (kind == "fringe") {
            const auto samples = read_fringe_csv(input);
            std::cout << "OK: " << samples.size() << " fringe sample(s)\n";
        } else {
            throw std::runtime_error("unknown --kind '" + kind +
                                     "'; valid: counts, ratiometric, fringe, auto");
        }
    } catch (const std::exception& e) {
        std::cout << "INVALID: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phos: lossy two-mode photonic interferometry toolkit"};
    app.require_subcommand(1);
    app.footer("All angles are radians, powers are watts. CSV artifacts use a header row,\n"
               "'.' decimal separator, UTF-8, LF line endings.");

    Context ctx;
    app.add_option("--out", ctx.out, "Output directory for artifacts")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", ctx.seed, "Random seed (required for stochastic scenarios)");
    app.add_option("--config", ctx.config_path, "JSON file with parameter overrides");
    app.add_option("--convention", ctx.convention, "Phase-generator convention")
        ->check(CLI::IsMember({"jz", "single-arm"}))
        ->capture_default_str();

    // jsa-tradeoff
    std::string preset = "correlated";
    double bw_min = 0.05, bw_max = 3.0;
    int points = 60;
    auto* jsa = app.add_subcommand("jsa-tradeoff", "Purity / heralding-efficiency trade-off curve");
    jsa->add_option("--preset", preset, "JSA preset (correlated | matched)")->capture_default_str();
    jsa->add_option("--bw-min", bw_min, "Smallest signal-filter bandwidth")->capture_default_str();
    jsa->add_option("--bw-max", bw_max, "Largest signal-filter bandwidth")->capture_default_str();
    jsa->add_option("--points", points, "Number of bandwidth points")->capture_default_str();

    // fisher-surface
    int fs_grid = 21;
    auto* fsc = app.add_subcommand("fisher-surface",
                                   "Phase-maximised Fisher information over (v, w) for |1,1> input");
    fsc->add_option("--grid", fs_grid, "Grid points per axis")->capture_default_str();

    // hb-threshold
    double th_eta = 0.95, th_eta_d = 0.6;
    std::string n_range = "1..5";
    auto* thr = app.add_subcommand("hb-threshold",
                                   "Minimal preparation efficiency for HB(N) to beat the SIL");
    thr->add_option("--eta", th_eta, "Interferometer transmissivity")->capture_default_str();
    thr->add_option("--eta-d", th_eta_d, "Detection efficiency")->capture_default_str();
    thr->add_option("--n-range", n_range, "N or LO..HI")->capture_default_str();

    // mzi-map
    double target = 0.5;
    int map_grid = 101;
    auto* map = app.add_subcommand("mzi-map", "Reachability map of effective reflectivity targets");
    map->add_option("--target", target, "Target effective reflectivity")->capture_default_str();
    map->add_option("--grid", map_grid, "Grid points per axis")->capture_default_str();

    // fringe-fit
    fs::path fringe_input;
    auto* fringe = app.add_subcommand("fringe-fit", "Fit the v_eff-vs-power fringe of an MZI");
    fringe->add_option("--input", fringe_input, "CSV with power_W, v_eff[, stderr]")->required();

    // ratiometric
    fs::path ratio_input;
    auto* ratio = app.add_subcommand("ratiometric", "Coupling-independent splitter reflectivity");
    ratio->add_option("--input", ratio_input, "CSV with input_mode, output_mode, intensity[, stderr]")
        ->required();

    // tomo-simulate
    double eta_p = 0.8, eta_det = 1.0;
    std::vector<double> etas = {1, 1, 1, 1, 1, 1};
    std::int64_t heralds = 100000;
    int cap = 2;
    auto* sim = app.add_subcommand("tomo-simulate", "Simulate tomography count records");
    sim->add_option("--eta-p", eta_p, "Preparation efficiency of the probe")->capture_default_str();
    sim->add_option("--eta-det", eta_det, "Detector efficiency (folded into the final losses)")
        ->capture_default_str();
    sim->add_option("--etas", etas, "Six apparatus transmissivities")->expected(6);
    sim->add_option("--heralds", heralds, "Heralds per setting")->capture_default_str();
    sim->add_option("--cap", cap, "Conditioned total-photon cap")->capture_default_str();

    // tomo-fit
    fs::path counts_input, truth_path;
    std::string method = "both";
    double fit_eta_det = 1.0;
    std::vector<double> fit_etas = {1, 1, 1, 1, 1, 1};
    int fit_cap = 2;
    auto* fit = app.add_subcommand("tomo-fit", "Reconstruct the heralded state from count records");
    fit->add_option("--input", counts_input, "Count-record CSV")->required();
    fit->add_option("--method", method, "mle | lsq | both")->capture_default_str();
    fit->add_option("--eta-det", fit_eta_det, "Detector efficiency assumed in the model")
        ->capture_default_str();
    fit->add_option("--etas", fit_etas, "Six apparatus transmissivities")->expected(6);
    fit->add_option("--cap", fit_cap, "Conditioned total-photon cap")->capture_default_str();
    fit->add_option("--truth", truth_path, "Optional true-state JSON for fidelity reporting");

    // validate
    fs::path val_input;
    std::string val_kind = "auto";
    auto* val = app.add_subcommand("validate", "Schema-check input files");
    val->add_option("--input", val_input, "File to validate")->required();
    val->add_option("--kind", val_kind, "counts | ratiometric | fringe | auto")->capture_default_str();

    for (CLI::App* s : {jsa, fsc, thr, map, fringe, ratio, sim, fit, val}) s->fallthrough();

    CLI11_PARSE(app, argc, argv);
    ctx.seed_given = seed_opt->count() > 0;

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!ctx.config_path.empty()) apply_config(*sub, ctx.config_path);

        if (sub == jsa) run_jsa_tradeoff(ctx, preset, bw_min, bw_max, points);
        else if (sub == fsc) run_fisher_surface(ctx, fs_grid);
        else if (sub == thr) run_hb_threshold(ctx, th_eta, th_eta_d, n_range);
        else if (sub == map) run_mzi_map(ctx, target, map_grid);
        else if (sub == fringe) run_fringe_fit(ctx, fringe_input);
        else if (sub == ratio) run_ratiometric(ctx, ratio_input);
        else if (sub == sim) run_tomo_simulate(ctx, eta_p, eta_det, etas, heralds, cap);
        else if (sub == fit)
            run_tomo_fit(ctx, counts_input, method, fit_eta_det, fit_etas, fit_cap, truth_path);
        else if (sub == val) return run_validate(val_input, val_kind);
    } catch (const std::exception& e) {
        // Remove partial artifacts so a failed run leaves nothing behind.
        std::error_code ec;
        for (const auto& p : ctx.written) fs::remove(p, ec);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
