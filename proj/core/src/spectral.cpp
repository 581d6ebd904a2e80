#include "phos/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace phos {

namespace {

double pump_amplitude(double x, double sigma) { return std::exp(-x * x / (4.0 * sigma * sigma)); }

double phasematch_amplitude(double y, const JsaModel& m) {
    const double arg = y / m.phasematch_bandwidth;
    if (m.shape == PhasematchShape::Gaussian) return std::exp(-arg * arg / 4.0);
    if (std::abs(arg) < 1e-12) return 1.0;
    return std::sin(arg) / arg;
}

}  // namespace

JointSpectralAmplitude build_jsa(const JsaModel& model) {
    if (model.grid_points < 8) throw std::invalid_argument("build_jsa: grid too small");
    if (model.pump_bandwidth <= 0 || model.phasematch_bandwidth <= 0)
        throw std::invalid_argument("build_jsa: bandwidths must be positive");

    JointSpectralAmplitude jsa;
    jsa.model = model;
    const int n = model.grid_points;
    jsa.nu_s = Eigen::VectorXd::LinSpaced(n, -model.grid_extent, model.grid_extent);
    jsa.nu_i = jsa.nu_s;
    jsa.grid.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double ns = jsa.nu_s(i), ni = jsa.nu_i(j);
            jsa.grid(i, j) = pump_amplitude(ns + ni, model.pump_bandwidth) *
                             phasematch_amplitude(model.k_s * ns + model.k_i * ni, model);
        }

    const double peak = jsa.grid.cwiseAbs().maxCoeff();
    if (peak <= 0.0) throw std::runtime_error("build_jsa: identically zero amplitude");
    double boundary = 0.0;
    for (int k = 0; k < n; ++k) {
        boundary = std::max(boundary, std::abs(jsa.grid(0, k)));
        boundary = std::max(boundary, std::abs(jsa.grid(n - 1, k)));
        boundary = std::max(boundary, std::abs(jsa.grid(k, 0)));
        boundary = std::max(boundary, std::abs(jsa.grid(k, n - 1)));
    }
    if (boundary > model.boundary_tolerance * peak)
        throw std::runtime_error("build_jsa: grid truncation violated, boundary/max = " +
                                 std::to_string(boundary / peak) + " exceeds tolerance " +
                                 std::to_string(model.boundary_tolerance));

    jsa.grid /= jsa.grid.norm();
    return jsa;
}

double SpectralFilter::amplitude_transmission(double nu) const {
    if (std::isinf(bandwidth)) return 1.0;
    if (bandwidth <= 0.0) throw std::invalid_argument("SpectralFilter: bandwidth must be positive");
    const double d = nu - center;
    return std::exp(-d * d / (4.0 * bandwidth * bandwidth));
}

double SpectralFilter::intensity_fwhm() const {
    // |T|^2 = exp(-d^2 / (2 b^2)) has FWHM 2 sqrt(2 ln 2) b.
    return 2.0 * std::sqrt(2.0 * std::log(2.0)) * bandwidth;
}

JointSpectralAmplitude apply_filters(const JointSpectralAmplitude& jsa,
                                     const std::vector<SpectralFilter>& filters) {
    int n_signal = 0, n_idler = 0;
    for (const auto& f : filters)
        (f.arm == SpectralFilter::Arm::Signal ? n_signal : n_idler) += 1;
    if (n_signal > 1 || n_idler > 1)
        throw std::invalid_argument("apply_filters: at most one filter per arm");

    JointSpectralAmplitude out = jsa;
    for (const auto& f : filters) {
        if (f.arm == SpectralFilter::Arm::Signal) {
            for (Eigen::Index i = 0; i < out.nu_s.size(); ++i)
                out.grid.row(i) *= f.amplitude_transmission(out.nu_s(i));
        } else {
            for (Eigen::Index j = 0; j < out.nu_i.size(); ++j)
                out.grid.col(j) *= f.amplitude_transmission(out.nu_i(j));
        }
    }
    return out;
}

Eigen::VectorXd schmidt_decompose(const JointSpectralAmplitude& jsa) {
    const double total = jsa.grid.squaredNorm();
    if (total < 1e-300) throw std::invalid_argument("schmidt_decompose: zero grid");

    Eigen::VectorXd sv;
    if (jsa.grid.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(jsa.grid.real());
        sv = svd.singularValues();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(jsa.grid);
        sv = svd.singularValues();
    }
    Eigen::VectorXd lambda = sv.array().square();
    lambda /= lambda.sum();
    return lambda;
}

SourceFigures source_figures(const JointSpectralAmplitude& jsa,
                             const std::vector<SpectralFilter>& filters) {
    std::vector<SpectralFilter> idler_only;
    for (const auto& f : filters)
        if (f.arm == SpectralFilter::Arm::Idler) idler_only.push_back(f);

    const JointSpectralAmplitude both = apply_filters(jsa, filters);
    const JointSpectralAmplitude idler = apply_filters(jsa, idler_only);

    const double n_all = jsa.norm_squared();
    const double n_both = both.norm_squared();
    const double n_idler = idler.norm_squared();

    SourceFigures out;
    out.schmidt_coefficients = schmidt_decompose(both);
    out.purity = out.schmidt_coefficients.array().square().sum();
    out.pass_probability = n_both / n_all;
    out.heralding_efficiency = n_idler > 1e-14 ? n_both / n_idler : 0.0;
    return out;
}

std::vector<TradeoffPoint> tradeoff_scan(const JointSpectralAmplitude& jsa,
                                         const Eigen::VectorXd& bandwidths) {
    for (Eigen::Index k = 1; k < bandwidths.size(); ++k)
        if (bandwidths(k) <= bandwidths(k - 1))
            throw std::invalid_argument("tradeoff_scan: bandwidths must be ascending");
    if (bandwidths.size() > 0 && bandwidths(0) <= 0.0)
        throw std::invalid_argument("tradeoff_scan: bandwidths must be positive");

    std::vector<TradeoffPoint> curve;
    curve.reserve(static_cast<std::size_t>(bandwidths.size()));
    for (Eigen::Index k = 0; k < bandwidths.size(); ++k) {
        const double b = bandwidths(k);
        const std::vector<SpectralFilter> filters = {{SpectralFilter::Arm::Signal, b, 0.0}};
        const SourceFigures f = source_figures(jsa, filters);
        curve.push_back({b, f.purity, f.heralding_efficiency, f.pass_probability});
    }
    return curve;
}

// Preset parameters are calibrated numerically (see data/jsa_presets.json):
// the correlated family targets an unfiltered purity of 0.27, the matched
// family maximises unfiltered purity for sinc phase matching.
JsaModel correlated_preset() {
    JsaModel m;
    m.pump_bandwidth = 1.0;
    m.k_s = 1.0;
    m.k_i = 0.5;
    m.shape = PhasematchShape::Gaussian;
    m.phasematch_bandwidth = 0.348547;  // calibrated: unfiltered purity 0.270
    m.grid_extent = 18.0;
    m.grid_points = 512;
    m.boundary_tolerance = 1e-4;
    return m;
}

JsaModel matched_preset() {
    JsaModel m;
    m.pump_bandwidth = 1.0;
    m.k_s = 1.0;
    m.k_i = -1.0;
    m.shape = PhasematchShape::Sinc;
    m.phasematch_bandwidth = 1.0;  // calibrated: max unfiltered purity (0.830)
    m.grid_extent = 10.0;
    m.grid_points = 512;
    m.boundary_tolerance = 0.05;  // sinc tails decay polynomially
    return m;
}

std::optional<JsaModel> preset_by_name(const std::string& name) {
    if (name == "correlated") return correlated_preset();
    if (name == "matched") return matched_preset();
    return std::nullopt;
}

}  // namespace phos
