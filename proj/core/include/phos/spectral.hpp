#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace phos {

enum class PhasematchShape { Gaussian, Sinc };

/// Parametric pump-envelope x phase-matching model of a photon-pair joint
/// spectral amplitude.  All detunings are in units of the pump bandwidth.
struct JsaModel {
    double pump_bandwidth = 1.0;       // amplitude envelope exp(-x^2 / (4 sigma^2))
    double k_s = 1.0, k_i = -1.0;      // phase-matching slopes
    PhasematchShape shape = PhasematchShape::Gaussian;
    double phasematch_bandwidth = 1.0; // scale of the phase-matching argument
    double grid_extent = 6.0;          // grid spans [-extent, extent] on both axes
    int grid_points = 512;
    /// Maximum allowed |f| on the grid boundary relative to max|f|.  The
    /// Gaussian default is strict; sinc phase matching decays polynomially
    /// and needs a relaxed bound.
    double boundary_tolerance = 1e-4;
};

struct JointSpectralAmplitude {
    Eigen::MatrixXcd grid;   // grid(i, j) = f(nu_s(i), nu_i(j))
    Eigen::VectorXd nu_s, nu_i;
    JsaModel model;

    double norm_squared() const { return grid.squaredNorm(); }
};

/// f(nu_s, nu_i) = pump(nu_s + nu_i) * Phi(k_s nu_s + k_i nu_i), normalised
/// so that the grid has unit norm.  Throws when the boundary-truncation
/// precondition fails, reporting the measured boundary ratio.
JointSpectralAmplitude build_jsa(const JsaModel& model);

struct SpectralFilter {
    enum class Arm { Signal, Idler };
    Arm arm = Arm::Idler;
    /// Intensity-std bandwidth in units of the pump bandwidth; amplitude
    /// transmission exp(-(nu - center)^2 / (4 b^2)).  Infinite = no filter.
    double bandwidth = std::numeric_limits<double>::infinity();
    double center = 0.0;

    double amplitude_transmission(double nu) const;
    /// Intensity FWHM implied by the bandwidth (documentation of convention).
    double intensity_fwhm() const;
};

/// Elementwise amplitude filtering; deliberately NOT renormalised, the lost
/// norm^2 is the pass probability.  At most one filter per arm.
JointSpectralAmplitude apply_filters(const JointSpectralAmplitude& jsa,
                                     const std::vector<SpectralFilter>& filters);

/// Normalised Schmidt coefficients lambda_n = sigma_n^2 / sum(sigma^2),
/// descending.  Purity = sum(lambda_n^2).
Eigen::VectorXd schmidt_decompose(const JointSpectralAmplitude& jsa);

struct SourceFigures {
    double purity = 1.0;
    /// ||Fs Fi f||^2 / ||Fi f||^2: probability the signal photon passes its
    /// filter given the idler herald fired (through its own filter, if any).
    double heralding_efficiency = 1.0;
    /// ||Fs Fi f||^2 / ||f||^2: fraction of generated pairs surviving all
    /// filters.  The variant of heralding efficiency that charges the idler
    /// filter's own pass probability; both readings are reported.
    double pass_probability = 1.0;
    Eigen::VectorXd schmidt_coefficients;
};

/// Purity and heralding figures of the filtered source.  An idler filter
/// must be present (possibly infinite-bandwidth) when heralding efficiency
/// is requested.
SourceFigures source_figures(const JointSpectralAmplitude& jsa,
                             const std::vector<SpectralFilter>& filters);

struct TradeoffPoint {
    double bandwidth;
    double purity;
    double heralding_efficiency;
    double pass_probability;
};

/// Gaussian filter on the signal arm only (the idler herald stays
/// unfiltered), one point per bandwidth (ascending).  Narrowing the filter
/// purifies the delivered photon at the cost of heralding efficiency.
std::vector<TradeoffPoint> tradeoff_scan(const JointSpectralAmplitude& jsa,
                                         const Eigen::VectorXd& bandwidths);

/// Named presets.  Parameter values are calibrated against the target
/// figures of the correlated/matched source families, not taken from any
/// external dataset; see data/jsa_presets.json.
JsaModel correlated_preset();
JsaModel matched_preset();
std::optional<JsaModel> preset_by_name(const std::string& name);

}  // namespace phos
