#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "phos/fock.hpp"
#include "phos/metrology.hpp"

namespace phos {

/// Heralded-state tomography apparatus: two phase shifters and an MZI on the
/// input modes, a 50:50 splitter fanning the top output onto two APDs, one
/// APD on the bottom output, and six loss beam splitters (detector
/// inefficiency folded into the last pair).
///
/// Dilated mode layout: 0 = top input (ends at D1), 1 = bottom input (ends
/// at D3), 2..7 = loss modes l1..l6, 8 = second top output (ends at D2).
struct ApparatusConfig {
    double theta = 0.0;  // phase before the MZI (top arm)
    double phi = 0.0;    // phase inside the MZI (top arm)
    std::array<double, 6> eta = {1, 1, 1, 1, 1, 1};
    /// Conditioned total-photon cap.  The five click outcomes are complete
    /// only when no more than two photons can reach the detectors, so the
    /// default keeps the cap at 2.
    int photon_cap = 2;
};

struct TomographySetting {
    int id = 0;
    double theta = 0.0;
    double phi = 0.0;
};

/// Default alpha-grid: theta in {0, pi/4, pi/2, 3pi/4} x phi in
/// {pi/4, 3pi/4, 5pi/4, 7pi/4}; completeness is validated by the Gram-rank
/// check (phi on the pi/2 grid would be rank-deficient).
std::vector<TomographySetting> default_settings();

inline constexpr int kDilatedModes = 9;
inline constexpr int kOutcomes = 5;

BasisPtr dilated_basis(int photon_cap);
BasisPtr conditioned_basis(int photon_cap);

/// Unitary dilation of the lossy apparatus (losses as beam splitters onto
/// the declared loss modes).
Circuit dilated_circuit(const ApparatusConfig& config);

/// The five click-pattern projectors on the monitored modes, tensored with
/// identity on the loss modes.  All are diagonal in the Fock basis; each
/// entry of diagonals[gamma] is the weight of one basis state.
/// Outcomes: 1 none, 2 D1 xor D2, 3 D3 only, 4 D1 and D2, 5 (D1 xor D2) and D3.
struct OutputPovm {
    std::array<Eigen::VectorXd, kOutcomes> diagonals;
};
OutputPovm build_output_povm(const FockBasis& basis);

/// Pi_in = U^dag Pi_out U on the full dilated space.
std::vector<Eigen::MatrixXcd> back_propagate_povm(const FockBasis& basis, const Circuit& circuit,
                                                  const OutputPovm& output);

/// Restriction P Pi_in P to the conditioned two-mode input space (loss
/// inputs vacuum, photon cap applied).  Idempotent.
std::vector<Eigen::MatrixXcd> condition_povm(const std::vector<Eigen::MatrixXcd>& input_povm,
                                             const FockBasis& full_basis,
                                             const FockBasis& cond_basis);

/// Full chain for one setting: conditioned POVM elements on the two-mode
/// input space.
std::vector<Eigen::MatrixXcd> setting_povm(const ApparatusConfig& config);

/// Expected total photon number in the loss modes after the apparatus, for
/// a conditioned input state.
double loss_mode_population(const ApparatusConfig& config, const DensityOperator& rho_cond);

struct CountRecord {
    int setting_id = 0;
    double theta = 0.0;
    double phi = 0.0;
    std::int64_t n_alpha = 0;              // heralds for this setting
    std::array<std::int64_t, kOutcomes> counts{};  // sum equals n_alpha
};

/// Multinomial draws with p_gamma = tr(rho Pi_gamma); deterministic given
/// the seed (per-setting streams are split from it).
std::vector<CountRecord> simulate_counts(const DensityOperator& rho_cond,
                                         const std::vector<TomographySetting>& settings,
                                         const ApparatusConfig& base_config, std::int64_t heralds,
                                         std::uint64_t seed);

void write_count_records(const std::filesystem::path& path, const std::vector<CountRecord>& records);
std::vector<CountRecord> read_count_records(const std::filesystem::path& path);

/// Number of real parameters of the photon-number-sector-blocked operator
/// space (cross-sector coherences are unobservable here).
int blocked_parameter_count(const FockBasis& cond_basis);

/// Throws "tomographically incomplete" unless the POVM set spans the
/// blocked operator space.
void check_tomographic_completeness(const std::vector<std::vector<Eigen::MatrixXcd>>& povms,
                                    const FockBasis& cond_basis);

struct MleOptions {
    int max_iterations = 100000;
    double ll_gain_tol = 1e-10;
};

struct MleResult {
    DensityOperator rho;
    bool converged = false;
    int iterations = 0;
    std::vector<double> log_likelihood;  // one entry per iteration, non-decreasing
};

/// Multinomial maximum-likelihood reconstruction by the (dilution-guarded)
/// R rho R fixed-point iteration.
MleResult mle_reconstruct(const std::vector<CountRecord>& records,
                          const std::vector<std::vector<Eigen::MatrixXcd>>& povms,
                          const BasisPtr& cond_basis, const MleOptions& opts = {});

struct LsqResult {
    DensityOperator rho;
    double distance_to_unconstrained = 0.0;  // Frobenius, after PSD projection
    bool low_count_warning = false;  // Gaussian approximation is dubious below warn_below heralds
};

/// Gaussian-approximation reconstruction: weighted least squares over the
/// non-vacuum outcomes (vacuum eliminated through the count constraint),
/// sigma^2 plug-in from the model probabilities floored at one count, then
/// eigenvalue clipping and trace renormalisation.
LsqResult lsq_reconstruct(const std::vector<CountRecord>& records,
                          const std::vector<std::vector<Eigen::MatrixXcd>>& povms,
                          const BasisPtr& cond_basis, std::int64_t warn_below = 1000);

/// QCRB of a reconstructed state under the chosen phase-generator
/// convention (differential phase applied to the two conditioned modes).
double qcrb_of_reconstruction(const DensityOperator& rho, PhaseConvention convention,
                              double trials = 1.0);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);

}  // namespace phos
