#pragma once

#include <functional>
#include <optional>
#include <string>

#include "phos/fock.hpp"

namespace phos {

/// Which generator parameterises the phase. Both are related by a
/// reparameterisation; every Fisher-information result carries this flag.
enum class PhaseConvention {
    DifferentialJz,  // exp(i*phi*Jz): +phi/2 on mode a, -phi/2 on mode b
    SingleArm,       // exp(i*phi*n_a)
};

std::string to_string(PhaseConvention c);

/// Generator matrix G of the phase evolution on a two-mode basis.
Eigen::MatrixXcd phase_generator(const FockBasis& basis, PhaseConvention convention);

/// Circuit elements realising exp(i*phi*G) on modes (0, 1).
Circuit phase_elements(PhaseConvention convention, double phi);

/// A two-mode interferometric channel split around the phase:
/// rho(phi) = post( phase_phi( pre(rho_in) ) ).
struct PhaseChannel {
    Circuit pre;
    Circuit post;
    PhaseConvention convention = PhaseConvention::DifferentialJz;

    DensityOperator evolve(const DensityOperator& input, double phi) const;
};

/// p_gamma = tr(rho * Pi_gamma), clamped at zero below -1e-12.
Eigen::VectorXd outcome_distribution(const DensityOperator& rho,
                                     const std::vector<Eigen::MatrixXcd>& povm);

struct FisherOptions {
    double step = 1e-4;      // central-difference step, Richardson-extrapolated
    double p_floor = 1e-12;  // outcomes below this do not enter the sum
};

/// Classical Fisher information of a parameterised outcome distribution.
double classical_fisher_information(const std::function<Eigen::VectorXd(double)>& probabilities,
                                    double phi, const FisherOptions& opts = {});

double classical_fisher_information(const PhaseChannel& channel, const DensityOperator& input,
                                    const std::vector<Eigen::MatrixXcd>& povm, double phi,
                                    const FisherOptions& opts = {});

/// QFI from the state and its analytic derivative d(rho)/d(phi).
double quantum_fisher_information(const DensityOperator& rho, const Eigen::MatrixXcd& drho,
                                  double eigen_floor = 1e-12);

/// QFI of rho under the generator G, using d(rho)/d(phi) = i[G, rho].
double qfi_from_generator(const DensityOperator& rho, const Eigen::MatrixXcd& generator,
                          double eigen_floor = 1e-12);

struct PrecisionBounds {
    double trials = 1;         // nu
    double photons = 1;        // N (resource accounting documented per bound)
    double eta = 1, eta_d = 1;
    double sql, hl, sil, crb, qcrb;  // radians; +inf sentinel when F = 0
};

PrecisionBounds precision_bounds(double trials, double photons, double eta, double eta_d,
                                 double fisher, double quantum_fisher);

struct EffectivePhaseAxis {
    double jz_coefficient;  // cos(2*theta)
    double jy_coefficient;  // -sin(2*theta)
    double shrink_factor;   // sin(2*theta) = 2*sqrt(v(1-v))
};

EffectivePhaseAxis effective_phase_axis(double theta);

/// Max-norm deviation of B(theta) P(phi) B(theta)^dag from
/// exp(i*phi*(cos2theta Jz - sin2theta Jy)) on the truncated two-mode space.
double effective_phase_axis_deviation(const FockBasis& basis, double theta, double phi);

struct PhaseScanOptions {
    int scan_points = 401;       // dense scan over [0, 2*pi)
    double refine_tol = 1e-10;   // golden-section window width
};

/// Deterministic maximisation of a scalar function of the phase.
std::pair<double, double> maximize_over_phase(const std::function<double(double)>& f,
                                              const PhaseScanOptions& opts = {});

struct FisherSurface {
    Eigen::VectorXd v_grid, w_grid;
    Eigen::MatrixXd values;  // values(i, j) = max_phi F at (v_i, w_j)
    std::string outcome_descriptor;
};

/// Fig-3(b)-style surface: |1>|1> input, splitters v and w, binary POVM
/// {|1,1><1,1|, complement}, lossless, maximised over the phase.
FisherSurface fisher_surface(const Eigen::VectorXd& v_grid, const Eigen::VectorXd& w_grid,
                             PhaseConvention convention = PhaseConvention::DifferentialJz,
                             const PhaseScanOptions& opts = {});

/// QFI of the HB(N) probe prepared through the lossy network: eta_p on each
/// input arm, input splitter v, then eta*eta_d per internal arm folded into
/// the channel.  Evaluated at the (phase-covariant) output state.
double hb_network_qfi(int n, double eta_p, double input_splitting, double eta, double eta_d,
                      PhaseConvention convention = PhaseConvention::DifferentialJz);

struct HbThreshold {
    int n;
    bool found = false;   // false: HB(N) never beats the SIL for eta_p in (0, 1]
    double eta_p = 1.0;   // minimal eta_p with QCRB <= SIL (tolerance 1e-3)
    double qcrb_at_threshold = 0.0;
    double sil = 0.0;     // classical resource: total probe photons 2N
    PhaseConvention convention;
};

HbThreshold hb_loss_threshold(int n, double eta, double eta_d,
                              PhaseConvention convention = PhaseConvention::DifferentialJz,
                              double tol = 1e-3);

struct NoonSensitivity {
    double total_qfi = 0.0;
    /// QFI contribution per surviving-photon-number sector (index = photons).
    std::vector<double> sector_qfi;
};

/// Loss response of the N00N probe under uniform transmissivity eta on both
/// arms, single-arm generator.  Sectors below N photons contribute zero.
NoonSensitivity noon_loss_sensitivity(int n, double eta);

}  // namespace phos
