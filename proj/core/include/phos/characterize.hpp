#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace phos {

/// Four single-input intensity measurements of an embedded beam splitter
/// (first index: input a/b, second: output c/d).
struct RatiometricData {
    double i_ac, i_ad, i_bc, i_bd;
    /// Optional per-intensity standard errors (same order); zero = exact.
    double s_ac = 0, s_ad = 0, s_bc = 0, s_bd = 0;
};

struct RatiometricResult {
    double reflectivity;  // u = 1/(1 + sqrt(r)), r = I_ad*I_bc / (I_ac*I_bd)
    double stderr_u;      // first-order (delta method) propagation; 0 if no errors given
};

/// Coupling-independent estimate of the splitting ratio.
RatiometricResult ratiometric_reflectivity(const RatiometricData& data);

/// v_eff = vw + (1-v)(1-w) + 2*sqrt(v(1-v)w(1-w))*cos(phi).
double effective_reflectivity(double v, double w, double phi);

struct ReachablePhase {
    bool reachable = false;
    double phase = 0.0;          // in [0, pi] when reachable
    double attainable_min = 0.0; // v_eff range endpoints (phi = pi, 0)
    double attainable_max = 0.0;
};

/// Solves v_eff(v, w, phi) = target for the phase; reports the attainable
/// range when the target cannot be reached.  Degenerate splitters
/// (v or w in {0,1}) give a constant v_eff; phi = 0 returned by convention.
ReachablePhase reachable_phase(double v, double w, double target);

struct ReachabilityMap {
    Eigen::VectorXd v_grid, w_grid;
    double target;
    /// phases(i, j) = phase for (v_i, w_j); NaN marks unreachable cells.
    Eigen::MatrixXd phases;
};

ReachabilityMap reachability_map(double target, const Eigen::VectorXd& v_grid,
                                 const Eigen::VectorXd& w_grid);

struct FringeSample {
    double power_w;    // dissipated power, W
    double v_eff;      // measured effective reflectivity
    double stderr_v = 0.0;
};

struct MziModel {
    double v = 0.5, w = 0.5;   // canonical order v <= w, v + w <= 1
    double phi0 = 0.0;         // rad
    double kappa = 0.0;        // rad/W; phase model phi(P) = phi0 + kappa*P
    bool exchange_ambiguous = true;  // (v,w) known only up to exchange/complement
    double residual_rms = 0.0;
    bool converged = false;
};

struct FringeFitOptions {
    double kappa_min = 0.1, kappa_max = 60.0;  // rad/W scan window for initialisation
    int kappa_scan = 600;
    int max_iterations = 200;
};

/// Weighted least squares of the effective-reflectivity fringe against
/// dissipated power.  Needs >= 5 samples with distinct powers.
MziModel fit_fringe(const std::vector<FringeSample>& samples, const FringeFitOptions& opts = {});

}  // namespace phos
