#include "phos/characterize.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace phos {

namespace {
constexpr double kPi = std::numbers::pi;
}

RatiometricResult ratiometric_reflectivity(const RatiometricData& d) {
    struct Named {
        double value;
        const char* name;
    };
    const Named all[] = {{d.i_ac, "I_ac"}, {d.i_ad, "I_ad"}, {d.i_bc, "I_bc"}, {d.i_bd, "I_bd"}};
    for (const auto& n : all) {
        if (n.value < 0.0)
            throw std::invalid_argument(std::string("ratiometric_reflectivity: negative intensity ") + n.name);
        if (!std::isfinite(n.value))
            throw std::invalid_argument(std::string("ratiometric_reflectivity: non-finite intensity ") + n.name);
    }
    for (const auto& n : {all[0], all[3]})
        if (n.value == 0.0)
            throw std::invalid_argument(std::string("ratiometric_reflectivity: zero denominator intensity ") +
                                        n.name);

    const double r = (d.i_ad * d.i_bc) / (d.i_ac * d.i_bd);
    const double sqrt_r = std::sqrt(r);
    RatiometricResult out;
    out.reflectivity = 1.0 / (1.0 + sqrt_r);

    // First-order propagation: du/dr = -1 / (2 sqrt(r) (1 + sqrt(r))^2),
    // (sigma_r / r)^2 = sum of relative intensity variances.
    out.stderr_u = 0.0;
    if (d.s_ac > 0 || d.s_ad > 0 || d.s_bc > 0 || d.s_bd > 0) {
        double rel2 = 0.0;
        const double rels[] = {d.s_ac / d.i_ac, d.s_bd / d.i_bd,
                               d.i_ad > 0 ? d.s_ad / d.i_ad : 0.0,
                               d.i_bc > 0 ? d.s_bc / d.i_bc : 0.0};
        for (double s : rels) rel2 += s * s;
        if (sqrt_r > 0.0) {
            const double du_dr = 1.0 / (2.0 * sqrt_r * (1.0 + sqrt_r) * (1.0 + sqrt_r));
            out.stderr_u = du_dr * r * std::sqrt(rel2);
        }
    }
    return out;
}

double effective_reflectivity(double v, double w, double phi) {
    if (v < 0.0 || v > 1.0 || w < 0.0 || w > 1.0)
        throw std::invalid_argument("effective_reflectivity: v, w must lie in [0,1]");
    const double v_eff =
        v * w + (1.0 - v) * (1.0 - w) + 2.0 * std::sqrt(v * (1.0 - v) * w * (1.0 - w)) * std::cos(phi);
    if (v_eff < 0.0) {
        if (v_eff < -1e-12) throw std::runtime_error("effective_reflectivity: overshoot below 0");
        return 0.0;
    }
    if (v_eff > 1.0) {
        if (v_eff > 1.0 + 1e-12) throw std::runtime_error("effective_reflectivity: overshoot above 1");
        return 1.0;
    }
    return v_eff;
}

ReachablePhase reachable_phase(double v, double w, double target) {
    if (target < 0.0 || target > 1.0)
        throw std::invalid_argument("reachable_phase: target must lie in [0,1]");
    if (v < 0.0 || v > 1.0 || w < 0.0 || w > 1.0)
        throw std::invalid_argument("reachable_phase: v, w must lie in [0,1]");

    const double offset = v * w + (1.0 - v) * (1.0 - w);
    const double amp = 2.0 * std::sqrt(v * (1.0 - v) * w * (1.0 - w));

    ReachablePhase out;
    out.attainable_min = std::max(offset - amp, 0.0);
    out.attainable_max = std::min(offset + amp, 1.0);
    if (amp == 0.0) {
        // Degenerate splitter: v_eff is constant.
        out.reachable = std::abs(offset - target) < 1e-12;
        out.phase = 0.0;
        return out;
    }
    const double c = (target - offset) / amp;
    if (std::abs(c) <= 1.0 + 1e-12) {
        out.reachable = true;
        out.phase = std::acos(std::clamp(c, -1.0, 1.0));
    }
    return out;
}

ReachabilityMap reachability_map(double target, const Eigen::VectorXd& v_grid,
                                 const Eigen::VectorXd& w_grid) {
    ReachabilityMap m;
    m.target = target;
    m.v_grid = v_grid;
    m.w_grid = w_grid;
    m.phases.resize(v_grid.size(), w_grid.size());
    for (Eigen::Index i = 0; i < v_grid.size(); ++i)
        for (Eigen::Index j = 0; j < w_grid.size(); ++j) {
            const ReachablePhase r = reachable_phase(v_grid(i), w_grid(j), target);
            m.phases(i, j) = r.reachable ? r.phase : std::numeric_limits<double>::quiet_NaN();
        }
    return m;
}

namespace {

struct FringeParams {
    double offset, amplitude, phi0, kappa;
};

double fringe_model(const FringeParams& p, double power) {
    return p.offset + p.amplitude * std::cos(p.phi0 + p.kappa * power);
}

double weighted_sse(const FringeParams& p, const std::vector<FringeSample>& samples) {
    double sse = 0.0;
    for (const auto& s : samples) {
        const double sigma = s.stderr_v > 0 ? s.stderr_v : 1.0;
        const double r = (fringe_model(p, s.power_w) - s.v_eff) / sigma;
        sse += r * r;
    }
    return sse;
}

/// Linear WLS of y = offset + a*cos(kappa*P) + b*sin(kappa*P) at fixed kappa.
FringeParams linear_solve_at_kappa(double kappa, const std::vector<FringeSample>& samples) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (const auto& s : samples) {
        const double sigma = s.stderr_v > 0 ? s.stderr_v : 1.0;
        const double wgt = 1.0 / (sigma * sigma);
        Eigen::Vector3d row(1.0, std::cos(kappa * s.power_w), std::sin(kappa * s.power_w));
        ata += wgt * row * row.transpose();
        atb += wgt * row * s.v_eff;
    }
    const Eigen::Vector3d sol = ata.ldlt().solve(atb);
    FringeParams p;
    p.offset = sol(0);
    p.amplitude = std::hypot(sol(1), sol(2));
    p.phi0 = std::atan2(-sol(2), sol(1));
    p.kappa = kappa;
    return p;
}

void canonicalize(FringeParams& p) {
    if (p.amplitude < 0.0) {
        p.amplitude = -p.amplitude;
        p.phi0 += kPi;
    }
    if (p.kappa < 0.0) {
        p.kappa = -p.kappa;
        p.phi0 = -p.phi0;
    }
    p.phi0 = std::fmod(p.phi0, 2.0 * kPi);
    if (p.phi0 < 0.0) p.phi0 += 2.0 * kPi;
}

}  // namespace

MziModel fit_fringe(const std::vector<FringeSample>& samples, const FringeFitOptions& opts) {
    if (samples.size() < 5) throw std::invalid_argument("fit_fringe: need at least 5 samples");
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j)
            if (samples[i].power_w == samples[j].power_w)
                throw std::invalid_argument("fit_fringe: duplicate power value " +
                                            std::to_string(samples[i].power_w));

    double ymin = samples[0].v_eff, ymax = samples[0].v_eff;
    for (const auto& s : samples) {
        ymin = std::min(ymin, s.v_eff);
        ymax = std::max(ymax, s.v_eff);
    }
    if (ymax - ymin < 1e-12) throw std::runtime_error("fit_fringe: constant data, degenerate fit");

    // Initialisation: scan kappa, solving the conditionally linear parameters.
    FringeParams best{};
    double best_sse = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= opts.kappa_scan; ++k) {
        const double kappa =
            opts.kappa_min + (opts.kappa_max - opts.kappa_min) * k / static_cast<double>(opts.kappa_scan);
        const FringeParams p = linear_solve_at_kappa(kappa, samples);
        const double sse = weighted_sse(p, samples);
        if (sse < best_sse) {
            best_sse = sse;
            best = p;
        }
    }

    // Levenberg-Marquardt refinement over all four parameters.
    FringeParams p = best;
    double lambda = 1e-3;
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
        Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
        for (const auto& s : samples) {
            const double sigma = s.stderr_v > 0 ? s.stderr_v : 1.0;
            const double arg = p.phi0 + p.kappa * s.power_w;
            const double r = (fringe_model(p, s.power_w) - s.v_eff) / sigma;
            Eigen::Vector4d j;
            j << 1.0 / sigma, std::cos(arg) / sigma, -p.amplitude * std::sin(arg) / sigma,
                -p.amplitude * std::sin(arg) * s.power_w / sigma;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        const Eigen::Vector4d step =
            (jtj + lambda * Eigen::Matrix4d(jtj.diagonal().asDiagonal())).ldlt().solve(-jtr);
        FringeParams trial = p;
        trial.offset += step(0);
        trial.amplitude += step(1);
        trial.phi0 += step(2);
        trial.kappa += step(3);
        const double sse_p = weighted_sse(p, samples);
        const double sse_t = weighted_sse(trial, samples);
        if (sse_t < sse_p) {
            p = trial;
            lambda = std::max(lambda * 0.5, 1e-12);
            if (sse_p - sse_t < 1e-14 * (1.0 + sse_p) && step.norm() < 1e-10) {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e10) {
                converged = true;  // no further progress possible
                break;
            }
        }
    }
    canonicalize(p);

    if (p.amplitude < 1e-12) throw std::runtime_error("fit_fringe: vanishing fringe amplitude, degenerate fit");

    // Recover {v, w} from offset C and amplitude A:
    //   (v + w - 1)^2 = C^2 - A^2,  vw = (C + (v+w) - 1) / 2.
    const double c = std::clamp(p.offset, 0.0, 1.0);
    const double a = std::min(p.amplitude, c);
    const double disc_s = std::max(c * c - a * a, 0.0);
    const double s = 1.0 - std::sqrt(disc_s);  // canonical branch: v + w <= 1
    const double prod = (c + s - 1.0) / 2.0;
    const double disc_vw = std::max(s * s - 4.0 * prod, 0.0);

    MziModel model;
    model.v = std::clamp(0.5 * (s - std::sqrt(disc_vw)), 0.0, 1.0);
    model.w = std::clamp(0.5 * (s + std::sqrt(disc_vw)), 0.0, 1.0);
    model.phi0 = p.phi0;
    model.kappa = p.kappa;
    model.exchange_ambiguous = true;
    model.converged = converged;

    double sse = 0.0;
    for (const auto& s2 : samples) {
        const double r = fringe_model(p, s2.power_w) - s2.v_eff;
        sse += r * r;
    }
    model.residual_rms = std::sqrt(sse / static_cast<double>(samples.size()));
    return model;
}

}  // namespace phos
