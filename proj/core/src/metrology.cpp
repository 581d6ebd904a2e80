#include "phos/metrology.hpp"

#include <cmath>
#include <numbers>

namespace phos {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::string to_string(PhaseConvention c) {
    return c == PhaseConvention::DifferentialJz ? "jz" : "single-arm";
}

Eigen::MatrixXcd phase_generator(const FockBasis& basis, PhaseConvention convention) {
    if (basis.n_modes() != 2) throw std::invalid_argument("phase_generator: two-mode basis required");
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(basis.size(), basis.size());
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const auto& occ = basis.occupation(i);
        g(i, i) = convention == PhaseConvention::DifferentialJz ? 0.5 * (occ[0] - occ[1])
                                                                : static_cast<double>(occ[0]);
    }
    return g;
}

Circuit phase_elements(PhaseConvention convention, double phi) {
    Circuit c;
    if (convention == PhaseConvention::DifferentialJz) {
        c.phase(0, 0.5 * phi).phase(1, -0.5 * phi);
    } else {
        c.phase(0, phi);
    }
    return c;
}

DensityOperator PhaseChannel::evolve(const DensityOperator& input, double phi) const {
    DensityOperator rho = apply_circuit(input, pre);
    rho = apply_circuit(rho, phase_elements(convention, phi));
    return apply_circuit(rho, post);
}

Eigen::VectorXd outcome_distribution(const DensityOperator& rho,
                                     const std::vector<Eigen::MatrixXcd>& povm) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(povm.size()));
    for (std::size_t g = 0; g < povm.size(); ++g) {
        if (povm[g].rows() != rho.matrix.rows())
            throw std::invalid_argument("outcome_distribution: POVM dimension mismatch");
        const double pg = (rho.matrix * povm[g]).trace().real();
        if (pg < -1e-12) throw std::runtime_error("outcome_distribution: negative probability");
        p(static_cast<Eigen::Index>(g)) = std::max(pg, 0.0);
    }
    return p;
}

double classical_fisher_information(const std::function<Eigen::VectorXd(double)>& probabilities,
                                    double phi, const FisherOptions& opts) {
    const double h = opts.step;
    const Eigen::VectorXd p0 = probabilities(phi);
    const Eigen::VectorXd d_h = (probabilities(phi + h) - probabilities(phi - h)) / (2.0 * h);
    const Eigen::VectorXd d_h2 = (probabilities(phi + 0.5 * h) - probabilities(phi - 0.5 * h)) / h;
    const Eigen::VectorXd deriv = (4.0 * d_h2 - d_h) / 3.0;  // Richardson extrapolation

    double fi = 0.0;
    for (Eigen::Index g = 0; g < p0.size(); ++g)
        if (p0(g) > opts.p_floor) fi += deriv(g) * deriv(g) / p0(g);
    if (!std::isfinite(fi))
        throw std::runtime_error("classical_fisher_information: non-finite result; check step/p_floor");
    return fi;
}

double classical_fisher_information(const PhaseChannel& channel, const DensityOperator& input,
                                    const std::vector<Eigen::MatrixXcd>& povm, double phi,
                                    const FisherOptions& opts) {
    auto probs = [&](double x) { return outcome_distribution(channel.evolve(input, x), povm); };
    return classical_fisher_information(probs, phi, opts);
}

namespace {

double qfi_matrices(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const Eigen::VectorXd& p = es.eigenvalues();
    const Eigen::MatrixXcd d = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    double fq = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j)
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            const double denom = p(j) + p(k);
            if (denom > floor) fq += 2.0 * std::norm(d(j, k)) / denom;
        }
    return fq;
}

}  // namespace

double quantum_fisher_information(const DensityOperator& rho, const Eigen::MatrixXcd& drho,
                                  double eigen_floor) {
    if ((rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("quantum_fisher_information: non-Hermitian state");
    return qfi_matrices(rho.matrix, drho, eigen_floor);
}

double qfi_from_generator(const DensityOperator& rho, const Eigen::MatrixXcd& generator,
                          double eigen_floor) {
    const Eigen::MatrixXcd drho =
        Complex(0.0, 1.0) * (generator * rho.matrix - rho.matrix * generator);
    return quantum_fisher_information(rho, drho, eigen_floor);
}

PrecisionBounds precision_bounds(double trials, double photons, double eta, double eta_d,
                                 double fisher, double quantum_fisher) {
    if (trials < 1.0) throw std::invalid_argument("precision_bounds: need at least one trial");
    if (eta <= 0.0 || eta > 1.0 || eta_d <= 0.0 || eta_d > 1.0)
        throw std::invalid_argument("precision_bounds: transmissivities must lie in (0,1]");
    if (fisher < 0.0 || quantum_fisher < 0.0)
        throw std::invalid_argument("precision_bounds: negative Fisher information");

    const double inf = std::numeric_limits<double>::infinity();
    PrecisionBounds b;
    b.trials = trials;
    b.photons = photons;
    b.eta = eta;
    b.eta_d = eta_d;
    b.sql = 1.0 / std::sqrt(trials * photons);
    b.hl = 1.0 / (std::sqrt(trials) * photons);
    b.sil = 1.0 / std::sqrt(trials * eta * eta_d * photons);
    b.crb = fisher > 0.0 ? 1.0 / std::sqrt(trials * fisher) : inf;
    b.qcrb = quantum_fisher > 0.0 ? 1.0 / std::sqrt(trials * quantum_fisher) : inf;
    return b;
}

EffectivePhaseAxis effective_phase_axis(double theta) {
    return {std::cos(2.0 * theta), -std::sin(2.0 * theta), std::sin(2.0 * theta)};
}

double effective_phase_axis_deviation(const FockBasis& basis, double theta, double phi) {
    const SchwingerOperators j = schwinger_operators(basis);
    const SparseOp b = beam_splitter_matrix(basis, 0, 1, theta);
    const Eigen::MatrixXcd p = circuit_unitary(basis, phase_elements(PhaseConvention::DifferentialJz, phi));
    const Eigen::MatrixXcd lhs = Eigen::MatrixXcd(b) * p * Eigen::MatrixXcd(b).adjoint();

    const EffectivePhaseAxis ax = effective_phase_axis(theta);
    const Eigen::MatrixXcd gen =
        ax.jz_coefficient * Eigen::MatrixXcd(j.jz) + ax.jy_coefficient * Eigen::MatrixXcd(j.jy);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gen);
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::exp(Complex(0.0, phi * es.eigenvalues()(k)));
    const Eigen::MatrixXcd rhs = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

std::pair<double, double> maximize_over_phase(const std::function<double(double)>& f,
                                              const PhaseScanOptions& opts) {
    double best_phi = 0.0, best = -std::numeric_limits<double>::infinity();
    const double dphi = kTwoPi / opts.scan_points;
    for (int i = 0; i < opts.scan_points; ++i) {
        const double phi = i * dphi;
        const double v = f(phi);
        if (v > best) {
            best = v;
            best_phi = phi;
        }
    }
    // Golden-section refinement around the best scan point.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = best_phi - dphi, b = best_phi + dphi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > opts.refine_tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    const double phi = 0.5 * (a + b);
    return {phi, f(phi)};
}

FisherSurface fisher_surface(const Eigen::VectorXd& v_grid, const Eigen::VectorXd& w_grid,
                             PhaseConvention convention, const PhaseScanOptions& opts) {
    auto basis = FockBasis::enumerate(2, 2);
    const int occ_in[] = {1, 1};
    const Eigen::Index idx11 = basis->index_of(occ_in);
    Eigen::VectorXd gen(basis->size());
    for (Eigen::Index k = 0; k < basis->size(); ++k) {
        const auto& occ = basis->occupation(k);
        gen(k) = convention == PhaseConvention::DifferentialJz ? 0.5 * (occ[0] - occ[1])
                                                               : static_cast<double>(occ[0]);
    }

    FisherSurface s;
    s.v_grid = v_grid;
    s.w_grid = w_grid;
    s.outcome_descriptor = "binary {|1,1><1,1|, complement}";
    s.values.resize(v_grid.size(), w_grid.size());

    for (Eigen::Index i = 0; i < v_grid.size(); ++i) {
        const Eigen::MatrixXcd bv = beam_splitter_matrix(*basis, 0, 1, std::asin(std::sqrt(v_grid(i))));
        const Eigen::VectorXcd x = bv.col(idx11);
        for (Eigen::Index j = 0; j < w_grid.size(); ++j) {
            const Eigen::MatrixXcd bw =
                beam_splitter_matrix(*basis, 0, 1, std::asin(std::sqrt(w_grid(j))));
            const Eigen::VectorXcd y = bw.adjoint().col(idx11).conjugate();  // row <11| Bw
            auto probs = [&](double phi) {
                Complex amp = 0.0;
                for (Eigen::Index k = 0; k < x.size(); ++k)
                    amp += y(k) * std::exp(Complex(0.0, phi * gen(k))) * x(k);
                const double p = std::norm(amp);
                Eigen::VectorXd out(2);
                out << p, 1.0 - p;
                return out;
            };
            auto fi = [&](double phi) { return classical_fisher_information(probs, phi); };
            s.values(i, j) = maximize_over_phase(fi, opts).second;
        }
    }
    return s;
}

double hb_network_qfi(int n, double eta_p, double input_splitting, double eta, double eta_d,
                      PhaseConvention convention) {
    if (n < 1) throw std::invalid_argument("hb_network_qfi: N >= 1 required");
    auto basis = FockBasis::enumerate(2, 2 * n);
    std::vector<int> occ = {n, n};
    const PureState input = PureState::fock(basis, occ);

    Circuit net;
    net.loss(0, eta_p).loss(1, eta_p);
    net.bs(0, 1, std::asin(std::sqrt(input_splitting)));
    const double t = eta * eta_d;  // detection loss folded into the arm
    net.loss(0, t).loss(1, t);

    const DensityOperator rho = apply_circuit(input, net);
    return qfi_from_generator(rho, phase_generator(*basis, convention));
}

HbThreshold hb_loss_threshold(int n, double eta, double eta_d, PhaseConvention convention,
                              double tol) {
    HbThreshold out;
    out.n = n;
    out.convention = convention;
    const double classical_photons = 2.0 * n;  // total photons of the probe
    out.sil = 1.0 / std::sqrt(eta * eta_d * classical_photons);
    const double target = eta * eta_d * classical_photons;  // QCRB <= SIL iff F_Q >= target

    auto qfi = [&](double eta_p) { return hb_network_qfi(n, eta_p, 0.5, eta, eta_d, convention); };
    if (qfi(1.0) < target) {
        out.found = false;
        return out;
    }
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (qfi(mid) >= target ? hi : lo) = mid;
    }
    out.found = true;
    out.eta_p = hi;
    out.qcrb_at_threshold = 1.0 / std::sqrt(qfi(hi));
    return out;
}

NoonSensitivity noon_loss_sensitivity(int n, double eta) {
    if (n < 1) throw std::invalid_argument("noon_loss_sensitivity: N >= 1 required");
    auto basis = FockBasis::enumerate(2, n);
    PureState noon;
    noon.basis = basis;
    noon.amplitudes = Eigen::VectorXcd::Zero(basis->size());
    std::vector<int> occ = {n, 0};
    noon.amplitudes(basis->index_of(occ)) = 1.0 / std::sqrt(2.0);
    occ = {0, n};
    noon.amplitudes(basis->index_of(occ)) = 1.0 / std::sqrt(2.0);

    Circuit net;
    net.loss(0, eta).loss(1, eta);
    const DensityOperator rho = apply_circuit(noon, net);
    const Eigen::MatrixXcd g = phase_generator(*basis, PhaseConvention::SingleArm);

    NoonSensitivity out;
    out.sector_qfi.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int t = 0; t <= n; ++t) {
        const auto [first, last] = basis->sector_range(t);
        const Eigen::Index dim = last - first;
        const Eigen::MatrixXcd block = rho.matrix.block(first, first, dim, dim);
        const double weight = block.trace().real();
        if (weight < 1e-14) continue;
        const Eigen::MatrixXcd gs = g.block(first, first, dim, dim);
        const Eigen::MatrixXcd rb = block / weight;
        const Eigen::MatrixXcd drb = Complex(0.0, 1.0) * (gs * rb - rb * gs);
        out.sector_qfi[static_cast<std::size_t>(t)] = weight * qfi_matrices(rb, drb, 1e-12);
    }
    for (double f : out.sector_qfi) out.total_qfi += f;
    return out;
}

}  // namespace phos
