#include "phos/fock.hpp"

#include <algorithm>
#include <cmath>

namespace phos {

namespace {

void enumerate_sector(int n_modes, int remaining, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
    const int mode = static_cast<int>(cur.size());
    if (mode == n_modes - 1) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int n = 0; n <= remaining; ++n) {
        cur.push_back(n);
        enumerate_sector(n_modes, remaining - n, cur, out);
        cur.pop_back();
    }
}

}  // namespace

FockBasis::FockBasis(int n_modes, int max_total) : n_modes_(n_modes), max_total_(max_total) {}

std::shared_ptr<const FockBasis> FockBasis::enumerate(int n_modes, int max_total_photons) {
    if (n_modes < 1) throw std::invalid_argument("FockBasis: need at least one mode");
    if (max_total_photons < 0) throw std::invalid_argument("FockBasis: negative photon cap");

    auto basis = std::shared_ptr<FockBasis>(new FockBasis(n_modes, max_total_photons));
    for (int total = 0; total <= max_total_photons; ++total) {
        const auto first = static_cast<Eigen::Index>(basis->states_.size());
        std::vector<int> cur;
        std::vector<std::vector<int>> sector;
        enumerate_sector(n_modes, total, cur, sector);
        std::sort(sector.begin(), sector.end());
        for (auto& occ : sector) basis->states_.push_back(std::move(occ));
        basis->sectors_.emplace_back(first, static_cast<Eigen::Index>(basis->states_.size()));
    }
    for (Eigen::Index i = 0; i < basis->size(); ++i)
        basis->index_[basis->states_[static_cast<std::size_t>(i)]] = i;
    return basis;
}

int FockBasis::total_photons(Eigen::Index i) const {
    const auto& occ = occupation(i);
    int t = 0;
    for (int n : occ) t += n;
    return t;
}

Eigen::Index FockBasis::index_of(std::span<const int> occ) const {
    std::vector<int> key(occ.begin(), occ.end());
    auto it = index_.find(key);
    if (it == index_.end()) throw std::out_of_range("FockBasis: occupation outside basis");
    return it->second;
}

bool FockBasis::contains(std::span<const int> occ) const {
    std::vector<int> key(occ.begin(), occ.end());
    return index_.find(key) != index_.end();
}

std::pair<Eigen::Index, Eigen::Index> FockBasis::sector_range(int total) const {
    if (total < 0 || total > max_total_) throw std::out_of_range("FockBasis: sector outside truncation");
    return sectors_[static_cast<std::size_t>(total)];
}

PureState PureState::fock(const BasisPtr& basis, std::span<const int> occ) {
    PureState psi;
    psi.basis = basis;
    psi.amplitudes = Eigen::VectorXcd::Zero(basis->size());
    psi.amplitudes(basis->index_of(occ)) = 1.0;
    return psi;
}

void PureState::normalize() {
    const double n = amplitudes.norm();
    if (n <= 0.0) throw std::runtime_error("PureState: zero norm");
    amplitudes /= n;
}

DensityOperator DensityOperator::from_pure(const PureState& psi) {
    DensityOperator rho;
    rho.basis = psi.basis;
    rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
    return rho;
}

void DensityOperator::validate(double herm_tol, double trace_tol, double eig_tol) const {
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
        throw std::runtime_error("DensityOperator: not Hermitian");
    if (std::abs(matrix.trace().real() - 1.0) > trace_tol || std::abs(matrix.trace().imag()) > trace_tol)
        throw std::runtime_error("DensityOperator: trace != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -eig_tol)
        throw std::runtime_error("DensityOperator: negative eigenvalue");
}

// --- operators --------------------------------------------------------------

namespace {

/// Two-mode block of exp(-2i*theta*Jx) in the sector with t photons,
/// basis |k photons in a, t-k in b>, k = 0..t.
Eigen::MatrixXcd beam_splitter_block(int t, double theta) {
    Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(t + 1, t + 1);
    for (int k = 0; k < t; ++k) {
        // <k+1, t-k-1| Jx |k, t-k> = sqrt((k+1)(t-k)) / 2
        const double c = 0.5 * std::sqrt(static_cast<double>((k + 1) * (t - k)));
        jx(k + 1, k) = c;
        jx(k, k + 1) = c;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jx);
    const Eigen::VectorXd& ev = es.eigenvalues();
    Eigen::VectorXcd phases(t + 1);
    for (int k = 0; k <= t; ++k) phases(k) = std::exp(Complex(0.0, -2.0 * theta * ev(k)));
    return es.eigenvectors().cast<Complex>() * phases.asDiagonal() *
           es.eigenvectors().transpose().cast<Complex>();
}

void check_mode(const FockBasis& basis, int mode) {
    if (mode < 0 || mode >= basis.n_modes()) throw std::out_of_range("mode index outside basis");
}

}  // namespace

SparseOp beam_splitter_matrix(const FockBasis& basis, int mode_a, int mode_b, double theta) {
    check_mode(basis, mode_a);
    check_mode(basis, mode_b);
    if (mode_a == mode_b) throw std::invalid_argument("beam splitter needs two distinct modes");

    std::vector<Eigen::MatrixXcd> blocks;
    for (int t = 0; t <= basis.max_total_photons(); ++t) blocks.push_back(beam_splitter_block(t, theta));

    std::vector<Eigen::Triplet<Complex>> trip;
    std::vector<int> occ;
    for (Eigen::Index col = 0; col < basis.size(); ++col) {
        occ = basis.occupation(col);
        const int k = occ[static_cast<std::size_t>(mode_a)];
        const int t = k + occ[static_cast<std::size_t>(mode_b)];
        for (int kp = 0; kp <= t; ++kp) {
            const Complex c = blocks[static_cast<std::size_t>(t)](kp, k);
            if (std::abs(c) < 1e-300) continue;
            occ[static_cast<std::size_t>(mode_a)] = kp;
            occ[static_cast<std::size_t>(mode_b)] = t - kp;
            trip.emplace_back(static_cast<int>(basis.index_of(occ)), static_cast<int>(col), c);
        }
        occ[static_cast<std::size_t>(mode_a)] = k;
        occ[static_cast<std::size_t>(mode_b)] = t - k;
    }
    SparseOp u(basis.size(), basis.size());
    u.setFromTriplets(trip.begin(), trip.end());
    return u;
}

SparseOp phase_shifter_matrix(const FockBasis& basis, int mode, double phi) {
    check_mode(basis, mode);
    std::vector<Eigen::Triplet<Complex>> trip;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const int n = basis.occupation(i)[static_cast<std::size_t>(mode)];
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), std::exp(Complex(0.0, phi * n)));
    }
    SparseOp u(basis.size(), basis.size());
    u.setFromTriplets(trip.begin(), trip.end());
    return u;
}

SparseOp circuit_unitary(const FockBasis& basis, const Circuit& circuit) {
    SparseOp u(basis.size(), basis.size());
    u.setIdentity();
    for (const auto& el : circuit.elements) {
        if (std::holds_alternative<Loss>(el))
            throw std::invalid_argument("circuit_unitary: Loss is not unitary; dilate it first");
        if (const auto* bs = std::get_if<BeamSplitter>(&el))
            u = (beam_splitter_matrix(basis, bs->mode_a, bs->mode_b, bs->theta) * u).eval();
        else if (const auto* ps = std::get_if<PhaseShifter>(&el))
            u = (phase_shifter_matrix(basis, ps->mode, ps->phi) * u).eval();
    }
    return u;
}

namespace {

double loss_theta(double eta) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("loss transmissivity outside [0,1]");
    return std::asin(std::sqrt(1.0 - eta));
}

void check_ancilla_vacuum(const DensityOperator& rho, int mode) {
    double pop = 0.0;
    for (Eigen::Index i = 0; i < rho.basis->size(); ++i)
        pop += rho.basis->occupation(i)[static_cast<std::size_t>(mode)] * rho.matrix(i, i).real();
    if (std::abs(pop) > 1e-10) throw std::runtime_error("loss ancilla is not vacuum");
}

}  // namespace

DensityOperator apply_circuit(const DensityOperator& rho_in, const Circuit& circuit) {
    DensityOperator rho = rho_in;
    for (const auto& el : circuit.elements) {
        if (const auto* bs = std::get_if<BeamSplitter>(&el)) {
            SparseOp u = beam_splitter_matrix(*rho.basis, bs->mode_a, bs->mode_b, bs->theta);
            rho.matrix = u * rho.matrix * u.adjoint();
        } else if (const auto* ps = std::get_if<PhaseShifter>(&el)) {
            SparseOp u = phase_shifter_matrix(*rho.basis, ps->mode, ps->phi);
            rho.matrix = u * rho.matrix * u.adjoint();
        } else if (const auto* loss = std::get_if<Loss>(&el)) {
            const double th = loss_theta(loss->eta);
            if (loss->ancilla_mode >= 0) {
                check_mode(*rho.basis, loss->ancilla_mode);
                check_ancilla_vacuum(rho, loss->ancilla_mode);
                SparseOp u = beam_splitter_matrix(*rho.basis, loss->mode, loss->ancilla_mode, th);
                rho.matrix = u * rho.matrix * u.adjoint();
            } else {
                const int scratch = rho.basis->n_modes();
                DensityOperator big = embed_with_vacuum_modes(rho, 1, rho.basis->max_total_photons());
                SparseOp u = beam_splitter_matrix(*big.basis, loss->mode, scratch, th);
                big.matrix = u * big.matrix * u.adjoint();
                const int traced[] = {scratch};
                rho = partial_trace(big, traced);
            }
        }
    }
    return rho;
}

DensityOperator apply_circuit(const PureState& psi, const Circuit& circuit) {
    return apply_circuit(DensityOperator::from_pure(psi), circuit);
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> modes_to_trace) {
    const FockBasis& basis = *rho.basis;
    std::vector<bool> traced(static_cast<std::size_t>(basis.n_modes()), false);
    for (int m : modes_to_trace) {
        check_mode(basis, m);
        traced[static_cast<std::size_t>(m)] = true;
    }
    const int n_kept = basis.n_modes() - static_cast<int>(modes_to_trace.size());

    if (n_kept == 0) {
        // Degenerate form: the scalar trace on the single-mode vacuum basis.
        DensityOperator out;
        out.basis = FockBasis::enumerate(1, 0);
        out.matrix = Eigen::MatrixXcd::Constant(1, 1, rho.matrix.trace());
        return out;
    }

    auto reduced = FockBasis::enumerate(n_kept, basis.max_total_photons());

    // Precompute per-full-index: kept-basis index and traced occupation key.
    std::vector<Eigen::Index> kept_index(static_cast<std::size_t>(basis.size()));
    std::vector<std::vector<int>> traced_occ(static_cast<std::size_t>(basis.size()));
    std::vector<int> kept, rest;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        kept.clear();
        rest.clear();
        const auto& occ = basis.occupation(i);
        for (int m = 0; m < basis.n_modes(); ++m)
            (traced[static_cast<std::size_t>(m)] ? rest : kept).push_back(occ[static_cast<std::size_t>(m)]);
        kept_index[static_cast<std::size_t>(i)] = reduced->index_of(kept);
        traced_occ[static_cast<std::size_t>(i)] = rest;
    }

    DensityOperator out;
    out.basis = reduced;
    out.matrix = Eigen::MatrixXcd::Zero(reduced->size(), reduced->size());
    for (Eigen::Index i = 0; i < basis.size(); ++i)
        for (Eigen::Index j = 0; j < basis.size(); ++j)
            if (traced_occ[static_cast<std::size_t>(i)] == traced_occ[static_cast<std::size_t>(j)])
                out.matrix(kept_index[static_cast<std::size_t>(i)], kept_index[static_cast<std::size_t>(j)]) +=
                    rho.matrix(i, j);
    return out;
}

DensityOperator embed_with_vacuum_modes(const DensityOperator& rho, int extra_modes, int max_total_photons) {
    auto big = FockBasis::enumerate(rho.basis->n_modes() + extra_modes, max_total_photons);
    std::vector<Eigen::Index> map(static_cast<std::size_t>(rho.basis->size()));
    std::vector<int> occ;
    for (Eigen::Index i = 0; i < rho.basis->size(); ++i) {
        occ = rho.basis->occupation(i);
        occ.resize(static_cast<std::size_t>(big->n_modes()), 0);
        map[static_cast<std::size_t>(i)] = big->index_of(occ);
    }
    DensityOperator out;
    out.basis = big;
    out.matrix = Eigen::MatrixXcd::Zero(big->size(), big->size());
    for (Eigen::Index i = 0; i < rho.basis->size(); ++i)
        for (Eigen::Index j = 0; j < rho.basis->size(); ++j)
            out.matrix(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]) = rho.matrix(i, j);
    return out;
}

SchwingerOperators schwinger_operators(const FockBasis& basis) {
    if (basis.n_modes() != 2) throw std::invalid_argument("schwinger_operators: two-mode basis required");

    std::vector<Eigen::Triplet<Complex>> tx, ty, tz;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const auto& occ = basis.occupation(i);
        const int na = occ[0], nb = occ[1];
        tz.emplace_back(static_cast<int>(i), static_cast<int>(i), Complex(0.5 * (na - nb), 0.0));
        if (nb > 0) {
            // a^dag b |na, nb> = sqrt((na+1) nb) |na+1, nb-1>
            const int up[] = {na + 1, nb - 1};
            const double c = 0.5 * std::sqrt(static_cast<double>((na + 1) * nb));
            const int row = static_cast<int>(basis.index_of(up));
            tx.emplace_back(row, static_cast<int>(i), Complex(c, 0.0));
            ty.emplace_back(row, static_cast<int>(i), Complex(0.0, -c));
        }
        if (na > 0) {
            const int dn[] = {na - 1, nb + 1};
            const double c = 0.5 * std::sqrt(static_cast<double>(na * (nb + 1)));
            const int row = static_cast<int>(basis.index_of(dn));
            tx.emplace_back(row, static_cast<int>(i), Complex(c, 0.0));
            ty.emplace_back(row, static_cast<int>(i), Complex(0.0, c));
        }
    }
    SchwingerOperators ops;
    ops.jx.resize(basis.size(), basis.size());
    ops.jy.resize(basis.size(), basis.size());
    ops.jz.resize(basis.size(), basis.size());
    ops.jx.setFromTriplets(tx.begin(), tx.end());
    ops.jy.setFromTriplets(ty.begin(), ty.end());
    ops.jz.setFromTriplets(tz.begin(), tz.end());
    ops.j_squared = (ops.jx * ops.jx + ops.jy * ops.jy + ops.jz * ops.jz).pruned(1e-15);
    return ops;
}

}  // namespace phos
