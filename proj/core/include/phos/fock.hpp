#pragma once

#include <complex>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace phos {

using Complex = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<Complex>;

/// Truncated multimode Fock basis: all occupation vectors (n_1,...,n_m)
/// with sum(n_i) <= max_total_photons, ordered sector-major (total photon
/// number ascending) and lexicographically within each sector.
class FockBasis {
public:
    static std::shared_ptr<const FockBasis> enumerate(int n_modes, int max_total_photons);

    int n_modes() const { return n_modes_; }
    int max_total_photons() const { return max_total_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(states_.size()); }

    const std::vector<int>& occupation(Eigen::Index i) const { return states_.at(static_cast<std::size_t>(i)); }
    int total_photons(Eigen::Index i) const;

    /// Dense index of an occupation vector; throws if outside the basis.
    Eigen::Index index_of(std::span<const int> occ) const;
    bool contains(std::span<const int> occ) const;

    /// Half-open index range [first, last) of the given total-photon sector.
    std::pair<Eigen::Index, Eigen::Index> sector_range(int total) const;

private:
    FockBasis(int n_modes, int max_total);
    int n_modes_;
    int max_total_;
    std::vector<std::vector<int>> states_;
    std::map<std::vector<int>, Eigen::Index> index_;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> sectors_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

struct PureState {
    BasisPtr basis;
    Eigen::VectorXcd amplitudes;

    static PureState fock(const BasisPtr& basis, std::span<const int> occ);
    double norm() const { return amplitudes.norm(); }
    void normalize();
};

struct DensityOperator {
    BasisPtr basis;
    Eigen::MatrixXcd matrix;

    static DensityOperator from_pure(const PureState& psi);
    double trace() const { return matrix.trace().real(); }
    double purity() const { return (matrix * matrix).trace().real(); }

    /// Throws if the matrix is not Hermitian / trace-one / positive
    /// within the stated tolerances.
    void validate(double herm_tol = 1e-12, double trace_tol = 1e-12, double eig_tol = 1e-10) const;
};

// --- circuit elements -------------------------------------------------------

struct BeamSplitter {
    int mode_a;
    int mode_b;
    double theta;  // power splitting ratio v = sin^2(theta)
};

struct PhaseShifter {
    int mode;
    double phi;  // applies exp(i*phi*n) on the mode
};

struct Loss {
    int mode;
    double eta;            // transmissivity in [0,1]
    int ancilla_mode = -1; // -1: internal scratch ancilla, traced out immediately
};

using CircuitElement = std::variant<BeamSplitter, PhaseShifter, Loss>;

struct Circuit {
    std::vector<CircuitElement> elements;
    /// Modes that act only as loss ancillae (must stay vacuum until used).
    std::vector<int> ancilla_modes;

    Circuit& bs(int a, int b, double theta) { elements.push_back(BeamSplitter{a, b, theta}); return *this; }
    Circuit& phase(int mode, double phi) { elements.push_back(PhaseShifter{mode, phi}); return *this; }
    Circuit& loss(int mode, double eta, int ancilla = -1) { elements.push_back(Loss{mode, eta, ancilla}); return *this; }
};

// --- operators --------------------------------------------------------------

/// B(theta) = exp(-2i*theta*Jx) on modes (a, b), block-diagonal per
/// photon-number sector. sin^2(theta) is the power-splitting parameter v.
SparseOp beam_splitter_matrix(const FockBasis& basis, int mode_a, int mode_b, double theta);

/// exp(i*phi*n) on a single mode (diagonal).
SparseOp phase_shifter_matrix(const FockBasis& basis, int mode, double phi);

/// Unitary of a loss-free circuit (throws on Loss elements).
SparseOp circuit_unitary(const FockBasis& basis, const Circuit& circuit);

/// Applies the circuit in element order. Loss with ancilla_mode = -1 is
/// realised by a beam splitter with sin^2(theta) = 1 - eta onto a scratch
/// vacuum ancilla followed by a partial trace over it; Loss with an explicit
/// ancilla mode acts as a beam splitter onto that (vacuum-checked) mode and
/// the mode is kept.
DensityOperator apply_circuit(const DensityOperator& rho, const Circuit& circuit);
DensityOperator apply_circuit(const PureState& psi, const Circuit& circuit);

/// Reduced operator over the modes not listed in modes_to_trace.
/// Tracing every mode returns the scalar trace as a 1x1 operator on the
/// single-mode vacuum basis (degenerate form).
DensityOperator partial_trace(const DensityOperator& rho, std::span<const int> modes_to_trace);

/// Embeds rho on extra vacuum modes appended after the existing ones.
DensityOperator embed_with_vacuum_modes(const DensityOperator& rho, int extra_modes, int max_total_photons);

struct SchwingerOperators {
    SparseOp jx, jy, jz, j_squared;
};

/// Two-mode angular momentum operators Jx = (a^dag b + a b^dag)/2, etc.
SchwingerOperators schwinger_operators(const FockBasis& basis);

}  // namespace phos
