#include "phos/tomography.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "phos/io.hpp"

namespace phos {

namespace {

constexpr double kPi = std::numbers::pi;

double loss_theta(double eta) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("loss transmissivity must lie in [0,1]");
    return std::asin(std::sqrt(1.0 - eta));
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Real parametrisation of the sector-block-diagonal Hermitian operators:
/// diagonal entries, then (re, im) of each upper-triangular entry inside a
/// photon-number sector.
struct BlockParametrization {
    struct Param {
        Eigen::Index i, j;  // i == j: diagonal; i < j: off-diagonal
        bool imaginary;     // off-diagonal only
    };
    std::vector<Param> params;

    explicit BlockParametrization(const FockBasis& basis) {
        for (int s = 0; s <= basis.max_total_photons(); ++s) {
            const auto [a, b] = basis.sector_range(s);
            for (Eigen::Index i = a; i < b; ++i) params.push_back({i, i, false});
            for (Eigen::Index i = a; i < b; ++i)
                for (Eigen::Index j = i + 1; j < b; ++j) {
                    params.push_back({i, j, false});
                    params.push_back({i, j, true});
                }
        }
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(params.size()); }

    /// Row such that tr(rho(x) Pi) = row . x.
    Eigen::RowVectorXd expectation_row(const Eigen::MatrixXcd& pi) const {
        Eigen::RowVectorXd row(size());
        for (Eigen::Index k = 0; k < size(); ++k) {
            const Param& p = params[static_cast<std::size_t>(k)];
            if (p.i == p.j)
                row(k) = pi(p.i, p.i).real();
            else
                row(k) = 2.0 * (p.imaginary ? pi(p.i, p.j).imag() : pi(p.i, p.j).real());
        }
        return row;
    }

    Eigen::MatrixXcd assemble(const Eigen::VectorXd& x, Eigen::Index dim) const {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        for (Eigen::Index k = 0; k < size(); ++k) {
            const Param& p = params[static_cast<std::size_t>(k)];
            if (p.i == p.j) {
                m(p.i, p.i) += x(k);
            } else if (p.imaginary) {
                m(p.i, p.j) += Complex(0, x(k));
                m(p.j, p.i) += Complex(0, -x(k));
            } else {
                m(p.i, p.j) += x(k);
                m(p.j, p.i) += x(k);
            }
        }
        return m;
    }
};

}  // namespace

std::vector<TomographySetting> default_settings() {
    // phi at odd multiples of pi/4: with phi on the pi/2 grid the design is
    // blind to the antisymmetric (|02><11| vs |11><20|) coherence direction
    // (rank 12 of 14); this grid has full rank with smallest singular value
    // ~0.6.
    std::vector<TomographySetting> out;
    int id = 1;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            out.push_back({id++, a * kPi / 4.0, (2 * b + 1) * kPi / 4.0});
    return out;
}

BasisPtr dilated_basis(int photon_cap) { return FockBasis::enumerate(kDilatedModes, photon_cap); }

BasisPtr conditioned_basis(int photon_cap) { return FockBasis::enumerate(2, photon_cap); }

Circuit dilated_circuit(const ApparatusConfig& c) {
    const double t = kPi / 4.0;  // 50:50
    Circuit circuit;
    circuit.ancilla_modes = {2, 3, 4, 5, 6, 7};
    circuit.bs(0, 2, loss_theta(c.eta[0]))
        .bs(1, 3, loss_theta(c.eta[1]))
        .phase(0, c.theta)
        .bs(0, 1, t)
        .bs(0, 4, loss_theta(c.eta[2]))
        .bs(1, 5, loss_theta(c.eta[3]))
        .phase(0, c.phi)
        .bs(0, 1, t)
        .bs(0, 6, loss_theta(c.eta[4]))
        .bs(1, 7, loss_theta(c.eta[5]))
        .bs(0, 8, t);
    return circuit;
}

OutputPovm build_output_povm(const FockBasis& basis) {
    if (basis.n_modes() != kDilatedModes)
        throw std::invalid_argument("build_output_povm: expects the 9-mode dilated basis");
    OutputPovm out;
    for (auto& d : out.diagonals) d = Eigen::VectorXd::Zero(basis.size());
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const auto& occ = basis.occupation(i);
        const bool d1 = occ[0] > 0, d2 = occ[8] > 0, d3 = occ[1] > 0;
        int gamma = -1;
        if (!d1 && !d2 && !d3)
            gamma = 0;  // no click
        else if ((d1 != d2) && !d3)
            gamma = 1;  // one of D1, D2
        else if (!d1 && !d2 && d3)
            gamma = 2;  // D3 alone
        else if (d1 && d2 && !d3)
            gamma = 3;  // D1 and D2
        else if ((d1 != d2) && d3)
            gamma = 4;  // (D1 or D2) and D3
        // Triple-coincidence patterns (>= 3 photons) have no outcome; the
        // five-element set is complete only up to two photons, which the
        // completeness check in simulate_counts enforces.
        if (gamma >= 0) out.diagonals[static_cast<std::size_t>(gamma)](i) = 1.0;
    }
    return out;
}

std::vector<Eigen::MatrixXcd> back_propagate_povm(const FockBasis& basis, const Circuit& circuit,
                                                  const OutputPovm& output) {
    const SparseOp u = circuit_unitary(basis, circuit);
    const Eigen::MatrixXcd ud = Eigen::MatrixXcd(u);
    std::vector<Eigen::MatrixXcd> povm;
    povm.reserve(kOutcomes);
    for (const auto& diag : output.diagonals)
        povm.push_back(ud.adjoint() * diag.asDiagonal() * ud);
    return povm;
}

std::vector<Eigen::MatrixXcd> condition_povm(const std::vector<Eigen::MatrixXcd>& input_povm,
                                             const FockBasis& full_basis,
                                             const FockBasis& cond_basis) {
    if (cond_basis.n_modes() != 2)
        throw std::invalid_argument("condition_povm: conditioned basis must have two modes");
    std::vector<Eigen::Index> map(static_cast<std::size_t>(cond_basis.size()));
    std::vector<int> occ(static_cast<std::size_t>(full_basis.n_modes()), 0);
    for (Eigen::Index i = 0; i < cond_basis.size(); ++i) {
        const auto& c = cond_basis.occupation(i);
        std::fill(occ.begin(), occ.end(), 0);
        occ[0] = c[0];
        occ[1] = c[1];
        map[static_cast<std::size_t>(i)] = full_basis.index_of(occ);
    }
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(input_povm.size());
    for (const auto& pi : input_povm) {
        Eigen::MatrixXcd m(cond_basis.size(), cond_basis.size());
        for (Eigen::Index i = 0; i < cond_basis.size(); ++i)
            for (Eigen::Index j = 0; j < cond_basis.size(); ++j)
                m(i, j) = pi(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<Eigen::MatrixXcd> setting_povm(const ApparatusConfig& config) {
    const BasisPtr full = dilated_basis(config.photon_cap);
    const BasisPtr cond = conditioned_basis(config.photon_cap);
    const Circuit circuit = dilated_circuit(config);
    const OutputPovm output = build_output_povm(*full);
    return condition_povm(back_propagate_povm(*full, circuit, output), *full, *cond);
}

double loss_mode_population(const ApparatusConfig& config, const DensityOperator& rho_cond) {
    if (rho_cond.basis->n_modes() != 2)
        throw std::invalid_argument("loss_mode_population: conditioned state must have two modes");
    const BasisPtr full = dilated_basis(config.photon_cap);
    const BasisPtr cond = rho_cond.basis;

    Eigen::MatrixXcd rho_full = Eigen::MatrixXcd::Zero(full->size(), full->size());
    std::vector<int> occ(static_cast<std::size_t>(kDilatedModes), 0);
    std::vector<Eigen::Index> map(static_cast<std::size_t>(cond->size()));
    for (Eigen::Index i = 0; i < cond->size(); ++i) {
        const auto& c = cond->occupation(i);
        std::fill(occ.begin(), occ.end(), 0);
        occ[0] = c[0];
        occ[1] = c[1];
        map[static_cast<std::size_t>(i)] = full->index_of(occ);
    }
    for (Eigen::Index i = 0; i < cond->size(); ++i)
        for (Eigen::Index j = 0; j < cond->size(); ++j)
            rho_full(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]) =
                rho_cond.matrix(i, j);

    const Eigen::MatrixXcd u = Eigen::MatrixXcd(circuit_unitary(*full, dilated_circuit(config)));
    const Eigen::MatrixXcd rho_out = u * rho_full * u.adjoint();
    double population = 0.0;
    for (Eigen::Index i = 0; i < full->size(); ++i) {
        const auto& o = full->occupation(i);
        int lost = 0;
        for (int m = 2; m <= 7; ++m) lost += o[static_cast<std::size_t>(m)];
        population += lost * rho_out(i, i).real();
    }
    return population;
}

std::vector<CountRecord> simulate_counts(const DensityOperator& rho_cond,
                                         const std::vector<TomographySetting>& settings,
                                         const ApparatusConfig& base_config, std::int64_t heralds,
                                         std::uint64_t seed) {
    if (heralds <= 0) throw std::invalid_argument("simulate_counts: heralds must be positive");
    const BasisPtr cond = conditioned_basis(base_config.photon_cap);
    if (rho_cond.basis->size() != cond->size())
        throw std::invalid_argument("simulate_counts: state does not match the conditioned basis");

    std::vector<CountRecord> records;
    records.reserve(settings.size());
    for (const auto& setting : settings) {
        ApparatusConfig cfg = base_config;
        cfg.theta = setting.theta;
        cfg.phi = setting.phi;
        const auto povm = setting_povm(cfg);

        Eigen::VectorXd p(kOutcomes);
        for (int g = 0; g < kOutcomes; ++g)
            p(g) = std::max((rho_cond.matrix * povm[static_cast<std::size_t>(g)]).trace().real(), 0.0);
        if (std::abs(p.sum() - 1.0) > 1e-8)
            throw std::runtime_error(
                "simulate_counts: outcome probabilities sum to " + io::format_double(p.sum()) +
                "; the click-pattern set is incomplete at this photon cap");
        p /= p.sum();

        // Per-setting stream so the draw sequence is independent of which
        // settings are simulated together.
        std::uint64_t stream = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(setting.id + 1));
        std::mt19937_64 rng(splitmix64(stream));

        CountRecord rec;
        rec.setting_id = setting.id;
        rec.theta = setting.theta;
        rec.phi = setting.phi;
        rec.n_alpha = heralds;
        Eigen::VectorXd cdf(kOutcomes);
        double acc = 0.0;
        for (int g = 0; g < kOutcomes; ++g) cdf(g) = (acc += p(g));
        cdf(kOutcomes - 1) = 1.0;
        for (std::int64_t s = 0; s < heralds; ++s) {
            const double u = uniform01(rng);
            int g = 0;
            while (g < kOutcomes - 1 && u >= cdf(g)) ++g;
            rec.counts[static_cast<std::size_t>(g)] += 1;
        }
        records.push_back(rec);
    }
    return records;
}

void write_count_records(const std::filesystem::path& path, const std::vector<CountRecord>& records) {
    io::CsvWriter csv(path);
    csv.header({"setting_id", "theta_rad", "phi_rad", "n_alpha", "n_1", "n_2", "n_3", "n_4", "n_5"});
    for (const auto& r : records) {
        std::vector<std::string> cells = {std::to_string(r.setting_id), io::format_double(r.theta),
                                          io::format_double(r.phi), std::to_string(r.n_alpha)};
        for (int g = 0; g < kOutcomes; ++g)
            cells.push_back(std::to_string(r.counts[static_cast<std::size_t>(g)]));
        csv.row(cells);
    }
    csv.close();
}

namespace {

std::int64_t parse_int64(const io::CsvCell& cell, const std::string& column,
                         std::vector<std::string>& errors) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(cell.text, &pos);
        if (pos != cell.text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        errors.push_back("line " + std::to_string(cell.line) + ": column '" + column +
                         "': cannot parse '" + cell.text + "' as an integer");
        return 0;
    }
}

}  // namespace

std::vector<CountRecord> read_count_records(const std::filesystem::path& path) {
    const io::CsvTable table = io::read_csv(path);
    const std::vector<std::string> needed = {"setting_id", "theta_rad", "phi_rad", "n_alpha",
                                             "n_1",        "n_2",       "n_3",     "n_4",
                                             "n_5"};
    std::vector<int> cols;
    std::vector<std::string> errors;
    for (const auto& name : needed) {
        const int c = table.column_index(name);
        if (c < 0) errors.push_back("missing column '" + name + "'");
        cols.push_back(c);
    }
    if (!errors.empty()) {
        std::string msg = path.string() + ":";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }

    std::vector<CountRecord> records;
    for (const auto& row : table.rows) {
        CountRecord r;
        r.setting_id = static_cast<int>(parse_int64(row[static_cast<std::size_t>(cols[0])], needed[0], errors));
        r.theta = io::parse_double(row[static_cast<std::size_t>(cols[1])], needed[1], errors);
        r.phi = io::parse_double(row[static_cast<std::size_t>(cols[2])], needed[2], errors);
        r.n_alpha = parse_int64(row[static_cast<std::size_t>(cols[3])], needed[3], errors);
        std::int64_t sum = 0;
        for (int g = 0; g < kOutcomes; ++g) {
            r.counts[static_cast<std::size_t>(g)] =
                parse_int64(row[static_cast<std::size_t>(cols[4 + g])], needed[static_cast<std::size_t>(4 + g)], errors);
            if (r.counts[static_cast<std::size_t>(g)] < 0)
                errors.push_back("line " + std::to_string(row[0].line) + ": negative count in column '" +
                                 needed[static_cast<std::size_t>(4 + g)] + "'");
            sum += r.counts[static_cast<std::size_t>(g)];
        }
        if (errors.empty() && sum != r.n_alpha)
            errors.push_back("line " + std::to_string(row[0].line) + ": outcome counts sum to " +
                             std::to_string(sum) + " but n_alpha is " + std::to_string(r.n_alpha));
        records.push_back(r);
    }
    if (!errors.empty()) {
        std::string msg = path.string() + ":";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }
    return records;
}

int blocked_parameter_count(const FockBasis& cond_basis) {
    int n = 0;
    for (int s = 0; s <= cond_basis.max_total_photons(); ++s) {
        const auto [a, b] = cond_basis.sector_range(s);
        const int d = static_cast<int>(b - a);
        n += d * d;
    }
    return n;
}

void check_tomographic_completeness(const std::vector<std::vector<Eigen::MatrixXcd>>& povms,
                                    const FockBasis& cond_basis) {
    const BlockParametrization par(cond_basis);
    Eigen::Index rows = 0;
    for (const auto& set : povms) rows += static_cast<Eigen::Index>(set.size());
    Eigen::MatrixXd design(rows, par.size());
    Eigen::Index r = 0;
    for (const auto& set : povms)
        for (const auto& pi : set) design.row(r++) = par.expectation_row(pi);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-8);
    const Eigen::Index rank = qr.rank();
    if (rank < par.size())
        throw std::runtime_error("tomographically incomplete: the measurement spans " +
                                 std::to_string(rank) + " of " + std::to_string(par.size()) +
                                 " operator-space parameters");
}

namespace {

struct FlatData {
    std::vector<double> counts;                 // concatenated over settings/outcomes
    std::vector<const Eigen::MatrixXcd*> elems;  // matching POVM elements
    double total = 0.0;
};

FlatData flatten(const std::vector<CountRecord>& records,
                 const std::vector<std::vector<Eigen::MatrixXcd>>& povms) {
    if (records.size() != povms.size())
        throw std::invalid_argument("records and POVM settings must correspond one-to-one");
    FlatData flat;
    for (std::size_t a = 0; a < records.size(); ++a) {
        if (povms[a].size() != kOutcomes)
            throw std::invalid_argument("each setting needs all five POVM elements");
        for (int g = 0; g < kOutcomes; ++g) {
            flat.counts.push_back(static_cast<double>(records[a].counts[static_cast<std::size_t>(g)]));
            flat.elems.push_back(&povms[a][static_cast<std::size_t>(g)]);
        }
        flat.total += static_cast<double>(records[a].n_alpha);
    }
    if (flat.total <= 0.0) throw std::invalid_argument("no counts to reconstruct from");
    return flat;
}

double log_likelihood(const Eigen::MatrixXcd& rho, const FlatData& flat) {
    double ll = 0.0;
    for (std::size_t k = 0; k < flat.counts.size(); ++k) {
        if (flat.counts[k] == 0.0) continue;
        const double p = (rho * *flat.elems[k]).trace().real();
        if (p < 1e-14)
            throw std::runtime_error(
                "model assigns (near-)zero probability to an observed outcome; data and "
                "apparatus model are inconsistent");
        ll += flat.counts[k] * std::log(p);
    }
    return ll;
}

Eigen::MatrixXcd r_operator(const Eigen::MatrixXcd& rho, const FlatData& flat) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < flat.counts.size(); ++k) {
        if (flat.counts[k] == 0.0) continue;
        const double p = (rho * *flat.elems[k]).trace().real();
        if (p < 1e-14)
            throw std::runtime_error(
                "model assigns (near-)zero probability to an observed outcome; data and "
                "apparatus model are inconsistent");
        r += (flat.counts[k] / p) * *flat.elems[k];
    }
    return r / flat.total;
}

Eigen::MatrixXcd normalized_hermitian(const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (tr <= 0.0) throw std::runtime_error("iterate lost its trace; reconstruction diverged");
    return h / tr;
}

}  // namespace

MleResult mle_reconstruct(const std::vector<CountRecord>& records,
                          const std::vector<std::vector<Eigen::MatrixXcd>>& povms,
                          const BasisPtr& cond_basis, const MleOptions& opts) {
    check_tomographic_completeness(povms, *cond_basis);
    const FlatData flat = flatten(records, povms);
    const Eigen::Index d = cond_basis->size();

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d);
    double ll = log_likelihood(rho, flat);

    MleResult result{DensityOperator{cond_basis, rho}, false, 0, {ll}};
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::MatrixXcd r = r_operator(rho, flat);
        Eigen::MatrixXcd next = normalized_hermitian(r * rho * r);
        double ll_next = log_likelihood(next, flat);
        if (ll_next < ll - 1e-12) {
            // The full R rho R step is not guaranteed monotone; dilute it
            // until the likelihood stops decreasing.
            const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(d, d);
            double eps = 0.5;
            bool improved = false;
            while (eps > 1e-9) {
                const Eigen::MatrixXcd t = (1.0 - eps) * eye + eps * r;
                next = normalized_hermitian(t * rho * t.adjoint());
                ll_next = log_likelihood(next, flat);
                if (ll_next >= ll - 1e-12) {
                    improved = true;
                    break;
                }
                eps *= 0.5;
            }
            if (!improved) {
                result.converged = true;
                break;
            }
        }
        rho = next;
        result.iterations = it;
        result.log_likelihood.push_back(std::max(ll_next, ll));
        if (ll_next - ll < opts.ll_gain_tol) {
            result.converged = true;
            ll = ll_next;
            break;
        }
        ll = ll_next;
    }
    result.rho = DensityOperator{cond_basis, rho};
    return result;
}

LsqResult lsq_reconstruct(const std::vector<CountRecord>& records,
                          const std::vector<std::vector<Eigen::MatrixXcd>>& povms,
                          const BasisPtr& cond_basis, std::int64_t warn_below) {
    check_tomographic_completeness(povms, *cond_basis);
    if (records.size() != povms.size())
        throw std::invalid_argument("records and POVM settings must correspond one-to-one");
    const Eigen::Index d = cond_basis->size();
    const BlockParametrization par(*cond_basis);
    const Eigen::Index n = par.size();

    bool low = false;
    // One row per non-vacuum outcome; the vacuum outcome is redundant given
    // the per-setting count constraint.
    const Eigen::Index rows = static_cast<Eigen::Index>(records.size()) * (kOutcomes - 1);
    Eigen::MatrixXd a(rows, n);
    Eigen::VectorXd b(rows), model_p(rows);
    Eigen::VectorXd n_alpha(rows);
    Eigen::Index r = 0;
    for (std::size_t s = 0; s < records.size(); ++s) {
        if (records[s].n_alpha < warn_below) low = true;
        if (records[s].n_alpha <= 0) throw std::invalid_argument("setting with no heralds");
        for (int g = 1; g < kOutcomes; ++g) {
            a.row(r) = par.expectation_row(povms[s][static_cast<std::size_t>(g)]);
            b(r) = static_cast<double>(records[s].counts[static_cast<std::size_t>(g)]) /
                   static_cast<double>(records[s].n_alpha);
            model_p(r) = b(r);  // empirical plug-in for the first pass
            n_alpha(r) = static_cast<double>(records[s].n_alpha);
            ++r;
        }
    }

    // Trace functional in the parametrisation (sum of diagonal parameters).
    Eigen::RowVectorXd trace_row =
        par.expectation_row(Eigen::MatrixXcd::Identity(d, d));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int pass = 0; pass < 3; ++pass) {
        Eigen::VectorXd w(rows);
        for (Eigen::Index k = 0; k < rows; ++k) {
            // Variance of a count fraction, floored at one count.
            const double var = std::max(n_alpha(k) * std::max(model_p(k), 0.0), 1.0) /
                               (n_alpha(k) * n_alpha(k));
            w(k) = 1.0 / var;
        }
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
        kkt.topLeftCorner(n, n) = a.transpose() * w.asDiagonal() * a;
        kkt.topRightCorner(n, 1) = trace_row.transpose();
        kkt.bottomLeftCorner(1, n) = trace_row;
        rhs.head(n) = a.transpose() * (w.asDiagonal() * b);
        rhs(n) = 1.0;

        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible())
            throw std::runtime_error("tomographically incomplete: singular least-squares system");
        x = lu.solve(rhs).head(n);
        model_p = a * x;  // reweight with the model probabilities
    }

    const Eigen::MatrixXcd rho_unc = par.assemble(x, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_unc);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    const double tr = lam.sum();
    if (tr <= 0.0) throw std::runtime_error("least-squares estimate has no positive part");
    lam /= tr;
    const Eigen::MatrixXcd rho_psd =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();

    LsqResult out;
    out.rho = DensityOperator{cond_basis, rho_psd};
    out.distance_to_unconstrained = (rho_psd - rho_unc).norm();
    out.low_count_warning = low;
    return out;
}

double qcrb_of_reconstruction(const DensityOperator& rho, PhaseConvention convention,
                              double trials) {
    const double f = qfi_from_generator(rho, phase_generator(*rho.basis, convention));
    if (f <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(trials * f);
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.matrix.rows() != sigma.matrix.rows())
        throw std::invalid_argument("fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix);
    const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXcd sqrt_rho = es.eigenvectors() *
                                      lam.cwiseSqrt().asDiagonal() *
                                      es.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> inner(sqrt_rho * sigma.matrix * sqrt_rho);
    const double root_sum = inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return root_sum * root_sum;
}

}  // namespace phos
