#include <doctest.h>

#include <cmath>

#include "phos/spectral.hpp"

using namespace phos;

namespace {

/// Independent Schmidt-coefficient oracle: eigenvalues of the Gram matrix
/// f f^dag, normalised and sorted descending.
Eigen::VectorXd gram_eigen_oracle(const Eigen::MatrixXcd& grid) {
    const Eigen::MatrixXcd gram = grid * grid.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    ev = ev.cwiseMax(0.0);
    ev /= ev.sum();
    return ev;
}

JointSpectralAmplitude from_grid(Eigen::MatrixXcd grid, double extent) {
    JointSpectralAmplitude jsa;
    const int n = static_cast<int>(grid.rows());
    jsa.nu_s = Eigen::VectorXd::LinSpaced(n, -extent, extent);
    jsa.nu_i = jsa.nu_s;
    jsa.grid = std::move(grid);
    return jsa;
}

}  // namespace

TEST_CASE("separable Gaussian model has unit purity") {
    // pump(nu_s + nu_i) * Phi(nu_s - nu_i) with equal Gaussian widths has no
    // cross term, so the amplitude factorises.
    JsaModel m;
    m.pump_bandwidth = 1.0;
    m.k_s = 1.0;
    m.k_i = -1.0;
    m.shape = PhasematchShape::Gaussian;
    m.phasematch_bandwidth = 1.0;
    m.grid_extent = 8.0;
    m.grid_points = 256;
    const JointSpectralAmplitude jsa = build_jsa(m);

    const Eigen::VectorXd lambda = schmidt_decompose(jsa);
    CHECK(lambda(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(source_figures(jsa, {}).purity == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("build_jsa validation") {
    JsaModel m;
    m.grid_points = 4;
    CHECK_THROWS_AS(build_jsa(m), std::invalid_argument);

    m = JsaModel{};
    m.pump_bandwidth = -1.0;
    CHECK_THROWS_AS(build_jsa(m), std::invalid_argument);

    // a grid far too small for the amplitude support must be rejected, and
    // the error reports the measured boundary ratio
    m = JsaModel{};
    m.grid_extent = 0.5;
    try {
        build_jsa(m);
        FAIL("expected boundary-truncation failure");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("boundary/max") != std::string::npos);
        CHECK(msg.find("tolerance") != std::string::npos);
    }
}

TEST_CASE("schmidt_decompose matches the Gram-matrix oracle") {
    const JointSpectralAmplitude jsa = build_jsa(correlated_preset());
    const Eigen::VectorXd lambda = schmidt_decompose(jsa);
    const Eigen::VectorXd oracle = gram_eigen_oracle(jsa.grid);
    CHECK(lambda.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < 10; ++k) CHECK(lambda(k) == doctest::Approx(oracle(k)).epsilon(1e-8));
}

TEST_CASE("schmidt_decompose on hand-built grids") {
    SUBCASE("rank one") {
        Eigen::VectorXcd u = Eigen::VectorXcd::Random(16);
        Eigen::VectorXcd v = Eigen::VectorXcd::Random(16);
        const JointSpectralAmplitude jsa = from_grid(u * v.transpose(), 1.0);
        const Eigen::VectorXd lambda = schmidt_decompose(jsa);
        CHECK(lambda(0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("two equal terms give purity one half") {
        Eigen::MatrixXcd grid = Eigen::MatrixXcd::Zero(8, 8);
        grid(0, 0) = 1.0;
        grid(1, 1) = 1.0;
        const Eigen::VectorXd lambda = schmidt_decompose(from_grid(grid, 1.0));
        CHECK(lambda(0) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(lambda(1) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(lambda.array().square().sum() == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("spectral filter conventions") {
    SpectralFilter f;
    f.bandwidth = 0.3;
    f.center = 1.2;
    CHECK(f.amplitude_transmission(1.2) == doctest::Approx(1.0));
    CHECK(f.amplitude_transmission(1.2 + 0.6) ==
          doctest::Approx(std::exp(-0.36 / (4.0 * 0.09))).epsilon(1e-14));
    CHECK(f.intensity_fwhm() == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * 0.3));

    SpectralFilter open_filter;  // infinite bandwidth
    CHECK(open_filter.amplitude_transmission(17.0) == 1.0);

    const JointSpectralAmplitude jsa = build_jsa(correlated_preset());
    CHECK(apply_filters(jsa, {open_filter}).norm_squared() ==
          doctest::Approx(jsa.norm_squared()).epsilon(1e-14));

    SpectralFilter s1{SpectralFilter::Arm::Signal, 0.5, 0.0};
    SpectralFilter s2{SpectralFilter::Arm::Signal, 0.7, 0.0};
    CHECK_THROWS_AS(apply_filters(jsa, {s1, s2}), std::invalid_argument);
    CHECK(apply_filters(jsa, {s1}).norm_squared() < jsa.norm_squared());
}

TEST_CASE("source figures on the presets") {
    const SourceFigures correlated = source_figures(build_jsa(correlated_preset()), {});
    CHECK(correlated.purity == doctest::Approx(0.270).epsilon(2e-3));
    CHECK(correlated.heralding_efficiency == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(correlated.pass_probability == doctest::Approx(1.0).epsilon(1e-12));

    const SourceFigures matched = source_figures(build_jsa(matched_preset()), {});
    CHECK(matched.purity == doctest::Approx(0.830).epsilon(2e-3));

    CHECK(preset_by_name("correlated").has_value());
    CHECK(preset_by_name("matched").has_value());
    CHECK(!preset_by_name("bogus").has_value());
}

TEST_CASE("tight filters on both arms purify a correlated source") {
    const JointSpectralAmplitude jsa = build_jsa(correlated_preset());
    const std::vector<SpectralFilter> filters = {{SpectralFilter::Arm::Signal, 0.05, 0.0},
                                                 {SpectralFilter::Arm::Idler, 0.05, 0.0}};
    const SourceFigures f = source_figures(jsa, filters);
    CHECK(f.purity > 0.99);
    CHECK(f.pass_probability < f.heralding_efficiency);
    CHECK(f.heralding_efficiency <= 1.0 + 1e-12);
}

TEST_CASE("tradeoff scan") {
    const JointSpectralAmplitude jsa = build_jsa(correlated_preset());

    SUBCASE("rejects unsorted or nonpositive bandwidths") {
        Eigen::VectorXd bad(3);
        bad << 0.5, 0.3, 0.8;
        CHECK_THROWS_AS(tradeoff_scan(jsa, bad), std::invalid_argument);
        Eigen::VectorXd neg(2);
        neg << -0.1, 0.5;
        CHECK_THROWS_AS(tradeoff_scan(jsa, neg), std::invalid_argument);
    }
    SUBCASE("narrow filters purify at the cost of heralding") {
        const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(12, 0.05, 3.0);
        const auto curve = tradeoff_scan(jsa, b);
        REQUIRE(curve.size() == 12);
        for (std::size_t k = 1; k < curve.size(); ++k) {
            CHECK(curve[k].purity <= curve[k - 1].purity + 1e-9);
            CHECK(curve[k].heralding_efficiency >= curve[k - 1].heralding_efficiency - 1e-9);
            CHECK(curve[k].pass_probability == doctest::Approx(curve[k].heralding_efficiency));
        }
        CHECK(curve.front().purity > 0.98);
    }
    SUBCASE("wide-open limit recovers the unfiltered figures") {
        Eigen::VectorXd wide(1);
        wide << 5000.0;
        const auto curve = tradeoff_scan(jsa, wide);
        CHECK(curve[0].purity == doctest::Approx(schmidt_decompose(jsa).array().square().sum())
                                     .epsilon(1e-6));
        CHECK(curve[0].heralding_efficiency == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("separable source: heralding efficiency is the signal marginal pass") {
    JsaModel m;
    m.k_s = 1.0;
    m.k_i = -1.0;
    m.shape = PhasematchShape::Gaussian;
    m.phasematch_bandwidth = 1.0;
    m.grid_extent = 8.0;
    m.grid_points = 256;
    const JointSpectralAmplitude jsa = build_jsa(m);

    const SpectralFilter fs{SpectralFilter::Arm::Signal, 0.4, 0.0};
    const SourceFigures fig = source_figures(jsa, {fs});

    // independent marginal computation: sum_i |T(nu_s_i)|^2 * row_power_i
    double marginal = 0.0;
    for (Eigen::Index i = 0; i < jsa.nu_s.size(); ++i) {
        const double t = fs.amplitude_transmission(jsa.nu_s(i));
        marginal += t * t * jsa.grid.row(i).squaredNorm();
    }
    CHECK(fig.heralding_efficiency == doctest::Approx(marginal).epsilon(1e-12));
}

TEST_CASE("grid refinement leaves the preset figures stable") {
    JsaModel m = correlated_preset();
    const double p512 = source_figures(build_jsa(m), {}).purity;
    m.grid_points = 768;
    const double p768 = source_figures(build_jsa(m), {}).purity;
    CHECK(p512 == doctest::Approx(p768).epsilon(1e-4));
}
