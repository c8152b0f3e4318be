#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include <risd2d/channel.hpp>

#include "support/oracles.hpp"

using namespace risd2d;

namespace {

SystemGeometry line(int n_h, double spacing_wavelengths) {
  SystemGeometry g;
  g.n_h = n_h;
  g.n_v = 1;
  g.wavelength = 0.125;
  g.d_h = spacing_wavelengths * g.wavelength;
  g.d_v = spacing_wavelengths * g.wavelength;
  return g;
}

}  // namespace

TEST_CASE("correlation_matrix examples") {
  CHECK(correlation_matrix(line(1, 0.25)).isApprox(Eigen::MatrixXd::Ones(1, 1)));
  const auto quarter = correlation_matrix(line(2, 0.25));
  CHECK(quarter(0, 1) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(quarter(1, 0) == quarter(0, 1));
  CHECK(std::abs(correlation_matrix(line(2, 0.5))(0, 1)) < 1e-15);
}

TEST_CASE("correlation_matrix is a valid correlation for arrays up to N = 256") {
  for (auto [n_h, n_v] : {std::pair{4, 4}, {8, 4}, {8, 8}, {16, 8}, {16, 16}, {32, 1}}) {
    SystemGeometry g;
    g.n_h = n_h;
    g.n_v = n_v;
    const Eigen::MatrixXd r = correlation_matrix(g);
    CAPTURE(n_h);
    CAPTURE(n_v);
    CHECK((r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.diagonal().array() == 1.0).all());
    CHECK(r.cwiseAbs().maxCoeff() <= 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-6);
    const auto s = psd_sqrt(r);
    CHECK((s.factor * s.factor.transpose() - r).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("correlation_matrix uses the column-major element layout") {
  SystemGeometry g;
  g.n_h = 3;
  g.n_v = 2;
  const Eigen::MatrixXd r = correlation_matrix(g);
  // Elements 0 and 3 sit in the same column, one row apart.
  CHECK(r(0, 3) == doctest::Approx(sinc(2.0 * g.d_v / g.wavelength)));
  // Elements 0 and 4: one column and one row apart.
  const double d = std::hypot(g.d_h, g.d_v);
  CHECK(r(0, 4) == doctest::Approx(sinc(2.0 * d / g.wavelength)));
}

TEST_CASE("steering_vector examples") {
  SystemGeometry g;
  g.n_h = 4;
  g.n_v = 3;
  const auto ones = steering_vector(g, 0.0, 0.0);
  for (Eigen::Index n = 0; n < ones.size(); ++n) CHECK(std::abs(ones[n] - 1.0) < 1e-15);

  for (auto [az, el] : {std::pair{0.3, 1.1}, {2.0, -0.7}, {5.5, 4.0}}) {
    const auto v = steering_vector(g, az, el);
    CHECK(v[0] == std::complex<double>(1.0, 0.0));
    for (Eigen::Index n = 0; n < v.size(); ++n) CHECK(std::abs(v[n]) == doctest::Approx(1.0));
    // Negating both angles conjugates the progression.
    const auto w = steering_vector(g, -az, -el);
    CHECK((w - v.conjugate()).cwiseAbs().maxCoeff() < 1e-12);
  }

  const auto two = steering_vector(line(2, 0.25), kPi / 2.0, 0.0);
  CHECK(std::abs(two[1] - std::complex<double>(0.0, 1.0)) < 1e-12);
}

TEST_CASE("path_loss") {
  CHECK(path_loss(1.0, 2.2) == doctest::Approx(1e-3));
  CHECK(path_loss(1.0, 3.8) == doctest::Approx(1e-3));
  CHECK(path_loss(10.0, 2.2) == doctest::Approx(6.3096e-6).epsilon(1e-4));
  CHECK(path_loss(10.0, 3.8) == doctest::Approx(1.5849e-7).epsilon(1e-4));
  CHECK_THROWS_AS(path_loss(0.0, 2.2), std::invalid_argument);
  CHECK_THROWS_AS(path_loss(-1.0, 2.2), std::invalid_argument);
}

TEST_CASE("build_statistical_csi") {
  SUBCASE("unit distances give unit-distance gains") {
    const SystemGeometry g = make_geometry(2, 2, 0.125, Vec3(0, 0, 0), {Vec3(1, 0, 0)},
                                           {Vec3(0.5, std::sqrt(3.0) / 2.0, 0)});
    const auto csi = build_statistical_csi(g, CsiOptions{});
    CHECK(csi.pairs[0].alpha == doctest::Approx(1e-3));
    CHECK(csi.pairs[0].beta == doctest::Approx(1e-3));
    CHECK(csi.direct.sigma(0, 0) * csi.direct.sigma(0, 0) == doctest::Approx(1e-3));
  }
  SUBCASE("exponents follow the link type") {
    SystemGeometry g;
    place_pairs_uniform(g, 6, Vec3(0, 0, 1.6), Vec3(60, 25, 1.6), 5);
    const auto csi = build_statistical_csi(g, CsiOptions{});
    for (int i = 0; i < 6; ++i) {
      const double da = (g.tx_positions[i] - g.ris_position).norm();
      const double db = (g.rx_positions[i] - g.ris_position).norm();
      CHECK(csi.pairs[i].alpha == doctest::Approx(path_loss(da, 2.2)));
      CHECK(csi.pairs[i].beta == doctest::Approx(path_loss(db, 2.2)));
      CHECK(csi.pairs[i].gamma_a == doctest::Approx(10.0));
      for (int j = 0; j < 6; ++j) {
        const double d = (g.tx_positions[i] - g.rx_positions[j]).norm();
        CHECK(csi.direct.sigma(i, j) == doctest::Approx(std::sqrt(path_loss(d, 3.8))));
      }
      for (double a : {csi.pairs[i].aoa_az, csi.pairs[i].aoa_el, csi.pairs[i].aod_az,
                       csi.pairs[i].aod_el}) {
        CHECK(a >= 0.0);
        CHECK(a < kTwoPi);
      }
    }
    CHECK(csi.corr.isApprox(correlation_matrix(g)));
    CHECK(csi.rx_noise.size() == 6);
  }
  SUBCASE("placement stays in the box and respects the minimum distance") {
    SystemGeometry g;
    place_pairs_uniform(g, 6, Vec3(0, 0, 1.6), Vec3(60, 25, 1.6), 9);
    for (int i = 0; i < 6; ++i) {
      for (const auto& p : {g.tx_positions[i], g.rx_positions[i]}) {
        CHECK(p.x() >= 0.0);
        CHECK(p.x() <= 60.0);
        CHECK(p.y() >= 0.0);
        CHECK(p.y() <= 25.0);
        CHECK(p.z() == 1.6);
      }
      for (int j = 0; j < 6; ++j) CHECK((g.tx_positions[i] - g.rx_positions[j]).norm() >= 1.0);
    }
  }
  SUBCASE("seeded construction is repeatable") {
    const auto a = testing::small_csi(3, 4, 2, 17);
    const auto b = testing::small_csi(3, 4, 2, 17);
    for (int i = 0; i < 3; ++i) {
      CHECK(a.pairs[i].aoa_az == b.pairs[i].aoa_az);
      CHECK(a.pairs[i].aod_el == b.pairs[i].aod_el);
      CHECK(a.pairs[i].alpha == b.pairs[i].alpha);
    }
    CHECK(a.direct.sigma == b.direct.sigma);
  }
  SUBCASE("explicit angles are used verbatim") {
    const auto csi = testing::single_pair_csi(2, 2, {0.1, 0.2, 0.3, 0.4});
    CHECK(csi.pairs[0].aoa_az == 0.1);
    CHECK(csi.pairs[0].aoa_el == 0.2);
    CHECK(csi.pairs[0].aod_az == 0.3);
    CHECK(csi.pairs[0].aod_el == 0.4);
  }
  SUBCASE("invalid geometry is rejected") {
    SystemGeometry g;
    g.n_h = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }
}

TEST_CASE("sample_realization: pure LoS limit") {
  auto csi = with_rician_factor(testing::small_csi(2, 4, 2, 3), 1e12);
  RngStream rng(1, 0);
  const auto r = sample_realization(csi, rng, 4.0);
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXcd los = std::sqrt(csi.pairs[i].alpha) * csi.los_a[i];
    CHECK((r.g_a[i] - los).squaredNorm() / los.squaredNorm() < 1e-10);
  }
  CHECK(r.phase_noise.size() == 8);
  CHECK(r.h.rows() == 2);
}

TEST_CASE("sample_realization: moments") {
  const auto csi = testing::small_csi(2, 2, 2, 4);
  const int draws = 20000;
  const int n = csi.elements();
  RngStream rng(2, 0);
  double norm_a = 0.0;
  Eigen::VectorXcd mean_a = Eigen::VectorXcd::Zero(n);
  Eigen::MatrixXcd cov_b = Eigen::MatrixXcd::Zero(n, n);
  double h2 = 0.0;
  const auto& pb = csi.pairs[1];
  const Eigen::VectorXcd los_b =
      std::sqrt(pb.beta * pb.gamma_b / (1.0 + pb.gamma_b)) * csi.los_b[1];
  for (int t = 0; t < draws; ++t) {
    const auto r = sample_realization(csi, rng, 4.0);
    norm_a += r.g_a[0].squaredNorm();
    mean_a += r.g_a[0];
    const Eigen::VectorXcd nlos = r.g_b[1] - los_b;
    cov_b += nlos * nlos.adjoint();
    h2 += std::norm(r.h(0, 1));
  }
  const auto& pa = csi.pairs[0];
  CHECK(norm_a / draws / n == doctest::Approx(pa.alpha).epsilon(0.02));

  const Eigen::VectorXcd expect_mean =
      std::sqrt(pa.alpha * pa.gamma_a / (1.0 + pa.gamma_a)) * csi.los_a[0];
  for (int e = 0; e < n; ++e) {
    CHECK(std::abs(mean_a[e] / static_cast<double>(draws) - expect_mean[e]) <=
          0.03 * std::abs(expect_mean[e]));
  }

  const double scale = pb.beta / (1.0 + pb.gamma_b);
  const Eigen::MatrixXd expect_cov = scale * csi.corr;
  cov_b /= static_cast<double>(draws);
  CHECK((cov_b.real() - expect_cov).cwiseAbs().maxCoeff() <= 0.05 * scale);
  CHECK(cov_b.imag().cwiseAbs().maxCoeff() <= 0.05 * scale);

  const double s = csi.direct.sigma(0, 1);
  CHECK(h2 / draws == doctest::Approx(s * s).epsilon(0.02));
}

TEST_CASE("sample_realization: blocked direct links are zero") {
  const auto csi = testing::small_csi(2, 2, 2, 4, false);
  RngStream rng(3, 0);
  const auto r = sample_realization(csi, rng, 4.0);
  CHECK(r.h.cwiseAbs().maxCoeff() == 0.0);
}
