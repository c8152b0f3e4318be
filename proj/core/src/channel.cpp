#include "risd2d/channel.hpp"

#include <stdexcept>
#include <string>

namespace risd2d {

namespace {

constexpr std::uint64_t kAngleStream = 0x414e474c45ull;      // "ANGLE"
constexpr std::uint64_t kPlacementStream = 0x504c414345ull;  // "PLACE"

}  // namespace

void SystemGeometry::validate() const {
  if (n_h < 1 || n_v < 1) {
    throw std::invalid_argument("geometry: n_h and n_v must be >= 1");
  }
  if (!(d_h > 0.0) || !(d_v > 0.0) || !(wavelength > 0.0)) {
    throw std::invalid_argument(
        "geometry: spacings and wavelength must be positive");
  }
  if (tx_positions.size() != rx_positions.size()) {
    throw std::invalid_argument(
        "geometry: transmitter and receiver counts differ");
  }
}

SystemGeometry make_geometry(int n_h, int n_v, double wavelength,
                             const Vec3& ris_position,
                             std::vector<Vec3> tx_positions,
                             std::vector<Vec3> rx_positions) {
  SystemGeometry g;
  g.n_h = n_h;
  g.n_v = n_v;
  g.wavelength = wavelength;
  g.d_h = wavelength / 4.0;
  g.d_v = wavelength / 4.0;
  g.ris_position = ris_position;
  g.tx_positions = std::move(tx_positions);
  g.rx_positions = std::move(rx_positions);
  g.validate();
  return g;
}

void place_pairs_uniform(SystemGeometry& geometry, int pairs, const Vec3& lo,
                         const Vec3& hi, std::uint64_t seed,
                         double min_distance) {
  if (pairs < 1) throw std::invalid_argument("placement: pairs must be >= 1");
  RngStream rng(seed, kPlacementStream);
  auto draw = [&] {
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * rng.uniform();
    return p;
  };
  geometry.tx_positions.clear();
  geometry.rx_positions.clear();
  for (int i = 0; i < pairs; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) {
        throw std::runtime_error(
            "placement: cannot satisfy the minimum distance in this area");
      }
      const Vec3 tx = draw();
      const Vec3 rx = draw();
      bool ok = (tx - rx).norm() >= min_distance &&
                (tx - geometry.ris_position).norm() >= min_distance &&
                (rx - geometry.ris_position).norm() >= min_distance;
      for (int k = 0; ok && k < i; ++k) {
        ok = (tx - geometry.rx_positions[k]).norm() >= min_distance &&
             (geometry.tx_positions[k] - rx).norm() >= min_distance;
      }
      if (ok) {
        geometry.tx_positions.push_back(tx);
        geometry.rx_positions.push_back(rx);
        break;
      }
    }
  }
}

double DirectLinkStats::los(int i, int j) const {
  if (!enabled) return 0.0;
  const double g = rician(i, j);
  return sigma(i, j) * std::sqrt(g / (1.0 + g));
}

Eigen::MatrixXd correlation_matrix(const SystemGeometry& geometry) {
  geometry.validate();
  const int n = geometry.elements();
  Eigen::MatrixXd r(n, n);
  for (int p = 0; p < n; ++p) {
    r(p, p) = 1.0;
    for (int q = 0; q < p; ++q) {
      const double dh = (geometry.column(p) - geometry.column(q)) * geometry.d_h;
      const double dv = (geometry.row(p) - geometry.row(q)) * geometry.d_v;
      const double v =
          sinc(2.0 * std::sqrt(dh * dh + dv * dv) / geometry.wavelength);
      r(p, q) = v;
      r(q, p) = v;
    }
  }
  return r;
}

Eigen::VectorXd steering_phase(const SystemGeometry& geometry, double az,
                               double el) {
  const int n = geometry.elements();
  const double k = kTwoPi / geometry.wavelength;
  const double u = geometry.d_h * std::sin(az) * std::cos(el);
  const double v = geometry.d_v * std::sin(el);
  Eigen::VectorXd phase(n);
  for (int e = 0; e < n; ++e) {
    phase[e] = k * (geometry.column(e) * u + geometry.row(e) * v);
  }
  return phase;
}

Eigen::VectorXcd steering_vector(const SystemGeometry& geometry, double az,
                                 double el) {
  const Eigen::VectorXd phase = steering_phase(geometry, az, el);
  Eigen::VectorXcd out(phase.size());
  for (Eigen::Index e = 0; e < phase.size(); ++e) {
    out[e] = std::polar(1.0, phase[e]);
  }
  return out;
}

double path_loss(double distance_m, double exponent) {
  if (!(distance_m > 0.0)) {
    throw std::invalid_argument("path_loss: distance must be positive");
  }
  const double pl_db = -30.0 - 10.0 * exponent * std::log10(distance_m);
  return std::pow(10.0, pl_db / 10.0);
}

void refresh_derived(StatisticalCsi& csi) {
  csi.corr = correlation_matrix(csi.geometry);
  csi.corr_sqrt = psd_sqrt(csi.corr);
  csi.los_a.clear();
  csi.los_b.clear();
  for (const auto& p : csi.pairs) {
    csi.los_a.push_back(steering_vector(csi.geometry, p.aoa_az, p.aoa_el));
    csi.los_b.push_back(steering_vector(csi.geometry, p.aod_az, p.aod_el));
  }
}

StatisticalCsi build_statistical_csi(const SystemGeometry& geometry,
                                     const CsiOptions& options) {
  geometry.validate();
  const int k = geometry.pairs();
  if (k < 1) throw std::invalid_argument("csi: at least one pair is required");

  std::vector<PairAngles> angles;
  if (options.angles.explicit_angles) {
    angles = *options.angles.explicit_angles;
    if (static_cast<int>(angles.size()) != k) {
      throw std::invalid_argument("csi: expected " + std::to_string(k) +
                                  " angle sets, got " +
                                  std::to_string(angles.size()));
    }
  } else {
    RngStream rng(options.angles.seed, kAngleStream);
    angles.resize(k);
    for (auto& a : angles) {
      for (double& v : a) v = kTwoPi * rng.uniform();
    }
  }

  const double gamma_reflect = db_to_linear(options.rician.reflect_db);
  const double gamma_direct = db_to_linear(options.rician.direct_db);

  StatisticalCsi csi;
  csi.geometry = geometry;
  csi.pairs.resize(k);
  for (int i = 0; i < k; ++i) {
    auto& p = csi.pairs[i];
    p.alpha = path_loss((geometry.tx_positions[i] - geometry.ris_position).norm(),
                        options.exponents.reflect);
    p.beta = path_loss((geometry.ris_position - geometry.rx_positions[i]).norm(),
                       options.exponents.reflect);
    p.gamma_a = gamma_reflect;
    p.gamma_b = gamma_reflect;
    p.aoa_az = angles[i][0];
    p.aoa_el = angles[i][1];
    p.aod_az = angles[i][2];
    p.aod_el = angles[i][3];
  }
  csi.direct.sigma.resize(k, k);
  csi.direct.rician = Eigen::MatrixXd::Constant(k, k, gamma_direct);
  csi.direct.enabled = options.direct_links;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double d = (geometry.tx_positions[i] - geometry.rx_positions[j]).norm();
      csi.direct.sigma(i, j) = std::sqrt(path_loss(d, options.exponents.direct));
    }
  }
  csi.rx_noise.assign(k, options.rx_noise_w);
  refresh_derived(csi);
  return csi;
}

StatisticalCsi with_identity_correlation(StatisticalCsi csi) {
  const int n = csi.elements();
  csi.corr = Eigen::MatrixXd::Identity(n, n);
  csi.corr_sqrt = psd_sqrt(csi.corr);
  return csi;
}

StatisticalCsi with_rician_factor(StatisticalCsi csi, double gamma_linear) {
  for (auto& p : csi.pairs) {
    p.gamma_a = gamma_linear;
    p.gamma_b = gamma_linear;
  }
  csi.direct.rician.setConstant(gamma_linear);
  return csi;
}

ChannelRealization sample_realization(const StatisticalCsi& csi, RngStream& rng,
                                      double kappa_pn) {
  const int k = csi.pairs_count();
  const int n = csi.elements();
  const Eigen::MatrixXd& f = csi.corr_sqrt.factor;

  auto correlated = [&] {
    Eigen::VectorXd re(n), im(n);
    for (int e = 0; e < n; ++e) {
      const auto w = rng.complex_normal();
      re[e] = w.real();
      im[e] = w.imag();
    }
    Eigen::VectorXcd out(n);
    out.real() = f * re;
    out.imag() = f * im;
    return out;
  };

  ChannelRealization out;
  out.g_a.reserve(k);
  out.g_b.reserve(k);
  for (int i = 0; i < k; ++i) {
    const auto& p = csi.pairs[i];
    out.g_a.push_back(std::sqrt(p.alpha * p.gamma_a / (1.0 + p.gamma_a)) * csi.los_a[i] +
                      std::sqrt(p.alpha / (1.0 + p.gamma_a)) * correlated());
    out.g_b.push_back(std::sqrt(p.beta * p.gamma_b / (1.0 + p.gamma_b)) * csi.los_b[i] +
                      std::sqrt(p.beta / (1.0 + p.gamma_b)) * correlated());
  }

  out.h = Eigen::MatrixXcd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double s = csi.direct.sigma_at(i, j);
      const double variance = s * s / (1.0 + csi.direct.rician(i, j));
      const auto scatter = rng.complex_normal(variance);
      out.h(i, j) = csi.direct.los(i, j) + scatter;
    }
  }

  out.phase_noise.resize(n);
  for (int e = 0; e < n; ++e) out.phase_noise[e] = sample_von_mises(rng, kappa_pn);
  return out;
}

}  // namespace risd2d
