#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "risd2d/numerics.hpp"

namespace risd2d {

using Vec3 = Eigen::Vector3d;

/// RIS layout and user placement. Element n (zero-based) sits at grid column
/// n mod n_h and row floor(n / n_h).
struct SystemGeometry {
  int n_h = 8;
  int n_v = 4;
  double wavelength = 0.125;
  double d_h = 0.125 / 4.0;
  double d_v = 0.125 / 4.0;
  Vec3 ris_position = Vec3(30.0, 0.0, 8.0);
  std::vector<Vec3> tx_positions;  // U_A,i
  std::vector<Vec3> rx_positions;  // U_B,i

  int elements() const { return n_h * n_v; }
  int pairs() const { return static_cast<int>(tx_positions.size()); }
  int column(int n) const { return n % n_h; }
  int row(int n) const { return n / n_h; }

  /// Throws std::invalid_argument when dimensions or spacings are invalid.
  void validate() const;
};

/// Builds a geometry with quarter-wavelength spacing.
SystemGeometry make_geometry(int n_h, int n_v, double wavelength,
                             const Vec3& ris_position,
                             std::vector<Vec3> tx_positions,
                             std::vector<Vec3> rx_positions);

/// Places K transmitters and K receivers independently and uniformly in the
/// axis-aligned box [lo, hi]. Draws are rejected until every link distance
/// (pair-to-pair and pair-to-RIS) is at least min_distance.
void place_pairs_uniform(SystemGeometry& geometry, int pairs, const Vec3& lo,
                         const Vec3& hi, std::uint64_t seed,
                         double min_distance = 1.0);

/// Large-scale and LoS statistics of pair i's reflecting links.
struct PairStats {
  double alpha = 0.0;    // U_A,i -> RIS
  double beta = 0.0;     // RIS -> U_B,i
  double gamma_a = 0.0;  // Rician factor, linear
  double gamma_b = 0.0;
  double aoa_az = 0.0;
  double aoa_el = 0.0;
  double aod_az = 0.0;
  double aod_el = 0.0;
};

/// Direct links U_A,i -> U_B,j. When `enabled` is false every direct channel
/// is identically zero regardless of the stored values.
struct DirectLinkStats {
  Eigen::MatrixXd sigma;   // sigma_{i,j} (amplitude, sqrt of large-scale gain)
  Eigen::MatrixXd rician;  // gamma_{i,j}, linear
  bool enabled = true;

  double sigma_at(int i, int j) const { return enabled ? sigma(i, j) : 0.0; }
  /// LoS component sigma * sqrt(gamma / (1 + gamma)); real-valued.
  double los(int i, int j) const;
};

/// Everything the optimizer knows about the channels. Immutable once built.
struct StatisticalCsi {
  SystemGeometry geometry;
  std::vector<PairStats> pairs;
  DirectLinkStats direct;
  std::vector<double> rx_noise;  // sigma_j^2 in watts
  Eigen::MatrixXd corr;
  PsdSqrt corr_sqrt;
  std::vector<Eigen::VectorXcd> los_a;  // steering vectors at the AoA
  std::vector<Eigen::VectorXcd> los_b;  // steering vectors at the AoD

  int pairs_count() const { return static_cast<int>(pairs.size()); }
  int elements() const { return geometry.elements(); }
};

/// Normalized spatial correlation under isotropic scattering:
/// r_pq = sinc(2 * |pos_p - pos_q| / wavelength).
Eigen::MatrixXd correlation_matrix(const SystemGeometry& geometry);

/// UPA phase progression 2 pi / lambda * (h(n) d_h sin(az) cos(el) + v(n) d_v sin(el)).
Eigen::VectorXd steering_phase(const SystemGeometry& geometry, double az,
                               double el);
Eigen::VectorXcd steering_vector(const SystemGeometry& geometry, double az,
                                 double el);

/// Linear gain for PL_dB = -30 - 10 * exponent * log10(distance).
/// Throws std::invalid_argument for distance <= 0.
double path_loss(double distance_m, double exponent);

struct RicianFactors {
  double reflect_db = 10.0;  // gamma_A,i and gamma_B,i
  double direct_db = 10.0;   // gamma_{i,j}
};

struct PathLossExponents {
  double direct = 3.8;
  double reflect = 2.2;
};

/// Angles of pair i: {aoa_az, aoa_el, aod_az, aod_el}.
using PairAngles = std::array<double, 4>;

/// Either explicit per-pair angles or a seed from which every angle is drawn
/// uniformly on [0, 2 pi).
struct AngleSource {
  std::optional<std::vector<PairAngles>> explicit_angles;
  std::uint64_t seed = 0;
};

struct CsiOptions {
  RicianFactors rician;
  PathLossExponents exponents;
  AngleSource angles;
  double rx_noise_w = 1e-11;
  bool direct_links = true;
};

StatisticalCsi build_statistical_csi(const SystemGeometry& geometry,
                                     const CsiOptions& options);

/// Recomputes corr, corr_sqrt and LoS vectors from the stored geometry and
/// pair angles.
void refresh_derived(StatisticalCsi& csi);

/// Replaces R with the identity (uncorrelated reflecting links).
StatisticalCsi with_identity_correlation(StatisticalCsi csi);

/// Sets every Rician factor (reflecting and direct) to the given linear value.
StatisticalCsi with_rician_factor(StatisticalCsi csi, double gamma_linear);

/// One Monte-Carlo draw of all small-scale quantities.
struct ChannelRealization {
  std::vector<Eigen::VectorXcd> g_a;
  std::vector<Eigen::VectorXcd> g_b;
  Eigen::MatrixXcd h;  // h(i, j): U_A,i -> U_B,j
  Eigen::VectorXd phase_noise;
};

ChannelRealization sample_realization(const StatisticalCsi& csi, RngStream& rng,
                                      double kappa_pn);

}  // namespace risd2d
