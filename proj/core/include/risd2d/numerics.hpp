#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>

#include <Eigen/Dense>

namespace risd2d {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Normalized sinc, sin(pi x) / (pi x), equal to 1 at x = 0.
double sinc(double x);

/// Modified Bessel functions of the first kind, orders 0 and 1.
/// Ascending series up to x = 15, asymptotic expansion above.
/// The asymptotic branch overflows past x ~ 700; use bessel_ratio there.
double bessel_i0(double x);
double bessel_i1(double x);

/// I1(k) / I0(k): the mean resultant length of a zero-mean von Mises
/// angle with concentration k. Returns 1 for k = +inf.
/// Throws std::domain_error for negative or NaN input.
double bessel_ratio(double kappa_pn);

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Sum with fixed-order pairwise reduction; the result depends only on the
/// order of the input, not on how it was produced.
double pairwise_sum(std::span<const double> values);

/// Counter-based random stream (Philox4x32-10). The sequence is a pure
/// function of (seed, stream_id) and the draw index, so substreams can be
/// handed to workers in any order without changing results.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream keyed on (this stream, index).
  RngStream substream(std::uint64_t index) const;

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer on [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();
  /// Circularly-symmetric complex Gaussian with the given total variance.
  std::complex<double> complex_normal(double variance = 1.0);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Von Mises angle with zero mean direction, in (-pi, pi]. Best-Fisher
/// rejection sampling; zero concentration is uniform, +inf is exactly 0.
double sample_von_mises(RngStream& rng, double kappa_pn);

/// Real square-root factor of a correlation matrix: factor * factor^T = R.
struct PsdSqrt {
  Eigen::Index dimension = 0;
  Eigen::MatrixXd factor;
  /// Retained (clipped) eigenvalues, ascending.
  Eigen::VectorXd eigenvalues;
};

inline constexpr double kEigenClip = 1e-10;
inline constexpr double kEigenReject = -1e-6;

/// Symmetric eigendecomposition with eigenvalues below 1e-10 clipped to 0.
/// Throws std::invalid_argument if R is not symmetric with unit diagonal, or
/// if any eigenvalue is below -1e-6.
PsdSqrt psd_sqrt(const Eigen::MatrixXd& r);

}  // namespace risd2d
