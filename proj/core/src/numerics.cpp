#include "risd2d/numerics.hpp"

#include <algorithm>
#include <stdexcept>

namespace risd2d {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

namespace {

constexpr double kSeriesLimit = 15.0;

// Ascending series sum_k (x/2)^(2k+nu) / (k! (k+nu)!) for nu in {0, 1}.
double bessel_series(double x, int nu) {
  const double q = 0.25 * x * x;
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// Hankel asymptotic series without the e^x / sqrt(2 pi x) prefactor.
double bessel_asymptotic_scaled(double x, int nu) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) break;  // series started diverging
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double bessel_i(double x, int nu) {
  const double ax = std::abs(x);
  double value;
  if (ax <= kSeriesLimit) {
    value = bessel_series(ax, nu);
  } else {
    value = std::exp(ax) / std::sqrt(kTwoPi * ax) *
            bessel_asymptotic_scaled(ax, nu);
  }
  return (nu == 1 && x < 0.0) ? -value : value;
}

}  // namespace

double bessel_i0(double x) { return bessel_i(x, 0); }
double bessel_i1(double x) { return bessel_i(x, 1); }

double bessel_ratio(double kappa_pn) {
  if (std::isnan(kappa_pn) || kappa_pn < 0.0) {
    throw std::domain_error("bessel_ratio: concentration must be >= 0");
  }
  if (std::isinf(kappa_pn)) return 1.0;
  if (kappa_pn <= kSeriesLimit) {
    return bessel_series(kappa_pn, 1) / bessel_series(kappa_pn, 0);
  }
  return bessel_asymptotic_scaled(kappa_pn, 1) /
         bessel_asymptotic_scaled(kappa_pn, 0);
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// ---------------------------------------------------------------------------
// Philox4x32-10

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_id_),
      static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = philox4x32(ctr, key);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
  ++block_;
}

RngStream::result_type RngStream::operator()() {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(seed_, splitmix64(stream_id_ ^ splitmix64(index)));
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % n;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_normal_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

std::complex<double> RngStream::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

// ---------------------------------------------------------------------------

double sample_von_mises(RngStream& rng, double kappa_pn) {
  if (std::isnan(kappa_pn) || kappa_pn < 0.0) {
    throw std::domain_error("sample_von_mises: concentration must be >= 0");
  }
  if (std::isinf(kappa_pn)) return 0.0;
  if (kappa_pn < 1e-8) {
    // (-pi, pi]
    return kPi - kTwoPi * rng.uniform();
  }
  if (kappa_pn > 1e6) {
    // Wrapped normal; the von Mises deviation from it is O(1/kappa).
    const double x = rng.normal() / std::sqrt(kappa_pn);
    return std::remainder(x, kTwoPi);
  }

  // Best & Fisher (1979). tau - sqrt(2 tau) is rewritten to avoid
  // cancellation at small kappa.
  const double root = std::sqrt(1.0 + 4.0 * kappa_pn * kappa_pn);
  const double tau = 1.0 + root;
  const double tau_minus_two = 4.0 * kappa_pn * kappa_pn / (root + 1.0);
  const double rho =
      tau * tau_minus_two / (tau + std::sqrt(2.0 * tau)) / (2.0 * kappa_pn);
  const double r = (1.0 + rho * rho) / (2.0 * rho);

  double f;
  for (;;) {
    const double z = std::cos(kPi * rng.uniform());
    f = (1.0 + r * z) / (r + z);
    const double c = kappa_pn * (r - f);
    const double u2 = rng.uniform_open();
    if (c * (2.0 - c) - u2 > 0.0) break;
    if (std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  double angle = std::acos(std::clamp(f, -1.0, 1.0));
  if (rng.uniform() < 0.5) angle = -angle;
  return angle == -kPi ? kPi : angle;
}

PsdSqrt psd_sqrt(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols() || r.rows() == 0) {
    throw std::invalid_argument("psd_sqrt: matrix must be square and non-empty");
  }
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("psd_sqrt: matrix is not symmetric");
  }
  if ((r.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("psd_sqrt: diagonal entries must equal 1");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("psd_sqrt: eigendecomposition failed");
  }
  Eigen::VectorXd lambda = solver.eigenvalues();
  if (lambda.minCoeff() < kEigenReject) {
    throw std::invalid_argument(
        "psd_sqrt: matrix has a negative eigenvalue; not a correlation matrix");
  }
  lambda = lambda.unaryExpr([](double v) { return v < kEigenClip ? 0.0 : v; });

  PsdSqrt out;
  out.dimension = r.rows();
  out.factor = solver.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  out.eigenvalues = std::move(lambda);
  return out;
}

}  // namespace risd2d
