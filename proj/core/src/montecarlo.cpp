#include "risd2d/montecarlo.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>
#include <vector>

namespace risd2d {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr std::uint64_t kAmpNoiseStream = 0x4e4f495345ull;  // "NOISE"

}  // namespace

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body) {
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(workers, 1u), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

double instantaneous_sinr(const ChannelRealization& real, const PowerAllocation& alloc,
                          const RisState& ris, double eta,
                          std::span<const double> rx_noise, int j) {
  const int k = static_cast<int>(real.g_a.size());
  const bool with_ris = ris.mode != RisMode::absent;
  const double gain = ris.mode == RisMode::active ? eta : 1.0;

  Eigen::VectorXcd reflect;  // Lambda Theta Phi applied elementwise to g_B,j
  if (with_ris) {
    const auto n = real.phase_noise.size();
    reflect.resize(n);
    for (Eigen::Index e = 0; e < n; ++e) {
      reflect[e] = gain * std::polar(1.0, ris.theta[e] + real.phase_noise[e]) *
                   real.g_b[j][e];
    }
  }

  auto channel = [&](int i) {
    std::complex<double> g = real.h(i, j);
    if (with_ris) g += reflect.cwiseProduct(real.g_a[i]).sum();
    return g;
  };

  const double signal = alloc.p[j] * std::norm(channel(j));
  double denom = rx_noise[j];
  for (int i = 0; i < k; ++i) {
    if (i != j) denom += alloc.p[i] * std::norm(channel(i));
  }
  if (ris.mode == RisMode::active) denom += reflect.squaredNorm() * ris.noise_floor;
  return signal / denom;
}

double instantaneous_sinr(const ChannelRealization& real, const StatisticalCsi& csi,
                          const PowerAllocation& alloc, const RisState& ris, int j) {
  const double eta =
      ris.mode == RisMode::active ? amplification_factor(alloc, csi, ris) : 1.0;
  return instantaneous_sinr(real, alloc, ris, eta, csi.rx_noise, j);
}

RateReport ergodic_rate_mc(const StatisticalCsi& csi, const PowerAllocation& alloc,
                           const RisState& ris_in, const McConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("ergodic_rate_mc: trials must be >= 1");
  RisState ris = ris_in;
  ris.mode = cfg.mode;
  if (ris.mode != RisMode::absent && static_cast<int>(ris.theta.size()) != csi.elements()) {
    throw std::invalid_argument("ergodic_rate_mc: phase vector size mismatch");
  }
  const int k = csi.pairs_count();
  const double eta =
      ris.mode == RisMode::active ? amplification_factor(alloc, csi, ris) : 1.0;
  const std::size_t trials = cfg.trials;

  // rates[j * trials + t]
  std::vector<double> rates(static_cast<std::size_t>(k) * trials);
  parallel_for(trials, cfg.workers, [&](std::size_t t) {
    RngStream rng(cfg.seed, t);
    const ChannelRealization real = sample_realization(csi, rng, ris.kappa_pn);
    for (int j = 0; j < k; ++j) {
      const double sinr = instantaneous_sinr(real, alloc, ris, eta, csi.rx_noise, j);
      rates[j * trials + t] = std::log1p(sinr) / kLn2;
    }
  });

  RateReport r;
  r.mode = ris.mode;
  r.method = RateMethod::monte_carlo;
  r.per_user.resize(k);
  r.std_err.resize(k);
  const double n = static_cast<double>(trials);
  std::vector<double> sums(trials, 0.0);
  std::vector<double> dev(trials);
  for (int j = 0; j < k; ++j) {
    const std::span<const double> col(rates.data() + j * trials, trials);
    const double mean = pairwise_sum(col) / n;
    for (std::size_t t = 0; t < trials; ++t) {
      dev[t] = (col[t] - mean) * (col[t] - mean);
      sums[t] += col[t];
    }
    r.per_user[j] = mean;
    r.std_err[j] = trials > 1 ? std::sqrt(pairwise_sum(dev) / (n - 1.0) / n) : 0.0;
  }
  r.sum = pairwise_sum(sums) / n;
  for (std::size_t t = 0; t < trials; ++t) dev[t] = (sums[t] - r.sum) * (sums[t] - r.sum);
  r.sum_std_err = trials > 1 ? std::sqrt(pairwise_sum(dev) / (n - 1.0) / n) : 0.0;
  return r;
}

AmpPowerCheck verify_amp_power(const StatisticalCsi& csi, const PowerAllocation& alloc,
                               const RisState& ris, const McConfig& cfg,
                               std::optional<double> eta_override) {
  if (ris.mode != RisMode::active) {
    throw std::invalid_argument("verify_amp_power: RIS is not active");
  }
  if (cfg.trials < 1) throw std::invalid_argument("verify_amp_power: trials must be >= 1");
  const double eta = eta_override.value_or(amplification_factor(alloc, csi, ris));
  const int k = csi.pairs_count();
  const int n = csi.elements();
  const std::size_t trials = cfg.trials;

  std::vector<double> power(trials);
  parallel_for(trials, cfg.workers, [&](std::size_t t) {
    RngStream rng(cfg.seed, t);
    const ChannelRealization real = sample_realization(csi, rng, ris.kappa_pn);
    RngStream noise_rng = rng.substream(kAmpNoiseStream);
    Eigen::VectorXcd op(n);
    for (int e = 0; e < n; ++e) {
      op[e] = eta * std::polar(1.0, ris.theta[e] + real.phase_noise[e]);
    }
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      total += alloc.p[i] * op.cwiseProduct(real.g_a[i]).squaredNorm();
    }
    Eigen::VectorXcd noise(n);
    for (int e = 0; e < n; ++e) noise[e] = noise_rng.complex_normal(ris.noise_floor);
    total += op.cwiseProduct(noise).squaredNorm();
    power[t] = total;
  });

  AmpPowerCheck out;
  out.estimate = pairwise_sum(power) / static_cast<double>(trials);
  out.target = alloc.amp_power;
  out.residual = std::abs(out.estimate - out.target) / out.target;
  return out;
}

double total_power(const PowerAllocation& alloc, const RisState& ris, RisMode mode,
                   int elements) {
  const double transmit = alloc.sum_p();
  switch (mode) {
    case RisMode::active:
      return transmit + alloc.amp_power / ris.amp_eff +
             elements * (ris.p_dc + ris.p_sw);
    case RisMode::passive: return transmit + elements * ris.p_sw;
    case RisMode::absent: return transmit;
  }
  return transmit;
}

}  // namespace risd2d
