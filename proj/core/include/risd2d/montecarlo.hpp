#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "risd2d/channel.hpp"
#include "risd2d/closedform.hpp"

namespace risd2d {

struct McConfig {
  std::uint64_t trials = 20000;
  std::uint64_t seed = 1;
  RisMode mode = RisMode::active;
  unsigned workers = 1;
};

/// Runs body(index) for index in [0, count) on up to `workers` threads.
/// Each index is visited exactly once; the caller must only write to
/// index-owned storage.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

/// Instantaneous SINR at receiver j for one realization.
///   active:  cascaded gain eta, amplifier noise ||g_B,j^T Lambda Theta Phi||^2 sigma_F^2
///   passive: unit gain, no amplifier noise
///   absent:  direct links only
double instantaneous_sinr(const ChannelRealization& real, const PowerAllocation& alloc,
                          const RisState& ris, double eta,
                          std::span<const double> rx_noise, int j);

/// Same, with eta from amplification_factor for an active RIS.
double instantaneous_sinr(const ChannelRealization& real, const StatisticalCsi& csi,
                          const PowerAllocation& alloc, const RisState& ris, int j);

/// Sample mean of log2(1 + SINR_j) over cfg.trials independent realizations.
/// Trial t draws from RngStream(cfg.seed, t), so the report is bit-identical
/// for any worker count. cfg.mode overrides ris.mode.
RateReport ergodic_rate_mc(const StatisticalCsi& csi, const PowerAllocation& alloc,
                           const RisState& ris, const McConfig& cfg);

/// Monte-Carlo estimate of sum_i P_i E||Lambda Theta Phi g_A,i||^2 + E||Lambda Theta Phi n_F||^2.
struct AmpPowerCheck {
  double estimate = 0.0;
  double target = 0.0;
  double residual = 0.0;  // |estimate - target| / target
};

/// eta defaults to amplification_factor(alloc, csi, ris).
AmpPowerCheck verify_amp_power(const StatisticalCsi& csi, const PowerAllocation& alloc,
                               const RisState& ris, const McConfig& cfg,
                               std::optional<double> eta = std::nullopt);

/// Total consumed power in watts for the given mode.
double total_power(const PowerAllocation& alloc, const RisState& ris, RisMode mode,
                   int elements);

}  // namespace risd2d
