#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "risd2d/channel.hpp"

namespace risd2d {

enum class RisMode { active, passive, absent };

std::string_view to_string(RisMode mode);
RisMode parse_ris_mode(std::string_view text);

/// RIS hardware and configuration. Powers are in watts.
struct RisState {
  RisMode mode = RisMode::active;
  std::vector<double> theta;  // applied phase shifts, one per element
  int bits = 3;
  double kappa_pn = 4.0;      // von Mises concentration; +inf is ideal hardware
  double noise_floor = 1e-10; // sigma_F^2
  double p_dc = 0.0;
  double p_sw = 0.0;
  double amp_eff = 0.8;

  /// E{exp(j theta_noise)} = I1(kappa_pn) / I0(kappa_pn).
  double kappa() const { return bessel_ratio(kappa_pn); }
  int phase_levels() const { return 1 << bits; }
  double phase_step() const { return kTwoPi / phase_levels(); }
  /// Per-element circuit power charged against the budget in this mode.
  double hardware_power(int elements) const;
};

/// theta_n = index_n * 2 pi / 2^bits.
std::vector<double> phases_from_indices(const std::vector<int>& indices,
                                        int bits);

struct PowerAllocation {
  std::vector<double> p;         // per-pair transmit power
  double amp_power = 0.0;        // P_R
  double total_budget = 0.0;     // P
  double transmit_budget = 0.0;  // cap on sum(p) implied by the budget split
  double p_max = 0.0;
  bool feasible = true;          // false when the budget cannot cover circuit power

  double sum_p() const;
};

/// Splits a total budget P between transmitters and the RIS amplifier.
/// Active: sum(p) = rho * (P - N(P_DC + P_SW)), P_R = amp_eff * (1 - rho) * (same).
/// Passive: sum(p) = P - N * P_SW. Absent: sum(p) = P.
/// Power is divided equally among pairs. p_max defaults to the transmit budget.
/// If the circuit power reaches P, the result has feasible == false and zero
/// powers.
PowerAllocation split_budget(double total_w, const RisState& ris, int elements,
                             int pairs, double rho = 0.5,
                             std::optional<double> p_max = std::nullopt);

enum class RateMethod { closed_form, monte_carlo, asymptotic_rician, asymptotic_power };

std::string_view to_string(RateMethod method);

struct RateReport {
  std::vector<double> per_user;  // bits/s/Hz
  double sum = 0.0;
  RisMode mode = RisMode::active;
  RateMethod method = RateMethod::closed_form;
  std::vector<double> std_err;   // Monte-Carlo only
  double sum_std_err = 0.0;
};

/// Common amplification of every element such that the expected amplifier
/// output power equals P_R:  eta = sqrt(P_R / (N (sum_i P_i alpha_i + sigma_F^2))).
/// Throws std::invalid_argument unless the mode is active, P_R > 0 and the
/// denominator is positive.
double amplification_factor(const PowerAllocation& alloc,
                            const StatisticalCsi& csi, const RisState& ris);

// Second-moment building blocks. All phase-noise dependence enters through
// kappa = ris.kappa(). Indices are zero-based: i is the transmitter of pair i,
// j the receiver of pair j.

/// LoS-LoS coherence: 2 kappa^2 sum_{q<p} cos(theta_p - theta_q + psi_p - psi_q),
/// psi being the combined AoA(i)/AoD(j) phase.
double gamma_term(const RisState& ris, const StatisticalCsi& csi, int i, int j);

/// Correlation-weighted coherence for a single steering direction:
/// 2 kappa^2 sum_{q<p} r_pq cos(theta_p - theta_q + psi_p - psi_q).
double l_term(const RisState& ris, const StatisticalCsi& csi, double az,
              double el);

/// NLoS-NLoS term 2 kappa^2 sum_{q<p} r_pq^2 cos(theta_p - theta_q).
double l0_term(const RisState& ris, const StatisticalCsi& csi);

/// sum_n cos(theta_n + psi_n): alignment of the cascaded LoS with the direct LoS.
double upsilon_term(const RisState& ris, const StatisticalCsi& csi, int i, int j);

/// tau_ij = alpha_i beta_j / ((1 + gamma_A,i)(1 + gamma_B,j)).
double tau_term(const StatisticalCsi& csi, int i, int j);

/// c_ij = kappa sigma_ij sqrt(tau_ij gamma_A,i gamma_B,j gamma_ij) / sqrt(1 + gamma_ij).
double c_term(const RisState& ris, const StatisticalCsi& csi, int i, int j);

/// E{|g_B,j^T Theta Phi g_A,i|^2} (per unit eta^2).
double omega_term(const RisState& ris, const StatisticalCsi& csi, int i, int j);

/// All K x K terms at once; shares the L evaluations across pairs.
struct LinkTerms {
  Eigen::MatrixXd omega;
  Eigen::MatrixXd c;
  Eigen::MatrixXd upsilon;
};
LinkTerms compute_link_terms(const RisState& ris, const StatisticalCsi& csi);

/// Approximate ergodic rate with an explicit common amplification `eta` and
/// amplifier noise `noise_floor`. eta = 1, noise_floor = 0 gives the passive
/// surface.
RateReport ergodic_rate_with_gain(const PowerAllocation& alloc,
                                  const StatisticalCsi& csi, const RisState& ris,
                                  double eta, double noise_floor);
RateReport ergodic_rate_with_gain(const PowerAllocation& alloc,
                                  const StatisticalCsi& csi, const LinkTerms& terms,
                                  double eta, double noise_floor);

RateReport ergodic_rate_active(const PowerAllocation& alloc,
                               const StatisticalCsi& csi, const RisState& ris);
RateReport ergodic_rate_passive(const PowerAllocation& alloc,
                                const StatisticalCsi& csi, const RisState& ris);
RateReport ergodic_rate_noris(const PowerAllocation& alloc,
                              const StatisticalCsi& csi);

/// Dispatches on ris.mode.
RateReport ergodic_rate(const PowerAllocation& alloc, const StatisticalCsi& csi,
                        const RisState& ris);

/// Limit of the active/passive rates as every Rician factor grows without
/// bound; evaluated from its own closed form. ris.mode selects the variant.
RateReport asymptotic_rate_rician(const PowerAllocation& alloc,
                                  const StatisticalCsi& csi, const RisState& ris);

/// Interference-limited rate log2(1 + Omega_jj / sum_{i!=j} Omega_ij) reached
/// by both surfaces as P -> inf without direct links. Throws for K < 2 or when
/// direct links are enabled.
RateReport high_power_limit(const StatisticalCsi& csi, const RisState& ris);

/// Single pair, uncorrelated surface, blocked direct link. Throws
/// std::invalid_argument if K != 1, R != I, or direct links are enabled.
double single_pair_rate(double p, double amp_power, const RisState& ris,
                        const StatisticalCsi& csi);

/// Limit of single_pair_rate(e_u / N) with optimal phases as N -> inf.
/// Additionally requires ideal hardware (kappa = 1).
double power_scaling_limit(double e_u, double amp_power, const RisState& ris,
                           const StatisticalCsi& csi);

/// Phases co-phasing pair i's cascaded LoS path (constant offset 0).
std::vector<double> optimal_phase_single_pair(const StatisticalCsi& csi,
                                              int pair_index);

}  // namespace risd2d
