#include "risd2d/closedform.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace risd2d {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double log2_1p(double x) { return std::log1p(x) / kLn2; }

void check_theta(const RisState& ris, const StatisticalCsi& csi) {
  if (static_cast<int>(ris.theta.size()) != csi.elements()) {
    throw std::invalid_argument("ris: expected " + std::to_string(csi.elements()) +
                                " phase shifts, got " +
                                std::to_string(ris.theta.size()));
  }
}

Eigen::VectorXcd phasors(const std::vector<double>& theta) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t n = 0; n < theta.size(); ++n) {
    v[static_cast<Eigen::Index>(n)] = std::polar(1.0, theta[n]);
  }
  return v;
}

// Re(u^H W u) - N for real symmetric W with unit diagonal equals
// 2 sum_{q<p} W_pq cos(arg u_p - arg u_q) when |u_n| = 1.
double weighted_coherence(const Eigen::MatrixXd& w, const Eigen::VectorXcd& u) {
  const Eigen::VectorXcd wu = w * u;
  return u.dot(wu).real() - static_cast<double>(u.size());
}

void finish(RateReport& r) {
  r.sum = std::accumulate(r.per_user.begin(), r.per_user.end(), 0.0);
}

}  // namespace

std::string_view to_string(RisMode mode) {
  switch (mode) {
    case RisMode::active: return "active";
    case RisMode::passive: return "passive";
    case RisMode::absent: return "absent";
  }
  return "unknown";
}

RisMode parse_ris_mode(std::string_view text) {
  if (text == "active") return RisMode::active;
  if (text == "passive") return RisMode::passive;
  if (text == "absent" || text == "noris" || text == "none") return RisMode::absent;
  throw std::invalid_argument("unknown RIS mode '" + std::string(text) + "'");
}

std::string_view to_string(RateMethod method) {
  switch (method) {
    case RateMethod::closed_form: return "closed_form";
    case RateMethod::monte_carlo: return "monte_carlo";
    case RateMethod::asymptotic_rician: return "asymptotic_rician";
    case RateMethod::asymptotic_power: return "asymptotic_power";
  }
  return "unknown";
}

double RisState::hardware_power(int elements) const {
  switch (mode) {
    case RisMode::active: return elements * (p_dc + p_sw);
    case RisMode::passive: return elements * p_sw;
    case RisMode::absent: return 0.0;
  }
  return 0.0;
}

std::vector<double> phases_from_indices(const std::vector<int>& indices,
                                        int bits) {
  const double step = kTwoPi / static_cast<double>(1 << bits);
  std::vector<double> theta(indices.size());
  for (std::size_t n = 0; n < indices.size(); ++n) theta[n] = indices[n] * step;
  return theta;
}

double PowerAllocation::sum_p() const {
  return std::accumulate(p.begin(), p.end(), 0.0);
}

PowerAllocation split_budget(double total_w, const RisState& ris, int elements,
                             int pairs, double rho, std::optional<double> p_max) {
  if (pairs < 1) throw std::invalid_argument("split_budget: pairs must be >= 1");
  if (!(rho > 0.0 && rho < 1.0) && ris.mode == RisMode::active) {
    throw std::invalid_argument("split_budget: rho must lie in (0, 1)");
  }
  PowerAllocation a;
  a.total_budget = total_w;
  const double available = total_w - ris.hardware_power(elements);
  if (!(available > 0.0)) {
    a.feasible = false;
    a.p.assign(pairs, 0.0);
    a.p_max = p_max.value_or(0.0);
    return a;
  }
  if (ris.mode == RisMode::active) {
    a.transmit_budget = rho * available;
    a.amp_power = ris.amp_eff * (1.0 - rho) * available;
  } else {
    a.transmit_budget = available;
  }
  a.p_max = p_max.value_or(a.transmit_budget);
  a.p.assign(pairs, std::min(a.transmit_budget / pairs, a.p_max));
  return a;
}

double amplification_factor(const PowerAllocation& alloc,
                            const StatisticalCsi& csi, const RisState& ris) {
  if (ris.mode != RisMode::active) {
    throw std::invalid_argument("amplification_factor: RIS is not active");
  }
  if (!(alloc.amp_power > 0.0)) {
    throw std::invalid_argument("amplification_factor: P_R must be positive");
  }
  double load = ris.noise_floor;
  for (int i = 0; i < csi.pairs_count(); ++i) load += alloc.p[i] * csi.pairs[i].alpha;
  const double denom = csi.elements() * load;
  if (!(denom > 0.0)) {
    throw std::invalid_argument(
        "amplification_factor: no incident power (all alpha_i = 0 and sigma_F^2 = 0)");
  }
  return std::sqrt(alloc.amp_power / denom);
}

double gamma_term(const RisState& ris, const StatisticalCsi& csi, int i, int j) {
  check_theta(ris, csi);
  const Eigen::VectorXcd w =
      phasors(ris.theta).cwiseProduct(csi.los_a[i]).cwiseProduct(csi.los_b[j]);
  const double k = ris.kappa();
  return k * k * (std::norm(w.sum()) - static_cast<double>(w.size()));
}

double l_term(const RisState& ris, const StatisticalCsi& csi, double az,
              double el) {
  check_theta(ris, csi);
  const Eigen::VectorXcd u =
      phasors(ris.theta).cwiseProduct(steering_vector(csi.geometry, az, el));
  const double k = ris.kappa();
  return k * k * weighted_coherence(csi.corr, u);
}

double l0_term(const RisState& ris, const StatisticalCsi& csi) {
  check_theta(ris, csi);
  const Eigen::MatrixXd r2 = csi.corr.cwiseProduct(csi.corr);
  const double k = ris.kappa();
  return k * k * weighted_coherence(r2, phasors(ris.theta));
}

double upsilon_term(const RisState& ris, const StatisticalCsi& csi, int i, int j) {
  check_theta(ris, csi);
  return phasors(ris.theta)
      .cwiseProduct(csi.los_a[i])
      .cwiseProduct(csi.los_b[j])
      .sum()
      .real();
}

double tau_term(const StatisticalCsi& csi, int i, int j) {
  const auto& a = csi.pairs[i];
  const auto& b = csi.pairs[j];
  return a.alpha * b.beta / ((1.0 + a.gamma_a) * (1.0 + b.gamma_b));
}

double c_term(const RisState& ris, const StatisticalCsi& csi, int i, int j) {
  const double g = csi.direct.rician(i, j);
  const double sigma = csi.direct.sigma_at(i, j);
  if (sigma == 0.0) return 0.0;
  return ris.kappa() * sigma *
         std::sqrt(tau_term(csi, i, j) * csi.pairs[i].gamma_a *
                   csi.pairs[j].gamma_b * g) /
         std::sqrt(1.0 + g);
}

namespace {

double assemble_omega(const StatisticalCsi& csi, int i, int j, double gamma,
                      double l_aod_j, double l_aoa_i, double l0) {
  const auto& a = csi.pairs[i];
  const auto& b = csi.pairs[j];
  return a.alpha * b.beta * csi.elements() +
         tau_term(csi, i, j) * (a.gamma_a * b.gamma_b * gamma + b.gamma_b * l_aod_j +
                                a.gamma_a * l_aoa_i + l0);
}

}  // namespace

double omega_term(const RisState& ris, const StatisticalCsi& csi, int i, int j) {
  const auto& a = csi.pairs[i];
  const auto& b = csi.pairs[j];
  return assemble_omega(csi, i, j, gamma_term(ris, csi, i, j),
                        l_term(ris, csi, b.aod_az, b.aod_el),
                        l_term(ris, csi, a.aoa_az, a.aoa_el), l0_term(ris, csi));
}

LinkTerms compute_link_terms(const RisState& ris, const StatisticalCsi& csi) {
  check_theta(ris, csi);
  const int k = csi.pairs_count();
  const double kappa = ris.kappa();
  const double k2 = kappa * kappa;
  const double n = csi.elements();
  const Eigen::VectorXcd v = phasors(ris.theta);

  std::vector<double> l_aoa(k), l_aod(k);
  for (int i = 0; i < k; ++i) {
    l_aoa[i] = k2 * weighted_coherence(csi.corr, v.cwiseProduct(csi.los_a[i]));
    l_aod[i] = k2 * weighted_coherence(csi.corr, v.cwiseProduct(csi.los_b[i]));
  }
  const double l0 = k2 * weighted_coherence(csi.corr.cwiseProduct(csi.corr), v);

  LinkTerms t;
  t.omega.resize(k, k);
  t.c.resize(k, k);
  t.upsilon.resize(k, k);
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXcd va = v.cwiseProduct(csi.los_a[i]);
    for (int j = 0; j < k; ++j) {
      const std::complex<double> s = va.cwiseProduct(csi.los_b[j]).sum();
      const double gamma = k2 * (std::norm(s) - n);
      t.omega(i, j) = assemble_omega(csi, i, j, gamma, l_aod[j], l_aoa[i], l0);
      t.upsilon(i, j) = s.real();
      t.c(i, j) = c_term(ris, csi, i, j);
    }
  }
  return t;
}

RateReport ergodic_rate_with_gain(const PowerAllocation& alloc,
                                  const StatisticalCsi& csi, const LinkTerms& terms,
                                  double eta, double noise_floor) {
  const int k = csi.pairs_count();
  RateReport r;
  r.per_user.resize(k);
  const double eta2 = eta * eta;
  auto received = [&](int i, int j) {
    const double s = csi.direct.sigma_at(i, j);
    return eta2 * terms.omega(i, j) + 2.0 * eta * terms.c(i, j) * terms.upsilon(i, j) +
           s * s;
  };
  for (int j = 0; j < k; ++j) {
    const double signal = alloc.p[j] * received(j, j);
    double denom = eta2 * csi.elements() * csi.pairs[j].beta * noise_floor +
                   csi.rx_noise[j];
    for (int i = 0; i < k; ++i) {
      if (i != j) denom += alloc.p[i] * received(i, j);
    }
    r.per_user[j] = log2_1p(signal / denom);
  }
  finish(r);
  return r;
}

RateReport ergodic_rate_with_gain(const PowerAllocation& alloc,
                                  const StatisticalCsi& csi, const RisState& ris,
                                  double eta, double noise_floor) {
  return ergodic_rate_with_gain(alloc, csi, compute_link_terms(ris, csi), eta,
                                noise_floor);
}

RateReport ergodic_rate_active(const PowerAllocation& alloc,
                               const StatisticalCsi& csi, const RisState& ris) {
  const double eta = amplification_factor(alloc, csi, ris);
  RateReport r = ergodic_rate_with_gain(alloc, csi, ris, eta, ris.noise_floor);
  r.mode = RisMode::active;
  return r;
}

RateReport ergodic_rate_passive(const PowerAllocation& alloc,
                                const StatisticalCsi& csi, const RisState& ris) {
  if (ris.mode != RisMode::passive) {
    throw std::invalid_argument("ergodic_rate_passive: RIS is not passive");
  }
  RateReport r = ergodic_rate_with_gain(alloc, csi, ris, 1.0, 0.0);
  r.mode = RisMode::passive;
  return r;
}

RateReport ergodic_rate_noris(const PowerAllocation& alloc,
                              const StatisticalCsi& csi) {
  const int k = csi.pairs_count();
  RateReport r;
  r.mode = RisMode::absent;
  r.per_user.resize(k);
  for (int j = 0; j < k; ++j) {
    const double sjj = csi.direct.sigma_at(j, j);
    double denom = csi.rx_noise[j];
    for (int i = 0; i < k; ++i) {
      if (i == j) continue;
      const double s = csi.direct.sigma_at(i, j);
      denom += alloc.p[i] * s * s;
    }
    r.per_user[j] = log2_1p(alloc.p[j] * sjj * sjj / denom);
  }
  finish(r);
  return r;
}

RateReport ergodic_rate(const PowerAllocation& alloc, const StatisticalCsi& csi,
                        const RisState& ris) {
  switch (ris.mode) {
    case RisMode::active: return ergodic_rate_active(alloc, csi, ris);
    case RisMode::passive: return ergodic_rate_passive(alloc, csi, ris);
    case RisMode::absent: return ergodic_rate_noris(alloc, csi);
  }
  throw std::logic_error("ergodic_rate: unhandled mode");
}

RateReport asymptotic_rate_rician(const PowerAllocation& alloc,
                                  const StatisticalCsi& csi, const RisState& ris) {
  if (ris.mode == RisMode::absent) {
    throw std::invalid_argument("asymptotic_rate_rician: requires an RIS");
  }
  check_theta(ris, csi);
  const bool active = ris.mode == RisMode::active;
  const double eta = active ? amplification_factor(alloc, csi, ris) : 1.0;
  const double noise_floor = active ? ris.noise_floor : 0.0;
  const double eta2 = eta * eta;
  const double kappa = ris.kappa();
  const int k = csi.pairs_count();
  const double n = csi.elements();

  Eigen::MatrixXd received(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double ab = csi.pairs[i].alpha * csi.pairs[j].beta;
      const double s = csi.direct.sigma_at(i, j);
      received(i, j) = ab * eta2 * (n + gamma_term(ris, csi, i, j)) +
                       2.0 * eta * kappa * s * std::sqrt(ab) *
                           upsilon_term(ris, csi, i, j) +
                       s * s;
    }
  }

  RateReport r;
  r.mode = ris.mode;
  r.method = RateMethod::asymptotic_rician;
  r.per_user.resize(k);
  for (int j = 0; j < k; ++j) {
    double denom = eta2 * n * csi.pairs[j].beta * noise_floor + csi.rx_noise[j];
    for (int i = 0; i < k; ++i) {
      if (i != j) denom += alloc.p[i] * received(i, j);
    }
    r.per_user[j] = log2_1p(alloc.p[j] * received(j, j) / denom);
  }
  finish(r);
  return r;
}

RateReport high_power_limit(const StatisticalCsi& csi, const RisState& ris) {
  const int k = csi.pairs_count();
  if (k < 2) {
    throw std::invalid_argument(
        "high_power_limit: a single pair has no interference; the rate is unbounded");
  }
  if (csi.direct.enabled) {
    throw std::invalid_argument("high_power_limit: requires blocked direct links");
  }
  const LinkTerms t = compute_link_terms(ris, csi);
  RateReport r;
  r.mode = ris.mode;
  r.method = RateMethod::asymptotic_power;
  r.per_user.resize(k);
  for (int j = 0; j < k; ++j) {
    double interference = 0.0;
    for (int i = 0; i < k; ++i) {
      if (i != j) interference += t.omega(i, j);
    }
    r.per_user[j] = log2_1p(t.omega(j, j) / interference);
  }
  finish(r);
  return r;
}

namespace {

void check_single_pair(const StatisticalCsi& csi) {
  if (csi.pairs_count() != 1) {
    throw std::invalid_argument("single pair analysis requires K = 1");
  }
  const int n = csi.elements();
  if ((csi.corr - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("single pair analysis requires R = I");
  }
  if (csi.direct.enabled) {
    throw std::invalid_argument("single pair analysis requires a blocked direct link");
  }
}

}  // namespace

double single_pair_rate(double p, double amp_power, const RisState& ris,
                        const StatisticalCsi& csi) {
  check_single_pair(csi);
  const auto& s = csi.pairs[0];
  const double n = csi.elements();
  const double omega_star =
      s.alpha * s.beta * n + tau_term(csi, 0, 0) * s.gamma_a * s.gamma_b *
                                 gamma_term(ris, csi, 0, 0);
  const double sf2 = ris.noise_floor;
  const double noise = csi.rx_noise[0];
  return log2_1p(p * amp_power * omega_star /
                 (n * amp_power * s.beta * sf2 + n * (p * s.alpha + sf2) * noise));
}

double power_scaling_limit(double e_u, double amp_power, const RisState& ris,
                           const StatisticalCsi& csi) {
  check_single_pair(csi);
  if (ris.kappa() != 1.0) {
    throw std::invalid_argument("power_scaling_limit: requires ideal hardware");
  }
  const auto& s = csi.pairs[0];
  const double sf2 = ris.noise_floor;
  return log2_1p(e_u * amp_power * tau_term(csi, 0, 0) * s.gamma_a * s.gamma_b /
                 (amp_power * s.beta * sf2 + sf2 * csi.rx_noise[0]));
}

std::vector<double> optimal_phase_single_pair(const StatisticalCsi& csi,
                                              int pair_index) {
  const auto& s = csi.pairs.at(pair_index);
  const Eigen::VectorXd a = steering_phase(csi.geometry, s.aoa_az, s.aoa_el);
  const Eigen::VectorXd b = steering_phase(csi.geometry, s.aod_az, s.aod_el);
  std::vector<double> theta(a.size());
  for (Eigen::Index n = 0; n < a.size(); ++n) theta[n] = -(a[n] + b[n]);
  return theta;
}

}  // namespace risd2d
