// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ionaddr/powerbudget.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>

#include "ionaddr/errors.hpp"

namespace ionaddr::powerbudget {

using std::numbers::pi;

void ChannelBudget::validate() const {
  if (!(input_power >= 0.0) || !std::isfinite(input_power))
    throw DomainError("input power must be nonnegative");
  if (!(split_fraction >= 0.0 && split_fraction <= 1.0))
    throw DomainError("split fraction must lie in [0, 1]");
  if (!(aom_attenuation_db >= 0.0))
    throw DomainError("AOM attenuation must be nonnegative");
  for (const auto& e : loss_chain) {
    if (!(e.insertion_loss_db >= 0.0) || !std::isfinite(e.insertion_loss_db))
      throw DomainError("insertion loss of '" + e.name + "' must be >= 0 dB");
    if (!(e.uncertainty_db >= 0.0))
      throw DomainError("uncertainty of '" + e.name + "' must be >= 0 dB");
  }
}

double db_to_linear(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

double linear_to_db(double ratio) { return -10.0 * std::log10(ratio); }

DeliveredPower delivered_power(const ChannelBudget& budget) {
  budget.validate();
  double loss = budget.aom_attenuation_db;
  double var = 0.0;
  for (const auto& e : budget.loss_chain) {
    loss += e.insertion_loss_db;
    var += e.uncertainty_db * e.uncertainty_db;
  }
  DeliveredPower out;
  out.total_loss_db = loss;
  out.uncertainty_db = std::sqrt(var);
  const double base = budget.input_power * budget.split_fraction;
  out.power = base * db_to_linear(loss);
  out.power_low = base * db_to_linear(loss + out.uncertainty_db);
  out.power_high = base * db_to_linear(loss - out.uncertainty_db);
  return out;
}

std::vector<LossElement> reference_loss_chain(double delay_line_db) {
  return {
      {"Waveguide", 5.0, 0.4},
      {"Waveguide-VGA bond + Fibers", 4.9, 0.4},
      {"AOM (single device)", 3.0, 0.4},
      {"Variable Delay lines", delay_line_db, 0.4},
      {"VGA", 1.4, 0.4},
      {"Telescope + Viewport", 1.2, 0.4},
  };
}

std::vector<BalancedPoint> balanced_power_curve(const splitter::LeafPowers& leaves,
                                                const ChannelBudget& budget_template) {
  if (leaves.powers.empty()) throw DomainError("need at least one channel");
  const splitter::LeafPowers norm = leaves.normalize();
  const std::size_t n = norm.powers.size();

  std::vector<double> delivered(n);
  for (std::size_t i = 0; i < n; ++i) {
    ChannelBudget b = budget_template;
    b.split_fraction = norm.powers[i];
    delivered[i] = delivered_power(b).power;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Strongest first; equal powers keep channel order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return delivered[a] > delivered[b];
  });

  std::vector<BalancedPoint> curve;
  curve.reserve(n);
  for (std::size_t k = n; k >= 1; --k) {
    BalancedPoint pt;
    pt.included = k;
    pt.balanced_power = delivered[order[k - 1]];
    for (std::size_t j = 0; j < k; ++j) pt.channels.push_back(order[j] + 1);
    curve.push_back(std::move(pt));
  }
  return curve;
}

double brute_force_balanced(std::span<const double> channel_powers, std::size_t k) {
  const std::size_t n = channel_powers.size();
  if (k == 0 || k > n) throw DomainError("subset size out of range");
  if (n > 24) throw DomainError("exhaustive subset search limited to 24 channels");
  double best = -1.0;
  const std::uint32_t limit = std::uint32_t{1} << n;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != k) continue;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint32_t{1} << i)) lo = std::min(lo, channel_powers[i]);
    best = std::max(best, lo);
  }
  return best;
}

std::optional<std::size_t> max_channels_at(std::span<const BalancedPoint> curve,
                                           double threshold_power) {
  std::optional<std::size_t> best;
  for (const auto& pt : curve)
    if (pt.balanced_power >= threshold_power && (!best || pt.included > *best))
      best = pt.included;
  return best;
}

RabiModel RabiModel::calibrated(double power_ind, double power_glob,
                                double rabi_rate_rad_s) {
  if (!(power_ind > 0.0 && power_glob > 0.0 && rabi_rate_rad_s > 0.0))
    throw DomainError("Rabi calibration point must be positive");
  return {rabi_rate_rad_s / std::sqrt(power_ind * power_glob)};
}

RabiModel RabiModel::reference() {
  return calibrated(2e-3, 2e-3, 2.0 * pi * 1e6);
}

double rabi_rate(const RabiModel& model, double power_ind, double power_glob) {
  if (!(model.kappa > 0.0)) throw DomainError("Rabi calibration must be positive");
  if (!(power_ind >= 0.0 && power_glob >= 0.0))
    throw DomainError("optical powers must be nonnegative");
  return model.kappa * std::sqrt(power_ind * power_glob);
}

double crosstalk_rabi_error(double intensity_crosstalk, BeamConfig config) {
  if (!(intensity_crosstalk >= 0.0 && intensity_crosstalk <= 1.0))
    throw DomainError("intensity crosstalk must lie in [0, 1]");
  // Rabi rate goes as the field of each beam: one crosstalk field against a
  // full global field, or two crosstalk fields against each other.
  return config == BeamConfig::GlobalBeam ? std::sqrt(intensity_crosstalk)
                                          : intensity_crosstalk;
}

double neighbor_rotation(bool pi_pulse, double rabi_error) {
  if (!(rabi_error >= 0.0 && rabi_error <= 1.0))
    throw DomainError("Rabi-rate error must lie in [0, 1]");
  return (pi_pulse ? pi : 0.5 * pi) * rabi_error;
}

}  // namespace ionaddr::powerbudget
