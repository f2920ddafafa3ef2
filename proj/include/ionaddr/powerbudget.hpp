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

#ifndef IONADDR_POWERBUDGET_HPP
#define IONADDR_POWERBUDGET_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ionaddr/splitter.hpp"

namespace ionaddr::powerbudget {

struct LossElement {
  std::string name;
  double insertion_loss_db = 0.0;
  double uncertainty_db = 0.0;
};

struct ChannelBudget {
  double input_power = 2.0;       // W
  double split_fraction = 1.0 / 16.0;
  std::vector<LossElement> loss_chain;
  double aom_attenuation_db = 0.0;

  void validate() const;
};

struct DeliveredPower {
  double power = 0.0;           // W
  double total_loss_db = 0.0;   // chain + AOM attenuation
  double uncertainty_db = 0.0;  // quadrature of per-element uncertainties
  double power_low = 0.0;       // W, at +1 sigma loss
  double power_high = 0.0;      // W, at -1 sigma loss
};

double db_to_linear(double loss_db);
double linear_to_db(double ratio);

DeliveredPower delivered_power(const ChannelBudget& budget);

// The six-element ledger for the addressing path with the shortest delay line.
std::vector<LossElement> reference_loss_chain(double delay_line_db = 1.9);

struct BalancedPoint {
  std::size_t included = 0;           // k
  double balanced_power = 0.0;        // W per channel
  std::vector<std::size_t> channels;  // 1-based, strongest first
};

// For each k = n..1: keep the k strongest channels and attenuate every one of
// them down to the weakest kept channel. Returned in order of decreasing k.
std::vector<BalancedPoint> balanced_power_curve(const splitter::LeafPowers& leaves,
                                                const ChannelBudget& budget_template);

// Exhaustive max over all k-subsets of the subset minimum. Exponential in n;
// intended as an oracle for n <= 20.
double brute_force_balanced(std::span<const double> channel_powers, std::size_t k);

// Largest k whose balanced power reaches the threshold, if any.
std::optional<std::size_t> max_channels_at(std::span<const BalancedPoint> curve,
                                           double threshold_power);

// Omega = kappa * sqrt(P_ind * P_glob).
struct RabiModel {
  double kappa = 0.0;  // rad/s per W

  static RabiModel calibrated(double power_ind, double power_glob,
                              double rabi_rate_rad_s);
  static RabiModel reference();  // 2 mW, 2 mW -> 2 pi x 1 MHz
};

double rabi_rate(const RabiModel& model, double power_ind, double power_glob);

enum class BeamConfig { GlobalBeam, DualIndividual };

double crosstalk_rabi_error(double intensity_crosstalk, BeamConfig config);

// Rotation on a neighbour while the target gets a pi pulse (or, if pi_pulse
// is false, a pi/2 pulse).
double neighbor_rotation(bool pi_pulse, double rabi_error);

}  // namespace ionaddr::powerbudget

#endif  // IONADDR_POWERBUDGET_HPP
