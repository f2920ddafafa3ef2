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

#include "ionaddr/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ionaddr/errors.hpp"

namespace ionaddr::splitter {

SplitterTree SplitterTree::balanced(int depth) {
  SplitterTree t;
  t.depth = depth;
  t.couplers.assign((std::size_t{1} << depth) - 1, Coupler{});
  return t;
}

void SplitterTree::validate() const {
  if (depth < 1 || depth > 20) throw DomainError("splitter depth must be in 1..20");
  if (couplers.size() != leaf_count() - 1)
    throw DomainError("splitter needs 2^depth - 1 couplers");
  for (const auto& c : couplers) {
    if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0))
      throw DomainError("split fractions must lie strictly inside (0, 1)");
    if (!std::isfinite(c.thermal_coeff))
      throw DomainError("thermal coefficients must be finite");
  }
}

LeafPowers LeafPowers::normalize() const {
  const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("leaf powers sum to zero");
  LeafPowers out;
  out.powers.reserve(powers.size());
  for (double p : powers) out.powers.push_back(p / total);
  out.normalized = true;
  return out;
}

double LeafPowers::spread() const {
  const auto [lo, hi] = std::minmax_element(powers.begin(), powers.end());
  return *hi / *lo;
}

LeafPowers forward_powers(const SplitterTree& tree, double temperature) {
  tree.validate();
  const std::size_t internal = tree.couplers.size();
  // node_power[k] for every node in heap order; leaves follow the couplers.
  std::vector<double> node_power(2 * internal + 1, 0.0);
  node_power[0] = 1.0;
  const double dt = temperature - tree.reference_temp;
  for (std::size_t i = 0; i < internal; ++i) {
    const auto& c = tree.couplers[i];
    const double r = std::clamp(c.split_fraction + c.thermal_coeff * dt,
                                kSplitClamp, 1.0 - kSplitClamp);
    node_power[2 * i + 1] = node_power[i] * r;
    node_power[2 * i + 2] = node_power[i] * (1.0 - r);
  }
  LeafPowers out;
  out.powers.assign(node_power.begin() + static_cast<std::ptrdiff_t>(internal),
                    node_power.end());
  // Products of r and 1-r already sum to one up to rounding; renormalize so
  // the invariant holds to machine precision.
  return out.normalize();
}

LeafPowers forward_powers(const SplitterTree& tree) {
  return forward_powers(tree, tree.reference_temp);
}

SplitterTree fit_tree(const LeafPowers& measured, int depth) {
  if (depth < 1 || depth > 20) throw DomainError("splitter depth must be in 1..20");
  const std::size_t leaves = std::size_t{1} << depth;
  if (measured.powers.size() != leaves)
    throw DomainError("expected " + std::to_string(leaves) + " leaf powers, got " +
                      std::to_string(measured.powers.size()));
  for (std::size_t i = 0; i < leaves; ++i)
    if (!(measured.powers[i] > 0.0) || !std::isfinite(measured.powers[i]))
      throw DomainError("leaf power for channel " + std::to_string(i + 1) +
                        " must be positive");

  const std::size_t internal = leaves - 1;
  std::vector<double> subtree(2 * internal + 1, 0.0);
  for (std::size_t i = 0; i < leaves; ++i) subtree[internal + i] = measured.powers[i];
  for (std::size_t i = internal; i-- > 0;)
    subtree[i] = subtree[2 * i + 1] + subtree[2 * i + 2];

  SplitterTree tree = SplitterTree::balanced(depth);
  for (std::size_t i = 0; i < internal; ++i)
    tree.couplers[i].split_fraction = subtree[2 * i + 1] / subtree[i];
  return tree;
}

double thermal_sensitivity(const SplitterTree& tree,
                           std::pair<double, double> temp_range) {
  if (!(temp_range.first < temp_range.second))
    throw DomainError("temperature range must be nondegenerate");
  const LeafPowers ref = forward_powers(tree);
  double worst = 0.0;
  for (double t : {temp_range.first, temp_range.second}) {
    const LeafPowers p = forward_powers(tree, t);
    for (std::size_t i = 0; i < p.powers.size(); ++i)
      worst = std::max(worst, std::abs(p.powers[i] - ref.powers[i]) / ref.powers[i]);
  }
  return worst;
}

SplitterTree calibrate_thermal(const SplitterTree& tree,
                               std::span<const double> pattern,
                               std::pair<double, double> temp_range,
                               double target) {
  tree.validate();
  if (pattern.size() != tree.couplers.size())
    throw DomainError("thermal pattern length must equal coupler count");
  if (!(target > 0.0)) throw DomainError("thermal target must be positive");
  SplitterTree out = tree;
  auto at_scale = [&](double s) {
    for (std::size_t i = 0; i < pattern.size(); ++i)
      out.couplers[i].thermal_coeff = s * pattern[i];
    return thermal_sensitivity(out, temp_range);
  };
  // Sensitivity is monotone in the scale for a fixed pattern while no
  // coupler clamps; bracket then bisect.
  double lo = 0.0;
  double hi = 1e-6;
  while (at_scale(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1.0) throw InfeasibleError("thermal target unreachable for this pattern");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-18; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at_scale(mid) < target ? lo : hi) = mid;
  }
  at_scale(0.5 * (lo + hi));
  return out;
}

std::vector<double> default_thermal_pattern(int depth) {
  std::vector<double> out((std::size_t{1} << depth) - 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (i % 2 == 0) ? 1.0 : -1.0;
  return out;
}

LeafPowers synthetic_factor5_dataset() {
  LeafPowers out;
  out.powers = {0.062, 0.071, 0.071, 0.066, 0.074, 0.100, 0.069, 0.058,
                0.063, 0.075, 0.060, 0.068, 0.057, 0.056, 0.030, 0.020};
  return out.normalize();
}

}  // namespace ionaddr::splitter
