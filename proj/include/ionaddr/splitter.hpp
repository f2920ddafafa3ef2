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

#ifndef IONADDR_SPLITTER_HPP
#define IONADDR_SPLITTER_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ionaddr::splitter {

inline constexpr double kSplitClamp = 1e-6;

struct Coupler {
  double split_fraction = 0.5;  // power fraction sent to the left child
  double thermal_coeff = 0.0;   // change in split_fraction per degree C
};

// Lossless binary tree of directional couplers stored in heap order: coupler
// i feeds couplers 2i+1 (left) and 2i+2 (right); the last level feeds leaves
// in channel order.
struct SplitterTree {
  int depth = 4;
  std::vector<Coupler> couplers;
  double reference_temp = 23.0;     // degC
  double input_mfd = 4.5e-6;        // m
  double max_input_power = 2.0;     // W

  static SplitterTree balanced(int depth);

  void validate() const;
  std::size_t leaf_count() const { return std::size_t{1} << depth; }
};

struct LeafPowers {
  std::vector<double> powers;
  bool normalized = false;

  LeafPowers normalize() const;
  double spread() const;  // max / min
};

LeafPowers forward_powers(const SplitterTree& tree, double temperature);
LeafPowers forward_powers(const SplitterTree& tree);

// Exact inverse of forward_powers for strictly positive leaves.
SplitterTree fit_tree(const LeafPowers& measured, int depth);

// Max over channels and both range endpoints of |p(T) - p(Tref)| / p(Tref).
double thermal_sensitivity(const SplitterTree& tree,
                           std::pair<double, double> temp_range);

// Scales the per-coupler thermal pattern so thermal_sensitivity over the range
// equals target. Returns the calibrated tree.
SplitterTree calibrate_thermal(const SplitterTree& tree,
                               std::span<const double> pattern,
                               std::pair<double, double> temp_range,
                               double target);

// Alternating-sign unit pattern used as the default thermal response shape.
std::vector<double> default_thermal_pattern(int depth);

// Sixteen synthetic relative channel powers: factor-5 spread, best channel 6,
// two deep outliers on channels 15 and 16. Not measured data.
LeafPowers synthetic_factor5_dataset();

}  // namespace ionaddr::splitter

#endif  // IONADDR_SPLITTER_HPP
