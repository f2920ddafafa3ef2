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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ionaddr/powerbudget.hpp"
#include "ionaddr/splitter.hpp"
#include "oracles.hpp"

using namespace ionaddr;
using namespace ionaddr::powerbudget;
using std::numbers::pi;

TEST_CASE("lossless chain delivers the split share") {
  ChannelBudget b;
  const auto d = delivered_power(b);
  CHECK(d.power == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(d.total_loss_db == 0.0);
  CHECK(d.uncertainty_db == 0.0);
}

TEST_CASE("best-case loss chain") {
  ChannelBudget b;
  b.loss_chain = reference_loss_chain(1.9);
  const auto d = delivered_power(b);
  CHECK(d.total_loss_db == doctest::Approx(17.4).epsilon(1e-12));
  // Independent dB arithmetic.
  const double expect = 0.125 * std::pow(10.0, -17.4 / 10.0);
  CHECK(d.power == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::abs(d.power - 2.27e-3) < 0.005e-3);
  CHECK(d.uncertainty_db == doctest::Approx(0.4 * std::sqrt(6.0)).epsilon(1e-12));
  CHECK(d.power_low < d.power);
  CHECK(d.power_high > d.power);
  CHECK(d.power_low == doctest::Approx(expect * std::pow(10.0, -d.uncertainty_db / 10.0)));
}

TEST_CASE("3 dB of AOM attenuation halves the power") {
  ChannelBudget b;
  b.loss_chain = reference_loss_chain();
  const double p0 = delivered_power(b).power;
  b.aom_attenuation_db = 10.0 * std::log10(2.0);
  CHECK(std::abs(delivered_power(b).power / p0 - 0.5) < 1e-12);
}

TEST_CASE("loss chains compose multiplicatively") {
  ChannelBudget whole;
  whole.loss_chain = reference_loss_chain(3.1);
  ChannelBudget first = whole, second = whole;
  first.loss_chain.assign(whole.loss_chain.begin(), whole.loss_chain.begin() + 3);
  second.loss_chain.assign(whole.loss_chain.begin() + 3, whole.loss_chain.end());
  second.input_power = delivered_power(first).power;
  second.split_fraction = 1.0;
  CHECK(delivered_power(second).power ==
        doctest::Approx(delivered_power(whole).power).epsilon(1e-12));
}

TEST_CASE("negative losses are rejected") {
  ChannelBudget b;
  b.loss_chain = {{"gain", -1.0, 0.0}};
  CHECK_THROWS(delivered_power(b));
}

TEST_CASE("balanced curve against exhaustive subsets") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  ChannelBudget tmpl;
  tmpl.loss_chain = reference_loss_chain();
  for (int rep = 0; rep < 5; ++rep) {
    splitter::LeafPowers leaves;
    for (int i = 0; i < 16; ++i) leaves.powers.push_back(u(rng));
    leaves = leaves.normalize();
    const auto curve = balanced_power_curve(leaves, tmpl);
    REQUIRE(curve.size() == 16);
    std::vector<double> delivered;
    // The curve normalizes its input; feed the oracle the same fractions.
    for (double f : leaves.normalize().powers) {
      ChannelBudget b = tmpl;
      b.split_fraction = f;
      delivered.push_back(delivered_power(b).power);
    }
    for (const auto& pt : curve) {
      CHECK(pt.balanced_power == oracle::best_subset_min(delivered, pt.included));
      CHECK(pt.balanced_power == brute_force_balanced(delivered, pt.included));
    }
    for (std::size_t i = 1; i < curve.size(); ++i)
      CHECK(curve[i].included < curve[i - 1].included);
    // Non-increasing in k.
    for (std::size_t i = 1; i < curve.size(); ++i)
      CHECK(curve[i - 1].balanced_power <= curve[i].balanced_power);
  }
}

TEST_CASE("uniform channels give a flat curve") {
  splitter::LeafPowers leaves{std::vector<double>(16, 1.0 / 16.0), true};
  const auto curve = balanced_power_curve(leaves, ChannelBudget{});
  for (const auto& pt : curve) CHECK(pt.balanced_power == curve.front().balanced_power);
}

TEST_CASE("synthetic dataset needs the two worst channels dropped") {
  const auto leaves = splitter::synthetic_factor5_dataset();
  ChannelBudget tmpl;
  tmpl.loss_chain = reference_loss_chain();
  const auto curve = balanced_power_curve(leaves, tmpl);
  const auto k = max_channels_at(curve, 2e-3);
  REQUIRE(k.has_value());
  CHECK(*k == 14);
  for (const auto& pt : curve) {
    if (pt.included == 14) {
      CHECK(std::find(pt.channels.begin(), pt.channels.end(), 15u) == pt.channels.end());
      CHECK(std::find(pt.channels.begin(), pt.channels.end(), 16u) == pt.channels.end());
      CHECK(pt.channels.front() == 6u);
    }
  }
  CHECK_FALSE(max_channels_at(curve, 1.0).has_value());
}

TEST_CASE("Rabi rate calibration") {
  const auto m = RabiModel::reference();
  CHECK(rabi_rate(m, 2e-3, 2e-3) == doctest::Approx(2 * pi * 1e6).epsilon(1e-15));
  CHECK(rabi_rate(m, 0.0, 5e-3) == 0.0);
  CHECK(rabi_rate(m, 8e-3, 2e-3) == doctest::Approx(2 * pi * 2e6).epsilon(1e-14));
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1e-2);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(rabi_rate(m, a, b) == rabi_rate(m, b, a));
  }
  CHECK_THROWS(rabi_rate(m, -1e-3, 1e-3));
}

TEST_CASE("crosstalk error scaling") {
  CHECK(crosstalk_rabi_error(1e-4, BeamConfig::GlobalBeam) == doctest::Approx(1e-2).epsilon(1e-15));
  CHECK(crosstalk_rabi_error(1e-4, BeamConfig::DualIndividual) == 1e-4);
  CHECK(crosstalk_rabi_error(0.0, BeamConfig::GlobalBeam) == 0.0);
  CHECK(crosstalk_rabi_error(0.0, BeamConfig::DualIndividual) == 0.0);
  CHECK(crosstalk_rabi_error(1.0, BeamConfig::GlobalBeam) ==
        crosstalk_rabi_error(1.0, BeamConfig::DualIndividual));
  for (int i = 1; i < 1000; ++i) {
    const double x = i / 1000.0;
    CHECK(crosstalk_rabi_error(x, BeamConfig::GlobalBeam) >
          crosstalk_rabi_error(x, BeamConfig::DualIndividual));
  }
  CHECK_THROWS(crosstalk_rabi_error(1.5, BeamConfig::GlobalBeam));
}

TEST_CASE("neighbour rotation") {
  CHECK(neighbor_rotation(true, 1e-2) == doctest::Approx(pi / 100).epsilon(1e-15));
  CHECK(neighbor_rotation(true, 0.0) == 0.0);
  CHECK(neighbor_rotation(true, 1e-4) == doctest::Approx(pi * 1e-4).epsilon(1e-15));
}
