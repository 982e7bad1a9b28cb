#include <doctest.h>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "afp/metrics.hpp"
#include "afp/targets.hpp"

using namespace afp;

namespace {

// Measured |W|^2 table for a three-channel cyclic hop, kept on disk next to
// the tests. Entries carry no phase, which every metric except fidelity is
// insensitive to anyway.
struct Fixture {
  Mat w;
  TargetTransform target;
};

Fixture load_fixture() {
  std::ifstream in(std::string(AFP_DATA_DIR) + "/hop3_w.json");
  REQUIRE(in.good());
  nlohmann::json j = nlohmann::json::parse(in);
  auto power = j.at("power").get<std::vector<std::vector<double>>>();
  auto map = j.at("hop_map").get<std::vector<int>>();
  int n = static_cast<int>(power.size());
  Mat w(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) w(r, c) = std::sqrt(power[r][c]);
  Mat t = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) t(k, map[k]) = 1.0;
  return {w, TargetTransform::custom_hop(t, map)};
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("noise model validates and reduces its parameters") {
  NoiseModel nm(200.0, 0.5, 1.0);
  CHECK(nm.mu_eff() == doctest::Approx(50.0).epsilon(1e-15));
  CHECK(NoiseModel(200.0, 1.0, 0.0).mu_eff() == doctest::Approx(200.0));
  CHECK(NoiseModel::from_mu_eff(80.0).mu_eff() == doctest::Approx(80.0));

  CHECK_THROWS_AS(NoiseModel(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel(1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel(1.0, 1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel(1.0, 1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::from_mu_eff(0.0), std::invalid_argument);
}

TEST_CASE("fidelity is scale and global-phase invariant") {
  TargetTransform t = permutation_power(3, 1);
  Mat w = 0.3 * std::polar(1.0, 1.234) * t.matrix;
  CHECK(fidelity(w, t) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(success_probability(w, t) == doctest::Approx(0.09).epsilon(1e-13));

  CHECK_THROWS_AS(fidelity(Mat::Zero(3, 3), t), std::domain_error);

  // A relative phase between entries does hurt fidelity...
  Mat skew = t.matrix;
  skew(0, 2) *= std::polar(1.0, 1.0);
  CHECK(fidelity(skew, t) < 0.95);
  // ...but power-based metrics never see it.
  for (int k = 0; k < 3; ++k)
    CHECK(selectivity(skew, k, t.hop_map[k]) ==
          doctest::Approx(selectivity(t.matrix, k, t.hop_map[k]))
              .epsilon(1e-15));
}

TEST_CASE("an attenuated perfect map keeps fidelity one") {
  TargetTransform t = dft_target(4);
  Mat w = 0.5 * t.matrix;
  CHECK(fidelity(w, t) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(success_probability(w, t) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("selectivities in a row form a conditional distribution") {
  Fixture fx = load_fixture();
  for (int k = 0; k < 3; ++k) {
    double pk = channel_probability(fx.w, k);
    double row_sum = 0.0;
    for (int l = 0; l < 3; ++l) {
      double c = selectivity(fx.w, k, l);
      CHECK(c == doctest::Approx(std::norm(fx.w(k, l)) / pk).epsilon(1e-13));
      row_sum += c;
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  Mat dead = fx.w;
  dead.row(1).setZero();
  CHECK_THROWS_AS(selectivity(dead, 1, 0), std::domain_error);
  CHECK_THROWS_AS(mi_hop(dead, 1, 0, NoiseModel::from_mu_eff(10.0)),
                  std::domain_error);
  CHECK_THROWS_AS(selectivity(fx.w, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(channel_probability(fx.w, -1), std::invalid_argument);
}

TEST_CASE("measured hop fixture reproduces its reported figures") {
  Fixture fx = load_fixture();
  CHECK(channel_probability(fx.w, 0) == doctest::Approx(0.22602).epsilon(1e-12));
  CHECK(channel_probability(fx.w, 1) == doctest::Approx(0.26763).epsilon(1e-12));
  CHECK(channel_probability(fx.w, 2) == doctest::Approx(0.29893).epsilon(1e-12));
  double mean_p = (0.22602 + 0.26763 + 0.29893) / 3.0;
  CHECK(mean_p == doctest::Approx(0.26419333333333334).epsilon(1e-15));

  CHECK(selectivity(fx.w, 0, 2) ==
        doctest::Approx(0.9996460490222104).epsilon(1e-12));
  CHECK(selectivity(fx.w, 1, 0) ==
        doctest::Approx(0.9963008631319359).epsilon(1e-12));
  CHECK(selectivity(fx.w, 2, 1) ==
        doctest::Approx(0.9943799551734519).epsilon(1e-12));

  NoiseModel nm = NoiseModel::from_mu_eff(200.0);
  CHECK(snr(fx.w, 0, 2, nm) ==
        doctest::Approx(44.476377952755904).epsilon(1e-12));
  CHECK(mi_hop(fx.w, 0, 2, nm) ==
        doctest::Approx(5.5070454476731765).epsilon(1e-12));
  CHECK(mi_hop(fx.w, 1, 0, nm) ==
        doctest::Approx(5.508244510715392).epsilon(1e-12));
  CHECK(mi_hop(fx.w, 2, 1, nm) ==
        doctest::Approx(5.5077471729757335).epsilon(1e-12));
}

TEST_CASE("hop rate equals the log of one plus the link ratio") {
  Fixture fx = load_fixture();
  NoiseModel nm(400.0, 0.5, 1.0);
  for (auto [k, l] : fx.target.scored_pairs())
    CHECK(mi_hop(fx.w, k, l, nm) ==
          doctest::Approx(std::log2(1.0 + snr(fx.w, k, l, nm)))
              .epsilon(1e-13));
}

TEST_CASE("ideal maps hit closed-form rates") {
  NoiseModel nm = NoiseModel::from_mu_eff(200.0);
  TargetTransform hop = permutation_power(2, 1);
  CHECK(mi_hop(hop.matrix, 0, hop.hop_map[0], nm) ==
        doctest::Approx(std::log2(201.0)).epsilon(1e-13));
  CHECK(std::log2(201.0) == doctest::Approx(7.651051691178929).epsilon(1e-15));

  // A uniform splitter delivers 1/n of the power to every branch.
  const double want[] = {std::log2(101.0), std::log2(1.0 + 200.0 / 3.0),
                         std::log2(51.0)};
  CHECK(want[0] == doctest::Approx(6.658211482751795).epsilon(1e-15));
  CHECK(want[1] == doctest::Approx(6.08037341646402).epsilon(1e-15));
  CHECK(want[2] == doctest::Approx(5.672425341971495).epsilon(1e-15));
  for (int n : {2, 3, 4}) {
    TargetTransform b = dft_target(n);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        CHECK(mi_broadcast(b.matrix, k, l, nm) ==
              doctest::Approx(want[n - 2]).epsilon(1e-13));
  }
}

TEST_CASE("rates ignore output phase rotations") {
  Fixture fx = load_fixture();
  Mat rotated = fx.w;
  for (int k = 0; k < 3; ++k) rotated.row(k) *= std::polar(1.0, 0.7 * (k + 1));
  NoiseModel nm = NoiseModel::from_mu_eff(150.0);
  for (auto [k, l] : fx.target.scored_pairs()) {
    CHECK(mi_hop(rotated, k, l, nm) ==
          doctest::Approx(mi_hop(fx.w, k, l, nm)).epsilon(1e-13));
    CHECK(channel_probability(rotated, k) ==
          doctest::Approx(channel_probability(fx.w, k)).epsilon(1e-14));
  }
}

TEST_CASE("rates grow with effective photon number") {
  Fixture fx = load_fixture();
  std::vector<double> grid = {50.0, 100.0, 200.0, 250.0, 400.0};
  std::vector<MuSweepRow> sweep = mu_sweep(fx.w, fx.target, grid);
  REQUIRE(sweep.size() == 5);
  for (const MuSweepRow& row : sweep) REQUIRE(row.mi.entries.size() == 3);
  for (std::size_t link = 0; link < 3; ++link)
    for (std::size_t r = 1; r < sweep.size(); ++r)
      CHECK(sweep[r].mi.entries[link].bits >
            sweep[r - 1].mi.entries[link].bits);

  // The weakest link changes hands as photon number grows: output 0 gets
  // the least power but keeps the best selectivity, so it trails while
  // shot noise dominates and leads once crosstalk takes over.
  auto argmin = [](const MiAggregate& agg) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < agg.entries.size(); ++i)
      if (agg.entries[i].bits < agg.entries[best].bits) best = i;
    return best;
  };
  auto argmax = [](const MiAggregate& agg) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < agg.entries.size(); ++i)
      if (agg.entries[i].bits > agg.entries[best].bits) best = i;
    return best;
  };
  for (int r : {0, 1, 2}) CHECK(argmin(sweep[r].mi) == 0);
  for (int r : {3, 4}) CHECK(argmax(sweep[r].mi) == 0);

  CHECK_THROWS_AS(mu_sweep(fx.w, fx.target, {10.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(mu_sweep(fx.w, fx.target, {-5.0}), std::invalid_argument);
}

TEST_CASE("aggregate rate summarizes the scored pairs") {
  Fixture fx = load_fixture();
  NoiseModel nm = NoiseModel::from_mu_eff(200.0);
  MiAggregate agg = mi_aggregate(fx.w, fx.target, nm);
  REQUIRE(agg.entries.size() == 3);
  CHECK(agg.entries[0].out_channel == 0);
  CHECK(agg.entries[0].in_channel == 2);
  CHECK(agg.mi_min == doctest::Approx(5.5070454476731765).epsilon(1e-12));
  CHECK(agg.mi_mean == doctest::Approx((5.5070454476731765 +
                                        5.508244510715392 +
                                        5.5077471729757335) /
                                       3.0)
                           .epsilon(1e-12));
  double hi = 0.0;
  for (const MiEntry& e : agg.entries) hi = std::max(hi, e.bits);
  CHECK(hi - agg.mi_min <= 0.0013);

  // A broadcast scores every pair.
  TargetTransform b = dft_target(3);
  CHECK(mi_aggregate(b.matrix, b, nm).entries.size() == 9);
}

TEST_CASE("report bundles the metrics consistently") {
  Fixture fx = load_fixture();
  NoiseModel nm = NoiseModel::from_mu_eff(200.0);
  MetricReport rep = evaluate_report(fx.w, fx.target, &nm);
  CHECK(rep.fidelity == doctest::Approx(fidelity(fx.w, fx.target)));
  CHECK(rep.success ==
        doctest::Approx(success_probability(fx.w, fx.target)));
  REQUIRE(rep.channel_probs.size() == 3);
  CHECK(rep.channel_probs[2] == doctest::Approx(0.29893).epsilon(1e-12));
  CHECK(rep.selectivities(0, 2) ==
        doctest::Approx(0.9996460490222104).epsilon(1e-12));
  REQUIRE(rep.mu_eff.has_value());
  CHECK(rep.mu_eff.value() == doctest::Approx(200.0));
  REQUIRE(rep.mi.has_value());
  CHECK(rep.mi->mi_min == doctest::Approx(5.5070454476731765).epsilon(1e-12));

  MetricReport quiet = evaluate_report(fx.w, fx.target, nullptr);
  CHECK_FALSE(quiet.mi.has_value());
  CHECK_FALSE(quiet.mu_eff.has_value());

  // A dead output row downgrades its selectivity entries to NaN rather
  // than failing the whole report.
  Mat dead = fx.w;
  dead.row(1).setZero();
  MetricReport partial = evaluate_report(dead, fx.target, nullptr);
  CHECK(std::isnan(partial.selectivities(1, 1)));
  CHECK_FALSE(std::isnan(partial.selectivities(0, 0)));
  CHECK(partial.channel_probs[1] == 0.0);
}

}  // TEST_SUITE
