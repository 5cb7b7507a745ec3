#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "erec/errors.hpp"
#include "erec/junior_senior.hpp"
#include "erec/purification.hpp"

using namespace erec;
namespace pu = erec::purification;
namespace js = erec::junior_senior;

TEST_CASE("shock difference CDF matches the triangular closed form") {
  CHECK(pu::shock_difference_cdf(-3.0) == 0.0);
  CHECK(pu::shock_difference_cdf(-2.0) == 0.0);
  CHECK(pu::shock_difference_cdf(-1.0) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
  CHECK(pu::shock_difference_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pu::shock_difference_cdf(1.0) == doctest::Approx(7.0 / 8.0).epsilon(1e-15));
  CHECK(pu::shock_difference_cdf(2.0) == 1.0);
  CHECK(pu::shock_difference_cdf(3.0) == 1.0);

  double prev = -1.0;
  for (double w = -2.5; w <= 2.5; w += 0.01) {
    const double f = pu::shock_difference_cdf(w);
    CHECK(f >= prev);
    CHECK(std::abs(pu::shock_difference_cdf(-w) - (1.0 - f)) <= 1e-15);
    prev = f;
  }
}

TEST_CASE("shock difference CDF agrees with Monte Carlo sampling") {
  std::mt19937 rng(20260814);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = 2000000;
  const std::vector<double> points = {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
  std::vector<long> below(points.size(), 0);
  for (int i = 0; i < n; ++i) {
    const double w = unit(rng) - unit(rng);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (w <= points[j]) ++below[j];
    }
  }
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double empirical = static_cast<double>(below[j]) / n;
    CHECK(std::abs(empirical - pu::shock_difference_cdf(points[j])) < 3e-3);
  }
}

TEST_CASE("perturbed fixed points converge and agree across starts") {
  std::vector<pu::PerturbedEquilibrium> runs;
  for (double start : {0.1, 0.5, 0.9}) {
    runs.push_back(pu::perturbed_fixed_point(2.0, 1.0, 0.95, 0.90, 0.1, start,
                                             pu::ShockFamily::UniformSymmetric, {}));
    const auto& run = runs.back();
    REQUIRE(run.converged);
    CHECK(run.residual <= 1e-10);
    for (const auto& row : run.choice_prob) {
      for (double p : row) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
      }
    }
    // Junior-on-junior cooperation settles at the frozen interior value.
    CHECK(run.choice_prob[0][0] == doctest::Approx(0.17751370434).epsilon(1e-8));
    // Juniors still reward seniority, seniors still strictly defect: their
    // payoff gaps dwarf the shock scale, so the CDF saturates.
    CHECK(run.choice_prob[0][1] > 0.7);
    CHECK(run.choice_prob[1][0] == 0.0);
    CHECK(run.choice_prob[1][1] == 0.0);
    for (const auto& row : run.erase_prob) {
      for (double e : row) CHECK(e == 0.0);
    }
  }
  for (int own = 0; own < 2; ++own) {
    for (int opp = 0; opp < 2; ++opp) {
      CHECK(std::abs(runs[0].choice_prob[own][opp] - runs[1].choice_prob[own][opp]) <= 1e-8);
      CHECK(std::abs(runs[1].choice_prob[own][opp] - runs[2].choice_prob[own][opp]) <= 1e-8);
    }
  }
}

TEST_CASE("huge shocks wash out the payoff differences") {
  const auto run = pu::perturbed_fixed_point(2.0, 1.0, 0.95, 0.90, 1000.0, 0.5,
                                             pu::ShockFamily::UniformSymmetric, {});
  REQUIRE(run.converged);
  for (const auto& row : run.choice_prob) {
    for (double p : row) CHECK(std::abs(p - 0.5) < 0.05);
  }
}

TEST_CASE("the mixing equilibrium is approachable through vanishing shocks") {
  const auto eq = *js::solve(2.0, 1.0, 0.95, 0.90);
  const pu::PurificationReport report =
      pu::purification_check(eq, {0.1, 0.05, 0.01}, {0.1, 0.5, 0.9}, {});
  REQUIRE(report.levels.size() == 3);
  for (const auto& level : report.levels) {
    CHECK(level.runs.size() == 3);
    CHECK(level.best_run >= 0);
    CHECK(level.best_run < 3);
  }
  CHECK(report.levels[0].distance == doctest::Approx(0.1485).epsilon(0.01));
  CHECK(report.levels[1].distance == doctest::Approx(0.0348).epsilon(0.01));
  CHECK(report.levels[2].distance == doctest::Approx(0.007719).epsilon(0.01));
  CHECK(report.decreasing);
  CHECK(report.slope_defined);
  CHECK(report.decay_slope > 0.8);
  CHECK(report.decay_slope < 1.6);
  CHECK(report.pass);
}

TEST_CASE("single-level reports cannot fit a slope") {
  const auto eq = *js::solve(2.0, 1.0, 0.95, 0.90);
  const pu::PurificationReport report = pu::purification_check(eq, {0.05}, {0.5}, {});
  CHECK_FALSE(report.slope_defined);
  CHECK(report.levels.size() == 1);
}

TEST_CASE("input validation") {
  const auto eq = *js::solve(2.0, 1.0, 0.95, 0.90);
  CHECK_THROWS_AS(pu::purification_check(eq, {}, {0.5}, {}), ConfigInvalid);
  CHECK_THROWS_AS(pu::purification_check(eq, {0.1, 0.05}, {}, {}), ConfigInvalid);
  CHECK_THROWS_AS(pu::purification_check(eq, {0.05, 0.1}, {0.5}, {}), ConfigInvalid);
  CHECK_THROWS_AS(pu::purification_check(eq, {0.1, 0.1}, {0.5}, {}), ConfigInvalid);
  CHECK_THROWS_AS(pu::perturbed_fixed_point(2.0, 1.0, 0.95, 0.90, 0.0, 0.5,
                                            pu::ShockFamily::UniformSymmetric, {}),
                  NonPositiveParameter);
  CHECK_THROWS_AS(pu::perturbed_fixed_point(2.0, 1.0, 0.95, 0.90, 0.1, 1.5,
                                            pu::ShockFamily::UniformSymmetric, {}),
                  NonPositiveParameter);
  CHECK_THROWS_AS(pu::supermodular_collapse_certificate(1.0, 1.0, 0.95, 0.90, {}, {0.5}, 0.02, {}),
                  ConfigInvalid);
}

TEST_CASE("supermodular games collapse under vanishing shocks") {
  const pu::CollapseCertificate cert = pu::supermodular_collapse_certificate(
      1.0, 1.0, 0.95, 0.90, {0.1, 0.05, 0.01}, {0.1, 0.5, 0.9}, 0.02, {});
  // With g = l the reward wedge is identically zero.
  CHECK(cert.max_margin == 0.0);
  CHECK(cert.margin_nonpositive);
  REQUIRE(cert.tracks.size() == 3);
  for (const auto& track : cert.tracks) {
    REQUIRE(track.junior_junior.size() == 3);
    CHECK(track.decaying);
  }
  CHECK(cert.final_cooperation <= 0.02);
  CHECK(cert.collapsed);
  CHECK(cert.certified);
}

TEST_CASE("strictly supermodular games have a negative reward wedge") {
  const pu::CollapseCertificate cert = pu::supermodular_collapse_certificate(
      0.5, 1.0, 0.95, 0.90, {0.1, 0.01}, {0.1, 0.9}, 0.02, {});
  CHECK(cert.max_margin < 0.0);
  CHECK(cert.margin_nonpositive);
  CHECK(cert.collapsed);
  CHECK(cert.certified);
}

TEST_CASE("a submodular game cannot earn the collapse certificate") {
  const pu::CollapseCertificate cert = pu::supermodular_collapse_certificate(
      2.0, 1.0, 0.95, 0.90, {0.1}, {0.5}, 0.02, {});
  CHECK(cert.max_margin > 0.0);
  CHECK_FALSE(cert.margin_nonpositive);
  CHECK_FALSE(cert.certified);
}

TEST_CASE("the evidence caveat travels with the reports") {
  const std::string caveat = pu::kEvidenceCaveat;
  CHECK(caveat.find("not proof") != std::string::npos);
  CHECK(caveat.find("shock") != std::string::npos);
}
