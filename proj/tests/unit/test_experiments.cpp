#include "doctest.h"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "landloc/experiments.hpp"

using namespace landloc;
using namespace landloc::experiments;

namespace {

// Bottom of the lowest band of the infinite-lattice Peierls Laplacian at flux
// 1/q per plaquette, from the q x q Harper matrix at zero quasi-momentum.
// The band is exponentially narrow in q, so one k-point suffices.
double harper_band_bottom(int q, double h) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(q, q);
  for (int m = 0; m < q; ++m) {
    M(m, m) = 2.0 * std::cos(2.0 * std::numbers::pi * m / q);
    M(m, (m + 1) % q) += 1.0;
    M((m + 1) % q, m) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return (4.0 - es.eigenvalues().maxCoeff()) / (h * h);
}

ExperimentReport run_named(const std::string& name, const config::Section& s, unsigned jobs = 1) {
  return run(*find_experiment(name), s, {20240601, jobs});
}

}  // namespace

TEST_CASE("discrete Landau energy matches the Harper band bottom") {
  for (int q : {24, 32, 48}) {
    const double h = 0.1;
    const double B = 2.0 * std::numbers::pi / (q * h * h);
    CAPTURE(q);
    CHECK(discrete_landau_energy(B, h) == doctest::Approx(harper_band_bottom(q, h)).epsilon(1e-6));
    CHECK(discrete_landau_energy(B, h) < B);
  }
}

TEST_CASE("grid_spacing keeps an even number of cells and flux per cell below the cap") {
  for (double side : {4.0, 5.0, 6.0})
    for (double B : {10.0, 20.0, 40.0, 80.0}) {
      const double h = grid_spacing(side, B, 0.2);
      const double cells = side / h;
      CHECK(std::abs(cells - std::round(cells)) < 1e-9);
      CHECK(static_cast<long>(std::round(cells)) % 2 == 0);
      CHECK(B * h * h <= 0.2 + 1e-12);
    }
}

TEST_CASE("perc-crossing: trivial probabilities") {
  const auto full = run_named("perc-crossing", {{"p", "1"}, {"trials", "20"}, {"ells", "2, 4"}, {"critical_p", "1"}});
  for (double r : full.find_series("crossing").column("estimate")) CHECK(r == 1.0);
  CHECK(full.find_series("critical").column("estimate")[0] == 1.0);
  const auto empty = run_named("perc-crossing", {{"p", "0"}, {"trials", "20"}, {"ells", "2, 4"}, {"critical_p", "0"}});
  for (double r : empty.find_series("crossing").column("estimate")) CHECK(r == 0.0);
}

TEST_CASE("perc-circuit: four strip crossings always give a circuit") {
  const auto r = run_named("perc-circuit", {{"trials", "200"}, {"ell", "6"}});
  CHECK(r.check("four_strips_imply_circuit").pass);
}

TEST_CASE("wegner refuses an energy on a Landau level") {
  CHECK_THROWS(run_named("wegner", {{"E", "19.5"}, {"trials", "2"}}));
}

TEST_CASE("wegner: probabilities are nondecreasing in delta") {
  const auto r = run_named("wegner", {{"trials", "60"}});
  const auto& s = r.find_series("probability");
  const auto side = s.column("side"), delta = s.column("delta"), prob = s.column("estimate");
  for (std::size_t i = 1; i < prob.size(); ++i)
    if (side[i] == side[i - 1] && delta[i] > delta[i - 1]) CHECK(prob[i] >= prob[i - 1]);
}

TEST_CASE("spectral averaging: small instances satisfy the bound") {
  const auto r = run_named("spectral-averaging", {{"trials", "15"}, {"dim", "12"}});
  CHECK(r.check("zero_window").pass);
  CHECK(r.check("averaging_bound").pass);
  CHECK(r.fit("max_ratio").value > 0.5);
}

TEST_CASE("decay: rates are positive at reduced size") {
  const auto r = run_named("decay", {{"Bs", "10, 20"}, {"as", "0.25"}, {"trials", "1"}});
  CHECK(r.check("potential_condition").pass);
  for (double g : r.find_series("rates").column("gamma")) CHECK(g > 0);
}

TEST_CASE("serial and parallel runs give identical CSV") {
  const config::Section s{{"trials", "40"}};
  const auto a = run_named("wegner", s, 1), b = run_named("wegner", s, 3);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(a.to_csv(a.series[i]) == b.to_csv(b.series[i]));
}
