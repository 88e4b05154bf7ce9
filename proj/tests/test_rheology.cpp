#include <random>

#include "doctest.h"
#include "viscoflow/rheology.hpp"

using namespace viscoflow;

namespace {

Params make(Law law, double p, double tau_s = 0.0, double gamma = 1e3) {
  Params params;
  params.law = law;
  params.p = p;
  params.tau_s = tau_s;
  params.gamma = gamma;
  return params;
}

double central_difference(const Params& params, double t) {
  const double h = 1e-6;
  return (nu(params, t + h) - nu(params, t - h)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("rheology") {
  TEST_CASE("viscosity values") {
    CHECK(nu(make(Law::HerschelBulkley, 1.75), 1.0) == doctest::Approx(1.0));
    for (double t : {1e-3, 0.5, 7.0}) CHECK(nu(make(Law::HerschelBulkley, 2.0), t) == 1.0);
    CHECK(nu(make(Law::CarreauYield, 2.0), 3.0) == doctest::Approx(1.0));
    CHECK(nu(make(Law::Casson, 2.0, 2.5), 2.5) == doctest::Approx(3.0));
    CHECK_THROWS_AS(nu(make(Law::HerschelBulkley, 1.75), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(nu_prime(make(Law::Casson, 2.0, 1.0), -1e-3), std::invalid_argument);
  }

  TEST_CASE("singular laws are floored at zero magnitude") {
    CHECK(std::isfinite(nu(make(Law::HerschelBulkley, 1.6), 0.0)));
    CHECK(std::isfinite(nu(make(Law::Casson, 2.0, 1.0), 0.0)));
    CHECK(std::isfinite(nu_prime(make(Law::HerschelBulkley, 1.6), 0.0)));
    CHECK(nu(make(Law::HerschelBulkley, 1.6), 0.0) * 0.0 == 0.0);
  }

  TEST_CASE("viscosity derivatives") {
    for (double t : {0.0, 0.3, 4.0}) CHECK(nu_prime(make(Law::HerschelBulkley, 2.0), t) == 0.0);
    CHECK(nu_prime(make(Law::CarreauYield, 1.5), 0.0) == 0.0);
    CHECK(nu_prime(make(Law::HerschelBulkley, 1.75), 1.0) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(central_difference(make(Law::HerschelBulkley, 1.75), 1.0) == doctest::Approx(-0.25).epsilon(1e-6));
  }

  TEST_CASE("derivatives match central differences away from zero") {
    for (const Params& params : {make(Law::HerschelBulkley, 1.6), make(Law::HerschelBulkley, 1.75),
                                 make(Law::HerschelBulkley, 4.0), make(Law::CarreauYield, 1.6),
                                 make(Law::CarreauYield, 3.0), make(Law::Casson, 2.0, 2.5)}) {
      for (double t : {1e-3, 3e-3, 0.1, 1.0, 2.5, 40.0}) {
        const double exact = nu_prime(params, t);
        CHECK(std::abs(central_difference(params, t) - exact) <= 1e-6 * std::abs(exact) + 1e-9);
      }
    }
  }

  TEST_CASE("huber magnitude and active indicator") {
    const Params params = make(Law::HerschelBulkley, 2.0, 10.0, 1000.0);
    CHECK(huber_abs(params, 0.001) == doctest::Approx(10.0));
    CHECK(huber_abs(params, 1.0) == doctest::Approx(1000.0));
    CHECK(huber_abs(params, 10.0 / 1000.0) == doctest::Approx(10.0));
    CHECK(chi_active(params, 1.0) == 1);
    CHECK(chi_active(params, 1e-3) == 0);
    // gamma * t == tau_s exactly in binary: 0.5 * 4 == 2.
    const Params exact = make(Law::HerschelBulkley, 2.0, 2.0, 4.0);
    CHECK(exact.gamma * 0.5 == exact.tau_s);
    CHECK(chi_active(exact, 0.5) == 1);
  }

  TEST_CASE("multiplier projection") {
    const Params params = make(Law::HerschelBulkley, 2.0, 3.0);
    Eigen::Matrix2d small = Eigen::Matrix2d::Zero();
    small(0, 1) = 1.5;
    CHECK(project_q(params, small) == small);
    Eigen::Matrix2d big = Eigen::Matrix2d::Zero();
    big(0, 0) = 6.0;
    const Eigen::Matrix2d expected = (Eigen::Matrix2d() << 3.0, 0.0, 0.0, 0.0).finished();
    CHECK((project_q(params, big) - expected).norm() < 1e-15);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::Matrix2d q = Eigen::Matrix2d::NullaryExpr([&] { return g(rng); });
      const Eigen::Matrix2d once = project_q(params, q);
      CHECK(project_q(params, once) == once);
      if (q.norm() > params.tau_s) CHECK(std::abs(once.norm() - params.tau_s) < 1e-14);
      CHECK(once.norm() <= params.tau_s + 1e-14);
    }
  }

  TEST_CASE("normalized strain is bounded by one over gamma") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double gamma : {1.0, 1e3, 1e6}) {
      const Params params = make(Law::HerschelBulkley, 2.0, 1.0, gamma);
      for (int trial = 0; trial < 1000; ++trial) {
        const double scale = std::pow(10.0, 6.0 * g(rng) / 3.0);
        const Eigen::Matrix2d theta = scale * Eigen::Matrix2d::NullaryExpr([&] { return g(rng); });
        CHECK(theta.norm() / huber_abs(params, theta.norm()) <= 1.0 / gamma * (1 + 1e-15));
      }
    }
  }

  TEST_CASE("parameter validation and names") {
    Params params;
    params.p = 1.0;
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
    params = Params{};
    params.tau_s = -1.0;
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
    params = Params{};
    params.gamma = 0.0;
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
    for (Law law : {Law::HerschelBulkley, Law::CarreauYield, Law::Casson}) CHECK(parse_law(law_name(law)) == law);
    CHECK_THROWS_AS(parse_law("bingham-ish"), std::invalid_argument);
  }

  TEST_CASE("laws work with other scalar types") {
    ModelParams<long double> params;
    params.p = 1.75L;
    CHECK(static_cast<double>(nu(params, 1.0L)) == doctest::Approx(1.0));
    ModelParams<float> fparams;
    fparams.tau_s = 1.0f;
    CHECK(huber_abs(fparams, 0.5f) == doctest::Approx(500.0f));
  }
}
