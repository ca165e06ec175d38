// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cmath>

#include <doctest.h>

#include "uselab/dp_oracle.hpp"
#include "uselab/random_stream.hpp"

namespace {

using uselab::dp::DiscreteDistribution;
using uselab::dp::DiscreteJointModel;

DiscreteDistribution uniform_atoms(uselab::RandomStream& s, size_t n) {
  DiscreteDistribution d;
  d.values.resize(n);
  d.probs.assign(n, 1.0 / double(n));
  for (double& v : d.values) v = 4.0 * (s.uniform() - 0.5);
  return DiscreteDistribution::make(d.values, d.probs);
}

DiscreteJointModel random_model(uselab::RandomStream& s, size_t n_atoms) {
  std::vector<uselab::dp::Atom> atoms(n_atoms);
  double total = 0.0;
  for (auto& a : atoms) {
    a.s = 3.0 * (s.uniform() - 0.5);
    a.y = 3.0 * (s.uniform() - 0.5);
    a.p = 0.05 + s.uniform();
    total += a.p;
  }
  for (auto& a : atoms) a.p /= total;
  DiscreteJointModel m;
  m.atoms = std::move(atoms);
  return m;
}

}  // namespace

TEST_SUITE("dp_oracle") {

TEST_CASE("distribution construction merges and normalizes") {
  const auto d = DiscreteDistribution::make({2.0, 1.0, 2.0}, {1.0, 2.0, 1.0});
  REQUIRE(d.values.size() == 2);
  CHECK(d.values[0] == 1.0);
  CHECK(d.values[1] == 2.0);
  CHECK(d.probs[0] == doctest::Approx(0.5));
  CHECK(d.probs[1] == doctest::Approx(0.5));
  CHECK(d.mean() == doctest::Approx(1.5));
  CHECK_THROWS_AS(DiscreteDistribution::make({1.0}, {0.0}),
                  std::invalid_argument);
}

TEST_CASE("wasserstein distance basics") {
  const auto p = DiscreteDistribution::make({0.0}, {1.0});
  const auto q = DiscreteDistribution::make({3.0}, {1.0});
  CHECK(uselab::dp::wasserstein2_sq_1d(p, q) == doctest::Approx(9.0));
  CHECK(uselab::dp::wasserstein2_sq_1d(p, p) == 0.0);

  // asymmetric masses force atom splitting: p = {0:2/3, 1:1/3} onto
  // q = {0:1/3, 1:2/3}; monotone plan moves mass 1/3 across distance 1
  const auto p2 =
      DiscreteDistribution::make({0.0, 1.0}, {2.0 / 3.0, 1.0 / 3.0});
  const auto q2 =
      DiscreteDistribution::make({0.0, 1.0}, {1.0 / 3.0, 2.0 / 3.0});
  CHECK(uselab::dp::wasserstein2_sq_1d(p2, q2) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("quantile coupling matches brute force enumeration") {
  uselab::RandomStream s(101, "w2-brute");
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 2 + (s.next_u64() % 7);  // up to 8 atoms
    const auto p = uniform_atoms(s, n);
    const auto q = uniform_atoms(s, n);
    const double fast = uselab::dp::wasserstein2_sq_1d(p, q);
    const double slow = uselab::dp::brute_force_coupling_cost(p, q);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("wasserstein scale equivariance") {
  uselab::RandomStream s(55, "w2-scale");
  const auto p = uniform_atoms(s, 6);
  const auto q = uniform_atoms(s, 5);
  const double base = uselab::dp::wasserstein2_sq_1d(p, q);
  for (double c : {0.5, 2.0, 7.0}) {
    auto ps = p, qs = q;
    for (double& v : ps.values) v *= c;
    for (double& v : qs.values) v *= c;
    CHECK(uselab::dp::wasserstein2_sq_1d(ps, qs) ==
          doctest::Approx(c * c * base).epsilon(1e-10));
  }
}

TEST_CASE("posterior summary on a tiny joint model") {
  // two observations; posterior means 0.5 and -1
  DiscreteJointModel m;
  m.atoms = {{0.0, 0.0, 0.25}, {1.0, 0.0, 0.25}, {-1.0, 1.0, 0.5}};
  const auto post = uselab::dp::posterior_summary(m);
  REQUIRE(post.y_values.size() == 2);
  CHECK(post.means[0] == doctest::Approx(0.5));
  CHECK(post.means[1] == doctest::Approx(-1.0));
  CHECK(post.variances[0] == doctest::Approx(0.25));
  CHECK(post.variances[1] == doctest::Approx(0.0));
  CHECK(uselab::dp::mmse_distortion(m) == doctest::Approx(0.125));
}

TEST_CASE("deterministic observations have zero floor everywhere") {
  const auto m = DiscreteJointModel::deterministic({-2.0, 0.5, 3.0});
  CHECK(uselab::dp::mmse_distortion(m) == doctest::Approx(0.0));
  const auto rep = uselab::dp::verify_d0_identity(m);
  CHECK(rep.d0_direct == doctest::Approx(0.0));
  CHECK(rep.w2_sq == doctest::Approx(0.0));
  const auto curve = uselab::dp::dp_curve(m, {0.0, 0.5, 1.0});
  for (const auto& pt : curve) {
    CHECK(pt.distortion == doctest::Approx(0.0));
    CHECK(pt.perception == doctest::Approx(0.0));
  }
}

TEST_CASE("uninformative binary observations double the floor when sampling") {
  const auto m = DiscreteJointModel::binary_uninformative();
  CHECK(uselab::dp::mmse_distortion(m) == doctest::Approx(1.0));
  uselab::RandomStream s(33, "binary-sample");
  const double mse = uselab::dp::posterior_sampling_mse(m, 100000, s);
  CHECK(mse / 1.0 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("gaussian grid hits the closed-form anchors") {
  const auto m = DiscreteJointModel::gaussian_grid();
  const auto rep = uselab::dp::verify_d0_identity(m);
  // unit-variance signal + unit-variance noise: floor 1/2
  CHECK(rep.d_star == doctest::Approx(0.5).epsilon(0.02));
  // perfect-perception distortion 2 - sqrt(2)
  CHECK(rep.d0_direct == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(0.02));
  // transport gap (1 - sqrt(1/2))^2
  const double w2 = std::pow(1.0 - std::sqrt(0.5), 2);
  CHECK(rep.w2_sq == doctest::Approx(w2).epsilon(0.02));
  // the identity itself holds to numerical precision
  CHECK(rep.residual <= 1e-9);
  // the transported estimator's law matches the prior essentially exactly
  CHECK(rep.max_quantile_dev <= 1e-9);
}

TEST_CASE("gaussian posterior sampling pays twice the floor") {
  const auto m = DiscreteJointModel::gaussian_grid();
  const double mmse = uselab::dp::mmse_distortion(m);
  uselab::RandomStream s(44, "gauss-sample");
  const double mse = uselab::dp::posterior_sampling_mse(m, 100000, s);
  CHECK(mse / mmse == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("d0 identity holds on random models") {
  uselab::RandomStream s(202, "identity");
  for (int trial = 0; trial < 25; ++trial) {
    const auto m = random_model(s, 3 + (s.next_u64() % 20));
    const auto rep = uselab::dp::verify_d0_identity(m);
    CHECK(rep.residual <= 1e-9);
    CHECK(rep.max_quantile_dev <= 1e-9);
    CHECK(rep.d0_direct >= rep.d_star - 1e-12);
  }
}

TEST_CASE("tradeoff curve follows the quadratic geodesic") {
  uselab::RandomStream s(303, "geodesic");
  for (int trial = 0; trial < 5; ++trial) {
    const auto m = random_model(s, 12);
    const auto rep = uselab::dp::verify_d0_identity(m);
    std::vector<double> ts;
    for (int i = 0; i <= 10; ++i) ts.push_back(i / 10.0);
    const auto curve = uselab::dp::dp_curve(m, ts);
    REQUIRE(curve.size() == ts.size());
    const double w2 = std::sqrt(std::max(0.0, rep.w2_sq));
    for (const auto& pt : curve) {
      // measured distortion equals D* + t^2 W2^2; measured perception
      // shrinks linearly to zero
      CHECK(pt.distortion ==
            doctest::Approx(rep.d_star + pt.t * pt.t * rep.w2_sq)
                .epsilon(1e-9));
      CHECK(pt.perception ==
            doctest::Approx((1.0 - pt.t) * w2).epsilon(1e-7));
    }
    // endpoints: the floor and the perfect-perception cost
    CHECK(curve.front().distortion == doctest::Approx(rep.d_star));
    CHECK(curve.back().distortion == doctest::Approx(rep.d0_direct));
    // fp mass splits at quantile boundaries leave W2^2 ~ 1e-16, so the
    // distance itself only reaches ~1e-8
    CHECK(curve.back().perception <= 1e-7);
  }
}

TEST_CASE("curve is monotone and convex in t") {
  uselab::RandomStream s(404, "convex");
  std::vector<double> ts;
  for (int i = 0; i <= 16; ++i) ts.push_back(i / 16.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_model(s, 10);
    const auto curve = uselab::dp::dp_curve(m, ts);
    for (size_t i = 1; i < curve.size(); ++i) {
      CHECK(curve[i].distortion >= curve[i - 1].distortion - 1e-12);
      CHECK(curve[i].perception <= curve[i - 1].perception + 1e-12);
    }
    for (size_t i = 1; i + 1 < curve.size(); ++i) {
      const double second = curve[i + 1].distortion -
                            2.0 * curve[i].distortion +
                            curve[i - 1].distortion;
      CHECK(second >= -1e-9);
    }
  }
}

TEST_CASE("model json round trip and validation") {
  const auto m = DiscreteJointModel::gaussian_grid(41);
  const auto back = DiscreteJointModel::from_json(m.to_json());
  REQUIRE(back.atoms.size() == m.atoms.size());
  CHECK(uselab::dp::mmse_distortion(back) ==
        doctest::Approx(uselab::dp::mmse_distortion(m)));

  DiscreteJointModel bad;
  bad.atoms = {{0.0, 0.0, -0.5}, {1.0, 0.0, 1.5}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  DiscreteJointModel empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("scaled models scale their statistics") {
  const auto m = DiscreteJointModel::gaussian_grid(81);
  const auto m2 = m.scaled(3.0);
  CHECK(uselab::dp::mmse_distortion(m2) ==
        doctest::Approx(9.0 * uselab::dp::mmse_distortion(m)).epsilon(1e-9));
  const auto r1 = uselab::dp::verify_d0_identity(m);
  const auto r2 = uselab::dp::verify_d0_identity(m2);
  CHECK(r2.w2_sq == doctest::Approx(9.0 * r1.w2_sq).epsilon(1e-9));
}

TEST_CASE("curve rejects out-of-range interpolation") {
  const auto m = DiscreteJointModel::binary_uninformative();
  CHECK_THROWS_AS(uselab::dp::dp_curve(m, {-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(uselab::dp::dp_curve(m, {1.1}), std::invalid_argument);
}

}  // TEST_SUITE
