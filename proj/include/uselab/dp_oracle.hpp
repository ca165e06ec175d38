// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "uselab/random_stream.hpp"

namespace uselab::dp {

// Finite distribution on the real line; atoms kept sorted by value with
// strictly positive probabilities summing to 1.
struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probs;

  void validate() const;
  // Sorts by value, merges duplicates, drops zero-mass atoms, renormalizes.
  static DiscreteDistribution make(std::vector<double> values,
                                   std::vector<double> probs);
  double mean() const;
  double second_moment() const;
};

// Joint distribution of (signal s, observation y) as weighted atoms.
struct Atom {
  double s = 0.0;
  double y = 0.0;
  double p = 0.0;
};

struct DiscreteJointModel {
  std::vector<Atom> atoms;

  void validate() const;
  DiscreteDistribution marginal_s() const;
  DiscreteDistribution marginal_y() const;
  // Same model with both coordinates scaled by c.
  DiscreteJointModel scaled(double c) const;

  nlohmann::json to_json() const;
  static DiscreteJointModel from_json(const nlohmann::json& j);

  // s ~ N(0,1) and independent n ~ N(0,1), both discretized on a uniform
  // grid of n_points over [lo, hi]; y = s + n.
  static DiscreteJointModel gaussian_grid(size_t n_points = 201,
                                          double lo = -5.0, double hi = 5.0);
  // s uniform on {-1, +1}; y carries no information.
  static DiscreteJointModel binary_uninformative();
  // y == s: the observation reveals the signal.
  static DiscreteJointModel deterministic(
      const std::vector<double>& values);
};

// Per-observation posterior statistics, sorted by y.
struct PosteriorSummary {
  std::vector<double> y_values;
  std::vector<double> y_probs;
  std::vector<double> means;      // E[s | y]
  std::vector<double> variances;  // Var[s | y]
  // Distribution of the posterior-mean estimator s* = E[s | Y].
  DiscreteDistribution estimator_dist;
};

PosteriorSummary posterior_summary(const DiscreteJointModel& model);

// Minimum mean squared error E[Var(s | y)], the distortion floor.
double mmse_distortion(const DiscreteJointModel& model);

// Monte Carlo MSE of drawing an independent posterior sample as the
// estimate; converges to exactly twice the MMSE.
double posterior_sampling_mse(const DiscreteJointModel& model,
                              size_t n_samples, RandomStream& stream);

// Squared 2-Wasserstein distance between 1-D discrete distributions via the
// exact quantile (monotone) coupling.
double wasserstein2_sq_1d(const DiscreteDistribution& p,
                          const DiscreteDistribution& q);

// Exhaustive minimum transport cost for two n-atom (n <= 8) uniform
// distributions; cross-checks the quantile coupling.
double brute_force_coupling_cost(const DiscreteDistribution& p,
                                 const DiscreteDistribution& q);

// Numeric check of the perfect-perception distortion identity: the best
// estimator whose output distribution matches the signal prior pays the
// MMSE plus the squared Wasserstein gap between the estimator law and the
// prior.
struct D0Report {
  double d0_direct = 0.0;       // distortion of the transported estimator
  double d_star = 0.0;          // MMSE
  double w2_sq = 0.0;           // W2^2(law of s*, law of s)
  double residual = 0.0;        // |d0_direct - d_star - w2_sq|
  double max_quantile_dev = 0.0;  // transported law vs prior, sup-CDF gap
  nlohmann::json to_json() const;
};

D0Report verify_d0_identity(const DiscreteJointModel& model);

// Distortion-perception tradeoff traced by interpolating between the MMSE
// estimator (t = 0) and its optimal-transport push onto the prior (t = 1).
// Both coordinates are measured numerically from the interpolated estimator.
struct CurvePoint {
  double t = 0.0;
  double distortion = 0.0;  // E[(s_t - s)^2]
  double perception = 0.0;  // W2(law of s_t, law of s)
};

std::vector<CurvePoint> dp_curve(const DiscreteJointModel& model,
                                 const std::vector<double>& t_grid);

}  // namespace uselab::dp
