// Copyright 2026 The uselab Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "uselab/dp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace uselab::dp {

namespace {

constexpr double kProbTol = 1e-9;

// One mass flow of the monotone (quantile) coupling.
struct Segment {
  size_t from = 0;  // index into the source distribution
  size_t to = 0;    // index into the target distribution
  double mass = 0.0;
};

// Exact optimal coupling for convex costs in 1-D: walk both CDFs in lockstep,
// splitting atoms where they disagree.
std::vector<Segment> quantile_coupling(const DiscreteDistribution& p,
                                       const DiscreteDistribution& q) {
  std::vector<Segment> segs;
  size_t i = 0, j = 0;
  double rp = p.probs.empty() ? 0.0 : p.probs[0];
  double rq = q.probs.empty() ? 0.0 : q.probs[0];
  while (i < p.values.size() && j < q.values.size()) {
    const double m = std::min(rp, rq);
    if (m > 0.0) segs.push_back({i, j, m});
    rp -= m;
    rq -= m;
    if (rp <= 0.0) {
      ++i;
      if (i < p.values.size()) rp = p.probs[i];
    }
    if (rq <= 0.0) {
      ++j;
      if (j < q.values.size()) rq = q.probs[j];
    }
  }
  return segs;
}

// Posterior structure shared by the estimator-side computations.
struct Posterior {
  // grouped by distinct y, ascending
  std::vector<double> y_values;
  std::vector<double> y_probs;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::vector<std::pair<double, double>>> cond;  // (s, p(s|y))
  DiscreteDistribution estimator_dist;
  std::vector<size_t> estimator_index;  // per y group -> atom of estimator_dist
};

Posterior build_posterior(const DiscreteJointModel& model) {
  model.validate();
  // group atoms by exact y value
  std::map<double, std::vector<std::pair<double, double>>> groups;
  for (const auto& a : model.atoms) {
    groups[a.y].push_back({a.s, a.p});
  }

  Posterior post;
  for (auto& [y, sp] : groups) {
    std::sort(sp.begin(), sp.end());
    // merge duplicate s within the group
    std::vector<std::pair<double, double>> merged;
    for (const auto& [s, p] : sp) {
      if (!merged.empty() && merged.back().first == s) {
        merged.back().second += p;
      } else {
        merged.push_back({s, p});
      }
    }
    double py = 0.0, m1 = 0.0;
    for (const auto& [s, p] : merged) {
      py += p;
      m1 += s * p;
    }
    const double mean = m1 / py;
    double var = 0.0;
    for (auto& [s, p] : merged) {
      var += p * (s - mean) * (s - mean);
      p /= py;  // store conditionals
    }
    var /= py;

    post.y_values.push_back(y);
    post.y_probs.push_back(py);
    post.means.push_back(mean);
    post.variances.push_back(var);
    post.cond.push_back(std::move(merged));
  }

  post.estimator_dist = DiscreteDistribution::make(post.means, post.y_probs);
  post.estimator_index.resize(post.means.size());
  for (size_t g = 0; g < post.means.size(); ++g) {
    const auto it =
        std::lower_bound(post.estimator_dist.values.begin(),
                         post.estimator_dist.values.end(), post.means[g]);
    post.estimator_index[g] = static_cast<size_t>(
        it - post.estimator_dist.values.begin());
  }
  return post;
}

// E[(s_t - s)^2] for the interpolated estimator defined by the coupling:
// given y, the estimate is (1-t) * s*(y) + t * (coupled prior atom), the
// split chosen independently of s. Fully summed over the joint.
double interpolated_distortion(const Posterior& post,
                               const DiscreteDistribution& prior,
                               const std::vector<Segment>& segs, double t) {
  // segments grouped per estimator atom
  std::vector<std::vector<const Segment*>> by_atom(
      post.estimator_dist.values.size());
  for (const auto& s : segs) by_atom[s.from].push_back(&s);

  double total = 0.0;
  for (size_t g = 0; g < post.y_values.size(); ++g) {
    const double py = post.y_probs[g];
    const size_t ei = post.estimator_index[g];
    const double pv = post.estimator_dist.probs[ei];
    const double v = post.estimator_dist.values[ei];
    for (const Segment* seg : by_atom[ei]) {
      const double vt = (1.0 - t) * v + t * prior.values[seg->to];
      const double w = seg->mass / pv;
      for (const auto& [s, ps] : post.cond[g]) {
        total += py * w * ps * (vt - s) * (vt - s);
      }
    }
  }
  return total;
}

DiscreteDistribution interpolated_law(const DiscreteDistribution& est,
                                      const DiscreteDistribution& prior,
                                      const std::vector<Segment>& segs,
                                      double t) {
  std::vector<double> values, probs;
  values.reserve(segs.size());
  probs.reserve(segs.size());
  for (const auto& s : segs) {
    values.push_back((1.0 - t) * est.values[s.from] + t * prior.values[s.to]);
    probs.push_back(s.mass);
  }
  return DiscreteDistribution::make(std::move(values), std::move(probs));
}

double sup_cdf_gap(const DiscreteDistribution& a,
                   const DiscreteDistribution& b) {
  std::vector<double> grid;
  grid.reserve(a.values.size() + b.values.size());
  grid.insert(grid.end(), a.values.begin(), a.values.end());
  grid.insert(grid.end(), b.values.begin(), b.values.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double gap = 0.0;
  size_t ia = 0, ib = 0;
  double ca = 0.0, cb = 0.0;
  for (double x : grid) {
    while (ia < a.values.size() && a.values[ia] <= x) ca += a.probs[ia++];
    while (ib < b.values.size() && b.values[ib] <= x) cb += b.probs[ib++];
    gap = std::max(gap, std::abs(ca - cb));
  }
  return gap;
}

std::vector<double> cumulative(const std::vector<double>& probs) {
  std::vector<double> c(probs.size());
  std::partial_sum(probs.begin(), probs.end(), c.begin());
  return c;
}

size_t draw_index(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min(static_cast<size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

void DiscreteDistribution::validate() const {
  if (values.empty() || values.size() != probs.size()) {
    throw std::invalid_argument("distribution: empty or mismatched arrays");
  }
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(probs[i] > 0.0)) {
      throw std::invalid_argument(
          "distribution: non-finite value or non-positive probability");
    }
    if (i > 0 && values[i] <= values[i - 1]) {
      throw std::invalid_argument("distribution: values not strictly sorted");
    }
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    throw std::invalid_argument("distribution: probabilities do not sum to 1");
  }
}

DiscreteDistribution DiscreteDistribution::make(std::vector<double> values,
                                                std::vector<double> probs) {
  if (values.size() != probs.size() || values.empty()) {
    throw std::invalid_argument("distribution: empty or mismatched arrays");
  }
  std::vector<size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });

  DiscreteDistribution d;
  double sum = 0.0;
  for (size_t k : idx) {
    if (!std::isfinite(values[k]) || probs[k] < 0.0) {
      throw std::invalid_argument("distribution: bad atom");
    }
    if (probs[k] == 0.0) continue;
    if (!d.values.empty() && d.values.back() == values[k]) {
      d.probs.back() += probs[k];
    } else {
      d.values.push_back(values[k]);
      d.probs.push_back(probs[k]);
    }
    sum += probs[k];
  }
  if (d.values.empty() || sum <= 0.0) {
    throw std::invalid_argument("distribution: no mass");
  }
  for (double& p : d.probs) p /= sum;
  return d;
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
  return m;
}

double DiscreteDistribution::second_moment() const {
  double m = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    m += values[i] * values[i] * probs[i];
  }
  return m;
}

void DiscreteJointModel::validate() const {
  if (atoms.empty()) throw std::invalid_argument("joint model: no atoms");
  double sum = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.s) || !std::isfinite(a.y) || !(a.p >= 0.0)) {
      throw std::invalid_argument("joint model: bad atom");
    }
    sum += a.p;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    throw std::invalid_argument("joint model: probabilities do not sum to 1");
  }
}

DiscreteDistribution DiscreteJointModel::marginal_s() const {
  validate();
  std::vector<double> v, p;
  v.reserve(atoms.size());
  p.reserve(atoms.size());
  for (const auto& a : atoms) {
    v.push_back(a.s);
    p.push_back(a.p);
  }
  return DiscreteDistribution::make(std::move(v), std::move(p));
}

DiscreteDistribution DiscreteJointModel::marginal_y() const {
  validate();
  std::vector<double> v, p;
  v.reserve(atoms.size());
  p.reserve(atoms.size());
  for (const auto& a : atoms) {
    v.push_back(a.y);
    p.push_back(a.p);
  }
  return DiscreteDistribution::make(std::move(v), std::move(p));
}

DiscreteJointModel DiscreteJointModel::scaled(double c) const {
  if (!std::isfinite(c) || c == 0.0) {
    throw std::invalid_argument("joint model: scale must be finite nonzero");
  }
  DiscreteJointModel out = *this;
  for (auto& a : out.atoms) {
    a.s *= c;
    a.y *= c;
  }
  return out;
}

nlohmann::json DiscreteJointModel::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : atoms) arr.push_back({a.s, a.y, a.p});
  return nlohmann::json{{"atoms", arr}};
}

DiscreteJointModel DiscreteJointModel::from_json(const nlohmann::json& j) {
  DiscreteJointModel m;
  if (!j.contains("atoms") || !j["atoms"].is_array()) {
    throw std::invalid_argument("joint model json: missing atoms array");
  }
  for (const auto& aj : j["atoms"]) {
    if (!aj.is_array() || aj.size() != 3) {
      throw std::invalid_argument("joint model json: atom must be [s, y, p]");
    }
    m.atoms.push_back(
        {aj[0].get<double>(), aj[1].get<double>(), aj[2].get<double>()});
  }
  m.validate();
  return m;
}

DiscreteJointModel DiscreteJointModel::gaussian_grid(size_t n_points,
                                                     double lo, double hi) {
  if (n_points < 3 || !(hi > lo)) {
    throw std::invalid_argument("gaussian grid: bad parameters");
  }
  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  std::vector<double> grid(n_points), w(n_points);
  double wsum = 0.0;
  for (size_t i = 0; i < n_points; ++i) {
    grid[i] = lo + static_cast<double>(i) * step;
    w[i] = std::exp(-0.5 * grid[i] * grid[i]);
    wsum += w[i];
  }
  for (double& x : w) x /= wsum;

  // y = s + n shares the doubled grid; accumulate on (i, i+j) so equal sums
  // dedupe exactly.
  const double lo2 = 2.0 * lo;
  std::map<std::pair<size_t, size_t>, double> acc;
  for (size_t i = 0; i < n_points; ++i) {
    for (size_t j = 0; j < n_points; ++j) {
      acc[{i, i + j}] += w[i] * w[j];
    }
  }
  DiscreteJointModel m;
  m.atoms.reserve(acc.size());
  for (const auto& [key, p] : acc) {
    const double s = lo + static_cast<double>(key.first) * step;
    const double y = lo2 + static_cast<double>(key.second) * step;
    m.atoms.push_back({s, y, p});
  }
  return m;
}

DiscreteJointModel DiscreteJointModel::binary_uninformative() {
  DiscreteJointModel m;
  m.atoms = {{-1.0, 0.0, 0.5}, {1.0, 0.0, 0.5}};
  return m;
}

DiscreteJointModel DiscreteJointModel::deterministic(
    const std::vector<double>& values) {
  if (values.empty()) {
    throw std::invalid_argument("deterministic model: empty values");
  }
  DiscreteJointModel m;
  const double p = 1.0 / static_cast<double>(values.size());
  for (double v : values) m.atoms.push_back({v, v, p});
  return m;
}

PosteriorSummary posterior_summary(const DiscreteJointModel& model) {
  const Posterior post = build_posterior(model);
  PosteriorSummary out;
  out.y_values = post.y_values;
  out.y_probs = post.y_probs;
  out.means = post.means;
  out.variances = post.variances;
  out.estimator_dist = post.estimator_dist;
  return out;
}

double mmse_distortion(const DiscreteJointModel& model) {
  const Posterior post = build_posterior(model);
  double d = 0.0;
  for (size_t g = 0; g < post.y_probs.size(); ++g) {
    d += post.y_probs[g] * post.variances[g];
  }
  return d;
}

double posterior_sampling_mse(const DiscreteJointModel& model,
                              size_t n_samples, RandomStream& stream) {
  if (n_samples == 0) {
    throw std::invalid_argument("posterior_sampling_mse: zero samples");
  }
  const Posterior post = build_posterior(model);
  const auto y_cdf = cumulative(post.y_probs);
  std::vector<std::vector<double>> s_cdf(post.cond.size());
  std::vector<std::vector<double>> s_val(post.cond.size());
  for (size_t g = 0; g < post.cond.size(); ++g) {
    std::vector<double> probs;
    for (const auto& [s, p] : post.cond[g]) {
      s_val[g].push_back(s);
      probs.push_back(p);
    }
    s_cdf[g] = cumulative(probs);
  }

  double acc = 0.0;
  for (size_t k = 0; k < n_samples; ++k) {
    const size_t g = draw_index(y_cdf, stream.uniform());
    const double s = s_val[g][draw_index(s_cdf[g], stream.uniform())];
    const double s_tilde = s_val[g][draw_index(s_cdf[g], stream.uniform())];
    acc += (s - s_tilde) * (s - s_tilde);
  }
  return acc / static_cast<double>(n_samples);
}

double wasserstein2_sq_1d(const DiscreteDistribution& p,
                          const DiscreteDistribution& q) {
  p.validate();
  q.validate();
  double cost = 0.0;
  for (const auto& seg : quantile_coupling(p, q)) {
    const double d = p.values[seg.from] - q.values[seg.to];
    cost += seg.mass * d * d;
  }
  return cost;
}

double brute_force_coupling_cost(const DiscreteDistribution& p,
                                 const DiscreteDistribution& q) {
  p.validate();
  q.validate();
  const size_t n = p.values.size();
  if (n != q.values.size() || n > 8) {
    throw std::invalid_argument(
        "brute force coupling: needs equal atom counts <= 8");
  }
  const double u = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(p.probs[i] - u) > 1e-12 || std::abs(q.probs[i] - u) > 1e-12) {
      throw std::invalid_argument(
          "brute force coupling: atoms must be uniformly weighted");
    }
  }
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = p.values[i] - q.values[perm[i]];
      cost += u * d * d;
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

nlohmann::json D0Report::to_json() const {
  return nlohmann::json{{"d0_direct", d0_direct},
                        {"d_star", d_star},
                        {"w2_sq", w2_sq},
                        {"residual", residual},
                        {"max_quantile_dev", max_quantile_dev}};
}

D0Report verify_d0_identity(const DiscreteJointModel& model) {
  const Posterior post = build_posterior(model);
  const auto prior = model.marginal_s();
  const auto segs = quantile_coupling(post.estimator_dist, prior);

  D0Report rep;
  rep.d_star = 0.0;
  for (size_t g = 0; g < post.y_probs.size(); ++g) {
    rep.d_star += post.y_probs[g] * post.variances[g];
  }
  rep.w2_sq = wasserstein2_sq_1d(post.estimator_dist, prior);
  rep.d0_direct = interpolated_distortion(post, prior, segs, 1.0);
  rep.residual = std::abs(rep.d0_direct - rep.d_star - rep.w2_sq);
  rep.max_quantile_dev =
      sup_cdf_gap(interpolated_law(post.estimator_dist, prior, segs, 1.0),
                  prior);
  return rep;
}

std::vector<CurvePoint> dp_curve(const DiscreteJointModel& model,
                                 const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("dp_curve: empty t grid");
  for (double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::invalid_argument("dp_curve: t values must be in [0, 1]");
    }
  }
  const Posterior post = build_posterior(model);
  const auto prior = model.marginal_s();
  const auto segs = quantile_coupling(post.estimator_dist, prior);

  std::vector<CurvePoint> curve;
  curve.reserve(t_grid.size());
  for (double t : t_grid) {
    CurvePoint pt;
    pt.t = t;
    pt.distortion = interpolated_distortion(post, prior, segs, t);
    pt.perception = std::sqrt(std::max(
        0.0, wasserstein2_sq_1d(interpolated_law(post.estimator_dist, prior,
                                                 segs, t),
                                prior)));
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace uselab::dp
