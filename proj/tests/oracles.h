// Copyright 2026 The LeakAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LEAKAUDIT_TESTS_ORACLES_H_
#define LEAKAUDIT_TESTS_ORACLES_H_

// Brute-force reference implementations used by the unit tests and the
// acceptance binary. They deliberately share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

namespace leakaudit::oracle {

// Mean over all (member, non-member) pairs of [m > n] + 0.5 [m == n].
inline double MannWhitneyAuc(const std::vector<double>& members,
                             const std::vector<double>& nonmembers) {
  double sum = 0.0;
  for (double m : members) {
    for (double n : nonmembers) {
      if (m > n) {
        sum += 1.0;
      } else if (m == n) {
        sum += 0.5;
      }
    }
  }
  return sum / (static_cast<double>(members.size()) *
                static_cast<double>(nonmembers.size()));
}

// Predict member iff score >= t, for t over every observed score plus +inf.
inline double ExhaustiveTprAtFpr(const std::vector<double>& members,
                                 const std::vector<double>& nonmembers,
                                 double cap) {
  std::set<double> thresholds(members.begin(), members.end());
  thresholds.insert(nonmembers.begin(), nonmembers.end());
  thresholds.insert(std::numeric_limits<double>::infinity());
  double best = 0.0;
  for (double t : thresholds) {
    int tp = 0;
    int fp = 0;
    for (double m : members) tp += m >= t;
    for (double n : nonmembers) fp += n >= t;
    const double fpr = static_cast<double>(fp) / nonmembers.size();
    const double tpr = static_cast<double>(tp) / members.size();
    if (fpr <= cap) best = std::max(best, tpr);
  }
  return best;
}

struct Confusion {
  int tp = 0, fn = 0, tn = 0, fp = 0;
};

inline Confusion CountConfusion(const std::vector<double>& members,
                                const std::vector<double>& nonmembers,
                                double threshold) {
  Confusion c;
  for (double m : members) (m >= threshold ? c.tp : c.fn)++;
  for (double n : nonmembers) (n >= threshold ? c.fp : c.tn)++;
  return c;
}

inline double ConfusionBalancedAccuracy(const Confusion& c) {
  const double tpr = static_cast<double>(c.tp) / (c.tp + c.fn);
  const double tnr = static_cast<double>(c.tn) / (c.tn + c.fp);
  return 0.5 * (tpr + tnr);
}

// Balanced accuracy of "member iff value < tau" at every candidate tau
// (each observed value and +inf); returns the best achievable value.
inline double BestThresholdBalancedAccuracy(
    const std::vector<double>& member_values,
    const std::vector<double>& nonmember_values) {
  std::set<double> taus(member_values.begin(), member_values.end());
  taus.insert(nonmember_values.begin(), nonmember_values.end());
  taus.insert(std::numeric_limits<double>::infinity());
  double best = 0.0;
  for (double tau : taus) {
    int tp = 0;
    int tn = 0;
    for (double v : member_values) tp += v < tau;
    for (double v : nonmember_values) tn += !(v < tau);
    best = std::max(best, 0.5 * (static_cast<double>(tp) / member_values.size() +
                                 static_cast<double>(tn) /
                                     nonmember_values.size()));
  }
  return best;
}

inline double ThresholdBalancedAccuracy(
    const std::vector<double>& member_values,
    const std::vector<double>& nonmember_values, double tau) {
  int tp = 0;
  int tn = 0;
  for (double v : member_values) tp += v < tau;
  for (double v : nonmember_values) tn += !(v < tau);
  return 0.5 * (static_cast<double>(tp) / member_values.size() +
                static_cast<double>(tn) / nonmember_values.size());
}

// Scores drawn from a small grid so ties are common.
inline std::vector<double> RandomScores(std::mt19937_64& rng, int n,
                                        bool coarse) {
  std::vector<double> out(static_cast<size_t>(n));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 10);
  for (double& v : out) v = coarse ? grid(rng) / 10.0 : u(rng);
  return out;
}

// Central difference of f around x[i].
inline double CentralDifference(const std::function<double()>& f, double& x,
                                double h) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

// |a - n| / max(|a|, |n|, floor): relative error with an absolute floor so
// exactly-zero gradients compare cleanly.
inline double RelativeError(double analytic, double numeric,
                            double floor = 1e-8) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace leakaudit::oracle

#endif  // LEAKAUDIT_TESTS_ORACLES_H_
