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

#include "convscreen/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace convscreen {

const char* threshold_rule_name(ThresholdRule rule) {
  return rule == ThresholdRule::fraction ? "fraction" : "ratio";
}

ThresholdRule threshold_rule_from_name(const std::string& name) {
  if (name == "fraction") return ThresholdRule::fraction;
  if (name == "ratio") return ThresholdRule::ratio;
  throw std::invalid_argument("unknown threshold rule: " + name);
}

double positive_fraction(const ChunkPredictions& preds) {
  if (preds.predictions.empty())
    throw std::invalid_argument("conversation has no chunk predictions");
  std::int64_t pos = 0;
  for (int p : preds.predictions) {
    if (p != 0 && p != 1)
      throw std::invalid_argument("chunk prediction outside {0,1}");
    pos += p;
  }
  return static_cast<double>(pos) / static_cast<double>(preds.predictions.size());
}

double aggregation_statistic(const ChunkPredictions& preds,
                             ThresholdRule rule) {
  const double frac = positive_fraction(preds);
  if (rule == ThresholdRule::fraction) return frac;
  const double n = static_cast<double>(preds.predictions.size());
  const double pos = frac * n;
  const double neg = n - pos;
  if (pos == 0.0) return std::numeric_limits<double>::infinity();
  return neg / pos;
}

int classify_conversation(const ChunkPredictions& preds, double threshold,
                          ThresholdRule rule) {
  return aggregation_statistic(preds, rule) > threshold ? 1 : 0;
}

CalibrationResult calibrate_threshold(
    const std::vector<ChunkPredictions>& validation, ThresholdRule rule) {
  if (validation.empty())
    throw std::invalid_argument("empty validation set");
  std::vector<double> stats(validation.size());
  std::int64_t n_pos = 0;
  for (std::size_t i = 0; i < validation.size(); ++i) {
    if (validation[i].label != 0 && validation[i].label != 1)
      throw std::invalid_argument("label outside {0,1}");
    n_pos += validation[i].label;
    stats[i] = aggregation_statistic(validation[i], rule);
  }
  if (n_pos == 0 || n_pos == static_cast<std::int64_t>(validation.size()))
    throw std::invalid_argument(
        "calibration requires both labels in the validation set");

  std::vector<double> distinct = stats;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());

  std::vector<double> candidates;
  candidates.push_back(0.0);
  double max_finite = 0.0;
  for (double s : distinct) {
    if (!std::isinf(s)) max_finite = s;
  }
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    if (std::isinf(distinct[i + 1])) break;
    candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
  }
  if (rule == ThresholdRule::fraction) {
    candidates.push_back(1.0);
  } else {
    // A finite cut above every finite statistic: sends the whole finite
    // group to non-depressed, leaving only +inf conversations positive.
    candidates.push_back(max_finite + 1.0);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  CalibrationResult best;
  best.accuracy = -1.0;
  for (double t : candidates) {
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < validation.size(); ++i) {
      const int pred = stats[i] > t ? 1 : 0;
      if (pred == validation[i].label) ++correct;
    }
    const double acc =
        static_cast<double>(correct) / static_cast<double>(validation.size());
    if (acc > best.accuracy) {
      best.accuracy = acc;
      best.threshold = t;
    }
  }
  return best;
}

StreamVerdict::StreamVerdict(double threshold, ThresholdRule rule)
    : threshold_(threshold), rule_(rule), calibrated_(true) {
  if (rule == ThresholdRule::fraction &&
      (threshold < 0.0 || threshold > 1.0))
    throw std::invalid_argument("fraction threshold must lie in [0,1]");
  if (rule == ThresholdRule::ratio && threshold < 0.0)
    throw std::invalid_argument("ratio threshold must be >= 0");
}

StreamVerdict::State StreamVerdict::feed(int prediction) {
  if (!calibrated_)
    throw std::logic_error("stream verdict fed before calibration");
  if (prediction != 0 && prediction != 1)
    throw std::invalid_argument("chunk prediction outside {0,1}");
  positives_ += prediction;
  total_ += 1;
  return state();
}

StreamVerdict::State StreamVerdict::state() const {
  if (!calibrated_)
    throw std::logic_error("stream verdict read before calibration");
  State s;
  s.chunks = total_;
  s.fraction = total_ == 0
                   ? 0.0
                   : static_cast<double>(positives_) / static_cast<double>(total_);
  if (total_ == 0) {
    s.verdict = 0;
    return s;
  }
  ChunkPredictions preds;
  preds.predictions.assign(static_cast<std::size_t>(total_), 0);
  std::fill(preds.predictions.begin(),
            preds.predictions.begin() + positives_, 1);
  s.verdict = classify_conversation(preds, threshold_, rule_);
  return s;
}

}  // namespace convscreen
