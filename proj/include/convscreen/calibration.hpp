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

#pragma once

#include <string>
#include <vector>

namespace convscreen {

/// The per-chunk verdicts of one conversation, plus its true label.
struct ChunkPredictions {
  std::string conversation_id;
  int label = 0;
  std::vector<int> predictions;  // one 0/1 entry per chunk, in chunk order
};

/// How chunk verdicts aggregate into the statistic compared against the
/// threshold. `fraction` is the positive-chunk share, the default and the
/// statistic every guarantee below is stated for. `ratio` is the
/// negative-to-positive count ratio (+inf when no chunk is positive),
/// kept selectable for comparison; both classify as `statistic > T`.
enum class ThresholdRule { fraction, ratio };

const char* threshold_rule_name(ThresholdRule rule);
ThresholdRule threshold_rule_from_name(const std::string& name);

/// Share of chunks predicted positive. Throws on an empty prediction list.
double positive_fraction(const ChunkPredictions& preds);

/// The aggregation statistic under `rule`; see ThresholdRule.
double aggregation_statistic(const ChunkPredictions& preds,
                             ThresholdRule rule);

/// 1 (depressed) iff the statistic strictly exceeds the threshold.
int classify_conversation(const ChunkPredictions& preds, double threshold,
                          ThresholdRule rule = ThresholdRule::fraction);

struct CalibrationResult {
  double threshold = 0.0;
  double accuracy = 0.0;
};

/// Exhaustive threshold sweep maximizing validation accuracy. Candidates
/// are {0, 1} plus the midpoints between consecutive distinct observed
/// statistics (for `ratio`, the boundary candidates adapt to the observed
/// range); ties resolve to the smallest candidate. Requires both labels
/// in the validation set.
CalibrationResult calibrate_threshold(
    const std::vector<ChunkPredictions>& validation,
    ThresholdRule rule = ThresholdRule::fraction);

/// Running conversation verdict over incrementally fed chunk predictions.
/// Construct from a calibrated threshold; feeding an unconfigured instance
/// throws. Replaying every chunk of a conversation ends in the batch
/// verdict for the same threshold.
class StreamVerdict {
 public:
  StreamVerdict() = default;
  StreamVerdict(double threshold, ThresholdRule rule = ThresholdRule::fraction);

  struct State {
    int chunks = 0;
    double fraction = 0.0;
    int verdict = 0;
  };

  /// Account one chunk prediction and return the verdict so far.
  State feed(int prediction);
  State state() const;
  bool calibrated() const { return calibrated_; }

 private:
  double threshold_ = 0.0;
  ThresholdRule rule_ = ThresholdRule::fraction;
  bool calibrated_ = false;
  int positives_ = 0;
  int total_ = 0;
};

}  // namespace convscreen
