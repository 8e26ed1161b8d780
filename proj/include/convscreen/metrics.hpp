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

#include <cstdint>
#include <vector>

namespace convscreen {

/// One-vs-rest confusion counts for the binary classes 0 and 1.
/// For class c: tp[c] = truth c predicted c, fn[c] = truth c predicted
/// other, fp[c] = truth other predicted c.
struct ConfusionCounts {
  std::int64_t tp[2] = {0, 0};
  std::int64_t fp[2] = {0, 0};
  std::int64_t fn[2] = {0, 0};

  std::int64_t truths_of(int cls) const { return tp[cls] + fn[cls]; }
  std::int64_t predicted_of(int cls) const { return tp[cls] + fp[cls]; }
  std::int64_t total() const { return truths_of(0) + truths_of(1); }
};

/// Tally predictions against truths. Both vectors hold binary labels.
/// Throws std::invalid_argument on length mismatch, empty input, or a
/// label outside {0,1}.
ConfusionCounts confusion(const std::vector<int>& predictions,
                          const std::vector<int>& truths);

/// Unweighted average recall: mean of the two per-class recalls.
/// Throws std::domain_error when a class is absent from the truths.
double uar(const ConfusionCounts& cc);

/// Unweighted average precision: mean of the two per-class precisions.
/// A class with zero predicted items has undefined precision; by default
/// that throws std::domain_error, with zero_for_undefined it counts as 0.
double uap(const ConfusionCounts& cc, bool zero_for_undefined = false);

/// Macro F1: mean over classes of 2PR/(P+R), with per-class F1 taken as 0
/// when P+R = 0. Throws std::domain_error when a class is absent from the
/// truths.
double macro_f1(const ConfusionCounts& cc);

/// Plain accuracy over all items.
double accuracy(const ConfusionCounts& cc);

}  // namespace convscreen
