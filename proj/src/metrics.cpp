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

#include "convscreen/metrics.hpp"

#include <stdexcept>
#include <string>

namespace convscreen {

namespace {

void require_class_present(const ConfusionCounts& cc, int cls) {
  if (cc.truths_of(cls) == 0) {
    throw std::domain_error("metric undefined: class " + std::to_string(cls) +
                            " absent from truths");
  }
}

}  // namespace

ConfusionCounts confusion(const std::vector<int>& predictions,
                          const std::vector<int>& truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("confusion: length mismatch (" +
                                std::to_string(predictions.size()) + " vs " +
                                std::to_string(truths.size()) + ")");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("confusion: empty input");
  }
  ConfusionCounts cc;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    int p = predictions[i];
    int t = truths[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1)) {
      throw std::invalid_argument("confusion: label outside {0,1} at item " +
                                  std::to_string(i));
    }
    if (p == t) {
      cc.tp[t] += 1;
    } else {
      cc.fn[t] += 1;
      cc.fp[p] += 1;
    }
  }
  return cc;
}

double uar(const ConfusionCounts& cc) {
  require_class_present(cc, 0);
  require_class_present(cc, 1);
  double r0 = static_cast<double>(cc.tp[0]) / static_cast<double>(cc.truths_of(0));
  double r1 = static_cast<double>(cc.tp[1]) / static_cast<double>(cc.truths_of(1));
  return (r0 + r1) / 2.0;
}

double uap(const ConfusionCounts& cc, bool zero_for_undefined) {
  double p[2];
  for (int cls = 0; cls < 2; ++cls) {
    std::int64_t denom = cc.predicted_of(cls);
    if (denom == 0) {
      if (!zero_for_undefined) {
        throw std::domain_error(
            "uap undefined: no predictions of class " + std::to_string(cls));
      }
      p[cls] = 0.0;
    } else {
      p[cls] = static_cast<double>(cc.tp[cls]) / static_cast<double>(denom);
    }
  }
  return (p[0] + p[1]) / 2.0;
}

double macro_f1(const ConfusionCounts& cc) {
  require_class_present(cc, 0);
  require_class_present(cc, 1);
  double f1_sum = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    double precision = cc.predicted_of(cls) > 0
                           ? static_cast<double>(cc.tp[cls]) /
                                 static_cast<double>(cc.predicted_of(cls))
                           : 0.0;
    double recall = static_cast<double>(cc.tp[cls]) /
                    static_cast<double>(cc.truths_of(cls));
    double f1 = precision + recall > 0.0
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    f1_sum += f1;
  }
  return f1_sum / 2.0;
}

double accuracy(const ConfusionCounts& cc) {
  std::int64_t n = cc.total();
  if (n == 0) {
    throw std::invalid_argument("accuracy: empty counts");
  }
  return static_cast<double>(cc.tp[0] + cc.tp[1]) / static_cast<double>(n);
}

}  // namespace convscreen
