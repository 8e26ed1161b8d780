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
#include <string>
#include <vector>

namespace convscreen {

/// Bidirectional gated recurrent classifier over an embedding sequence.
///
/// Each direction is a standard 4-gate cell (input/forget/output gates and
/// a tanh candidate). Without attention the classifier reads the
/// concatenation of the two final states; with attention the per-step
/// concatenated states are scored by a dot product with a learned vector,
/// softmax-normalized and averaged. The final layer is affine 2h -> 1
/// through a sigmoid.
///
/// Parameters live in one flat double vector with named blocks:
///   fwd_w [4h x (d+h)], fwd_b [4h], bwd_w, bwd_b,
///   att_w [2h] (only with attention), out_w [2h], out_b [1].
/// Gate rows are ordered input, forget, candidate, output.
class RecurrentChunkModel {
 public:
  RecurrentChunkModel(int input_dim, int hidden_dim, bool attention);

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  bool attention() const { return attention_; }

  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Seeded uniform(-0.08, 0.08) over every parameter.
  void init_params(std::uint64_t seed);

  struct Block {
    std::string name;
    std::size_t offset;
    std::size_t count;
  };
  std::vector<Block> blocks() const;

  // Offsets into the flat parameter vector. dir 0 = forward, 1 = backward.
  std::size_t offset_w(int dir) const;
  std::size_t offset_b(int dir) const;
  std::size_t offset_att() const;
  std::size_t offset_out_w() const;
  std::size_t offset_out_b() const;

 private:
  int input_dim_;
  int hidden_dim_;
  bool attention_;
  std::vector<double> params_;
};

/// Per-example activations kept for backpropagation. Reusable across calls
/// to avoid reallocation in inner loops.
struct RnnCache {
  int T = 0;
  // Per direction, processing order, T x h each.
  std::vector<double> h[2], c[2], tanh_c[2], gi[2], gf[2], gg[2], go[2];
  std::vector<double> readout;  // 2h classifier input
  std::vector<double> alpha;    // T attention weights (attention only)
  std::vector<double> scratch;  // 4h pre-activation buffer
  double logit = 0.0;
};

/// Probability of class 1 for a sequence of `T` input vectors stored
/// row-major at `seq` (T x d). Throws on T < 1.
double chunk_forward(const RecurrentChunkModel& model, const double* seq,
                     int T);

/// Forward pass that records activations for chunk_backward.
double chunk_forward_cached(const RecurrentChunkModel& model,
                            const double* seq, int T, RnnCache& cache);

/// Accumulate dLoss/dparams into `grad` (same layout as params), given
/// dLoss/dlogit for the cached example. Callers zero `grad` themselves.
void chunk_backward(const RecurrentChunkModel& model, const double* seq,
                    int T, const RnnCache& cache, double dlogit,
                    double* grad);

/// Binary cross-entropy of probability p against label y, clamped away
/// from log(0).
double bce_loss(double p, int y);

/// Max relative error between analytic and central finite-difference
/// gradients over every parameter, on a random 3-step sequence.
/// `corrupt_sign` flips the analytic gradient to prove the check can fail.
double gradient_check(int input_dim, int hidden_dim, bool attention,
                      std::uint64_t seed, bool corrupt_sign = false);

}  // namespace convscreen
