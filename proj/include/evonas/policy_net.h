// Copyright 2026 The evonas Authors.
//
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

#ifndef EVONAS_POLICY_NET_H_
#define EVONAS_POLICY_NET_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "evonas/random.h"
#include "evonas/search_space.h"

namespace evonas {

// Parameters of the autoregressive LSTM policy.
//
// Step t consumes the start embedding (t = 0) or the embedding of the value
// chosen at position t-1, updates the LSTM state, and projects the new
// hidden state through position t's output layer to logits over that
// position's values. Gate blocks in the stacked matrices are ordered
// input, forget, cell, output.
struct PolicyParams {
  std::size_t hidden_size = 0;
  // Row offset of position i's values inside input_embeddings.
  std::vector<std::size_t> value_offsets;

  Eigen::MatrixXd input_embeddings;  // (sum of cardinalities) x H
  Eigen::VectorXd start_embedding;   // H
  Eigen::MatrixXd w_input;           // 4H x H
  Eigen::MatrixXd w_recurrent;       // 4H x H
  Eigen::VectorXd bias;              // 4H
  std::vector<Eigen::MatrixXd> out_weights;  // cardinality_i x H
  std::vector<Eigen::VectorXd> out_bias;     // cardinality_i

  std::size_t NumParameters() const;
  bool AllFinite() const;
  double SquaredNorm() const;

  // Same shapes, all zeros.
  PolicyParams ZerosLike() const;
  // this += scale * other (shapes must match).
  void AddScaled(const PolicyParams& other, double scale);

  // Fixed-order flattening used by the optimizer, checkpoints and
  // finite-difference tests.
  Eigen::VectorXd Flatten() const;
  void Unflatten(const Eigen::VectorXd& flat);

  // Calls f(name, matrix) for every tensor in flattening order. Vectors are
  // visited as one-column matrices through Eigen::Ref.
  template <typename F>
  void ForEachTensor(F&& f);
  template <typename F>
  void ForEachTensor(F&& f) const;

  friend bool operator==(const PolicyParams& a, const PolicyParams& b);
};

// Embeddings and recurrent weights uniform in [-0.1, 0.1]; every output
// projection and bias exactly zero, so all step distributions are uniform.
PolicyParams InitUniformPolicy(const SearchSpace& space,
                               std::size_t hidden_size, Seed seed);

// Every tensor uniform in [-scale, scale]. Used to probe gradients and
// distributional identities away from the uniform point.
PolicyParams InitRandomPolicy(const SearchSpace& space,
                              std::size_t hidden_size, Seed seed,
                              double scale);

// Throws Error(kInvalidArgument) if params were not built for `space`.
void CheckPolicyMatchesSpace(const PolicyParams& params,
                             const SearchSpace& space);

struct StepDistribution {
  std::size_t position = 0;
  std::vector<double> probabilities;
};

// Incremental forward pass: holds the LSTM state after consuming the start
// embedding and the values fed so far.
class PolicyCursor {
 public:
  PolicyCursor(const PolicyParams& params, const SearchSpace& space);

  std::size_t position() const { return position_; }
  bool done() const { return position_ >= space_.length(); }

  // Distribution over the values of position(). Requires !done().
  const std::vector<double>& probabilities() const { return probabilities_; }
  double entropy() const;

  // Feeds `value` as the choice at position() and moves to the next one.
  void Advance(std::size_t value);

 private:
  void ComputeDistribution();

  const PolicyParams& params_;
  const SearchSpace& space_;
  std::size_t position_ = 0;
  Eigen::MatrixXd hidden_;
  Eigen::MatrixXd cell_;
  std::vector<double> probabilities_;
};

// Distribution for position prefix.size() given the chosen values so far.
// Throws Error(kInvalidArgument) if the prefix is invalid or complete.
StepDistribution ComputeStepDistribution(const PolicyParams& params,
                                         const SearchSpace& space,
                                         std::span<const std::size_t> prefix);

struct SampleTrace {
  Genotype genotype;
  std::vector<double> log_probs;  // network log-probability of each value
  std::vector<double> entropies;  // entropy of each step distribution
  std::vector<bool> mutated_mask;  // true where the value was sampled

  std::size_t NumMutated() const;
};

// Autoregressive sample; every position is marked as sampled.
SampleTrace SampleSequence(const PolicyParams& params, const SearchSpace& space,
                           Rng& rng);

// Child of `parent`: each position is independently resampled from the
// network with probability p (conditioned on the realized prefix, whether
// copied or sampled), otherwise copied. Throws kInvalidGenotype for an
// invalid parent and kInvalidArgument for p outside [0, 1].
SampleTrace MutateSequence(const PolicyParams& params, const SearchSpace& space,
                           const Genotype& parent, double p, Rng& rng);

// One sequence's contribution to a differentiable objective:
//   sum over masked positions of
//     log_prob_weight * log p(value) + entropy_weight * entropy.
struct SequenceTerm {
  const Genotype* genotype = nullptr;
  double log_prob_weight = 1.0;
  double entropy_weight = 0.0;
  const std::vector<bool>* mask = nullptr;  // nullptr means every position
};

struct ObjectiveGradient {
  double value = 0.0;
  PolicyParams gradient;
};

// Batched forward pass and backpropagation through time.
ObjectiveGradient EvaluateObjective(const PolicyParams& params,
                                    const SearchSpace& space,
                                    std::span<const SequenceTerm> terms);

// Sum of log-probabilities of g's values under full-prefix conditioning, and
// its gradient. Throws kInvalidGenotype.
ObjectiveGradient LogLikelihoodAndGrad(const PolicyParams& params,
                                       const SearchSpace& space,
                                       const Genotype& g);

// ---------------------------------------------------------------------------
// Optimization.

struct OptimizerConfig {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kSgd;
  double learning_rate = 1e-3;
  // Global L2 norm clip applied to the ascent direction; <= 0 disables.
  double clip_norm = 10.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

std::string OptimizerKindName(OptimizerConfig::Kind kind);
std::optional<OptimizerConfig::Kind> ParseOptimizerKind(std::string_view name);

// Gradient ascent with optional Adam moments.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  const OptimizerConfig& config() const { return config_; }

  // Returns params moved along `gradient` (an ascent direction).
  PolicyParams Ascend(const PolicyParams& params,
                      const PolicyParams& gradient);

  long long steps() const { return steps_; }
  const Eigen::VectorXd& first_moment() const { return m_; }
  const Eigen::VectorXd& second_moment() const { return v_; }
  void RestoreState(long long steps, Eigen::VectorXd m, Eigen::VectorXd v);

 private:
  OptimizerConfig config_;
  long long steps_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

// Exponential moving average of rewards, initialized at the first reward.
struct BaselineState {
  bool enabled = true;
  double decay = 0.95;
  std::optional<double> value;

  // Baseline to subtract for `reward` (initializing on first use).
  double Current(double reward);
  void Update(double reward);
};

struct ScoredTrace {
  SampleTrace trace;
  double reward = 0.0;
};

// Batch-averaged  (reward - baseline) * sum log p + entropy_penalty * sum H,
// over masked positions only.
ObjectiveGradient ReinforceObjective(const PolicyParams& params,
                                     const SearchSpace& space,
                                     std::span<const ScoredTrace> batch,
                                     double baseline, double entropy_penalty);

// One Reinforce step. The baseline is read before and updated after the
// gradient is formed. Throws kEmptyBatch.
PolicyParams ReinforceUpdate(const PolicyParams& params,
                             const SearchSpace& space,
                             std::span<const ScoredTrace> batch,
                             BaselineState& baseline, double entropy_penalty,
                             Optimizer& optimizer);

// Mean over the queue of full-sequence log-likelihood, plus
// entropy_penalty * mean summed step entropy along the queue's sequences.
ObjectiveGradient PqtObjective(const PolicyParams& params,
                               const SearchSpace& space,
                               std::span<const Genotype> queue,
                               double entropy_penalty);

// One PQT step. Throws kEmptyQueue.
PolicyParams PqtUpdate(const PolicyParams& params, const SearchSpace& space,
                       std::span<const Genotype> queue, double entropy_penalty,
                       Optimizer& optimizer);

// ---------------------------------------------------------------------------
// Checkpoints: versioned little-endian binary with tensor names and shapes.
// Round trips are bit-exact.

void SavePolicy(const PolicyParams& params, std::ostream& out);
PolicyParams LoadPolicy(std::istream& in);
void SavePolicyFile(const PolicyParams& params, const std::string& path);
PolicyParams LoadPolicyFile(const std::string& path);

// ---------------------------------------------------------------------------

template <typename F>
void PolicyParams::ForEachTensor(F&& f) {
  f("input_embeddings", Eigen::Ref<Eigen::MatrixXd>(input_embeddings));
  f("start_embedding", Eigen::Ref<Eigen::MatrixXd>(start_embedding));
  f("w_input", Eigen::Ref<Eigen::MatrixXd>(w_input));
  f("w_recurrent", Eigen::Ref<Eigen::MatrixXd>(w_recurrent));
  f("bias", Eigen::Ref<Eigen::MatrixXd>(bias));
  for (std::size_t i = 0; i < out_weights.size(); ++i) {
    f("out_weights/" + std::to_string(i),
      Eigen::Ref<Eigen::MatrixXd>(out_weights[i]));
    f("out_bias/" + std::to_string(i), Eigen::Ref<Eigen::MatrixXd>(out_bias[i]));
  }
}

template <typename F>
void PolicyParams::ForEachTensor(F&& f) const {
  using ConstRef = Eigen::Ref<const Eigen::MatrixXd>;
  f("input_embeddings", ConstRef(input_embeddings));
  f("start_embedding", ConstRef(start_embedding));
  f("w_input", ConstRef(w_input));
  f("w_recurrent", ConstRef(w_recurrent));
  f("bias", ConstRef(bias));
  for (std::size_t i = 0; i < out_weights.size(); ++i) {
    f("out_weights/" + std::to_string(i), ConstRef(out_weights[i]));
    f("out_bias/" + std::to_string(i), ConstRef(out_bias[i]));
  }
}

}  // namespace evonas

#endif  // EVONAS_POLICY_NET_H_
