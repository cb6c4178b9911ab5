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

#include "evonas/policy_net.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "evonas/error.h"

namespace evonas {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

PolicyParams ZeroPolicy(const std::vector<std::size_t>& cards,
                        std::size_t hidden_size) {
  if (hidden_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "hidden_size must be >= 1");
  }
  const auto h = static_cast<Eigen::Index>(hidden_size);
  PolicyParams p;
  p.hidden_size = hidden_size;
  std::size_t total = 0;
  for (std::size_t c : cards) {
    p.value_offsets.push_back(total);
    total += c;
  }
  p.input_embeddings = MatrixXd::Zero(static_cast<Eigen::Index>(total), h);
  p.start_embedding = VectorXd::Zero(h);
  p.w_input = MatrixXd::Zero(4 * h, h);
  p.w_recurrent = MatrixXd::Zero(4 * h, h);
  p.bias = VectorXd::Zero(4 * h);
  for (std::size_t c : cards) {
    p.out_weights.push_back(MatrixXd::Zero(static_cast<Eigen::Index>(c), h));
    p.out_bias.push_back(VectorXd::Zero(static_cast<Eigen::Index>(c)));
  }
  return p;
}

void FillUniform(Eigen::Ref<MatrixXd> m, Rng& rng, double scale) {
  // Column-major fill order, matching Flatten().
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.UniformReal(-scale, scale);
    }
  }
}

// Vectorized gate nonlinearities. tanh(v) = 1 - 2 / (exp(2v) + 1) saturates
// correctly at both ends.
MatrixXd Sigmoid(const MatrixXd& a) {
  return (1.0 + (-a.array()).exp()).inverse().matrix();
}

MatrixXd Tanh(const MatrixXd& a) {
  return (1.0 - 2.0 / ((2.0 * a.array()).exp() + 1.0)).matrix();
}

// Numerically stable softmax; the single implementation behind every
// probability this module reports.
void Softmax(const double* logits, std::size_t n, double* out) {
  double max_logit = logits[0];
  for (std::size_t j = 1; j < n; ++j) max_logit = std::max(max_logit, logits[j]);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(logits[j] - max_logit);
    total += out[j];
  }
  for (std::size_t j = 0; j < n; ++j) out[j] /= total;
}

double Entropy(const double* probs, std::size_t n) {
  double h = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (probs[j] > 0.0) h -= probs[j] * std::log(probs[j]);
  }
  return h;
}

struct StepCache {
  MatrixXd x;
  MatrixXd h_prev;
  MatrixXd c_prev;
  MatrixXd input_gate;
  MatrixXd forget_gate;
  MatrixXd cell_gate;
  MatrixXd output_gate;
  MatrixXd tanh_c;
  MatrixXd h;
  MatrixXd c;
};

// One LSTM step on a batch of columns.
void LstmStep(const PolicyParams& p, const MatrixXd& x, const MatrixXd& h_prev,
              const MatrixXd& c_prev, StepCache& out) {
  const auto h = static_cast<Eigen::Index>(p.hidden_size);
  MatrixXd a = p.w_input * x;
  a.noalias() += p.w_recurrent * h_prev;
  a.colwise() += p.bias;
  out.input_gate = Sigmoid(a.topRows(h));
  out.forget_gate = Sigmoid(a.middleRows(h, h));
  out.cell_gate = Tanh(a.middleRows(2 * h, h));
  out.output_gate = Sigmoid(a.bottomRows(h));
  out.c = out.forget_gate.cwiseProduct(c_prev) +
          out.input_gate.cwiseProduct(out.cell_gate);
  out.tanh_c = Tanh(out.c);
  out.h = out.output_gate.cwiseProduct(out.tanh_c);
}

// Input columns for step t: the start embedding at t = 0, otherwise the
// embedding of each sequence's value at position t - 1.
MatrixXd GatherInputs(const PolicyParams& p, std::size_t t,
                      std::span<const Genotype* const> genotypes) {
  const auto h = static_cast<Eigen::Index>(p.hidden_size);
  const auto batch = static_cast<Eigen::Index>(genotypes.size());
  MatrixXd x(h, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    if (t == 0) {
      x.col(b) = p.start_embedding;
    } else {
      const std::size_t row =
          p.value_offsets[t - 1] + (*genotypes[static_cast<std::size_t>(b)])[t - 1];
      x.col(b) = p.input_embeddings.row(static_cast<Eigen::Index>(row)).transpose();
    }
  }
  return x;
}

MatrixXd Logits(const PolicyParams& p, std::size_t t, const MatrixXd& h) {
  MatrixXd z = p.out_weights[t] * h;
  z.colwise() += p.out_bias[t];
  return z;
}

// Little-endian binary helpers.
void WriteU64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t ReadU64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw Error(ErrorCode::kParse, "truncated policy checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

constexpr char kCheckpointMagic[8] = {'E', 'V', 'N', 'S', 'P', 'O', 'L', '\0'};
constexpr std::uint64_t kCheckpointVersion = 1;

}  // namespace

std::size_t PolicyParams::NumParameters() const {
  std::size_t n = 0;
  ForEachTensor([&n](const std::string&, Eigen::Ref<const MatrixXd> m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

bool PolicyParams::AllFinite() const {
  bool finite = true;
  ForEachTensor([&finite](const std::string&, Eigen::Ref<const MatrixXd> m) {
    finite = finite && m.allFinite();
  });
  return finite;
}

double PolicyParams::SquaredNorm() const {
  double total = 0.0;
  ForEachTensor([&total](const std::string&, Eigen::Ref<const MatrixXd> m) {
    total += m.squaredNorm();
  });
  return total;
}

PolicyParams PolicyParams::ZerosLike() const {
  std::vector<std::size_t> cards;
  for (const auto& b : out_bias) cards.push_back(static_cast<std::size_t>(b.size()));
  return ZeroPolicy(cards, hidden_size);
}

void PolicyParams::AddScaled(const PolicyParams& other, double scale) {
  Unflatten(Flatten() + scale * other.Flatten());
}

VectorXd PolicyParams::Flatten() const {
  VectorXd flat(static_cast<Eigen::Index>(NumParameters()));
  Eigen::Index offset = 0;
  ForEachTensor([&](const std::string&, Eigen::Ref<const MatrixXd> m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) flat(offset++) = m(i, j);
    }
  });
  return flat;
}

void PolicyParams::Unflatten(const VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(NumParameters())) {
    throw Error(ErrorCode::kInvalidArgument, "flat parameter size mismatch");
  }
  Eigen::Index offset = 0;
  ForEachTensor([&](const std::string&, Eigen::Ref<MatrixXd> m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = flat(offset++);
    }
  });
}

bool operator==(const PolicyParams& a, const PolicyParams& b) {
  if (a.hidden_size != b.hidden_size || a.value_offsets != b.value_offsets ||
      a.out_weights.size() != b.out_weights.size()) {
    return false;
  }
  const VectorXd fa = a.Flatten();
  const VectorXd fb = b.Flatten();
  if (fa.size() != fb.size()) return false;
  return std::memcmp(fa.data(), fb.data(),
                     static_cast<std::size_t>(fa.size()) * sizeof(double)) == 0;
}

PolicyParams InitUniformPolicy(const SearchSpace& space,
                               std::size_t hidden_size, Seed seed) {
  PolicyParams p = ZeroPolicy(space.cardinalities(), hidden_size);
  Rng rng(seed);
  FillUniform(p.input_embeddings, rng, 0.1);
  FillUniform(p.start_embedding, rng, 0.1);
  FillUniform(p.w_input, rng, 0.1);
  FillUniform(p.w_recurrent, rng, 0.1);
  return p;
}

PolicyParams InitRandomPolicy(const SearchSpace& space,
                              std::size_t hidden_size, Seed seed,
                              double scale) {
  PolicyParams p = ZeroPolicy(space.cardinalities(), hidden_size);
  Rng rng(seed);
  p.ForEachTensor([&](const std::string&, Eigen::Ref<MatrixXd> m) {
    FillUniform(m, rng, scale);
  });
  return p;
}

void CheckPolicyMatchesSpace(const PolicyParams& params,
                             const SearchSpace& space) {
  bool ok = params.out_bias.size() == space.length() &&
            params.out_weights.size() == space.length();
  for (std::size_t i = 0; ok && i < space.length(); ++i) {
    ok = params.out_bias[i].size() ==
             static_cast<Eigen::Index>(space.cardinality_at(i)) &&
         params.out_weights[i].rows() ==
             static_cast<Eigen::Index>(space.cardinality_at(i));
  }
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                "policy parameters do not match the search space");
  }
}

PolicyCursor::PolicyCursor(const PolicyParams& params, const SearchSpace& space)
    : params_(params), space_(space) {
  CheckPolicyMatchesSpace(params, space);
  const auto h = static_cast<Eigen::Index>(params.hidden_size);
  hidden_ = MatrixXd::Zero(h, 1);
  cell_ = MatrixXd::Zero(h, 1);
  StepCache step;
  MatrixXd x(h, 1);
  x.col(0) = params.start_embedding;
  LstmStep(params_, x, hidden_, cell_, step);
  hidden_ = std::move(step.h);
  cell_ = std::move(step.c);
  ComputeDistribution();
}

void PolicyCursor::ComputeDistribution() {
  const MatrixXd z = Logits(params_, position_, hidden_);
  probabilities_.resize(static_cast<std::size_t>(z.rows()));
  Softmax(z.data(), probabilities_.size(), probabilities_.data());
}

double PolicyCursor::entropy() const {
  return Entropy(probabilities_.data(), probabilities_.size());
}

void PolicyCursor::Advance(std::size_t value) {
  if (done()) {
    throw Error(ErrorCode::kInvalidArgument, "cursor is past the last position");
  }
  if (value >= space_.cardinality_at(position_)) {
    throw Error(ErrorCode::kInvalidArgument,
                DescribeGenotypeError(IndexOutOfRange{
                    position_, value, space_.cardinality_at(position_)}));
  }
  ++position_;
  if (done()) return;
  const auto h = static_cast<Eigen::Index>(params_.hidden_size);
  MatrixXd x(h, 1);
  x.col(0) = params_.input_embeddings
                 .row(static_cast<Eigen::Index>(
                     params_.value_offsets[position_ - 1] + value))
                 .transpose();
  StepCache step;
  LstmStep(params_, x, hidden_, cell_, step);
  hidden_ = std::move(step.h);
  cell_ = std::move(step.c);
  ComputeDistribution();
}

StepDistribution ComputeStepDistribution(const PolicyParams& params,
                                         const SearchSpace& space,
                                         std::span<const std::size_t> prefix) {
  if (prefix.size() >= space.length()) {
    throw Error(ErrorCode::kInvalidArgument,
                "prefix must be shorter than the space length");
  }
  if (auto error = space.ValidatePrefix(prefix)) {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid prefix: " + DescribeGenotypeError(*error));
  }
  PolicyCursor cursor(params, space);
  for (std::size_t v : prefix) cursor.Advance(v);
  return {prefix.size(), cursor.probabilities()};
}

std::size_t SampleTrace::NumMutated() const {
  return static_cast<std::size_t>(
      std::count(mutated_mask.begin(), mutated_mask.end(), true));
}

SampleTrace SampleSequence(const PolicyParams& params, const SearchSpace& space,
                           Rng& rng) {
  SampleTrace trace;
  PolicyCursor cursor(params, space);
  while (!cursor.done()) {
    const auto& probs = cursor.probabilities();
    const std::size_t v = rng.Categorical(probs);
    trace.genotype.values.push_back(v);
    trace.log_probs.push_back(std::log(probs[v]));
    trace.entropies.push_back(cursor.entropy());
    trace.mutated_mask.push_back(true);
    cursor.Advance(v);
  }
  return trace;
}

SampleTrace MutateSequence(const PolicyParams& params, const SearchSpace& space,
                           const Genotype& parent, double p, Rng& rng) {
  if (auto error = space.Validate(parent)) {
    throw Error(ErrorCode::kInvalidGenotype,
                "invalid parent: " + DescribeGenotypeError(*error));
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "mutation probability must be in [0, 1]");
  }
  SampleTrace trace;
  PolicyCursor cursor(params, space);
  while (!cursor.done()) {
    const std::size_t pos = cursor.position();
    const auto& probs = cursor.probabilities();
    const bool mutate = rng.Bernoulli(p);
    const std::size_t v = mutate ? rng.Categorical(probs) : parent[pos];
    trace.genotype.values.push_back(v);
    trace.log_probs.push_back(std::log(probs[v]));
    trace.entropies.push_back(cursor.entropy());
    trace.mutated_mask.push_back(mutate);
    cursor.Advance(v);
  }
  return trace;
}

ObjectiveGradient EvaluateObjective(const PolicyParams& params,
                                    const SearchSpace& space,
                                    std::span<const SequenceTerm> terms) {
  CheckPolicyMatchesSpace(params, space);
  const std::size_t length = space.length();
  std::vector<const Genotype*> genotypes;
  genotypes.reserve(terms.size());
  for (const SequenceTerm& term : terms) {
    space.CheckValid(*term.genotype);
    if (term.mask != nullptr && term.mask->size() != length) {
      throw Error(ErrorCode::kInvalidArgument, "mask length mismatch");
    }
    genotypes.push_back(term.genotype);
  }

  ObjectiveGradient result;
  result.gradient = params.ZerosLike();
  if (terms.empty()) return result;

  const auto h = static_cast<Eigen::Index>(params.hidden_size);
  const auto batch = static_cast<Eigen::Index>(terms.size());
  std::vector<StepCache> steps(length);
  std::vector<MatrixXd> d_logits(length);

  MatrixXd h_prev = MatrixXd::Zero(h, batch);
  MatrixXd c_prev = MatrixXd::Zero(h, batch);
  for (std::size_t t = 0; t < length; ++t) {
    StepCache& step = steps[t];
    step.x = GatherInputs(params, t, genotypes);
    step.h_prev = std::move(h_prev);
    step.c_prev = std::move(c_prev);
    LstmStep(params, step.x, step.h_prev, step.c_prev, step);
    h_prev = step.h;
    c_prev = step.c;

    const MatrixXd z = Logits(params, t, step.h);
    const std::size_t card = space.cardinality_at(t);
    MatrixXd& dz = d_logits[t];
    dz = MatrixXd::Zero(z.rows(), batch);
    std::vector<double> probs(card);
    std::vector<double> log_probs(card);
    for (Eigen::Index b = 0; b < batch; ++b) {
      const SequenceTerm& term = terms[static_cast<std::size_t>(b)];
      if (term.mask != nullptr && !(*term.mask)[t]) continue;
      Softmax(z.col(b).data(), card, probs.data());
      const std::size_t v = (*term.genotype)[t];
      double* dz_col = dz.col(b).data();
      for (std::size_t j = 0; j < card; ++j) {
        dz_col[j] = term.log_prob_weight * ((j == v ? 1.0 : 0.0) - probs[j]);
      }
      result.value += term.log_prob_weight * std::log(probs[v]);
      if (term.entropy_weight == 0.0) continue;
      // Same accumulation order as Entropy().
      double entropy = 0.0;
      for (std::size_t j = 0; j < card; ++j) {
        log_probs[j] = probs[j] > 0.0 ? std::log(probs[j]) : 0.0;
        if (probs[j] > 0.0) entropy -= probs[j] * log_probs[j];
      }
      result.value += term.entropy_weight * entropy;
      for (std::size_t j = 0; j < card; ++j) {
        dz_col[j] += term.entropy_weight * -probs[j] * (log_probs[j] + entropy);
      }
    }
  }

  PolicyParams& grad = result.gradient;
  MatrixXd dh_next = MatrixXd::Zero(h, batch);
  MatrixXd dc_next = MatrixXd::Zero(h, batch);
  MatrixXd da(4 * h, batch);
  for (std::size_t t = length; t-- > 0;) {
    const StepCache& s = steps[t];
    grad.out_weights[t].noalias() += d_logits[t] * s.h.transpose();
    grad.out_bias[t] += d_logits[t].rowwise().sum();

    MatrixXd dh = dh_next;
    dh.noalias() += params.out_weights[t].transpose() * d_logits[t];
    const MatrixXd dc =
        dh.cwiseProduct(s.output_gate)
            .cwiseProduct((1.0 - s.tanh_c.array().square()).matrix()) +
        dc_next;
    const auto ones = MatrixXd::Ones(h, batch).array();
    da.topRows(h) = (dc.array() * s.cell_gate.array() * s.input_gate.array() *
                     (ones - s.input_gate.array()))
                        .matrix();
    da.middleRows(h, h) =
        (dc.array() * s.c_prev.array() * s.forget_gate.array() *
         (ones - s.forget_gate.array()))
            .matrix();
    da.middleRows(2 * h, h) =
        (dc.array() * s.input_gate.array() *
         (ones - s.cell_gate.array().square()))
            .matrix();
    da.bottomRows(h) = (dh.array() * s.tanh_c.array() * s.output_gate.array() *
                        (ones - s.output_gate.array()))
                           .matrix();
    dc_next = dc.cwiseProduct(s.forget_gate);

    grad.w_input.noalias() += da * s.x.transpose();
    grad.w_recurrent.noalias() += da * s.h_prev.transpose();
    grad.bias += da.rowwise().sum();

    const MatrixXd dx = params.w_input.transpose() * da;
    if (t == 0) {
      grad.start_embedding += dx.rowwise().sum();
    } else {
      for (Eigen::Index b = 0; b < batch; ++b) {
        const std::size_t row =
            params.value_offsets[t - 1] +
            (*genotypes[static_cast<std::size_t>(b)])[t - 1];
        grad.input_embeddings.row(static_cast<Eigen::Index>(row)) +=
            dx.col(b).transpose();
      }
    }
    dh_next.noalias() = params.w_recurrent.transpose() * da;
  }
  return result;
}

ObjectiveGradient LogLikelihoodAndGrad(const PolicyParams& params,
                                       const SearchSpace& space,
                                       const Genotype& g) {
  const SequenceTerm term{&g, 1.0, 0.0, nullptr};
  return EvaluateObjective(params, space, std::span(&term, 1));
}

std::string OptimizerKindName(OptimizerConfig::Kind kind) {
  return kind == OptimizerConfig::Kind::kAdam ? "adam" : "sgd";
}

std::optional<OptimizerConfig::Kind> ParseOptimizerKind(std::string_view name) {
  if (name == "sgd") return OptimizerConfig::Kind::kSgd;
  if (name == "adam") return OptimizerConfig::Kind::kAdam;
  return std::nullopt;
}

PolicyParams Optimizer::Ascend(const PolicyParams& params,
                               const PolicyParams& gradient) {
  VectorXd g = gradient.Flatten();
  if (config_.clip_norm > 0.0) {
    const double norm = g.norm();
    if (norm > config_.clip_norm) g *= config_.clip_norm / norm;
  }
  VectorXd theta = params.Flatten();
  ++steps_;
  if (config_.kind == OptimizerConfig::Kind::kSgd) {
    theta += config_.learning_rate * g;
  } else {
    if (m_.size() != g.size()) {
      m_ = VectorXd::Zero(g.size());
      v_ = VectorXd::Zero(g.size());
    }
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    m_ = b1 * m_ + (1.0 - b1) * g;
    v_ = b2 * v_ + (1.0 - b2) * g.cwiseProduct(g);
    const double t = static_cast<double>(steps_);
    const double m_scale = 1.0 / (1.0 - std::pow(b1, t));
    const double v_scale = 1.0 / (1.0 - std::pow(b2, t));
    theta.array() += config_.learning_rate * (m_.array() * m_scale) /
                     ((v_.array() * v_scale).sqrt() + config_.adam_epsilon);
  }
  PolicyParams updated = params;
  updated.Unflatten(theta);
  return updated;
}

void Optimizer::RestoreState(long long steps, VectorXd m, VectorXd v) {
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

double BaselineState::Current(double reward) {
  if (!enabled) return 0.0;
  if (!value) value = reward;
  return *value;
}

void BaselineState::Update(double reward) {
  if (!enabled) return;
  if (!value) {
    value = reward;
  } else {
    value = decay * *value + (1.0 - decay) * reward;
  }
}

ObjectiveGradient ReinforceObjective(const PolicyParams& params,
                                     const SearchSpace& space,
                                     std::span<const ScoredTrace> batch,
                                     double baseline, double entropy_penalty) {
  std::vector<SequenceTerm> terms;
  terms.reserve(batch.size());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const ScoredTrace& item : batch) {
    terms.push_back({&item.trace.genotype, (item.reward - baseline) * scale,
                     entropy_penalty * scale, &item.trace.mutated_mask});
  }
  return EvaluateObjective(params, space, terms);
}

PolicyParams ReinforceUpdate(const PolicyParams& params,
                             const SearchSpace& space,
                             std::span<const ScoredTrace> batch,
                             BaselineState& baseline, double entropy_penalty,
                             Optimizer& optimizer) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "empty Reinforce batch");
  const double b = baseline.Current(batch.front().reward);
  ObjectiveGradient objective =
      ReinforceObjective(params, space, batch, b, entropy_penalty);
  for (const ScoredTrace& item : batch) baseline.Update(item.reward);
  return optimizer.Ascend(params, objective.gradient);
}

ObjectiveGradient PqtObjective(const PolicyParams& params,
                               const SearchSpace& space,
                               std::span<const Genotype> queue,
                               double entropy_penalty) {
  std::vector<SequenceTerm> terms;
  terms.reserve(queue.size());
  const double scale = 1.0 / static_cast<double>(queue.size());
  for (const Genotype& g : queue) {
    terms.push_back({&g, scale, entropy_penalty * scale, nullptr});
  }
  return EvaluateObjective(params, space, terms);
}

PolicyParams PqtUpdate(const PolicyParams& params, const SearchSpace& space,
                       std::span<const Genotype> queue, double entropy_penalty,
                       Optimizer& optimizer) {
  if (queue.empty()) throw Error(ErrorCode::kEmptyQueue, "empty PQT queue");
  ObjectiveGradient objective =
      PqtObjective(params, space, queue, entropy_penalty);
  return optimizer.Ascend(params, objective.gradient);
}

void SavePolicy(const PolicyParams& params, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  WriteU64(out, kCheckpointVersion);
  WriteU64(out, params.hidden_size);
  WriteU64(out, params.out_bias.size());
  for (const auto& b : params.out_bias) WriteU64(out, static_cast<std::uint64_t>(b.size()));
  params.ForEachTensor([&out](const std::string& name,
                              Eigen::Ref<const MatrixXd> m) {
    WriteU64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteU64(out, static_cast<std::uint64_t>(m.rows()));
    WriteU64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        WriteU64(out, std::bit_cast<std::uint64_t>(m(i, j)));
      }
    }
  });
  if (!out) throw Error(ErrorCode::kIo, "failed to write policy checkpoint");
}

PolicyParams LoadPolicy(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(ErrorCode::kParse, "not a policy checkpoint");
  }
  const std::uint64_t version = ReadU64(in);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kParse, "unsupported policy checkpoint version " +
                                       std::to_string(version));
  }
  const std::uint64_t hidden = ReadU64(in);
  const std::uint64_t positions = ReadU64(in);
  if (hidden == 0 || hidden > (1u << 16) || positions == 0 ||
      positions > (1u << 20)) {
    throw Error(ErrorCode::kParse, "implausible policy checkpoint header");
  }
  std::vector<std::size_t> cards;
  for (std::uint64_t i = 0; i < positions; ++i) {
    cards.push_back(static_cast<std::size_t>(ReadU64(in)));
  }
  PolicyParams params = ZeroPolicy(cards, static_cast<std::size_t>(hidden));
  params.ForEachTensor([&in](const std::string& name, Eigen::Ref<MatrixXd> m) {
    const std::uint64_t name_size = ReadU64(in);
    if (name_size != name.size()) {
      throw Error(ErrorCode::kParse, "unexpected tensor in checkpoint");
    }
    std::string stored(name_size, '\0');
    in.read(stored.data(), static_cast<std::streamsize>(name_size));
    const std::uint64_t rows = ReadU64(in);
    const std::uint64_t cols = ReadU64(in);
    if (!in || stored != name || rows != static_cast<std::uint64_t>(m.rows()) ||
        cols != static_cast<std::uint64_t>(m.cols())) {
      throw Error(ErrorCode::kParse, "tensor '" + name + "' shape mismatch");
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, j) = std::bit_cast<double>(ReadU64(in));
      }
    }
  });
  return params;
}

void SavePolicyFile(const PolicyParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  SavePolicy(params, out);
}

PolicyParams LoadPolicyFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return LoadPolicy(in);
}

}  // namespace evonas
