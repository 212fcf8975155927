#pragma once

// Dynamic Bernoulli embeddings: one word matrix per slice, one context matrix
// shared by all slices, a Gaussian random walk tying U_t to U_{t-1}, trained
// jointly (MAP) over every slice.

#include <span>
#include <vector>

#include "diachron/adam.hpp"
#include "diachron/corpus.hpp"
#include "diachron/drift_reg.hpp"
#include "diachron/matrix.hpp"
#include "diachron/train_config.hpp"

namespace diachron {

struct DbeParams {
  double lambda = 1.0;    // drift precision
  double lambda0 = 0.01;  // base precision on U_0 and V
  void validate() const;
};

struct DbeModel {
  std::vector<Matrix> U;  // one per slice
  Matrix V;               // shared context vectors
};

// u_{center,t} . sum_{j in context} v_j
double dbe_positional_logit(WordId center, std::span<const WordId> context, const Matrix& U_t,
                            const Matrix& V);

// -(l0/2) sum ||v_i||^2 - (l0/2) sum ||u_{i,0}||^2 - (l/2) sum_{t>=1} ||u_{i,t} - u_{i,t-1}||^2
double dbe_prior(const std::vector<Matrix>& U, const Matrix& V, const DbeParams& params);
// Adds scale * d(prior) into the gradient buffers.
void add_dbe_prior_gradient(const std::vector<Matrix>& U, const Matrix& V,
                            const DbeParams& params, double scale, std::vector<Matrix>& gradU,
                            Matrix& gradV);

// Centers with their context windows for one slice. Each positive example is
// followed by `ratio` negatives that keep the context and replace the center
// with a noise draw.
struct DbeBatch {
  std::size_t slice = 0;
  std::vector<WordId> centers;
  std::vector<Label> labels;
  std::vector<std::size_t> context_offsets{0};  // size = examples + 1
  std::vector<WordId> contexts;

  std::size_t size() const noexcept { return centers.size(); }
  std::span<const WordId> context(std::size_t k) const {
    return {contexts.data() + context_offsets[k], context_offsets[k + 1] - context_offsets[k]};
  }
  void clear();
  void push(WordId center, std::span<const WordId> ctx, Label label);
};

// Positive (center, context) positions of the documents; contexts are the
// tokens within `window`, clipped at document edges. Positions whose context
// is empty (one-token documents) are skipped.
DbeBatch dbe_positives(const std::vector<Document>& docs, std::size_t window, std::size_t slice);

struct DbeLoss {
  double positive = 0.0;
  double negative = 0.0;
  double prior = 0.0;
  double regularizer = 0.0;  // subtracted in total()
  std::size_t positive_examples = 0;
  std::size_t negative_examples = 0;
  double total() const noexcept { return positive + negative + prior - regularizer; }
};

// Data terms summed over the batches plus one full prior.
DbeLoss dbe_loss(const std::vector<DbeBatch>& batches, const std::vector<Matrix>& U,
                 const Matrix& V, const DbeParams& params);

struct DbeGradients {
  std::vector<Matrix> dU;
  Matrix dV;
};
// Gradient of dbe_loss(...).total().
DbeGradients dbe_gradients(const std::vector<DbeBatch>& batches, const std::vector<Matrix>& U,
                           const Matrix& V, const DbeParams& params);

// Fraction of the full prior applied alongside each batch of an epoch.
inline double prior_fraction(std::size_t batch_examples, std::size_t epoch_examples) {
  return epoch_examples ? static_cast<double>(batch_examples) /
                              static_cast<double>(epoch_examples)
                        : 1.0;
}

struct DbeTrainResult {
  DbeModel model;
  std::vector<DbeLoss> epoch_loss;
  std::vector<std::vector<double>> train_lpos;  // [slice][epoch]
  std::vector<double> reg_beta;                 // per epoch, when regularized
  std::vector<AdamState> optimizer;             // U_0 .. U_{T-1}, then V
};

// Adam ascent on the joint objective. Each epoch interleaves mini-batches of
// all slices round-robin and applies the prior (and drift penalty, measured
// against U_0) in batch-sized fractions that add up to one full term.
DbeTrainResult train_dbe(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                         const std::vector<Matrix>& initU, const Matrix& initV,
                         const DbeParams& params, const TrainConfig& config,
                         const RegConfig& reg = {}, const EpochObserver& observer = {});

}  // namespace diachron
