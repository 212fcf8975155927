#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "diachron/corpus.hpp"

namespace diachron {

enum class ModelKind { isg, dsg, dbe };
std::string_view model_name(ModelKind k);
ModelKind parse_model(std::string_view name);

// Order in which slices are trained. Outputs are always indexed by calendar
// slice, never by training order.
enum class Direction { forward, backward };
std::string_view direction_name(Direction d);

struct TrainConfig {
  std::size_t dim = 100;
  std::size_t window = 4;
  std::size_t negative_ratio = 1;
  double learning_rate = 0.1;
  std::size_t epochs = 100;
  std::size_t batch_size = 1024;  // examples (positives + negatives) per step
  std::uint64_t seed = 1;

  void validate() const;
};

// Slice training order for a direction.
std::vector<std::size_t> training_order(std::size_t num_slices, Direction direction);

// Invoked after every epoch: (calendar slice, epoch, training L_pos per pair).
using EpochObserver = std::function<void(std::size_t, std::size_t, double)>;

// Positive pairs of one slice, grouped by document so that documents can be
// reshuffled each epoch.
class SlicePairs {
 public:
  SlicePairs() = default;
  SlicePairs(const std::vector<Document>& docs, std::size_t window);

  std::size_t num_documents() const noexcept { return offsets_.size() - 1; }
  std::size_t num_pairs() const noexcept { return pairs_.size(); }
  std::span<const Pair> document(std::size_t k) const {
    return {pairs_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  const std::vector<Pair>& all() const noexcept { return pairs_; }

 private:
  std::vector<Pair> pairs_;
  std::vector<std::size_t> offsets_{0};
};

// Splits one epoch of a slice into mini-batches: documents in a shuffled
// order, each positive immediately followed by its freshly drawn negatives.
class EpochBatches {
 public:
  EpochBatches(const SlicePairs& pairs, const NoiseDistribution& noise, std::size_t ratio,
               std::size_t batch_size, std::uint64_t seed, std::size_t slice_index);

  // Fills `batch` with the next mini-batch; false when the epoch is done.
  bool next(SkipGramBatch& batch);
  std::size_t total_examples() const noexcept { return total_; }

 private:
  const SlicePairs* pairs_;
  const NoiseDistribution* noise_;
  std::size_t ratio_;
  std::size_t batch_size_;
  std::size_t slice_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t doc_ = 0;
  std::size_t pos_ = 0;
  std::size_t total_;
};

}  // namespace diachron
