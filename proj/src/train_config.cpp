#include "diachron/train_config.hpp"

#include <algorithm>
#include <numeric>

#include "diachron/error.hpp"

namespace diachron {

std::string_view model_name(ModelKind k) {
  switch (k) {
    case ModelKind::isg: return "isg";
    case ModelKind::dsg: return "dsg";
    case ModelKind::dbe: return "dbe";
  }
  return "isg";
}

ModelKind parse_model(std::string_view name) {
  if (name == "isg") return ModelKind::isg;
  if (name == "dsg") return ModelKind::dsg;
  if (name == "dbe") return ModelKind::dbe;
  throw usage_error("unknown model: " + std::string(name));
}

std::string_view direction_name(Direction d) {
  return d == Direction::forward ? "forward" : "backward";
}

void TrainConfig::validate() const {
  if (dim < 1) throw usage_error("embedding dimension must be >= 1");
  if (epochs < 1) throw usage_error("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw usage_error("learning rate must be > 0");
  if (window < 1) throw usage_error("context window must be >= 1");
  if (negative_ratio < 1) throw usage_error("negative ratio must be >= 1");
  if (batch_size < 1) throw usage_error("batch size must be >= 1");
}

std::vector<std::size_t> training_order(std::size_t num_slices, Direction direction) {
  std::vector<std::size_t> order(num_slices);
  std::iota(order.begin(), order.end(), 0);
  if (direction == Direction::backward) std::reverse(order.begin(), order.end());
  return order;
}

SlicePairs::SlicePairs(const std::vector<Document>& docs, std::size_t window) {
  offsets_.reserve(docs.size() + 1);
  for (const auto& d : docs) {
    append_pairs(d, window, pairs_);
    offsets_.push_back(pairs_.size());
  }
}

EpochBatches::EpochBatches(const SlicePairs& pairs, const NoiseDistribution& noise,
                           std::size_t ratio, std::size_t batch_size, std::uint64_t seed,
                           std::size_t slice_index)
    : pairs_(&pairs),
      noise_(&noise),
      ratio_(ratio),
      batch_size_(batch_size),
      slice_(slice_index),
      rng_(seed),
      order_(pairs.num_documents()),
      total_(pairs.num_pairs() * (ratio + 1)) {
  std::iota(order_.begin(), order_.end(), 0);
  std::shuffle(order_.begin(), order_.end(), rng_);
}

bool EpochBatches::next(SkipGramBatch& batch) {
  batch.clear();
  batch.slice_index = slice_;
  while (doc_ < order_.size() && batch.size() < batch_size_) {
    const auto doc = pairs_->document(order_[doc_]);
    while (pos_ < doc.size() && batch.size() < batch_size_) {
      const Pair& p = doc[pos_++];
      batch.push(p.center, p.context, Label::positive);
      for (std::size_t k = 0; k < ratio_; ++k)
        batch.push(p.center, noise_->sample(rng_), Label::negative);
    }
    if (pos_ == doc.size()) {
      ++doc_;
      pos_ = 0;
    }
  }
  return batch.size() > 0;
}

}  // namespace diachron
