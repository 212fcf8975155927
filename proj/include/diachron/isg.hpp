#pragma once

// Incremental skip-gram: each slice starts from the previous slice's result.

#include <vector>

#include "diachron/adam.hpp"
#include "diachron/corpus.hpp"
#include "diachron/matrix.hpp"
#include "diachron/train_config.hpp"

namespace diachron {

struct SliceTrainResult {
  Matrix U;
  Matrix V;
  std::vector<double> train_lpos;  // per epoch, mean per positive pair
  std::vector<double> valid_lpos;  // per epoch; empty without validation docs
  AdamState adamU;
  AdamState adamV;
};

// Adam ascent on the SGNS log-likelihood of one slice. Only rows that occur
// in a batch are updated, so words absent from the slice keep their word
// vector bit for bit.
SliceTrainResult train_slice(const std::vector<Document>& docs, const NoiseDistribution& noise,
                             const Matrix& initU, const Matrix& initV, const TrainConfig& config,
                             std::size_t slice_index,
                             const std::vector<Document>* validation = nullptr);

struct IsgModel {
  std::vector<Matrix> U;
  std::vector<Matrix> V;
  std::vector<std::size_t> training_order;
  std::vector<std::vector<double>> train_lpos;  // [slice][epoch]
  std::vector<AdamState> adamU;  // final optimizer state per slice
  std::vector<AdamState> adamV;
};

IsgModel train_incremental(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                           const Matrix& initU, const Matrix& initV, const TrainConfig& config,
                           Direction direction, const EpochObserver& observer = {});

}  // namespace diachron
