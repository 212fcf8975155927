#include "diachron/isg.hpp"

#include <cmath>

#include "diachron/adam.hpp"
#include "diachron/error.hpp"
#include "diachron/sgns.hpp"

namespace diachron {

namespace {

double heldout_lpos(const std::vector<Document>& docs, std::size_t window, const Matrix& U,
                    const Matrix& V) {
  SkipGramBatch batch;
  for (const auto& p : extract_pairs(docs, window)) batch.push(p.center, p.context, Label::positive);
  return sgns_log_likelihood(batch, U, V).positive_mean();
}

}  // namespace

SliceTrainResult train_slice(const std::vector<Document>& docs, const NoiseDistribution& noise,
                             const Matrix& initU, const Matrix& initV, const TrainConfig& config,
                             std::size_t slice_index, const std::vector<Document>* validation) {
  config.validate();
  if (!initU.same_shape(initV) || initU.cols() != config.dim)
    throw usage_error("train_slice: initial matrices do not match (L, d)");

  SliceTrainResult out;
  out.U = initU;
  out.V = initV;
  const SlicePairs pairs(docs, config.window);
  const std::size_t L = initU.rows();
  SparseRowGrad gU(L, config.dim), gV(L, config.dim);
  AdamState adamU = AdamState::like(out.U, "U[" + std::to_string(slice_index) + "]");
  AdamState adamV = AdamState::like(out.V, "V[" + std::to_string(slice_index) + "]");
  SkipGramBatch batch;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochBatches batches(pairs, noise, config.negative_ratio, config.batch_size,
                         derive_seed(config.seed, {slice_index, epoch, 0x15a}), slice_index);
    LogLikelihood epoch_ll;
    std::size_t b = 0;
    while (batches.next(batch)) {
      const auto ll = sgns_accumulate_gradients(batch, out.U, out.V, gU, gV);
      if (!std::isfinite(ll.total()))
        throw numerical_error("non-finite log-likelihood at slice " + std::to_string(slice_index) +
                              ", epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      epoch_ll += ll;
      adam_step(out.U, gU, adamU, config.learning_rate);
      adam_step(out.V, gV, adamV, config.learning_rate);
      gU.clear();
      gV.clear();
      ++b;
    }
    out.train_lpos.push_back(epoch_ll.positive_mean());
    if (validation) out.valid_lpos.push_back(heldout_lpos(*validation, config.window, out.U, out.V));
  }
  if (!out.U.all_finite() || !out.V.all_finite())
    throw numerical_error("non-finite embedding after training slice " +
                          std::to_string(slice_index));
  out.adamU = std::move(adamU);
  out.adamV = std::move(adamV);
  return out;
}

IsgModel train_incremental(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                           const Matrix& initU, const Matrix& initV, const TrainConfig& config,
                           Direction direction, const EpochObserver& observer) {
  const std::size_t T = corpus.num_slices();
  if (T < 1) throw usage_error("incremental training needs at least one slice");
  IsgModel model;
  model.U.resize(T);
  model.V.resize(T);
  model.train_lpos.resize(T);
  model.adamU.resize(T);
  model.adamV.resize(T);
  model.training_order = training_order(T, direction);

  const Matrix* prevU = &initU;
  const Matrix* prevV = &initV;
  for (std::size_t t : model.training_order) {
    SliceTrainResult r;
    try {
      r = train_slice(corpus.slices[t], noise, *prevU, *prevV, config, t);
    } catch (const Error& e) {
      throw Error(e.kind(), "ISG slice " + std::to_string(t) + ": " + e.what());
    }
    if (observer)
      for (std::size_t e = 0; e < r.train_lpos.size(); ++e) observer(t, e, r.train_lpos[e]);
    model.U[t] = std::move(r.U);
    model.V[t] = std::move(r.V);
    model.train_lpos[t] = std::move(r.train_lpos);
    model.adamU[t] = std::move(r.adamU);
    model.adamV[t] = std::move(r.adamV);
    prevU = &model.U[t];
    prevV = &model.V[t];
  }
  return model;
}

}  // namespace diachron
