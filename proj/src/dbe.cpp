#include "diachron/dbe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diachron/adam.hpp"
#include "diachron/error.hpp"
#include "diachron/kernels.hpp"
#include "diachron/sgns.hpp"

namespace diachron {

void DbeParams::validate() const {
  if (!(lambda > 0.0)) throw usage_error("DBE lambda must be > 0");
  if (!(lambda0 > 0.0)) throw usage_error("DBE lambda0 must be > 0");
}

double dbe_positional_logit(WordId center, std::span<const WordId> context, const Matrix& U_t,
                            const Matrix& V) {
  if (context.empty()) throw usage_error("dbe_positional_logit: empty context");
  std::vector<double> sum(V.cols(), 0.0);
  for (WordId j : context) kernels::axpy(1.0, V.row(j), sum);
  return kernels::dot(U_t.row(center), sum);
}

namespace {

void check_shapes(const std::vector<Matrix>& U, const Matrix& V) {
  if (U.empty()) throw usage_error("DBE needs at least one slice matrix");
  for (const auto& u : U)
    if (!u.same_shape(V)) throw usage_error("DBE: word and context matrices disagree in shape");
}

double squared_norm(std::span<const double> x) {
  return kernels::dot(x, x);
}

}  // namespace

double dbe_prior(const std::vector<Matrix>& U, const Matrix& V, const DbeParams& params) {
  check_shapes(U, V);
  double base = squared_norm(V.values()) + squared_norm(U[0].values());
  double drift = 0.0;
  for (std::size_t t = 1; t < U.size(); ++t)
    drift += kernels::squared_distance(U[t].values(), U[t - 1].values());
  return -0.5 * params.lambda0 * base - 0.5 * params.lambda * drift;
}

void add_dbe_prior_gradient(const std::vector<Matrix>& U, const Matrix& V,
                            const DbeParams& params, double scale, std::vector<Matrix>& gradU,
                            Matrix& gradV) {
  const std::size_t T = U.size();
  const double l0 = scale * params.lambda0;
  const double l = scale * params.lambda;
  auto gv = gradV.values();
  auto v = V.values();
  for (std::size_t k = 0; k < gv.size(); ++k) gv[k] -= l0 * v[k];
  for (std::size_t t = 0; t < T; ++t) {
    auto g = gradU[t].values();
    auto u = U[t].values();
    if (t == 0)
      for (std::size_t k = 0; k < g.size(); ++k) g[k] -= l0 * u[k];
    if (t >= 1) {
      auto prev = U[t - 1].values();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] -= l * (u[k] - prev[k]);
    }
    if (t + 1 < T) {
      auto next = U[t + 1].values();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += l * (next[k] - u[k]);
    }
  }
}

void DbeBatch::clear() {
  centers.clear();
  labels.clear();
  context_offsets.assign(1, 0);
  contexts.clear();
}

void DbeBatch::push(WordId center, std::span<const WordId> ctx, Label label) {
  centers.push_back(center);
  labels.push_back(label);
  contexts.insert(contexts.end(), ctx.begin(), ctx.end());
  context_offsets.push_back(contexts.size());
}

namespace {

void append_positions(const Document& doc, std::size_t window, DbeBatch& out) {
  const std::size_t n = doc.size();
  std::vector<WordId> ctx;
  for (std::size_t p = 0; p < n; ++p) {
    ctx.clear();
    const std::size_t lo = p >= window ? p - window : 0;
    const std::size_t hi = std::min(n - 1, p + window);
    for (std::size_t q = lo; q <= hi; ++q)
      if (q != p) ctx.push_back(doc[q]);
    if (!ctx.empty()) out.push(doc[p], ctx, Label::positive);
  }
}

// Data-term log-likelihood of a batch at slice batch.slice; when the gradient
// buffers are given, adds the gradient into them.
LogLikelihood batch_terms(const DbeBatch& batch, const Matrix& U_t, const Matrix& V,
                          Matrix* gradU_t, Matrix* gradV, std::vector<double>& ctx_sum) {
  const auto& k_ = kernels::active();
  const std::size_t d = V.cols();
  ctx_sum.resize(d);
  LogLikelihood ll;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    std::fill(ctx_sum.begin(), ctx_sum.end(), 0.0);
    const auto ctx = batch.context(k);
    for (WordId j : ctx) k_.axpy(1.0, V.row(j).data(), ctx_sum.data(), d);
    const WordId i = batch.centers[k];
    const auto u = U_t.row(i);
    const double s = k_.dot(u.data(), ctx_sum.data(), d);
    double coeff;
    if (batch.labels[k] == Label::positive) {
      ll.positive += log_sigmoid(s);
      ++ll.positive_pairs;
      coeff = sigmoid(-s);
    } else {
      ll.negative += log_sigmoid(-s);
      ++ll.negative_pairs;
      coeff = -sigmoid(s);
    }
    if (gradU_t) {
      k_.axpy(coeff, ctx_sum.data(), gradU_t->row(i).data(), d);
      for (WordId j : ctx) k_.axpy(coeff, u.data(), gradV->row(j).data(), d);
    }
  }
  return ll;
}

}  // namespace

DbeBatch dbe_positives(const std::vector<Document>& docs, std::size_t window, std::size_t slice) {
  if (window < 1) throw usage_error("context window must be >= 1");
  DbeBatch out;
  out.slice = slice;
  for (const auto& d : docs) append_positions(d, window, out);
  return out;
}

DbeLoss dbe_loss(const std::vector<DbeBatch>& batches, const std::vector<Matrix>& U,
                 const Matrix& V, const DbeParams& params) {
  check_shapes(U, V);
  DbeLoss loss;
  std::vector<double> scratch;
  for (const auto& b : batches) {
    if (b.slice >= U.size()) throw usage_error("DBE batch refers to a missing slice");
    const auto ll = batch_terms(b, U[b.slice], V, nullptr, nullptr, scratch);
    loss.positive += ll.positive;
    loss.negative += ll.negative;
    loss.positive_examples += ll.positive_pairs;
    loss.negative_examples += ll.negative_pairs;
  }
  loss.prior = dbe_prior(U, V, params);
  return loss;
}

DbeGradients dbe_gradients(const std::vector<DbeBatch>& batches, const std::vector<Matrix>& U,
                           const Matrix& V, const DbeParams& params) {
  check_shapes(U, V);
  DbeGradients g;
  for (const auto& u : U) g.dU.emplace_back(u.rows(), u.cols());
  g.dV = Matrix(V.rows(), V.cols());
  std::vector<double> scratch;
  for (const auto& b : batches) {
    if (b.slice >= U.size()) throw usage_error("DBE batch refers to a missing slice");
    batch_terms(b, U[b.slice], V, &g.dU[b.slice], &g.dV, scratch);
  }
  add_dbe_prior_gradient(U, V, params, 1.0, g.dU, g.dV);
  return g;
}

// ------------------------------------------------------------------ training

namespace {

struct SlicePositions {
  DbeBatch positives;
  std::vector<std::size_t> doc_offsets{0};  // example ranges per document
};

SlicePositions build_positions(const std::vector<Document>& docs, std::size_t window,
                               std::size_t slice) {
  SlicePositions sp;
  sp.positives.slice = slice;
  for (const auto& d : docs) {
    append_positions(d, window, sp.positives);
    sp.doc_offsets.push_back(sp.positives.size());
  }
  return sp;
}

// Streams the mini-batches of one slice for one epoch.
class DbeEpochStream {
 public:
  DbeEpochStream(const SlicePositions& sp, const NoiseDistribution& noise, std::size_t ratio,
                 std::size_t batch_size, std::uint64_t seed)
      : sp_(&sp), noise_(&noise), ratio_(ratio), batch_size_(batch_size), rng_(seed),
        order_(sp.doc_offsets.size() - 1) {
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  bool next(DbeBatch& batch) {
    batch.clear();
    batch.slice = sp_->positives.slice;
    while (doc_ < order_.size() && batch.size() < batch_size_) {
      const std::size_t begin = sp_->doc_offsets[order_[doc_]];
      const std::size_t end = sp_->doc_offsets[order_[doc_] + 1];
      while (begin + pos_ < end && batch.size() < batch_size_) {
        const std::size_t k = begin + pos_++;
        const auto ctx = sp_->positives.context(k);
        batch.push(sp_->positives.centers[k], ctx, Label::positive);
        for (std::size_t r = 0; r < ratio_; ++r) batch.push(noise_->sample(rng_), ctx, Label::negative);
      }
      if (begin + pos_ >= end) {
        ++doc_;
        pos_ = 0;
      }
    }
    return batch.size() > 0;
  }

 private:
  const SlicePositions* sp_;
  const NoiseDistribution* noise_;
  std::size_t ratio_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t doc_ = 0;
  std::size_t pos_ = 0;
};

double mean_drift_all(const std::vector<Matrix>& U) {
  if (U.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 1; t < U.size(); ++t) sum += mean_drift(U[t], U[0]);
  return sum / static_cast<double>(U.size() - 1);
}

}  // namespace

DbeTrainResult train_dbe(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                         const std::vector<Matrix>& initU, const Matrix& initV,
                         const DbeParams& params, const TrainConfig& config, const RegConfig& reg,
                         const EpochObserver& observer) {
  params.validate();
  config.validate();
  reg.validate();
  const std::size_t T = corpus.num_slices();
  if (T < 1) throw usage_error("DBE training needs at least one slice");
  if (initU.size() != T) throw usage_error("DBE: need one initial word matrix per slice");
  check_shapes(initU, initV);
  if (initV.cols() != config.dim) throw usage_error("DBE: initial matrices do not match d");

  DbeTrainResult out;
  out.model.U = initU;
  out.model.V = initV;
  out.train_lpos.resize(T);
  auto& U = out.model.U;
  auto& V = out.model.V;

  std::vector<SlicePositions> positions;
  std::size_t epoch_examples = 0;
  for (std::size_t t = 0; t < T; ++t) {
    positions.push_back(build_positions(corpus.slices[t], config.window, t));
    epoch_examples += positions.back().positives.size() * (config.negative_ratio + 1);
  }

  std::vector<Matrix> gU;
  std::vector<AdamState> adamU;
  for (std::size_t t = 0; t < T; ++t) {
    gU.emplace_back(V.rows(), V.cols());
    adamU.push_back(AdamState::like(V, "U[" + std::to_string(t) + "]"));
  }
  Matrix gV(V.rows(), V.cols());
  AdamState adamV = AdamState::like(V, "V");
  const bool use_reg = reg.active() && T > 1;
  std::vector<double> scratch;
  DbeBatch batch;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<DbeEpochStream> streams;
    for (std::size_t t = 0; t < T; ++t)
      streams.emplace_back(positions[t], noise, config.negative_ratio, config.batch_size,
                           derive_seed(config.seed, {t, epoch, 0xdbe}));
    double beta = reg.beta;
    if (use_reg) {
      if (reg.beta_is_mean) beta = mean_drift_all(U);
      out.reg_beta.push_back(beta);
    }
    const Matrix U0_snapshot = use_reg ? U[0] : Matrix();

    DbeLoss loss;
    std::vector<LogLikelihood> slice_ll(T);
    std::vector<bool> done(T, false);
    std::size_t remaining = T;
    std::size_t b = 0;
    auto step = [&](double frac) {
      add_dbe_prior_gradient(U, V, params, frac, gU, gV);
      if (use_reg)
        for (std::size_t t = 1; t < T; ++t)
          add_drift_regularizer_gradient(U[t], U0_snapshot, reg.alpha, beta, -frac, gU[t]);
      for (std::size_t t = 0; t < T; ++t) {
        adam_step(U[t], gU[t], adamU[t], config.learning_rate);
        gU[t].fill(0.0);
      }
      adam_step(V, gV, adamV, config.learning_rate);
      gV.fill(0.0);
    };
    while (remaining > 0) {
      for (std::size_t t = 0; t < T; ++t) {
        if (done[t]) continue;
        if (!streams[t].next(batch)) {
          done[t] = true;
          --remaining;
          continue;
        }
        const auto ll = batch_terms(batch, U[t], V, &gU[t], &gV, scratch);
        if (!std::isfinite(ll.total()))
          throw numerical_error("DBE: non-finite loss at slice " + std::to_string(t) +
                                ", epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(b));
        slice_ll[t] += ll;
        step(prior_fraction(batch.size(), epoch_examples));
        ++b;
      }
    }
    if (epoch_examples == 0) step(1.0);

    for (std::size_t t = 0; t < T; ++t) {
      loss.positive += slice_ll[t].positive;
      loss.negative += slice_ll[t].negative;
      loss.positive_examples += slice_ll[t].positive_pairs;
      loss.negative_examples += slice_ll[t].negative_pairs;
      out.train_lpos[t].push_back(slice_ll[t].positive_mean());
      if (observer) observer(t, epoch, slice_ll[t].positive_mean());
    }
    loss.prior = dbe_prior(U, V, params);
    if (use_reg)
      for (std::size_t t = 1; t < T; ++t)
        loss.regularizer += drift_regularizer(U[t], U[0], reg.alpha, beta);
    if (!std::isfinite(loss.total()))
      throw numerical_error("DBE: non-finite objective after epoch " + std::to_string(epoch));
    out.epoch_loss.push_back(loss);
  }
  out.optimizer = std::move(adamU);
  out.optimizer.push_back(std::move(adamV));
  return out;
}

}  // namespace diachron
