#include "diachron/dsg.hpp"

#include <cmath>
#include <numbers>

#include "diachron/adam.hpp"
#include "diachron/error.hpp"
#include "diachron/kernels.hpp"
#include "diachron/sgns.hpp"

namespace diachron {

void DsgParams::validate() const {
  if (!(diffusion > 0.0)) throw usage_error("diffusion constant D must be > 0");
  if (!(prior_variance > 0.0)) throw usage_error("prior variance D0 must be > 0");
  if (samples_per_step < 1) throw usage_error("samples per step must be >= 1");
}

GaussianMatrix combine_priors(const Matrix& prev_mean, double D, double D0) {
  if (!(D > 0.0) || !(D0 > 0.0)) throw usage_error("combine_priors: D and D0 must be > 0");
  const double precision = 1.0 / D + 1.0 / D0;
  const double variance = 1.0 / precision;
  const double shrink = (1.0 / D) / precision;
  GaussianMatrix out{Matrix(prev_mean.rows(), prev_mean.cols()),
                     Matrix(prev_mean.rows(), prev_mean.cols(), variance)};
  auto src = prev_mean.values();
  auto dst = out.mean.values();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] * shrink;
  return out;
}

GaussianMatrix anchor_prior(std::size_t rows, std::size_t cols, double D0) {
  if (!(D0 > 0.0)) throw usage_error("anchor prior variance must be > 0");
  return {Matrix(rows, cols), Matrix(rows, cols, D0)};
}

namespace {

void check_gaussian(const GaussianMatrix& q, const char* what) {
  if (!q.mean.same_shape(q.variance)) throw usage_error(std::string(what) + ": shape mismatch");
  for (double s : q.variance.values())
    if (!(s > 0.0)) throw numerical_error(std::string(what) + ": nonpositive variance");
}

Matrix sample_matrix(const GaussianMatrix& q, const Matrix& eps) {
  Matrix out(q.mean.rows(), q.mean.cols());
  auto m = q.mean.values();
  auto s = q.variance.values();
  auto e = eps.values();
  auto o = out.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = m[k] + std::sqrt(s[k]) * e[k];
  return out;
}

}  // namespace

double dsg_log_prior(const GaussianMatrix& q, const GaussianMatrix& prior) {
  check_gaussian(q, "dsg_log_prior q");
  check_gaussian(prior, "dsg_log_prior prior");
  if (!q.mean.same_shape(prior.mean)) throw usage_error("dsg_log_prior: shape mismatch");
  const double log2pi = std::log(2.0 * std::numbers::pi);
  auto mq = q.mean.values();
  auto sq = q.variance.values();
  auto mp = prior.mean.values();
  auto sp = prior.variance.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < mq.size(); ++k) {
    const double diff = mq[k] - mp[k];
    sum += -0.5 * (log2pi + std::log(sp[k])) - (diff * diff + sq[k]) / (2.0 * sp[k]);
  }
  return sum;
}

double dsg_entropy(const GaussianMatrix& q, bool exact) {
  check_gaussian(q, "dsg_entropy");
  double sum = 0.0;
  if (exact) {
    const double c = std::log(2.0 * std::numbers::pi * std::numbers::e);
    for (double s : q.variance.values()) sum += 0.5 * (c + std::log(s));
  } else {
    for (double s : q.variance.values()) sum += s;
  }
  return sum;
}

double dsg_likelihood_term(const SkipGramBatch& batch, const GaussianMatrix& qU,
                           const GaussianMatrix& qV, const Matrix& epsU, const Matrix& epsV) {
  check_gaussian(qU, "dsg qU");
  check_gaussian(qV, "dsg qV");
  return sgns_log_likelihood(batch, sample_matrix(qU, epsU), sample_matrix(qV, epsV)).total();
}

DsgLikelihoodGradients dsg_likelihood_gradients(const SkipGramBatch& batch,
                                                const GaussianMatrix& qU, const GaussianMatrix& qV,
                                                const Matrix& epsU, const Matrix& epsV) {
  check_gaussian(qU, "dsg qU");
  check_gaussian(qV, "dsg qV");
  const Matrix U = sample_matrix(qU, epsU);
  const Matrix V = sample_matrix(qV, epsV);
  auto g = sgns_gradients(batch, U, V);
  DsgLikelihoodGradients out{g.dU, g.dV, Matrix(U.rows(), U.cols()), Matrix(V.rows(), V.cols())};
  // dU/d(log var) = 1/2 sqrt(var) eps
  auto fold = [](const Matrix& dx, const GaussianMatrix& q, const Matrix& eps, Matrix& dlv) {
    auto a = dx.values();
    auto s = q.variance.values();
    auto e = eps.values();
    auto o = dlv.values();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = a[k] * 0.5 * std::sqrt(s[k]) * e[k];
  };
  fold(g.dU, qU, epsU, out.dLogVarU);
  fold(g.dV, qV, epsV, out.dLogVarV);
  return out;
}

DsgElbo dsg_elbo(const SkipGramBatch& batch, const GaussianMatrix& qU, const GaussianMatrix& qV,
                 const GaussianMatrix& priorU, const GaussianMatrix& priorV,
                 const DsgParams& params, std::uint64_t seed) {
  params.validate();
  DsgElbo e;
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix epsU(qU.mean.rows(), qU.mean.cols());
  Matrix epsV(qV.mean.rows(), qV.mean.cols());
  for (std::size_t s = 0; s < params.samples_per_step; ++s) {
    for (double& x : epsU.values()) x = normal(rng);
    for (double& x : epsV.values()) x = normal(rng);
    e.likelihood += dsg_likelihood_term(batch, qU, qV, epsU, epsV);
  }
  e.likelihood /= static_cast<double>(params.samples_per_step);
  e.log_prior = dsg_log_prior(qU, priorU) + dsg_log_prior(qV, priorV);
  e.entropy = dsg_entropy(qU, params.exact_entropy) + dsg_entropy(qV, params.exact_entropy);
  return e;
}

// ------------------------------------------------------------------ training

namespace {

// Variational parameters of one matrix: mean and log-variance, with their
// optimizer state and scratch buffers for sampling.
struct VariationalBlock {
  Matrix mean;
  Matrix log_var;
  AdamState adam_mean;
  AdamState adam_log_var;
  SparseRowGrad grad_mean;
  SparseRowGrad grad_log_var;
  Matrix sample;  // rows valid only where touched in the current batch
  Matrix eps;
  SparseRowGrad grad_sample;
  std::vector<std::uint8_t> mark;
  std::vector<WordId> rows;

  VariationalBlock(const GaussianMatrix& init, const std::string& name)
      : mean(init.mean),
        log_var(init.variance.rows(), init.variance.cols()),
        adam_mean(AdamState::like(init.mean, name + ".mean")),
        adam_log_var(AdamState::like(init.mean, name + ".logvar")),
        grad_mean(init.mean.rows(), init.mean.cols()),
        grad_log_var(init.mean.rows(), init.mean.cols()),
        sample(init.mean.rows(), init.mean.cols()),
        eps(init.mean.rows(), init.mean.cols()),
        grad_sample(init.mean.rows(), init.mean.cols()),
        mark(init.mean.rows(), 0) {
    auto s = init.variance.values();
    auto lv = log_var.values();
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!(s[k] > 0.0)) throw numerical_error("DSG initial variance must be > 0");
      lv[k] = std::log(s[k]);
    }
  }

  void mark_row(WordId i) {
    if (!mark[i]) {
      mark[i] = 1;
      rows.push_back(i);
    }
  }
  void clear_marks() {
    for (WordId i : rows) mark[i] = 0;
    rows.clear();
  }

  void draw(Rng& rng, std::normal_distribution<double>& normal) {
    const std::size_t d = mean.cols();
    for (WordId i : rows) {
      auto e = eps.row(i);
      auto m = mean.row(i);
      auto lv = log_var.row(i);
      auto x = sample.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        e[j] = normal(rng);
        x[j] = m[j] + std::exp(0.5 * lv[j]) * e[j];
      }
    }
  }

  // Moves the sampled-point gradient onto (mean, log-variance).
  void fold_sample_gradient() {
    const std::size_t d = mean.cols();
    const auto& k = kernels::active();
    for (WordId i : grad_sample.touched()) {
      auto gs = grad_sample.dense().row(i);
      k.axpy(1.0, gs.data(), grad_mean.row(i).data(), d);
      auto glv = grad_log_var.row(i);
      auto e = eps.row(i);
      auto lv = log_var.row(i);
      for (std::size_t j = 0; j < d; ++j) glv[j] += gs[j] * 0.5 * std::exp(0.5 * lv[j]) * e[j];
    }
    grad_sample.clear();
  }

  // scale * gradient of (log prior + entropy), every entry.
  void add_prior_entropy_gradient(const GaussianMatrix& prior, bool exact, double scale) {
    grad_mean.touch_all();
    grad_log_var.touch_all();
    auto gm = grad_mean.dense().values();
    auto glv = grad_log_var.dense().values();
    auto m = mean.values();
    auto lv = log_var.values();
    auto pm = prior.mean.values();
    auto ps = prior.variance.values();
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double s = std::exp(lv[k]);
      gm[k] += scale * (-(m[k] - pm[k]) / ps[k]);
      glv[k] += scale * (-s / (2.0 * ps[k]) + (exact ? 0.5 : s));
    }
  }

  void step(double lr) {
    adam_step(mean, grad_mean, adam_mean, lr);
    adam_step(log_var, grad_log_var, adam_log_var, lr);
    grad_mean.clear();
    grad_log_var.clear();
  }

  GaussianMatrix posterior() const {
    GaussianMatrix g{mean, Matrix(log_var.rows(), log_var.cols())};
    auto lv = log_var.values();
    auto s = g.variance.values();
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::exp(lv[k]);
    return g;
  }
};

}  // namespace

DsgSliceResult dsg_optimize_slice(const std::vector<Document>& docs, const NoiseDistribution& noise,
                                  const GaussianMatrix& priorU, const GaussianMatrix& priorV,
                                  const GaussianMatrix& initU, const GaussianMatrix& initV,
                                  const DsgParams& params, const TrainConfig& config,
                                  std::size_t slice_index, const RegConfig& reg,
                                  const Matrix* reg_ref) {
  params.validate();
  config.validate();
  reg.validate();
  check_gaussian(priorU, "DSG prior U");
  check_gaussian(priorV, "DSG prior V");
  if (!initU.mean.same_shape(priorU.mean) || !initV.mean.same_shape(priorV.mean) ||
      initU.mean.cols() != config.dim)
    throw usage_error("DSG: prior and initial posterior shapes disagree");

  const std::string tag = "[" + std::to_string(slice_index) + "]";
  VariationalBlock U(initU, "U" + tag);
  VariationalBlock V(initV, "V" + tag);
  const SlicePairs pairs(docs, config.window);
  const bool use_reg = reg.active() && reg_ref != nullptr;
  const double inv_samples = 1.0 / static_cast<double>(params.samples_per_step);

  DsgSliceResult out;
  SkipGramBatch batch;
  std::normal_distribution<double> normal;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(config.seed, {slice_index, epoch, 0xd59});
    EpochBatches batches(pairs, noise, config.negative_ratio, config.batch_size, epoch_seed,
                         slice_index);
    Rng rng(derive_seed(epoch_seed, {1}));
    // An empty slice still takes one step per epoch on the prior and entropy.
    const double total = std::max<std::size_t>(batches.total_examples(), 1);
    double beta = reg.beta;
    if (use_reg) {
      if (reg.beta_is_mean) beta = mean_drift(U.mean, *reg_ref);
      out.reg_beta.push_back(beta);
    }

    LogLikelihood epoch_ll;
    std::size_t b = 0;
    bool has_batch = batches.next(batch);
    if (!has_batch) batch.clear();
    do {
      const double frac = has_batch ? static_cast<double>(batch.size()) / total : 1.0;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        U.mark_row(batch.center_ids[k]);
        V.mark_row(batch.context_ids[k]);
      }
      for (std::size_t s = 0; s < params.samples_per_step; ++s) {
        U.draw(rng, normal);
        V.draw(rng, normal);
        auto ll = sgns_accumulate_gradients(batch, U.sample, V.sample, U.grad_sample,
                                            V.grad_sample, inv_samples);
        if (!std::isfinite(ll.total()))
          throw numerical_error("non-finite ELBO at slice " + std::to_string(slice_index) +
                                ", epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(b));
        if (s == 0) epoch_ll += ll;
        U.fold_sample_gradient();
        V.fold_sample_gradient();
      }
      U.clear_marks();
      V.clear_marks();
      U.add_prior_entropy_gradient(priorU, params.exact_entropy, frac);
      V.add_prior_entropy_gradient(priorV, params.exact_entropy, frac);
      if (use_reg)
        add_drift_regularizer_gradient(U.mean, *reg_ref, reg.alpha, beta, -frac,
                                       U.grad_mean.dense());
      U.step(config.learning_rate);
      V.step(config.learning_rate);
      ++b;
    } while (has_batch && (has_batch = batches.next(batch)));

    const auto qU = U.posterior();
    const auto qV = V.posterior();
    double elbo = epoch_ll.total() + dsg_log_prior(qU, priorU) + dsg_log_prior(qV, priorV) +
                  dsg_entropy(qU, params.exact_entropy) + dsg_entropy(qV, params.exact_entropy);
    if (use_reg) elbo -= drift_regularizer(qU.mean, *reg_ref, reg.alpha, beta);
    if (!std::isfinite(elbo))
      throw numerical_error("non-finite ELBO at slice " + std::to_string(slice_index) +
                            ", epoch " + std::to_string(epoch));
    out.elbo.push_back(elbo);
    out.train_lpos.push_back(epoch_ll.positive_mean());
  }
  out.U = U.posterior();
  out.V = V.posterior();
  out.optimizer = {std::move(U.adam_mean), std::move(U.adam_log_var), std::move(V.adam_mean),
                   std::move(V.adam_log_var)};
  return out;
}

DsgSliceResult dsg_filter_step(const std::vector<Document>& docs, const NoiseDistribution& noise,
                               const GaussianMatrix& prevU, const GaussianMatrix& prevV,
                               const DsgParams& params, const TrainConfig& config,
                               std::size_t slice_index, const RegConfig& reg,
                               const Matrix* reg_ref) {
  params.validate();
  const auto priorU = combine_priors(prevU.mean, params.diffusion, params.prior_variance);
  const auto priorV = combine_priors(prevV.mean, params.diffusion, params.prior_variance);
  return dsg_optimize_slice(docs, noise, priorU, priorV, priorU, priorV, params, config,
                            slice_index, reg, reg_ref);
}

DsgModel train_dsg(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                   const GaussianMatrix& initU, const GaussianMatrix& initV,
                   const DsgParams& params, const TrainConfig& config, Direction direction,
                   const RegConfig& reg, const EpochObserver& observer) {
  const std::size_t T = corpus.num_slices();
  if (T < 1) throw usage_error("DSG training needs at least one slice");
  params.validate();
  DsgModel model;
  model.U.resize(T);
  model.V.resize(T);
  model.elbo.resize(T);
  model.train_lpos.resize(T);
  model.reg_beta.resize(T);
  model.optimizer.resize(T);
  model.training_order = training_order(T, direction);

  const Matrix* ref = nullptr;
  const GaussianMatrix* prevU = nullptr;
  const GaussianMatrix* prevV = nullptr;
  for (std::size_t t : model.training_order) {
    DsgSliceResult r;
    try {
      if (!prevU) {
        const auto anchor = anchor_prior(initU.mean.rows(), initU.mean.cols(),
                                         params.prior_variance);
        r = dsg_optimize_slice(corpus.slices[t], noise, anchor, anchor, initU, initV, params,
                               config, t);
      } else {
        r = dsg_filter_step(corpus.slices[t], noise, *prevU, *prevV, params, config, t, reg, ref);
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "DSG slice " + std::to_string(t) + ": " + e.what());
    }
    if (observer)
      for (std::size_t e = 0; e < r.train_lpos.size(); ++e) observer(t, e, r.train_lpos[e]);
    model.U[t] = std::move(r.U);
    model.V[t] = std::move(r.V);
    model.elbo[t] = std::move(r.elbo);
    model.train_lpos[t] = std::move(r.train_lpos);
    model.reg_beta[t] = std::move(r.reg_beta);
    model.optimizer[t] = std::move(r.optimizer);
    prevU = &model.U[t];
    prevV = &model.V[t];
    if (!ref) ref = &model.U[t].mean;
  }
  return model;
}

}  // namespace diachron
