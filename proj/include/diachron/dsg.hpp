#pragma once

// Dynamic filtering of a Bayesian skip-gram. Every slice carries a mean-field
// Gaussian posterior over U and V; the next slice's prior is the previous
// posterior mean diffused with variance D, multiplied by a zero-mean anchor
// N(0, D0). Each slice maximizes its ELBO with Adam on (mean, log-variance).

#include <vector>

#include "diachron/adam.hpp"
#include "diachron/corpus.hpp"
#include "diachron/drift_reg.hpp"
#include "diachron/matrix.hpp"
#include "diachron/train_config.hpp"

namespace diachron {

struct DsgParams {
  double diffusion = 1.0;       // D
  double prior_variance = 0.1;  // D0
  std::size_t samples_per_step = 1;
  // The default entropy term is the plain sum of variances; this switches to
  // the Gaussian entropy 1/2 sum log(2 pi e s^2).
  bool exact_entropy = false;

  void validate() const;
};

// N(prev_mean, D) * N(0, D0), renormalized, entrywise:
// variance 1/(1/D + 1/D0), mean prev_mean * (1/D) * variance.
GaussianMatrix combine_priors(const Matrix& prev_mean, double D, double D0);
// N(0, D0) for the first trained slice.
GaussianMatrix anchor_prior(std::size_t rows, std::size_t cols, double D0);

struct DsgElbo {
  double likelihood = 0.0;
  double log_prior = 0.0;
  double entropy = 0.0;
  double total() const noexcept { return likelihood + log_prior + entropy; }
};

// Closed form sum over entries of E_q[log N(x; m, s_p^2)].
double dsg_log_prior(const GaussianMatrix& q, const GaussianMatrix& prior);
double dsg_entropy(const GaussianMatrix& q, bool exact);

// SGNS log-likelihood at U = mean + sqrt(var) * eps (same for V).
double dsg_likelihood_term(const SkipGramBatch& batch, const GaussianMatrix& qU,
                           const GaussianMatrix& qV, const Matrix& epsU, const Matrix& epsV);

struct DsgLikelihoodGradients {
  Matrix dMeanU, dMeanV;
  Matrix dLogVarU, dLogVarV;  // w.r.t. log-variance
};

// Reparameterized gradient of dsg_likelihood_term for fixed noise.
DsgLikelihoodGradients dsg_likelihood_gradients(const SkipGramBatch& batch,
                                                const GaussianMatrix& qU, const GaussianMatrix& qV,
                                                const Matrix& epsU, const Matrix& epsV);

// Likelihood estimated from params.samples_per_step draws seeded by `seed`.
DsgElbo dsg_elbo(const SkipGramBatch& batch, const GaussianMatrix& qU, const GaussianMatrix& qV,
                 const GaussianMatrix& priorU, const GaussianMatrix& priorV,
                 const DsgParams& params, std::uint64_t seed);

struct DsgSliceResult {
  GaussianMatrix U;
  GaussianMatrix V;
  std::vector<double> elbo;        // per epoch
  std::vector<double> train_lpos;  // per epoch, sampled, mean per positive pair
  std::vector<double> reg_beta;    // per epoch, when regularized
  // Final optimizer state: U mean, U log-variance, V mean, V log-variance.
  std::vector<AdamState> optimizer;
};

// Optimizes one slice's ELBO from an explicit prior and starting point.
// `reg_ref` (may be null) is the reference mean for the drift penalty on U.
DsgSliceResult dsg_optimize_slice(const std::vector<Document>& docs, const NoiseDistribution& noise,
                                  const GaussianMatrix& priorU, const GaussianMatrix& priorV,
                                  const GaussianMatrix& initU, const GaussianMatrix& initV,
                                  const DsgParams& params, const TrainConfig& config,
                                  std::size_t slice_index, const RegConfig& reg = {},
                                  const Matrix* reg_ref = nullptr);

// One filtering step: prior from the previous posterior, q started at it.
DsgSliceResult dsg_filter_step(const std::vector<Document>& docs, const NoiseDistribution& noise,
                               const GaussianMatrix& prevU, const GaussianMatrix& prevV,
                               const DsgParams& params, const TrainConfig& config,
                               std::size_t slice_index, const RegConfig& reg = {},
                               const Matrix* reg_ref = nullptr);

struct DsgModel {
  std::vector<GaussianMatrix> U;
  std::vector<GaussianMatrix> V;
  std::vector<std::size_t> training_order;
  std::vector<std::vector<double>> elbo;
  std::vector<std::vector<double>> train_lpos;
  std::vector<std::vector<double>> reg_beta;
  std::vector<std::vector<AdamState>> optimizer;
};

// The first trained slice uses the anchor prior N(0, D0) with q started at
// `init`; every later slice is a filter step from its predecessor. The drift
// penalty, when enabled, is measured against the first trained slice.
DsgModel train_dsg(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                   const GaussianMatrix& initU, const GaussianMatrix& initV,
                   const DsgParams& params, const TrainConfig& config, Direction direction,
                   const RegConfig& reg = {}, const EpochObserver& observer = {});

}  // namespace diachron
