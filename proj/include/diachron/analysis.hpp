#pragma once

// Drift between slices, superimposed drift histograms, directedness and
// stability diagnostics, and held-out positive log-likelihood.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "diachron/corpus.hpp"
#include "diachron/matrix.hpp"
#include "diachron/train_config.hpp"

namespace diachron {

// ||u_{i,t} - u_{i,t0}||_2 per word.
std::vector<double> compute_drift(const Matrix& U_t, const Matrix& U_t0);
// Root of the summed squared differences over all words (one scalar).
double drift_total(const Matrix& U_t, const Matrix& U_t0);

struct DriftSeries {
  std::size_t reference_slice = 0;
  ModelKind model = ModelKind::isg;
  Matrix values;  // [word][slice]; column reference_slice is zero

  std::size_t num_words() const noexcept { return values.rows(); }
  std::size_t num_slices() const noexcept { return values.cols(); }
  double at(WordId word, std::size_t t) const { return values(word, t); }
  // Slices after the reference, in calendar order.
  std::vector<std::size_t> target_slices() const;
  double mean_at(std::size_t t) const;
  // Series restricted to one word (for per-word directedness).
  DriftSeries for_word(WordId word) const;
};

DriftSeries make_drift_series(const std::vector<Matrix>& U, std::size_t reference_slice,
                              ModelKind model);

struct HistogramExport {
  std::vector<double> edges;                     // bins + 1, shared across slices
  std::vector<std::size_t> slices;               // target slices
  std::vector<std::vector<std::size_t>> counts;  // [slice index][bin]
  bool log_scale = true;                         // counts meant for a log axis
};

// Shared edges from the global min/max over target slices; the last bin is
// closed on the right.
HistogramExport drift_histogram(const DriftSeries& series, std::size_t bins = 60);

// Kendall rank correlation between slice order and the given values, ties
// counting as neither concordant nor discordant.
double kendall_directedness(std::span<const double> values);
// Directedness of the per-slice mean drift over target slices.
double directedness(const DriftSeries& series);

// Fraction of words whose drift at target_t is below
// threshold_fraction * mean drift at target_t.
double stability_fraction(const DriftSeries& series, std::size_t target_t,
                          double threshold_fraction);

// `word,t,drift` rows for every (word, slice).
void write_drift_csv(std::ostream& out, const DriftSeries& series,
                     const std::vector<std::string>& words);
// `bin_lo,bin_hi,t,count` rows.
void write_histogram_csv(std::ostream& out, const HistogramExport& hist);

struct LposReport {
  std::vector<double> per_pair;       // mean log s(score) per held-out positive pair
  std::vector<double> sum;            // raw sum per slice
  std::vector<std::size_t> pairs;     // positive pairs (or DBE positions) per slice
  std::vector<std::size_t> tokens;    // held-out tokens per slice
  double mean = 0.0;                  // mean of per_pair over slices with data

  double per_token(std::size_t t) const {
    return tokens[t] ? sum[t] / static_cast<double>(tokens[t]) : 0.0;
  }
};

// SGNS score u_{i,t} . v_{j,t} (ISG, or DSG posterior means).
LposReport evaluate_lpos_sgns(const TimeSlicedCorpus& split, const std::vector<Matrix>& U,
                              const std::vector<Matrix>& V, std::size_t window);
// Context-sum logit u_{i,t} . sum_j v_j (DBE).
LposReport evaluate_lpos_dbe(const TimeSlicedCorpus& split, const std::vector<Matrix>& U,
                             const Matrix& V, std::size_t window);

// Plain-text table, one row per slice plus a mean row, 4 decimals.
void write_lpos_report(std::ostream& out, const LposReport& report, ModelKind model,
                       Split split);

}  // namespace diachron
