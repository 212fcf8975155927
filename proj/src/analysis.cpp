#include "diachron/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "diachron/dbe.hpp"
#include "diachron/error.hpp"
#include "diachron/kernels.hpp"
#include "diachron/sgns.hpp"

namespace diachron {

std::vector<double> compute_drift(const Matrix& U_t, const Matrix& U_t0) {
  if (!U_t.same_shape(U_t0)) throw usage_error("compute_drift: shape mismatch");
  std::vector<double> out(U_t.rows());
  for (std::size_t i = 0; i < U_t.rows(); ++i)
    out[i] = std::sqrt(kernels::squared_distance(U_t.row(i), U_t0.row(i)));
  return out;
}

double drift_total(const Matrix& U_t, const Matrix& U_t0) {
  if (!U_t.same_shape(U_t0)) throw usage_error("drift_total: shape mismatch");
  return std::sqrt(kernels::squared_distance(U_t.values(), U_t0.values()));
}

std::vector<std::size_t> DriftSeries::target_slices() const {
  std::vector<std::size_t> out;
  for (std::size_t t = reference_slice + 1; t < num_slices(); ++t) out.push_back(t);
  return out;
}

double DriftSeries::mean_at(std::size_t t) const {
  if (num_words() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < num_words(); ++i) s += values(i, t);
  return s / static_cast<double>(num_words());
}

DriftSeries DriftSeries::for_word(WordId word) const {
  DriftSeries out{reference_slice, model, Matrix(1, num_slices())};
  for (std::size_t t = 0; t < num_slices(); ++t) out.values(0, t) = values(word, t);
  return out;
}

DriftSeries make_drift_series(const std::vector<Matrix>& U, std::size_t reference_slice,
                              ModelKind model) {
  if (reference_slice >= U.size()) throw usage_error("drift reference slice out of range");
  DriftSeries s{reference_slice, model, Matrix(U[0].rows(), U.size())};
  for (std::size_t t = 0; t < U.size(); ++t) {
    if (t == reference_slice) continue;
    const auto d = compute_drift(U[t], U[reference_slice]);
    for (std::size_t i = 0; i < d.size(); ++i) s.values(i, t) = d[i];
  }
  return s;
}

HistogramExport drift_histogram(const DriftSeries& series, std::size_t bins) {
  if (bins < 1) throw usage_error("histogram needs at least one bin");
  HistogramExport h;
  h.slices = series.target_slices();
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (std::size_t t : h.slices)
    for (std::size_t i = 0; i < series.num_words(); ++i) {
      const double x = series.at(static_cast<WordId>(i), t);
      if (first) {
        lo = hi = x;
        first = false;
      }
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (!(hi > lo)) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  for (std::size_t t : h.slices) {
    std::vector<std::size_t> c(bins, 0);
    for (std::size_t i = 0; i < series.num_words(); ++i) {
      const double x = series.at(static_cast<WordId>(i), t);
      auto b = static_cast<std::size_t>((x - lo) / width);
      ++c[std::min(b, bins - 1)];
    }
    h.counts.push_back(std::move(c));
  }
  return h;
}

double kendall_directedness(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw usage_error("directedness needs at least two target slices");
  long concordant = 0, discordant = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (values[b] > values[a]) ++concordant;
      else if (values[b] < values[a]) ++discordant;
    }
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  return static_cast<double>(concordant - discordant) / pairs;
}

double directedness(const DriftSeries& series) {
  std::vector<double> means;
  for (std::size_t t : series.target_slices()) means.push_back(series.mean_at(t));
  return kendall_directedness(means);
}

double stability_fraction(const DriftSeries& series, std::size_t target_t,
                          double threshold_fraction) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
    throw usage_error("stability threshold fraction must lie in (0,1)");
  if (target_t >= series.num_slices()) throw usage_error("stability target slice out of range");
  if (series.num_words() == 0) return 0.0;
  const double cut = threshold_fraction * series.mean_at(target_t);
  std::size_t n = 0;
  for (std::size_t i = 0; i < series.num_words(); ++i)
    if (series.at(static_cast<WordId>(i), target_t) < cut) ++n;
  return static_cast<double>(n) / static_cast<double>(series.num_words());
}

void write_drift_csv(std::ostream& out, const DriftSeries& series,
                     const std::vector<std::string>& words) {
  if (words.size() != series.num_words()) throw usage_error("drift CSV: word list mismatch");
  out << "word,t,drift\n";
  char buf[64];
  for (std::size_t i = 0; i < series.num_words(); ++i)
    for (std::size_t t = 0; t < series.num_slices(); ++t) {
      std::snprintf(buf, sizeof buf, "%.9g", series.at(static_cast<WordId>(i), t));
      out << words[i] << ',' << t << ',' << buf << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const HistogramExport& hist) {
  out << "bin_lo,bin_hi,t,count\n";
  char buf[96];
  for (std::size_t s = 0; s < hist.slices.size(); ++s)
    for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%zu,%zu", hist.edges[b], hist.edges[b + 1],
                    hist.slices[s], hist.counts[s][b]);
      out << buf << '\n';
    }
}

namespace {

void finish(LposReport& r) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < r.per_pair.size(); ++t)
    if (r.pairs[t]) {
      s += r.per_pair[t];
      ++n;
    }
  r.mean = n ? s / static_cast<double>(n) : 0.0;
}

void require_slices(std::size_t have, std::size_t need) {
  if (have < need)
    throw data_error("missing embeddings for slice " + std::to_string(have) + " (need " +
                     std::to_string(need) + " slices)");
}

}  // namespace

LposReport evaluate_lpos_sgns(const TimeSlicedCorpus& split, const std::vector<Matrix>& U,
                              const std::vector<Matrix>& V, std::size_t window) {
  const std::size_t T = split.num_slices();
  require_slices(std::min(U.size(), V.size()), T);
  LposReport r;
  for (std::size_t t = 0; t < T; ++t) {
    SkipGramBatch batch;
    for (const auto& p : extract_pairs(split.slices[t], window))
      batch.push(p.center, p.context, Label::positive);
    const auto ll = sgns_log_likelihood(batch, U[t], V[t]);
    r.sum.push_back(ll.positive);
    r.pairs.push_back(ll.positive_pairs);
    r.per_pair.push_back(ll.positive_mean());
    r.tokens.push_back(split.num_tokens(t));
  }
  finish(r);
  return r;
}

LposReport evaluate_lpos_dbe(const TimeSlicedCorpus& split, const std::vector<Matrix>& U,
                             const Matrix& V, std::size_t window) {
  const std::size_t T = split.num_slices();
  require_slices(U.size(), T);
  LposReport r;
  for (std::size_t t = 0; t < T; ++t) {
    const auto pos = dbe_positives(split.slices[t], window, t);
    double sum = 0.0;
    for (std::size_t k = 0; k < pos.size(); ++k)
      sum += log_sigmoid(dbe_positional_logit(pos.centers[k], pos.context(k), U[t], V));
    r.sum.push_back(sum);
    r.pairs.push_back(pos.size());
    r.per_pair.push_back(pos.size() ? sum / static_cast<double>(pos.size()) : 0.0);
    r.tokens.push_back(split.num_tokens(t));
  }
  finish(r);
  return r;
}

void write_lpos_report(std::ostream& out, const LposReport& report, ModelKind model,
                       Split split) {
  char buf[128];
  out << "# held-out L_pos (" << model_name(model) << ", " << split_name(split)
      << "), mean log-probability per positive pair\n";
  std::snprintf(buf, sizeof buf, "%-6s %12s %10s %12s\n", "slice", "L_pos", "pairs", "per_token");
  out << buf;
  for (std::size_t t = 0; t < report.per_pair.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%-6zu %12.4f %10zu %12.4f\n", t, report.per_pair[t],
                  report.pairs[t], report.per_token(t));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-6s %12.4f\n", "mean", report.mean);
  out << buf;
}

}  // namespace diachron
