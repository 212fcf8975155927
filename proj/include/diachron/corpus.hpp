#pragma once

// Corpus ingestion: tokenization, time slicing, vocabulary, held-out splits,
// subsampling, skip-gram pair extraction and negative sampling.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "diachron/matrix.hpp"
#include "diachron/random.hpp"

namespace diachron {

using Timestamp = std::chrono::sys_seconds;

// Accepts YYYY, YYYY-MM, YYYY-MM-DD, and YYYY-MM-DDThh:mm[:ss][Z].
Timestamp parse_timestamp(std::string_view text);
std::string format_date(Timestamp ts);

// Whitespace split, ASCII lowercasing, ASCII punctuation removed.
std::vector<std::string> tokenize(std::string_view text);

using TextDocument = std::vector<std::string>;

struct RawDocument {
  Timestamp timestamp;
  TextDocument tokens;
  std::string source;
};

struct ManifestEntry {
  Timestamp timestamp;
  std::filesystem::path path;
};

// `<timestamp>\t<path>` per line. Relative paths resolve against the
// manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest,
                    const std::vector<ManifestEntry>& entries);
std::vector<RawDocument> load_documents(const std::vector<ManifestEntry>& entries);
std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path);

// Documents bucketed into T half-open time intervals, still as strings.
struct SlicedText {
  std::vector<std::vector<TextDocument>> slices;
  std::vector<std::vector<std::size_t>> source_index;  // into the input list
  std::size_t dropped = 0;

  std::size_t num_slices() const noexcept { return slices.size(); }
};

// boundaries b_0 < ... < b_T define T slices [b_t, b_{t+1}).
SlicedText slice_corpus(const std::vector<RawDocument>& documents,
                        const std::vector<Timestamp>& boundaries);
// Slice index per document, or -1 when outside every interval.
std::vector<int> assign_slices(const std::vector<Timestamp>& timestamps,
                               const std::vector<Timestamp>& boundaries);
std::vector<Timestamp> yearly_boundaries(int first_year, int last_year);

class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t num_slices() const noexcept { return num_slices_; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::string& word(WordId id) const { return words_.at(id); }
  // Throws std::out_of_range for unknown words.
  WordId id_of(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::vector<std::uint64_t>& total_counts() const noexcept { return total_count_; }
  std::uint64_t total_count(WordId id) const { return total_count_.at(id); }
  std::uint64_t slice_count(WordId id, std::size_t t) const {
    return slice_count_.at(static_cast<std::size_t>(id) * num_slices_ + t);
  }

  // Ids assigned in the given order; counts taken from `text`.
  static Vocabulary from_words(const std::vector<std::string>& words, const SlicedText& text);

 private:
  friend Vocabulary build_vocabulary(const SlicedText&, const std::unordered_set<std::string>&,
                                     std::size_t);
  void index();
  void count(const SlicedText& text);

  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> id_of_;
  std::vector<std::uint64_t> total_count_;
  std::vector<std::uint64_t> slice_count_;  // [word * T + t]
  std::size_t num_slices_ = 0;
};

// The max_size most frequent non-stopword words, sorted by descending count
// with lexicographic tie-break.
Vocabulary build_vocabulary(const SlicedText& text,
                            const std::unordered_set<std::string>& stopwords,
                            std::size_t max_size);

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
// Word column of a `<word>\t<id>\t<count>` file, ordered by id.
std::vector<std::string> read_vocabulary_words(const std::filesystem::path& path);

enum class Split { train, valid, test };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

using Document = std::vector<WordId>;

struct TimeSlicedCorpus {
  std::vector<std::vector<Document>> slices;
  Split split = Split::train;

  std::size_t num_slices() const noexcept { return slices.size(); }
  std::size_t num_tokens(std::size_t t) const;
  std::size_t num_tokens() const;
  // All slices concatenated into one (the static / pooled corpus).
  TimeSlicedCorpus pooled() const;
};

// Drops out-of-vocabulary tokens.
TimeSlicedCorpus encode(const SlicedText& text, const Vocabulary& vocab);

void write_corpus(std::ostream& out, const TimeSlicedCorpus& corpus);
TimeSlicedCorpus read_corpus(std::istream& in);

struct HoldoutSplit {
  TimeSlicedCorpus train;
  TimeSlicedCorpus valid;
  TimeSlicedCorpus test;
};

// Per slice, round(n * fraction) documents are held out and split evenly into
// valid and test (test gets the odd one).
HoldoutSplit split_holdout(const TimeSlicedCorpus& corpus, double fraction, std::uint64_t seed);

struct SubsampleResult {
  TimeSlicedCorpus corpus;
  std::vector<std::size_t> empty_slices;
};

// Document-level: per slice, round(n * fraction) documents are kept, in
// original order.
SubsampleResult subsample_corpus(const TimeSlicedCorpus& corpus, double fraction,
                                 std::uint64_t seed);
// Indices kept by subsample_corpus for a slice of n documents.
std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, std::uint64_t seed,
                                           std::size_t slice);

struct Pair {
  WordId center;
  WordId context;
  friend bool operator==(const Pair&, const Pair&) = default;
};

void append_pairs(const Document& doc, std::size_t window, std::vector<Pair>& out);
std::vector<Pair> extract_pairs(const std::vector<Document>& docs, std::size_t window);

// Token count per word id over every slice; ids must be < vocab_size.
std::vector<std::uint64_t> unigram_counts(const TimeSlicedCorpus& corpus, std::size_t vocab_size);

// Unigram counts raised to `power` and renormalized.
class NoiseDistribution {
 public:
  NoiseDistribution() = default;
  explicit NoiseDistribution(const std::vector<std::uint64_t>& counts, double power = 0.75);

  const std::vector<double>& probabilities() const noexcept { return probs_; }
  WordId sample(Rng& rng) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

enum class Label : std::uint8_t { negative = 0, positive = 1 };

struct SkipGramBatch {
  std::vector<WordId> center_ids;
  std::vector<WordId> context_ids;
  std::vector<Label> labels;
  std::size_t slice_index = 0;

  std::size_t size() const noexcept { return labels.size(); }
  void clear();
  void push(WordId center, WordId context, Label label);
};

// Each positive is followed by `ratio` negatives sharing its center.
SkipGramBatch sample_negatives(const NoiseDistribution& noise, const std::vector<Pair>& positives,
                               std::size_t ratio, std::uint64_t seed);
SkipGramBatch sample_negatives(const Vocabulary& vocab, const std::vector<Pair>& positives,
                               std::size_t ratio, std::uint64_t seed);

}  // namespace diachron
