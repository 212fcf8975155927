#pragma once

// Synthetic diachronic corpus with planted semantic changes. Words belong to
// disjoint topics plus a shared pool of function words; a document draws one
// topic and fills its tokens from that topic (Zipf-weighted) or the function
// pool. A planted word moves from one topic to another, abruptly or linearly
// over the slices following its change slice.

#include <filesystem>
#include <string>
#include <vector>

#include "diachron/corpus.hpp"

namespace diachron {

enum class ChangeKind { gradual, abrupt };
std::string_view change_kind_name(ChangeKind k);
ChangeKind parse_change_kind(std::string_view name);

struct PlantedChange {
  WordId word = 0;
  std::size_t change_slice = 1;
  std::size_t old_topic = 0;
  std::size_t new_topic = 1;
  ChangeKind kind = ChangeKind::abrupt;
};

struct TopicProfile {
  std::vector<WordId> words;  // weight of the r-th word is 1/(r+1)^zipf_exponent
};

struct SynthSpec {
  std::size_t vocab_size = 500;
  std::size_t num_slices = 5;
  std::size_t tokens_per_slice = 100000;
  std::uint64_t seed = 1;
  std::vector<WordId> function_words;
  std::vector<TopicProfile> topics;
  std::vector<PlantedChange> planted_changes;
  std::size_t doc_length = 20;
  double function_word_prob = 0.25;
  double zipf_exponent = 1.0;
  // Weight of a planted word inside its current topic, relative to the
  // topic's most frequent word.
  double planted_boost = 0.1;

  void validate() const;
};

// Function words take the lowest ids, planted words the next ones, and the
// remaining words are dealt round-robin into `num_topics` topics. Planted
// word k moves from topic k mod K to topic (k + 1 + K/2) mod K.
SynthSpec make_synth_spec(std::size_t vocab_size, std::size_t num_slices,
                          std::size_t tokens_per_slice, std::uint64_t seed,
                          std::size_t num_planted, ChangeKind kind, std::size_t change_slice,
                          std::size_t num_topics = 10, std::size_t num_function_words = 50);

// Weight on the new topic at slice t: abrupt 0/1 at change_slice, gradual
// (t - change_slice + 1) / (T - change_slice) from change_slice on.
double change_mix(const PlantedChange& change, std::size_t t, std::size_t num_slices);

std::string synth_word(WordId id, std::size_t vocab_size);

struct SynthCorpus {
  SlicedText text;
  std::vector<std::string> words;  // synthetic lexicon, index = generator id
  std::vector<bool> changed;       // ground truth per generator id
  std::vector<PlantedChange> changes;
};

SynthCorpus generate(const SynthSpec& spec);

// Writes docs/t<k>/d<n>.txt, manifest.tsv (slice t dated first_year + t),
// boundaries.txt and ground_truth.csv (`word,change_slice`).
void write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus,
                        int first_year);

}  // namespace diachron
