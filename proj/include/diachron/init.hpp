#pragma once

// Starting points for the diachronic trainers: random noise, a static model
// trained on the pooled corpus ("internal"), or pretrained vectors placed at
// the most recent slice with reverse-chronological training.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "diachron/corpus.hpp"
#include "diachron/dbe.hpp"
#include "diachron/dsg.hpp"
#include "diachron/matrix.hpp"
#include "diachron/train_config.hpp"

namespace diachron {

enum class InitKind { random, internal, backward_external };
std::string_view init_name(InitKind k);
InitKind parse_init(std::string_view name);

struct InitScheme {
  InitKind kind = InitKind::random;
  std::optional<std::filesystem::path> pretrained_path;
  double fixed_variance = 0.1;  // DSG variance under external init

  void validate() const;
};

struct ModelParams {
  DsgParams dsg;
  DbeParams dbe;
};

struct Coverage {
  std::size_t found = 0;
  std::size_t total = 0;
  double ratio() const noexcept {
    return total ? static_cast<double>(found) / static_cast<double>(total) : 0.0;
  }
};

struct Initialization {
  Direction direction = Direction::forward;
  Matrix U;  // point estimate, or DSG mean
  Matrix V;
  Matrix U_variance;  // DSG only
  Matrix V_variance;
  std::optional<Coverage> coverage;
  std::vector<std::string> warnings;

  GaussianMatrix gaussian_U() const { return {U, U_variance}; }
  GaussianMatrix gaussian_V() const { return {V, V_variance}; }
};

// ISG/DBE: U, V entries i.i.d. N(0,1). DSG: means 0, variances 1.
Initialization init_random(std::size_t L, std::size_t d, std::uint64_t seed, ModelKind kind);

// Trains the corresponding static model (one pooled slice) from a random
// start and returns its parameters.
Initialization init_internal(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                             const TrainConfig& config, ModelKind kind,
                             const ModelParams& params);

struct PretrainedMatrix {
  Matrix values;
  Coverage coverage;
  std::vector<WordId> missing;
};

// Rows for vocabulary words found in the file; the rest N(0, 0.1^2).
PretrainedMatrix load_pretrained(const std::filesystem::path& path,
                                 const std::vector<std::string>& vocab_words, std::size_t dim,
                                 std::uint64_t oov_seed);

// random/internal train forward from slice 0; backward_external trains from
// the last slice backwards starting at the pretrained vectors (used for U and
// V; for DSG they become the means with a fixed variance).
Initialization apply_scheme(const InitScheme& scheme, ModelKind kind,
                            const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                            const std::vector<std::string>& vocab_words,
                            const TrainConfig& config, const ModelParams& params);

}  // namespace diachron
