#include "diachron/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "diachron/error.hpp"

namespace diachron {

std::string_view change_kind_name(ChangeKind k) {
  return k == ChangeKind::gradual ? "gradual" : "abrupt";
}

ChangeKind parse_change_kind(std::string_view name) {
  if (name == "gradual") return ChangeKind::gradual;
  if (name == "abrupt") return ChangeKind::abrupt;
  throw usage_error("unknown change kind: " + std::string(name));
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { throw usage_error("synthetic corpus spec: " + m); };
  if (num_slices < 1) fail("need at least one slice");
  if (doc_length < 2) fail("documents need at least two tokens");
  if (topics.size() < 2) fail("need at least two topics");
  if (!(function_word_prob >= 0.0 && function_word_prob < 1.0))
    fail("function word probability must lie in [0,1)");
  if (function_word_prob > 0.0 && function_words.empty()) fail("function word pool is empty");
  std::set<WordId> seen;
  auto claim = [&](WordId w) {
    if (w >= vocab_size) fail("word id " + std::to_string(w) + " outside the vocabulary");
    if (!seen.insert(w).second) fail("word id " + std::to_string(w) + " used twice");
  };
  for (WordId w : function_words) claim(w);
  for (const auto& t : topics) {
    if (t.words.empty()) fail("empty topic");
    for (WordId w : t.words) claim(w);
  }
  for (const auto& c : planted_changes) {
    claim(c.word);
    if (c.change_slice < 1 || c.change_slice >= num_slices)
      fail("change slice must lie in [1, T)");
    if (c.old_topic >= topics.size() || c.new_topic >= topics.size() ||
        c.old_topic == c.new_topic)
      fail("planted change needs two distinct existing topics");
  }
}

SynthSpec make_synth_spec(std::size_t vocab_size, std::size_t num_slices,
                          std::size_t tokens_per_slice, std::uint64_t seed,
                          std::size_t num_planted, ChangeKind kind, std::size_t change_slice,
                          std::size_t num_topics, std::size_t num_function_words) {
  if (num_topics < 2) throw usage_error("synthetic corpus needs at least two topics");
  if (vocab_size < num_function_words + num_planted + num_topics)
    throw usage_error("synthetic vocabulary too small for its topics");
  SynthSpec s;
  s.vocab_size = vocab_size;
  s.num_slices = num_slices;
  s.tokens_per_slice = tokens_per_slice;
  s.seed = seed;
  WordId next = 0;
  for (std::size_t k = 0; k < num_function_words; ++k) s.function_words.push_back(next++);
  for (std::size_t k = 0; k < num_planted; ++k) {
    PlantedChange c;
    c.word = next++;
    c.change_slice = change_slice;
    c.old_topic = k % num_topics;
    c.new_topic = (k + 1 + num_topics / 2) % num_topics;
    if (c.new_topic == c.old_topic) c.new_topic = (c.old_topic + 1) % num_topics;
    c.kind = kind;
    s.planted_changes.push_back(c);
  }
  s.topics.resize(num_topics);
  for (std::size_t r = 0; next < vocab_size; ++r) s.topics[r % num_topics].words.push_back(next++);
  return s;
}

double change_mix(const PlantedChange& change, std::size_t t, std::size_t num_slices) {
  if (t < change.change_slice) return 0.0;
  if (change.kind == ChangeKind::abrupt) return 1.0;
  const double span = static_cast<double>(num_slices - change.change_slice);
  return std::min(1.0, static_cast<double>(t - change.change_slice + 1) / span);
}

std::string synth_word(WordId id, std::size_t vocab_size) {
  std::size_t width = 1;
  for (std::size_t n = vocab_size > 0 ? vocab_size - 1 : 0; n >= 10; n /= 10) ++width;
  std::string digits = std::to_string(id);
  return "w" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  SynthCorpus out;
  for (WordId w = 0; w < spec.vocab_size; ++w) out.words.push_back(synth_word(w, spec.vocab_size));
  out.changed.assign(spec.vocab_size, false);
  for (const auto& c : spec.planted_changes) out.changed[c.word] = true;
  out.changes = spec.planted_changes;

  const std::size_t T = spec.num_slices;
  const std::size_t K = spec.topics.size();
  const std::size_t docs_per_slice =
      (spec.tokens_per_slice + spec.doc_length - 1) / spec.doc_length;
  out.text.slices.resize(T);
  out.text.source_index.resize(T);

  for (std::size_t t = 0; t < T; ++t) {
    // Per-topic word lists and weights for this slice.
    std::vector<std::vector<WordId>> members(K);
    std::vector<std::discrete_distribution<std::size_t>> pick;
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<double> w;
      for (std::size_t r = 0; r < spec.topics[k].words.size(); ++r) {
        members[k].push_back(spec.topics[k].words[r]);
        w.push_back(1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent));
      }
      for (const auto& c : spec.planted_changes) {
        const double mix = change_mix(c, t, T);
        const double weight = k == c.old_topic ? 1.0 - mix : k == c.new_topic ? mix : 0.0;
        if (weight > 0.0) {
          members[k].push_back(c.word);
          w.push_back(spec.planted_boost * weight);
        }
      }
      pick.emplace_back(w.begin(), w.end());
    }
    Rng rng(derive_seed(spec.seed, {t, 0x5e7}));
    std::uniform_int_distribution<std::size_t> topic_of(0, K - 1);
    std::uniform_int_distribution<std::size_t> function_of(
        0, spec.function_words.empty() ? 0 : spec.function_words.size() - 1);
    std::bernoulli_distribution is_function(spec.function_word_prob);
    for (std::size_t n = 0; n < docs_per_slice; ++n) {
      const std::size_t k = topic_of(rng);
      TextDocument doc;
      doc.reserve(spec.doc_length);
      for (std::size_t p = 0; p < spec.doc_length; ++p) {
        const WordId w = is_function(rng) ? spec.function_words[function_of(rng)]
                                          : members[k][pick[k](rng)];
        doc.push_back(out.words[w]);
      }
      out.text.slices[t].push_back(std::move(doc));
      out.text.source_index[t].push_back(t * docs_per_slice + n);
    }
  }
  return out;
}

void write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus,
                        int first_year) {
  namespace fs = std::filesystem;
  using namespace std::chrono;
  fs::create_directories(dir / "docs");
  std::vector<ManifestEntry> entries;
  for (std::size_t t = 0; t < corpus.text.num_slices(); ++t) {
    const auto rel = fs::path("docs") / ("t" + std::to_string(t));
    fs::create_directories(dir / rel);
    const sys_days year_start{year{first_year + static_cast<int>(t)} / January / 1};
    for (std::size_t n = 0; n < corpus.text.slices[t].size(); ++n) {
      const auto name = rel / ("d" + std::to_string(n) + ".txt");
      const auto path = dir / name;
      std::ofstream f(path);
      if (!f) throw data_error("cannot write " + path.string());
      const auto& doc = corpus.text.slices[t][n];
      for (std::size_t k = 0; k < doc.size(); ++k) f << (k ? " " : "") << doc[k];
      f << '\n';
      // Manifest paths are relative to the manifest itself.
      entries.push_back({year_start + days{static_cast<int>(n % 365)}, name});
    }
  }
  write_manifest(dir / "manifest.tsv", entries);
  std::ofstream b(dir / "boundaries.txt");
  for (std::size_t t = 0; t <= corpus.text.num_slices(); ++t)
    b << first_year + static_cast<int>(t) << "-01-01\n";
  std::ofstream g(dir / "ground_truth.csv");
  g << "word,change_slice\n";
  for (const auto& c : corpus.changes) g << corpus.words[c.word] << ',' << c.change_slice << '\n';
}

}  // namespace diachron
