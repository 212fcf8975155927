#include "diachron/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "diachron/error.hpp"

namespace diachron {

namespace {

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw data_error("malformed timestamp: '" + std::string(whole) + "'");
  return v;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() < 4) throw data_error("malformed timestamp: '" + std::string(text) + "'");

  const int y = parse_int(s.substr(0, 4), text);
  unsigned mo = 1, d = 1;
  int hh = 0, mm = 0, ss = 0;
  std::size_t pos = 4;
  auto field = [&](char sep, std::size_t width) -> int {
    if (pos >= s.size() || s[pos] != sep || pos + 1 + width > s.size())
      throw data_error("malformed timestamp: '" + std::string(text) + "'");
    const int v = parse_int(s.substr(pos + 1, width), text);
    pos += 1 + width;
    return v;
  };
  if (pos < s.size()) mo = static_cast<unsigned>(field('-', 2));
  if (pos < s.size()) d = static_cast<unsigned>(field('-', 2));
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ')
      throw data_error("malformed timestamp: '" + std::string(text) + "'");
    const std::size_t start = pos;
    hh = parse_int(s.substr(start + 1, 2), text);
    pos = start + 3;
    mm = field(':', 2);
    if (pos < s.size()) ss = field(':', 2);
    if (pos != s.size()) throw data_error("malformed timestamp: '" + std::string(text) + "'");
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60)
    throw data_error("invalid date: '" + std::string(text) + "'");
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_date(Timestamp ts) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(ts)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw data_error("cannot open manifest: " + manifest.string());
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw data_error(manifest.string() + ":" + std::to_string(lineno) +
                       ": expected '<timestamp>\\t<path>'");
    std::filesystem::path p = line.substr(tab + 1);
    if (p.is_relative()) p = base / p;
    entries.push_back({parse_timestamp(std::string_view(line).substr(0, tab)), p});
  }
  return entries;
}

void write_manifest(const std::filesystem::path& manifest,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(manifest);
  if (!out) throw data_error("cannot write manifest: " + manifest.string());
  const auto base = manifest.parent_path();
  for (const auto& e : entries) {
    auto p = e.path;
    if (!base.empty() && p.is_absolute()) {
      auto rel = std::filesystem::relative(p, base);
      if (!rel.empty() && rel.native()[0] != '.') p = rel;
    }
    out << format_date(e.timestamp) << '\t' << p.string() << '\n';
  }
}

std::vector<RawDocument> load_documents(const std::vector<ManifestEntry>& entries) {
  std::vector<RawDocument> docs;
  docs.reserve(entries.size());
  for (const auto& e : entries) {
    std::ifstream in(e.path, std::ios::binary);
    if (!in) throw data_error("cannot open document: " + e.path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    docs.push_back({e.timestamp, tokenize(ss.str()), e.path.string()});
  }
  return docs;
}

std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open stopword file: " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& w : tokenize(line)) words.insert(std::move(w));
  }
  return words;
}

std::vector<int> assign_slices(const std::vector<Timestamp>& timestamps,
                               const std::vector<Timestamp>& boundaries) {
  if (boundaries.size() < 2)
    throw usage_error("time slicing needs at least two boundaries, got " +
                      std::to_string(boundaries.size()));
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (!(boundaries[i - 1] < boundaries[i]))
      throw usage_error("slice boundaries must be strictly increasing");
  std::vector<int> out;
  out.reserve(timestamps.size());
  for (const auto& ts : timestamps) {
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), ts);
    if (it == boundaries.begin() || it == boundaries.end()) {
      out.push_back(-1);
    } else {
      out.push_back(static_cast<int>(it - boundaries.begin()) - 1);
    }
  }
  return out;
}

SlicedText slice_corpus(const std::vector<RawDocument>& documents,
                        const std::vector<Timestamp>& boundaries) {
  std::vector<Timestamp> ts;
  ts.reserve(documents.size());
  for (const auto& d : documents) ts.push_back(d.timestamp);
  const auto slot = assign_slices(ts, boundaries);

  SlicedText out;
  out.slices.resize(boundaries.size() - 1);
  out.source_index.resize(boundaries.size() - 1);
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (slot[i] < 0) {
      ++out.dropped;
      continue;
    }
    out.slices[slot[i]].push_back(documents[i].tokens);
    out.source_index[slot[i]].push_back(i);
  }
  if (out.dropped == documents.size())
    throw data_error("empty corpus: no document falls inside the slice boundaries");
  return out;
}

std::vector<Timestamp> yearly_boundaries(int first_year, int last_year) {
  using namespace std::chrono;
  if (last_year <= first_year) throw usage_error("yearly boundaries need first < last");
  std::vector<Timestamp> b;
  for (int y = first_year; y <= last_year; ++y)
    b.push_back(sys_days{year{y} / January / 1} + seconds{0});
  return b;
}

// ---------------------------------------------------------------- Vocabulary

WordId Vocabulary::id_of(std::string_view word) const {
  const auto it = id_of_.find(std::string(word));
  if (it == id_of_.end()) throw std::out_of_range("word not in vocabulary: " + std::string(word));
  return it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  return id_of_.count(std::string(word)) != 0;
}

void Vocabulary::index() {
  id_of_.clear();
  id_of_.reserve(words_.size());
  for (WordId i = 0; i < words_.size(); ++i) {
    if (!id_of_.emplace(words_[i], i).second)
      throw data_error("duplicate vocabulary word: " + words_[i]);
  }
}

void Vocabulary::count(const SlicedText& text) {
  num_slices_ = text.num_slices();
  total_count_.assign(words_.size(), 0);
  slice_count_.assign(words_.size() * num_slices_, 0);
  for (std::size_t t = 0; t < num_slices_; ++t) {
    for (const auto& doc : text.slices[t]) {
      for (const auto& w : doc) {
        const auto it = id_of_.find(w);
        if (it == id_of_.end()) continue;
        ++total_count_[it->second];
        ++slice_count_[it->second * num_slices_ + t];
      }
    }
  }
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words, const SlicedText& text) {
  Vocabulary v;
  v.words_ = words;
  v.index();
  v.count(text);
  return v;
}

Vocabulary build_vocabulary(const SlicedText& text,
                            const std::unordered_set<std::string>& stopwords,
                            std::size_t max_size) {
  if (max_size < 1) throw usage_error("vocabulary max_size must be >= 1");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& slice : text.slices)
    for (const auto& doc : slice)
      for (const auto& w : doc)
        if (!stopwords.count(w)) ++freq[w];
  if (freq.empty()) throw data_error("empty corpus: no tokens left after stopword removal");

  std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);

  Vocabulary v;
  v.words_.reserve(ranked.size());
  for (auto& [w, c] : ranked) v.words_.push_back(w);
  v.index();
  v.count(text);
  return v;
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write vocabulary: " + path.string());
  for (WordId i = 0; i < vocab.size(); ++i)
    out << vocab.word(i) << '\t' << i << '\t' << vocab.total_count(i) << '\n';
}

std::vector<std::string> read_vocabulary_words(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open vocabulary: " + path.string());
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string w;
    std::size_t id = 0;
    if (!std::getline(ls, w, '\t') || !(ls >> id))
      throw data_error("malformed vocabulary line in " + path.string() + ": " + line);
    rows.emplace_back(id, w);
  }
  std::sort(rows.begin(), rows.end());
  std::vector<std::string> words;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].first != k) throw data_error("vocabulary ids are not dense in " + path.string());
    words.push_back(std::move(rows[k].second));
  }
  return words;
}

// ------------------------------------------------------------------- Corpus

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  throw usage_error("unknown split: " + std::string(name));
}

std::size_t TimeSlicedCorpus::num_tokens(std::size_t t) const {
  std::size_t n = 0;
  for (const auto& d : slices.at(t)) n += d.size();
  return n;
}

std::size_t TimeSlicedCorpus::num_tokens() const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < slices.size(); ++t) n += num_tokens(t);
  return n;
}

TimeSlicedCorpus TimeSlicedCorpus::pooled() const {
  TimeSlicedCorpus out;
  out.split = split;
  out.slices.resize(1);
  for (const auto& s : slices) out.slices[0].insert(out.slices[0].end(), s.begin(), s.end());
  return out;
}

TimeSlicedCorpus encode(const SlicedText& text, const Vocabulary& vocab) {
  TimeSlicedCorpus out;
  out.slices.resize(text.num_slices());
  for (std::size_t t = 0; t < text.num_slices(); ++t) {
    out.slices[t].reserve(text.slices[t].size());
    for (const auto& doc : text.slices[t]) {
      Document ids;
      ids.reserve(doc.size());
      for (const auto& w : doc)
        if (vocab.contains(w)) ids.push_back(vocab.id_of(w));
      out.slices[t].push_back(std::move(ids));
    }
  }
  return out;
}

void write_corpus(std::ostream& out, const TimeSlicedCorpus& corpus) {
  out << "slices " << corpus.num_slices() << ' ' << split_name(corpus.split) << '\n';
  for (std::size_t t = 0; t < corpus.num_slices(); ++t) {
    for (const auto& doc : corpus.slices[t]) {
      out << t << '\t';
      for (std::size_t k = 0; k < doc.size(); ++k) out << (k ? " " : "") << doc[k];
      out << '\n';
    }
  }
}

TimeSlicedCorpus read_corpus(std::istream& in) {
  std::string tag, split;
  std::size_t T = 0;
  if (!(in >> tag >> T >> split) || tag != "slices")
    throw data_error("malformed corpus file header");
  TimeSlicedCorpus out;
  out.split = parse_split(split);
  out.slices.resize(T);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw data_error("malformed corpus line");
    const std::size_t t = std::stoul(line.substr(0, tab));
    if (t >= T) throw data_error("corpus line references slice out of range");
    Document doc;
    std::istringstream ls(line.substr(tab + 1));
    WordId id;
    while (ls >> id) doc.push_back(id);
    out.slices[t].push_back(std::move(doc));
  }
  return out;
}

HoldoutSplit split_holdout(const TimeSlicedCorpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw usage_error("holdout fraction must lie in (0,1)");
  HoldoutSplit out;
  out.train.split = Split::train;
  out.valid.split = Split::valid;
  out.test.split = Split::test;
  const std::size_t T = corpus.num_slices();
  out.train.slices.resize(T);
  out.valid.slices.resize(T);
  out.test.slices.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& docs = corpus.slices[t];
    const std::size_t n = docs.size();
    const auto held = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
    if (n < 3 || held < 2 || held >= n)
      throw data_error("slice " + std::to_string(t) + " has " + std::to_string(n) +
                       " documents, too few to hold out 2 for validation and testing");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, {t, 0x401d}));
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_valid = held / 2;
    std::vector<std::uint8_t> role(n, 0);  // 0 train, 1 valid, 2 test
    for (std::size_t k = 0; k < held; ++k) role[order[k]] = k < n_valid ? 1 : 2;
    for (std::size_t i = 0; i < n; ++i) {
      auto& dst = role[i] == 0 ? out.train : role[i] == 1 ? out.valid : out.test;
      dst.slices[t].push_back(docs[i]);
    }
  }
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, std::uint64_t seed,
                                           std::size_t slice) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (fraction >= 1.0) return idx;
  const auto keep = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  Rng rng(derive_seed(seed, {slice, 0x5ab5}));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SubsampleResult subsample_corpus(const TimeSlicedCorpus& corpus, double fraction,
                                 std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw usage_error("subsample fraction must lie in (0,1]");
  SubsampleResult out;
  if (fraction == 1.0) {
    out.corpus = corpus;
  } else {
    out.corpus.split = corpus.split;
    out.corpus.slices.resize(corpus.num_slices());
    for (std::size_t t = 0; t < corpus.num_slices(); ++t) {
      for (std::size_t i : subsample_indices(corpus.slices[t].size(), fraction, seed, t))
        out.corpus.slices[t].push_back(corpus.slices[t][i]);
    }
  }
  for (std::size_t t = 0; t < out.corpus.num_slices(); ++t)
    if (out.corpus.num_tokens(t) == 0) out.empty_slices.push_back(t);
  return out;
}

// ------------------------------------------------------------------- Pairs

void append_pairs(const Document& doc, std::size_t window, std::vector<Pair>& out) {
  const std::size_t n = doc.size();
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t lo = p >= window ? p - window : 0;
    const std::size_t hi = std::min(n - 1, p + window);
    for (std::size_t q = lo; q <= hi; ++q)
      if (q != p) out.push_back({doc[p], doc[q]});
  }
}

std::vector<Pair> extract_pairs(const std::vector<Document>& docs, std::size_t window) {
  if (window < 1) throw usage_error("context window must be >= 1");
  std::vector<Pair> out;
  for (const auto& d : docs) append_pairs(d, window, out);
  return out;
}

std::vector<std::uint64_t> unigram_counts(const TimeSlicedCorpus& corpus, std::size_t vocab_size) {
  std::vector<std::uint64_t> counts(vocab_size, 0);
  for (const auto& slice : corpus.slices)
    for (const auto& doc : slice)
      for (WordId w : doc) {
        if (w >= vocab_size)
          throw data_error("word id " + std::to_string(w) + " outside a vocabulary of " +
                           std::to_string(vocab_size));
        ++counts[w];
      }
  return counts;
}

NoiseDistribution::NoiseDistribution(const std::vector<std::uint64_t>& counts, double power) {
  probs_.resize(counts.size());
  double z = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    probs_[i] = std::pow(static_cast<double>(counts[i]), power);
    z += probs_[i];
  }
  if (!(z > 0.0)) throw data_error("noise distribution needs at least one positive count");
  cumulative_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    probs_[i] /= z;
    acc += probs_[i];
    cumulative_[i] = acc;
  }
  std::size_t last = probs_.size() - 1;
  while (last > 0 && probs_[last] == 0.0) --last;
  for (std::size_t i = last; i < cumulative_.size(); ++i) cumulative_[i] = 1.0;
}

WordId NoiseDistribution::sample(Rng& rng) const {
  // 53 random bits -> [0,1)
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<WordId>(it - cumulative_.begin());
}

void SkipGramBatch::clear() {
  center_ids.clear();
  context_ids.clear();
  labels.clear();
}

void SkipGramBatch::push(WordId center, WordId context, Label label) {
  center_ids.push_back(center);
  context_ids.push_back(context);
  labels.push_back(label);
}

SkipGramBatch sample_negatives(const NoiseDistribution& noise, const std::vector<Pair>& positives,
                               std::size_t ratio, std::uint64_t seed) {
  if (ratio < 1) throw usage_error("negative ratio must be >= 1");
  SkipGramBatch batch;
  batch.center_ids.reserve(positives.size() * (ratio + 1));
  batch.context_ids.reserve(positives.size() * (ratio + 1));
  batch.labels.reserve(positives.size() * (ratio + 1));
  Rng rng(seed);
  for (const auto& p : positives) {
    batch.push(p.center, p.context, Label::positive);
    for (std::size_t k = 0; k < ratio; ++k) batch.push(p.center, noise.sample(rng), Label::negative);
  }
  return batch;
}

SkipGramBatch sample_negatives(const Vocabulary& vocab, const std::vector<Pair>& positives,
                               std::size_t ratio, std::uint64_t seed) {
  return sample_negatives(NoiseDistribution(vocab.total_counts()), positives, ratio, seed);
}

}  // namespace diachron
