// diachron: corpus preparation, diachronic embedding training and drift analysis.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "diachron/analysis.hpp"
#include "diachron/corpus.hpp"
#include "diachron/dbe.hpp"
#include "diachron/dsg.hpp"
#include "diachron/error.hpp"
#include "diachron/init.hpp"
#include "diachron/isg.hpp"
#include "diachron/kernels.hpp"
#include "diachron/synth.hpp"
#include "diachron/vec_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace diachron;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Same digest git assigns to a blob with this content.
std::string git_blob_sha1(const fs::path& path) {
  const std::string body = read_file(path);
  const std::string header = "blob " + std::to_string(body.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, body.data(), body.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  return hex.str();
}

json file_record(const fs::path& path) {
  return {{"path", fs::absolute(path).lexically_normal().string()}, {"sha1", git_blob_sha1(path)}};
}

TimeSlicedCorpus load_corpus(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read corpus " + path.string());
  try {
    return read_corpus(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_corpus(const fs::path& path, const TimeSlicedCorpus& corpus) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  write_corpus(out, corpus);
}

std::vector<Timestamp> read_boundaries(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot read boundaries " + path.string());
  std::vector<Timestamp> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    line.erase(line.find_last_not_of(" \t\r") + 1);
    out.push_back(parse_timestamp(line));
  }
  return out;
}

// One slice per calendar year spanned by the documents.
std::vector<Timestamp> default_boundaries(const std::vector<RawDocument>& docs) {
  using namespace std::chrono;
  if (docs.empty()) throw data_error("empty corpus");
  int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
  for (const auto& d : docs) {
    const int y = static_cast<int>(year_month_day(floor<days>(d.timestamp)).year());
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  return yearly_boundaries(lo, hi + 1);
}

SlicedText load_sliced(const fs::path& manifest, const std::string& boundaries) {
  const auto docs = load_documents(read_manifest(manifest));
  const auto bounds = boundaries.empty() ? default_boundaries(docs) : read_boundaries(boundaries);
  auto text = slice_corpus(docs, bounds);
  if (text.dropped)
    std::cerr << "warning: " << text.dropped << " documents fall outside every slice\n";
  return text;
}

// ------------------------------------------------------------------ build-vocab

struct VocabOptions {
  std::string manifest, stopwords, boundaries, out;
  std::size_t max_size = 10000;
};

void cmd_build_vocab(const VocabOptions& o) {
  const auto text = load_sliced(o.manifest, o.boundaries);
  const auto stop = o.stopwords.empty() ? std::unordered_set<std::string>{}
                                        : read_stopwords(o.stopwords);
  const auto vocab = build_vocabulary(text, stop, o.max_size);
  std::unordered_set<std::string> distinct;
  std::size_t tokens = 0;
  for (const auto& slice : text.slices)
    for (const auto& doc : slice)
      for (const auto& w : doc) {
        ++tokens;
        if (!stop.count(w)) distinct.insert(w);
      }
  if (o.max_size > distinct.size())
    std::cerr << "warning: max size " << o.max_size << " exceeds the " << distinct.size()
              << " distinct words; vocabulary holds all of them\n";
  write_vocabulary(o.out, vocab);
  std::uint64_t covered = 0;
  for (auto c : vocab.total_counts()) covered += c;
  std::cout << "L=" << vocab.size() << " slices=" << text.num_slices() << " tokens=" << tokens
            << " in_vocabulary=" << covered << '\n';
}

// ------------------------------------------------------------------ slice

struct SliceOptions {
  std::string manifest, vocab, boundaries, out;
  double holdout = 0.1;
  std::uint64_t seed = 1;
};

void cmd_slice(const SliceOptions& o) {
  const auto text = load_sliced(o.manifest, o.boundaries);
  const auto words = read_vocabulary_words(o.vocab);
  const auto vocab = Vocabulary::from_words(words, text);
  const auto corpus = encode(text, vocab);
  const auto split = split_holdout(corpus, o.holdout, o.seed);
  fs::create_directories(o.out);
  save_corpus(fs::path(o.out) / "train.corpus", split.train);
  save_corpus(fs::path(o.out) / "valid.corpus", split.valid);
  save_corpus(fs::path(o.out) / "test.corpus", split.test);
  write_vocabulary(fs::path(o.out) / "vocab.tsv", vocab);
  std::cout << "slice\tdocs\ttrain_tokens\tvalid_tokens\ttest_tokens\n";
  for (std::size_t t = 0; t < corpus.num_slices(); ++t)
    std::cout << t << '\t' << corpus.slices[t].size() << '\t' << split.train.num_tokens(t)
              << '\t' << split.valid.num_tokens(t) << '\t' << split.test.num_tokens(t) << '\n';
}

// ------------------------------------------------------------------ subsample

struct SubsampleOptions {
  std::string in, out;
  double fraction = 0.05;
  std::uint64_t seed = 1;
};

void cmd_subsample(const SubsampleOptions& o) {
  const auto corpus = load_corpus(o.in);
  const auto r = subsample_corpus(corpus, o.fraction, o.seed);
  for (auto t : r.empty_slices) std::cerr << "warning: slice " << t << " is empty after subsampling\n";
  save_corpus(o.out, r.corpus);
  std::cout << "tokens=" << r.corpus.num_tokens() << " of " << corpus.num_tokens() << '\n';
}

// ------------------------------------------------------------------ synth

struct SynthOptions {
  std::string out, kind = "gradual";
  std::size_t vocab_size = 500, slices = 5, tokens = 100000, planted = 1, change_slice = 2;
  std::size_t topics = 10, function_words = 50, doc_length = 20;
  double zipf = 1.0, boost = 0.1, function_prob = 0.25;
  int first_year = 2000;
  std::uint64_t seed = 1;
};

void cmd_synth(const SynthOptions& o) {
  auto spec = make_synth_spec(o.vocab_size, o.slices, o.tokens, o.seed, o.planted,
                              parse_change_kind(o.kind), o.change_slice, o.topics,
                              o.function_words);
  spec.doc_length = o.doc_length;
  spec.zipf_exponent = o.zipf;
  spec.planted_boost = o.boost;
  spec.function_word_prob = o.function_prob;
  const auto corpus = generate(spec);
  write_synth_corpus(o.out, corpus, o.first_year);
  std::cout << "slices=" << corpus.text.num_slices() << " docs/slice="
            << corpus.text.slices[0].size() << " planted=" << corpus.changes.size() << '\n';
}

// ------------------------------------------------------------------ train

struct TrainOptions {
  std::string data, out, model, init = "random", pretrained, reg_beta = "mean";
  TrainConfig config;
  DsgParams dsg;
  DbeParams dbe;
  double fixed_variance = 0.1, reg_alpha = 0.0, subset = 1.0;
  bool verbose = false;
};

RegConfig parse_reg(double alpha, const std::string& beta) {
  RegConfig reg;
  reg.alpha = alpha;
  reg.enabled = alpha > 0.0;
  if (beta == "mean") {
    reg.beta_is_mean = true;
  } else {
    try {
      std::size_t used = 0;
      reg.beta = std::stod(beta, &used);
      if (used != beta.size()) throw std::invalid_argument(beta);
    } catch (const std::logic_error&) {
      throw usage_error("--reg-beta expects a number or 'mean', got '" + beta + "'");
    }
  }
  reg.validate();
  return reg;
}

fs::path model_dir(const fs::path& run, ModelKind kind) { return run / std::string(model_name(kind)); }
std::string slice_file(std::size_t t, const std::string& suffix) {
  return "t" + std::to_string(t) + suffix;
}

void write_states(const fs::path& path, const std::vector<const AdamState*>& states) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path.string());
  for (const auto* s : states) write_adam_state(out, *s);
}

json matrix_trace(const std::vector<std::vector<double>>& v) { return json(v); }

void cmd_train(const TrainOptions& o, const std::string& resolved_config) {
  const ModelKind kind = parse_model(o.model);
  InitScheme scheme;
  scheme.kind = parse_init(o.init);
  if (!o.pretrained.empty()) scheme.pretrained_path = o.pretrained;
  scheme.fixed_variance = o.fixed_variance;
  scheme.validate();
  o.config.validate();
  const RegConfig reg = parse_reg(o.reg_alpha, o.reg_beta);
  if (reg.active() && kind == ModelKind::isg)
    throw usage_error("the drift regularizer applies to dsg and dbe only");
  if (!(o.subset > 0.0 && o.subset <= 1.0)) throw usage_error("--subset must lie in (0, 1]");

  const fs::path data(o.data);
  const auto words = read_vocabulary_words(data / "vocab.tsv");
  TimeSlicedCorpus train = load_corpus(data / "train.corpus");
  if (o.subset < 1.0) {
    auto r = subsample_corpus(train, o.subset, derive_seed(o.config.seed, {0x5b5}));
    for (auto t : r.empty_slices)
      std::cerr << "warning: slice " << t << " is empty after subsampling\n";
    train = std::move(r.corpus);
  }
  const std::size_t T = train.num_slices();
  const NoiseDistribution noise(unigram_counts(train, words.size()));
  ModelParams params{o.dsg, o.dbe};

  const auto init = apply_scheme(scheme, kind, train, noise, words, o.config, params);
  for (const auto& w : init.warnings) std::cerr << "warning: " << w << '\n';

  EpochObserver observer;
  if (o.verbose)
    observer = [](std::size_t t, std::size_t e, double lpos) {
      std::cerr << "slice " << t << " epoch " << e << " train_lpos " << lpos << '\n';
    };

  const fs::path run(o.out);
  const fs::path dir = model_dir(run, kind);
  fs::create_directories(dir);
  json trace;
  std::vector<std::size_t> order = training_order(T, init.direction);
  std::vector<std::string> written;
  auto vec_out = [&](const std::string& name, const Matrix& m) {
    write_vectors(dir / name, words, m);
    written.push_back(name);
  };
  auto state_out = [&](const std::string& name, const std::vector<const AdamState*>& s) {
    write_states(dir / name, s);
    written.push_back(name);
  };

  switch (kind) {
    case ModelKind::isg: {
      const auto m = train_incremental(train, noise, init.U, init.V, o.config, init.direction,
                                       observer);
      for (std::size_t t = 0; t < T; ++t) {
        vec_out(slice_file(t, ".vec"), m.U[t]);
        vec_out(slice_file(t, ".ctx.vec"), m.V[t]);
        state_out(slice_file(t, ".adam"), {&m.adamU[t], &m.adamV[t]});
      }
      trace["train_lpos"] = matrix_trace(m.train_lpos);
      break;
    }
    case ModelKind::dsg: {
      const auto m = train_dsg(train, noise, init.gaussian_U(), init.gaussian_V(), o.dsg,
                               o.config, init.direction, reg, observer);
      for (std::size_t t = 0; t < T; ++t) {
        vec_out(slice_file(t, ".mean.vec"), m.U[t].mean);
        vec_out(slice_file(t, ".var.vec"), m.U[t].variance);
        vec_out(slice_file(t, ".ctx.mean.vec"), m.V[t].mean);
        vec_out(slice_file(t, ".ctx.var.vec"), m.V[t].variance);
        std::vector<const AdamState*> s;
        for (const auto& a : m.optimizer[t]) s.push_back(&a);
        state_out(slice_file(t, ".adam"), s);
      }
      trace["train_lpos"] = matrix_trace(m.train_lpos);
      trace["elbo"] = matrix_trace(m.elbo);
      if (reg.active()) trace["reg_beta"] = matrix_trace(m.reg_beta);
      break;
    }
    case ModelKind::dbe: {
      const std::vector<Matrix> initU(T, init.U);
      const auto r = train_dbe(train, noise, initU, init.V, o.dbe, o.config, reg, observer);
      for (std::size_t t = 0; t < T; ++t) {
        vec_out(slice_file(t, ".vec"), r.model.U[t]);
        state_out(slice_file(t, ".adam"), {&r.optimizer[t]});
      }
      vec_out("context.vec", r.model.V);
      state_out("context.adam", {&r.optimizer.back()});
      trace["train_lpos"] = matrix_trace(r.train_lpos);
      json loss = json::array();
      for (const auto& l : r.epoch_loss)
        loss.push_back({{"positive", l.positive}, {"negative", l.negative}, {"prior", l.prior},
                        {"regularizer", l.regularizer}, {"total", l.total()}});
      trace["loss"] = loss;
      if (reg.active()) trace["reg_beta"] = r.reg_beta;
      break;
    }
  }

  {
    std::ofstream cfg(run / "config.ini");
    cfg << resolved_config;
  }
  json manifest;
  manifest["model"] = model_name(kind);
  manifest["num_slices"] = T;
  manifest["vocab_size"] = words.size();
  manifest["direction"] = direction_name(init.direction);
  manifest["training_order"] = order;
  manifest["train"] = {{"dim", o.config.dim},
                       {"window", o.config.window},
                       {"negative_ratio", o.config.negative_ratio},
                       {"learning_rate", o.config.learning_rate},
                       {"epochs", o.config.epochs},
                       {"batch_size", o.config.batch_size},
                       {"seed", o.config.seed},
                       {"subset", o.subset}};
  if (kind == ModelKind::dsg)
    manifest["dsg"] = {{"diffusion", o.dsg.diffusion},
                       {"prior_variance", o.dsg.prior_variance},
                       {"samples_per_step", o.dsg.samples_per_step},
                       {"exact_entropy", o.dsg.exact_entropy}};
  if (kind == ModelKind::dbe)
    manifest["dbe"] = {{"lambda", o.dbe.lambda}, {"lambda0", o.dbe.lambda0}};
  manifest["reg"] = {{"enabled", reg.active()}, {"alpha", reg.alpha}};
  manifest["reg"]["beta"] = reg.beta_is_mean ? json("mean") : json(reg.beta);
  manifest["init"] = {{"scheme", init_name(scheme.kind)},
                      {"fixed_variance", scheme.fixed_variance},
                      {"warnings", init.warnings}};
  if (init.coverage)
    manifest["init"]["coverage"] = {{"found", init.coverage->found},
                                    {"total", init.coverage->total}};
  manifest["inputs"] = {{"data", fs::absolute(data).lexically_normal().string()},
                        {"vocab", file_record(data / "vocab.tsv")},
                        {"train", file_record(data / "train.corpus")}};
  for (const char* split : {"valid.corpus", "test.corpus"})
    if (fs::exists(data / split)) manifest["inputs"][fs::path(split).stem().string()] =
        file_record(data / split);
  if (scheme.pretrained_path) manifest["inputs"]["pretrained"] = file_record(*scheme.pretrained_path);
  manifest["simd"] = kernels::backend_name(kernels::active().backend);
  manifest["trace"] = trace;
  json ckpt = json::object();
  for (const auto& name : written) ckpt[name] = git_blob_sha1(dir / name);
  manifest["checkpoints"] = ckpt;
  std::ofstream mf(run / "manifest.json");
  mf << manifest.dump(2) << '\n';
  std::cout << "trained " << model_name(kind) << " on " << T << " slices, L=" << words.size()
            << ", order " << direction_name(init.direction) << "; run written to " << run.string()
            << '\n';
}

// ------------------------------------------------------------------ run loading

struct LoadedRun {
  ModelKind kind = ModelKind::isg;
  std::size_t window = 4;
  fs::path data;
  std::vector<std::string> words;
  std::vector<Matrix> U;
  std::vector<Matrix> V;  // per slice for isg/dsg, one shared matrix for dbe
};

json read_manifest_json(const fs::path& run) {
  const auto path = run / "manifest.json";
  if (!fs::exists(path)) throw data_error("no run manifest at " + path.string());
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

Matrix load_checkpoint(const fs::path& path, std::vector<std::string>* words) {
  if (!fs::exists(path)) throw data_error("missing checkpoint " + path.string());
  auto wv = read_vectors(path);
  if (words && words->empty()) *words = std::move(wv.words);
  return std::move(wv.values);
}

LoadedRun load_run(const fs::path& run, bool with_context) {
  const auto m = read_manifest_json(run);
  LoadedRun r;
  try {
    r.kind = parse_model(m.at("model").get<std::string>());
    r.window = m.at("train").at("window").get<std::size_t>();
    r.data = m.at("inputs").at("data").get<std::string>();
    const auto T = m.at("num_slices").get<std::size_t>();
    const auto dir = model_dir(run, r.kind);
    const std::string u_suffix = r.kind == ModelKind::dsg ? ".mean.vec" : ".vec";
    const std::string v_suffix = r.kind == ModelKind::dsg ? ".ctx.mean.vec" : ".ctx.vec";
    for (std::size_t t = 0; t < T; ++t) {
      r.U.push_back(load_checkpoint(dir / slice_file(t, u_suffix), &r.words));
      if (with_context && r.kind != ModelKind::dbe)
        r.V.push_back(load_checkpoint(dir / slice_file(t, v_suffix), nullptr));
    }
    if (with_context && r.kind == ModelKind::dbe)
      r.V.push_back(load_checkpoint(dir / "context.vec", nullptr));
  } catch (const json::exception& e) {
    throw data_error("malformed run manifest in " + run.string() + ": " + e.what());
  }
  return r;
}

// ------------------------------------------------------------------ eval

struct EvalOptions {
  std::string run, split = "valid", data;
};

void cmd_eval(const EvalOptions& o) {
  const Split split = parse_split(o.split);
  auto r = load_run(o.run, true);
  const fs::path data = o.data.empty() ? r.data : fs::path(o.data);
  const auto corpus = load_corpus(data / (std::string(split_name(split)) + ".corpus"));
  const auto report = r.kind == ModelKind::dbe
                          ? evaluate_lpos_dbe(corpus, r.U, r.V.at(0), r.window)
                          : evaluate_lpos_sgns(corpus, r.U, r.V, r.window);
  write_lpos_report(std::cout, report, r.kind, split);
}

// ------------------------------------------------------------------ drift

struct DriftOptions {
  std::string run, out;
  std::size_t t0 = 0, bins = 60;
  double stability_threshold = 0.5;
};

void cmd_drift(const DriftOptions& o) {
  const auto r = load_run(o.run, false);
  if (o.t0 >= r.U.size())
    throw usage_error("--t0 " + std::to_string(o.t0) + " outside the " +
                      std::to_string(r.U.size()) + " slices");
  const auto series = make_drift_series(r.U, o.t0, r.kind);
  const fs::path out = o.out.empty() ? fs::path(o.run) / "analysis" : fs::path(o.out);
  fs::create_directories(out);
  {
    std::ofstream f(out / "drift.csv");
    write_drift_csv(f, series, r.words);
  }
  const auto targets = series.target_slices();
  if (!targets.empty()) {
    std::ofstream f(out / "histogram.csv");
    write_histogram_csv(f, drift_histogram(series, o.bins));
  }
  std::cout << "t\tmean_drift\tdrift_total\tstability\n";
  for (auto t : targets)
    std::cout << t << '\t' << series.mean_at(t) << '\t' << drift_total(r.U[t], r.U[o.t0]) << '\t'
              << stability_fraction(series, t, o.stability_threshold) << '\n';
  if (targets.size() >= 2)
    std::cout << "directedness\t" << directedness(series) << '\n';
  else
    std::cout << "directedness\tn/a (needs two target slices)\n";
}

// ------------------------------------------------------------------ export

struct ExportOptions {
  std::string run, out;
  std::vector<std::size_t> slices;
};

void cmd_export(const ExportOptions& o) {
  const auto r = load_run(o.run, false);
  fs::create_directories(o.out);
  std::vector<std::size_t> slices = o.slices;
  if (slices.empty())
    for (std::size_t t = 0; t < r.U.size(); ++t) slices.push_back(t);
  for (auto t : slices) {
    if (t >= r.U.size()) throw usage_error("slice " + std::to_string(t) + " does not exist");
    write_vectors(fs::path(o.out) / slice_file(t, ".vec"), r.words, r.U[t]);
  }
  std::cout << "exported " << slices.size() << " slices to " << o.out << '\n';
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Diachronic word embeddings: corpus preparation, training and drift analysis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file; [train] etc. sections hold subcommand options");
  std::string simd;
  app.add_option("--simd", simd, "Kernel backend (scalar|avx2); default picks the fastest");

  VocabOptions vo;
  auto* vocab = app.add_subcommand("build-vocab", "Build the vocabulary of a corpus manifest");
  vocab->add_option("--manifest", vo.manifest, "Corpus manifest (<timestamp>\\t<path>)")->required();
  vocab->add_option("--stopwords", vo.stopwords, "Stopword file, one per line");
  vocab->add_option("--boundaries", vo.boundaries, "Slice boundaries, one timestamp per line");
  vocab->add_option("--max-size", vo.max_size, "Vocabulary size")->capture_default_str();
  vocab->add_option("--out", vo.out, "Vocabulary file")->required();

  SliceOptions so;
  auto* slice = app.add_subcommand("slice", "Slice, encode and split a corpus");
  slice->add_option("--manifest", so.manifest, "Corpus manifest")->required();
  slice->add_option("--vocab", so.vocab, "Vocabulary file")->required();
  slice->add_option("--boundaries", so.boundaries, "Slice boundaries, one timestamp per line");
  slice->add_option("--holdout", so.holdout, "Held-out fraction per slice")->capture_default_str();
  slice->add_option("--seed", so.seed, "Split seed")->capture_default_str();
  slice->add_option("--out", so.out, "Output data directory")->required();

  SubsampleOptions uo;
  auto* sub = app.add_subcommand("subsample", "Keep a fraction of the documents of each slice");
  sub->add_option("--in", uo.in, "Input corpus file")->required();
  sub->add_option("--fraction", uo.fraction, "Fraction kept")->capture_default_str();
  sub->add_option("--seed", uo.seed, "Seed")->capture_default_str();
  sub->add_option("--out", uo.out, "Output corpus file")->required();

  SynthOptions yo;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted changes");
  synth->add_option("--out", yo.out, "Output directory")->required();
  synth->add_option("--vocab-size", yo.vocab_size)->capture_default_str();
  synth->add_option("--slices", yo.slices)->capture_default_str();
  synth->add_option("--tokens", yo.tokens, "Tokens per slice")->capture_default_str();
  synth->add_option("--planted", yo.planted, "Number of planted changes")->capture_default_str();
  synth->add_option("--kind", yo.kind, "gradual|abrupt")->capture_default_str();
  synth->add_option("--change-slice", yo.change_slice)->capture_default_str();
  synth->add_option("--topics", yo.topics)->capture_default_str();
  synth->add_option("--function-words", yo.function_words)->capture_default_str();
  synth->add_option("--function-prob", yo.function_prob)->capture_default_str();
  synth->add_option("--doc-length", yo.doc_length)->capture_default_str();
  synth->add_option("--zipf", yo.zipf, "Zipf exponent inside a topic")->capture_default_str();
  synth->add_option("--boost", yo.boost, "Planted word weight relative to a topic's top word")
      ->capture_default_str();
  synth->add_option("--first-year", yo.first_year)->capture_default_str();
  synth->add_option("--seed", yo.seed)->capture_default_str();

  TrainOptions to;
  auto* train = app.add_subcommand("train", "Train a diachronic model");
  train->add_option("--data", to.data, "Directory written by `slice`")->required();
  train->add_option("--out", to.out, "Run directory")->required();
  train->add_option("--model", to.model, "isg|dsg|dbe")->required();
  train->add_option("--init", to.init, "random|internal|backward-external")->capture_default_str();
  train->add_option("--pretrained", to.pretrained, "Pretrained vectors for backward-external");
  train->add_option("--fixed-variance", to.fixed_variance, "DSG variance under external init")
      ->capture_default_str();
  train->add_option("--dim", to.config.dim)->capture_default_str();
  train->add_option("--window", to.config.window)->capture_default_str();
  train->add_option("--ratio", to.config.negative_ratio, "Negatives per positive")
      ->capture_default_str();
  train->add_option("--lr", to.config.learning_rate)->capture_default_str();
  train->add_option("--epochs", to.config.epochs)->capture_default_str();
  train->add_option("--batch-size", to.config.batch_size)->capture_default_str();
  train->add_option("--seed", to.config.seed)->capture_default_str();
  train->add_option("--subset", to.subset, "Fraction of training documents kept")
      ->capture_default_str();
  auto* d1 = train->add_option("--diffusion", to.dsg.diffusion, "DSG D")->capture_default_str();
  auto* d2 = train->add_option("--prior-variance", to.dsg.prior_variance, "DSG D0")
                 ->capture_default_str();
  auto* d3 = train->add_option("--samples", to.dsg.samples_per_step, "DSG draws per step")
                 ->capture_default_str();
  auto* d4 = train->add_flag("--exact-entropy", to.dsg.exact_entropy, "DSG Gaussian entropy");
  auto* b1 = train->add_option("--lambda", to.dbe.lambda, "DBE drift precision")
                 ->capture_default_str();
  auto* b2 = train->add_option("--lambda0", to.dbe.lambda0, "DBE base precision")
                 ->capture_default_str();
  train->add_option("--reg-alpha", to.reg_alpha, "Drift penalty weight (0 disables)")
      ->capture_default_str();
  train->add_option("--reg-beta", to.reg_beta, "Drift threshold: a number or 'mean'")
      ->capture_default_str();
  train->add_flag("--verbose", to.verbose, "Print per-epoch training L_pos");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Held-out L_pos of a run");
  eval->add_option("--run", eo.run, "Run directory")->required();
  eval->add_option("--split", eo.split, "valid|test")->capture_default_str();
  eval->add_option("--data", eo.data, "Data directory (default: the one recorded in the run)");

  DriftOptions fo;
  auto* drift = app.add_subcommand("drift", "Per-word drift, histograms and directedness");
  drift->add_option("--run", fo.run, "Run directory")->required();
  drift->add_option("--t0", fo.t0, "Reference slice")->capture_default_str();
  drift->add_option("--bins", fo.bins, "Histogram bins")->capture_default_str();
  drift->add_option("--stability-threshold", fo.stability_threshold)->capture_default_str();
  drift->add_option("--out", fo.out, "Output directory (default: <run>/analysis)");

  ExportOptions xo;
  auto* exp = app.add_subcommand("export", "Write per-slice word vectors (DSG: means)");
  exp->add_option("--run", xo.run, "Run directory")->required();
  exp->add_option("--out", xo.out, "Output directory")->required();
  exp->add_option("--slice", xo.slices, "Slices to export (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }

  if (!simd.empty()) kernels::set_backend(kernels::parse_backend(simd));
  if (*vocab) cmd_build_vocab(vo);
  if (*slice) cmd_slice(so);
  if (*sub) cmd_subsample(uo);
  if (*synth) cmd_synth(yo);
  if (*train) {
    const ModelKind kind = parse_model(to.model);
    const bool dsg_set = d1->count() || d2->count() || d3->count() || d4->count();
    const bool dbe_set = b1->count() || b2->count();
    if (dsg_set && kind != ModelKind::dsg)
      throw usage_error("DSG parameters given for model " + to.model);
    if (dbe_set && kind != ModelKind::dbe)
      throw usage_error("DBE parameters given for model " + to.model);
    // Resolved [train] section, without the parameter block of other models.
    std::istringstream all(train->config_to_str(true, false));
    std::string resolved = "[train]\n", line;
    const std::vector<std::string> dsg_keys{"diffusion", "prior-variance", "samples",
                                            "exact-entropy"};
    const std::vector<std::string> dbe_keys{"lambda", "lambda0"};
    while (std::getline(all, line)) {
      const std::string key = line.substr(0, line.find('='));
      const bool foreign =
          (kind != ModelKind::dsg && std::count(dsg_keys.begin(), dsg_keys.end(), key)) ||
          (kind != ModelKind::dbe && std::count(dbe_keys.begin(), dbe_keys.end(), key));
      if (!foreign && key != "verbose") resolved += line + '\n';
    }
    cmd_train(to, resolved);
  }
  if (*eval) cmd_eval(eo);
  if (*drift) cmd_drift(fo);
  if (*exp) cmd_export(xo);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  }
}
