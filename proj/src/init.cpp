#include "diachron/init.hpp"

#include "diachron/error.hpp"
#include "diachron/isg.hpp"
#include "diachron/vec_io.hpp"

namespace diachron {

std::string_view init_name(InitKind k) {
  switch (k) {
    case InitKind::random: return "random";
    case InitKind::internal: return "internal";
    case InitKind::backward_external: return "backward-external";
  }
  return "random";
}

InitKind parse_init(std::string_view name) {
  if (name == "random") return InitKind::random;
  if (name == "internal") return InitKind::internal;
  if (name == "backward-external" || name == "backward_external")
    return InitKind::backward_external;
  throw usage_error("unknown init scheme: " + std::string(name));
}

void InitScheme::validate() const {
  if (kind == InitKind::backward_external && !pretrained_path)
    throw usage_error("backward-external init requires a pretrained vector file");
  if (!(fixed_variance > 0.0)) throw usage_error("external init variance must be > 0");
}

namespace {

Matrix normal_matrix(std::size_t L, std::size_t d, double stddev, Rng& rng) {
  Matrix m(L, d);
  std::normal_distribution<double> normal(0.0, stddev);
  for (double& x : m.values()) x = normal(rng);
  return m;
}

}  // namespace

Initialization init_random(std::size_t L, std::size_t d, std::uint64_t seed, ModelKind kind) {
  if (L < 1 || d < 1) throw usage_error("init_random: L and d must be >= 1");
  Initialization init;
  if (kind == ModelKind::dsg) {
    init.U = Matrix(L, d, 0.0);
    init.V = Matrix(L, d, 0.0);
    init.U_variance = Matrix(L, d, 1.0);
    init.V_variance = Matrix(L, d, 1.0);
  } else {
    Rng rng(derive_seed(seed, {0x1a17}));
    init.U = normal_matrix(L, d, 1.0, rng);
    init.V = normal_matrix(L, d, 1.0, rng);
  }
  return init;
}

Initialization init_internal(const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                             const TrainConfig& config, ModelKind kind,
                             const ModelParams& params) {
  const auto pooled = corpus.pooled();
  if (pooled.num_tokens() == 0) throw data_error("internal init: empty corpus");
  const std::size_t L = noise.probabilities().size();
  TrainConfig static_config = config;
  static_config.seed = derive_seed(config.seed, {0x57a7});
  auto init = init_random(L, config.dim, static_config.seed, kind);
  switch (kind) {
    case ModelKind::isg: {
      auto r = train_slice(pooled.slices[0], noise, init.U, init.V, static_config, 0);
      init.U = std::move(r.U);
      init.V = std::move(r.V);
      break;
    }
    case ModelKind::dsg: {
      const auto anchor = anchor_prior(L, config.dim, params.dsg.prior_variance);
      auto r = dsg_optimize_slice(pooled.slices[0], noise, anchor, anchor, init.gaussian_U(),
                                  init.gaussian_V(), params.dsg, static_config, 0);
      init.U = std::move(r.U.mean);
      init.U_variance = std::move(r.U.variance);
      init.V = std::move(r.V.mean);
      init.V_variance = std::move(r.V.variance);
      break;
    }
    case ModelKind::dbe: {
      auto r = train_dbe(pooled, noise, {init.U}, init.V, params.dbe, static_config);
      init.U = std::move(r.model.U[0]);
      init.V = std::move(r.model.V);
      break;
    }
  }
  return init;
}

PretrainedMatrix load_pretrained(const std::filesystem::path& path,
                                 const std::vector<std::string>& vocab_words, std::size_t dim,
                                 std::uint64_t oov_seed) {
  const auto wv = read_vectors(path);
  if (wv.values.cols() != dim)
    throw data_error("pretrained vectors in " + path.string() + " have dimension " +
                     std::to_string(wv.values.cols()) + ", expected " + std::to_string(dim));
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < wv.words.size(); ++r) row_of.emplace(wv.words[r], r);

  PretrainedMatrix out;
  out.values = Matrix(vocab_words.size(), dim);
  out.coverage.total = vocab_words.size();
  Rng rng(derive_seed(oov_seed, {0x00f}));
  std::normal_distribution<double> normal(0.0, 0.1);
  for (WordId i = 0; i < vocab_words.size(); ++i) {
    auto row = out.values.row(i);
    if (auto it = row_of.find(vocab_words[i]); it != row_of.end()) {
      const auto src = wv.values.row(it->second);
      std::copy(src.begin(), src.end(), row.begin());
      ++out.coverage.found;
    } else {
      for (double& x : row) x = normal(rng);
      out.missing.push_back(i);
    }
  }
  return out;
}

Initialization apply_scheme(const InitScheme& scheme, ModelKind kind,
                            const TimeSlicedCorpus& corpus, const NoiseDistribution& noise,
                            const std::vector<std::string>& vocab_words,
                            const TrainConfig& config, const ModelParams& params) {
  scheme.validate();
  config.validate();
  const std::size_t L = vocab_words.size();
  Initialization init;
  switch (scheme.kind) {
    case InitKind::random:
      init = init_random(L, config.dim, config.seed, kind);
      break;
    case InitKind::internal:
      init = init_internal(corpus, noise, config, kind, params);
      break;
    case InitKind::backward_external: {
      auto pre = load_pretrained(*scheme.pretrained_path, vocab_words, config.dim,
                                 derive_seed(config.seed, {0x0e7}));
      init.U = pre.values;
      init.V = std::move(pre.values);
      init.coverage = pre.coverage;
      if (kind == ModelKind::dsg) {
        init.U_variance = Matrix(L, config.dim, scheme.fixed_variance);
        init.V_variance = Matrix(L, config.dim, scheme.fixed_variance);
      }
      init.direction = Direction::backward;
      break;
    }
  }
  if (scheme.kind != InitKind::backward_external && scheme.pretrained_path)
    init.warnings.push_back("init scheme '" + std::string(init_name(scheme.kind)) +
                            "' ignores the pretrained vector file " +
                            scheme.pretrained_path->string());
  return init;
}

}  // namespace diachron
