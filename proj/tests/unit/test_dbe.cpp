#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "diachron/analysis.hpp"
#include "diachron/dbe.hpp"
#include "diachron/error.hpp"
#include "diachron/kernels.hpp"
#include "diachron/sgns.hpp"
#include "diachron/synth.hpp"
#include "support.hpp"

using namespace diachron;
using namespace testing;

namespace {

DbeBatch random_dbe_batch(std::size_t L, std::size_t n, std::size_t slice, std::mt19937_64& rng) {
  std::uniform_int_distribution<WordId> w(0, static_cast<WordId>(L - 1));
  std::uniform_int_distribution<std::size_t> width(1, 3);
  std::bernoulli_distribution pos(0.5);
  DbeBatch b;
  b.slice = slice;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<WordId> ctx(width(rng));
    for (auto& c : ctx) c = w(rng);
    b.push(w(rng), ctx, pos(rng) ? Label::positive : Label::negative);
  }
  return b;
}

std::vector<Matrix> random_slices(std::size_t T, std::size_t L, std::size_t d,
                                  std::mt19937_64& rng) {
  std::vector<Matrix> U;
  for (std::size_t t = 0; t < T; ++t) U.push_back(random_matrix(L, d, rng, 0.5));
  return U;
}

// Scalar-loop oracle for the prior.
double prior_oracle(const std::vector<Matrix>& U, const Matrix& V, double lambda, double lambda0) {
  long double s = 0.0L;
  for (double x : V.values()) s -= 0.5L * lambda0 * x * x;
  for (double x : U[0].values()) s -= 0.5L * lambda0 * x * x;
  for (std::size_t t = 1; t < U.size(); ++t)
    for (std::size_t i = 0; i < U[t].size(); ++i) {
      const long double diff = U[t].values()[i] - U[t - 1].values()[i];
      s -= 0.5L * lambda * diff * diff;
    }
  return static_cast<double>(s);
}

// Synthetic slices with identical text, or with each slice's tokens permuted
// independently.
TimeSlicedCorpus synth_slices(std::size_t T, bool shuffled, Vocabulary& vocab) {
  auto spec = make_synth_spec(80, 1, 3000, 4, 0, ChangeKind::abrupt, 1, 4, 10);
  const auto sc = generate(spec);
  vocab = Vocabulary::from_words(sc.words, sc.text);
  const auto base = encode(sc.text, vocab).slices[0];
  TimeSlicedCorpus corpus;
  for (std::size_t t = 0; t < T; ++t) {
    auto docs = base;
    if (shuffled) {
      std::vector<WordId> flat;
      for (const auto& d : docs) flat.insert(flat.end(), d.begin(), d.end());
      std::mt19937_64 rng(100 + t);
      std::shuffle(flat.begin(), flat.end(), rng);
      std::size_t k = 0;
      for (auto& d : docs)
        for (auto& w : d) w = flat[k++];
    }
    corpus.slices.push_back(std::move(docs));
  }
  return corpus;
}

}  // namespace

TEST_CASE("positional logit examples") {
  Matrix U(3, 2), V(3, 2);
  const std::vector<WordId> ctx{0, 1, 2};
  CHECK(dbe_positional_logit(0, ctx, U, V) == 0.0);
  CHECK(sigmoid(dbe_positional_logit(0, ctx, U, V)) == 0.5);
  CHECK_THROWS_AS(dbe_positional_logit(0, {}, U, V), Error);

  std::mt19937_64 rng(1);
  const auto U1 = random_matrix(4, 3, rng), V1 = random_matrix(4, 3, rng);
  const std::vector<WordId> one{2};
  CHECK(dbe_positional_logit(1, one, U1, V1) == kernels::dot(U1.row(1), V1.row(2)));

  U(0, 0) = 0.3;
  U(0, 1) = -1.2;
  V(0, 0) = 0.5;
  V(0, 1) = 2.0;
  V(1, 0) = -0.7;
  V(1, 1) = 0.25;
  V(2, 0) = 1.5;
  V(2, 1) = -0.4;
  double oracle = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    double s = 0.0;
    for (WordId j : ctx) s += V(j, k);
    oracle += U(0, k) * s;
  }
  CHECK(std::abs(dbe_positional_logit(0, ctx, U, V) - oracle) <= 1e-12);
}

TEST_CASE("prior closed-form values") {
  DbeParams p;
  std::vector<Matrix> U{Matrix(1, 2)};
  Matrix V(1, 2);
  CHECK(dbe_prior(U, V, p) == 0.0);
  V(0, 0) = 1.0;
  CHECK(std::abs(dbe_prior(U, V, p) - (-0.005)) <= 1e-12);

  std::mt19937_64 rng(2);
  const auto base = random_matrix(5, 3, rng);
  const std::vector<Matrix> same(4, base);
  const auto Vr = random_matrix(5, 3, rng);
  for (double lambda : {0.1, 1.0, 1e6}) {
    DbeParams q;
    q.lambda = lambda;
    const std::vector<Matrix> first{base};
    CHECK(dbe_prior(same, Vr, q) == dbe_prior(first, Vr, q));
  }

  for (int k = 0; k < 20; ++k) {
    const auto Uk = random_slices(3, 4, 2, rng);
    const auto Vk = random_matrix(4, 2, rng);
    DbeParams q;
    q.lambda = 0.7;
    q.lambda0 = 0.05;
    CHECK(relative_error(dbe_prior(Uk, Vk, q), prior_oracle(Uk, Vk, 0.7, 0.05), 1e-300) <= 1e-12);
  }
}

TEST_CASE("prior is nonpositive and vanishes only at zero") {
  std::mt19937_64 rng(3);
  DbeParams p;
  for (int k = 0; k < 200; ++k) {
    auto U = random_slices(3, 3, 2, rng);
    auto V = random_matrix(3, 2, rng);
    CHECK(dbe_prior(U, V, p) < 0.0);
  }
  std::vector<Matrix> U(3, Matrix(3, 2));
  Matrix V(3, 2);
  CHECK(dbe_prior(U, V, p) == 0.0);
  // Any single nonzero entry, in any block, makes it strictly negative.
  for (std::size_t t = 0; t < 3; ++t) {
    U[t](1, 1) = 1e-3;
    CHECK(dbe_prior(U, V, p) < 0.0);
    U[t](1, 1) = 0.0;
  }
  V(2, 0) = -1e-3;
  CHECK(dbe_prior(U, V, p) < 0.0);
  const DbeParams no_drift{0.0, 1.0}, negative_base{1.0, -1.0};
  CHECK_THROWS_AS(no_drift.validate(), Error);
  CHECK_THROWS_AS(negative_base.validate(), Error);
}

TEST_CASE("loss examples") {
  DbeParams p;
  std::vector<Matrix> U(2, Matrix(3, 2));
  Matrix V(3, 2);
  CHECK(dbe_loss({}, U, V, p).total() == 0.0);

  std::mt19937_64 rng(4);
  auto Ur = random_slices(2, 3, 2, rng);
  auto Vr = random_matrix(3, 2, rng);
  // Context {1} with v_1 = 0 gives a zero logit.
  for (std::size_t k = 0; k < 2; ++k) Vr(1, k) = 0.0;
  DbeBatch b;
  b.slice = 1;
  const std::vector<WordId> ctx{1};
  b.push(0, ctx, Label::positive);
  const auto loss = dbe_loss({b}, Ur, Vr, p);
  CHECK(std::abs(loss.positive - (-std::numbers::ln2)) <= 1e-15);
  CHECK(loss.negative == 0.0);
  CHECK(loss.prior == dbe_prior(Ur, Vr, p));
  CHECK(std::abs(loss.total() - (-std::numbers::ln2 + dbe_prior(Ur, Vr, p))) <= 1e-15);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pickL(2, 8), pickd(1, 5), pickT(1, 3);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int inst = 0; inst < 120; ++inst) {
    const std::size_t L = pickL(rng), d = pickd(rng), T = pickT(rng);
    auto U = random_slices(T, L, d, rng);
    auto V = random_matrix(L, d, rng, 0.5);
    DbeParams p;
    p.lambda = 0.8;
    p.lambda0 = 0.3;
    std::vector<DbeBatch> batches;
    for (std::size_t t = 0; t < T; ++t) batches.push_back(random_dbe_batch(L, 6, t, rng));
    const auto g = dbe_gradients(batches, U, V, p);
    auto f = [&] { return dbe_loss(batches, U, V, p).total(); };
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t k = 0; k < U[t].size(); ++k) {
        const double num = central_difference(f, &U[t].values()[k]);
        worst = std::max(worst, relative_error(g.dU[t].values()[k], num));
        ++checked;
      }
    for (std::size_t k = 0; k < V.size(); ++k) {
      const double num = central_difference(f, &V.values()[k]);
      worst = std::max(worst, relative_error(g.dV.values()[k], num));
      ++checked;
    }
  }
  CHECK(checked > 1000);
  CHECK(worst < 1e-4);
}

TEST_CASE("batch fractions of one epoch add up to the full prior") {
  std::mt19937_64 rng(6);
  const auto U = random_slices(3, 6, 4, rng);
  const auto V = random_matrix(6, 4, rng);
  DbeParams p;
  // Uneven batch sizes as produced by a round-robin epoch.
  const std::vector<std::size_t> sizes{64, 64, 64, 17, 64, 3, 64, 64, 41};
  std::size_t total = 0;
  for (auto s : sizes) total += s;

  const double full = dbe_prior(U, V, p);
  double summed = 0.0;
  std::vector<Matrix> gU(3, Matrix(6, 4)), fU(3, Matrix(6, 4));
  Matrix gV(6, 4), fV(6, 4);
  for (auto s : sizes) {
    const double frac = prior_fraction(s, total);
    summed += frac * full;
    add_dbe_prior_gradient(U, V, p, frac, gU, gV);
  }
  add_dbe_prior_gradient(U, V, p, 1.0, fU, fV);
  CHECK(relative_error(summed, full, 1e-300) <= 1e-9);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t k = 0; k < fU[t].size(); ++k)
      CHECK(relative_error(gU[t].values()[k], fU[t].values()[k], 1e-300) <= 1e-9);
  for (std::size_t k = 0; k < fV.size(); ++k)
    CHECK(relative_error(gV.values()[k], fV.values()[k], 1e-300) <= 1e-9);
  CHECK(prior_fraction(0, 0) == 1.0);
}

TEST_CASE("positives carry clipped context windows") {
  const std::vector<Document> docs{{1, 2, 3, 4}, {5}, {6, 7}};
  const auto b = dbe_positives(docs, 1, 2);
  CHECK(b.slice == 2);
  REQUIRE(b.size() == 6);
  CHECK(b.centers == std::vector<WordId>{1, 2, 3, 4, 6, 7});
  CHECK(std::vector<WordId>(b.context(0).begin(), b.context(0).end()) == std::vector<WordId>{2});
  CHECK(std::vector<WordId>(b.context(1).begin(), b.context(1).end()) ==
        std::vector<WordId>{1, 3});
  CHECK(std::vector<WordId>(b.context(5).begin(), b.context(5).end()) == std::vector<WordId>{6});
  for (auto l : b.labels) CHECK(l == Label::positive);
}

TEST_CASE("a single slice has no drift term and is deterministic") {
  std::mt19937_64 rng(7);
  Vocabulary vocab;
  const auto corpus = synth_slices(1, false, vocab);
  const std::size_t L = vocab.size();
  TrainConfig c;
  c.dim = 6;
  c.epochs = 3;
  c.window = 2;
  const NoiseDistribution noise(vocab.total_counts());
  const std::vector<Matrix> U{random_matrix(L, 6, rng, 0.1)};
  const auto V = random_matrix(L, 6, rng, 0.1);
  DbeParams a, b;
  b.lambda = 1e6;
  const auto ra = train_dbe(corpus, noise, U, V, a, c);
  const auto rb = train_dbe(corpus, noise, U, V, b, c);
  CHECK(ra.model.U[0] == rb.model.U[0]);
  CHECK(ra.model.V == rb.model.V);
  const auto again = train_dbe(corpus, noise, U, V, a, c);
  CHECK(again.model.U[0] == ra.model.U[0]);
  CHECK(again.model.V == ra.model.V);
  REQUIRE(ra.epoch_loss.size() == 3);
  CHECK(ra.epoch_loss.back().total() > ra.epoch_loss.front().total());
  CHECK(ra.train_lpos[0].size() == 3);
}

namespace {

struct PairedRuns {
  DbeTrainResult same, shuffled;
};

// Identical-text and shuffled-text corpora trained from the same start. At
// lr 0.1 the Adam step noise alone moves every row by O(1), so a smaller
// step is used to expose the data signal.
PairedRuns paired_runs(std::size_t T) {
  Vocabulary vocab;
  const auto same = synth_slices(T, false, vocab);
  const auto shuffled = synth_slices(T, true, vocab);
  const std::size_t L = vocab.size();
  TrainConfig c;
  c.dim = 8;
  c.epochs = 10;
  c.window = 2;
  c.learning_rate = 0.01;
  const NoiseDistribution noise(vocab.total_counts());
  std::mt19937_64 rng(8);
  const auto U0 = random_matrix(L, 8, rng, 0.1);
  const auto V0 = random_matrix(L, 8, rng, 0.1);
  const std::vector<Matrix> U(T, U0);
  return {train_dbe(same, noise, U, V0, DbeParams{}, c),
          train_dbe(shuffled, noise, U, V0, DbeParams{}, c)};
}

}  // namespace

TEST_CASE("identical slices drift less than independently shuffled slices") {
  const std::size_t T = 3;
  const auto runs = paired_runs(T);
  const auto ds = compute_drift(runs.same.model.U[T - 1], runs.same.model.U[0]);
  auto dx = compute_drift(runs.shuffled.model.U[T - 1], runs.shuffled.model.U[0]);
  std::sort(dx.begin(), dx.end());
  const double p10 = dx[dx.size() / 10];
  CHECK(*std::max_element(ds.begin(), ds.end()) < p10);
}

TEST_CASE("identical slices keep most words at near-zero drift") {
  const std::size_t T = 3;
  const auto runs = paired_runs(T);
  const auto series = make_drift_series(runs.same.model.U, 0, ModelKind::dbe);
  CHECK(stability_fraction(series, T - 1, 0.1) > 0.5);
}

TEST_CASE("non-finite loss aborts with its location") {
  TimeSlicedCorpus corpus;
  corpus.slices = {{}, {{1, 0, 1}}};
  TrainConfig c;
  c.dim = 2;
  c.epochs = 1;
  std::vector<Matrix> U(2, Matrix(2, 2, 1.0));
  U[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
  const Matrix V(2, 2, 1.0);
  const NoiseDistribution noise(std::vector<std::uint64_t>{1, 1});
  try {
    train_dbe(corpus, noise, U, V, DbeParams{}, c);
    FAIL("expected a numerical error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical);
    CHECK(std::string(e.what()).find("slice 1") != std::string::npos);
  }
}

TEST_CASE("regularized training records beta and zero alpha changes nothing") {
  std::mt19937_64 rng(9);
  Vocabulary vocab;
  const auto corpus = synth_slices(3, true, vocab);
  const std::size_t L = vocab.size();
  TrainConfig c;
  c.dim = 4;
  c.epochs = 3;
  const NoiseDistribution noise(vocab.total_counts());
  const std::vector<Matrix> U(3, random_matrix(L, 4, rng, 0.1));
  const auto V = random_matrix(L, 4, rng, 0.1);
  const auto plain = train_dbe(corpus, noise, U, V, DbeParams{}, c);
  RegConfig off;
  off.enabled = true;
  off.alpha = 0.0;
  const auto zero = train_dbe(corpus, noise, U, V, DbeParams{}, c, off);
  for (std::size_t t = 0; t < 3; ++t) CHECK(zero.model.U[t] == plain.model.U[t]);
  CHECK(zero.reg_beta.empty());

  RegConfig on;
  on.enabled = true;
  on.alpha = 0.5;
  on.beta_is_mean = true;
  const auto reg = train_dbe(corpus, noise, U, V, DbeParams{}, c, on);
  REQUIRE(reg.reg_beta.size() == 3);
  CHECK(reg.reg_beta[0] == 0.0);  // all slices start equal
  CHECK(reg.reg_beta[1] > 0.0);
  CHECK(reg.model.U[2] != plain.model.U[2]);
}
