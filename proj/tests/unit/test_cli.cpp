#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path& root() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "diachron_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const auto out = root() / "stdout.txt";
  const auto err = root() / "stderr.txt";
  const std::string cmd = std::string("\"") + DIACHRON_CLI + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Synthetic corpus, vocabulary and sliced data shared by the tests.
const fs::path& data_dir() {
  static const fs::path data = [] {
    const auto corpus = root() / "corpus";
    auto r = run("synth --out " + q(corpus) +
                 " --vocab-size 80 --slices 3 --tokens 1500 --planted 1 --kind abrupt"
                 " --change-slice 1 --topics 4 --function-words 10 --seed 3");
    REQUIRE(r.code == 0);
    r = run("build-vocab --manifest " + q(corpus / "manifest.tsv") + " --boundaries " +
            q(corpus / "boundaries.txt") + " --out " + q(root() / "vocab.tsv"));
    REQUIRE(r.code == 0);
    r = run("slice --manifest " + q(corpus / "manifest.tsv") + " --vocab " +
            q(root() / "vocab.tsv") + " --boundaries " + q(corpus / "boundaries.txt") +
            " --out " + q(root() / "data"));
    REQUIRE(r.code == 0);
    return root() / "data";
  }();
  return data;
}

const std::string fast = " --dim 4 --epochs 2 --window 2 ";

json manifest(const fs::path& run_dir) { return json::parse(slurp(run_dir / "manifest.json")); }

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 1);
  CHECK(run("no-such-command").code == 1);
  CHECK(run("train --data " + q(data_dir()) + " --out x --model lstm").code == 1);
  CHECK(run("train --data " + q(data_dir()) + " --out x --model isg --lambda 2").code == 1);
  CHECK(run("train --data " + q(data_dir()) + " --out x --model isg --reg-alpha 0.5").code == 1);
  const auto r = run("train --data " + q(root() / "nowhere") + " --out x --model isg");
  CHECK(r.code == 2);
  CHECK(run("eval --run " + q(root() / "nowhere")).code == 2);
}

TEST_CASE("build-vocab reports missing documents and oversized vocabularies") {
  const auto dir = root() / "manifest_case";
  fs::create_directories(dir);
  {
    std::ofstream(dir / "a.txt") << "alpha beta gamma alpha\n";
    std::ofstream m(dir / "manifest.tsv");
    m << "2001-03-01\ta.txt\n2002-03-01\tgone.txt\n";
  }
  auto r = run("build-vocab --manifest " + q(dir / "manifest.tsv") + " --out " +
               q(dir / "vocab.tsv"));
  CHECK(r.code == 2);
  CHECK(r.err.find("gone.txt") != std::string::npos);

  {
    std::ofstream m(dir / "manifest.tsv");
    m << "2001-03-01\ta.txt\n";
  }
  r = run("build-vocab --manifest " + q(dir / "manifest.tsv") + " --max-size 100 --out " +
          q(dir / "vocab.tsv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("L=3") != std::string::npos);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(fs::exists(dir / "vocab.tsv"));
}

TEST_CASE("slice writes the three splits") {
  for (const auto* f : {"train.corpus", "valid.corpus", "test.corpus", "vocab.tsv"})
    CHECK(fs::exists(data_dir() / f));
}

TEST_CASE("training is reproducible bit for bit") {
  for (const auto* model : {"isg", "dsg", "dbe"}) {
    CAPTURE(model);
    const auto a = root() / (std::string("rep_a_") + model);
    const auto b = root() / (std::string("rep_b_") + model);
    for (const auto& dir : {a, b}) {
      const auto r = run("train --data " + q(data_dir()) + " --out " + q(dir) + " --model " +
                         model + fast + "--seed 11");
      REQUIRE(r.code == 0);
    }
    const auto ma = manifest(a), mb = manifest(b);
    CHECK(ma["checkpoints"] == mb["checkpoints"]);
    CHECK(ma["checkpoints"].size() > 0);
    for (auto& [name, sha] : ma["checkpoints"].items())
      CHECK(slurp(a / model / name) == slurp(b / model / name));
    CHECK(ma["model"] == model);
    CHECK(ma["inputs"]["train"]["sha1"].get<std::string>().size() == 40);
  }
}

TEST_CASE("backward-external DSG trains from the newest slice") {
  const auto isg = root() / "ext_isg";
  REQUIRE(run("train --data " + q(data_dir()) + " --out " + q(isg) + " --model isg" + fast)
              .code == 0);
  REQUIRE(run("export --run " + q(isg) + " --out " + q(root() / "export") + " --slice 2").code ==
          0);
  const auto vecs = root() / "export" / "t2.vec";
  REQUIRE(fs::exists(vecs));
  const auto dsg = root() / "ext_dsg";
  const auto r = run("train --data " + q(data_dir()) + " --out " + q(dsg) +
                     " --model dsg --init backward-external --pretrained " + q(vecs) + fast);
  REQUIRE(r.code == 0);
  const auto m = manifest(dsg);
  CHECK(m["direction"] == "backward");
  CHECK(m["training_order"] == json::array({2, 1, 0}));
  CHECK(m["init"]["coverage"]["found"] == m["vocab_size"]);
  CHECK(m["inputs"]["pretrained"]["sha1"].get<std::string>().size() == 40);
  // A mismatched dimension is a data error.
  CHECK(run("train --data " + q(data_dir()) + " --out " + q(root() / "ext_bad") +
            " --model dsg --init backward-external --pretrained " + q(vecs) +
            " --dim 5 --epochs 1")
            .code == 2);
}

TEST_CASE("regularized DBE records the per-epoch beta") {
  const auto dir = root() / "reg_dbe";
  const auto r = run("train --data " + q(data_dir()) + " --out " + q(dir) +
                     " --model dbe --reg-alpha 0.5 --reg-beta mean" + fast);
  REQUIRE(r.code == 0);
  const auto m = manifest(dir);
  CHECK(m["reg"]["enabled"] == true);
  CHECK(m["reg"]["beta"] == "mean");
  REQUIRE(m["trace"]["reg_beta"].size() == 2);
  CHECK(m["trace"]["reg_beta"][1].get<double>() > 0.0);
}

TEST_CASE("eval and drift outputs") {
  const auto dir = root() / "analysis_run";
  REQUIRE(run("train --data " + q(data_dir()) + " --out " + q(dir) + " --model isg" + fast)
              .code == 0);
  const auto e = run("eval --run " + q(dir) + " --split test");
  CHECK(e.code == 0);
  CHECK(e.out.find("mean") != std::string::npos);

  const auto d = run("drift --run " + q(dir) + " --bins 1");
  REQUIRE(d.code == 0);
  CHECK(d.out.find("directedness") != std::string::npos);
  const std::size_t L = manifest(dir)["vocab_size"];
  std::istringstream drift(slurp(dir / "analysis" / "drift.csv"));
  std::string line;
  std::getline(drift, line);
  CHECK(line == "word,t,drift");
  std::size_t rows = 0, t0_rows = 0;
  while (std::getline(drift, line)) {
    ++rows;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (line.substr(c1 + 1, c2 - c1 - 1) == "0") {
      ++t0_rows;
      CHECK(line.substr(c2 + 1) == "0");
    }
  }
  CHECK(rows == 3 * L);
  CHECK(t0_rows == L);

  std::istringstream hist(slurp(dir / "analysis" / "histogram.csv"));
  std::getline(hist, line);
  CHECK(line == "bin_lo,bin_hi,t,count");
  std::size_t hist_rows = 0;
  while (std::getline(hist, line)) {
    ++hist_rows;
    CHECK(std::stoul(line.substr(line.rfind(',') + 1)) == L);
  }
  CHECK(hist_rows == 2);
}

TEST_CASE("config file values apply and flags win") {
  const auto cfg = root() / "run.ini";
  {
    std::ofstream f(cfg);
    f << "[train]\nmodel=isg\ndim=3\nepochs=2\nwindow=1\nseed=5\n";
  }
  const auto dir = root() / "cfg_run";
  auto r = run("--config " + q(cfg) + " train --data " + q(data_dir()) + " --out " + q(dir) +
               " --dim 5");
  REQUIRE(r.code == 0);
  auto m = manifest(dir);
  CHECK(m["train"]["dim"] == 5);
  CHECK(m["train"]["epochs"] == 2);
  CHECK(m["train"]["window"] == 1);

  // The run's own config reproduces it.
  const auto again = root() / "cfg_again";
  r = run("--config " + q(dir / "config.ini") + " train --out " + q(again));
  REQUIRE(r.code == 0);
  CHECK(manifest(again)["checkpoints"] == m["checkpoints"]);
}
