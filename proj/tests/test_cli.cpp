#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

const char* cliPath() { return LSTMABC_CLI_PATH; }

struct RunResult {
  int exitCode = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult runCli(const fs::path& dir, const std::string& args) {
  const fs::path outFile = dir / "stdout.txt";
  const fs::path errFile = dir / "stderr.txt";
  const std::string cmd = std::string(cliPath()) + " " + args + " >" + outFile.string() + " 2>" +
                          errFile.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(outFile);
  r.err = slurp(errFile);
  return r;
}

fs::path freshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lstmabc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int countLinesStartingWith(const std::string& text, const std::string& prefix) {
  std::istringstream ss(text);
  int count = 0;
  for (std::string line; std::getline(ss, line);)
    if (line.rfind(prefix, 0) == 0) ++count;
  return count;
}

// tiny shared corpus + embedding setup used by several cases
struct Workspace {
  fs::path dir;
  fs::path data;
  fs::path table;
};

Workspace makeWorkspace(const std::string& name) {
  Workspace w;
  w.dir = freshDir(name);
  w.data = w.dir / "data.tsv";
  w.table = w.dir / "emb.txt";
  RunResult gen = runCli(w.dir, "generate --out " + w.data.string() +
                                    " --templates 8 --copies 2 --vocab 20 --noise 0.15 --seed 7");
  REQUIRE(gen.exitCode == 0);
  RunResult embed = runCli(w.dir, "embed --data " + w.data.string() + " --out " +
                                      w.table.string() + " --dim 6 --embed-epochs 2 --seed 7");
  REQUIRE(embed.exitCode == 0);
  return w;
}

const std::string tinyTrainFlags =
    " --hidden 3 --ffn-hidden 6 --epochs 3 --lr 0.05 --abc-pop 4 --abc-evals 30"
    " --fitness-subsample 8";

}  // namespace

TEST_CASE("cli generate is deterministic and reports class balance") {
  const fs::path dir = freshDir("generate");
  const fs::path out = dir / "a.tsv";
  const std::string cmd =
      "generate --out " + out.string() + " --templates 20 --copies 3 --vocab 30 --seed 7";
  const RunResult r1 = runCli(dir, cmd);
  CHECK(r1.exitCode == 0);
  const std::string firstRun = slurp(out);
  const RunResult r2 = runCli(dir, cmd);  // identical flag set
  CHECK(r2.exitCode == 0);
  CHECK(firstRun == slurp(out));
  CHECK(r1.out.find("positives=60") != std::string::npos);
  CHECK(r1.out.find("negatives=180") != std::string::npos);
  CHECK(r1.out.find("ratio=3") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli rejects invalid arguments with exit 1") {
  const fs::path dir = freshDir("usage");
  const RunResult r = runCli(dir, "generate --out x.tsv --templates -3");
  CHECK(r.exitCode == 1);
  CHECK(r.err.rfind("error: usage:", 0) == 0);
  const RunResult unknown = runCli(dir, "frobnicate");
  CHECK(unknown.exitCode == 1);
  fs::remove_all(dir);
}

TEST_CASE("cli embed writes the requested dimension and is seed-stable") {
  const Workspace w = makeWorkspace("embed");
  std::istringstream table(slurp(w.table));
  std::string line;
  while (std::getline(table, line))
    if (!line.empty() && line[0] != '#') break;
  std::istringstream header(line);
  std::size_t vocab = 0, dim = 0;
  header >> vocab >> dim;
  CHECK(dim == 6);
  CHECK(vocab > 0);

  const fs::path again = w.dir / "emb2.txt";
  const RunResult r = runCli(w.dir, "embed --data " + w.data.string() + " --out " +
                                        again.string() + " --dim 6 --embed-epochs 2 --seed 7");
  CHECK(r.exitCode == 0);
  // identical apart from the echoed --out path in the audit header
  auto stripAudit = [](const std::string& text) {
    std::istringstream ss(text);
    std::string out;
    for (std::string l; std::getline(ss, l);)
      if (l.empty() || l[0] != '#') out += l + '\n';
    return out;
  };
  CHECK(stripAudit(slurp(w.table)) == stripAudit(slurp(again)));
  fs::remove_all(w.dir);
}

TEST_CASE("cli embed fails cleanly on a missing input file") {
  const fs::path dir = freshDir("embed_missing");
  const RunResult r =
      runCli(dir, "embed --data " + (dir / "absent.tsv").string() + " --out " +
                      (dir / "emb.txt").string());
  CHECK(r.exitCode == 2);
  CHECK(r.err.rfind("error: data:", 0) == 0);
  CHECK(r.err.find("absent.tsv") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli train with lr 0 keeps the random initialization") {
  const Workspace w = makeWorkspace("train_lr0");
  const fs::path m1 = w.dir / "m1.txt";
  const fs::path m2 = w.dir / "m2.txt";
  // different epoch counts cannot matter when lr == 0
  const std::string base = "train --data " + w.data.string() + " --embeddings " +
                           w.table.string() + " --init random --lr 0 --hidden 3 --ffn-hidden 6" +
                           " --augment-copies 0 --seed 3 --out ";
  const RunResult r1 = runCli(w.dir, base + m1.string() + " --epochs 2");
  const RunResult r2 = runCli(w.dir, base + m2.string() + " --epochs 9");
  REQUIRE(r1.exitCode == 0);
  REQUIRE(r2.exitCode == 0);
  auto paramsOnly = [](const std::string& text) {
    return text.substr(text.find("\nparams"));
  };
  CHECK(paramsOnly(slurp(m1)) == paramsOnly(slurp(m2)));
  fs::remove_all(w.dir);
}

TEST_CASE("cli train with abc init writes a monotone optimizer history") {
  const Workspace w = makeWorkspace("train_abc");
  const fs::path model = w.dir / "model.txt";
  const fs::path hist = w.dir / "abc.txt";
  const RunResult r =
      runCli(w.dir, "train --data " + w.data.string() + " --embeddings " + w.table.string() +
                        " --init abc --out " + model.string() + " --abc-history " + hist.string() +
                        tinyTrainFlags + " --seed 5");
  REQUIRE(r.exitCode == 0);
  std::istringstream ss(slurp(hist));
  double prev = -1.0;
  int rows = 0;
  for (std::string line; std::getline(ss, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::size_t cycle;
    double fitness;
    std::uint64_t evals;
    REQUIRE((row >> cycle >> fitness >> evals));
    CHECK(fitness >= prev);
    prev = fitness;
    ++rows;
  }
  CHECK(rows >= 1);
  fs::remove_all(w.dir);
}

TEST_CASE("cli train is byte-reproducible for a fixed seed") {
  const Workspace w = makeWorkspace("train_repro");
  const fs::path m1 = w.dir / "m1.txt";
  const fs::path m2 = w.dir / "m2.txt";
  const std::string base = "train --data " + w.data.string() + " --embeddings " +
                           w.table.string() + " --init abc" + tinyTrainFlags + " --seed 11 --out ";
  REQUIRE(runCli(w.dir, base + m1.string()).exitCode == 0);
  REQUIRE(runCli(w.dir, base + m2.string()).exitCode == 0);
  auto paramsOnly = [](const std::string& text) {
    return text.substr(text.find("\nparams"));
  };
  CHECK(paramsOnly(slurp(m1)) == paramsOnly(slurp(m2)));
  fs::remove_all(w.dir);
}

TEST_CASE("cli eval single-split and cross-validation reports") {
  const Workspace w = makeWorkspace("eval");
  const fs::path model = w.dir / "model.txt";
  REQUIRE(runCli(w.dir, "train --data " + w.data.string() + " --embeddings " + w.table.string() +
                            " --init random" + tinyTrainFlags + " --seed 2 --out " +
                            model.string())
              .exitCode == 0);

  const fs::path single = w.dir / "single.txt";
  const RunResult r1 =
      runCli(w.dir, "eval --data " + w.data.string() + " --embeddings " + w.table.string() +
                        " --model " + model.string() + " --report " + single.string() +
                        " --epsilon 0.515");
  REQUIRE(r1.exitCode == 0);
  const std::string singleText = slurp(single);
  CHECK(singleText.find("epsilon=0.515") != std::string::npos);  // audit header
  CHECK(countLinesStartingWith(singleText, "recall\t") == 1);

  const fs::path cv = w.dir / "cv.txt";
  const RunResult r2 = runCli(w.dir, "eval --data " + w.data.string() + " --cv 3 --init random" +
                                         tinyTrainFlags +
                                         " --dim 6 --embed-epochs 2 --seed 2 --report " +
                                         cv.string());
  REQUIRE(r2.exitCode == 0);
  const std::string cvText = slurp(cv);
  // one per-fold row per metric
  CHECK(countLinesStartingWith(cvText, "fold\t") == 9);
  std::istringstream ss(cvText);
  int recallFolds = 0;
  for (std::string line; std::getline(ss, line);)
    if (line.rfind("fold\t", 0) == 0 && line.find("\trecall\t") != std::string::npos)
      ++recallFolds;
  CHECK(recallFolds == 3);
  fs::remove_all(w.dir);
}

TEST_CASE("cli eval reports an undefined-recall fold as a data error") {
  const fs::path dir = freshDir("eval_norecall");
  const fs::path data = dir / "neg.tsv";
  {
    std::ofstream out(data);
    for (int i = 0; i < 12; ++i)
      out << "alpha b" << i << "\tgamma d" << i << "\t0\n";  // negatives only
  }
  const RunResult r = runCli(dir, "eval --data " + data.string() + " --cv 3 --init random" +
                                      tinyTrainFlags + " --dim 6 --embed-epochs 1 --seed 1" +
                                      " --augment-copies 0 --report " + (dir / "r.txt").string());
  CHECK(r.exitCode == 2);
  CHECK(r.err.rfind("error: data:", 0) == 0);
  CHECK(r.err.find("fold") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli compare emits paired rows and is reproducible") {
  const Workspace w = makeWorkspace("compare");
  const fs::path r1 = w.dir / "cmp1.txt";
  const fs::path r2 = w.dir / "cmp2.txt";
  const std::string base = "compare --data " + w.data.string() + " --cv 3 --runs 2" +
                           tinyTrainFlags + " --dim 6 --embed-epochs 2 --seed 9 --report ";
  REQUIRE(runCli(w.dir, base + r1.string()).exitCode == 0);
  REQUIRE(runCli(w.dir, base + r2.string()).exitCode == 0);

  const std::string text = slurp(r1);
  CHECK(text.find("folds_identical\ttrue") != std::string::npos);
  CHECK(countLinesStartingWith(text, "arm\tabc\t") == 3);
  CHECK(countLinesStartingWith(text, "arm\trandom\t") == 3);
  CHECK(countLinesStartingWith(text, "diff\t") == 3);
  CHECK(countLinesStartingWith(text, "seed\t") == 6);  // 2 seeds x 3 metrics

  auto stripAudit = [](const std::string& t) {
    std::istringstream ss(t);
    std::string out;
    for (std::string l; std::getline(ss, l);)
      if (l.empty() || l[0] != '#') out += l + '\n';
    return out;
  };
  CHECK(stripAudit(text) == stripAudit(slurp(r2)));
  fs::remove_all(w.dir);
}

TEST_CASE("cli gradcheck passes by default and fails at an impossible tolerance") {
  const fs::path dir = freshDir("gradcheck");
  const RunResult ok = runCli(dir, "gradcheck --seed 3");
  CHECK(ok.exitCode == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);
  CHECK(countLinesStartingWith(ok.out, "group blstm1.fwd") == 1);
  CHECK(countLinesStartingWith(ok.out, "group attn2") == 1);
  CHECK(countLinesStartingWith(ok.out, "group ffn0") == 1);

  const RunResult fail = runCli(dir, "gradcheck --seed 3 --tolerance 1e-12");
  CHECK(fail.exitCode == 3);
  CHECK(fail.out.find("FAIL") != std::string::npos);
  CHECK(fail.out.find("overall max_rel_err") != std::string::npos);
  fs::remove_all(dir);
}
