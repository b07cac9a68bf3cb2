// Command-line front end for the similarity pipeline: synthetic data
// generation, skip-gram embedding, bee-colony-seeded training, evaluation,
// the init-mode comparison experiment, and gradient checking.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical divergence or a
// failed gradient check.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lstmabc/abc.hpp"
#include "lstmabc/corpus.hpp"
#include "lstmabc/embedding.hpp"
#include "lstmabc/evaluation.hpp"
#include "lstmabc/model.hpp"
#include "lstmabc/numerics.hpp"
#include "lstmabc/trainer.hpp"

namespace {

using namespace lstmabc;

int gExitCode = 0;

std::vector<std::string> auditLines(const CLI::App& sub) {
  std::vector<std::string> lines;
  lines.push_back("command: " + sub.get_name());
  std::istringstream ss(sub.config_to_str(true, false));
  for (std::string l; std::getline(ss, l);)
    if (!l.empty()) lines.push_back(l);
  return lines;
}

struct PipelineOpts {
  // data / preprocessing
  std::string dataPath;
  std::string embeddingsPath;
  std::string stopwordsPath;
  std::size_t maxLen = 12;
  // embedding
  std::size_t dim = 16;
  std::size_t window = 2;
  std::size_t negatives = 5;
  std::size_t embedEpochs = 5;
  double embedLr = 0.025;
  std::size_t minCount = 1;
  // architecture
  std::size_t hidden = 8;
  std::vector<std::size_t> ffnHidden{16, 8};
  // loss
  double alpha = 1.0;
  double beta = 0.5;
  // trainer
  std::string trainer = "gdm";
  std::size_t epochs = 30;
  double lr = 0.05;
  double momentum = 0.9;
  double lrInc = 1.05;
  double lrDec = 0.7;
  std::size_t batch = 0;
  // init
  std::string init = "abc";
  double initScale = 1.0;
  // bee colony
  std::size_t abcPop = 20;
  std::uint64_t abcEvals = 2000;
  std::size_t abcLimit = 0;
  double boundLo = -1.0;
  double boundHi = 1.0;
  // imbalance handling
  std::ptrdiff_t augmentCopies = -1;
  double augmentSigma = 0.01;
  std::size_t fitnessSubsample = 32;
  // evaluation
  double epsilon = 0.5;
  // run control
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string profile = "desk";

  // options the paper profile may override
  CLI::Option* dimOpt = nullptr;
  CLI::Option* hiddenOpt = nullptr;
  CLI::Option* ffnOpt = nullptr;
  CLI::Option* maxLenOpt = nullptr;
  CLI::Option* abcPopOpt = nullptr;
  CLI::Option* abcEvalsOpt = nullptr;
};

void addPreprocessOptions(CLI::App* sub, PipelineOpts& o) {
  sub->add_option("--stopwords", o.stopwordsPath, "stop-word file, one word per line");
  o.maxLenOpt = sub->add_option("--max-len", o.maxLen, "max sentence length after preprocessing")
                    ->capture_default_str();
}

void addEmbedOptions(CLI::App* sub, PipelineOpts& o) {
  o.dimOpt = sub->add_option("--dim", o.dim, "embedding dimension")->capture_default_str();
  sub->add_option("--window", o.window, "skip-gram context window")->capture_default_str();
  sub->add_option("--negatives", o.negatives, "negative samples per context")
      ->capture_default_str();
  sub->add_option("--embed-epochs", o.embedEpochs, "skip-gram epochs")->capture_default_str();
  sub->add_option("--embed-lr", o.embedLr, "skip-gram learning rate")->capture_default_str();
  sub->add_option("--min-count", o.minCount, "minimum word count kept in the vocabulary")
      ->capture_default_str();
}

void addModelTrainOptions(CLI::App* sub, PipelineOpts& o) {
  o.hiddenOpt = sub->add_option("--hidden", o.hidden, "BLSTM hidden size")->capture_default_str();
  o.ffnOpt = sub->add_option("--ffn-hidden", o.ffnHidden, "feed-forward hidden sizes")
                 ->delimiter(',')
                 ->capture_default_str();
  sub->add_option("--alpha", o.alpha, "loss weight of positive (minority) pairs")
      ->capture_default_str();
  sub->add_option("--beta", o.beta, "loss weight of negative (majority) pairs")
      ->capture_default_str();
  sub->add_option("--trainer", o.trainer, "backprop variant")
      ->check(CLI::IsMember({"gdm", "gda"}))
      ->capture_default_str();
  sub->add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
  sub->add_option("--lr", o.lr, "learning rate")->capture_default_str();
  sub->add_option("--momentum", o.momentum, "gdm momentum coefficient")->capture_default_str();
  sub->add_option("--lr-inc", o.lrInc, "gda learning-rate increase factor")
      ->capture_default_str();
  sub->add_option("--lr-dec", o.lrDec, "gda learning-rate decrease factor")
      ->capture_default_str();
  sub->add_option("--batch", o.batch, "mini-batch size (0 = full batch)")->capture_default_str();
  sub->add_option("--init", o.init, "initialization mode")
      ->check(CLI::IsMember({"random", "abc"}))
      ->capture_default_str();
  sub->add_option("--init-scale", o.initScale, "random init draws U(-scale, scale)")
      ->capture_default_str();
  o.abcPopOpt =
      sub->add_option("--abc-pop", o.abcPop, "bee colony population size")->capture_default_str();
  o.abcEvalsOpt = sub->add_option("--abc-evals", o.abcEvals, "fitness evaluation budget")
                      ->capture_default_str();
  sub->add_option("--abc-limit", o.abcLimit, "scout limit (0 = population * dimension)")
      ->capture_default_str();
  sub->add_option("--bounds-lo", o.boundLo, "search-space lower bound")->capture_default_str();
  sub->add_option("--bounds-hi", o.boundHi, "search-space upper bound")->capture_default_str();
  sub->add_option("--augment-copies", o.augmentCopies,
                  "noisy copies per positive pair (-1 = equalize classes)")
      ->capture_default_str();
  sub->add_option("--augment-sigma", o.augmentSigma, "augmentation noise stddev")
      ->capture_default_str();
  sub->add_option("--fitness-subsample", o.fitnessSubsample,
                  "training pairs used per fitness evaluation (0 = all)")
      ->capture_default_str();
}

void addRunOptions(CLI::App* sub, PipelineOpts& o) {
  sub->add_option("--seed", o.seed, "master random seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "worker threads (never changes results)")
      ->capture_default_str();
  sub->add_option("--profile", o.profile, "parameter preset")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
}

void applyProfile(PipelineOpts& o) {
  if (o.profile != "paper") return;
  if (o.dimOpt && o.dimOpt->count() == 0) o.dim = 80;
  if (o.hiddenOpt && o.hiddenOpt->count() == 0) o.hidden = 50;
  if (o.ffnOpt && o.ffnOpt->count() == 0) o.ffnHidden = {256, 128, 64};
  if (o.maxLenOpt && o.maxLenOpt->count() == 0) o.maxLen = 100;
  if (o.abcPopOpt && o.abcPopOpt->count() == 0) o.abcPop = 50;
  if (o.abcEvalsOpt && o.abcEvalsOpt->count() == 0) o.abcEvals = 20000;
}

eval::PipelineConfig buildPipelineConfig(const PipelineOpts& o) {
  eval::PipelineConfig cfg;
  cfg.arch.embeddingDim = o.dim;
  cfg.arch.hiddenDim = o.hidden;
  cfg.arch.ffnHidden = o.ffnHidden;
  cfg.embed.dim = o.dim;
  cfg.embed.window = o.window;
  cfg.embed.negatives = o.negatives;
  cfg.embed.epochs = o.embedEpochs;
  cfg.embed.learningRate = o.embedLr;
  cfg.minCount = o.minCount;
  cfg.loss.alpha = o.alpha;
  cfg.loss.beta = o.beta;
  cfg.trainer = o.trainer == "gdm" ? train::TrainerKind::gdm : train::TrainerKind::gda;
  cfg.trainCfg.epochs = o.epochs;
  cfg.trainCfg.learningRate = o.lr;
  cfg.trainCfg.momentum = o.momentum;
  cfg.trainCfg.lrIncrease = o.lrInc;
  cfg.trainCfg.lrDecrease = o.lrDec;
  cfg.trainCfg.batchSize = o.batch;
  cfg.init = o.init == "abc" ? eval::InitMode::abc : eval::InitMode::random;
  cfg.initScale = o.initScale;
  cfg.abcCfg.populationSize = o.abcPop;
  cfg.abcCfg.maxEvaluations = o.abcEvals;
  cfg.abcCfg.limit = o.abcLimit;
  cfg.abcCfg.lower = o.boundLo;
  cfg.abcCfg.upper = o.boundHi;
  cfg.augmentCopies = o.augmentCopies;
  cfg.augmentSigma = o.augmentSigma;
  cfg.fitnessSubsample = o.fitnessSubsample;
  cfg.threshold.epsilon = o.epsilon;
  cfg.threads = o.threads;
  cfg.abcThreads = o.threads;
  return cfg;
}

corpus::Dataset loadAndPreprocess(const PipelineOpts& o) {
  corpus::Dataset ds = corpus::loadDataset(o.dataPath);
  std::unordered_set<std::string> stop;
  if (!o.stopwordsPath.empty()) stop = corpus::loadStopWords(o.stopwordsPath);
  corpus::Dataset out;
  out.name = ds.name;
  out.pairs.reserve(ds.pairs.size());
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    try {
      corpus::SentencePair p = ds.pairs[i];
      p.first = corpus::preprocessTokens(p.first, stop, o.maxLen);
      p.second = corpus::preprocessTokens(p.second, stop, o.maxLen);
      out.pairs.push_back(std::move(p));
    } catch (const EmptySentenceError& e) {
      throw DataError(o.dataPath + ": pair " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

void setupGenerate(CLI::App& app) {
  auto* sub = app.add_subcommand("generate", "write a synthetic pair dataset");
  sub->set_config("--config", "", "flat key = value config file");
  auto opts = std::make_shared<PipelineOpts>();
  auto cfg = std::make_shared<corpus::SyntheticConfig>();
  auto outPath = std::make_shared<std::string>();
  auto name = std::make_shared<std::string>("synthetic");
  sub->add_option("--out", *outPath, "output dataset file")->required();
  sub->add_option("--templates", cfg->templates, "number of template sentences")
      ->capture_default_str();
  sub->add_option("--copies", cfg->copiesPerTemplate, "positive copies per template")
      ->capture_default_str();
  sub->add_option("--vocab", cfg->vocabSize, "synthetic vocabulary size")->capture_default_str();
  sub->add_option("--noise", cfg->noiseRate, "per-token resample probability")
      ->capture_default_str();
  sub->add_option("--ratio", cfg->negativeRatio, "negatives per positive")->capture_default_str();
  sub->add_option("--min-len", cfg->minLen, "min template length")->capture_default_str();
  sub->add_option("--max-len", cfg->maxLen, "max template length")->capture_default_str();
  sub->add_option("--name", *name, "dataset name")->capture_default_str();
  sub->add_option("--seed", opts->seed, "master random seed")->capture_default_str();
  sub->callback([sub, opts, cfg, outPath, name] {
    num::Rng rng(opts->seed);
    corpus::Dataset ds = corpus::generateSynthetic(*cfg, rng);
    ds.name = *name;
    corpus::saveDataset(ds, *outPath, auditLines(*sub));
    std::size_t positives = 0;
    for (const auto& p : ds.pairs)
      if (p.label >= 0.5) ++positives;
    const std::size_t negatives = ds.pairs.size() - positives;
    std::cout << "generated " << *outPath << ": pairs=" << ds.pairs.size()
              << " positives=" << positives << " negatives=" << negatives
              << " ratio=" << (positives ? negatives / positives : 0) << '\n';
  });
}

void setupEmbed(CLI::App& app) {
  auto* sub = app.add_subcommand("embed", "train skip-gram word vectors from a dataset");
  sub->set_config("--config", "", "flat key = value config file");
  auto opts = std::make_shared<PipelineOpts>();
  auto outPath = std::make_shared<std::string>();
  sub->add_option("--data", opts->dataPath, "input dataset file")->required();
  sub->add_option("--out", *outPath, "output embedding file")->required();
  addPreprocessOptions(sub, *opts);
  addEmbedOptions(sub, *opts);
  addRunOptions(sub, *opts);
  sub->callback([sub, opts, outPath] {
    applyProfile(*opts);
    const corpus::Dataset ds = loadAndPreprocess(*opts);
    std::vector<corpus::Sentence> sentences;
    sentences.reserve(2 * ds.pairs.size());
    for (const auto& p : ds.pairs) {
      sentences.push_back(p.first);
      sentences.push_back(p.second);
    }
    const auto vocab = emb::buildVocab(sentences, opts->minCount);
    emb::SkipGramConfig sg;
    sg.dim = opts->dim;
    sg.window = opts->window;
    sg.negatives = opts->negatives;
    sg.epochs = opts->embedEpochs;
    sg.learningRate = opts->embedLr;
    num::Rng rng(num::Rng::derive(opts->seed, 1));
    std::vector<double> epochLoss;
    const auto table = emb::trainSkipGram(sentences, vocab, sg, rng, &epochLoss);
    emb::saveEmbeddings(table, *outPath, auditLines(*sub));
    std::cout << "embedded " << *outPath << ": vocab=" << table.vocab.size()
              << " dim=" << table.dim << " loss_first=" << fmtG12(epochLoss.front())
              << " loss_last=" << fmtG12(epochLoss.back()) << '\n';
  });
}

void setupTrain(CLI::App& app) {
  auto* sub = app.add_subcommand("train", "initialize (randomly or by bee colony) and train");
  sub->set_config("--config", "", "flat key = value config file");
  auto opts = std::make_shared<PipelineOpts>();
  auto outPath = std::make_shared<std::string>();
  auto historyPath = std::make_shared<std::string>();
  auto abcHistoryPath = std::make_shared<std::string>();
  sub->add_option("--data", opts->dataPath, "input dataset file")->required();
  sub->add_option("--embeddings", opts->embeddingsPath, "embedding file")->required();
  sub->add_option("--out", *outPath, "output model file")->required();
  sub->add_option("--history", *historyPath, "training history file");
  sub->add_option("--abc-history", *abcHistoryPath, "optimizer history file (abc init)");
  addPreprocessOptions(sub, *opts);
  addModelTrainOptions(sub, *opts);
  addRunOptions(sub, *opts);
  sub->callback([sub, opts, outPath, historyPath, abcHistoryPath] {
    applyProfile(*opts);
    const corpus::Dataset ds = loadAndPreprocess(*opts);
    const auto table = emb::loadEmbeddings(opts->embeddingsPath);
    eval::PipelineConfig cfg = buildPipelineConfig(*opts);
    const auto audit = auditLines(*sub);
    const eval::TrainOutputs out = eval::trainOnDataset(ds, table, cfg, opts->seed);
    model::saveModel(out.params, out.arch, *outPath, audit);
    if (!historyPath->empty()) train::saveTrainHistory(out.history, *historyPath, audit);
    if (!abcHistoryPath->empty()) {
      if (!out.abcResult)
        throw ArgumentError("--abc-history requires --init abc");
      abc::saveAbcHistory(out.abcResult->history, *abcHistoryPath, audit);
    }
    std::cout << "trained " << *outPath << ": epochs=" << out.history.size()
              << " final_loss=" << fmtG12(out.history.back().loss);
    if (out.abcResult)
      std::cout << " abc_best_fitness=" << fmtG12(out.abcResult->best.fitness)
                << " abc_evaluations=" << out.abcResult->evaluations;
    std::cout << '\n';
  });
}

void setupEval(CLI::App& app) {
  auto* sub = app.add_subcommand("eval", "score a model or run cross-validation");
  sub->set_config("--config", "", "flat key = value config file");
  auto opts = std::make_shared<PipelineOpts>();
  auto modelPath = std::make_shared<std::string>();
  auto reportPath = std::make_shared<std::string>();
  auto cv = std::make_shared<std::size_t>(0);
  sub->add_option("--data", opts->dataPath, "input dataset file")->required();
  sub->add_option("--embeddings", opts->embeddingsPath, "embedding file (single-split mode)");
  sub->add_option("--model", *modelPath, "model file (single-split mode)");
  sub->add_option("--report", *reportPath, "output report file")->required();
  sub->add_option("--cv", *cv, "run k-fold cross-validation (retrains per fold)");
  sub->add_option("--epsilon", opts->epsilon, "copy/not-copy similarity threshold")
      ->capture_default_str();
  addPreprocessOptions(sub, *opts);
  addEmbedOptions(sub, *opts);
  addModelTrainOptions(sub, *opts);
  addRunOptions(sub, *opts);
  sub->callback([sub, opts, modelPath, reportPath, cv] {
    applyProfile(*opts);
    const corpus::Dataset ds = loadAndPreprocess(*opts);
    const auto audit = auditLines(*sub);
    if (*cv > 0) {
      const eval::PipelineConfig cfg = buildPipelineConfig(*opts);
      const eval::MetricsReport report = eval::crossValidate(ds, cfg, *cv, opts->seed);
      eval::writeReport(report, ds.name, "cv", *reportPath, audit);
      std::cout << "evaluated " << *reportPath << ": folds=" << report.folds.size()
                << " recall_mean=" << fmtG12(report.recall.mean)
                << " mse_mean=" << fmtG12(report.mse.mean) << '\n';
      return;
    }
    if (modelPath->empty() || opts->embeddingsPath.empty())
      throw ArgumentError("eval: single-split mode needs --model and --embeddings");
    const auto table = emb::loadEmbeddings(opts->embeddingsPath);
    const auto [params, arch] = model::loadModel(*modelPath);
    if (arch.embeddingDim != table.dim)
      throw DataError("model embedding dim " + std::to_string(arch.embeddingDim) +
                      " does not match table dim " + std::to_string(table.dim));
    const auto pairs = emb::embedDataset(table, ds);
    const eval::FoldMetrics m = eval::evaluatePairs(params, pairs, {opts->epsilon});
    eval::MetricsReport report = eval::makeReport({m});
    eval::writeReport(report, ds.name, "single", *reportPath, audit);
    std::cout << "evaluated " << *reportPath << ": recall=" << fmtG12(m.recall)
              << " mse=" << fmtG12(m.mse) << " pearson=" << fmtG12(m.pearson) << '\n';
  });
}

void setupCompare(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "compare", "paired cross-validation of bee-colony vs random initialization");
  sub->set_config("--config", "", "flat key = value config file");
  auto opts = std::make_shared<PipelineOpts>();
  auto reportPath = std::make_shared<std::string>();
  auto cv = std::make_shared<std::size_t>(10);
  auto runs = std::make_shared<std::size_t>(1);
  sub->add_option("--data", opts->dataPath, "input dataset file")->required();
  sub->add_option("--report", *reportPath, "output report file")->required();
  sub->add_option("--cv", *cv, "folds per run")->capture_default_str();
  sub->add_option("--runs", *runs, "number of master seeds (seed, seed+1, ...)")
      ->capture_default_str();
  sub->add_option("--epsilon", opts->epsilon, "copy/not-copy similarity threshold")
      ->capture_default_str();
  addPreprocessOptions(sub, *opts);
  addEmbedOptions(sub, *opts);
  addModelTrainOptions(sub, *opts);
  addRunOptions(sub, *opts);
  sub->callback([sub, opts, reportPath, cv, runs] {
    applyProfile(*opts);
    if (*runs == 0) throw ArgumentError("compare: --runs must be >= 1");
    const corpus::Dataset ds = loadAndPreprocess(*opts);
    const eval::PipelineConfig cfg = buildPipelineConfig(*opts);
    std::vector<std::uint64_t> seeds;
    for (std::size_t r = 0; r < *runs; ++r) seeds.push_back(opts->seed + r);
    const eval::CompareResult result = eval::compare(ds, cfg, *cv, seeds);
    eval::writeCompareReport(result, ds.name, *cv, *reportPath, auditLines(*sub));
    std::cout << "compared " << *reportPath << ": seeds=" << seeds.size() << " folds=" << *cv
              << '\n';
  });
}

void setupGradCheck(CLI::App& app) {
  auto* sub = app.add_subcommand("gradcheck",
                                 "verify analytic gradients against finite differences");
  sub->set_config("--config", "", "flat key = value config file");
  auto step = std::make_shared<double>(1e-5);
  auto tolerance = std::make_shared<double>(1e-4);
  auto seed = std::make_shared<std::uint64_t>(1);
  auto archName = std::make_shared<std::string>("tiny");
  sub->add_option("--step", *step, "finite-difference step")->capture_default_str();
  sub->add_option("--tolerance", *tolerance, "max allowed relative error")
      ->capture_default_str();
  sub->add_option("--seed", *seed, "random seed")->capture_default_str();
  sub->add_option("--arch", *archName, "architecture preset")
      ->check(CLI::IsMember({"tiny", "desk"}))
      ->capture_default_str();
  sub->callback([step, tolerance, seed, archName] {
    model::ArchConfig arch;
    std::size_t T = 3;
    if (*archName == "tiny") {
      arch.embeddingDim = 2;
      arch.hiddenDim = 2;
      arch.ffnHidden = {4};
    } else {
      arch.embeddingDim = 16;
      arch.hiddenDim = 8;
      arch.ffnHidden = {16, 8};
      T = 6;
    }
    num::Rng rng(*seed);
    const auto params = model::initRandom(arch, 0.5, rng);
    auto makeSentence = [&](std::size_t len) {
      std::vector<num::Vec> s(len, num::Vec(arch.embeddingDim));
      for (auto& v : s)
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
      return s;
    };
    const train::LossConfig loss{1.0, 0.5};
    double maxErr = 0.0;
    std::vector<std::pair<std::string, double>> groupMax;
    for (const double label : {1.0, 0.0}) {
      emb::EmbeddedPair pair;
      pair.first = makeSentence(T);
      pair.second = makeSentence(T);
      pair.label = label;
      const auto report = train::gradCheck(params, arch, pair, loss, *step, *tolerance);
      maxErr = std::max(maxErr, report.maxRelError);
      if (groupMax.empty()) groupMax = report.groupMaxErrors;
      for (std::size_t g = 0; g < groupMax.size(); ++g)
        groupMax[g].second = std::max(groupMax[g].second, report.groupMaxErrors[g].second);
    }
    for (const auto& [name, err] : groupMax)
      std::cout << "group " << name << " max_rel_err " << fmtG12(err) << '\n';
    const bool ok = maxErr < *tolerance;
    std::cout << "overall max_rel_err " << fmtG12(maxErr) << " tolerance " << fmtG12(*tolerance)
              << (ok ? " PASS" : " FAIL") << '\n';
    if (!ok) gExitCode = 3;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Siamese BLSTM sentence-similarity pipeline with bee-colony-seeded training"};
  app.require_subcommand(1);
  setupGenerate(app);
  setupEmbed(app);
  setupTrain(app);
  setupEval(app);
  setupCompare(app);
  setupGradCheck(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help output
    std::cerr << "error: usage: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "error: divergence: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 2;
  }
  return gExitCode;
}
