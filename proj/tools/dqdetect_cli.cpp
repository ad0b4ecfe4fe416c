// Command-line front end: synthesize, extract-features, train, evaluate,
// classify, localize and qpool subcommands.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqdetect/datasets.hpp"
#include "dqdetect/features.hpp"
#include "dqdetect/image_io.hpp"
#include "dqdetect/jpeg/codec.hpp"
#include "dqdetect/localization.hpp"
#include "dqdetect/metrics.hpp"
#include "dqdetect/nn/checkpoint.hpp"
#include "dqdetect/qmatrix.hpp"
#include "dqdetect/synthesis.hpp"
#include "dqdetect/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kMissingInput = 3,
  kBadJpeg = 4,
  kDataError = 5,
};

struct CliError : std::runtime_error {
  CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
  int code;
};

void requireFile(const fs::path& p) {
  if (!fs::exists(p)) throw CliError(kMissingInput, "no such file: " + p.string());
}

// Explicit --out wins; otherwise $DQDETECT_OUT/<command> or ./dqdetect-out/<command>.
fs::path outputDir(const std::string& explicitOut, const std::string& command) {
  fs::path dir;
  if (!explicitOut.empty()) {
    dir = explicitOut;
  } else if (const char* root = std::getenv("DQDETECT_OUT"); root && *root) {
    dir = fs::path(root) / command;
  } else {
    dir = fs::path("dqdetect-out") / command;
  }
  fs::create_directories(dir);
  return dir;
}

void writeManifest(const fs::path& dir, const std::string& command, std::uint64_t seed, const json& config,
                   const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  dqd::writeJson(dir / "manifest.json", {{"command", command},
                                         {"seed", seed},
                                         {"config", config},
                                         {"inputs", inputs},
                                         {"outputs", outputs},
                                         {"tool_version", dqd::kVersion}});
}

struct LoadedModel {
  dqd::nn::LoadedCheckpoint checkpoint;
  dqd::FeatureOptions features;
};

LoadedModel loadModel(const std::string& path) {
  requireFile(path);
  auto ck = dqd::nn::loadCheckpoint(fs::path(path));
  dqd::FeatureOptions features;
  if (ck.metadata.contains("features")) {
    features = dqd::FeatureOptions::fromJson(ck.metadata.at("features"));
  } else {
    const auto& cfg = ck.model.config();
    features.b = (cfg.inputCols - 1) / 2;
    features.withQFactors = cfg.inputChannels == 2;
  }
  return {std::move(ck), features};
}

// ------------------------------------------------------------------ synthesize

struct SynthesizeArgs {
  std::string kind = "patches";
  std::string out;
  std::uint64_t seed = 0;
  int count = 100;
  int size = 0;
  int region = 544;
  double sigma = 2.0;
  bool unaligned = false;
  std::string qpool = "default";
  std::string firstQpool;
  std::string qpoolSplit;
  std::string splitSide = "train";
};

dqd::QMatrixPool selectPool(const std::string& spec, const std::string& split, const std::string& side,
                            std::uint64_t seed) {
  dqd::QMatrixPool pool = dqd::resolvePool(spec, seed);
  if (split.empty()) return pool;
  const auto s = dqd::parsePoolSplit(split);
  auto halves = dqd::splitPool(pool, s.seed, s.trainCount);
  return side == "test" ? halves.second : halves.first;
}

int runSynthesize(const SynthesizeArgs& a) {
  const fs::path dir = outputDir(a.out, "synthesize");
  const dqd::QMatrixPool finalPool = selectPool(a.qpool, a.qpoolSplit, a.splitSide, a.seed);
  const dqd::QMatrixPool firstPool = a.firstQpool.empty() ? finalPool : dqd::resolvePool(a.firstQpool, a.seed);
  std::vector<std::string> outputs;
  json config = {{"kind", a.kind},    {"count", a.count},           {"qpool", a.qpool},
                 {"first_qpool", a.firstQpool}, {"qpool_split", a.qpoolSplit}, {"split_side", a.splitSide}};
  if (a.kind == "patches") {
    const int size = a.size > 0 ? a.size : 256;
    config["size"] = size;
    dqd::CorpusSpec spec{a.count, size, a.seed, "src"};
    dqd::writePatchSet(dir, dqd::makePatchCorpus(spec, firstPool, finalPool));
    outputs.push_back("patches.json");
  } else if (a.kind == "copymove" || a.kind == "blur") {
    const int size = a.size > 0 ? a.size : 1024;
    config["size"] = size;
    config["region"] = a.region;
    config["blur_sigma"] = a.sigma;
    config["aligned"] = !a.unaligned;
    dqd::ForgeryOptions opt;
    opt.regionSize = a.region;
    opt.blurSigma = a.sigma;
    opt.alignedRegion = !a.unaligned;
    const auto kind = a.kind == "blur" ? dqd::Manipulation::Blur : dqd::Manipulation::CopyMove;
    dqd::Rng master(a.seed);
    for (int i = 0; i < a.count; ++i) {
      dqd::Rng rng(master.fork());
      const dqd::PixelPatch src = dqd::proceduralImage(size, size, rng);
      char name[32];
      std::snprintf(name, sizeof name, "case_%04d", i);
      dqd::writeCaseBundle(dir / name, dqd::makeForgery(src, kind, firstPool, finalPool, rng, opt));
      outputs.push_back(name);
    }
  } else {
    throw CliError(kUsage, "unknown --kind '" + a.kind + "'");
  }
  writeManifest(dir, "synthesize", a.seed, config, {}, outputs);
  std::cout << dir.string() << '\n';
  return kOk;
}

// ------------------------------------------------------------ extract-features

struct ExtractArgs {
  std::vector<std::string> inputs;
  std::string out;
  int b = 100;
  bool withQ = true;
};

int runExtract(const ExtractArgs& a) {
  const fs::path dir = outputDir(a.out, "extract-features");
  dqd::FeatureOptions opt;
  opt.b = a.b;
  opt.withQFactors = a.withQ;
  std::ofstream out(dir / "features.bin", std::ios::binary);
  json labels = json::array();
  for (const auto& in : a.inputs) {
    requireFile(in);
    if (fs::is_directory(in) || fs::path(in).extension() == ".json") {
      for (const auto& p : dqd::readPatchSet(in)) {
        dqd::writeFeature(out, dqd::buildFeature(dqd::decodeCoefficients(p.stream), opt));
        labels.push_back(p.label == dqd::CompressionLabel::Double ? 1 : 0);
      }
    } else {
      dqd::writeFeature(out, dqd::buildFeature(dqd::decodeCoefficients(dqd::readJpeg(in)), opt));
      labels.push_back(nullptr);
    }
  }
  out.close();
  dqd::writeJson(dir / "labels.json", {{"labels", labels}});
  writeManifest(dir, "extract-features", 0, opt.toJson(), a.inputs, {"features.bin", "labels.json"});
  std::cout << dir.string() << '\n';
  return kOk;
}

// ----------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string test;
  std::string out;
  int b = 100;
  int patchSize = 256;
  bool withQ = true;
  int epochs = 40;
  int batchSize = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool toy = false;
  std::string inputScaling;
  int sources = 0;
  int testSources = 0;
  int sourceSize = 256;
  std::string qpool = "default";
  std::string firstQpool;
  std::string qpoolSplit;
};

int runTrain(const TrainArgs& a) {
  if (a.patchSize != 64 && a.patchSize != 128 && a.patchSize != 256) {
    throw CliError(kUsage, "--patch-size must be 64, 128 or 256");
  }
  const fs::path dir = outputDir(a.out, "train");
  const std::string scaling = a.inputScaling.empty() ? (a.toy ? "unit" : "raw") : a.inputScaling;
  dqd::FeatureOptions features =
      scaling == "unit" ? dqd::FeatureOptions::unitScaled(a.b, a.withQ) : dqd::FeatureOptions{a.b, a.withQ};

  std::vector<dqd::LabeledPatch> trainPatches, testPatches;
  std::vector<std::string> inputs;
  json data;
  if (!a.data.empty()) {
    requireFile(a.data);
    trainPatches = dqd::readPatchSet(a.data);
    inputs.push_back(a.data);
    if (!a.test.empty()) {
      requireFile(a.test);
      testPatches = dqd::readPatchSet(a.test);
      inputs.push_back(a.test);
    }
    data = {{"train", a.data}, {"test", a.test}};
  } else {
    if (a.sources <= 0) throw CliError(kUsage, "give --data or a positive --sources count");
    dqd::QMatrixPool pool = dqd::resolvePool(a.qpool, a.seed);
    dqd::QMatrixPool trainPool = pool, testPool = pool;
    if (!a.qpoolSplit.empty()) {
      const auto s = dqd::parsePoolSplit(a.qpoolSplit);
      std::tie(trainPool, testPool) = dqd::splitPool(pool, s.seed, s.trainCount);
    }
    const dqd::QMatrixPool firstTrain = a.firstQpool.empty() ? trainPool : dqd::resolvePool(a.firstQpool, a.seed);
    const dqd::QMatrixPool firstTest = a.firstQpool.empty() ? testPool : firstTrain;
    dqd::Rng rng(a.seed);
    const std::uint64_t trainSeed = rng.fork(), testSeed = rng.fork();
    trainPatches = dqd::makePatchCorpus({a.sources, a.sourceSize, trainSeed, "train"}, firstTrain, trainPool);
    if (a.testSources > 0) {
      testPatches = dqd::makePatchCorpus({a.testSources, a.sourceSize, testSeed, "test"}, firstTest, testPool);
    }
    data = {{"sources", a.sources},   {"test_sources", a.testSources}, {"source_size", a.sourceSize},
            {"qpool", a.qpool},       {"first_qpool", a.firstQpool},   {"qpool_split", a.qpoolSplit},
            {"train_q_ids", json::array()}, {"test_q_ids", json::array()}};
    for (const auto& e : trainPool.entries()) data["train_q_ids"].push_back(e.id);
    for (const auto& e : testPool.entries()) data["test_q_ids"].push_back(e.id);
  }

  const int crop = a.patchSize;
  const dqd::Dataset train = dqd::buildDataset(trainPatches, features, crop);
  std::optional<dqd::Dataset> test;
  if (!testPatches.empty()) test = dqd::buildDataset(testPatches, features, crop);

  dqd::TrainConfig cfg;
  cfg.model = a.toy ? dqd::nn::ModelConfig::toy(a.b, a.withQ) : dqd::nn::ModelConfig::full(a.b, a.withQ);
  cfg.epochs = a.epochs;
  cfg.batchSize = a.batchSize;
  cfg.learningRate = a.lr;
  cfg.decayedLearningRate = a.lr / 2;
  cfg.decayEpoch = a.epochs >= 40 ? 30 : (a.epochs * 3) / 4;
  cfg.seed = a.seed;

  auto result = dqd::trainModel(train, nullptr, cfg, [](const dqd::EpochRecord& r) {
    const auto m = dqd::classificationMetrics(r.train);
    std::fprintf(stderr, "epoch %d  lr %.6g  loss %.4f  train acc %.4f\n", r.epoch, r.learningRate, r.loss,
                 m.accuracy.value_or(0.0));
  });

  const json config = {{"train", cfg.toJson()}, {"features", features.toJson()}, {"patch_size", a.patchSize},
                       {"data", data}};
  dqd::nn::saveCheckpoint(dir / "model.ckpt", *result.model, {{"features", features.toJson()}, {"config", config}});
  dqd::writeJson(dir / "history.json", result.historyJson());
  std::vector<std::string> outputs{"model.ckpt", "history.json"};
  if (test) {
    const dqd::Confusion c = dqd::evaluate(*result.model, *test, cfg.batchSize);
    dqd::writeJson(dir / "metrics.json", dqd::metricsJson(c));
    outputs.push_back("metrics.json");
    const auto m = dqd::classificationMetrics(c);
    std::printf("test accuracy %.4f  TPR %.4f  TNR %.4f\n", m.accuracy.value_or(0.0), m.tpr.value_or(0.0),
                m.tnr.value_or(0.0));
  }
  writeManifest(dir, "train", a.seed, config, inputs, outputs);
  std::cout << dir.string() << '\n';
  return kOk;
}

// -------------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string out;
  int patchSize = 0;
};

int runEvaluate(const EvaluateArgs& a) {
  LoadedModel m = loadModel(a.model);
  requireFile(a.data);
  const auto patches = dqd::readPatchSet(a.data);
  if (patches.empty()) throw CliError(kDataError, "empty test set");
  const dqd::Dataset test = dqd::buildDataset(patches, m.features, a.patchSize);
  const dqd::Confusion c = dqd::evaluate(m.checkpoint.model, test);
  const fs::path dir = outputDir(a.out, "evaluate");
  dqd::writeJson(dir / "metrics.json", dqd::metricsJson(c));
  writeManifest(dir, "evaluate", 0, {{"patch_size", a.patchSize}, {"features", m.features.toJson()}},
                {a.model, a.data}, {"metrics.json"});
  const auto r = dqd::classificationMetrics(c);
  std::printf("accuracy %.4f  TPR %s  TNR %s\n", r.accuracy.value_or(0.0),
              r.tpr ? std::to_string(*r.tpr).c_str() : "undefined", r.tnr ? std::to_string(*r.tnr).c_str() : "undefined");
  return kOk;
}

// -------------------------------------------------------------------- classify

int runClassify(const std::string& image, const std::string& model) {
  LoadedModel m = loadModel(model);
  requireFile(image);
  const dqd::QuantizedBlockGrid grid = dqd::decodeCoefficients(dqd::readJpeg(image));
  dqd::NetworkClassifier classifier(m.checkpoint.model, m.features);
  const double p = classifier.probabilityDouble(std::span(&grid, 1)).front();
  std::printf("%s %.4f\n", p >= 0.5 ? "double" : "single", p);
  return kOk;
}

// -------------------------------------------------------------------- localize

struct LocalizeArgs {
  std::string image;
  std::string model;
  std::string out;
  std::string mask;
  int stride = 32;
  int window = 256;
};

int runLocalize(const LocalizeArgs& a) {
  LoadedModel m = loadModel(a.model);
  requireFile(a.image);
  dqd::NetworkClassifier classifier(m.checkpoint.model, m.features);
  const dqd::TamperMap map = dqd::localize(dqd::readJpeg(a.image), classifier, a.stride, a.window);
  const fs::path dir = outputDir(a.out, "localize");
  dqd::writeHeatmap(dir / "heatmap.pgm", map);
  dqd::writeJson(dir / "tamper_map.json", map.toJson());
  std::vector<std::string> outputs{"heatmap.pgm", "tamper_map.json"};
  std::vector<std::string> inputs{a.image, a.model};
  if (!a.mask.empty()) {
    requireFile(a.mask);
    int bx = 0, by = 0;
    const auto mask = dqd::readBlockMask(a.mask, bx, by);
    const auto truth = dqd::windowGroundTruth(mask, bx, by, a.window, a.stride);
    json metrics = {{"window", dqd::metricsJson(dqd::scoreLocalization(map, truth))},
                    {"pixel", dqd::metricsJson(dqd::scorePixels(map, mask, bx, by))}};
    dqd::writeJson(dir / "metrics.json", metrics);
    outputs.push_back("metrics.json");
    inputs.push_back(a.mask);
    const auto& f = metrics["window"]["derived"]["f_measure"];
    std::printf("window F-measure %s\n", f.is_null() ? "undefined" : std::to_string(f.get<double>()).c_str());
  }
  writeManifest(dir, "localize", 0, {{"stride", a.stride}, {"window", a.window}}, inputs, outputs);
  std::cout << dir.string() << '\n';
  return kOk;
}

// ----------------------------------------------------------------------- qpool

int runQpoolGenerate(const std::string& spec, std::uint64_t seed, const std::string& out) {
  const dqd::QMatrixPool pool = dqd::resolvePool(spec, seed);
  dqd::savePool(pool, out);
  std::printf("%zu matrices -> %s\n", pool.size(), out.c_str());
  return kOk;
}

int runQpoolSplit(const std::string& spec, const std::string& split, std::uint64_t seed, const std::string& trainOut,
                  const std::string& testOut) {
  const dqd::QMatrixPool pool = dqd::resolvePool(spec, seed);
  const auto s = dqd::parsePoolSplit(split);
  const auto [train, test] = dqd::splitPool(pool, s.seed, s.trainCount);
  dqd::savePool(train, trainOut);
  dqd::savePool(test, testOut);
  std::printf("%zu train / %zu test matrices\n", train.size(), test.size());
  return kOk;
}

int runQpoolShow(const std::string& spec, std::uint64_t seed) {
  const dqd::QMatrixPool pool = dqd::resolvePool(spec, seed);
  for (const auto& e : pool.entries()) {
    std::printf("%-12s %-8s", e.id.c_str(), e.origin == dqd::QOrigin::Standard ? "standard" : "custom");
    for (int i = 0; i < 8; ++i) std::printf(" %d", e.matrix[i]);
    std::printf(" ...\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JPEG double-compression detection and tamper localization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dqd::kVersion);

  SynthesizeArgs syn;
  auto* synCmd = app.add_subcommand("synthesize", "Generate labeled patches or forged images");
  synCmd->add_option("--kind", syn.kind, "patches, copymove or blur")->check(CLI::IsMember({"patches", "copymove", "blur"}));
  synCmd->add_option("--out", syn.out, "Output directory");
  synCmd->add_option("--seed", syn.seed, "Random seed");
  synCmd->add_option("--count", syn.count, "Source images (patches: one single and one double each) or cases");
  synCmd->add_option("--size", syn.size, "Side length in pixels (default 256 patches, 1024 forgeries)");
  synCmd->add_option("--region", syn.region, "Tampered region side length");
  synCmd->add_option("--blur-sigma", syn.sigma, "Gaussian sigma for blur forgeries");
  synCmd->add_flag("--unaligned", syn.unaligned, "Place the tampered region off the 8x8 grid");
  synCmd->add_option("--qpool", syn.qpool, "Pool file or preset (default, desk:N, uniform:S1,S2)");
  synCmd->add_option("--first-qpool", syn.firstQpool, "Separate pool for the first compression");
  synCmd->add_option("--qpool-split", syn.qpoolSplit, "<seed>:<trainCount> partition of --qpool");
  synCmd->add_option("--split-side", syn.splitSide, "Which part of the split to use")->check(CLI::IsMember({"train", "test"}));

  ExtractArgs ext;
  auto* extCmd = app.add_subcommand("extract-features", "Write histogram feature tensors");
  extCmd->add_option("inputs", ext.inputs, "JPEG files or patch sets")->required();
  extCmd->add_option("--out", ext.out, "Output directory");
  extCmd->add_option("--b", ext.b, "Histogram half-width")->check(CLI::PositiveNumber);
  extCmd->add_flag("--with-qfactors,!--without-qfactors", ext.withQ, "Append the q-factor channel");

  TrainArgs tr;
  auto* trCmd = app.add_subcommand("train", "Train a classifier");
  trCmd->add_option("--data", tr.data, "Training patch set");
  trCmd->add_option("--test", tr.test, "Test patch set");
  trCmd->add_option("--out", tr.out, "Output directory");
  trCmd->add_option("--b", tr.b, "Histogram half-width")->check(CLI::PositiveNumber);
  trCmd->add_option("--patch-size", tr.patchSize, "Top-left crop used for features: 64, 128 or 256");
  trCmd->add_flag("--with-qfactors,!--without-qfactors", tr.withQ, "Append the q-factor channel");
  trCmd->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  trCmd->add_option("--batch-size", tr.batchSize, "Batch size")->check(CLI::Range(2, 1 << 20));
  trCmd->add_option("--lr", tr.lr, "Initial learning rate (halved at 3/4 of the run, epoch 30 of 40)");
  trCmd->add_option("--seed", tr.seed, "Random seed");
  trCmd->add_flag("--toy", tr.toy, "Reduced network (k=8, 2/2/2/2 layers)");
  trCmd->add_option("--input-scaling", tr.inputScaling, "raw counts and q-factors, or unit (per-block counts, q/255); default unit with --toy, raw otherwise")
      ->check(CLI::IsMember({"raw", "unit"}));
  trCmd->add_option("--sources", tr.sources, "Synthesize this many training sources instead of --data");
  trCmd->add_option("--test-sources", tr.testSources, "Synthesized held-out sources");
  trCmd->add_option("--source-size", tr.sourceSize, "Synthesized patch side length");
  trCmd->add_option("--qpool", tr.qpool, "Pool file or preset for synthesized data");
  trCmd->add_option("--first-qpool", tr.firstQpool, "Separate pool for the first compression");
  trCmd->add_option("--qpool-split", tr.qpoolSplit, "<seed>:<trainCount>; test data uses the held-out matrices");

  EvaluateArgs ev;
  auto* evCmd = app.add_subcommand("evaluate", "Score a model on a patch set");
  evCmd->add_option("--model", ev.model, "Checkpoint")->required();
  evCmd->add_option("--data", ev.data, "Patch set")->required();
  evCmd->add_option("--out", ev.out, "Output directory");
  evCmd->add_option("--patch-size", ev.patchSize, "Top-left crop (0 = whole patch)");

  std::string clsImage, clsModel;
  auto* clsCmd = app.add_subcommand("classify", "Label one aligned JPEG patch");
  clsCmd->add_option("image", clsImage, "JPEG patch")->required();
  clsCmd->add_option("--model", clsModel, "Checkpoint")->required();

  LocalizeArgs loc;
  auto* locCmd = app.add_subcommand("localize", "Sliding-window tamper map");
  locCmd->add_option("image", loc.image, "JPEG image")->required();
  locCmd->add_option("--model", loc.model, "Checkpoint")->required();
  locCmd->add_option("--out", loc.out, "Output directory");
  locCmd->add_option("--mask", loc.mask, "Ground-truth block mask PGM for scoring");
  locCmd->add_option("--stride", loc.stride, "Window stride in pixels");
  locCmd->add_option("--window", loc.window, "Window side in pixels");

  auto* qCmd = app.add_subcommand("qpool", "Create, split or list Q-matrix pools");
  qCmd->require_subcommand(1);
  std::string qSpec = "default", qOut, qSplit, qTrainOut, qTestOut;
  std::uint64_t qSeed = 0;
  auto* qGen = qCmd->add_subcommand("generate", "Write a pool file");
  qGen->add_option("spec", qSpec, "Preset (default, desk:N, uniform:S1,S2) or pool file");
  qGen->add_option("--seed", qSeed, "Seed for presets");
  qGen->add_option("--out", qOut, "Pool JSON")->required();
  auto* qSplitCmd = qCmd->add_subcommand("split", "Partition a pool into train and test matrices");
  qSplitCmd->add_option("spec", qSpec, "Preset or pool file")->required();
  qSplitCmd->add_option("--split", qSplit, "<seed>:<trainCount>")->required();
  qSplitCmd->add_option("--seed", qSeed, "Seed for presets");
  qSplitCmd->add_option("--train-out", qTrainOut, "Train pool JSON")->required();
  qSplitCmd->add_option("--test-out", qTestOut, "Test pool JSON")->required();
  auto* qShow = qCmd->add_subcommand("show", "List pool entries");
  qShow->add_option("spec", qSpec, "Preset or pool file");
  qShow->add_option("--seed", qSeed, "Seed for presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*synCmd) return runSynthesize(syn);
    if (*extCmd) return runExtract(ext);
    if (*trCmd) return runTrain(tr);
    if (*evCmd) return runEvaluate(ev);
    if (*clsCmd) return runClassify(clsImage, clsModel);
    if (*locCmd) return runLocalize(loc);
    if (*qGen) return runQpoolGenerate(qSpec, qSeed, qOut);
    if (*qSplitCmd) return runQpoolSplit(qSpec, qSplit, qSeed, qTrainOut, qTestOut);
    if (*qShow) return runQpoolShow(qSpec, qSeed);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code;
  } catch (const dqd::JpegError& e) {
    std::fprintf(stderr, "jpeg error: %s\n", e.what());
    return kBadJpeg;
  } catch (const dqd::nn::CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return kDataError;
  } catch (const dqd::PoolError& e) {
    std::fprintf(stderr, "pool error: %s\n", e.what());
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInternal;
  }
  return kUsage;
}
