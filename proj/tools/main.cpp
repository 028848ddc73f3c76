#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "entrocoup/coupling.hpp"
#include "entrocoup/experiments.hpp"
#include "entrocoup/mcg.hpp"
#include "entrocoup/stego.hpp"

using namespace entrocoup;

namespace {

Dist loadDistFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open distribution file: " + path);
  std::vector<double> probs;
  double v;
  while (in >> v) probs.push_back(v);
  if (probs.empty()) throw std::invalid_argument("empty distribution file: " + path);
  return Dist(std::move(probs));
}

Sequence parseIndexSequence(const std::string& text) {
  std::istringstream in(text);
  Sequence out;
  int v;
  while (in >> v) out.push_back(v);
  return out;
}

std::string readStegotextArg(const std::string& inline_, const std::string& path) {
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open stegotext file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  return inline_;
}

void writeOutput(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write output file: " + path);
  out << text;
}

void emitExperiment(const ExperimentOutput& result, const std::string& outPath,
                    const std::string& format) {
  const std::string payload = format == "json" ? result.table.toJson() : result.table.toCsv();
  writeOutput(payload, outPath);
  if (!outPath.empty()) {
    std::cout << "metric,group,mean,lo95,hi95\n";
    for (const auto& line : result.summary) std::cout << line << "\n";
  }
}

int runMec(const std::string& muPath, const std::string& nuPath, bool exact) {
  const Dist mu = loadDistFile(muPath);
  const Dist nu = loadDistFile(nuPath);
  const SparseCoupling coupling = exact ? exactMEC(mu, nu) : greedyMEC(mu, nu);
  for (const auto& [key, p] : coupling.entries()) {
    std::cout << key.first << " " << key.second << " " << formatCell(p) << "\n";
  }
  std::cout << "joint_entropy_bits " << formatCell(couplingEntropy(coupling)) << "\n";
  double rowResidual = 0.0, colResidual = 0.0;
  const auto rows = coupling.rowSums();
  const auto cols = coupling.colSums();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    rowResidual = std::max(rowResidual, std::abs(rows[i] - mu[i]));
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    colResidual = std::max(colResidual, std::abs(cols[j] - nu[j]));
  }
  std::cout << "row_residual_max " << formatCell(rowResidual) << "\n";
  std::cout << "col_residual_max " << formatCell(colResidual) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-entropy coupling toolkit: approximate minimum-entropy couplings, "
               "iterative couplers, steganography and Markov-coding experiments"};
  app.require_subcommand(1);

  // mec
  std::string muPath, nuPath;
  bool exact = false;
  auto* mec = app.add_subcommand("mec", "couple two marginal distributions from files");
  mec->add_option("--mu", muPath, "file of whitespace-separated probabilities")->required();
  mec->add_option("--nu", nuPath, "file of whitespace-separated probabilities")->required();
  mec->add_flag("--exact", exact, "exhaustive oracle (rowDim*colDim <= 12)");

  // keygen
  std::uint64_t keygenSeed = 0;
  std::size_t keyBits = 0;
  auto* keygen = app.add_subcommand("keygen", "generate a private key as hex");
  keygen->add_option("--bits", keyBits, "key length in bits")->required();
  keygen->add_option("--seed", keygenSeed, "generator seed")->default_val(0);

  // fit
  std::string fitIn, fitOut, fitEos;
  int fitOrder = 1, fitMaxLen = 0;
  auto* fit = app.add_subcommand("fit", "estimate an n-gram model from a token corpus");
  fit->add_option("--order", fitOrder, "context length k")->required();
  fit->add_option("--in", fitIn, "corpus path (one sequence per line)")->required();
  fit->add_option("--out", fitOut, "model output path")->required();
  fit->add_option("--eos", fitEos, "end-of-sequence token name (omit for none)");
  fit->add_option("--max-len", fitMaxLen, "default horizon stored with the model");

  // stego-encode / stego-decode
  std::string ciphertextHex, modelPath, outPath, stegotextInline, stegotextPath;
  std::size_t nbits = 0;
  int stegoLen = 0, beamWidth = 1;
  std::string variantName_ = "arimec";
  bool merge = false;
  std::uint64_t seed = 0;
  auto* senc = app.add_subcommand("stego-encode", "embed ciphertext bits into channel symbols");
  senc->add_option("--ciphertext", ciphertextHex, "hex, MSB-first per byte")->required();
  senc->add_option("--bits", nbits, "ciphertext length in bits")->required();
  senc->add_option("--model", modelPath, "covertext n-gram model")->required();
  senc->add_option("--len", stegoLen, "stegotext length in symbols")->required();
  senc->add_option("--variant", variantName_, "timec|fimec|arimec")->default_val("arimec");
  senc->add_flag("--merge,!--no-merge", merge, "merge equal posterior updates");
  senc->add_option("--seed", seed, "session seed")->default_val(0);
  senc->add_option("--out", outPath, "write stegotext indices here instead of stdout");

  auto* sdec = app.add_subcommand("stego-decode", "recover ciphertext bits from stegotext");
  sdec->add_option("--stegotext", stegotextInline, "whitespace-separated symbol indices");
  sdec->add_option("--in", stegotextPath, "stegotext file (overrides --stegotext)");
  sdec->add_option("--bits", nbits, "ciphertext length in bits")->required();
  sdec->add_option("--model", modelPath, "covertext n-gram model")->required();
  sdec->add_option("--variant", variantName_, "timec|fimec|arimec")->default_val("arimec");
  sdec->add_flag("--merge,!--no-merge", merge, "merge equal posterior updates");
  sdec->add_option("--seed", seed, "session seed")->default_val(0);
  sdec->add_option("--beam", beamWidth, "MAP beam width (tree variants)")->default_val(1);

  // experiment
  std::string experimentName, format = "csv";
  int trials = 0;
  std::uint64_t expSeed = 1;
  std::string expOut;
  bool expMergeOn = false;
  auto* exp = app.add_subcommand("experiment",
                                 "run a seeded experiment: stego, linguistic, merging, mcg, "
                                 "search-nodes");
  exp->add_option("name", experimentName, "experiment name")->required();
  exp->add_option("--trials", trials, "trials per configuration point");
  exp->add_option("--seed", expSeed, "root seed")->default_val(1);
  exp->add_option("--out", expOut, "write the data table here (summary goes to stdout)");
  exp->add_option("--format", format, "csv|json")->default_val("csv");
  exp->add_flag("--merge,!--no-merge", expMergeOn, "enable merging where optional");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mec) return runMec(muPath, nuPath, exact);

    if (*keygen) {
      CounterRng rng(keygenSeed);
      std::cout << bitsToHex(randomBits(rng, keyBits)) << "\n";
      return 0;
    }

    if (*fit) {
      std::ifstream corpus(fitIn);
      if (!corpus) throw std::invalid_argument("cannot open corpus: " + fitIn);
      const auto model = fitNgram(corpus, fitOrder, fitEos, fitMaxLen);
      saveNgram(*model, fitOut);
      std::cout << "vocab " << model->vocab().size() << " contexts " << model->table().size()
                << "\n";
      return 0;
    }

    if (*senc) {
      StegoConfig cfg;
      cfg.variant = parseVariant(variantName_);
      cfg.merging = merge;
      cfg.seed = seed;
      cfg.stegotextLen = stegoLen;
      const auto covertext = loadNgram(modelPath);
      const Bits ciphertext = hexToBits(ciphertextHex, nbits);
      const auto transcript = stegoEncode(ciphertext, covertext, cfg);
      std::ostringstream out;
      for (std::size_t i = 0; i < transcript.stegotext.size(); ++i) {
        out << (i ? " " : "") << transcript.stegotext[i];
      }
      out << "\n";
      writeOutput(out.str(), outPath);
      return 0;
    }

    if (*sdec) {
      StegoConfig cfg;
      cfg.variant = parseVariant(variantName_);
      cfg.merging = merge;
      cfg.seed = seed;
      cfg.beamWidth = beamWidth;
      const auto covertext = loadNgram(modelPath);
      const Sequence stegotext =
          parseIndexSequence(readStegotextArg(stegotextInline, stegotextPath));
      if (stegotext.empty() && nbits > 0) {
        throw std::invalid_argument("empty stegotext; pass --stegotext or --in");
      }
      std::cout << bitsToHex(stegoDecode(stegotext, nbits, covertext, cfg)) << "\n";
      return 0;
    }

    if (*exp) {
      if (experimentName == "stego") {
        StegoExperimentConfig cfg;
        cfg.seed = expSeed;
        cfg.merging = expMergeOn;
        if (trials > 0) cfg.trials = trials;
        emitExperiment(runStegoExperiment(cfg), expOut, format);
      } else if (experimentName == "linguistic") {
        LinguisticExperimentConfig cfg;
        cfg.seed = expSeed;
        cfg.merging = expMergeOn;
        if (trials > 0) cfg.trials = trials;
        emitExperiment(runLinguisticExperiment(cfg), expOut, format);
      } else if (experimentName == "merging") {
        MergingExperimentConfig cfg;
        cfg.seed = expSeed;
        if (trials > 0) cfg.trials = trials;
        emitExperiment(runMergingExperiment(cfg), expOut, format);
      } else if (experimentName == "mcg") {
        McgExperimentConfig cfg;
        cfg.seed = expSeed;
        cfg.merging = expMergeOn;
        if (trials > 0) cfg.trials = trials;
        emitExperiment(runMcgExperiment(cfg), expOut, format);
      } else if (experimentName == "search-nodes") {
        SearchNodesExperimentConfig cfg;
        cfg.seed = expSeed;
        if (trials > 0) cfg.trials = trials;
        emitExperiment(runSearchNodesExperiment(cfg), expOut, format);
      } else {
        throw std::invalid_argument("unknown experiment '" + experimentName + "'");
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
