#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "entrocoup/mcg.hpp"
#include "entrocoup/seqmodel.hpp"
#include "entrocoup/stego.hpp"

namespace entrocoup {

// Worker cap: ENTROCOUP_THREADS when set, hardware concurrency otherwise.
int threadCap();
// Runs fn(0..count-1) across workers; results must be written to
// preallocated slots so output is independent of scheduling.
void parallelFor(std::size_t count, const std::function<void(std::size_t)>& fn);

struct BootstrapCI {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
// Percentile bootstrap of the mean, 10000 seeded resamples.
BootstrapCI bootstrapMeanCI(const std::vector<double>& samples, std::uint64_t seed,
                            int resamples = 10000);

struct ResultTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string toCsv() const;
  std::string toJson() const;
};
std::string formatCell(double v);

// Summary lines ("metric,group,mean,lo95,hi95") appended per experiment.
struct ExperimentOutput {
  ResultTable table;
  std::vector<std::string> summary;
};

// Seeded synthetic models used by the experiments: a conditional row is
// redrawn until it clears minEntropyBits; skewed priors put dominantMass on
// one random symbol per context.
std::shared_ptr<NgramModel> randomChannelModel(CounterRng& rng, int vocab, int order,
                                               int maxLen, double minEntropyBits);
std::shared_ptr<NgramModel> randomSkewedPrior(CounterRng& rng, int vocab, int order, int maxLen,
                                              double dominantMass);

// variant,seed,bits,len,error_rate,joint_entropy_bits
struct StegoExperimentConfig {
  int trials = 100;
  std::uint64_t seed = 1;
  std::size_t bits = 16;
  int stegotextLen = 100;
  int covertextVocab = 8;
  double minStepEntropyBits = 2.0;
  bool merging = false;
  std::vector<Variant> variants = {Variant::fimec, Variant::arimec};
};
ExperimentOutput runStegoExperiment(const StegoExperimentConfig& cfg);

// variant,seed,plain_len,stego_len,correct_syms,prefix_len,exact
struct LinguisticExperimentConfig {
  int trials = 100;
  std::uint64_t seed = 1;
  int plaintextLen = 40;
  int priorVocab = 8;
  double priorDominantMass = 0.92;
  int stegotextLen = 15;
  int covertextVocab = 8;
  double minStepEntropyBits = 2.0;
  bool merging = false;
};
ExperimentOutput runLinguisticExperiment(const LinguisticExperimentConfig& cfg);

// n,merge,seed,msg_bits,stego_len,cond_entropy_bits,channel_entropy_bits,joint_entropy_bits
struct MergingExperimentConfig {
  int trials = 100;
  std::uint64_t seed = 1;
  int messageBits = 80;
  std::vector<int> componentCounts = {10, 20, 40, 80};
  int stegotextLen = 60;
  int covertextVocab = 8;
  double minStepEntropyBits = 2.0;
};
ExperimentOutput runMergingExperiment(const MergingExperimentConfig& cfg);

// variant,alpha,seed,msg_len,decode_error,return
struct McgExperimentConfig {
  int trials = 100;
  std::uint64_t seed = 1;
  int states = 5;
  int horizon = 12;
  std::vector<double> alphas = {0.3, 1.5};
  int messageLen = 6;
  int messageVocab = 4;
  double priorDominantMass = 0.8;
  bool merging = false;
  const TabularMDP* mdpOverride = nullptr;
};
ExperimentOutput runMcgExperiment(const McgExperimentConfig& cfg);

// bits,seed,materialized_nodes,mean_nodes_touched,max_nodes_touched
struct SearchNodesExperimentConfig {
  int trials = 20;
  std::uint64_t seed = 1;
  std::vector<int> bitSizes = {8, 16, 32, 64};
  int covertextVocab = 4;
  double minStepEntropyBits = 1.2;
};
ExperimentOutput runSearchNodesExperiment(const SearchNodesExperimentConfig& cfg);

}  // namespace entrocoup
