#include "entrocoup/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "entrocoup/prefix_tree.hpp"

namespace entrocoup {

int threadCap() {
  if (const char* env = std::getenv("ENTROCOUP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallelFor(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threadCap()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr firstError;
  std::mutex errorMutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(errorMutex);
          if (!firstError) firstError = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (firstError) std::rethrow_exception(firstError);
}

BootstrapCI bootstrapMeanCI(const std::vector<double>& samples, std::uint64_t seed,
                            int resamples) {
  BootstrapCI ci;
  if (samples.empty()) return ci;
  double sum = 0.0;
  for (double v : samples) sum += v;
  ci.mean = sum / static_cast<double>(samples.size());
  CounterRng rng(seed);
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      s += samples[rng.nextBelow(samples.size())];
    }
    means[r] = s / static_cast<double>(samples.size());
  }
  std::sort(means.begin(), means.end());
  const auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::llround(q * (resamples - 1)));
    return means[idx];
  };
  ci.lo = at(0.025);
  ci.hi = at(0.975);
  return ci;
}

std::string formatCell(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string ResultTable::toCsv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

std::string ResultTable::toJson() const {
  std::ostringstream out;
  out << "[";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << (r ? ",\n " : "\n ") << "{";
    for (std::size_t i = 0; i < header.size(); ++i) {
      out << (i ? "," : "") << "\"" << header[i] << "\":\"" << rows[r][i] << "\"";
    }
    out << "}";
  }
  out << "\n]\n";
  return out.str();
}

namespace {

Dist drawRow(CounterRng& rng, int vocab, double minEntropyBits) {
  while (true) {
    std::vector<double> w(vocab);
    double sum = 0.0;
    for (double& v : w) {
      v = rng.nextDouble() + 1e-6;
      sum += v;
    }
    for (double& v : w) v /= sum;
    Dist d(std::move(w));
    if (entropy(d) >= minEntropyBits) return d;
  }
}

Dist drawSkewedRow(CounterRng& rng, int vocab, double dominantMass) {
  const auto dominant = rng.nextBelow(vocab);
  std::vector<double> w(vocab, (1.0 - dominantMass) / (vocab - 1));
  w[dominant] = dominantMass;
  return Dist(std::move(w));
}

void addContexts(std::map<Sequence, Dist>& table, int vocab, int order, Sequence& context,
                 const std::function<Dist()>& draw) {
  table.emplace(context, draw());
  if (static_cast<int>(context.size()) == order) return;
  for (int s = 0; s < vocab; ++s) {
    context.push_back(s);
    addContexts(table, vocab, order, context, draw);
    context.pop_back();
  }
}

std::vector<std::string> numberNames(int vocab) {
  std::vector<std::string> names(vocab);
  for (int i = 0; i < vocab; ++i) names[i] = std::to_string(i);
  return names;
}

}  // namespace

std::shared_ptr<NgramModel> randomChannelModel(CounterRng& rng, int vocab, int order, int maxLen,
                                               double minEntropyBits) {
  std::map<Sequence, Dist> table;
  Sequence context;
  addContexts(table, vocab, order, context, [&] { return drawRow(rng, vocab, minEntropyBits); });
  return std::make_shared<NgramModel>(order, numberNames(vocab), std::move(table), std::nullopt,
                                      maxLen);
}

std::shared_ptr<NgramModel> randomSkewedPrior(CounterRng& rng, int vocab, int order, int maxLen,
                                              double dominantMass) {
  std::map<Sequence, Dist> table;
  Sequence context;
  addContexts(table, vocab, order, context, [&] { return drawSkewedRow(rng, vocab, dominantMass); });
  return std::make_shared<NgramModel>(order, numberNames(vocab), std::move(table), std::nullopt,
                                      maxLen);
}

ExperimentOutput runStegoExperiment(const StegoExperimentConfig& cfg) {
  struct Trial {
    std::vector<std::vector<std::string>> rows;
    std::vector<double> errors;   // per variant
    std::vector<double> joints;
  };
  std::vector<Trial> trials(cfg.trials);
  const CounterRng root(cfg.seed);

  parallelFor(cfg.trials, [&](std::size_t t) {
    CounterRng rng = root.derive(t);
    auto covertext =
        randomChannelModel(rng, cfg.covertextVocab, 1, cfg.stegotextLen, cfg.minStepEntropyBits);
    const Bits ciphertext = randomBits(rng, cfg.bits);
    Trial& trial = trials[t];
    for (Variant v : cfg.variants) {
      StegoConfig scfg;
      scfg.variant = v;
      scfg.merging = cfg.merging;
      scfg.seed = rng.derive(static_cast<std::uint64_t>(v)).key();
      scfg.stegotextLen = cfg.stegotextLen;
      const StegoTranscript transcript = stegoEncode(ciphertext, covertext, scfg);
      const Bits decoded = stegoDecode(transcript.stegotext, cfg.bits, covertext, scfg);
      const double error = decoded == ciphertext ? 0.0 : 1.0;
      trial.rows.push_back({variantName(v), std::to_string(t), std::to_string(cfg.bits),
                            std::to_string(cfg.stegotextLen), formatCell(error),
                            formatCell(transcript.jointSurprisalBits)});
      trial.errors.push_back(error);
      trial.joints.push_back(transcript.jointSurprisalBits);
    }
  });

  ExperimentOutput out;
  out.table.header = {"variant", "seed", "bits", "len", "error_rate", "joint_entropy_bits"};
  std::vector<std::vector<double>> errors(cfg.variants.size()), joints(cfg.variants.size());
  for (const Trial& trial : trials) {
    for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
      out.table.rows.push_back(trial.rows[v]);
      errors[v].push_back(trial.errors[v]);
      joints[v].push_back(trial.joints[v]);
    }
  }
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    const auto err = bootstrapMeanCI(errors[v], root.derive(1000 + v).key());
    const auto joint = bootstrapMeanCI(joints[v], root.derive(2000 + v).key());
    const std::string name = variantName(cfg.variants[v]);
    out.summary.push_back("error_rate," + name + "," + formatCell(err.mean) + "," +
                          formatCell(err.lo) + "," + formatCell(err.hi));
    out.summary.push_back("joint_entropy_bits," + name + "," + formatCell(joint.mean) + "," +
                          formatCell(joint.lo) + "," + formatCell(joint.hi));
  }
  return out;
}

ExperimentOutput runLinguisticExperiment(const LinguisticExperimentConfig& cfg) {
  struct Trial {
    std::vector<std::vector<std::string>> rows;
    double arimecCorrect = 0.0;
    double fimecCorrect = 0.0;
  };
  std::vector<Trial> trials(cfg.trials);
  const CounterRng root(cfg.seed);

  parallelFor(cfg.trials, [&](std::size_t t) {
    CounterRng rng = root.derive(t);
    auto prior =
        randomSkewedPrior(rng, cfg.priorVocab, 2, cfg.plaintextLen, cfg.priorDominantMass);
    auto covertext =
        randomChannelModel(rng, cfg.covertextVocab, 1, cfg.stegotextLen, cfg.minStepEntropyBits);
    CounterRng sampleRng = rng.derive(11);
    const Sequence plaintext = sampleSequence(*prior, sampleRng);

    auto score = [&](const Sequence& decoded) {
      int correct = 0, prefix = 0;
      bool inPrefix = true;
      for (std::size_t i = 0; i < plaintext.size(); ++i) {
        const bool match = i < decoded.size() && decoded[i] == plaintext[i];
        if (match) ++correct;
        if (inPrefix && match) {
          ++prefix;
        } else {
          inPrefix = false;
        }
      }
      return std::pair<int, int>{correct, prefix};
    };

    Trial& trial = trials[t];
    {
      StegoConfig scfg;
      scfg.merging = cfg.merging;
      scfg.seed = rng.derive(21).key();
      scfg.stegotextLen = cfg.stegotextLen;
      const auto transcript = linguisticEncode(prior, covertext, plaintext, scfg);
      const Sequence decoded = linguisticDecode(transcript.stegotext, prior, covertext, scfg);
      const auto [correct, prefix] = score(decoded);
      trial.arimecCorrect = correct;
      trial.rows.push_back({"arimec", std::to_string(t), std::to_string(plaintext.size()),
                            std::to_string(cfg.stegotextLen), std::to_string(correct),
                            std::to_string(prefix), decoded == plaintext ? "1" : "0"});
    }
    {
      // baseline: factored coupler under an assumed uniform prior per position
      SessionConfig scfg;
      scfg.merging = cfg.merging;
      scfg.seed = rng.derive(22).key();
      scfg.horizon = cfg.stegotextLen;
      std::vector<Dist> comps(plaintext.size(), Dist::uniform(cfg.priorVocab));
      CouplerSession enc(covertext, makeFactoredPartitionSet(comps), scfg);
      for (int j = 0; j < cfg.stegotextLen; ++j) enc.encodeStep(plaintext);
      CouplerSession dec(covertext, makeFactoredPartitionSet(comps), scfg);
      for (Symbol s : enc.emitted()) dec.observeStep(s);
      const Sequence decoded = dec.mapEstimate();
      const auto [correct, prefix] = score(decoded);
      trial.fimecCorrect = correct;
      trial.rows.push_back({"fimec", std::to_string(t), std::to_string(plaintext.size()),
                            std::to_string(cfg.stegotextLen), std::to_string(correct),
                            std::to_string(prefix), decoded == plaintext ? "1" : "0"});
    }
  });

  ExperimentOutput out;
  out.table.header = {"variant", "seed",       "plain_len", "stego_len",
                      "correct_syms", "prefix_len", "exact"};
  std::vector<double> arimec, fimec;
  for (const Trial& trial : trials) {
    for (const auto& row : trial.rows) out.table.rows.push_back(row);
    arimec.push_back(trial.arimecCorrect);
    fimec.push_back(trial.fimecCorrect);
  }
  const auto a = bootstrapMeanCI(arimec, root.derive(3001).key());
  const auto f = bootstrapMeanCI(fimec, root.derive(3002).key());
  out.summary.push_back("correct_syms,arimec," + formatCell(a.mean) + "," + formatCell(a.lo) +
                        "," + formatCell(a.hi));
  out.summary.push_back("correct_syms,fimec," + formatCell(f.mean) + "," + formatCell(f.lo) + "," +
                        formatCell(f.hi));
  out.summary.push_back("throughput_ratio,arimec_vs_fimec," +
                        formatCell(f.mean > 0 ? a.mean / f.mean : 0.0) + ",,");
  return out;
}

ExperimentOutput runMergingExperiment(const MergingExperimentConfig& cfg) {
  for (int n : cfg.componentCounts) {
    if (cfg.messageBits % n != 0) {
      throw std::invalid_argument("component count " + std::to_string(n) +
                                  " does not divide the message bits");
    }
    if (cfg.messageBits / n > 20) {
      throw std::invalid_argument("components wider than 20 bits are not tabulated");
    }
  }
  struct Cell {
    double cond = 0.0;
    double channel = 0.0;
    double joint = 0.0;
  };
  const std::size_t settings = cfg.componentCounts.size() * 2;
  std::vector<std::vector<Cell>> results(cfg.trials, std::vector<Cell>(settings));
  const CounterRng root(cfg.seed);

  parallelFor(cfg.trials, [&](std::size_t t) {
    CounterRng rng = root.derive(t);
    auto covertext =
        randomChannelModel(rng, cfg.covertextVocab, 1, cfg.stegotextLen, cfg.minStepEntropyBits);
    const Bits bits = randomBits(rng, cfg.messageBits);
    const std::uint64_t sessionSeed = rng.nextU64();
    for (std::size_t ni = 0; ni < cfg.componentCounts.size(); ++ni) {
      const int n = cfg.componentCounts[ni];
      const int width = cfg.messageBits / n;
      const std::size_t arity = std::size_t{1} << width;
      Sequence message(n);
      for (int c = 0; c < n; ++c) {
        std::size_t value = 0;
        for (int b = 0; b < width; ++b) value = (value << 1) | bits[c * width + b];
        message[c] = static_cast<Symbol>(value);
      }
      for (int merge = 0; merge < 2; ++merge) {
        SessionConfig scfg;
        scfg.seed = sessionSeed;
        scfg.horizon = cfg.stegotextLen;
        scfg.merging = merge == 1;
        CouplerSession session(covertext,
                               makeFactoredPartitionSet(std::vector<Dist>(n, Dist::uniform(arity))),
                               scfg);
        for (int j = 0; j < cfg.stegotextLen; ++j) session.encodeStep(message);
        Cell& cell = results[t][ni * 2 + merge];
        cell.cond = session.conditionalSurprisalBits();
        cell.channel = session.channelSurprisalBits();
        cell.joint = session.jointSurprisalBits();
      }
    }
  });

  ExperimentOutput out;
  out.table.header = {"n",         "merge",        "seed",
                      "msg_bits",  "stego_len",    "cond_entropy_bits",
                      "channel_entropy_bits", "joint_entropy_bits"};
  std::vector<std::vector<double>> conds(settings);
  std::vector<double> channels;
  for (int t = 0; t < cfg.trials; ++t) {
    for (std::size_t ni = 0; ni < cfg.componentCounts.size(); ++ni) {
      for (int merge = 0; merge < 2; ++merge) {
        const Cell& cell = results[t][ni * 2 + merge];
        out.table.rows.push_back({std::to_string(cfg.componentCounts[ni]), std::to_string(merge),
                                  std::to_string(t), std::to_string(cfg.messageBits),
                                  std::to_string(cfg.stegotextLen), formatCell(cell.cond),
                                  formatCell(cell.channel), formatCell(cell.joint)});
        conds[ni * 2 + merge].push_back(cell.cond);
        channels.push_back(cell.channel);
      }
    }
  }
  const auto chan = bootstrapMeanCI(channels, root.derive(4000).key());
  for (std::size_t ni = 0; ni < cfg.componentCounts.size(); ++ni) {
    for (int merge = 0; merge < 2; ++merge) {
      const auto ci = bootstrapMeanCI(conds[ni * 2 + merge], root.derive(4100 + ni * 2 + merge).key());
      out.summary.push_back("joint_entropy_bits,n=" + std::to_string(cfg.componentCounts[ni]) +
                            (merge ? "_merge" : "_plain") + "," +
                            formatCell(ci.mean + chan.mean) + "," +
                            formatCell(ci.lo + chan.mean) + "," + formatCell(ci.hi + chan.mean));
    }
  }
  return out;
}

ExperimentOutput runMcgExperiment(const McgExperimentConfig& cfg) {
  TabularMDP defaultMdp;
  const TabularMDP* mdp = cfg.mdpOverride;
  if (!mdp) {
    defaultMdp = makeChainMdp(cfg.states, cfg.horizon);
    mdp = &defaultMdp;
  }
  struct Cell {
    double error = 0.0;
    double ret = 0.0;
  };
  const std::size_t settings = cfg.alphas.size() * 2;  // arimec + fimec baseline
  std::vector<std::vector<Cell>> results(cfg.trials, std::vector<Cell>(settings));
  const CounterRng root(cfg.seed);

  parallelFor(cfg.trials, [&](std::size_t t) {
    CounterRng rng = root.derive(t);
    auto prior = randomSkewedPrior(rng, cfg.messageVocab, 1, cfg.messageLen,
                                   cfg.priorDominantMass);
    CounterRng sampleRng = rng.derive(5);
    const Sequence message = sampleSequence(*prior, sampleRng);
    for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
      const SoftPolicy policy = softValueIteration(*mdp, cfg.alphas[ai]);
      for (int variant = 0; variant < 2; ++variant) {  // 0: arimec prior, 1: fimec uniform
        MemeConfig mcfg;
        mcfg.seed = rng.derive(100 + ai * 2 + variant).key();
        mcfg.merging = cfg.merging;
        auto makeSet = [&]() -> std::unique_ptr<PartitionSet> {
          if (variant == 0) return makePrefixTreePartitionSet(prior);
          return makeFactoredPartitionSet(
              std::vector<Dist>(message.size(), Dist::uniform(cfg.messageVocab)));
        };
        const MemeEpisode episode = memeEncode(message, makeSet(), *mdp, policy, mcfg);
        const Sequence decoded = memeDecode(episode.trajectory, makeSet(), *mdp, policy, mcfg);
        Cell& cell = results[t][ai * 2 + variant];
        cell.error = decoded == message ? 0.0 : 1.0;
        cell.ret = episode.trajectory.totalReward;
      }
    }
  });

  ExperimentOutput out;
  out.table.header = {"variant", "alpha", "seed", "msg_len", "decode_error", "return"};
  std::vector<std::vector<double>> errors(settings), returns(settings);
  for (int t = 0; t < cfg.trials; ++t) {
    for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
      for (int variant = 0; variant < 2; ++variant) {
        const Cell& cell = results[t][ai * 2 + variant];
        out.table.rows.push_back({variant == 0 ? "arimec" : "fimec", formatCell(cfg.alphas[ai]),
                                  std::to_string(t), std::to_string(cfg.messageLen),
                                  formatCell(cell.error), formatCell(cell.ret)});
        errors[ai * 2 + variant].push_back(cell.error);
        returns[ai * 2 + variant].push_back(cell.ret);
      }
    }
  }
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    for (int variant = 0; variant < 2; ++variant) {
      const std::string name =
          std::string(variant == 0 ? "arimec" : "fimec") + "_alpha=" + formatCell(cfg.alphas[ai]);
      const auto err = bootstrapMeanCI(errors[ai * 2 + variant], root.derive(5000 + ai).key());
      const auto ret = bootstrapMeanCI(returns[ai * 2 + variant], root.derive(6000 + ai).key());
      out.summary.push_back("decode_error," + name + "," + formatCell(err.mean) + "," +
                            formatCell(err.lo) + "," + formatCell(err.hi));
      out.summary.push_back("return," + name + "," + formatCell(ret.mean) + "," +
                            formatCell(ret.lo) + "," + formatCell(ret.hi));
    }
  }
  return out;
}

ExperimentOutput runSearchNodesExperiment(const SearchNodesExperimentConfig& cfg) {
  struct Cell {
    double materialized = 0.0;
    double meanTouched = 0.0;
    double maxTouched = 0.0;
  };
  std::vector<std::vector<Cell>> results(cfg.trials, std::vector<Cell>(cfg.bitSizes.size()));
  const CounterRng root(cfg.seed);

  parallelFor(cfg.trials, [&](std::size_t t) {
    CounterRng rng = root.derive(t);
    for (std::size_t bi = 0; bi < cfg.bitSizes.size(); ++bi) {
      const int bits = cfg.bitSizes[bi];
      const int len = 2 * bits;
      auto covertext =
          randomChannelModel(rng, cfg.covertextVocab, 1, len, cfg.minStepEntropyBits);
      const Bits ciphertext = randomBits(rng, bits);
      SessionConfig scfg;
      scfg.seed = rng.nextU64();
      scfg.horizon = len;
      auto tree = makePrefixTreePartitionSet(std::make_shared<UniformBitSource>(bits));
      PrefixTreeSet* stats = tree.get();
      CouplerSession session(covertext, std::move(tree), scfg);
      const Sequence x(ciphertext.begin(), ciphertext.end());
      double maxTouched = 0.0;
      double totalTouched = 0.0;
      for (int j = 0; j < len; ++j) {
        session.encodeStep(x);
        maxTouched = std::max(maxTouched, static_cast<double>(stats->lastReport().nodesTouched));
      }
      totalTouched = static_cast<double>(stats->totalNodesTouched());
      Cell& cell = results[t][bi];
      cell.materialized = static_cast<double>(stats->materializedCount());
      cell.meanTouched = totalTouched / static_cast<double>(stats->searchCount());
      cell.maxTouched = maxTouched;
    }
  });

  ExperimentOutput out;
  out.table.header = {"bits", "seed", "materialized_nodes", "mean_nodes_touched",
                      "max_nodes_touched"};
  for (int t = 0; t < cfg.trials; ++t) {
    for (std::size_t bi = 0; bi < cfg.bitSizes.size(); ++bi) {
      const Cell& cell = results[t][bi];
      out.table.rows.push_back({std::to_string(cfg.bitSizes[bi]), std::to_string(t),
                                formatCell(cell.materialized), formatCell(cell.meanTouched),
                                formatCell(cell.maxTouched)});
    }
  }
  for (std::size_t bi = 0; bi < cfg.bitSizes.size(); ++bi) {
    std::vector<double> touched, materialized;
    for (int t = 0; t < cfg.trials; ++t) {
      touched.push_back(results[t][bi].meanTouched);
      materialized.push_back(results[t][bi].materialized);
    }
    const auto ci = bootstrapMeanCI(touched, root.derive(7000 + bi).key());
    const auto mat = bootstrapMeanCI(materialized, root.derive(7100 + bi).key());
    out.summary.push_back("mean_nodes_touched,bits=" + std::to_string(cfg.bitSizes[bi]) + "," +
                          formatCell(ci.mean) + "," + formatCell(ci.lo) + "," + formatCell(ci.hi));
    out.summary.push_back("materialized_nodes,bits=" + std::to_string(cfg.bitSizes[bi]) + "," +
                          formatCell(mat.mean) + "," + formatCell(mat.lo) + "," +
                          formatCell(mat.hi));
  }
  return out;
}

}  // namespace entrocoup
