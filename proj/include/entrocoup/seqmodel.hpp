#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "entrocoup/dist.hpp"
#include "entrocoup/rng.hpp"

namespace entrocoup {

using Symbol = int;
using Sequence = std::vector<Symbol>;

// Autoregressive distribution over symbol sequences. Sequences either have
// fixed length maxLen (no EOS) or terminate with a reserved end-of-sequence
// symbol at or before maxLen. Implementations are immutable after
// construction and shareable across threads.
class AutoregressiveSource {
 public:
  virtual ~AutoregressiveSource() = default;
  virtual int vocabSize() const = 0;
  virtual int maxLen() const = 0;
  virtual std::optional<Symbol> eosId() const { return std::nullopt; }
  virtual Dist nextDist(const Sequence& prefix) const = 0;
};

// I.i.d. fair bits of fixed length.
class UniformBitSource : public AutoregressiveSource {
 public:
  explicit UniformBitSource(int lengthBits);
  int vocabSize() const override { return 2; }
  int maxLen() const override { return lengthBits_; }
  Dist nextDist(const Sequence&) const override { return Dist({0.5, 0.5}); }

 private:
  int lengthBits_;
};

// Adapter for ad-hoc conditional tables (tests, synthetic channels).
class FunctionSource : public AutoregressiveSource {
 public:
  FunctionSource(int vocab, int maxLen, std::function<Dist(const Sequence&)> next,
                 std::optional<Symbol> eos = std::nullopt)
      : vocab_(vocab), maxLen_(maxLen), eos_(eos), next_(std::move(next)) {}
  int vocabSize() const override { return vocab_; }
  int maxLen() const override { return maxLen_; }
  std::optional<Symbol> eosId() const override { return eos_; }
  Dist nextDist(const Sequence& prefix) const override { return next_(prefix); }

 private:
  int vocab_;
  int maxLen_;
  std::optional<Symbol> eos_;
  std::function<Dist(const Sequence&)> next_;
};

// Count-based k-th order conditional table over a named vocabulary. Lookup
// keys on the last min(k, |prefix|) symbols; unseen contexts fall back to the
// uniform distribution so no reachable symbol ever has zero mass unless the
// table says so explicitly.
class NgramModel : public AutoregressiveSource {
 public:
  NgramModel(int order, std::vector<std::string> vocab, std::map<Sequence, Dist> table,
             std::optional<Symbol> eos, int maxLen);

  int vocabSize() const override { return static_cast<int>(vocab_.size()); }
  int maxLen() const override { return maxLen_; }
  std::optional<Symbol> eosId() const override { return eos_; }
  Dist nextDist(const Sequence& prefix) const override;

  int order() const { return order_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::map<Sequence, Dist>& table() const { return table_; }
  Symbol symbolId(const std::string& name) const;  // throws on unknown symbol

  // Returns a copy bound to a different horizon.
  std::shared_ptr<NgramModel> withMaxLen(int maxLen) const;

 private:
  int order_;
  std::vector<std::string> vocab_;
  std::map<Sequence, Dist> table_;
  std::optional<Symbol> eos_;
  int maxLen_;
};

// Line-oriented model file format:
//   ngram k=<order> vocab=<size> eos=<symbol|none>
//   <symbol_0> ... <symbol_{V-1}>
//   <context symbols> : <p_0> ... <p_{V-1}>
// Context lines may use 0..k symbols; probabilities must sum to 1 within
// 1e-9. save(load(f)) is byte-identical for files produced by save.
std::shared_ptr<NgramModel> loadNgram(const std::string& path);
std::shared_ptr<NgramModel> parseNgram(std::istream& in);
void saveNgram(const NgramModel& model, const std::string& path);
std::string formatNgram(const NgramModel& model);

// Count-based estimation from whitespace-tokenized lines; eosName, when
// nonempty, is appended to every line and added to the vocabulary.
std::shared_ptr<NgramModel> fitNgram(std::istream& corpus, int order,
                                     const std::string& eosName, int maxLen);

// Seeded ancestral sampling; stops at EOS (excluded from the result) or
// maxLen symbols.
Sequence sampleSequence(const AutoregressiveSource& model, CounterRng& rng);

// log2 probability of a complete message, including the terminating EOS
// factor when the model has one. Returns -infinity for impossible sequences.
double messageLog2Prob(const AutoregressiveSource& model, const Sequence& x);

// log2 likelihood of a (possibly partial) symbol sequence, EOS factor not
// appended. Returns -infinity when any step has zero probability.
double logLikelihood(const AutoregressiveSource& model, const Sequence& seq);

// All messages with positive probability, lexicographically ordered; throws
// std::invalid_argument when the space exceeds cap.
std::vector<Sequence> enumerateMessages(const AutoregressiveSource& model, std::size_t cap);

}  // namespace entrocoup
