#include "entrocoup/seqmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "entrocoup/errors.hpp"
#include "entrocoup/partition.hpp"

namespace entrocoup {

namespace {

constexpr int kUnboundedLen = 1 << 20;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string formatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace

UniformBitSource::UniformBitSource(int lengthBits) : lengthBits_(lengthBits) {
  if (lengthBits < 0) throw std::invalid_argument("UniformBitSource: negative length");
}

NgramModel::NgramModel(int order, std::vector<std::string> vocab, std::map<Sequence, Dist> table,
                       std::optional<Symbol> eos, int maxLen)
    : order_(order), vocab_(std::move(vocab)), table_(std::move(table)), eos_(eos),
      maxLen_(maxLen <= 0 ? kUnboundedLen : maxLen) {
  if (order_ < 0) throw std::invalid_argument("NgramModel: negative order");
  if (vocab_.empty()) throw std::invalid_argument("NgramModel: empty vocabulary");
  if (eos_ && (*eos_ < 0 || *eos_ >= static_cast<Symbol>(vocab_.size()))) {
    throw std::invalid_argument("NgramModel: eos symbol out of range");
  }
  for (const auto& [context, row] : table_) {
    if (static_cast<int>(context.size()) > order_) {
      throw std::invalid_argument("NgramModel: context longer than order");
    }
    if (row.size() != vocab_.size()) {
      throw std::invalid_argument("NgramModel: row width does not match vocabulary");
    }
    for (Symbol s : context) {
      if (s < 0 || s >= static_cast<Symbol>(vocab_.size())) {
        throw std::invalid_argument("NgramModel: context symbol out of range");
      }
    }
  }
}

Dist NgramModel::nextDist(const Sequence& prefix) const {
  const auto V = static_cast<Symbol>(vocab_.size());
  for (Symbol s : prefix) {
    if (s < 0 || s >= V) throw std::invalid_argument("NgramModel: unknown symbol in prefix");
  }
  if (eos_ && !prefix.empty() && prefix.back() == *eos_) {
    return Dist::pointMass(vocab_.size(), *eos_);  // EOS is absorbing
  }
  const std::size_t ctxLen = std::min<std::size_t>(order_, prefix.size());
  Sequence context(prefix.end() - ctxLen, prefix.end());
  auto it = table_.find(context);
  if (it == table_.end()) return Dist::uniform(vocab_.size());
  return it->second;
}

Symbol NgramModel::symbolId(const std::string& name) const {
  auto it = std::find(vocab_.begin(), vocab_.end(), name);
  if (it == vocab_.end()) throw std::invalid_argument("NgramModel: unknown symbol '" + name + "'");
  return static_cast<Symbol>(it - vocab_.begin());
}

std::shared_ptr<NgramModel> NgramModel::withMaxLen(int maxLen) const {
  return std::make_shared<NgramModel>(order_, vocab_, table_, eos_, maxLen);
}

std::shared_ptr<NgramModel> parseNgram(std::istream& in) {
  std::string line;
  int lineNo = 0;
  auto nextLine = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineNo;
      if (!tokenize(line).empty()) return true;
    }
    return false;
  };

  if (!nextLine()) throw ParseError("missing header", 1);
  auto header = tokenize(line);
  if (header.size() != 4 || header[0] != "ngram" || header[1].rfind("k=", 0) != 0 ||
      header[2].rfind("vocab=", 0) != 0 || header[3].rfind("eos=", 0) != 0) {
    throw ParseError("expected 'ngram k=<order> vocab=<size> eos=<symbol|none>'", lineNo);
  }
  int order = 0, vocabSize = 0;
  try {
    order = std::stoi(header[1].substr(2));
    vocabSize = std::stoi(header[2].substr(6));
  } catch (const std::exception&) {
    throw ParseError("bad integer in header", lineNo);
  }
  const std::string eosName = header[3].substr(4);
  if (order < 0 || vocabSize <= 0) throw ParseError("bad order or vocab size", lineNo);

  if (!nextLine()) throw ParseError("missing vocabulary line", lineNo + 1);
  auto vocab = tokenize(line);
  if (static_cast<int>(vocab.size()) != vocabSize) {
    throw ParseError("vocabulary line has " + std::to_string(vocab.size()) + " symbols, header says " +
                         std::to_string(vocabSize),
                     lineNo);
  }
  if (std::set<std::string>(vocab.begin(), vocab.end()).size() != vocab.size()) {
    throw ParseError("duplicate vocabulary symbol", lineNo);
  }
  std::map<std::string, Symbol> id;
  for (std::size_t i = 0; i < vocab.size(); ++i) id[vocab[i]] = static_cast<Symbol>(i);

  std::optional<Symbol> eos;
  if (eosName != "none") {
    auto it = id.find(eosName);
    if (it == id.end()) throw ParseError("eos symbol '" + eosName + "' not in vocabulary", 1);
    eos = it->second;
  }

  std::map<Sequence, Dist> table;
  while (nextLine()) {
    auto tokens = tokenize(line);
    auto sep = std::find(tokens.begin(), tokens.end(), ":");
    if (sep == tokens.end()) throw ParseError("context line missing ':'", lineNo);
    Sequence context;
    for (auto it = tokens.begin(); it != sep; ++it) {
      auto sym = id.find(*it);
      if (sym == id.end()) throw ParseError("unknown symbol '" + *it + "' in context", lineNo);
      context.push_back(sym->second);
    }
    if (static_cast<int>(context.size()) > order) {
      throw ParseError("context longer than order k=" + std::to_string(order), lineNo);
    }
    std::vector<double> probs;
    for (auto it = sep + 1; it != tokens.end(); ++it) {
      double v = 0.0;
      auto res = std::from_chars(it->data(), it->data() + it->size(), v);
      if (res.ec != std::errc() || res.ptr != it->data() + it->size()) {
        throw ParseError("bad probability '" + *it + "' at position " +
                             std::to_string(it - sep),
                         lineNo);
      }
      probs.push_back(v);
    }
    if (static_cast<int>(probs.size()) != vocabSize) {
      throw ParseError("expected " + std::to_string(vocabSize) + " probabilities, got " +
                           std::to_string(probs.size()),
                       lineNo);
    }
    if (table.count(context)) throw ParseError("duplicate context", lineNo);
    try {
      table.emplace(std::move(context), Dist(std::move(probs)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), lineNo);
    }
  }
  return std::make_shared<NgramModel>(order, vocab, std::move(table), eos, 0);
}

std::shared_ptr<NgramModel> loadNgram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  return parseNgram(in);
}

std::string formatNgram(const NgramModel& model) {
  std::ostringstream out;
  out << "ngram k=" << model.order() << " vocab=" << model.vocab().size() << " eos="
      << (model.eosId() ? model.vocab()[*model.eosId()] : std::string("none")) << "\n";
  for (std::size_t i = 0; i < model.vocab().size(); ++i) {
    out << (i ? " " : "") << model.vocab()[i];
  }
  out << "\n";
  for (const auto& [context, row] : model.table()) {
    for (Symbol s : context) out << model.vocab()[s] << " ";
    out << ":";
    for (std::size_t i = 0; i < row.size(); ++i) out << " " << formatDouble(row[i]);
    out << "\n";
  }
  return out.str();
}

void saveNgram(const NgramModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write model file: " + path);
  out << formatNgram(model);
}

std::shared_ptr<NgramModel> fitNgram(std::istream& corpus, int order, const std::string& eosName,
                                     int maxLen) {
  if (order < 0) throw std::invalid_argument("fitNgram: negative order");
  std::vector<std::string> vocab;
  std::map<std::string, Symbol> id;
  auto internSymbol = [&](const std::string& name) {
    auto it = id.find(name);
    if (it != id.end()) return it->second;
    const Symbol s = static_cast<Symbol>(vocab.size());
    vocab.push_back(name);
    id[name] = s;
    return s;
  };

  std::vector<Sequence> lines;
  std::string line;
  while (std::getline(corpus, line)) {
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    Sequence seq;
    seq.reserve(tokens.size() + 1);
    for (const auto& t : tokens) seq.push_back(internSymbol(t));
    lines.push_back(std::move(seq));
  }
  if (lines.empty()) throw std::invalid_argument("fitNgram: empty corpus");

  std::optional<Symbol> eos;
  if (!eosName.empty()) {
    eos = internSymbol(eosName);
    for (auto& seq : lines) seq.push_back(*eos);
  }

  std::map<Sequence, std::vector<double>> counts;
  for (const auto& seq : lines) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::size_t start = i >= static_cast<std::size_t>(order) ? i - order : 0;
      Sequence context(seq.begin() + start, seq.begin() + i);
      auto& row = counts[context];
      row.resize(vocab.size(), 0.0);
      row[seq[i]] += 1.0;
    }
  }
  std::map<Sequence, Dist> table;
  for (auto& [context, row] : counts) {
    row.resize(vocab.size(), 0.0);
    double total = 0.0;
    for (double v : row) total += v;
    for (double& v : row) v /= total;
    table.emplace(context, Dist(row));
  }
  return std::make_shared<NgramModel>(order, std::move(vocab), std::move(table), eos, maxLen);
}

Sequence sampleSequence(const AutoregressiveSource& model, CounterRng& rng) {
  Sequence seq;
  while (static_cast<int>(seq.size()) < model.maxLen()) {
    const Dist d = model.nextDist(seq);
    const Symbol s = sampleIndex(d.probs(), rng.nextDouble());
    if (model.eosId() && s == *model.eosId()) break;
    seq.push_back(s);
  }
  return seq;
}

double messageLog2Prob(const AutoregressiveSource& model, const Sequence& x) {
  const auto eos = model.eosId();
  if (eos) {
    if (static_cast<int>(x.size()) > model.maxLen()) return kNegInf;
  } else {
    if (static_cast<int>(x.size()) != model.maxLen()) return kNegInf;
  }
  double total = 0.0;
  Sequence prefix;
  prefix.reserve(x.size());
  for (Symbol s : x) {
    if (s < 0 || s >= model.vocabSize() || (eos && s == *eos)) return kNegInf;
    const Dist d = model.nextDist(prefix);
    if (d[s] <= 0.0) return kNegInf;
    total += std::log2(d[s]);
    prefix.push_back(s);
  }
  if (eos && static_cast<int>(x.size()) < model.maxLen()) {
    const Dist d = model.nextDist(prefix);
    if (d[*eos] <= 0.0) return kNegInf;
    total += std::log2(d[*eos]);
  }
  return total;
}

double logLikelihood(const AutoregressiveSource& model, const Sequence& seq) {
  double total = 0.0;
  Sequence prefix;
  prefix.reserve(seq.size());
  for (Symbol s : seq) {
    if (s < 0 || s >= model.vocabSize()) {
      throw std::invalid_argument("logLikelihood: symbol out of range");
    }
    const Dist d = model.nextDist(prefix);
    if (d[s] <= 0.0) return kNegInf;
    total += std::log2(d[s]);
    prefix.push_back(s);
  }
  return total;
}

std::vector<Sequence> enumerateMessages(const AutoregressiveSource& model, std::size_t cap) {
  const auto eos = model.eosId();
  std::vector<Sequence> out;
  std::size_t visits = 0;
  // Explicit stack of prefixes still to expand, pushed in reverse symbol
  // order so results come out lexicographically.
  std::vector<Sequence> stack;
  stack.push_back({});
  while (!stack.empty()) {
    Sequence prefix = std::move(stack.back());
    stack.pop_back();
    if (++visits > 8 * kTabulationCap) {
      throw std::invalid_argument("enumerateMessages: prefix space too large");
    }
    const bool atMax = static_cast<int>(prefix.size()) >= model.maxLen();
    if (!eos && atMax) {
      out.push_back(prefix);
      if (out.size() > cap) throw std::invalid_argument("enumerateMessages: space exceeds cap");
      continue;
    }
    const Dist d = model.nextDist(prefix);
    if (eos && (atMax || d[*eos] > 0.0)) {
      out.push_back(prefix);
      if (out.size() > cap) throw std::invalid_argument("enumerateMessages: space exceeds cap");
      if (atMax) continue;
    }
    for (int s = model.vocabSize() - 1; s >= 0; --s) {
      if (eos && s == *eos) continue;
      if (d[s] <= 0.0) continue;
      Sequence child = prefix;
      child.push_back(s);
      stack.push_back(std::move(child));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace entrocoup
