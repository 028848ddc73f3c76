#include "entrocoup/stego.hpp"

#include <limits>
#include <stdexcept>

#include "entrocoup/errors.hpp"
#include "entrocoup/partition.hpp"
#include "entrocoup/prefix_tree.hpp"

namespace entrocoup {

Variant parseVariant(const std::string& name) {
  if (name == "timec") return Variant::timec;
  if (name == "fimec") return Variant::fimec;
  if (name == "arimec") return Variant::arimec;
  throw std::invalid_argument("unknown variant '" + name + "' (timec|fimec|arimec)");
}

std::string variantName(Variant v) {
  switch (v) {
    case Variant::timec: return "timec";
    case Variant::fimec: return "fimec";
    case Variant::arimec: return "arimec";
  }
  return "?";
}

std::string bitsToHex(const Bits& bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  const std::size_t nbytes = (bits.size() + 7) / 8;
  out.reserve(nbytes * 2);
  for (std::size_t byte = 0; byte < nbytes; ++byte) {
    unsigned value = 0;
    for (std::size_t bit = 0; bit < 8; ++bit) {
      const std::size_t idx = byte * 8 + bit;
      value = (value << 1) | (idx < bits.size() ? (bits[idx] & 1) : 0);
    }
    out.push_back(digits[value >> 4]);
    out.push_back(digits[value & 0xf]);
  }
  return out;
}

Bits hexToBits(const std::string& hex, std::size_t nbits) {
  const std::size_t needBytes = (nbits + 7) / 8;
  if (hex.size() < needBytes * 2) {
    throw std::invalid_argument("hex string too short for " + std::to_string(nbits) + " bits");
  }
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw std::invalid_argument(std::string("bad hex digit '") + c + "'");
  };
  Bits bits(nbits);
  for (std::size_t i = 0; i < nbits; ++i) {
    const unsigned byte = (nibble(hex[(i / 8) * 2]) << 4) | nibble(hex[(i / 8) * 2 + 1]);
    bits[i] = static_cast<std::uint8_t>((byte >> (7 - i % 8)) & 1);
  }
  return bits;
}

Bits randomBits(CounterRng& rng, std::size_t n) {
  Bits out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.nextBelow(2));
  return out;
}

Bits xorBits(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw std::invalid_argument("xorBits: length mismatch");
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] ^ b[i]) & 1;
  return out;
}

std::unique_ptr<PartitionSet> ciphertextPartitionSet(std::size_t nbits, Variant variant) {
  if (nbits == 0) {
    return makeSingletonPartitionSet(UniformBitSource(0));  // single empty outcome
  }
  switch (variant) {
    case Variant::timec:
      return makeSingletonPartitionSet(UniformBitSource(static_cast<int>(nbits)));
    case Variant::fimec:
      return makeFactoredPartitionSet(std::vector<Dist>(nbits, Dist({0.5, 0.5})));
    case Variant::arimec:
      return makePrefixTreePartitionSet(
          std::make_shared<UniformBitSource>(static_cast<int>(nbits)));
  }
  throw std::invalid_argument("unknown variant");
}

namespace {

SessionConfig sessionConfig(const StegoConfig& cfg) {
  SessionConfig out;
  out.seed = cfg.seed;
  out.horizon = cfg.stegotextLen;
  out.merging = cfg.merging;
  out.beamWidth = cfg.beamWidth;
  return out;
}

}  // namespace

StegoTranscript stegoEncode(const Bits& ciphertext,
                            std::shared_ptr<const AutoregressiveSource> covertext,
                            const StegoConfig& cfg) {
  CouplerSession session(covertext, ciphertextPartitionSet(ciphertext.size(), cfg.variant),
                         sessionConfig(cfg));
  const Sequence x(ciphertext.begin(), ciphertext.end());
  StegoTranscript out;
  for (int j = 0; j < session.horizon(); ++j) out.stegotext.push_back(session.encodeStep(x));
  out.stepEntropyBits = session.stepPosteriorEntropies();
  out.jointSurprisalBits = session.jointSurprisalBits();
  out.channelSurprisalBits = session.channelSurprisalBits();
  return out;
}

Bits stegoDecode(const Sequence& stegotext, std::size_t nbits,
                 std::shared_ptr<const AutoregressiveSource> covertext, const StegoConfig& cfg) {
  SessionConfig scfg = sessionConfig(cfg);
  if (scfg.horizon == 0) scfg.horizon = static_cast<int>(stegotext.size());
  CouplerSession session(covertext, ciphertextPartitionSet(nbits, cfg.variant), scfg);
  for (Symbol s : stegotext) session.observeStep(s);
  const Sequence decoded = session.mapEstimate();
  if (decoded.size() != nbits) {
    throw DecodeError("decoded message has length " + std::to_string(decoded.size()) +
                      ", expected " + std::to_string(nbits));
  }
  return Bits(decoded.begin(), decoded.end());
}

StegoTranscript linguisticEncode(std::shared_ptr<const AutoregressiveSource> prior,
                                 std::shared_ptr<const AutoregressiveSource> covertext,
                                 const Sequence& plaintext, const StegoConfig& cfg) {
  if (messageLog2Prob(*prior, plaintext) == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("plaintext has zero probability under the prior");
  }
  CouplerSession session(covertext, makePrefixTreePartitionSet(prior), sessionConfig(cfg));
  StegoTranscript out;
  for (int j = 0; j < session.horizon(); ++j) out.stegotext.push_back(session.encodeStep(plaintext));
  out.stepEntropyBits = session.stepPosteriorEntropies();
  out.jointSurprisalBits = session.jointSurprisalBits();
  out.channelSurprisalBits = session.channelSurprisalBits();
  return out;
}

Sequence linguisticDecode(const Sequence& stegotext,
                          std::shared_ptr<const AutoregressiveSource> prior,
                          std::shared_ptr<const AutoregressiveSource> covertext,
                          const StegoConfig& cfg) {
  SessionConfig scfg = sessionConfig(cfg);
  if (scfg.horizon == 0) scfg.horizon = static_cast<int>(stegotext.size());
  CouplerSession session(covertext, makePrefixTreePartitionSet(prior), scfg);
  for (Symbol s : stegotext) session.observeStep(s);
  return session.mapEstimate();
}

}  // namespace entrocoup
