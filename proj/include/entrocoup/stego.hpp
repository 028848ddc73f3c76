#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "entrocoup/seqmodel.hpp"
#include "entrocoup/session.hpp"

namespace entrocoup {

using Bits = std::vector<std::uint8_t>;

enum class Variant { timec, fimec, arimec };
Variant parseVariant(const std::string& name);
std::string variantName(Variant v);

// Hex contract: MSB-first bit order within each byte, trailing pad bits
// zero, two lowercase hex digits per byte.
std::string bitsToHex(const Bits& bits);
Bits hexToBits(const std::string& hex, std::size_t nbits);

Bits randomBits(CounterRng& rng, std::size_t n);

// Componentwise exclusive-or: encryption and decryption in one. With a
// uniform key the result is uniform regardless of the message distribution.
Bits xorBits(const Bits& a, const Bits& b);

struct StegoConfig {
  Variant variant = Variant::arimec;
  bool merging = false;
  std::uint64_t seed = 0;
  int stegotextLen = 0;  // 0: use the covertext model's maxLen
  int beamWidth = 1;
};

struct StegoTranscript {
  Sequence stegotext;
  Bits decodedCiphertext;               // decode side
  std::vector<double> stepEntropyBits;  // selected-partition posterior entropy per position
  double jointSurprisalBits = 0.0;      // -log2 gamma(x, y); encode side
  double channelSurprisalBits = 0.0;    // -log2 nu(y)
};

// Builds the message-side partition set for a ciphertext of nbits uniform
// bits under the given variant (a degenerate single-outcome set when
// nbits == 0).
std::unique_ptr<PartitionSet> ciphertextPartitionSet(std::size_t nbits, Variant variant);

// Samples stegotext from gamma(Y | X = ciphertext) under the configured
// coupler; the stegotext marginal equals the covertext distribution exactly.
StegoTranscript stegoEncode(const Bits& ciphertext,
                            std::shared_ptr<const AutoregressiveSource> covertext,
                            const StegoConfig& cfg);

// Replays the couplings conditioned on the stegotext and returns the MAP
// ciphertext estimate.
Bits stegoDecode(const Sequence& stegotext, std::size_t nbits,
                 std::shared_ptr<const AutoregressiveSource> covertext, const StegoConfig& cfg);

// Keyless pipeline with an autoregressive plaintext prior (prefix-tree
// coupler both ways). The plaintext must have positive prior probability.
StegoTranscript linguisticEncode(std::shared_ptr<const AutoregressiveSource> prior,
                                 std::shared_ptr<const AutoregressiveSource> covertext,
                                 const Sequence& plaintext, const StegoConfig& cfg);
Sequence linguisticDecode(const Sequence& stegotext,
                          std::shared_ptr<const AutoregressiveSource> prior,
                          std::shared_ptr<const AutoregressiveSource> covertext,
                          const StegoConfig& cfg);

}  // namespace entrocoup
