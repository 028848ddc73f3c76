#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entrocoup/errors.hpp"
#include "entrocoup/prefix_tree.hpp"
#include "entrocoup/stego.hpp"
#include "support/oracles.hpp"

using namespace entrocoup;
using entrocoup::testing::enumerateJoint;
using entrocoup::testing::randomOrder1Model;

TEST_CASE("hex contract is MSB-first within each byte") {
  CHECK(bitsToHex({1, 0, 1, 0, 1, 1, 0, 0}) == "ac");
  CHECK(bitsToHex({1, 0, 1}) == "a0");  // trailing pad bits zero
  CHECK(bitsToHex({}) == "");
  CHECK(hexToBits("ac", 8) == Bits{1, 0, 1, 0, 1, 1, 0, 0});
  CHECK(hexToBits("a0", 3) == Bits{1, 0, 1});
  CHECK(hexToBits("", 0) == Bits{});
  CHECK_THROWS_AS(hexToBits("a", 8), std::invalid_argument);
  CHECK_THROWS_AS(hexToBits("zz", 8), std::invalid_argument);
  CounterRng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto bits = randomBits(rng, rng.nextBelow(40));
    CHECK(hexToBits(bitsToHex(bits), bits.size()) == bits);
  }
}

TEST_CASE("xor encryption basics") {
  const Bits m = {1, 0, 1, 1, 0};
  CHECK(xorBits(m, Bits(5, 0)) == m);
  CounterRng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto msg = randomBits(rng, 16);
    const auto key = randomBits(rng, 16);
    CHECK(xorBits(xorBits(msg, key), key) == msg);
  }
  CHECK_THROWS_AS(xorBits(m, Bits(4, 0)), std::invalid_argument);
}

TEST_CASE("ciphertext bits are uniform for random keys") {
  CounterRng rng(99);
  const int n = 100000;
  // skewed messages, uniform keys
  long ones = 0;
  for (int i = 0; i < n; ++i) {
    Bits msg(1, rng.nextDouble() < 0.9 ? 1 : 0);
    Bits key = randomBits(rng, 1);
    ones += xorBits(msg, key)[0];
  }
  const double sigma = std::sqrt(0.25 / n);
  CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 3 * sigma + 1e-12);
}

TEST_CASE("zero-bit ciphertext leaves the covertext untouched and decodes empty") {
  CounterRng rng(404);
  auto covertext = randomOrder1Model(rng, 4, 12);
  for (Variant v : {Variant::timec, Variant::fimec, Variant::arimec}) {
    StegoConfig cfg;
    cfg.variant = v;
    cfg.seed = 5;
    cfg.stegotextLen = 12;
    const auto transcript = stegoEncode({}, covertext, cfg);
    CHECK(transcript.stegotext.size() == 12);
    CHECK(transcript.jointSurprisalBits ==
          doctest::Approx(transcript.channelSurprisalBits).epsilon(1e-12));
    CHECK(stegoDecode(transcript.stegotext, 0, covertext, cfg).empty());
  }
}

TEST_CASE("perfect security at enumeration scale") {
  // sum_x X(x) gamma(y|x) must reproduce the covertext distribution exactly
  CounterRng rng(31);
  const int m = 3;
  auto covertext = randomOrder1Model(rng, 3, m);
  const std::size_t nbits = 2;
  std::vector<Sequence> space = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<double> prior(4, 0.25);
  for (Variant v : {Variant::timec, Variant::fimec, Variant::arimec}) {
    for (bool merging : {false, true}) {
      auto joint = enumerateJoint(
          covertext, [&] { return ciphertextPartitionSet(nbits, v); }, space, prior, m, merging);
      for (std::size_t yi = 0; yi < joint.ys.size(); ++yi) {
        double marginal = 0.0;
        for (std::size_t xi = 0; xi < space.size(); ++xi) marginal += joint.joint[yi][xi];
        CHECK(marginal == doctest::Approx(joint.nuProb[yi]).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("16-bit round trips through a rich order-1 channel") {
  CounterRng meta(616);
  for (Variant v : {Variant::fimec, Variant::arimec}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CounterRng rng = meta.derive(seed * 2 + (v == Variant::fimec ? 0 : 1));
      auto covertext = randomOrder1Model(rng, 8, 100, 2.0);
      const Bits ciphertext = randomBits(rng, 16);
      StegoConfig cfg;
      cfg.variant = v;
      cfg.seed = rng.nextU64();
      cfg.stegotextLen = 100;
      const auto transcript = stegoEncode(ciphertext, covertext, cfg);
      CHECK(stegoDecode(transcript.stegotext, 16, covertext, cfg) == ciphertext);
    }
  }
}

TEST_CASE("a single-symbol covertext alphabet transmits nothing") {
  auto covertext = std::make_shared<FunctionSource>(1, 6, [](const Sequence&) {
    return Dist({1.0});
  });
  StegoConfig cfg;
  cfg.variant = Variant::fimec;
  cfg.stegotextLen = 6;
  const Bits ciphertext = {1, 0, 1, 1};
  const auto transcript = stegoEncode(ciphertext, covertext, cfg);
  CHECK(transcript.stegotext == Sequence(6, 0));
  for (double h : transcript.stepEntropyBits) CHECK(h == doctest::Approx(1.0));  // prior intact
  // MAP falls back to the untouched prior (all ties resolve to zero bits)
  CHECK(stegoDecode(transcript.stegotext, 4, covertext, cfg) == Bits(4, 0));
}

TEST_CASE("decoding a corrupted stegotext symbol fails loudly") {
  CounterRng rng(808);
  auto covertext = randomOrder1Model(rng, 4, 8);
  StegoConfig cfg;
  cfg.stegotextLen = 8;
  CHECK_THROWS_AS(stegoDecode(Sequence{0, 9, 1}, 4, covertext, cfg), DecodeError);
}

TEST_CASE("estimated mutual information respects both entropy caps") {
  CounterRng meta(2025);
  const std::size_t nbits = 4;
  const int m = 3;  // channel carries at most 3 bits
  double condSum = 0.0, chanSum = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    CounterRng rng = meta.derive(t);
    auto covertext = std::make_shared<UniformBitSource>(m);
    StegoConfig cfg;
    cfg.variant = Variant::fimec;
    cfg.seed = rng.nextU64();
    cfg.stegotextLen = m;
    const auto transcript = stegoEncode(randomBits(rng, nbits), covertext, cfg);
    condSum += transcript.jointSurprisalBits - transcript.channelSurprisalBits;
    chanSum += transcript.channelSurprisalBits;
  }
  const double messageEntropy = static_cast<double>(nbits);
  const double estimatedConditional = condSum / trials;   // >= H(M|S)
  const double estimatedInfo = messageEntropy - estimatedConditional;
  const double estimatedChannel = chanSum / trials;       // = H(S) here
  CHECK(estimatedInfo <= messageEntropy + 1e-9);
  CHECK(estimatedInfo <= estimatedChannel + 1e-9);
}

TEST_CASE("linguistic pipeline with a point-mass prior decodes exactly") {
  auto prior = std::make_shared<FunctionSource>(2, 5, [](const Sequence&) {
    return Dist({1.0, 0.0});
  });
  CounterRng rng(11);
  auto covertext = randomOrder1Model(rng, 4, 6);
  StegoConfig cfg;
  cfg.seed = 3;
  cfg.stegotextLen = 6;
  const Sequence sentence(5, 0);
  const auto transcript = linguisticEncode(prior, covertext, sentence, cfg);
  for (double h : transcript.stepEntropyBits) CHECK(h == doctest::Approx(0.0));
  CHECK(linguisticDecode(transcript.stegotext, prior, covertext, cfg) == sentence);
  CHECK_THROWS_AS(linguisticEncode(prior, covertext, Sequence{1, 0, 0, 0, 0}, cfg),
                  std::invalid_argument);
}
