#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "entrocoup/errors.hpp"
#include "entrocoup/prefix_tree.hpp"
#include "entrocoup/seqmodel.hpp"
#include "support/oracles.hpp"

using namespace entrocoup;
using entrocoup::testing::enumerateJoint;
using entrocoup::testing::randomOrder1Model;

TEST_CASE("uniform bit source basics") {
  UniformBitSource src(8);
  CHECK(src.nextDist({})[0] == doctest::Approx(0.5));
  CHECK(src.nextDist({1, 0, 1})[1] == doctest::Approx(0.5));
  double total = 0.0;
  Sequence prefix;
  for (int j = 0; j < src.maxLen(); ++j) {
    total += entropy(src.nextDist(prefix));
    prefix.push_back(0);
  }
  CHECK(total == doctest::Approx(8.0));
  CHECK_THROWS_AS(UniformBitSource(-1), std::invalid_argument);
}

TEST_CASE("empirical 4-bit string frequencies are uniform") {
  UniformBitSource src(4);
  CounterRng rng(2024);
  const int n = 100000;
  std::map<Sequence, int> counts;
  for (int i = 0; i < n; ++i) ++counts[sampleSequence(src, rng)];
  const double p = 1.0 / 16.0;
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(counts.size() == 16);
  for (const auto& [seq, count] : counts) {
    CHECK(std::abs(static_cast<double>(count) / n - p) < 3 * sigma + 1e-12);
  }
}

TEST_CASE("order-0 log likelihood in bits") {
  auto model = std::make_shared<NgramModel>(
      0, std::vector<std::string>{"a", "b", "c"},
      std::map<Sequence, Dist>{{Sequence{}, Dist({0.25, 0.25, 0.5})}}, std::nullopt, 4);
  CHECK(logLikelihood(*model, {2}) == doctest::Approx(-1.0));
  CHECK(logLikelihood(*model, {0}) == doctest::Approx(-2.0));
  CHECK(logLikelihood(*model, {0, 2}) == doctest::Approx(-3.0));
  CHECK_THROWS_AS(logLikelihood(*model, {9}), std::invalid_argument);
}

TEST_CASE("impossible sequences have -infinity likelihood") {
  auto model = std::make_shared<NgramModel>(
      0, std::vector<std::string>{"a", "b"},
      std::map<Sequence, Dist>{{Sequence{}, Dist({1.0, 0.0})}}, std::nullopt, 3);
  CHECK(logLikelihood(*model, {1}) == -std::numeric_limits<double>::infinity());
  CHECK(messageLog2Prob(*model, {0, 1, 0}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("a deterministic model samples its unique sequence") {
  auto model = std::make_shared<NgramModel>(
      1, std::vector<std::string>{"a", "b"},
      std::map<Sequence, Dist>{{Sequence{}, Dist({0.0, 1.0})},
                               {Sequence{0}, Dist({0.0, 1.0})},
                               {Sequence{1}, Dist({1.0, 0.0})}},
      std::nullopt, 4);
  CounterRng rng(1);
  CHECK(sampleSequence(*model, rng) == Sequence{1, 0, 1, 0});
}

TEST_CASE("sampling is reproducible from the seed") {
  CounterRng modelRng(50);
  auto model = randomOrder1Model(modelRng, 4, 12);
  CounterRng a(99), b(99);
  for (int i = 0; i < 10; ++i) CHECK(sampleSequence(*model, a) == sampleSequence(*model, b));
}

TEST_CASE("canonical files round-trip byte for byte") {
  const std::string canonical =
      "ngram k=1 vocab=3 eos=c\n"
      "a b c\n"
      ": 0.5 0.25 0.25\n"
      "a : 0.1 0.8 0.1\n"
      "b : 0.25 0.25 0.5\n";
  std::istringstream in(canonical);
  auto model = parseNgram(in);
  CHECK(model->order() == 1);
  CHECK(model->eosId() == Symbol{2});
  CHECK(formatNgram(*model) == canonical);
  // a second pass is the identity as well
  std::istringstream again(formatNgram(*model));
  CHECK(formatNgram(*parseNgram(again)) == canonical);
}

TEST_CASE("parse errors carry line numbers") {
  auto expectError = [](const std::string& text, int line) {
    std::istringstream in(text);
    try {
      parseNgram(in);
      FAIL_CHECK("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expectError("bogus header\na b\n", 1);
  expectError("ngram k=1 vocab=3 eos=none\na b\n", 2);             // vocab count mismatch
  expectError("ngram k=1 vocab=2 eos=none\na a\n", 2);             // duplicate symbol
  expectError("ngram k=1 vocab=2 eos=zz\na b\n", 1);               // unknown eos
  expectError("ngram k=1 vocab=2 eos=none\na b\n0.5 0.5\n", 3);    // missing ':'
  expectError("ngram k=1 vocab=2 eos=none\na b\nz : 0.5 0.5\n", 3);  // unknown context symbol
  expectError("ngram k=1 vocab=2 eos=none\na b\na b : 0.5 0.5\n", 3);  // context too long
  expectError("ngram k=1 vocab=2 eos=none\na b\na : 0.5\n", 3);    // wrong row width
  expectError("ngram k=1 vocab=2 eos=none\na b\na : 0.5 x\n", 3);  // bad probability
  expectError("ngram k=1 vocab=2 eos=none\na b\na : 0.7 0.5\n", 3);  // sums to 1.2
  expectError("ngram k=1 vocab=2 eos=none\na b\na : 0.5 0.5\na : 0.5 0.5\n", 4);  // duplicate
}

TEST_CASE("unseen contexts fall back to the uniform distribution") {
  auto model = std::make_shared<NgramModel>(
      2, std::vector<std::string>{"a", "b"},
      std::map<Sequence, Dist>{{Sequence{}, Dist({0.9, 0.1})}}, std::nullopt, 5);
  const Dist d = model->nextDist({0, 1});
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(0.5));
}

TEST_CASE("EOS is absorbing") {
  auto model = std::make_shared<NgramModel>(
      1, std::vector<std::string>{"a", "$"},
      std::map<Sequence, Dist>{{Sequence{}, Dist({0.5, 0.5})}, {Sequence{0}, Dist({0.5, 0.5})}},
      Symbol{1}, 6);
  const Dist d = model->nextDist({0, 1});
  CHECK(d[1] == doctest::Approx(1.0));
}

TEST_CASE("fit counts conditional frequencies") {
  std::istringstream corpus("a b a b\nb b\n");
  auto model = fitNgram(corpus, 1, "", 8);
  CHECK(model->vocab() == std::vector<std::string>{"a", "b"});
  // starts: a once, b once
  CHECK(model->nextDist({})[0] == doctest::Approx(0.5));
  // after a: always b (2 of 2)
  CHECK(model->nextDist({0})[1] == doctest::Approx(1.0));
  // after b: a once, b once of 3 transitions (b->a, b->b, plus line end drops)
  CHECK(model->nextDist({1})[0] == doctest::Approx(0.5));

  std::istringstream corpus2("a a\n");
  auto withEos = fitNgram(corpus2, 1, "$", 8);
  REQUIRE(withEos->eosId().has_value());
  CHECK(withEos->vocab().back() == "$");
  CHECK(withEos->nextDist({0, 0})[*withEos->eosId()] == doctest::Approx(0.5));
}

TEST_CASE("mean sample likelihood matches the enumerated entropy") {
  CounterRng modelRng(31337);
  auto model = randomOrder1Model(modelRng, 3, 6);
  // exact sequence entropy by enumeration
  double exact = 0.0;
  for (const auto& seq : enumerateMessages(*model, 100000)) {
    const double lp = messageLog2Prob(*model, seq);
    exact -= std::exp2(lp) * lp;
  }
  CounterRng rng(4242);
  const int n = 20000;
  double mean = 0.0, m2 = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double v = -logLikelihood(*model, sampleSequence(*model, rng));
    const double delta = v - mean;
    mean += delta / i;
    m2 += delta * (v - mean);
  }
  const double se = std::sqrt(m2 / (n - 1) / n);
  CHECK(std::abs(mean - exact) < 4 * se + 1e-9);
}

TEST_CASE("factored and prefix-tree handles agree on induced marginals for uniform bits") {
  CounterRng rng(606);
  const int m = 3;
  auto nu = randomOrder1Model(rng, 3, m);
  auto bits = std::make_shared<UniformBitSource>(2);
  std::vector<Sequence> space = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<double> prior(4, 0.25);
  std::vector<Dist> comps(2, Dist({0.5, 0.5}));
  auto viaFactored = enumerateJoint(
      nu, [&] { return makeFactoredPartitionSet(comps); }, space, prior, m, false);
  auto viaTree = enumerateJoint(
      nu, [&] { return makePrefixTreePartitionSet(bits); }, space, prior, m, false);
  for (std::size_t yi = 0; yi < viaFactored.ys.size(); ++yi) {
    double a = 0.0, b = 0.0;
    for (std::size_t xi = 0; xi < space.size(); ++xi) {
      a += viaFactored.joint[yi][xi];
      b += viaTree.joint[yi][xi];
    }
    CHECK(a == doctest::Approx(b).epsilon(1e-7));
  }
  for (std::size_t xi = 0; xi < space.size(); ++xi) {
    double a = 0.0, b = 0.0;
    for (std::size_t yi = 0; yi < viaFactored.ys.size(); ++yi) {
      a += viaFactored.joint[yi][xi];
      b += viaTree.joint[yi][xi];
    }
    CHECK(a == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(b == doctest::Approx(0.25).epsilon(1e-7));
  }
}

TEST_CASE("missing model files are rejected") {
  CHECK_THROWS_AS(loadNgram("/nonexistent/model.ngram"), std::invalid_argument);
}
