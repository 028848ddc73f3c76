#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entrocoup/merging.hpp"
#include "entrocoup/session.hpp"
#include "support/oracles.hpp"

using namespace entrocoup;
using entrocoup::testing::enumerateJoint;
using entrocoup::testing::randomDist;
using entrocoup::testing::randomOrder1Model;

namespace {

double jointEntropyOf(const entrocoup::testing::JointEnumeration& e) {
  double h = 0.0;
  for (const auto& row : e.joint) {
    for (double p : row) {
      if (p > 0.0) h -= p * std::log2(p);
    }
  }
  return h;
}

double channelEntropyOf(const entrocoup::testing::JointEnumeration& e) {
  double h = 0.0;
  for (double p : e.nuProb) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

TEST_CASE("worked example merges the two equal-update columns") {
  const auto coupling = greedyMEC(Dist({0.5, 0.5}), Dist({0.25, 0.25, 0.5}));
  const MergedCoupling merged = mergeColumns(coupling);
  REQUIRE(merged.groups.size() == 2);
  CHECK(merged.groups[0] == std::vector<int>{0, 1});
  CHECK(merged.groups[1] == std::vector<int>{2});
  CHECK(merged.groupedAt(0, 0) == 0.5);  // bit-exact: (b1, {y1, y2}) -> 1/2
  CHECK(merged.groupedAt(1, 1) == 0.5);  // (b2, {y3}) -> 1/2
  CHECK(merged.groupedAt(0, 1) == 0.0);
  CHECK(merged.groupedAt(1, 0) == 0.0);
  // follow-up conditional over the sampled group {y1, y2}
  CHECK(merged.withinGroupDists[0][0] == 0.5);
  CHECK(merged.withinGroupDists[0][1] == 0.5);
}

TEST_CASE("distinct column posteriors make merging the identity") {
  SparseCoupling c(2, 2, {{{0, 0}, 0.5}, {{1, 1}, 0.5}});
  const MergedCoupling merged = mergeColumns(c);
  REQUIRE(merged.groups.size() == 2);
  CHECK(merged.groups[0] == std::vector<int>{0});
  CHECK(merged.groups[1] == std::vector<int>{1});
  CHECK(merged.groupedAt(0, 0) == doctest::Approx(0.5));
  CHECK(merged.groupedAt(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("grouped tables preserve marginals and reconstruct the coupling") {
  CounterRng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const int r = 1 + static_cast<int>(rng.nextBelow(5));
    const int c = 1 + static_cast<int>(rng.nextBelow(5));
    const auto coupling = greedyMEC(randomDist(rng, r), randomDist(rng, c));
    const MergedCoupling merged = mergeColumns(coupling);

    // row marginals preserved
    const auto rowSums = coupling.rowSums();
    const auto groupedRows = merged.groupedRowSums(r);
    for (int i = 0; i < r; ++i) CHECK(groupedRows[i] == doctest::Approx(rowSums[i]).epsilon(1e-12));

    // grouped column mass equals the sum of member columns
    const auto colSums = coupling.colSums();
    for (std::size_t g = 0; g < merged.groups.size(); ++g) {
      double memberMass = 0.0;
      for (int j : merged.groups[g]) memberMass += colSums[j];
      double groupMass = 0.0;
      for (int i = 0; i < r; ++i) groupMass += merged.groupedAt(i, static_cast<int>(g));
      CHECK(groupMass == doctest::Approx(memberMass).epsilon(1e-12));
    }

    // groups partition the positive columns
    for (int j = 0; j < c; ++j) {
      if (colSums[j] > 0.0) CHECK(merged.groupOfColumn[j] >= 0);
    }

    // grouped entries times within-group conditionals reproduce the coupling
    for (const auto& [key, p] : coupling.entries()) {
      const int g = merged.groupOfColumn[key.second];
      const auto& members = merged.groups[g];
      const auto pos = std::find(members.begin(), members.end(), key.second) - members.begin();
      const double reconstructed =
          merged.groupedAt(key.first, g) * merged.withinGroupDists[g][pos];
      CHECK(reconstructed == doctest::Approx(p).epsilon(1e-9));
    }
  }
}

TEST_CASE("merging never increases the exhaustively measured joint entropy") {
  CounterRng meta(77);
  for (int trial = 0; trial < 8; ++trial) {
    CounterRng rng = meta.derive(trial);
    const int m = 3;
    auto nu = randomOrder1Model(rng, 3, m);
    std::vector<Dist> comps = {randomDist(rng, 2), randomDist(rng, 2)};
    std::vector<Sequence> space;
    std::vector<double> prior;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        space.push_back({a, b});
        prior.push_back(comps[0][a] * comps[1][b]);
      }
    }
    auto plain = enumerateJoint(
        nu, [&] { return makeFactoredPartitionSet(comps); }, space, prior, m, false);
    auto merged = enumerateJoint(
        nu, [&] { return makeFactoredPartitionSet(comps); }, space, prior, m, true);
    CHECK(jointEntropyOf(merged) <= jointEntropyOf(plain) + 1e-9);
    // channel marginal untouched either way
    CHECK(channelEntropyOf(merged) == doctest::Approx(channelEntropyOf(plain)).epsilon(1e-12));
  }
}

TEST_CASE("merging recovers the entropy a coarse partition would waste") {
  // Two fair bits against a uniform 4-way channel step: one coupling can
  // only carry one bit, merging re-couples within the sampled pair and
  // carries both.
  auto nu = std::make_shared<FunctionSource>(4, 1, [](const Sequence&) {
    return Dist::uniform(4);
  });
  std::vector<Dist> comps(2, Dist({0.5, 0.5}));
  std::vector<Sequence> space = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<double> prior(4, 0.25);
  auto plain = enumerateJoint(
      nu, [&] { return makeFactoredPartitionSet(comps); }, space, prior, 1, false);
  auto merged = enumerateJoint(
      nu, [&] { return makeFactoredPartitionSet(comps); }, space, prior, 1, true);
  const double hPlain = jointEntropyOf(plain) - channelEntropyOf(plain);
  const double hMerged = jointEntropyOf(merged) - channelEntropyOf(merged);
  CHECK(hPlain == doctest::Approx(1.0).epsilon(1e-9));   // one bit left unresolved
  CHECK(hMerged == doctest::Approx(0.0).epsilon(1e-9));  // merging resolves both
}

TEST_CASE("with all-singleton groups the merging path equals the plain path") {
  CounterRng meta(991);
  for (int trial = 0; trial < 10; ++trial) {
    CounterRng rng = meta.derive(trial);
    // distinct-column couplings arise with generic (irrational) marginals
    const Dist prior = randomDist(rng, 5);
    auto nu = randomOrder1Model(rng, 3, 4);
    const Symbol x = static_cast<Symbol>(rng.nextBelow(5));
    SessionConfig plainCfg;
    plainCfg.seed = rng.nextU64();
    plainCfg.horizon = 4;
    SessionConfig mergeCfg = plainCfg;
    mergeCfg.merging = true;
    CouplerSession plain(nu, makeSingletonPartitionSet(prior), plainCfg);
    CouplerSession merged(nu, makeSingletonPartitionSet(prior), mergeCfg);
    bool allSingleton = true;
    for (int j = 0; j < 4 && allSingleton; ++j) {
      // check the grouping really is singleton-only for this step
      const auto masses = merged.partitions().blockMasses(0);
      std::vector<double> activeMass;
      for (double v : masses) {
        if (v >= kMassEpsilon) activeMass.push_back(v);
      }
      const auto coupling = greedyMEC(normalizedDist(activeMass), nu->nextDist(merged.emitted()));
      for (const auto& group : mergeColumns(coupling).groups) {
        if (group.size() > 1) allSingleton = false;
      }
      if (!allSingleton) break;
      CHECK(plain.encodeStep({x}) == merged.encodeStep({x}));
    }
  }
}

TEST_CASE("a fully determined message leaves the channel distribution intact") {
  // Point-mass posterior: every column induces the same (degenerate) update,
  // so merging finds one all-encompassing group and the symbol is drawn from
  // the channel itself; the loop must terminate.
  auto nu = std::make_shared<FunctionSource>(3, 5, [](const Sequence&) {
    return Dist({0.2, 0.3, 0.5});
  });
  SessionConfig cfg;
  cfg.seed = 4;
  cfg.merging = true;
  CouplerSession session(nu, makeSingletonPartitionSet(Dist({1.0})), cfg);
  for (int j = 0; j < 5; ++j) session.encodeStep({0});
  CHECK(session.jointSurprisalBits() ==
        doctest::Approx(session.channelSurprisalBits()).epsilon(1e-12));
  // decode replays the same degenerate rounds
  CouplerSession replay(nu, makeSingletonPartitionSet(Dist({1.0})), cfg);
  for (Symbol s : session.emitted()) replay.observeStep(s);
  CHECK(replay.mapEstimate() == Sequence{0});
}
