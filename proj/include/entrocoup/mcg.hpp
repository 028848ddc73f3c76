#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "entrocoup/dist.hpp"
#include "entrocoup/partition.hpp"
#include "entrocoup/session.hpp"

namespace entrocoup {

struct TabularMDP {
  int states = 0;
  int actions = 0;
  int horizon = 0;
  Dist initial;                                // over states
  std::vector<std::vector<Dist>> transition;   // [s][a] -> Dist over next states
  std::vector<std::vector<std::vector<double>>> reward;  // [s][a][s'], default 0

  void validate() const;
  double rewardAt(int s, int a, int next) const { return reward[s][a][next]; }
};

// Text format:
//   mdp states=<S> actions=<A> horizon=<H>
//   init : p_0 ... p_{S-1}
//   t <s> <a> : p_0 ... p_{S-1}      (one line per state/action pair)
//   r <s> <a> <s'> : <value>         (unlisted rewards are 0)
TabularMDP parseMdp(std::istream& in);
TabularMDP loadMdp(const std::string& path);
std::string formatMdp(const TabularMDP& mdp);
void saveMdp(const TabularMDP& mdp, const std::string& path);

// Chain walk: action 1 moves right, action 0 moves left (clamped at the
// ends), and entering the last state pays 1.
TabularMDP makeChainMdp(int states, int horizon);

struct SoftPolicy {
  double alpha = 1.0;                      // reward units per nat
  std::vector<std::vector<Dist>> action;   // [t][s]
};

// Finite-horizon soft-Bellman backups:
//   V_t(s) = alpha ln sum_a exp(Q_t(s, a) / alpha)
//   pi_t(a|s) proportional to exp(Q_t(s, a) / alpha)
// Deterministic; alpha <= 0 is an error.
SoftPolicy softValueIteration(const TabularMDP& mdp, double alpha);

struct Trajectory {
  std::vector<int> states;  // horizon + 1 entries
  Sequence actions;         // horizon entries
  double totalReward = 0.0;
};

struct MemeEpisode {
  Trajectory trajectory;
  double jointSurprisalBits = 0.0;
  // Message-marginalized action distribution per step (diagnostic; equals
  // the policy row exactly when merging is off).
  std::vector<std::vector<double>> actionMarginals;
};

struct MemeConfig {
  std::uint64_t seed = 0;
  bool merging = false;
  int beamWidth = 1;
  bool recordMarginals = false;
};

// Couples the message posterior with pi(s_t) at every step and acts from the
// message's conditional. Environment transitions draw from an RNG stream
// independent of the coupling stream, so the action marginal at each step is
// exactly pi(s_t) and the expected return matches the policy's.
MemeEpisode memeEncode(const Sequence& message, std::unique_ptr<PartitionSet> posterior,
                       const TabularMDP& mdp, const SoftPolicy& policy, const MemeConfig& cfg);

// Replays the couplings along an observed trajectory and returns the MAP message.
Sequence memeDecode(const Trajectory& trajectory, std::unique_ptr<PartitionSet> posterior,
                    const TabularMDP& mdp, const SoftPolicy& policy, const MemeConfig& cfg);

// Rolls the plain policy (no message), drawing from the same environment and
// coupling RNG streams as memeEncode.
Trajectory rolloutPolicy(const TabularMDP& mdp, const SoftPolicy& policy, std::uint64_t seed);

}  // namespace entrocoup
