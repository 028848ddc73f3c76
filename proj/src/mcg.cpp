#include "entrocoup/mcg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "entrocoup/errors.hpp"
#include "entrocoup/rng.hpp"

namespace entrocoup {

namespace {

constexpr std::uint64_t kCouplingStream = 0x636f7570;  // distinct RNG substreams
constexpr std::uint64_t kEnvironmentStream = 0x656e76;

std::string formatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void TabularMDP::validate() const {
  if (states <= 0 || actions <= 0 || horizon <= 0) {
    throw std::invalid_argument("mdp: dimensions and horizon must be positive");
  }
  if (static_cast<int>(initial.size()) != states) {
    throw std::invalid_argument("mdp: initial distribution has wrong size");
  }
  if (static_cast<int>(transition.size()) != states ||
      static_cast<int>(reward.size()) != states) {
    throw std::invalid_argument("mdp: transition/reward tables have wrong shape");
  }
  for (int s = 0; s < states; ++s) {
    if (static_cast<int>(transition[s].size()) != actions ||
        static_cast<int>(reward[s].size()) != actions) {
      throw std::invalid_argument("mdp: transition/reward tables have wrong shape");
    }
    for (int a = 0; a < actions; ++a) {
      if (static_cast<int>(transition[s][a].size()) != states ||
          static_cast<int>(reward[s][a].size()) != states) {
        throw std::invalid_argument("mdp: transition/reward rows have wrong size");
      }
    }
  }
}

TabularMDP parseMdp(std::istream& in) {
  std::string line;
  int lineNo = 0;
  TabularMDP mdp;
  bool haveHeader = false, haveInit = false;
  std::vector<std::vector<bool>> seen;

  auto parseProbs = [&](const std::vector<std::string>& tokens, std::size_t from, int count) {
    std::vector<double> probs;
    for (std::size_t i = from; i < tokens.size(); ++i) {
      double v = 0.0;
      auto res = std::from_chars(tokens[i].data(), tokens[i].data() + tokens[i].size(), v);
      if (res.ec != std::errc() || res.ptr != tokens[i].data() + tokens[i].size()) {
        throw ParseError("bad number '" + tokens[i] + "'", lineNo);
      }
      probs.push_back(v);
    }
    if (static_cast<int>(probs.size()) != count) {
      throw ParseError("expected " + std::to_string(count) + " values", lineNo);
    }
    return probs;
  };

  while (std::getline(in, line)) {
    ++lineNo;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;

    if (!haveHeader) {
      if (tokens.size() != 4 || tokens[0] != "mdp" || tokens[1].rfind("states=", 0) != 0 ||
          tokens[2].rfind("actions=", 0) != 0 || tokens[3].rfind("horizon=", 0) != 0) {
        throw ParseError("expected 'mdp states=<S> actions=<A> horizon=<H>'", lineNo);
      }
      try {
        mdp.states = std::stoi(tokens[1].substr(7));
        mdp.actions = std::stoi(tokens[2].substr(8));
        mdp.horizon = std::stoi(tokens[3].substr(8));
      } catch (const std::exception&) {
        throw ParseError("bad integer in header", lineNo);
      }
      if (mdp.states <= 0 || mdp.actions <= 0 || mdp.horizon <= 0) {
        throw ParseError("dimensions must be positive", lineNo);
      }
      mdp.transition.assign(mdp.states, std::vector<Dist>(mdp.actions));
      mdp.reward.assign(mdp.states, std::vector<std::vector<double>>(
                                        mdp.actions, std::vector<double>(mdp.states, 0.0)));
      seen.assign(mdp.states, std::vector<bool>(mdp.actions, false));
      haveHeader = true;
      continue;
    }

    if (tokens[0] == "init") {
      if (tokens.size() < 2 || tokens[1] != ":") throw ParseError("expected 'init : p...'", lineNo);
      try {
        mdp.initial = Dist(parseProbs(tokens, 2, mdp.states));
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), lineNo);
      }
      haveInit = true;
    } else if (tokens[0] == "t") {
      if (tokens.size() < 4 || tokens[3] != ":") {
        throw ParseError("expected 't <s> <a> : p...'", lineNo);
      }
      int s = -1, a = -1;
      try {
        s = std::stoi(tokens[1]);
        a = std::stoi(tokens[2]);
      } catch (const std::exception&) {
        throw ParseError("bad state/action index", lineNo);
      }
      if (s < 0 || s >= mdp.states || a < 0 || a >= mdp.actions) {
        throw ParseError("state/action index out of range", lineNo);
      }
      if (seen[s][a]) throw ParseError("duplicate transition row", lineNo);
      seen[s][a] = true;
      try {
        mdp.transition[s][a] = Dist(parseProbs(tokens, 4, mdp.states));
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), lineNo);
      }
    } else if (tokens[0] == "r") {
      if (tokens.size() != 6 || tokens[4] != ":") {
        throw ParseError("expected 'r <s> <a> <s'> : <value>'", lineNo);
      }
      int s = -1, a = -1, n = -1;
      try {
        s = std::stoi(tokens[1]);
        a = std::stoi(tokens[2]);
        n = std::stoi(tokens[3]);
      } catch (const std::exception&) {
        throw ParseError("bad index in reward line", lineNo);
      }
      if (s < 0 || s >= mdp.states || a < 0 || a >= mdp.actions || n < 0 || n >= mdp.states) {
        throw ParseError("reward index out of range", lineNo);
      }
      const auto probs = parseProbs(tokens, 5, 1);
      mdp.reward[s][a][n] = probs[0];
    } else {
      throw ParseError("unknown directive '" + tokens[0] + "'", lineNo);
    }
  }
  if (!haveHeader) throw ParseError("missing header", 1);
  if (!haveInit) throw ParseError("missing init line", lineNo);
  for (int s = 0; s < mdp.states; ++s) {
    for (int a = 0; a < mdp.actions; ++a) {
      if (!seen[s][a]) {
        throw ParseError("missing transition row for state " + std::to_string(s) + " action " +
                             std::to_string(a),
                         lineNo);
      }
    }
  }
  mdp.validate();
  return mdp;
}

TabularMDP loadMdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mdp file: " + path);
  return parseMdp(in);
}

std::string formatMdp(const TabularMDP& mdp) {
  std::ostringstream out;
  out << "mdp states=" << mdp.states << " actions=" << mdp.actions << " horizon=" << mdp.horizon
      << "\n";
  out << "init :";
  for (std::size_t i = 0; i < mdp.initial.size(); ++i) out << " " << formatDouble(mdp.initial[i]);
  out << "\n";
  for (int s = 0; s < mdp.states; ++s) {
    for (int a = 0; a < mdp.actions; ++a) {
      out << "t " << s << " " << a << " :";
      for (int n = 0; n < mdp.states; ++n) out << " " << formatDouble(mdp.transition[s][a][n]);
      out << "\n";
    }
  }
  for (int s = 0; s < mdp.states; ++s) {
    for (int a = 0; a < mdp.actions; ++a) {
      for (int n = 0; n < mdp.states; ++n) {
        if (mdp.reward[s][a][n] != 0.0) {
          out << "r " << s << " " << a << " " << n << " : " << formatDouble(mdp.reward[s][a][n])
              << "\n";
        }
      }
    }
  }
  return out.str();
}

void saveMdp(const TabularMDP& mdp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write mdp file: " + path);
  out << formatMdp(mdp);
}

TabularMDP makeChainMdp(int states, int horizon) {
  TabularMDP mdp;
  mdp.states = states;
  mdp.actions = 2;
  mdp.horizon = horizon;
  mdp.initial = Dist::pointMass(states, 0);
  mdp.transition.assign(states, std::vector<Dist>(2));
  mdp.reward.assign(states,
                    std::vector<std::vector<double>>(2, std::vector<double>(states, 0.0)));
  for (int s = 0; s < states; ++s) {
    const int left = std::max(0, s - 1);
    const int right = std::min(states - 1, s + 1);
    mdp.transition[s][0] = Dist::pointMass(states, left);
    mdp.transition[s][1] = Dist::pointMass(states, right);
    mdp.reward[s][0][states - 1] = 1.0;
    mdp.reward[s][1][states - 1] = 1.0;
  }
  return mdp;
}

SoftPolicy softValueIteration(const TabularMDP& mdp, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("softValueIteration: alpha must be positive");
  mdp.validate();
  SoftPolicy policy;
  policy.alpha = alpha;
  policy.action.assign(mdp.horizon, std::vector<Dist>(mdp.states));
  std::vector<double> vNext(mdp.states, 0.0), v(mdp.states, 0.0);
  for (int t = mdp.horizon - 1; t >= 0; --t) {
    for (int s = 0; s < mdp.states; ++s) {
      std::vector<double> q(mdp.actions, 0.0);
      for (int a = 0; a < mdp.actions; ++a) {
        for (int n = 0; n < mdp.states; ++n) {
          q[a] += mdp.transition[s][a][n] * (mdp.rewardAt(s, a, n) + vNext[n]);
        }
      }
      const double qMax = *std::max_element(q.begin(), q.end());
      double z = 0.0;
      std::vector<double> weights(mdp.actions);
      for (int a = 0; a < mdp.actions; ++a) {
        weights[a] = std::exp((q[a] - qMax) / alpha);
        z += weights[a];
      }
      for (double& w : weights) w /= z;
      policy.action[t][s] = Dist(std::move(weights));
      v[s] = qMax + alpha * std::log(z);
    }
    vNext = v;
  }
  return policy;
}

MemeEpisode memeEncode(const Sequence& message, std::unique_ptr<PartitionSet> posterior,
                       const TabularMDP& mdp, const SoftPolicy& policy, const MemeConfig& cfg) {
  mdp.validate();
  CounterRng root(cfg.seed);
  CounterRng envRng = root.derive(kEnvironmentStream);
  SessionConfig scfg;
  scfg.seed = root.derive(kCouplingStream).key();
  scfg.horizon = mdp.horizon;
  scfg.merging = cfg.merging;
  scfg.beamWidth = cfg.beamWidth;
  scfg.recordTrace = cfg.recordMarginals;
  CouplerSession session(std::move(posterior), scfg);

  MemeEpisode episode;
  int state = sampleIndex(mdp.initial.probs(), envRng.nextDouble());
  episode.trajectory.states.push_back(state);
  for (int t = 0; t < mdp.horizon; ++t) {
    const Dist& pi = policy.action[t][state];
    const Symbol action = session.encodeStepWith(pi, message);
    const int next = sampleIndex(mdp.transition[state][action].probs(), envRng.nextDouble());
    episode.trajectory.actions.push_back(action);
    episode.trajectory.totalReward += mdp.rewardAt(state, action, next);
    episode.trajectory.states.push_back(next);
    state = next;
  }
  if (cfg.recordMarginals) {
    for (const StepRecord& step : session.trace()) {
      episode.actionMarginals.push_back(step.channelMarginal);
    }
  }
  episode.jointSurprisalBits = session.jointSurprisalBits();
  return episode;
}

Sequence memeDecode(const Trajectory& trajectory, std::unique_ptr<PartitionSet> posterior,
                    const TabularMDP& mdp, const SoftPolicy& policy, const MemeConfig& cfg) {
  mdp.validate();
  if (trajectory.actions.size() != static_cast<std::size_t>(mdp.horizon) ||
      trajectory.states.size() != static_cast<std::size_t>(mdp.horizon) + 1) {
    throw DecodeError("trajectory length does not match the horizon");
  }
  SessionConfig scfg;
  scfg.horizon = mdp.horizon;
  scfg.merging = cfg.merging;
  scfg.beamWidth = cfg.beamWidth;
  CouplerSession session(std::move(posterior), scfg);
  for (int t = 0; t < mdp.horizon; ++t) {
    const int state = trajectory.states[t];
    if (state < 0 || state >= mdp.states) throw DecodeError("trajectory state out of range");
    session.observeStepWith(policy.action[t][state], trajectory.actions[t]);
  }
  return session.mapEstimate();
}

Trajectory rolloutPolicy(const TabularMDP& mdp, const SoftPolicy& policy, std::uint64_t seed) {
  mdp.validate();
  CounterRng root(seed);
  CounterRng envRng = root.derive(kEnvironmentStream);
  CounterRng actRng = root.derive(kCouplingStream);
  Trajectory traj;
  int state = sampleIndex(mdp.initial.probs(), envRng.nextDouble());
  traj.states.push_back(state);
  for (int t = 0; t < mdp.horizon; ++t) {
    const int action = sampleIndex(policy.action[t][state].probs(), actRng.nextDouble());
    const int next = sampleIndex(mdp.transition[state][action].probs(), envRng.nextDouble());
    traj.actions.push_back(action);
    traj.totalReward += mdp.rewardAt(state, action, next);
    traj.states.push_back(next);
    state = next;
  }
  return traj;
}

}  // namespace entrocoup
