#include "dilog/simulator.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "dilog/error.hpp"

namespace dilog {

namespace {

constexpr double kInitialInformProbability = 0.3;
constexpr std::string_view kDefaultGoal = "default";
constexpr int kRepresentativeSearch = 200;

// splitmix64; portable across standard libraries, unlike <random> distributions
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
};

DialogAct act(Intent i, std::string_view slot) { return {i, std::string(slot)}; }

class Simulation {
 public:
  explicit Simulation(const GeneratorConfig& config) : config_(config), rng_(config.seed) {}

  Dialog run() {
    const DomainSpec& d = config_.domain;
    dialog_.domain = d;

    std::vector<std::string> extra;
    for (const auto& s : d.system_slots) {
      if (s != kDefaultGoal) extra.push_back(s);
    }
    const std::size_t goal_cap = std::min<std::size_t>(static_cast<std::size_t>(config_.max_goal_requests), extra.size());
    const std::size_t goal_count = rng_.below(goal_cap + 1);
    std::vector<std::string> goals;
    for (std::size_t k = 0; k < goal_count; ++k) {
      const std::size_t j = k + rng_.below(extra.size() - k);
      std::swap(extra[k], extra[j]);
      goals.push_back(extra[k]);
    }

    // Opening: ask for the default goal, possibly informing some user slots.
    std::vector<DialogAct> user;
    for (const auto& s : d.user_slots) {
      if (rng_.chance(kInitialInformProbability)) {
        user.push_back(act(Intent::Inform, s));
        state_.known.insert(s);
      }
    }
    user.push_back(act(Intent::Request, kDefaultGoal));
    fill_slots(std::move(user), std::string(kDefaultGoal));
    deliver(std::string(kDefaultGoal));

    bool corrected = false;
    std::size_t next_goal = 0;
    while (true) {
      if (!corrected && config_.correction_probability > 0.0 && rng_.chance(config_.correction_probability)) {
        corrected = true;
        const std::string& slot = d.user_slots[rng_.below(d.user_slots.size())];
        state_.known.erase(std::string(kDefaultGoal));
        state_.outdated.insert(std::string(kDefaultGoal));
        push({act(Intent::Inform, slot)}, {act(Intent::Query, kDefaultGoal)}, true);
        state_.outdated.clear();
        deliver(std::string(kDefaultGoal));
        continue;
      }
      if (next_goal < goals.size()) {
        const std::string& g = goals[next_goal++];
        push({act(Intent::Request, g)}, {act(Intent::Query, g)}, false);
        deliver(g);
        continue;
      }
      break;
    }
    push({}, {}, false);  // closing turn, no system act
    return std::move(dialog_);
  }

 private:
  // System requests every unknown user slot; the user answers a nonempty
  // subset while repeating the pending goal request. Ends with the query.
  void fill_slots(std::vector<DialogAct> user, const std::string& goal) {
    while (true) {
      std::vector<std::string> unknown;
      for (const auto& s : config_.domain.user_slots) {
        if (!state_.known.count(s)) unknown.push_back(s);
      }
      if (unknown.empty()) {
        push(std::move(user), {act(Intent::Query, goal)}, false);
        return;
      }
      std::vector<DialogAct> sys;
      for (const auto& s : unknown) sys.push_back(act(Intent::Request, s));
      push(std::move(user), std::move(sys), false);

      user.clear();
      std::vector<std::string> answer;
      while (answer.empty()) {
        for (const auto& s : unknown) {
          if (rng_.chance(0.5)) answer.push_back(s);
        }
      }
      for (const auto& s : answer) {
        user.push_back(act(Intent::Inform, s));
        state_.known.insert(s);
      }
      user.push_back(act(Intent::Request, goal));
    }
  }

  // Database return turn: no user act, the goal value arrives and is informed.
  void deliver(const std::string& goal) {
    state_.kb_return.insert(goal);
    push({}, {act(Intent::Inform, goal)}, false);
    state_.kb_return.clear();
    state_.known.insert(goal);
  }

  void push(std::vector<DialogAct> user, std::vector<DialogAct> sys, bool correction) {
    Turn t;
    t.state = state_;
    t.user_acts = std::move(user);
    t.system_acts = std::move(sys);
    t.domain = config_.domain.name;
    t.correction = correction;
    dialog_.turns.push_back(std::move(t));
  }

  const GeneratorConfig& config_;
  Rng rng_;
  BeliefState state_;
  Dialog dialog_;
};

// True when the known user slots are a nonempty proper suffix of the slot
// list, i.e. `all` holds on some user slot but not on the whole list.
bool known_proper_suffix(const Turn& t, const std::vector<std::string>& slots) {
  std::size_t suffix = 0;
  while (suffix < slots.size() && t.state.known.count(slots[slots.size() - 1 - suffix])) ++suffix;
  std::size_t known = 0;
  for (const auto& s : slots) known += t.state.known.count(s);
  return suffix > 0 && suffix < slots.size() && known == suffix;
}

// All act intents occur, and some system request turn has a known proper
// suffix of the user slots.
bool is_representative(const Dialog& d) {
  std::set<Intent> user, sys;
  bool partial = false;
  for (const Turn& t : d.turns) {
    for (const auto& a : t.user_acts) user.insert(a.intent);
    for (const auto& a : t.system_acts) sys.insert(a.intent);
    const bool requests = std::any_of(t.system_acts.begin(), t.system_acts.end(),
                                      [](const DialogAct& a) { return a.intent == Intent::Request; });
    partial = partial || (requests && known_proper_suffix(t, d.domain.user_slots));
  }
  return partial && user.count(Intent::Inform) && user.count(Intent::Request) && sys.count(Intent::Request) &&
         sys.count(Intent::Query) && sys.count(Intent::Inform);
}

}  // namespace

void GeneratorConfig::validate() const {
  domain.validate();
  if (!domain.has_system_slot(kDefaultGoal)) {
    throw ValidationError("domain " + domain.name + " needs a 'default' system slot");
  }
  if (max_goal_requests < 0) throw ValidationError("max_goal_requests must be non-negative");
  if (!(correction_probability >= 0.0 && correction_probability <= 1.0)) {
    throw ValidationError("correction_probability must be in [0, 1]");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  Rng r(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  return r.next();
}

Dialog generate_dialog(const GeneratorConfig& config) {
  config.validate();
  return Simulation(config).run();
}

Dialog representative_dialog(const DomainSpec& domain) {
  GeneratorConfig config;
  config.domain = domain;
  config.correction_probability = 0.0;
  std::optional<Dialog> best;
  for (int s = 0; s < kRepresentativeSearch; ++s) {
    config.seed = static_cast<std::uint64_t>(s);
    Dialog d = generate_dialog(config);
    if (!is_representative(d)) continue;
    if (!best || d.turns.size() < best->turns.size()) best = std::move(d);
  }
  if (!best) throw ValidationError("no representative dialog found for domain " + domain.name);
  return std::move(*best);
}

std::vector<Dialog> generate_corpus(const DomainSpec& domain, int n, std::uint64_t seed, double correction_probability,
                                    int max_goal_requests) {
  if (n < 1) throw ValidationError("corpus size must be at least 1");
  GeneratorConfig base;
  base.domain = domain;
  base.correction_probability = correction_probability;
  base.max_goal_requests = max_goal_requests;
  base.validate();
  std::vector<Dialog> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    GeneratorConfig c = base;
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = Simulation(c).run();
  }
  return out;
}

}  // namespace dilog
