#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dilog/gradcheck.hpp"
#include "dilog/io.hpp"
#include "dilog/simulator.hpp"
#include "oracle.hpp"

using namespace dilog;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- all task

struct AllRun {
  TrainedModel model;
  std::string serialized;
  double seconds = 0.0;
};

Sample all_sample() {
  Sample s;
  for (const char* a : {"terminal(t)", "succ(a, b)", "succ(b, c)", "succ(c, d)", "succ(d, e)", "succ(e, t)",
                        "succ(f, g)", "succ(g, h)", "succ(h, t)", "true(a)", "true(c)", "true(d)", "true(e)",
                        "true(f)", "true(g)"}) {
    s.background.push_back(parse_atom(a));
  }
  for (const char* a : {"all(c)", "all(d)", "all(e)"}) s.positive.push_back(parse_atom(a));
  for (const char* a : {"all(a)", "all(b)", "all(f)", "all(g)", "all(h)"}) s.negative.push_back(parse_atom(a));
  s.constants = {"a", "b", "c", "d", "e", "f", "g", "h", "t"};
  return s;
}

AllRun run_all_task() {
  const auto t0 = Clock::now();
  Problem pb;
  pb.frame.targets = {{"all", 1}};
  pb.frame.extensional = {{"succ", 2}, {"terminal", 1}, {"true", 1}};
  pb.samples = {all_sample()};
  ProgramTemplate pt;
  pt.auxiliary = {{"pred1", 2}};
  pt.predicates = {{{"all", 1}, {{1, true}}}, {{"pred1", 2}, {{0, true}, {0, true}}}};
  pt.forward_steps = 12;
  Hyperparams hp;
  hp.training_steps = 2000;
  hp.restarts = 4;
  AllRun run;
  run.model = train(pb, pt, hp);
  run.serialized = io::to_json(run.model).dump() + format_program(extract_program(run.model));
  run.seconds = seconds_since(t0);
  return run;
}

Outcome check_all_task(const AllRun& run) {
  const CrispProgram crisp(extract_program(run.model));
  const Sample s = all_sample();
  const std::size_t label_errors = crisp.errors(s);

  std::mt19937_64 rng(2024);
  std::size_t held_out_errors = 0, held_out_atoms = 0;
  for (int k = 0; k < 20; ++k) {
    const int length = std::uniform_int_distribution<int>(1, 6)(rng);
    std::vector<std::string> nodes;
    for (int i = 0; i < length; ++i) nodes.push_back("n" + std::to_string(i));
    std::map<std::string, std::string> succ;
    std::set<std::string> property;
    std::vector<Atom> bg = {parse_atom("terminal(t)")};
    for (int i = 0; i < length; ++i) {
      succ[nodes[i]] = i + 1 < length ? nodes[i + 1] : "t";
      bg.push_back(parse_atom("succ(" + nodes[i] + ", " + succ[nodes[i]] + ")"));
      if (std::bernoulli_distribution(0.7)(rng)) {
        property.insert(nodes[i]);
        bg.push_back(parse_atom("true(" + nodes[i] + ")"));
      }
    }
    std::vector<std::string> constants = nodes;
    constants.push_back("t");
    const auto derived = oracle::facts_of(crisp.infer(bg, constants));
    for (const auto& c : constants) {
      ++held_out_atoms;
      const bool expected = oracle::all_holds(c, succ, {"t"}, property);
      held_out_errors += expected != (derived.count(oracle::key("all", {c})) == 1);
    }
  }
  const double final_loss = run.model.loss_trace.back();
  return {label_errors == 0 && held_out_errors == 0 && run.seconds < 300.0,
          fmt("loss %.2e, label errors %zu/8, held-out errors %zu/%zu on 20 lists, %.1fs", final_loss, label_errors,
              held_out_errors, held_out_atoms, run.seconds)};
}

// ------------------------------------------------------------------ SimDial

struct SimdialRun {
  TrainedModel model;
  PolicyProgram program;
  std::map<std::string, MetricsReport> reports;
  std::string serialized;
  double seconds = 0.0;
};

std::vector<LabeledSample> evaluation_samples(const std::string& domain, std::string* serialized) {
  const auto dialogs = generate_corpus(builtin_domain(domain), 500, 1, 0.02);
  if (serialized) *serialized += io::dialogs_to_jsonl(dialogs);
  return simdial_samples(dialogs);
}

SimdialRun run_simdial(const Hyperparams& hp) {
  const auto t0 = Clock::now();
  SimdialRun run;
  const auto train_samples = simdial_samples({representative_dialog(builtin_domain("restaurant"))});
  run.model = train_policy(simdial_policy_config(), train_samples, hp);
  run.program = extract_program(run.model);
  const CrispProgram crisp(run.program);
  run.serialized = io::samples_to_jsonl(train_samples) + io::to_json(run.model).dump() + format_program(run.program);
  for (const auto& name : builtin_domain_names()) {
    const auto samples = evaluation_samples(name, &run.serialized);
    const auto predictions = predict(crisp, samples);
    run.reports[name] = score_predictions(predictions, samples);
    run.serialized += io::predictions_to_jsonl(predictions) + io::to_json(run.reports[name]).dump();
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome check_in_domain(const SimdialRun& run) {
  const DomainMetrics& m = run.reports.at("restaurant").overall;
  return {m.intent.f1 >= 0.99 && m.entity.f1 >= 0.99 && run.seconds < 1800.0,
          fmt("restaurant intent F1 %.4f (se %.4f), entity F1 %.4f (se %.4f), %zu turns, %.1fs", m.intent.f1,
              m.intent.standard_error, m.entity.f1, m.entity.standard_error, m.turns, run.seconds)};
}

Outcome check_transfer(const SimdialRun& run) {
  bool pass = true;
  std::string detail;
  for (const char* name : {"movie", "bus", "weather"}) {
    const DomainMetrics& m = run.reports.at(name).overall;
    pass = pass && m.intent.f1 >= 0.99 && m.entity.f1 >= 0.99;
    detail += fmt("%s %.4f/%.4f ", name, m.intent.f1, m.entity.f1);
  }
  return {pass, detail + "(intent/entity F1)"};
}

Outcome check_rules(const SimdialRun& run) {
  const Clause req = run.program.rules_for({"sys_request", 1}).at(0);
  const Clause inf = run.program.rules_for({"sys_inform", 1}).at(0);
  const bool pass = req == parse_clause("sys_request(V0) <- member_usr(V0), unknown(V0)") &&
                    inf == parse_clause("sys_inform(V0) <- kb_return(V0)");
  return {pass, req.to_string() + " ; " + inf.to_string()};
}

Outcome check_failure_case(const SimdialRun& base, const Hyperparams& hp) {
  const auto samples = simdial_samples(generate_corpus(builtin_domain("restaurant"), 20, 5, 1.0));
  std::vector<LabeledSample> corrections;
  for (const auto& s : samples) {
    if (s.correction) corrections.push_back(s);
  }
  if (corrections.empty()) return {false, "no correction turns generated"};
  const std::vector<DialogAct> gold = {{Intent::Query, "default"}};

  const auto before = predict(CrispProgram(base.program), corrections);
  std::size_t empty_before = 0;
  for (const auto& p : before) empty_before += p.acts.empty();

  GeneratorConfig cfg{builtin_domain("restaurant"), 0, 0, 1.0};
  const std::vector<Dialog> retrain = {representative_dialog(builtin_domain("restaurant")), generate_dialog(cfg)};
  const TrainedModel model = train_policy(simdial_policy_config(), simdial_samples(retrain), hp);
  const CrispProgram fixed(extract_program(model));
  const auto after = predict(fixed, corrections);
  std::size_t correct_after = 0;
  for (const auto& p : after) correct_after += p.acts == gold;

  const auto in_domain = evaluation_samples("restaurant", nullptr);
  const MetricsReport r = score_predictions(predict(fixed, in_domain), in_domain);
  const bool pass = empty_before == corrections.size() && correct_after == corrections.size();
  return {pass, fmt("one-shot predicts nothing on %zu/%zu correction turns; retrained correct on %zu/%zu "
                    "(retrained in-domain intent F1 %.4f)",
                    empty_before, corrections.size(), correct_after, corrections.size(), r.overall.intent.f1)};
}

Outcome check_ablation(const SimdialRun& base, Hyperparams hp) {
  hp.amalgamation = Amalgamation::ProbabilisticSum;
  const auto samples = simdial_samples({representative_dialog(builtin_domain("restaurant"))});
  const TrainedModel sum = train_policy(simdial_policy_config(), samples, hp);
  const int max_step = first_step_below(base.model.loss_trace, 0.01);
  const int sum_step = first_step_below(sum.loss_trace, 0.01);
  const bool pass = max_step >= 0 && (sum_step < 0 || max_step <= sum_step);
  return {pass, fmt("steps to loss < 0.01: max %d, sum %d (-1 = never); final loss max %.2e, sum %.2e", max_step,
                    sum_step, base.model.loss_trace.back(), sum.loss_trace.back())};
}

// ---------------------------------------------------------------- gradients

Outcome check_gradients() {
  GradcheckOptions opt;
  opt.instances = 100;
  const GradcheckReport report = run_gradcheck(opt);

  // Independent finite differences through the public loss.
  int checked = 0, skipped = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1000; checked < 100; ++seed) {
    GradcheckInstance inst = random_instance(seed, opt);
    Dataset data(inst.spec, inst.samples);
    const auto g = grad(data, inst.weights, inst.hyperparams);
    auto f = [&](const std::vector<double>& x) {
      ClauseWeights w = inst.weights;
      w.raw() = x;
      return loss(data, w, inst.hyperparams);
    };
    const std::vector<double> x = inst.weights.raw();
    const double f0 = f(x);
    bool smooth = true;
    std::vector<double> fd(x.size());
    for (std::size_t j = 0; j < x.size() && smooth; ++j) {
      std::vector<double> xp = x, xm = x;
      xp[j] += opt.step;
      xm[j] -= opt.step;
      const double fwd = (f(xp) - f0) / opt.step, bwd = (f0 - f(xm)) / opt.step;
      smooth = std::abs(fwd - bwd) <= 0.01 * std::max({std::abs(fwd), std::abs(bwd), 1e-6});
      fd[j] = oracle::central_difference(f, x, j, opt.step);
    }
    if (!smooth) {
      ++skipped;
      continue;
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
      worst = std::max(worst, std::abs(g[j] - fd[j]) / std::max({std::abs(g[j]), std::abs(fd[j]), opt.floor}));
    }
    ++checked;
  }
  const bool pass = report.checked >= 100 && report.max_relative_error <= 1e-4 && worst <= 1e-4;
  return {pass, fmt("library check %d instances max rel err %.2e (%d non-smooth skipped); independent check %d "
                    "instances max rel err %.2e (%d skipped)",
                    report.checked, report.max_relative_error, report.nonsmooth, checked, worst, skipped)};
}

// --------------------------------------------------------- crisp agreement

struct AgreementCase {
  LanguageFrame frame;
  ProgramTemplate pt;
  std::vector<Clause> background;
  std::vector<std::string> fact_predicates;  // extensional predicates placed in backgrounds
};

std::vector<Atom> candidate_facts(const AgreementCase& ac, const std::vector<std::string>& constants) {
  std::vector<Atom> out;
  for (const auto& p : ac.frame.extensional) {
    if (std::find(ac.fact_predicates.begin(), ac.fact_predicates.end(), p.name) == ac.fact_predicates.end()) continue;
    if (p.arity == 1) {
      for (const auto& c : constants) out.push_back(parse_atom(p.name + "(" + c + ")"));
    } else {
      for (const auto& a : constants) {
        for (const auto& b : constants) out.push_back(parse_atom(p.name + "(" + a + ", " + b + ")"));
      }
    }
  }
  return out;
}

struct AgreementTally {
  std::size_t programs = 0, backgrounds = 0, atoms = 0, mismatches = 0;
};

void compare(const ModelSpec& spec, const CompiledModel& model, const std::vector<std::size_t>& choice,
             const std::vector<Atom>& bg, const std::vector<std::string>& constants, AgreementTally& tally) {
  ClauseWeights w(spec);
  std::vector<double> probs(w.size(), 0.0);
  std::vector<Clause> clauses = spec.background;
  for (std::size_t k = 0; k < spec.slots.size(); ++k) {
    probs[w.offset(k) + choice[k]] = 1.0;
    clauses.push_back(spec.slots[k].clauses[choice[k]]);
  }
  Sample s;
  s.background = bg;
  s.constants = constants;
  const Valuation v = infer(model, probs, init_valuation(s, model));
  const auto expected = oracle::forward_chain(clauses, oracle::facts_of(bg), constants, spec.forward_steps);
  ++tally.backgrounds;
  for (std::size_t i = 1; i < v.size(); ++i) {
    ++tally.atoms;
    const bool truth = expected.count(oracle::key(model.index.atom(i))) == 1;
    if (v[i] != (truth ? 1.0 : 0.0)) ++tally.mismatches;
  }
}

void run_agreement(const AgreementCase& ac, std::size_t max_programs, std::uint64_t seed, AgreementTally& tally) {
  const ModelSpec spec = build_model_spec(ac.pt, ac.frame, ac.background);
  std::mt19937_64 rng(seed);
  std::size_t total = 1;
  for (const auto& s : spec.slots) total *= s.clauses.size();
  std::vector<std::vector<std::size_t>> choices;
  if (total <= max_programs) {
    std::vector<std::size_t> c(spec.slots.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
      choices.push_back(c);
      for (std::size_t k = 0; k < c.size() && ++c[k] == spec.slots[k].clauses.size(); ++k) c[k] = 0;
    }
  } else {
    for (std::size_t n = 0; n < max_programs; ++n) {
      std::vector<std::size_t> c;
      for (const auto& s : spec.slots) c.push_back(rng() % s.clauses.size());
      choices.push_back(c);
    }
  }
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
  for (std::size_t n = 1; n <= pool.size(); ++n) {
    const std::vector<std::string> constants(pool.begin(), pool.begin() + static_cast<long>(n));
    const CompiledModel model = compile(spec, constants);
    const auto facts = candidate_facts(ac, constants);
    std::vector<std::vector<Atom>> backgrounds;
    if (facts.size() <= 8) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << facts.size()); ++mask) {
        std::vector<Atom> bg;
        for (std::size_t i = 0; i < facts.size(); ++i) {
          if (mask >> i & 1) bg.push_back(facts[i]);
        }
        backgrounds.push_back(bg);
      }
    } else {
      for (int r = 0; r < 6; ++r) {
        std::vector<Atom> bg;
        const double density = std::uniform_real_distribution<double>(0.1, 0.6)(rng);
        for (const auto& a : facts) {
          if (std::bernoulli_distribution(density)(rng)) bg.push_back(a);
        }
        backgrounds.push_back(bg);
      }
    }
    for (const auto& choice : choices) {
      for (const auto& bg : backgrounds) compare(spec, model, choice, bg, constants, tally);
    }
  }
  tally.programs += choices.size();
}

Outcome check_agreement() {
  AgreementTally tally;

  AgreementCase one;
  one.frame.targets = {{"p", 1}};
  one.frame.extensional = {{"q", 1}, {"e", 2}, {"s", 1}};
  one.background = {parse_clause("s(X) <- e(X, Y), q(Y)")};
  one.fact_predicates = {"q", "e"};
  one.pt.predicates = {{{"p", 1}, {{1, true}}}};
  one.pt.forward_steps = 3;
  run_agreement(one, 100000, 1, tally);

  AgreementCase two;
  two.frame.targets = {{"p", 2}};
  two.frame.extensional = {{"e", 2}, {"q", 1}};
  two.fact_predicates = {"e", "q"};
  two.pt.auxiliary = {{"r", 1}};
  two.pt.predicates = {{{"p", 2}, {{0, true}, {1, true}}}, {{"r", 1}, {{0, true}}}};
  two.pt.forward_steps = 4;
  run_agreement(two, 150, 2, tally);

  return {tally.mismatches == 0, fmt("%zu one-hot programs, %zu backgrounds, %zu atoms compared, %zu mismatches",
                                     tally.programs, tally.backgrounds, tally.atoms, tally.mismatches)};
}

// ------------------------------------------------------------ multi-domain

std::set<std::string> strings(const std::vector<Atom>& atoms) {
  std::set<std::string> out;
  for (const auto& a : atoms) out.insert(a.to_string());
  return out;
}

Outcome check_multiwoz() {
  std::size_t failures = 0;
  AnnotatedTurn t;
  t.user_acts = {{"inform", "restaurant", "food"}, {"inform", "restaurant", "area"}};
  t.system_acts = {{"nooffer", "restaurant", "none"}, {"reqmore", "general", "none"}};
  t.belief_state["restaurant"] = {{"food", "eritrean"}, {"pricerange", "not mentioned"},
                                  {"name", "not mentioned"}, {"area", "west"},
                                  {"people", ""}, {"day", ""}, {"time", ""}};
  const auto samples = convert_multiwoz({"example", {t}});
  const std::set<std::string> expected = {"usr_inform(food)", "usr_inform(area)", "known(food)",
                                          "unknown(price)",   "unknown(name)",    "known(area)",
                                          "unknown(people)",  "unknown(day)",     "unknown(time)"};
  failures += samples.size() != 1 || samples[0].built.sample.background.size() != 9 ||
              strings(samples[0].built.sample.background) != expected;
  failures += samples.empty() || strings(samples[0].built.sample.positive) != std::set<std::string>{"nooffer()"};
  for (const char* intent : {"select", "recommend", "offerbook"}) {
    AnnotatedTurn u;
    u.system_acts = {{intent, "hotel", "area"}};
    const auto s = convert_multiwoz({"d", {u}});
    failures += s.size() != 1 || strings(s[0].built.sample.positive) != std::set<std::string>{"sys_inform(area)"};
  }

  std::mt19937_64 rng(9);
  const std::vector<DialogAct> vocab = {{Intent::Inform, "area"}, {Intent::Inform, "price"},
                                        {Intent::Request, "area"}, {Intent::NoOffer, std::nullopt},
                                        {Intent::OfferBooked, std::nullopt}};
  std::size_t property_failures = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<DialogAct> p(rng() % 5), g(rng() % 5);
    for (auto& a : p) a = vocab[rng() % vocab.size()];
    for (auto& a : g) a = vocab[rng() % vocab.size()];
    auto keys = [](const std::vector<DialogAct>& acts) {
      std::vector<std::string> out;
      for (const auto& a : acts) out.push_back(to_string(a.intent) + "|" + a.slot.value_or(""));
      return out;
    };
    const F1Counts c = action_counts(p, g);
    const oracle::Counts o = oracle::best_pairing(keys(p), keys(g));
    property_failures += c.tp != o.tp || c.fp != o.fp || c.fn != o.fn;
    property_failures += c.tp > intent_counts(p, g).tp || c.tp > entity_counts(p, g).tp;
  }
  return {failures == 0 && property_failures == 0,
          fmt("converter checks failed %zu/5, action F1 property failures %zu/1000", failures, property_failures)};
}

}  // namespace

int main() {
  reset_invariant_counters();
  std::map<int, std::pair<std::string, Outcome>> results;
  auto record = [&](int id, const char* name, Outcome o) { results[id] = {name, std::move(o)}; };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  AllRun all;
  record(1, "all golden task", guarded([&] {
           all = run_all_task();
           return check_all_task(all);
         }));

  const Hyperparams hp;
  SimdialRun simdial;
  record(2, "one-shot in-domain", guarded([&] {
           simdial = run_simdial(hp);
           return check_in_domain(simdial);
         }));
  record(3, "zero-shot transfer", guarded([&] { return check_transfer(simdial); }));
  record(4, "learned rule identity", guarded([&] { return check_rules(simdial); }));
  record(5, "failure case and retraining", guarded([&] { return check_failure_case(simdial, hp); }));
  record(6, "gradient correctness", guarded(check_gradients));
  record(7, "crisp agreement", guarded(check_agreement));
  record(9, "multi-domain converter", guarded(check_multiwoz));
  record(10, "amalgamation ablation", guarded([&] { return check_ablation(simdial, hp); }));
  record(11, "determinism", guarded([&] {
           const AllRun all2 = run_all_task();
           const SimdialRun simdial2 = run_simdial(hp);
           const bool same_all = !all.serialized.empty() && all.serialized == all2.serialized;
           const bool same_simdial = !simdial.serialized.empty() && simdial.serialized == simdial2.serialized;
           return Outcome{same_all && same_simdial,
                          fmt("all task outputs identical: %s (%zu bytes); SimDial outputs identical: %s (%zu bytes)",
                              same_all ? "yes" : "no", all.serialized.size(), same_simdial ? "yes" : "no",
                              simdial.serialized.size())};
         }));
  const InvariantCounters inv = invariant_counters();
  record(8, "monotonicity and range", Outcome{inv.steps_checked > 0 && inv.violations == 0,
                                              fmt("%llu steps checked, %llu violations",
                                                  static_cast<unsigned long long>(inv.steps_checked),
                                                  static_cast<unsigned long long>(inv.violations))});

  int failed = 0;
  for (const auto& [id, r] : results) {
    std::printf("%s %2d %s: %s\n", r.second.pass ? "PASS" : "FAIL", id, r.first.c_str(), r.second.detail.c_str());
    failed += !r.second.pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
