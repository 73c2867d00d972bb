// dilog command-line workflow: generate, convert, train, extract, transfer,
// eval, gradcheck.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dilog/dialog.hpp"
#include "dilog/error.hpp"
#include "dilog/extract.hpp"
#include "dilog/gradcheck.hpp"
#include "dilog/io.hpp"
#include "dilog/pipeline.hpp"
#include "dilog/simulator.hpp"
#include "dilog/train.hpp"

namespace {

using namespace dilog;
using io::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

void report_error(std::string_view kind, std::string_view message, int code) {
  json rec{{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << rec.dump() << "\n";
}

struct GenerateArgs {
  std::string domain = "restaurant";
  int n = 500;
  std::uint64_t seed = 0;
  double correction_probability = 0.2;
  int max_goals = 2;
  bool representative = false;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  const DomainSpec spec = builtin_domain(a.domain);
  std::vector<Dialog> dialogs;
  if (a.representative) {
    dialogs.push_back(representative_dialog(spec));
  } else {
    dialogs = generate_corpus(spec, a.n, a.seed, a.correction_probability, a.max_goals);
  }
  io::write_file(a.out, io::dialogs_to_jsonl(dialogs));
  std::cout << "wrote " << dialogs.size() << " " << a.domain << " dialogs to " << a.out << "\n";
  return 0;
}

struct ConvertArgs {
  std::string format = "simdial";
  std::string in, out;
};

int run_convert(const ConvertArgs& a) {
  const std::string text = io::read_file(a.in);
  std::vector<LabeledSample> samples;
  if (a.format == "simdial") {
    samples = simdial_samples(io::dialogs_from_jsonl(text));
  } else if (a.format == "multiwoz") {
    samples = multiwoz_samples(io::annotated_dialogs_from_json(text));
  } else {
    throw ValidationError("unknown format '" + a.format + "' (expected simdial or multiwoz)");
  }
  std::size_t skipped = 0;
  for (const auto& s : samples) skipped += s.built.trainable ? 0 : 1;
  io::write_file(a.out, io::samples_to_jsonl(samples));
  std::cout << "wrote " << samples.size() << " samples to " << a.out;
  if (skipped > 0) std::cout << " (" << skipped << " without system acts: scored, not trained on)";
  std::cout << "\n";
  return 0;
}

struct TrainArgs {
  std::string samples, template_path, hp_path, out, trace;
};

int run_train(const TrainArgs& a) {
  const auto samples = io::samples_from_jsonl(io::read_file(a.samples));
  const PolicyConfig config = io::policy_config_from_json(io::parse_json(io::read_file(a.template_path), a.template_path));
  const Hyperparams hp =
      a.hp_path.empty() ? Hyperparams{} : io::hyperparams_from_json(io::parse_json(io::read_file(a.hp_path), a.hp_path));
  const TrainedModel model = train_policy(config, samples, hp);
  io::write_file(a.out, io::to_json(model).dump(1) + "\n");
  if (!a.trace.empty()) {
    std::string csv = "step,loss\n";
    char buf[64];
    for (std::size_t i = 0; i < model.loss_trace.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, model.loss_trace[i]);
      csv += buf;
    }
    io::write_file(a.trace, csv);
  }
  std::printf("trained %zu clauses for %d steps; final loss %.6g (restart %d)\n", model.weights.size(),
              hp.training_steps, model.loss_trace.back(), model.restart);
  return 0;
}

struct ExtractArgs {
  std::string model, out;
  double threshold = 0.1;
};

int run_extract(const ExtractArgs& a) {
  const TrainedModel model = io::trained_model_from_json(io::parse_json(io::read_file(a.model), a.model));
  const PolicyProgram program = extract_program(model, a.threshold);
  const std::string text = format_program(program);
  io::write_file(a.out, text);
  std::cout << text;
  return 0;
}

struct TransferArgs {
  std::string program, samples, out;
};

int run_transfer(const TransferArgs& a) {
  const CrispProgram program(parse_program(io::read_file(a.program)));
  const auto samples = io::samples_from_jsonl(io::read_file(a.samples));
  const auto predictions = predict(program, samples);
  io::write_file(a.out, io::predictions_to_jsonl(predictions));
  std::cout << "wrote " << predictions.size() << " predictions to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string pred, gold, report;
};

int run_eval(const EvalArgs& a) {
  const auto predictions = io::predictions_from_jsonl(io::read_file(a.pred));
  const auto gold = io::samples_from_jsonl(io::read_file(a.gold));
  const MetricsReport report = score_predictions(predictions, gold);
  io::write_file(a.report, io::to_json(report).dump(2) + "\n");
  std::cout << report.summary();
  return 0;
}

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int instances = 100;
  double tolerance = 1e-4;
};

int run_gradcheck(const GradcheckArgs& a) {
  GradcheckOptions o;
  o.seed = a.seed;
  o.instances = a.instances;
  const GradcheckReport r = dilog::run_gradcheck(o);
  json rec{{"instances", r.checked},
           {"nonsmooth_skipped", r.nonsmooth},
           {"coordinates", r.coordinates},
           {"max_relative_error", r.max_relative_error},
           {"max_reference_difference", r.max_reference_difference},
           {"tolerance", a.tolerance}};
  std::cout << rec.dump() << "\n";
  if (!(r.max_relative_error <= a.tolerance)) {
    report_error("numeric", "gradient check exceeded tolerance", kExitNumeric);
    return kExitNumeric;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable ILP dialog policies"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a simulated dialog corpus");
  g->add_option("--domain", gen.domain, "restaurant, movie, bus or weather")->capture_default_str();
  g->add_option("--n", gen.n, "Number of dialogs")->capture_default_str();
  g->add_option("--seed", gen.seed, "Corpus seed")->capture_default_str();
  g->add_option("--correction-probability", gen.correction_probability, "Chance of a slot correction per dialog")
      ->capture_default_str();
  g->add_option("--max-goals", gen.max_goals, "Extra goal requests after the default goal")->capture_default_str();
  g->add_flag("--representative", gen.representative, "Write the single representative dialog instead");
  g->add_option("--out", gen.out, "Output JSONL")->required();

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Convert dialogs to logic samples");
  c->add_option("--format", conv.format, "simdial or multiwoz")->capture_default_str();
  c->add_option("--in", conv.in, "Input corpus")->required();
  c->add_option("--out", conv.out, "Output sample JSONL")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train clause weights");
  t->add_option("--samples", tr.samples, "Sample JSONL")->required();
  t->add_option("--template", tr.template_path, "Template config JSON")->required();
  t->add_option("--hp", tr.hp_path, "Hyperparameter JSON");
  t->add_option("--out", tr.out, "Trained model JSON")->required();
  t->add_option("--trace", tr.trace, "Loss trace CSV");

  ExtractArgs ex;
  auto* e = app.add_subcommand("extract", "Extract a crisp program");
  e->add_option("--model", ex.model, "Trained model JSON")->required();
  e->add_option("--threshold", ex.threshold, "Also list clauses at or above this probability")->capture_default_str();
  e->add_option("--out", ex.out, "Program file")->required();

  TransferArgs tf;
  auto* x = app.add_subcommand("transfer", "Apply a program to samples");
  x->add_option("--program", tf.program, "Program file")->required();
  x->add_option("--samples", tf.samples, "Sample JSONL")->required();
  x->add_option("--out", tf.out, "Prediction JSONL")->required();

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "Score predictions");
  v->add_option("--pred", ev.pred, "Prediction JSONL")->required();
  v->add_option("--gold", ev.gold, "Gold sample JSONL")->required();
  v->add_option("--report", ev.report, "Report JSON")->required();

  GradcheckArgs gc;
  auto* k = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  k->add_option("--seed", gc.seed, "Instance seed")->capture_default_str();
  k->add_option("--instances", gc.instances, "Number of instances")->capture_default_str();
  k->add_option("--tolerance", gc.tolerance, "Maximum relative error")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*g) return run_generate(gen);
    if (*c) return run_convert(conv);
    if (*t) return run_train(tr);
    if (*e) return run_extract(ex);
    if (*x) return run_transfer(tf);
    if (*v) return run_eval(ev);
    if (*k) return run_gradcheck(gc);
  } catch (const DivergenceError& err) {
    report_error("divergence", err.what(), kExitNumeric);
    return kExitNumeric;
  } catch (const ValidationError& err) {
    report_error("validation", err.what(), kExitValidation);
    return kExitValidation;
  } catch (const std::invalid_argument& err) {
    report_error("validation", err.what(), kExitValidation);
    return kExitValidation;
  }
  return kExitValidation;
}
