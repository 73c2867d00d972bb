#pragma once

// JSON and JSON-lines file formats for corpora, samples, configs, models,
// predictions and reports.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dilog/dialog.hpp"
#include "dilog/metrics.hpp"
#include "dilog/pipeline.hpp"
#include "dilog/train.hpp"

namespace dilog::io {

using json = nlohmann::ordered_json;

/// Throws ValidationError when the file cannot be read or written.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Parses a document; parse errors become ValidationError.
json parse_json(std::string_view text, std::string_view what);
/// One document per non-empty line; errors name the line.
std::vector<json> parse_jsonl(std::string_view text, std::string_view what);
std::string to_jsonl(const std::vector<json>& records);

json to_json(const DomainSpec& d);
DomainSpec domain_from_json(const json& j);

// Dialog corpus: one dialog per line.
json to_json(const Dialog& d);
Dialog dialog_from_json(const json& j);
std::string dialogs_to_jsonl(const std::vector<Dialog>& dialogs);
std::vector<Dialog> dialogs_from_jsonl(std::string_view text);

// Sample file: one turn per line with B, P, N, C as atom strings.
json to_json(const LabeledSample& s);
LabeledSample sample_from_json(const json& j);
std::string samples_to_jsonl(const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> samples_from_jsonl(std::string_view text);

// Template config.
json to_json(const PolicyConfig& c);
PolicyConfig policy_config_from_json(const json& j);

// Hyperparameters; absent keys keep their defaults.
json to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const json& j);

// Trained model: frame, template, background, hyperparameters, raw weights and loss trace.
json to_json(const TrainedModel& m);
TrainedModel trained_model_from_json(const json& j);

// Predictions: one turn per line.
json to_json(const Prediction& p);
Prediction prediction_from_json(const json& j);
std::string predictions_to_jsonl(const std::vector<Prediction>& predictions);
std::vector<Prediction> predictions_from_jsonl(std::string_view text);

json to_json(const MetricsReport& r);

/// Annotated dialogs, either a JSON array or one dialog per line. Each turn:
///   {"user_acts": [[intent, domain, slot], ...], "system_acts": [...],
///    "belief_state": {domain: {"semi": {slot: value}, "book": {slot: value}}},
///    "db_pointer": {domain: {"no_match": bool, "book_fail": bool}}}
std::vector<AnnotatedDialog> annotated_dialogs_from_json(std::string_view text);
json to_json(const AnnotatedDialog& d);

}  // namespace dilog::io
