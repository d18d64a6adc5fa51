#pragma once

// JSON mapping of the domain types (the transcript / annotated-corpus file
// format and the scenario config format).

#include "ace/domain.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ace {

using json = nlohmann::json;

void to_json(json &j, const Scenario &s);
void from_json(const json &j, Scenario &s);

void to_json(json &j, const PreparationSheet &p);
void from_json(const json &j, PreparationSheet &p);

void to_json(json &j, const PriceSignal &s);
void from_json(const json &j, PriceSignal &s);

void to_json(json &j, const Turn &t);
void from_json(const json &j, Turn &t);

void to_json(json &j, const Transcript &t);
void from_json(const json &j, Transcript &t);

void to_json(json &j, const AnnotationLabel &l);
void from_json(const json &j, AnnotationLabel &l);

/// Non-applicable labels are omitted on write.
void to_json(json &j, const AnnotatedTranscript &a);
void from_json(const json &j, AnnotatedTranscript &a);

void to_json(json &j, const FeedbackBundle &b);
void from_json(const json &j, FeedbackBundle &b);

void to_json(json &j, const MetricsReport &r);

/// Reads a corpus: either a JSON array of transcripts or one object per line.
/// Errors name the dialogue index.
std::vector<AnnotatedTranscript> load_corpus(const std::filesystem::path &path);
void save_corpus(const std::filesystem::path &path, const std::vector<AnnotatedTranscript> &corpus);

json read_json_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);
std::string read_text_file(const std::filesystem::path &path);

/// Converts a byte offset into "line L, column C" for diagnostics.
std::string describe_offset(const std::string &text, std::size_t byte_offset);

} // namespace ace
