#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxshop/srseval.hpp"

namespace voxshop::srseval {

/// Reads parallel reference/hypothesis transcript files. Each line is either
/// plain text or "id<TAB>text"; lines without an id get their zero-padded
/// line number. Mismatched line counts or ids are schema errors.
std::vector<CorpusPair> read_corpus(const std::filesystem::path& ref_path,
                                    const std::filesystem::path& hyp_path);

std::vector<CorpusPair> pair_corpus(const std::string& ref_text, const std::string& hyp_text);

/// Percent value for structured output: half-up rounded to one decimal.
double percent_value(const Rational& r);

nlohmann::ordered_json to_json(const Alignment& a);
nlohmann::ordered_json to_json(const UtteranceScore& s);
nlohmann::ordered_json to_json(const CorpusReport& report, bool per_utterance);

/// Human-readable word and sentence tables.
std::string render_table(const CorpusReport& report, bool per_utterance);

struct NamedReport {
  std::string system;
  CorpusReport report;
};

/// One row per hypothesis system scored against the same reference.
std::string render_comparison(const std::vector<NamedReport>& reports);
nlohmann::ordered_json comparison_json(const std::vector<NamedReport>& reports, bool per_utterance);

}  // namespace voxshop::srseval
