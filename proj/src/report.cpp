#include "voxshop/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "voxshop/error.hpp"

namespace voxshop::srseval {
namespace {

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Line {
  std::optional<std::string> id;
  std::string text;
};

Line split_id(const std::string& line) {
  auto tab = line.find('\t');
  if (tab == std::string::npos) return {std::nullopt, line};
  return {line.substr(0, tab), line.substr(tab + 1)};
}

const char* op_name(EditOp op) {
  switch (op) {
    case EditOp::kMatch: return "MATCH";
    case EditOp::kSubstitution: return "SUB";
    case EditOp::kDeletion: return "DEL";
    case EditOp::kInsertion: return "INS";
  }
  return "?";
}

std::string pct(const Rational& r) { return r.to_fixed(1) + "%"; }

nlohmann::ordered_json count_percent_json(const CountPercent& cp) {
  return {{"count", cp.count}, {"percent", percent_value(cp.percent)}};
}

}  // namespace

std::vector<CorpusPair> pair_corpus(const std::string& ref_text, const std::string& hyp_text) {
  auto ref_lines = read_lines(ref_text);
  auto hyp_lines = read_lines(hyp_text);
  if (ref_lines.empty()) throw Error(ErrorCode::kSchema, "reference file is empty");
  if (hyp_lines.empty()) throw Error(ErrorCode::kSchema, "hypothesis file is empty");
  if (ref_lines.size() != hyp_lines.size()) {
    throw Error(ErrorCode::kSchema, fmt::format("line count mismatch: reference has {}, hypothesis has {}",
                                                ref_lines.size(), hyp_lines.size()));
  }
  const std::size_t width = std::to_string(ref_lines.size()).size();
  std::vector<CorpusPair> pairs;
  pairs.reserve(ref_lines.size());
  for (std::size_t i = 0; i < ref_lines.size(); ++i) {
    Line ref = split_id(ref_lines[i]);
    Line hyp = split_id(hyp_lines[i]);
    if (ref.id && hyp.id && *ref.id != *hyp.id) {
      throw Error(ErrorCode::kSchema, fmt::format("line {}: reference id '{}' does not match hypothesis id '{}'",
                                                  i + 1, *ref.id, *hyp.id));
    }
    std::string id = ref.id ? *ref.id : hyp.id ? *hyp.id : fmt::format("{:0{}}", i + 1, width);
    pairs.push_back({std::move(id), std::move(ref.text), std::move(hyp.text)});
  }
  return pairs;
}

std::vector<CorpusPair> read_corpus(const std::filesystem::path& ref_path,
                                    const std::filesystem::path& hyp_path) {
  return pair_corpus(slurp(ref_path), slurp(hyp_path));
}

double percent_value(const Rational& r) {
  return static_cast<double>(r.round_scaled(1)) / 10.0;
}

nlohmann::ordered_json to_json(const Alignment& a) {
  return {{"n_ref", a.n_ref},
          {"substitutions", a.substitutions},
          {"deletions", a.deletions},
          {"insertions", a.insertions},
          {"correct", a.correct}};
}

nlohmann::ordered_json to_json(const UtteranceScore& s) {
  nlohmann::ordered_json j;
  j["utterance_id"] = s.utterance_id;
  auto counts = to_json(s.alignment);
  for (auto& [k, v] : counts.items()) j[k] = v;
  j["wer_percent"] = s.wer_percent ? nlohmann::ordered_json(percent_value(*s.wer_percent)) : nullptr;
  j["eq1_accuracy_percent"] =
      s.eq1_accuracy_percent ? nlohmann::ordered_json(percent_value(*s.eq1_accuracy_percent)) : nullptr;
  j["exact_match"] = s.exact_match;
  j["recognized"] = s.recognized;
  auto ops = nlohmann::ordered_json::array();
  for (const auto& p : s.alignment.ops) {
    nlohmann::ordered_json op = {{"op", op_name(p.op)}};
    if (p.op != EditOp::kInsertion) op["ref"] = p.ref;
    if (p.op != EditOp::kDeletion) op["hyp"] = p.hyp;
    ops.push_back(std::move(op));
  }
  j["ops"] = std::move(ops);
  return j;
}

nlohmann::ordered_json to_json(const CorpusReport& report, bool per_utterance) {
  nlohmann::ordered_json j = to_json(report.totals);
  j["wer_percent"] = percent_value(report.wer_percent);
  j["eq1_accuracy_percent"] = percent_value(report.eq1_accuracy_percent);
  j["table4_word_accuracy_percent"] = percent_value(report.table4_word_accuracy_percent);
  j["substitution_percent"] = percent_value(report.per_type_percent.substitution);
  j["deletion_percent"] = percent_value(report.per_type_percent.deletion);
  j["insertion_percent"] = percent_value(report.per_type_percent.insertion);
  j["phrase_exact_match_rate_percent"] = percent_value(report.phrase_exact_match_rate_percent);
  j["phrase_recognized_rate_percent"] = percent_value(report.phrase_recognized_rate_percent);
  const SentenceStats& st = report.sentence_stats;
  j["sentence_stats"] = {{"utterances", st.utterances},
                         {"with_errors", count_percent_json(st.with_errors)},
                         {"with_substitutions", count_percent_json(st.with_substitutions)},
                         {"with_deletions", count_percent_json(st.with_deletions)},
                         {"with_insertions", count_percent_json(st.with_insertions)}};
  if (per_utterance) {
    auto list = nlohmann::ordered_json::array();
    for (const auto& u : report.utterances) list.push_back(to_json(u));
    j["utterances"] = std::move(list);
  }
  return j;
}

std::string render_table(const CorpusReport& report, bool per_utterance) {
  const Alignment& t = report.totals;
  const SentenceStats& st = report.sentence_stats;
  std::string out;
  out += fmt::format("Total words: {}\n", t.n_ref);
  out += fmt::format("{:<32}{:>10}{:>10}\n", "", "words", "percent");
  out += fmt::format("{:<32}{:>10}{:>10}\n", "total error (WER)", t.errors(), pct(report.wer_percent));
  out += fmt::format("{:<32}{:>10}{:>10}\n", "correct (N-S-D-I)/N", t.n_ref - t.errors(),
                     pct(report.eq1_accuracy_percent));
  out += fmt::format("{:<32}{:>10}{:>10}\n", "substitutions", t.substitutions,
                     pct(report.per_type_percent.substitution));
  out += fmt::format("{:<32}{:>10}{:>10}\n", "deletions", t.deletions, pct(report.per_type_percent.deletion));
  out += fmt::format("{:<32}{:>10}{:>10}\n", "insertions", t.insertions, pct(report.per_type_percent.insertion));
  out += fmt::format("{:<32}{:>10}{:>10}\n", "word accuracy (N-S-D-2I)/N", "",
                     pct(report.table4_word_accuracy_percent));
  out += "\n";
  out += fmt::format("Sentences: {}\n", st.utterances);
  out += fmt::format("{:<32}{:>10}{:>10}\n", "sentences with", "count", "percent");
  auto row = [&](const char* label, const CountPercent& cp) {
    out += fmt::format("{:<32}{:>10}{:>10}\n", label, cp.count, pct(cp.percent));
  };
  row("errors", st.with_errors);
  row("substitutions", st.with_substitutions);
  row("deletions", st.with_deletions);
  row("insertions", st.with_insertions);
  out += "\n";
  out += fmt::format("{:<32}{:>20}\n", "phrase exact-match rate", pct(report.phrase_exact_match_rate_percent));
  out += fmt::format("{:<32}{:>20}\n", "phrase recognized rate", pct(report.phrase_recognized_rate_percent));

  if (per_utterance) {
    out += "\n";
    out += fmt::format("{:<16}{:>6}{:>6}{:>6}{:>6}{:>10}{:>8}{:>8}\n", "utterance", "N", "S", "D", "I",
                       "WER", "exact", "recog");
    for (const auto& u : report.utterances) {
      const Alignment& a = u.alignment;
      out += fmt::format("{:<16}{:>6}{:>6}{:>6}{:>6}{:>10}{:>8}{:>8}\n", u.utterance_id, a.n_ref,
                         a.substitutions, a.deletions, a.insertions,
                         u.wer_percent ? pct(*u.wer_percent) : std::string("n/a"),
                         u.exact_match ? "yes" : "no", u.recognized ? "yes" : "no");
    }
  }
  return out;
}

std::string render_comparison(const std::vector<NamedReport>& reports) {
  std::string out;
  out += fmt::format("{:<24}{:>9}{:>14}{:>11}{:>16}{:>14}\n", "system", "WER (%)", "N-S-D-I (%)",
                     "exact (%)", "recognized (%)", "word acc (%)");
  for (const auto& r : reports) {
    out += fmt::format("{:<24}{:>9}{:>14}{:>11}{:>16}{:>14}\n", r.system, r.report.wer_percent.to_fixed(1),
                       r.report.eq1_accuracy_percent.to_fixed(1),
                       r.report.phrase_exact_match_rate_percent.to_fixed(1),
                       r.report.phrase_recognized_rate_percent.to_fixed(1),
                       r.report.table4_word_accuracy_percent.to_fixed(1));
  }
  return out;
}

nlohmann::ordered_json comparison_json(const std::vector<NamedReport>& reports, bool per_utterance) {
  auto list = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j = {{"system", r.system}};
    auto body = to_json(r.report, per_utterance);
    for (auto& [k, v] : body.items()) j[k] = v;
    list.push_back(std::move(j));
  }
  return list;
}

}  // namespace voxshop::srseval
