#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "voxshop/rational.hpp"
#include "voxshop/textnorm.hpp"

namespace voxshop::srseval {

using textnorm::TokenSeq;

enum class EditOp { kMatch, kSubstitution, kDeletion, kInsertion };

/// One step of an alignment. `ref` is empty for insertions and `hyp` is
/// empty for deletions.
struct AlignedPair {
  EditOp op;
  std::string ref;
  std::string hyp;

  bool operator==(const AlignedPair&) const = default;
};

struct Alignment {
  std::int64_t n_ref = 0;
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;
  std::int64_t insertions = 0;
  std::int64_t correct = 0;
  std::vector<AlignedPair> ops;

  std::int64_t errors() const { return substitutions + deletions + insertions; }
  std::int64_t n_hyp() const { return correct + substitutions + insertions; }

  /// Counts-only alignment (no op sequence), for aggregated totals.
  static Alignment from_counts(std::int64_t n_ref, std::int64_t substitutions,
                               std::int64_t deletions, std::int64_t insertions);

  Alignment& operator+=(const Alignment& other);
};

/// Minimal unit-cost edit alignment. Among minimal alignments the one with
/// the most substitutions is chosen; remaining backtrace ties prefer match
/// or substitution, then deletion, then insertion.
Alignment align(const TokenSeq& reference, const TokenSeq& hypothesis);

// All metric functions return percentages as exact rationals and throw
// Error(kUndefinedMetric) when the reference (or corpus) is empty.

/// (S + D + I) / N * 100
Rational wer(const Alignment& a);
/// (N - S - D - I) / N * 100; always 100 - wer(a).
Rational eq1_accuracy(const Alignment& a);
/// (N - S - D - 2I) / N * 100. Reproduces the "% Word accuracy" row of the
/// classic Kaldi/Watson word-recognition comparison.
Rational table4_word_accuracy(const Alignment& a);

struct PerTypePercent {
  Rational substitution;
  Rational deletion;
  Rational insertion;
};
PerTypePercent per_type_percent(const Alignment& a);

struct UtteranceScore {
  std::string utterance_id;
  Alignment alignment;
  std::optional<Rational> wer_percent;           // absent when the reference is empty
  std::optional<Rational> eq1_accuracy_percent;  // absent when the reference is empty
  bool exact_match = false;
  bool recognized = false;
};

UtteranceScore score_utterance(std::string id, const TokenSeq& reference,
                               const TokenSeq& hypothesis);

struct PhraseRates {
  Rational exact_match_rate;
  Rational recognized_rate;
};
PhraseRates phrase_rates(const std::vector<UtteranceScore>& scores);

struct CountPercent {
  std::int64_t count = 0;
  Rational percent;
};

struct SentenceStats {
  std::int64_t utterances = 0;
  CountPercent with_errors;
  CountPercent with_substitutions;
  CountPercent with_deletions;
  CountPercent with_insertions;
};
SentenceStats sentence_stats(const std::vector<UtteranceScore>& scores);

struct CorpusReport {
  Alignment totals;  // counts only; ops are left empty
  Rational wer_percent;
  Rational eq1_accuracy_percent;
  Rational table4_word_accuracy_percent;
  PerTypePercent per_type_percent;
  SentenceStats sentence_stats;
  Rational phrase_exact_match_rate_percent;
  Rational phrase_recognized_rate_percent;
  std::vector<UtteranceScore> utterances;  // sorted by utterance id
};

struct CorpusPair {
  std::string id;
  std::string reference;
  std::string hypothesis;
};

/// Normalizes, aligns and aggregates. Utterances are scored and summed in
/// ascending id order; duplicate ids are a schema error.
CorpusReport corpus_report(std::vector<CorpusPair> pairs);

}  // namespace voxshop::srseval
