#include "voxshop/srseval.hpp"

#include <algorithm>

#include "voxshop/error.hpp"

namespace voxshop::srseval {
namespace {

void require_reference(std::int64_t n_ref) {
  if (n_ref <= 0) {
    throw Error(ErrorCode::kUndefinedMetric, "metric undefined for an empty reference");
  }
}

void require_corpus(const std::vector<UtteranceScore>& scores) {
  if (scores.empty()) {
    throw Error(ErrorCode::kUndefinedMetric, "metric undefined for an empty corpus");
  }
}

CountPercent count_percent(std::int64_t count, std::int64_t total) {
  return {count, Rational(count * 100, total)};
}

}  // namespace

Alignment Alignment::from_counts(std::int64_t n_ref, std::int64_t substitutions,
                                 std::int64_t deletions, std::int64_t insertions) {
  Alignment a;
  a.n_ref = n_ref;
  a.substitutions = substitutions;
  a.deletions = deletions;
  a.insertions = insertions;
  a.correct = n_ref - substitutions - deletions;
  return a;
}

Alignment& Alignment::operator+=(const Alignment& other) {
  n_ref += other.n_ref;
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  correct += other.correct;
  return *this;
}

Alignment align(const TokenSeq& reference, const TokenSeq& hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();
  const std::size_t width = m + 1;
  // Each cell holds edits * kIndelScale + indels: minimal edit count first,
  // then the fewest insertions/deletions (most substitutions). Both are
  // invariant under swapping reference and hypothesis, so S/D/I tallies are
  // too.
  const auto kIndelScale = static_cast<std::int64_t>(n + m + 1);
  const std::int64_t kSub = kIndelScale;
  const std::int64_t kIndel = kIndelScale + 1;
  std::vector<std::int64_t> cost((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::int64_t& { return cost[i * width + j]; };

  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::int64_t>(j) * kIndel;
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = static_cast<std::int64_t>(i) * kIndel;
    for (std::size_t j = 1; j <= m; ++j) {
      std::int64_t diag = at(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0 : kSub);
      at(i, j) = std::min({diag, at(i - 1, j) + kIndel, at(i, j - 1) + kIndel});
    }
  }

  Alignment result;
  result.n_ref = static_cast<std::int64_t>(n);
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      bool same = reference[i - 1] == hypothesis[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : kSub)) {
        if (same) {
          ++result.correct;
          result.ops.push_back({EditOp::kMatch, reference[i - 1], hypothesis[j - 1]});
        } else {
          ++result.substitutions;
          result.ops.push_back({EditOp::kSubstitution, reference[i - 1], hypothesis[j - 1]});
        }
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + kIndel) {
      ++result.deletions;
      result.ops.push_back({EditOp::kDeletion, reference[i - 1], {}});
      --i;
    } else {
      ++result.insertions;
      result.ops.push_back({EditOp::kInsertion, {}, hypothesis[j - 1]});
      --j;
    }
  }
  std::reverse(result.ops.begin(), result.ops.end());
  return result;
}

Rational wer(const Alignment& a) {
  require_reference(a.n_ref);
  return Rational(a.errors() * 100, a.n_ref);
}

Rational eq1_accuracy(const Alignment& a) {
  require_reference(a.n_ref);
  return Rational((a.n_ref - a.errors()) * 100, a.n_ref);
}

Rational table4_word_accuracy(const Alignment& a) {
  require_reference(a.n_ref);
  return Rational((a.n_ref - a.errors() - a.insertions) * 100, a.n_ref);
}

PerTypePercent per_type_percent(const Alignment& a) {
  require_reference(a.n_ref);
  return {Rational(a.substitutions * 100, a.n_ref), Rational(a.deletions * 100, a.n_ref),
          Rational(a.insertions * 100, a.n_ref)};
}

UtteranceScore score_utterance(std::string id, const TokenSeq& reference,
                               const TokenSeq& hypothesis) {
  UtteranceScore score;
  score.utterance_id = std::move(id);
  score.alignment = align(reference, hypothesis);
  if (score.alignment.n_ref > 0) {
    score.wer_percent = wer(score.alignment);
    score.eq1_accuracy_percent = eq1_accuracy(score.alignment);
  }
  score.exact_match = reference == hypothesis;
  score.recognized = !hypothesis.empty();
  return score;
}

PhraseRates phrase_rates(const std::vector<UtteranceScore>& scores) {
  require_corpus(scores);
  auto total = static_cast<std::int64_t>(scores.size());
  auto exact = std::count_if(scores.begin(), scores.end(),
                             [](const UtteranceScore& s) { return s.exact_match; });
  auto recognized = std::count_if(scores.begin(), scores.end(),
                                  [](const UtteranceScore& s) { return s.recognized; });
  return {Rational(exact * 100, total), Rational(recognized * 100, total)};
}

SentenceStats sentence_stats(const std::vector<UtteranceScore>& scores) {
  require_corpus(scores);
  std::int64_t errors = 0, subs = 0, dels = 0, ins = 0;
  for (const auto& s : scores) {
    const Alignment& a = s.alignment;
    if (a.errors() > 0) ++errors;
    if (a.substitutions > 0) ++subs;
    if (a.deletions > 0) ++dels;
    if (a.insertions > 0) ++ins;
  }
  auto total = static_cast<std::int64_t>(scores.size());
  return {total, count_percent(errors, total), count_percent(subs, total),
          count_percent(dels, total), count_percent(ins, total)};
}

CorpusReport corpus_report(std::vector<CorpusPair> pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kUndefinedMetric, "metric undefined for an empty corpus");
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const CorpusPair& a, const CorpusPair& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].id == pairs[i - 1].id) {
      throw Error(ErrorCode::kSchema, "duplicate utterance id '" + pairs[i].id + "'");
    }
  }

  CorpusReport report;
  report.utterances.reserve(pairs.size());
  for (auto& pair : pairs) {
    report.utterances.push_back(score_utterance(std::move(pair.id),
                                                textnorm::normalize(pair.reference),
                                                textnorm::normalize(pair.hypothesis)));
    report.totals += report.utterances.back().alignment;
  }

  report.wer_percent = wer(report.totals);
  report.eq1_accuracy_percent = eq1_accuracy(report.totals);
  report.table4_word_accuracy_percent = table4_word_accuracy(report.totals);
  report.per_type_percent = per_type_percent(report.totals);
  report.sentence_stats = sentence_stats(report.utterances);
  PhraseRates rates = phrase_rates(report.utterances);
  report.phrase_exact_match_rate_percent = rates.exact_match_rate;
  report.phrase_recognized_rate_percent = rates.recognized_rate;
  return report;
}

}  // namespace voxshop::srseval
