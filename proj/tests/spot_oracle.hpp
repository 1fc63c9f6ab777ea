#pragma once

// Exhaustive-span reference for keyword spotting. Every contiguous span
// [i, j) is tested against every trigger by trying every way to fill its
// gaps; the shortest matching span per (start, trigger) is the occurrence.
// Selection then takes the longest remaining occurrence, leftmost first,
// grammar order last, until nothing non-overlapping is left.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "voxshop/command.hpp"

namespace oracle {

struct SpotRef {
  std::string intent;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::map<std::string, std::vector<std::string>> gap_values;
};

namespace detail {

using voxshop::textnorm::TokenSeq;

// Does tokens[b, e) equal anchors[k] gap anchors[k+1] gap ... exactly?
// On success `gaps` holds the gap ranges.
inline bool span_matches(const TokenSeq& tokens, std::size_t b, std::size_t e, const std::vector<TokenSeq>& anchors,
                         std::size_t k, std::vector<std::pair<std::size_t, std::size_t>>& gaps) {
  const TokenSeq& a = anchors[k];
  if (e - b < a.size()) return false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (tokens[b + t] != a[t]) return false;
  }
  std::size_t after = b + a.size();
  if (k + 1 == anchors.size()) return after == e;
  for (std::size_t next = after + 1; next < e; ++next) {
    gaps.emplace_back(after, next);
    if (span_matches(tokens, next, e, anchors, k + 1, gaps)) return true;
    gaps.pop_back();
  }
  return false;
}

struct Occurrence {
  std::size_t intent_index;
  std::size_t trigger_index;
  std::size_t begin;
  std::size_t end;
  std::vector<std::pair<std::size_t, std::size_t>> gaps;
};

}  // namespace detail

inline std::vector<SpotRef> exhaustive_spots(const voxshop::textnorm::TokenSeq& tokens,
                                             const voxshop::command::CommandGrammar& grammar) {
  using voxshop::command::SpeechMode;
  const std::size_t n = tokens.size();
  std::vector<detail::Occurrence> occ;
  for (std::size_t ii = 0; ii < grammar.intents.size(); ++ii) {
    const auto& intent = grammar.intents[ii];
    for (std::size_t ti = 0; ti < intent.triggers.size(); ++ti) {
      const auto& trig = intent.triggers[ti];
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t e = b + 1; e <= n; ++e) {
          std::vector<std::pair<std::size_t, std::size_t>> gaps;
          if (!detail::span_matches(tokens, b, e, trig.anchors, 0, gaps)) continue;
          bool whole = b == 0 && e == n;
          bool single = trig.anchors.size() == 1 && trig.anchors[0].size() == 1;
          bool allowed = grammar.mode == SpeechMode::kIsolated    ? whole && single
                         : grammar.mode == SpeechMode::kConnected ? whole
                                                                  : true;
          if (allowed) occ.push_back({ii, ti, b, e, gaps});
          break;  // shortest span for this start only
        }
      }
    }
  }

  std::vector<bool> taken(n, false);
  std::vector<detail::Occurrence> chosen;
  std::vector<bool> used(occ.size(), false);
  for (;;) {
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (used[k]) continue;
      bool free = true;
      for (std::size_t p = occ[k].begin; p < occ[k].end; ++p) free = free && !taken[p];
      if (!free) continue;
      if (!pick) {
        pick = k;
        continue;
      }
      const auto& a = occ[k];
      const auto& b = occ[*pick];
      auto key = [](const detail::Occurrence& o) {
        return std::make_tuple(-static_cast<long>(o.end - o.begin), o.begin, o.intent_index, o.trigger_index);
      };
      if (key(a) < key(b)) pick = k;
    }
    if (!pick) break;
    used[*pick] = true;
    for (std::size_t p = occ[*pick].begin; p < occ[*pick].end; ++p) taken[p] = true;
    chosen.push_back(occ[*pick]);
  }
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });

  std::vector<SpotRef> out;
  for (const auto& o : chosen) {
    const auto& intent = grammar.intents[o.intent_index];
    const auto& trig = intent.triggers[o.trigger_index];
    SpotRef r{intent.name, o.begin, o.end, {}};
    for (std::size_t g = 0; g < o.gaps.size(); ++g) {
      r.gap_values[trig.gap_slots[g]] =
          std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(o.gaps[g].first),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(o.gaps[g].second));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace oracle
