#include "srdf/text_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

namespace srdf {

namespace {

using NgramCounts = std::map<std::string, int>;

NgramCounts ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts out;
  const auto len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    ++out[key];
  }
  return out;
}

void require_references(std::span<const Instruction> refs, const char* what) {
  if (refs.empty())
    throw Error(ErrorCode::empty_input, std::string(what) + " needs references");
}

}  // namespace

double bleu(const Instruction& candidate,
            std::span<const Instruction> references, int max_order) {
  require_references(references, "bleu");
  if (max_order != 1 && max_order != 4)
    throw Error(ErrorCode::invalid_argument, "bleu order must be 1 or 4");
  const auto c = static_cast<double>(candidate.length());
  if (candidate.length() == 0) return 0.0;

  double log_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= max_order; ++n) {
    const NgramCounts cand = ngrams(candidate.tokens, n);
    if (cand.empty()) continue;
    NgramCounts max_ref;
    for (const auto& ref : references)
      for (const auto& [g, k] : ngrams(ref.tokens, n))
        max_ref[g] = std::max(max_ref[g], k);
    int matched = 0, total = 0;
    for (const auto& [g, k] : cand) {
      total += k;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(k, it->second);
    }
    const double p = matched == 0 ? kBleuEpsilon / total
                                  : static_cast<double>(matched) / total;
    log_sum += std::log(p);
    ++orders;
  }

  // Closest reference length, shorter wins ties.
  std::size_t r = references.front().length();
  for (const auto& ref : references) {
    const auto d_new = std::abs(static_cast<double>(ref.length()) - c);
    const auto d_old = std::abs(static_cast<double>(r) - c);
    if (d_new < d_old || (d_new == d_old && ref.length() < r)) r = ref.length();
  }
  const double bp =
      c >= static_cast<double>(r) ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c);
  return std::min(1.0, bp * std::exp(log_sum / orders));
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Instruction& candidate,
               std::span<const Instruction> references) {
  require_references(references, "rouge_l");
  double best = 0.0;
  for (const auto& ref : references) {
    const auto lcs = static_cast<double>(lcs_length(candidate.tokens, ref.tokens));
    if (lcs == 0.0) continue;
    const double prec = lcs / static_cast<double>(candidate.length());
    const double rec = lcs / static_cast<double>(ref.length());
    const double b2 = kRougeBeta * kRougeBeta;
    best = std::max(best, (1 + b2) * prec * rec / (rec + b2 * prec));
  }
  return best;
}

std::vector<double> cider(std::span<const CorpusItem> corpus) {
  if (corpus.size() < 2)
    throw Error(ErrorCode::invalid_argument, "cider needs a corpus of at least 2");
  constexpr int kOrders = 4;
  const auto num_docs = static_cast<double>(corpus.size());

  // Reference n-gram counts, computed once and reused for the scoring pass.
  std::vector<std::vector<std::array<NgramCounts, kOrders>>> ref_grams(corpus.size());
  std::array<std::map<std::string, int>, kOrders> df;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    require_references(corpus[i].references, "cider");
    std::array<std::set<std::string>, kOrders> seen;
    for (const auto& ref : corpus[i].references) {
      auto& grams = ref_grams[i].emplace_back();
      for (int n = 0; n < kOrders; ++n) {
        grams[n] = ngrams(ref.tokens, n + 1);
        for (const auto& [g, k] : grams[n]) seen[n].insert(g);
      }
    }
    for (int n = 0; n < kOrders; ++n)
      for (const auto& g : seen[n]) ++df[n][g];
  }

  const auto weigh = [&](const NgramCounts& counts, int n) {
    std::map<std::string, double> vec;
    int total = 0;
    for (const auto& [g, k] : counts) total += k;
    for (const auto& [g, k] : counts) {
      auto it = df[n].find(g);
      const double d = it == df[n].end() ? 1.0 : it->second;
      vec[g] = static_cast<double>(k) / total * std::log(num_docs / d);
    }
    return vec;
  };
  const auto cosine = [](const std::map<std::string, double>& a,
                         const std::map<std::string, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [g, v] : a) {
      na += v * v;
      auto it = b.find(g);
      if (it != b.end()) dot += v * it->second;
    }
    for (const auto& [g, v] : b) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
  };

  std::vector<double> out(corpus.size(), 0.0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    double sum = 0.0;
    for (int n = 0; n < kOrders; ++n) {
      const auto cand = weigh(ngrams(corpus[i].candidate->tokens, n + 1), n);
      double per_order = 0.0;
      for (const auto& grams : ref_grams[i]) per_order += cosine(cand, weigh(grams[n], n));
      sum += per_order / static_cast<double>(ref_grams[i].size());
    }
    out[i] = 10.0 * sum / kOrders;
  }
  return out;
}

namespace {

double set_f1(const std::set<std::pair<Relation, LandmarkId>>& cand,
              const std::set<std::pair<Relation, LandmarkId>>& ref) {
  if (cand.empty() && ref.empty()) return 1.0;
  if (cand.empty() || ref.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& p : cand) common += ref.count(p);
  if (common == 0) return 0.0;
  const double prec = static_cast<double>(common) / cand.size();
  const double rec = static_cast<double>(common) / ref.size();
  return 2 * prec * rec / (prec + rec);
}

double edit_similarity(const std::vector<TurnDirection>& a,
                       const std::vector<TurnDirection>& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[b.size()]) / static_cast<double>(longest);
}

}  // namespace

double proposition_f1(const PropositionSet& candidate,
                      std::span<const PropositionSet> references,
                      bool directional) {
  if (references.empty())
    throw Error(ErrorCode::empty_input, "proposition_f1 needs references");
  double best = 0.0;
  for (const auto& ref : references) {
    double score = set_f1(candidate.semantic, ref.semantic);
    if (directional) {
      const double dir = edit_similarity(candidate.directional, ref.directional);
      score = (score + dir) == 0.0 ? 0.0 : 2 * score * dir / (score + dir);
    }
    best = std::max(best, score);
  }
  return best;
}

double proposition_f1(const Instruction& candidate,
                      std::span<const Instruction> references,
                      bool directional) {
  std::vector<PropositionSet> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(parse(r).propositions);
  return proposition_f1(parse(candidate).propositions, refs, directional);
}

TextScores score_text(const Instruction& candidate,
                      std::span<const Instruction> references) {
  std::vector<PropositionSet> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(parse(r).propositions);
  const PropositionSet cand = parse(candidate).propositions;
  TextScores s;
  s.bleu1 = bleu(candidate, references, 1);
  s.bleu4 = bleu(candidate, references, 4);
  s.rouge_l = rouge_l(candidate, references);
  s.prop_f1 = proposition_f1(cand, refs, false);
  s.prop_f1_dir = proposition_f1(cand, refs, true);
  return s;
}

std::vector<TextScores> score_text_corpus(std::span<const CorpusItem> corpus) {
  std::vector<TextScores> out;
  out.reserve(corpus.size());
  for (const auto& item : corpus)
    out.push_back(score_text(*item.candidate, item.references));
  const auto c = cider(corpus);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].cider = c[i];
  return out;
}

}  // namespace srdf
