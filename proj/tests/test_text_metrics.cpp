#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <functional>

#include "golden_text.hpp"
#include "srdf/text_metrics.hpp"

using namespace srdf;

namespace {

Instruction I(std::string_view text) { return Instruction::from_text(text); }

std::vector<Instruction> refs(std::initializer_list<const char*> texts) {
  std::vector<Instruction> out;
  for (const char* t : texts) out.push_back(I(t));
  return out;
}

}  // namespace

TEST(Bleu, Identity) {
  const auto r = refs({"turn left , walk past bed , stop"});
  EXPECT_EQ(bleu(r[0], r, 1), 1.0);
  EXPECT_EQ(bleu(r[0], r, 4), 1.0);
  const auto s = refs({"stop"});
  EXPECT_EQ(bleu(s[0], s, 4), 1.0);
}

TEST(Bleu, HandComputedUnigram) {
  EXPECT_DOUBLE_EQ(bleu(I("turn left , stop"), refs({"turn right , stop"}), 1), 0.75);
}

TEST(Bleu, DisjointIsEpsilonScale) {
  const double b = bleu(I("turn left , stop"), refs({"walk past bed"}), 4);
  EXPECT_LT(b, 1e-8);
  EXPECT_GT(b, 0.0);
}

TEST(Bleu, BadArguments) {
  EXPECT_THROW(bleu(I("stop"), {}, 1), Error);
  EXPECT_THROW(bleu(I("stop"), refs({"stop"}), 2), Error);
}

// Longest common subsequence by trying every subsequence of `a`.
static std::size_t brute_lcs(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0, k = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j, ++k;
    }
    if (ok) best = std::max(best, k);
  }
  return best;
}

TEST(Rouge, IdentityAndDisjoint) {
  const auto r = refs({"walk past bed , stop"});
  EXPECT_DOUBLE_EQ(rouge_l(r[0], r), 1.0);
  EXPECT_EQ(rouge_l(I("turn left"), refs({"walk past bed"})), 0.0);
}

TEST(Rouge, FourTokenPairAgainstBruteForce) {
  const Instruction a = I("turn left , stop");
  const Instruction b = I("stop , turn left");
  const std::size_t lcs = brute_lcs(a.tokens, b.tokens);
  EXPECT_EQ(lcs, 2u);
  EXPECT_EQ(lcs_length(a.tokens, b.tokens), lcs);
  const double p = 0.5, r = 0.5, b2 = 1.44;
  EXPECT_DOUBLE_EQ(rouge_l(a, std::vector<Instruction>{b}),
                   (1 + b2) * p * r / (r + b2 * p));
}

TEST(Rouge, LcsMatchesBruteForceOnRandomPairs) {
  const std::array<const char*, 4> alphabet{"a", "b", "c", ","};
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::string> x(uniform_index(rng, 9)), y(uniform_index(rng, 9));
    for (auto& s : x) s = alphabet[uniform_index(rng, 4)];
    for (auto& s : y) s = alphabet[uniform_index(rng, 4)];
    EXPECT_EQ(lcs_length(x, y), brute_lcs(x, y));
  }
}

TEST(Cider, IdentityOverDistinctReferences) {
  const auto r = refs({"turn left , walk past bed , stop",
                       "walk past sofa , turn right , stop at rug",
                       "turn around , walk toward lamp , walk past door , stop"});
  std::vector<std::vector<Instruction>> sets;
  for (const auto& x : r) sets.push_back({x});
  std::vector<CorpusItem> corpus;
  for (std::size_t i = 0; i < r.size(); ++i) corpus.push_back({&r[i], sets[i]});
  for (double v : cider(corpus)) EXPECT_NEAR(v, 10.0, 1e-12);
}

TEST(Cider, DisjointIsZeroAndCorpusTooSmall) {
  const Instruction cand = I("turn left");
  const auto r1 = refs({"walk past bed , stop"});
  const auto r2 = refs({"walk past sofa , stop"});
  const Instruction other = I("walk past sofa , stop");
  const std::vector<CorpusItem> corpus{{&cand, r1}, {&other, r2}};
  const auto v = cider(corpus);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_THROW(cider(std::vector<CorpusItem>{{&cand, r1}}), Error);
}

TEST(PropF1, Examples) {
  const auto r = refs({"turn left , walk past bed , stop"});
  EXPECT_EQ(proposition_f1(r[0], r, false), 1.0);
  EXPECT_EQ(proposition_f1(r[0], r, true), 1.0);
  // synonyms canonicalize
  EXPECT_EQ(proposition_f1(I("turn left , walk past cot , stop"), r, false), 1.0);
  // one of two shared
  EXPECT_DOUBLE_EQ(proposition_f1(I("walk past bed , walk past sofa , stop"),
                                  refs({"walk past bed , walk past rug , stop"}), false),
                   0.5);
  // directional: semantic 1, turn sequences fully different
  EXPECT_EQ(proposition_f1(I("turn right , walk past bed , stop"), r, true), 0.0);
  EXPECT_THROW(proposition_f1(I("fly away"), r, false), UnparseableInstruction);
}

TEST(PropF1, InvariantUnderSynonymsAndReferenceOrder) {
  const auto a = refs({"walk past lamp , turn left , walk toward sofa , stop at bed",
                       "turn right , walk past sink , stop"});
  const auto b = refs({"turn right , walk past sink , stop",
                       "walk past lamp , turn left , walk toward sofa , stop at bed"});
  const Instruction cand = I("walk past light , turn left , walk toward couch , stop");
  const Instruction cand_syn = I("walk past lamp , turn left , walk toward sofa , stop");
  for (bool dir : {false, true}) {
    EXPECT_EQ(proposition_f1(cand, a, dir), proposition_f1(cand, b, dir));
    EXPECT_EQ(proposition_f1(cand, a, dir), proposition_f1(cand_syn, a, dir));
  }
  EXPECT_EQ(bleu(cand, a, 4), bleu(cand, b, 4));
  EXPECT_EQ(rouge_l(cand, a), rouge_l(cand, b));
}

TEST(Golden, TenItemCorpus) {
  std::vector<Instruction> cands;
  std::vector<std::vector<Instruction>> ref_sets;
  for (const auto& item : srdf::testing::kGoldenCorpus) {
    cands.push_back(I(item.candidate));
    auto& rs = ref_sets.emplace_back();
    for (const char* r : item.references) rs.push_back(I(r));
  }
  std::vector<CorpusItem> corpus;
  for (std::size_t i = 0; i < cands.size(); ++i) corpus.push_back({&cands[i], ref_sets[i]});
  const auto scores = score_text_corpus(corpus);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& g = srdf::testing::kGoldenValues[i];
    EXPECT_NEAR(scores[i].bleu1, g[0], 1e-9) << i;
    EXPECT_NEAR(scores[i].bleu4, g[1], 1e-9) << i;
    EXPECT_NEAR(scores[i].rouge_l, g[2], 1e-9) << i;
    EXPECT_NEAR(scores[i].cider, g[3], 1e-9) << i;
    EXPECT_NEAR(scores[i].prop_f1, g[4], 1e-9) << i;
    EXPECT_NEAR(scores[i].prop_f1_dir, g[5], 1e-9) << i;
  }
}
