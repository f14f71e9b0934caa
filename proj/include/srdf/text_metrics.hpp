#pragma once

#include <span>
#include <vector>

#include "srdf/instr_lang.hpp"

namespace srdf {

struct TextScores {
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;  // [0, 10]
  double prop_f1 = 0.0;
  double prop_f1_dir = 0.0;
  friend bool operator==(const TextScores&, const TextScores&) = default;
};

inline constexpr double kBleuEpsilon = 1e-9;
inline constexpr double kRougeBeta = 1.2;

// Sentence BLEU against a reference set, orders 1..max_order (1 or 4).
// Zero-match orders count as epsilon; orders the candidate is too short to
// contain are left out of the geometric mean.
double bleu(const Instruction& candidate,
            std::span<const Instruction> references, int max_order);

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b);

double rouge_l(const Instruction& candidate,
               std::span<const Instruction> references);

struct CorpusItem {
  const Instruction* candidate;
  std::span<const Instruction> references;
};

// Per-item CIDEr over the corpus (document frequencies come from the
// reference sets). Throws Error(invalid_argument) for fewer than 2 items.
std::vector<double> cider(std::span<const CorpusItem> corpus);

// Set-F1 over (relation, landmark) propositions, best reference wins. The
// directional variant is the harmonic mean of that F1 and the edit
// similarity of the turn-direction sequences. Throws UnparseableInstruction.
double proposition_f1(const Instruction& candidate,
                      std::span<const Instruction> references,
                      bool directional);
double proposition_f1(const PropositionSet& candidate,
                      std::span<const PropositionSet> references,
                      bool directional);

// Everything except cider, which needs the corpus.
TextScores score_text(const Instruction& candidate,
                      std::span<const Instruction> references);

std::vector<TextScores> score_text_corpus(std::span<const CorpusItem> corpus);

}  // namespace srdf
