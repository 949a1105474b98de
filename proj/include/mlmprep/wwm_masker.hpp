#pragma once

// Whole-word masking for MLM examples with the 80/10/10 replacement split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mlmprep/error.hpp"
#include "mlmprep/rng.hpp"
#include "mlmprep/sentence_chunker.hpp"
#include "mlmprep/tokenizer.hpp"

namespace mlmprep {

inline constexpr TokenId kIgnoreLabel = -100;

struct MaskingConfig {
  double mask_rate = 0.15;
  double p_mask = 0.80;
  double p_random = 0.10;
  double p_keep = 0.10;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(mask_rate > 0.0 && mask_rate <= 1.0)) throw InvalidConfig("mask_rate must be in (0, 1]");
    if (p_mask < 0.0 || p_random < 0.0 || p_keep < 0.0) throw InvalidConfig("branch probabilities must be >= 0");
    if (std::abs(p_mask + p_random + p_keep - 1.0) > 1e-12) {
      throw InvalidConfig("p_mask + p_random + p_keep must equal 1");
    }
  }
};

struct MlmExample {
  std::string doc_id;
  std::uint64_t seq = 0;
  std::vector<TokenId> input_ids;
  std::vector<TokenId> labels;
  std::vector<WordRange> selected_word_ranges;

  friend bool operator==(const MlmExample&, const MlmExample&) = default;
};

enum class MaskBranch { mask, random, keep };

// ceil() that ignores the last few ulps of rounding error, so that
// 0.15 * 20 = 3.0000000000000004 still gives 3.
inline std::size_t selection_target(double rate, std::size_t maskable) {
  const double x = rate * static_cast<double>(maskable);
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

// Words holding a special token are never candidates. Draws a uniform random
// order over candidate words and takes words until the covered token count
// first reaches the target; the last word may overshoot. Returned ranges are
// sorted by position.
inline std::vector<WordRange> select_words(const Chunk& chunk, const MaskingConfig& config,
                                           const Tokenizer& tokenizer, Rng& rng) {
  std::vector<WordRange> candidates;
  std::size_t maskable = 0;
  for (const auto& w : chunk.word_boundaries) {
    std::size_t special = 0;
    for (std::size_t i = w.begin; i < w.end; ++i) special += tokenizer.is_special(chunk.token_ids[i]) ? 1 : 0;
    maskable += w.size() - special;
    if (special == 0) candidates.push_back(w);
  }
  const std::size_t target = selection_target(config.mask_rate, maskable);

  // Partial Fisher-Yates: position k receives a uniform pick from the rest.
  std::vector<WordRange> picked;
  std::size_t covered = 0;
  for (std::size_t k = 0; k < candidates.size() && covered < target; ++k) {
    const auto j = k + rng.below(candidates.size() - k);
    std::swap(candidates[k], candidates[j]);
    covered += candidates[k].size();
    picked.push_back(candidates[k]);
  }
  std::sort(picked.begin(), picked.end(), [](const WordRange& a, const WordRange& b) { return a.begin < b.begin; });
  return picked;
}

inline MaskBranch draw_branch(const MaskingConfig& config, Rng& rng) {
  const double u = rng.unit();
  if (u < config.p_mask) return MaskBranch::mask;
  if (u < config.p_mask + config.p_random) return MaskBranch::random;
  return MaskBranch::keep;
}

// Uniform over ids that are not special.
inline TokenId draw_random_token(const Tokenizer& tokenizer, Rng& rng) {
  const auto& specials = tokenizer.special_token_ids();
  const std::size_t vocab = tokenizer.vocab_size();
  const std::size_t pool = vocab - std::min(vocab, specials.size());
  if (pool == 0) throw VocabularyTooSmall("no non-special token ids to draw from");
  auto id = static_cast<TokenId>(rng.below(pool));
  // Shift past every special id at or below the candidate (specials are sorted).
  for (TokenId s : specials) {
    if (s <= id) ++id;
  }
  return id;
}

inline MlmExample apply_mask(const Chunk& chunk, const std::vector<WordRange>& selection,
                             const MaskingConfig& config, const Tokenizer& tokenizer, Rng& rng,
                             std::vector<MaskBranch>* branches = nullptr) {
  MlmExample ex;
  ex.doc_id = chunk.doc_id;
  ex.seq = chunk.seq;
  ex.input_ids = chunk.token_ids;
  ex.labels.assign(chunk.token_ids.size(), kIgnoreLabel);
  ex.selected_word_ranges = selection;
  for (const auto& w : selection) {
    if (w.end > chunk.token_ids.size() || w.begin >= w.end) throw InvalidConfig("selection outside the chunk");
    for (std::size_t i = w.begin; i < w.end; ++i) {
      ex.labels[i] = chunk.token_ids[i];
      const auto branch = draw_branch(config, rng);
      if (branches) branches->push_back(branch);
      switch (branch) {
        case MaskBranch::mask: ex.input_ids[i] = tokenizer.mask_token_id(); break;
        case MaskBranch::random: ex.input_ids[i] = draw_random_token(tokenizer, rng); break;
        case MaskBranch::keep: break;
      }
    }
  }
  return ex;
}

// One masked realisation of a chunk. The stream depends only on
// (seed, doc_id, seq), so chunks can be processed in any order or in
// parallel. Vary the seed per epoch for dynamic masking.
inline MlmExample mask_chunk(const Chunk& chunk, const MaskingConfig& config, const Tokenizer& tokenizer,
                             std::vector<MaskBranch>* branches = nullptr) {
  config.validate();
  auto rng = Rng::for_chunk(config.seed, chunk.doc_id, chunk.seq);
  const auto selection = select_words(chunk, config, tokenizer, rng);
  return apply_mask(chunk, selection, config, tokenizer, rng, branches);
}

inline Json to_json(const MlmExample& ex) {
  Json j;
  j["doc_id"] = ex.doc_id;
  j["seq"] = ex.seq;
  j["input_ids"] = ex.input_ids;
  j["labels"] = ex.labels;
  return j;
}

}  // namespace mlmprep
