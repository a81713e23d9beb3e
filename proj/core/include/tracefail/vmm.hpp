#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tracefail/trace_model.hpp"

namespace tracefail {

/// Successor statistics of one context.
struct ContextStats {
  std::uint64_t total = 0;                                 // n(s)
  std::vector<std::pair<Symbol, std::uint64_t>> counts;    // n(σ|s) > 0, by symbol id

  [[nodiscard]] std::size_t distinct() const { return counts.size(); }  // q(s)
  [[nodiscard]] std::uint64_t count(Symbol s) const;
  friend bool operator==(const ContextStats&, const ContextStats&) = default;
};

/// Variable-order Markov model estimated with Prediction by Partial Matching,
/// escape method C, with exclusion.
///
/// Contexts of length 0..max_order are stored in a suffix trie: the path from
/// the root spells the context backwards (most recent symbol first), so the
/// parent of a context is the context with its oldest symbol dropped.
///
/// Probability of σ after history h: walk from the longest stored suffix of h
/// (at most max_order symbols) towards the empty context. At each context s,
/// with E the symbols already offered by longer contexts,
///   n' = Σ n(τ|s) over τ ∉ E,   q' = |{τ ∉ E : n(τ|s) > 0}|
///   hit:    P += escape · n(σ|s) / (n' + q')
///   escape: escape *= q' / (n' + q'),  E ∪= successors(s)
/// If q' = |Σ| − |E| the context already covers every remaining symbol and
/// the escape term is dropped (denominator n'); otherwise that mass would be
/// lost. Contexts whose successors are all excluded are skipped. Below the empty
/// context the remaining mass is spread uniformly over the |Σ| − |E| symbols
/// never offered, so every symbol has positive probability.
class VmmModel {
 public:
  static constexpr std::size_t kDefaultOrder = 5;
  static constexpr std::size_t kMaxSupportedOrder = 8;

  VmmModel() : VmmModel(0, kDefaultOrder) {}
  /// An untrained model: every query falls through to the uniform level.
  VmmModel(std::size_t alphabet_size, std::size_t max_order);

  /// Counts every position of every sequence at all orders 0..max_order.
  /// Contexts never span two sequences.
  static VmmModel train(std::span<const SymbolSequence> sequences, std::size_t alphabet_size,
                        std::size_t max_order = kDefaultOrder);

  [[nodiscard]] double prob(std::span<const Symbol> history, Symbol target) const;
  /// Mean of −log2 P(x_i | x_1..x_{i−1}).
  [[nodiscard]] double avg_log_loss(std::span<const Symbol> test) const;

  /// Statistics of `context` (oldest symbol first), if stored.
  [[nodiscard]] std::optional<ContextStats> context(std::span<const Symbol> context) const;
  /// Every stored context, keyed oldest-first.
  [[nodiscard]] std::map<std::vector<std::uint32_t>, ContextStats> contexts() const;

  [[nodiscard]] std::size_t max_order() const { return max_order_; }
  [[nodiscard]] std::size_t alphabet_size() const { return alphabet_size_; }
  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }

  friend bool operator==(const VmmModel& a, const VmmModel& b);

 private:
  struct Node {
    ContextStats stats;
    std::vector<std::pair<Symbol, std::uint32_t>> children;  // sorted by symbol
  };

  [[nodiscard]] std::optional<std::uint32_t> child(std::uint32_t node, Symbol s) const;
  std::uint32_t child_or_insert(std::uint32_t node, Symbol s);
  void add(std::uint32_t node, Symbol successor, std::uint64_t amount);

  std::size_t alphabet_size_ = 0;
  std::size_t max_order_ = kDefaultOrder;
  std::vector<Node> nodes_;

  friend void from_json(const nlohmann::json& j, VmmModel& model);
  friend void to_json(nlohmann::json& j, const VmmModel& model);
};

/// Versioned, lossless JSON dump of the context trie.
void to_json(nlohmann::json& j, const VmmModel& model);
void from_json(const nlohmann::json& j, VmmModel& model);

}  // namespace tracefail
