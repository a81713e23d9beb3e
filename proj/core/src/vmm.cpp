#include "tracefail/vmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "tracefail/error.hpp"

namespace tracefail {

using nlohmann::json;

namespace {

constexpr std::uint32_t kRoot = 0;
constexpr const char* kFormatTag = "tracefail.vmm";
constexpr int kFormatVersion = 1;

template <typename Vec>
auto find_sorted(Vec& v, Symbol s) {
  return std::lower_bound(v.begin(), v.end(), s, [](const auto& entry, Symbol key) { return entry.first < key; });
}

void check_order(std::size_t max_order) {
  if (max_order < 1 || max_order > VmmModel::kMaxSupportedOrder) {
    throw InvalidArgument("VMM order must be in 1.." + std::to_string(VmmModel::kMaxSupportedOrder) + ", got " +
                          std::to_string(max_order));
  }
}

}  // namespace

std::uint64_t ContextStats::count(Symbol s) const {
  const auto it = std::lower_bound(counts.begin(), counts.end(), s,
                                   [](const auto& entry, Symbol key) { return entry.first < key; });
  return (it != counts.end() && it->first == s) ? it->second : 0;
}

VmmModel::VmmModel(std::size_t alphabet_size, std::size_t max_order)
    : alphabet_size_(alphabet_size), max_order_(max_order), nodes_(1) {
  check_order(max_order);
}

std::optional<std::uint32_t> VmmModel::child(std::uint32_t node, Symbol s) const {
  const auto& kids = nodes_[node].children;
  const auto it = find_sorted(kids, s);
  if (it != kids.end() && it->first == s) {
    return it->second;
  }
  return std::nullopt;
}

std::uint32_t VmmModel::child_or_insert(std::uint32_t node, Symbol s) {
  auto& kids = nodes_[node].children;
  auto it = find_sorted(kids, s);
  if (it != kids.end() && it->first == s) {
    return it->second;
  }
  const auto fresh = static_cast<std::uint32_t>(nodes_.size());
  kids.insert(it, {s, fresh});
  nodes_.emplace_back();  // invalidates `kids`
  return fresh;
}

void VmmModel::add(std::uint32_t node, Symbol successor, std::uint64_t amount) {
  auto& stats = nodes_[node].stats;
  auto it = find_sorted(stats.counts, successor);
  if (it != stats.counts.end() && it->first == successor) {
    it->second += amount;
  } else {
    stats.counts.insert(it, {successor, amount});
  }
  stats.total += amount;
}

VmmModel VmmModel::train(std::span<const SymbolSequence> sequences, std::size_t alphabet_size, std::size_t max_order) {
  if (sequences.empty()) {
    throw InvalidArgument("VMM training needs at least one sequence");
  }
  VmmModel model(alphabet_size, max_order);
  for (const auto& seq : sequences) {
    const auto& x = seq.symbols;
    for (const Symbol s : x) {
      if (s.id >= alphabet_size) {
        throw FrozenTableError("symbol " + std::to_string(s.id) + " in " + seq.trace_id + " outside alphabet of size " +
                               std::to_string(alphabet_size));
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::uint32_t node = kRoot;
      model.add(node, x[i], 1);
      const std::size_t depth = std::min(i, max_order);
      for (std::size_t k = 1; k <= depth; ++k) {
        node = model.child_or_insert(node, x[i - k]);
        model.add(node, x[i], 1);
      }
    }
  }
  return model;
}

double VmmModel::prob(std::span<const Symbol> history, Symbol target) const {
  if (target.id >= alphabet_size_) {
    throw FrozenTableError("symbol " + std::to_string(target.id) + " outside alphabet of size " +
                           std::to_string(alphabet_size_));
  }

  // path[k] = node of the length-k suffix of history, as deep as stored.
  std::uint32_t path[kMaxSupportedOrder + 1];
  std::size_t depth = 0;
  path[0] = kRoot;
  const std::size_t limit = std::min(history.size(), max_order_);
  for (std::size_t k = 1; k <= limit; ++k) {
    const auto next = child(path[k - 1], history[history.size() - k]);
    if (!next) {
      break;
    }
    path[++depth] = *next;
  }

  double escape = 1.0;
  std::vector<bool> excluded;  // allocated on first escape
  std::size_t excluded_count = 0;

  for (std::size_t k = depth + 1; k-- > 0;) {
    const ContextStats& stats = nodes_[path[k]].stats;
    if (stats.total == 0) {
      continue;
    }
    std::uint64_t n = 0;
    std::uint64_t q = 0;
    std::uint64_t hit = 0;
    for (const auto& [sym, c] : stats.counts) {
      if (!excluded.empty() && excluded[sym.id]) {
        continue;
      }
      n += c;
      ++q;
      if (sym == target) {
        hit = c;
      }
    }
    if (q == 0) {
      continue;
    }
    // A context whose successors cover every symbol still in play has
    // nowhere to escape to, so it keeps the whole mass.
    const bool covers_rest = q == alphabet_size_ - excluded_count;
    const double denom = static_cast<double>(covers_rest ? n : n + q);
    if (hit > 0) {
      return escape * static_cast<double>(hit) / denom;
    }
    escape *= static_cast<double>(q) / denom;
    if (excluded.empty()) {
      excluded.assign(alphabet_size_, false);
    }
    for (const auto& entry : stats.counts) {
      if (!excluded[entry.first.id]) {
        excluded[entry.first.id] = true;
        ++excluded_count;
      }
    }
  }
  return escape / static_cast<double>(alphabet_size_ - excluded_count);
}

double VmmModel::avg_log_loss(std::span<const Symbol> test) const {
  if (test.empty()) {
    throw InvalidArgument("log-loss of an empty test sequence");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    sum -= std::log2(prob(test.first(i), test[i]));
  }
  return sum / static_cast<double>(test.size());
}

std::optional<ContextStats> VmmModel::context(std::span<const Symbol> ctx) const {
  if (ctx.size() > max_order_) {
    return std::nullopt;
  }
  std::uint32_t node = kRoot;
  for (std::size_t k = 1; k <= ctx.size(); ++k) {
    const auto next = child(node, ctx[ctx.size() - k]);
    if (!next) {
      return std::nullopt;
    }
    node = *next;
  }
  if (nodes_[node].stats.total == 0) {
    return std::nullopt;
  }
  return nodes_[node].stats;
}

std::map<std::vector<std::uint32_t>, ContextStats> VmmModel::contexts() const {
  std::map<std::vector<std::uint32_t>, ContextStats> out;
  // Depth-first walk; `reversed` holds the path (most recent symbol first).
  std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>> stack{{kRoot, {}}};
  while (!stack.empty()) {
    auto [node, reversed] = std::move(stack.back());
    stack.pop_back();
    if (nodes_[node].stats.total > 0) {
      out.emplace(std::vector<std::uint32_t>(reversed.rbegin(), reversed.rend()), nodes_[node].stats);
    }
    for (const auto& [sym, kid] : nodes_[node].children) {
      auto next = reversed;
      next.push_back(sym.id);
      stack.emplace_back(kid, std::move(next));
    }
  }
  return out;
}

bool operator==(const VmmModel& a, const VmmModel& b) {
  return a.alphabet_size_ == b.alphabet_size_ && a.max_order_ == b.max_order_ && a.contexts() == b.contexts();
}

void to_json(json& j, const VmmModel& model) {
  json contexts = json::array();
  for (const auto& [ctx, stats] : model.contexts()) {
    json counts = json::array();
    for (const auto& [sym, c] : stats.counts) {
      counts.push_back({sym.id, c});
    }
    contexts.push_back({{"context", ctx}, {"counts", std::move(counts)}});
  }
  j = {{"format", kFormatTag},
       {"version", kFormatVersion},
       {"max_order", model.max_order_},
       {"alphabet_size", model.alphabet_size_},
       {"contexts", std::move(contexts)}};
}

void from_json(const json& j, VmmModel& model) {
  try {
    if (j.at("format").get<std::string>() != kFormatTag) {
      throw ParseError("not a VMM model dump");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw ParseError("unsupported VMM model version " + j.at("version").dump());
    }
    VmmModel m(j.at("alphabet_size").get<std::size_t>(), j.at("max_order").get<std::size_t>());

    std::vector<std::pair<std::vector<std::uint32_t>, const json*>> entries;
    for (const auto& entry : j.at("contexts")) {
      entries.emplace_back(entry.at("context").get<std::vector<std::uint32_t>>(), &entry.at("counts"));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first.size() < b.first.size(); });

    for (const auto& [ctx, counts] : entries) {
      if (ctx.size() > m.max_order_) {
        throw ParseError("context longer than max_order");
      }
      std::uint32_t node = kRoot;
      for (std::size_t k = 1; k <= ctx.size(); ++k) {
        if (m.nodes_[node].stats.total == 0) {
          throw ParseError("context stored without its suffix");
        }
        const Symbol s{ctx[ctx.size() - k]};
        if (s.id >= m.alphabet_size_) {
          throw ParseError("context symbol outside alphabet");
        }
        node = m.child_or_insert(node, s);
      }
      if (m.nodes_[node].stats.total != 0) {
        throw ParseError("duplicate context");
      }
      for (const auto& pair : *counts) {
        const Symbol s{pair.at(0).get<std::uint32_t>()};
        const auto c = pair.at(1).get<std::uint64_t>();
        if (s.id >= m.alphabet_size_ || c == 0) {
          throw ParseError("invalid successor count");
        }
        m.add(node, s, c);
      }
      if (m.nodes_[node].stats.total == 0) {
        throw ParseError("context without successors");
      }
    }
    model = std::move(m);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed VMM model: ") + e.what());
  }
}

}  // namespace tracefail
