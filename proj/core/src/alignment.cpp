#include "tracefail/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tracefail/error.hpp"
#include "tracefail/warnings.hpp"

namespace tracefail {

std::size_t lcs_length(std::span<const Symbol> x, std::span<const Symbol> y) {
  if (x.size() < y.size()) {
    std::swap(x, y);
  }
  if (y.empty()) {
    return 0;
  }
  // row[j] = LCS(x[0..i), y[0..j)), rolled over i.
  std::vector<std::uint32_t> row(y.size() + 1, 0);
  for (const Symbol xi : x) {
    std::uint32_t diag = 0;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::uint32_t up = row[j];
      row[j] = (xi == y[j - 1]) ? diag + 1 : std::max(up, row[j - 1]);
      diag = up;
    }
  }
  return row.back();
}

double nlcs(std::span<const Symbol> x, std::span<const Symbol> y) {
  if (x.empty() || y.empty()) {
    warn("nLCS of an empty sequence is undefined; using 0");
    return 0.0;
  }
  const double common = static_cast<double>(lcs_length(x, y));
  return common / std::sqrt(static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

ReferenceChoice select_reference(std::span<const Symbol> faulty, std::span<const SymbolSequence> pool) {
  if (pool.empty()) {
    throw InvalidArgument("select_reference: empty fault-free pool");
  }
  ReferenceChoice best{0, -1.0};
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double v = nlcs(faulty, pool[i].span());
    if (v > best.similarity) {
      best = {i, v};
    }
  }
  return best;
}

LcsDiff diff(const SymbolSequence& faulty, const SymbolSequence& reference) {
  const auto& x = faulty.symbols;
  const auto& y = reference.symbols;
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t stride = m + 1;

  // suffix[i*stride + j] = LCS(x[i..), y[j..))
  std::vector<std::uint32_t> suffix((n + 1) * stride, 0);
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      suffix[i * stride + j] = x[i] == y[j] ? suffix[(i + 1) * stride + j + 1] + 1
                                            : std::max(suffix[(i + 1) * stride + j], suffix[i * stride + j + 1]);
    }
  }

  std::uint32_t max_id = 0;
  for (const Symbol s : x) max_id = std::max(max_id, s.id);
  for (const Symbol s : y) max_id = std::max(max_id, s.id);
  std::vector<std::vector<std::size_t>> positions(static_cast<std::size_t>(max_id) + 1);
  for (std::size_t j = 0; j < m; ++j) {
    positions[y[j].id].push_back(j);
  }

  LcsDiff out;
  out.selected_fault_free_id = reference.trace_id;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < m) {
    // Earliest reference position at or after j holding x[i]. If matching
    // there keeps the remaining LCS optimal, x[i] takes part in the LCS.
    const auto& occ = positions[x[i].id];
    const auto it = std::lower_bound(occ.begin(), occ.end(), j);
    if (it != occ.end() && suffix[(i + 1) * stride + *it + 1] + 1 == suffix[i * stride + j]) {
      for (; j < *it; ++j) {
        out.only_faultfree.push_back({j, y[j]});
      }
      out.common.push_back({i, j, x[i]});
      ++i;
      ++j;
    } else {
      out.only_faulty.push_back({i, x[i]});
      ++i;
    }
  }
  for (; i < n; ++i) {
    out.only_faulty.push_back({i, x[i]});
  }
  for (; j < m; ++j) {
    out.only_faultfree.push_back({j, y[j]});
  }
  return out;
}

}  // namespace tracefail
