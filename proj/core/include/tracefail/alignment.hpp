#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tracefail/trace_model.hpp"

namespace tracefail {

/// Length of a longest common subsequence. O(|x|·|y|) time, O(min) space.
std::size_t lcs_length(std::span<const Symbol> x, std::span<const Symbol> y);

/// |LCS(x,y)| / sqrt(|x|·|y|). Empty input yields 0 and a warning.
double nlcs(std::span<const Symbol> x, std::span<const Symbol> y);

struct ReferenceChoice {
  std::size_t index = 0;
  double similarity = 0.0;
};

/// Pool member with maximal nLCS against `faulty`; ties go to the lowest index.
ReferenceChoice select_reference(std::span<const Symbol> faulty, std::span<const SymbolSequence> pool);

struct CommonPair {
  std::size_t faulty_index = 0;
  std::size_t faultfree_index = 0;
  Symbol symbol;
  friend bool operator==(const CommonPair&, const CommonPair&) = default;
};

struct DiffEntry {
  std::size_t index = 0;
  Symbol symbol;
  friend bool operator==(const DiffEntry&, const DiffEntry&) = default;
};

/// Three-way split of a faulty sequence against its reference.
struct LcsDiff {
  std::string selected_fault_free_id;
  std::vector<CommonPair> common;
  std::vector<DiffEntry> only_faulty;
  std::vector<DiffEntry> only_faultfree;
  friend bool operator==(const LcsDiff&, const LcsDiff&) = default;
};

/// Materializes one maximum-length common subsequence.
///
/// Among all LCSs, the one whose faulty-side indices are lexicographically
/// smallest is chosen, and each faulty symbol is matched to the earliest
/// admissible reference position. The result is unique for given inputs.
LcsDiff diff(const SymbolSequence& faulty, const SymbolSequence& reference);

}  // namespace tracefail
