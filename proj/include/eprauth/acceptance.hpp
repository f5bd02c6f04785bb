// End-to-end checks of the published claims, one row per claim.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "eprauth/quantum.hpp"

namespace eprauth {

struct AcceptanceRow {
  std::string id;     ///< "0" for the invariance pre-check, "1".."9", "i1".. informational
  std::string title;
  bool passed = false;
  bool gating = true;
  std::string detail;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20261016;
  unsigned threads = 0;
  /// Rotation used by the bilateral-invariance row; tests inject faults here.
  std::function<Matrix2(double)> rotation = rotation_matrix;
  /// Row ids to run; empty runs every row.
  std::vector<std::string> only;
};

std::vector<AcceptanceRow> run_acceptance(const AcceptanceOptions& options = {});

/// One "[PASS]"/"[FAIL]"/"[INFO]" line per row.
void print_rows(const std::vector<AcceptanceRow>& rows, std::ostream& out);

bool all_gating_passed(const std::vector<AcceptanceRow>& rows);

}  // namespace eprauth
