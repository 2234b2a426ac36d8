#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace arbc {

/// Four-axis hierarchical label TTTT-DDD-AAA-BBB (technique, direction,
/// anatomy, biology). Axes hold 3-4 characters from [0-9a-z].
struct IrmaCode {
  std::array<std::string, 4> axes;

  std::string raw() const { return axes[0] + "-" + axes[1] + "-" + axes[2] + "-" + axes[3]; }
  friend bool operator==(const IrmaCode&, const IrmaCode&) = default;
};

IrmaCode parse_irma(std::string_view text);

/// Branch counts b(axis, position); both indices 0-based here.
class BranchingTable {
 public:
  void set(int axis, int position, int count);
  /// Throws MissingBranchEntry when absent.
  int at(int axis, int position) const;
  bool contains(int axis, int position) const { return counts_.count({axis, position}) != 0; }
  const std::map<std::pair<int, int>, int>& entries() const { return counts_; }

  friend bool operator==(const BranchingTable&, const BranchingTable&) = default;

 private:
  std::map<std::pair<int, int>, int> counts_;
};

/// For each axis and position: the number of distinct characters at that
/// position among codes sharing the same within-axis prefix, maximized over
/// prefixes (floor 1).
BranchingTable build_branching(const std::vector<IrmaCode>& codes);

/// Single-axis variant (used for toy hierarchies and by build_branching).
std::vector<int> axis_branching(const std::vector<std::string>& axis_values);

/// δ_i = 1 iff some position h ≤ i mismatches.
std::vector<int> delta_vector(std::string_view truth, std::string_view retrieved);

/// Σ_axes Σ_i δ_i / (b_i · i) with i 1-based within each axis.
double image_error(const IrmaCode& truth, const IrmaCode& retrieved, const BranchingTable& table);

struct ErrorReport {
  double total_error = 0.0;
  std::vector<std::pair<std::string, double>> per_image_errors;

  std::size_t num_images() const { return per_image_errors.size(); }
};

struct EvaluationPair {
  std::string image_id;
  IrmaCode truth;
  IrmaCode retrieved;
};

/// Sums image errors in list order.
ErrorReport total_error(const std::vector<EvaluationPair>& pairs, const BranchingTable& table);

}  // namespace arbc
