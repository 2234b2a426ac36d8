#include "arbc/irma.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "arbc/error.hpp"

namespace arbc {

namespace {

bool valid_char(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z'); }

}  // namespace

IrmaCode parse_irma(std::string_view text) {
  IrmaCode code;
  std::size_t axis = 0, start = 0;
  while (true) {
    const std::size_t dash = text.find('-', start);
    if (axis >= 4) throw Error(ErrorKind::MalformedCode, "'" + std::string(text) + "': more than 4 axes");
    code.axes[axis] = std::string(text.substr(start, dash == std::string_view::npos ? dash : dash - start));
    ++axis;
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  if (axis != 4) throw Error(ErrorKind::MalformedCode, "'" + std::string(text) + "': expected 4 axes");
  for (const auto& a : code.axes) {
    if (a.empty()) throw Error(ErrorKind::MalformedCode, "'" + std::string(text) + "': empty axis");
    if (a.size() < 3 || a.size() > 4)
      throw Error(ErrorKind::MalformedCode, "'" + std::string(text) + "': axis '" + a + "' must have 3-4 characters");
    for (char c : a)
      if (!valid_char(c))
        throw Error(ErrorKind::MalformedCode, "'" + std::string(text) + "': bad character '" + std::string(1, c) + "'");
  }
  return code;
}

void BranchingTable::set(int axis, int position, int count) {
  if (axis < 0 || axis > 3 || position < 0) throw Error(ErrorKind::InvalidArgument, "branch entry out of range");
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "branch count must be >= 1");
  counts_[{axis, position}] = count;
}

int BranchingTable::at(int axis, int position) const {
  const auto it = counts_.find({axis, position});
  if (it == counts_.end())
    throw Error(ErrorKind::MissingBranchEntry,
                "no branch count for axis " + std::to_string(axis + 1) + " position " + std::to_string(position + 1));
  return it->second;
}

std::vector<int> axis_branching(const std::vector<std::string>& axis_values) {
  std::size_t longest = 0;
  for (const auto& v : axis_values) longest = std::max(longest, v.size());
  std::vector<int> out(longest, 1);
  for (std::size_t i = 0; i < longest; ++i) {
    std::unordered_map<std::string, std::set<char>> children;
    for (const auto& v : axis_values)
      if (v.size() > i) children[v.substr(0, i)].insert(v[i]);
    for (const auto& [prefix, chars] : children) out[i] = std::max(out[i], static_cast<int>(chars.size()));
  }
  return out;
}

BranchingTable build_branching(const std::vector<IrmaCode>& codes) {
  if (codes.empty()) throw Error(ErrorKind::EmptyCodeSet, "cannot derive branch counts from zero codes");
  BranchingTable table;
  for (int axis = 0; axis < 4; ++axis) {
    std::vector<std::string> values;
    values.reserve(codes.size());
    for (const auto& c : codes) values.push_back(c.axes[static_cast<std::size_t>(axis)]);
    const auto counts = axis_branching(values);
    for (std::size_t i = 0; i < counts.size(); ++i) table.set(axis, static_cast<int>(i), counts[i]);
  }
  return table;
}

std::vector<int> delta_vector(std::string_view truth, std::string_view retrieved) {
  if (truth.size() != retrieved.size())
    throw Error(ErrorKind::LengthMismatch, "axis '" + std::string(truth) + "' vs '" + std::string(retrieved) + "'");
  std::vector<int> delta(truth.size(), 0);
  bool mismatched = false;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    mismatched = mismatched || truth[i] != retrieved[i];
    delta[i] = mismatched ? 1 : 0;
  }
  return delta;
}

double image_error(const IrmaCode& truth, const IrmaCode& retrieved, const BranchingTable& table) {
  double err = 0.0;
  for (int axis = 0; axis < 4; ++axis) {
    const auto& t = truth.axes[static_cast<std::size_t>(axis)];
    const auto delta = delta_vector(t, retrieved.axes[static_cast<std::size_t>(axis)]);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      const int b = table.at(axis, static_cast<int>(i));
      if (delta[i]) err += 1.0 / (static_cast<double>(b) * static_cast<double>(i + 1));
    }
  }
  return err;
}

ErrorReport total_error(const std::vector<EvaluationPair>& pairs, const BranchingTable& table) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyDataset, "no evaluation pairs");
  ErrorReport report;
  report.per_image_errors.reserve(pairs.size());
  for (const auto& p : pairs) {
    const double e = image_error(p.truth, p.retrieved, table);
    report.per_image_errors.emplace_back(p.image_id, e);
    report.total_error += e;
  }
  return report;
}

}  // namespace arbc
