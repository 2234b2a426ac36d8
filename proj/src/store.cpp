#include "arbc/store.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <system_error>

namespace arbc {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw Error(ErrorKind::FileNotFound, path.string());
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed: " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IoError, "cannot rename onto " + path.string());
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorKind::IoError, "cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw Error(ErrorKind::FormatError, "bad number '" + std::string(text) + "'");
  return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view text, std::string_view what) {
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error(ErrorKind::FormatError, "bad " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

class Lines {
 public:
  explicit Lines(std::string_view text) : text_(text) {}

  std::optional<std::string_view> next() {
    if (pos_ >= text_.size()) return std::nullopt;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  }

  std::string_view require(std::string_view what) {
    auto line = next();
    if (!line) throw Error(ErrorKind::FormatError, "truncated file: missing " + std::string(what));
    return *line;
  }

  std::optional<std::string_view> next_content() {
    while (auto line = next()) {
      if (!line->empty() && line->front() != '#') return line;
    }
    return std::nullopt;
  }

  int number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int number_ = 0;
};

void check_header(std::string_view line, std::string_view magic) {
  const auto parts = split_ws(line);
  if (parts.size() != 2 || parts[0] != magic)
    throw Error(ErrorKind::FormatError, "expected '" + std::string(magic) + " v1' header, got '" + std::string(line) + "'");
  if (parts[1] != "v1") throw Error(ErrorKind::VersionMismatch, std::string(magic) + " " + std::string(parts[1]));
}

void expect_end(Lines& lines) {
  while (auto line = lines.next())
    if (!split_ws(*line).empty()) throw Error(ErrorKind::FormatError, "trailing data at line " + std::to_string(lines.number()));
}

std::vector<double> parse_row(std::string_view line, std::size_t expected) {
  const auto parts = split_ws(line);
  if (parts.size() != expected)
    throw Error(ErrorKind::FormatError,
                "expected " + std::to_string(expected) + " values, got " + std::to_string(parts.size()));
  std::vector<double> out;
  out.reserve(expected);
  for (auto p : parts) out.push_back(parse_double(p));
  return out;
}

}  // namespace

std::string format_model(const AutoencoderModel& model) {
  std::string out = "ARBC-MODEL v1\n";
  const auto& dims = model.layer_dims();
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? " " : "") + std::to_string(dims[i]);
  out += "\n";
  for (int k = 0; k < model.num_layers(); ++k) {
    const auto& w = model.weights()[static_cast<std::size_t>(k)];
    out += "W " + std::to_string(w.rows()) + " " + std::to_string(w.cols()) + "\n";
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (c) out += ' ';
        out += format_double(w(r, c));
      }
      out += '\n';
    }
    const auto& b = model.biases()[static_cast<std::size_t>(k)];
    out += "b " + std::to_string(b.size()) + "\n";
    for (Eigen::Index r = 0; r < b.size(); ++r) out += format_double(b(r)) + "\n";
  }
  return out;
}

AutoencoderModel parse_model(std::string_view text) {
  Lines lines(text);
  check_header(lines.require("header"), "ARBC-MODEL");
  std::vector<int> dims;
  for (auto p : split_ws(lines.require("layer dims"))) dims.push_back(parse_int<int>(p, "layer size"));
  if (dims.size() < 3) throw Error(ErrorKind::FormatError, "model needs at least 3 layer sizes");
  for (int d : dims)
    if (d < 1) throw Error(ErrorKind::FormatError, "layer sizes must be positive");

  std::vector<AutoencoderModel::Matrix> weights;
  std::vector<AutoencoderModel::Vector> biases;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const auto wh = split_ws(lines.require("weight header"));
    if (wh.size() != 3 || wh[0] != "W") throw Error(ErrorKind::FormatError, "expected 'W rows cols' for layer " + std::to_string(k));
    const auto rows = parse_int<Eigen::Index>(wh[1], "rows"), cols = parse_int<Eigen::Index>(wh[2], "cols");
    if (rows != dims[k + 1] || cols != dims[k])
      throw Error(ErrorKind::FormatError, "layer " + std::to_string(k) + " weight shape disagrees with layer dims");
    AutoencoderModel::Matrix w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row = parse_row(lines.require("weight row"), static_cast<std::size_t>(cols));
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = row[static_cast<std::size_t>(c)];
    }
    const auto bh = split_ws(lines.require("bias header"));
    if (bh.size() != 2 || bh[0] != "b") throw Error(ErrorKind::FormatError, "expected 'b rows' for layer " + std::to_string(k));
    if (parse_int<Eigen::Index>(bh[1], "rows") != rows)
      throw Error(ErrorKind::FormatError, "layer " + std::to_string(k) + " bias length disagrees with layer dims");
    AutoencoderModel::Vector b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) b(r) = parse_row(lines.require("bias value"), 1)[0];
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }
  expect_end(lines);
  try {
    return AutoencoderModel(dims, std::move(weights), std::move(biases));
  } catch (const Error& e) {
    throw Error(ErrorKind::FormatError, e.what());
  }
}

void save_model(const AutoencoderModel& model, const fs::path& path) { write_file_atomic(path, format_model(model)); }
AutoencoderModel load_model(const fs::path& path) { return parse_model(read_file(path)); }

std::string format_barcode_records(const BarcodeIndex& index) {
  std::string out;
  for (const auto& rec : index.records())
    out += rec.image_id + "\t" + rec.barcode.tag.to_string() + "\t" + rec.barcode.bits.to_string() + "\n";
  return out;
}

namespace {

void parse_records_into(Lines& lines, BarcodeIndex& index, std::optional<std::size_t> expected_count) {
  std::size_t count = 0;
  while (auto line = lines.next()) {
    if (line->empty() || line->front() == '#') continue;
    const auto fields = split(*line, '\t');
    if (fields.size() != 3 || fields[0].empty())
      throw Error(ErrorKind::FormatError, "line " + std::to_string(lines.number()) + ": expected id<TAB>method<TAB>bits");
    Barcode bc{BitVector::from_string(fields[2]), MethodTag::parse(fields[1])};
    try {
      index.add(std::string(fields[0]), std::move(bc));
    } catch (const Error& e) {
      throw Error(ErrorKind::FormatError, "line " + std::to_string(lines.number()) + ": " + e.what());
    }
    ++count;
  }
  if (expected_count && count != *expected_count)
    throw Error(ErrorKind::FormatError,
                "expected " + std::to_string(*expected_count) + " records, found " + std::to_string(count));
}

}  // namespace

BarcodeIndex parse_barcode_records(std::string_view text) {
  Lines lines(text);
  BarcodeIndex index;
  parse_records_into(lines, index, std::nullopt);
  return index;
}

std::string format_index(const BarcodeIndex& index) {
  std::string out = "ARBC-INDEX v1\n";
  out += "side=" + std::to_string(index.params().side) + " angles=" + std::to_string(index.params().num_angles) +
         " method=" + index.tag().to_string() + " length=" + std::to_string(index.barcode_length()) +
         " count=" + std::to_string(index.size()) + "\n";
  return out + format_barcode_records(index);
}

BarcodeIndex parse_index(std::string_view text) {
  Lines lines(text);
  check_header(lines.require("header"), "ARBC-INDEX");
  EncodingParams params;
  std::optional<MethodTag> tag;
  std::optional<std::size_t> length, count;
  for (auto kv : split_ws(lines.require("parameter line"))) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::FormatError, "bad index parameter '" + std::string(kv) + "'");
    const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "side")
      params.side = parse_int<int>(value, "side");
    else if (key == "angles")
      params.num_angles = parse_int<int>(value, "angles");
    else if (key == "method")
      tag = MethodTag::parse(value);
    else if (key == "length")
      length = parse_int<std::size_t>(value, "length");
    else if (key == "count")
      count = parse_int<std::size_t>(value, "count");
    else
      throw Error(ErrorKind::FormatError, "unknown index parameter '" + std::string(key) + "'");
  }
  if (!tag || !length || !count) throw Error(ErrorKind::FormatError, "index parameter line lacks method/length/count");
  BarcodeIndex index(*length, *tag, params);
  parse_records_into(lines, index, count);
  return index;
}

void save_index(const BarcodeIndex& index, const fs::path& path) { write_file_atomic(path, format_index(index)); }
BarcodeIndex load_index(const fs::path& path) { return parse_index(read_file(path)); }

std::string format_lsh(const LshLayout& layout) {
  std::string out = "LSH v1\n" + std::to_string(layout.num_tables) + "\n" + std::to_string(layout.key_size) + "\n" +
                    std::to_string(layout.seed) + "\n";
  for (const auto& table : layout.positions) {
    for (std::size_t i = 0; i < table.size(); ++i) out += (i ? " " : "") + std::to_string(table[i]);
    out += "\n";
  }
  return out;
}

LshLayout parse_lsh(std::string_view text) {
  Lines lines(text);
  check_header(lines.require("header"), "LSH");
  LshLayout layout;
  layout.num_tables = parse_int<int>(lines.require("num_tables"), "num_tables");
  layout.key_size = parse_int<int>(lines.require("key_size"), "key_size");
  layout.seed = parse_int<std::uint64_t>(lines.require("seed"), "seed");
  if (layout.num_tables < 1 || layout.key_size < 1) throw Error(ErrorKind::FormatError, "LSH sizes must be positive");
  for (int t = 0; t < layout.num_tables; ++t) {
    std::vector<std::uint32_t> positions;
    for (auto p : split_ws(lines.require("table positions"))) positions.push_back(parse_int<std::uint32_t>(p, "position"));
    if (static_cast<int>(positions.size()) != layout.key_size)
      throw Error(ErrorKind::FormatError, "table " + std::to_string(t) + " has " + std::to_string(positions.size()) +
                                              " positions, key size is " + std::to_string(layout.key_size));
    layout.positions.push_back(std::move(positions));
  }
  expect_end(lines);
  return layout;
}

void save_lsh(const LshLayout& layout, const fs::path& path) { write_file_atomic(path, format_lsh(layout)); }
LshLayout load_lsh(const fs::path& path) { return parse_lsh(read_file(path)); }

std::string format_branching(const BranchingTable& table) {
  std::string out = "ARBC-BRANCH v1\n";
  for (const auto& [key, count] : table.entries())
    out += std::to_string(key.first + 1) + "\t" + std::to_string(key.second + 1) + "\t" + std::to_string(count) + "\n";
  return out;
}

BranchingTable parse_branching(std::string_view text) {
  Lines lines(text);
  BranchingTable table;
  bool first = true;
  while (auto line = lines.next_content()) {
    if (first && line->rfind("ARBC-BRANCH", 0) == 0) {
      check_header(*line, "ARBC-BRANCH");
      first = false;
      continue;
    }
    first = false;
    const auto fields = split_ws(*line);
    if (fields.size() != 3)
      throw Error(ErrorKind::FormatError, "branching line " + std::to_string(lines.number()) + ": expected axis position count");
    const int axis = parse_int<int>(fields[0], "axis"), pos = parse_int<int>(fields[1], "position"),
              count = parse_int<int>(fields[2], "count");
    if (axis < 1 || axis > 4 || pos < 1 || count < 1)
      throw Error(ErrorKind::FormatError, "branching line " + std::to_string(lines.number()) + ": value out of range");
    table.set(axis - 1, pos - 1, count);
  }
  return table;
}

void save_branching(const BranchingTable& table, const fs::path& path) { write_file_atomic(path, format_branching(table)); }
BranchingTable load_branching(const fs::path& path) { return parse_branching(read_file(path)); }

std::string format_report(const ErrorReport& report) {
  std::string out = "TOTAL\t" + format_double(report.total_error) + "\n";
  for (const auto& [id, e] : report.per_image_errors) out += id + "\t" + format_double(e) + "\n";
  return out;
}

ErrorReport parse_report(std::string_view text) {
  Lines lines(text);
  ErrorReport report;
  const auto head = split(lines.require("TOTAL line"), '\t');
  if (head.size() != 2 || head[0] != "TOTAL") throw Error(ErrorKind::FormatError, "report must start with TOTAL line");
  report.total_error = parse_double(head[1]);
  while (auto line = lines.next()) {
    if (line->empty()) continue;
    const auto f = split(*line, '\t');
    if (f.size() != 2) throw Error(ErrorKind::FormatError, "bad report line " + std::to_string(lines.number()));
    report.per_image_errors.emplace_back(std::string(f[0]), parse_double(f[1]));
  }
  return report;
}

std::string format_loss_trace(const std::vector<double>& trace) {
  std::string out;
  for (std::size_t i = 0; i < trace.size(); ++i) out += std::to_string(i + 1) + "\t" + format_double(trace[i]) + "\n";
  return out;
}

}  // namespace arbc
