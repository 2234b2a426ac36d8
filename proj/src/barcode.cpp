#include "arbc/barcode.hpp"

#include <cctype>
#include <charconv>

namespace arbc {

std::string BitVector::to_string() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i)
    if (test(i)) out[i] = '1';
  return out;
}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      out.set(i);
    else if (bits[i] != '0')
      throw Error(ErrorKind::FormatError, "bitstring contains '" + std::string(1, bits[i]) + "'");
  }
  return out;
}

std::string MethodTag::to_string() const {
  if (method == BarcodeMethod::RBC) return "RBC";
  return "ARBC:" + std::to_string(layer.value_or(1));
}

MethodTag MethodTag::parse(std::string_view text) {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "RBC") return {BarcodeMethod::RBC, std::nullopt};
  if (upper.rfind("ARBC", 0) == 0) {
    if (upper.size() == 4) return {BarcodeMethod::ARBC, 1};
    if (upper[4] != ':') throw Error(ErrorKind::FormatError, "bad method tag '" + std::string(text) + "'");
    int layer = 0;
    const char* first = upper.data() + 5;
    const char* last = upper.data() + upper.size();
    auto [ptr, ec] = std::from_chars(first, last, layer);
    if (ec != std::errc() || ptr != last || first == last || layer < 1)
      throw Error(ErrorKind::FormatError, "bad ARBC layer in '" + std::string(text) + "'");
    return {BarcodeMethod::ARBC, layer};
  }
  throw Error(ErrorKind::FormatError, "unknown method '" + std::string(text) + "'");
}

std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::LengthMismatch,
                "barcode lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  std::size_t d = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) d += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
  return d;
}

std::size_t hamming_distance(const Barcode& a, const Barcode& b) { return hamming_distance(a.bits, b.bits); }

}  // namespace arbc
