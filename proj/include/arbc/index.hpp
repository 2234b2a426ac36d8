#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "arbc/barcode.hpp"

namespace arbc {

/// Preprocessing parameters a barcode set was generated with; 0 = unknown.
struct EncodingParams {
  int side = 0;
  int num_angles = 0;

  friend bool operator==(const EncodingParams&, const EncodingParams&) = default;
};

struct IndexRecord {
  std::string image_id;
  Barcode barcode;
};

/// Homogeneous collection of barcodes: one length, one method tag, unique ids.
class BarcodeIndex {
 public:
  BarcodeIndex() = default;
  BarcodeIndex(std::size_t barcode_length, MethodTag tag, EncodingParams params = {})
      : length_(barcode_length), tag_(tag), params_(params), fixed_(true) {}

  /// The first insertion fixes length and method when the index was
  /// default-constructed.
  void add(std::string image_id, Barcode barcode);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t barcode_length() const { return length_; }
  const MethodTag& tag() const { return tag_; }
  const EncodingParams& params() const { return params_; }
  void set_params(EncodingParams params) { params_ = params; }
  const std::vector<IndexRecord>& records() const { return records_; }

  friend bool operator==(const BarcodeIndex& a, const BarcodeIndex& b) {
    if (a.length_ != b.length_ || !(a.tag_ == b.tag_) || !(a.params_ == b.params_) ||
        a.records_.size() != b.records_.size())
      return false;
    for (std::size_t i = 0; i < a.records_.size(); ++i)
      if (a.records_[i].image_id != b.records_[i].image_id || !(a.records_[i].barcode == b.records_[i].barcode))
        return false;
    return true;
  }

 private:
  std::size_t length_ = 0;
  MethodTag tag_;
  EncodingParams params_;
  bool fixed_ = false;
  std::vector<IndexRecord> records_;
  std::unordered_set<std::string> ids_;
};

struct SearchHit {
  std::string image_id;
  std::size_t distance = 0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Exact k-NN by full Hamming scan. Ascending distance, ties by ascending
/// image_id; returns min(k, |index|) hits.
std::vector<SearchHit> search_exhaustive(const BarcodeIndex& index, const BitVector& query, std::size_t k);
inline std::vector<SearchHit> search_exhaustive(const BarcodeIndex& index, const Barcode& query, std::size_t k) {
  return search_exhaustive(index, query.bits, k);
}

struct LshConfig {
  int num_tables = 30;
  std::optional<int> key_size;  // defaults to floor(barcode_length / 3)
  std::uint64_t seed = 0;
};

/// Sampled bit positions per table; this is what the sidecar file stores.
struct LshLayout {
  int num_tables = 0;
  int key_size = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint32_t>> positions;

  friend bool operator==(const LshLayout&, const LshLayout&) = default;
};

/// Draws `key_size` distinct positions per table from a seeded mt19937_64.
LshLayout sample_lsh_layout(std::size_t barcode_length, const LshConfig& config);

struct LshTables {
  LshLayout layout;
  std::vector<std::unordered_map<std::string, std::vector<std::size_t>>> buckets;  // record indices
};

/// Packs the bits of `bits` at `positions` into a hashable key.
std::string lsh_key(const BitVector& bits, const std::vector<std::uint32_t>& positions);

LshTables lsh_build(const BarcodeIndex& index, const LshConfig& config);
LshTables lsh_build(const BarcodeIndex& index, LshLayout layout);

/// Union of the query's buckets across tables, ranked by exact Hamming
/// distance (ties by image_id) and truncated to k. May be empty.
std::vector<SearchHit> search_lsh(const BarcodeIndex& index, const LshTables& tables, const BitVector& query,
                                  std::size_t k);
inline std::vector<SearchHit> search_lsh(const BarcodeIndex& index, const LshTables& tables, const Barcode& query,
                                         std::size_t k) {
  return search_lsh(index, tables, query.bits, k);
}

}  // namespace arbc
