#include "arbc/index.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace arbc {

void BarcodeIndex::add(std::string image_id, Barcode barcode) {
  if (!fixed_) {
    length_ = barcode.length();
    tag_ = barcode.tag;
    fixed_ = true;
  }
  if (barcode.length() != length_)
    throw Error(ErrorKind::LengthMismatch, image_id + ": barcode length " + std::to_string(barcode.length()) +
                                               ", index length " + std::to_string(length_));
  if (!(barcode.tag == tag_))
    throw Error(ErrorKind::ConfigMismatch, image_id + ": method " + barcode.tag.to_string() + ", index method " +
                                               tag_.to_string());
  if (!ids_.insert(image_id).second) throw Error(ErrorKind::FormatError, "duplicate image id " + image_id);
  records_.push_back({std::move(image_id), std::move(barcode)});
}

namespace {

bool hit_less(const SearchHit& a, const SearchHit& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.image_id < b.image_id;
}

void check_query(const BarcodeIndex& index, const BitVector& query, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (index.empty()) throw Error(ErrorKind::EmptyIndex, "index has no records");
  if (query.size() != index.barcode_length())
    throw Error(ErrorKind::LengthMismatch, "query length " + std::to_string(query.size()) + ", index length " +
                                               std::to_string(index.barcode_length()));
}

std::vector<SearchHit> rank(std::vector<SearchHit> hits, std::size_t k) {
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), hit_less);
  hits.resize(keep);
  return hits;
}

}  // namespace

std::vector<SearchHit> search_exhaustive(const BarcodeIndex& index, const BitVector& query, std::size_t k) {
  check_query(index, query, k);
  std::vector<SearchHit> hits;
  hits.reserve(index.size());
  for (const auto& rec : index.records())
    hits.push_back({rec.image_id, hamming_distance(rec.barcode.bits, query)});
  return rank(std::move(hits), k);
}

LshLayout sample_lsh_layout(std::size_t barcode_length, const LshConfig& config) {
  const int key_size = config.key_size.value_or(std::max(1, static_cast<int>(barcode_length / 3)));
  if (config.num_tables < 1) throw Error(ErrorKind::InvalidConfig, "LSH needs at least one table");
  if (key_size < 1 || static_cast<std::size_t>(key_size) > barcode_length)
    throw Error(ErrorKind::InvalidConfig, "LSH key size " + std::to_string(key_size) + " outside 1.." +
                                              std::to_string(barcode_length));
  LshLayout layout{config.num_tables, key_size, config.seed, {}};
  std::mt19937_64 rng(config.seed);
  std::vector<std::uint32_t> all(barcode_length);
  for (int t = 0; t < config.num_tables; ++t) {
    std::iota(all.begin(), all.end(), 0u);
    std::shuffle(all.begin(), all.end(), rng);
    layout.positions.emplace_back(all.begin(), all.begin() + key_size);
  }
  return layout;
}

std::string lsh_key(const BitVector& bits, const std::vector<std::uint32_t>& positions) {
  std::string key((positions.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (bits.test(positions[i])) key[i / 8] = static_cast<char>(key[i / 8] | (1 << (i % 8)));
  return key;
}

LshTables lsh_build(const BarcodeIndex& index, const LshConfig& config) {
  return lsh_build(index, sample_lsh_layout(index.barcode_length(), config));
}

LshTables lsh_build(const BarcodeIndex& index, LshLayout layout) {
  if (layout.num_tables < 1 || static_cast<std::size_t>(layout.num_tables) != layout.positions.size())
    throw Error(ErrorKind::InvalidConfig, "LSH layout table count inconsistent");
  for (const auto& p : layout.positions) {
    if (static_cast<int>(p.size()) != layout.key_size) throw Error(ErrorKind::InvalidConfig, "LSH key size inconsistent");
    for (std::uint32_t pos : p)
      if (pos >= index.barcode_length() && !index.empty())
        throw Error(ErrorKind::InvalidConfig, "LSH position " + std::to_string(pos) + " beyond barcode length");
  }
  LshTables tables;
  tables.buckets.resize(layout.positions.size());
  for (std::size_t t = 0; t < layout.positions.size(); ++t)
    for (std::size_t r = 0; r < index.size(); ++r)
      tables.buckets[t][lsh_key(index.records()[r].barcode.bits, layout.positions[t])].push_back(r);
  tables.layout = std::move(layout);
  return tables;
}

std::vector<SearchHit> search_lsh(const BarcodeIndex& index, const LshTables& tables, const BitVector& query,
                                  std::size_t k) {
  check_query(index, query, k);
  std::vector<std::size_t> candidates;
  for (std::size_t t = 0; t < tables.buckets.size(); ++t) {
    const auto it = tables.buckets[t].find(lsh_key(query, tables.layout.positions[t]));
    if (it != tables.buckets[t].end()) candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<SearchHit> hits;
  hits.reserve(candidates.size());
  for (std::size_t r : candidates) {
    const auto& rec = index.records()[r];
    hits.push_back({rec.image_id, hamming_distance(rec.barcode.bits, query)});
  }
  return rank(std::move(hits), k);
}

}  // namespace arbc
