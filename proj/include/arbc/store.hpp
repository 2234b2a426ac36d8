#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "arbc/autoencoder.hpp"
#include "arbc/index.hpp"
#include "arbc/irma.hpp"

namespace arbc {

// Text artifacts. Versioned files begin with `MAGIC vN`; unknown magic is a
// FormatError and an unknown version a VersionMismatch.

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

// ARBC-MODEL v1
std::string format_model(const AutoencoderModel& model);
AutoencoderModel parse_model(std::string_view text);
void save_model(const AutoencoderModel& model, const std::filesystem::path& path);
AutoencoderModel load_model(const std::filesystem::path& path);

/// Headerless barcode store: `image_id<TAB>method[:layer]<TAB>bitstring`.
std::string format_barcode_records(const BarcodeIndex& index);
BarcodeIndex parse_barcode_records(std::string_view text);

// ARBC-INDEX v1: header, parameter line, then barcode store records.
std::string format_index(const BarcodeIndex& index);
BarcodeIndex parse_index(std::string_view text);
void save_index(const BarcodeIndex& index, const std::filesystem::path& path);
BarcodeIndex load_index(const std::filesystem::path& path);

// LSH v1 sidecar
std::string format_lsh(const LshLayout& layout);
LshLayout parse_lsh(std::string_view text);
void save_lsh(const LshLayout& layout, const std::filesystem::path& path);
LshLayout load_lsh(const std::filesystem::path& path);

// ARBC-BRANCH v1: `axis<TAB>position<TAB>count`, 1-based. The header line is
// optional on load so externally supplied tables can be used directly.
std::string format_branching(const BranchingTable& table);
BranchingTable parse_branching(std::string_view text);
void save_branching(const BranchingTable& table, const std::filesystem::path& path);
BranchingTable load_branching(const std::filesystem::path& path);

/// `TOTAL<TAB>value`, then `image_id<TAB>value` per test image.
std::string format_report(const ErrorReport& report);
ErrorReport parse_report(std::string_view text);

/// `epoch<TAB>loss`, 1-based epochs.
std::string format_loss_trace(const std::vector<double>& trace);

}  // namespace arbc
