#pragma once

#include <string>

#include "intspec/spectral_field.hpp"

namespace intspec {

// Binary field container "SPF3", little-endian:
//   magic "SPF3", u32 version, i32 N, u32 flags (bit 0: divergence-free),
//   f64 discarded norm, u64 metadata length, metadata bytes (UTF-8 JSON),
//   u64 coefficient count (3 N^3), then the three components as (re, im)
//   f64 pairs in the library mode order.
inline constexpr unsigned kFieldFormatVersion = 1;

// Writes atomically (temporary file in the same directory, then rename).
void save_field(const std::string& path, const SpectralField3& v, const std::string& metadata_json = "{}");

struct LoadedField {
    SpectralField3 field;
    std::string metadata_json;
};

// Throws FormatError on a bad header, version or size (nothing is returned
// for truncated files) and ResampleRequiredError when expected_n > 0 differs
// from the stored N.
LoadedField load_field(const std::string& path, int expected_n = 0);

// Temporary file plus rename; throws std::runtime_error on I/O failure.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace intspec
