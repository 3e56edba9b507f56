#pragma once

#include <filesystem>
#include <iosfwd>

#include "dawc/frontend.hpp"
#include "dawc/signal_model.hpp"

namespace dawc {

// Binary complex matrix layout, all little-endian:
//   bytes 0..7   magic "DAWCCMX1"
//   bytes 8..11  rows (uint32)
//   bytes 12..15 cols (uint32)
//   then rows*cols entries in row-major order, each as re, im (IEEE double).
inline constexpr char kMatrixMagic[8] = {'D', 'A', 'W', 'C', 'C', 'M', 'X', '1'};
inline constexpr std::size_t kMatrixHeaderBytes = 16;

void write_matrix(std::ostream& out, const CMatrix& m);
CMatrix read_matrix(std::istream& in);

void write_matrix_file(const std::filesystem::path& path, const CMatrix& m);
CMatrix read_matrix_file(const std::filesystem::path& path);

/// A persisted measurement set: config.json, A.bin, X.bin, Y.bin, manifest.txt.
struct StoredMeasurement {
    FrontendConfig frontend;
    MultibandSpec spec;
    MeasurementSet measurement;
};

void save_measurement(const std::filesystem::path& dir,
                      const FrontendConfig& cfg,
                      const MultibandSpec& spec,
                      const MeasurementSet& ms);

/// E is recomputed as Y - A X, matching how measure() defines it.
StoredMeasurement load_measurement(const std::filesystem::path& dir);

}  // namespace dawc
