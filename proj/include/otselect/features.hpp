#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otselect/matrix.hpp"

namespace otselect {

// Unnormalized per-example feature vectors as they arrive from upstream
// (typically per-example loss gradients of a proxy model).
struct RawFeatureMatrix {
  DenseMatrix values;
  std::vector<std::string> ids;  // empty or one per row

  std::size_t n() const { return values.rows; }
  std::size_t d_in() const { return values.cols; }
};

// Unit-norm feature rows. Construct through project / normalize_rows /
// FeatureMatrix::from_unit_rows so the norm invariant holds.
struct FeatureMatrix {
  DenseMatrix values;
  std::uint64_t seed = 0;
  std::vector<std::string> ids;

  std::size_t n() const { return values.rows; }
  std::size_t d() const { return values.cols; }
  std::span<const double> row(std::size_t i) const { return values.row(i); }

  // Wraps rows that are already unit norm. Throws InvalidArgument when some
  // row deviates from norm 1 by more than tol, or an entry is not finite.
  static FeatureMatrix from_unit_rows(DenseMatrix values, double tol = 1e-6,
                                      std::vector<std::string> ids = {});

  // Subset of rows, in the given order.
  FeatureMatrix take(const std::vector<std::size_t>& rows) const;

  bool operator==(const FeatureMatrix&) const = default;
};

inline constexpr double kUnitNormTolerance = 1e-6;

struct ProjectionSpec {
  std::size_t d_in = 0;
  std::size_t d_out = 1024;
  double sparsity = 0.03125;  // 1/sqrt(1024)
  std::uint64_t seed = 0;
  // Test hook: replaces the random projection by the identity (d_out == d_in).
  bool identity = false;

  // Default sparse-JL configuration for an output dimension.
  static ProjectionSpec with_defaults(std::size_t d_in, std::size_t d_out = 1024,
                                      std::uint64_t seed = 0);
};

// Entry (row i of the output, column j of the input) of the seeded sparse
// sign matrix: 0 with probability 1 - sparsity, otherwise
// +-1/sqrt(sparsity * d_out) with equal probability.
double projection_entry(const ProjectionSpec& spec, std::size_t out_row, std::size_t in_col);

FeatureMatrix project(const RawFeatureMatrix& raw, const ProjectionSpec& spec);
FeatureMatrix normalize_rows(const RawFeatureMatrix& m);

// EVF binary files. Values are stored as little-endian f32, so writing
// quantizes doubles to float; reading yields exactly the stored floats.
RawFeatureMatrix read_evf(const std::filesystem::path& path);
void write_evf(const DenseMatrix& m, const std::vector<std::string>& ids,
               const std::filesystem::path& path);
void write_evf(const FeatureMatrix& m, const std::filesystem::path& path);

// CSV: one row per line, comma-separated decimals, no header.
RawFeatureMatrix read_csv(const std::filesystem::path& path);

// Dispatches on the file's leading bytes: "EVF1" means EVF, anything else CSV.
RawFeatureMatrix read_features(const std::filesystem::path& path);

// Rounds every entry through float, as an EVF write/read would.
DenseMatrix quantize_f32(const DenseMatrix& m);

}  // namespace otselect
