#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otselect/features.hpp"
#include "otselect/ot.hpp"
#include "otselect/rng.hpp"

namespace testutil {

inline otselect::RawFeatureMatrix gaussian_raw(std::size_t n, std::size_t d, std::uint64_t seed) {
  otselect::Rng rng(seed);
  otselect::RawFeatureMatrix raw;
  raw.values = otselect::DenseMatrix(n, d);
  for (double& x : raw.values.data) x = rng.normal();
  return raw;
}

inline otselect::FeatureMatrix random_unit(std::size_t n, std::size_t d, std::uint64_t seed) {
  return otselect::normalize_rows(gaussian_raw(n, d, seed));
}

inline std::vector<double> random_simplex(std::size_t n, otselect::Rng& rng) {
  std::vector<double> v(n);
  double s = 0.0;
  for (double& x : v) s += (x = 0.05 + rng.uniform());
  for (double& x : v) x /= s;
  return v;
}

inline otselect::CostMatrix random_cost(std::size_t n, std::size_t m, otselect::Rng& rng,
                                        double scale = 1.0) {
  otselect::DenseMatrix c(n, m);
  for (double& x : c.data) x = scale * rng.uniform();
  return otselect::CostMatrix::from(std::move(c));
}

// Scratch directory removed at scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("otselect_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
