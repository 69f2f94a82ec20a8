#include "otselect/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "otselect/errors.hpp"
#include "otselect/parallel.hpp"
#include "otselect/rng.hpp"

namespace otselect {
namespace {

static_assert(std::endian::native == std::endian::little, "EVF I/O assumes a little-endian host");

constexpr char kMagic[4] = {'E', 'V', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

void check_finite(const DenseMatrix& m, const char* what) {
  for (std::size_t k = 0; k < m.data.size(); ++k)
    if (!std::isfinite(m.data[k]))
      throw InvalidArgument(std::string(what) + ": non-finite entry at row " +
                            std::to_string(k / m.cols) + ", column " + std::to_string(k % m.cols));
}

// Divides every row by its norm in place.
void normalize_in_place(DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    const double norm = std::sqrt(dot(r, r));
    if (!(norm > 0.0) || !std::isfinite(norm)) throw ZeroRowError(i);
    for (double& x : r) x /= norm;
  }
}

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::filesystem::path& path) : bytes_(bytes), path_(path) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size())
      throw FormatError(path_.string() + ": truncated file while reading " + what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string(std::size_t len) {
    if (pos_ + len > bytes_.size()) throw FormatError(path_.string() + ": truncated id string");
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

FeatureMatrix FeatureMatrix::from_unit_rows(DenseMatrix values, double tol,
                                            std::vector<std::string> ids) {
  check_finite(values, "feature matrix");
  for (std::size_t i = 0; i < values.rows; ++i) {
    const auto r = values.row(i);
    const double norm = std::sqrt(dot(r, r));
    if (std::abs(norm - 1.0) > tol)
      throw InvalidArgument("row " + std::to_string(i) + " has norm " + std::to_string(norm) +
                            ", expected unit norm");
  }
  if (!ids.empty() && ids.size() != values.rows)
    throw DimensionMismatch("id count does not match row count");
  FeatureMatrix out;
  out.values = std::move(values);
  out.ids = std::move(ids);
  return out;
}

FeatureMatrix FeatureMatrix::take(const std::vector<std::size_t>& rows) const {
  FeatureMatrix out;
  out.seed = seed;
  out.values = DenseMatrix(rows.size(), d());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = row(rows[k]);
    std::copy(src.begin(), src.end(), out.values.row(k).begin());
    if (!ids.empty()) out.ids.push_back(ids[rows[k]]);
  }
  return out;
}

ProjectionSpec ProjectionSpec::with_defaults(std::size_t d_in, std::size_t d_out,
                                             std::uint64_t seed) {
  ProjectionSpec s;
  s.d_in = d_in;
  s.d_out = d_out;
  s.sparsity = 1.0 / std::sqrt(static_cast<double>(d_out));
  s.seed = seed;
  return s;
}

double projection_entry(const ProjectionSpec& spec, std::size_t out_row, std::size_t in_col) {
  const std::uint64_t h = hash_combine(hash_combine(spec.seed, in_col), out_row);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u >= spec.sparsity) return 0.0;
  // The low bit is independent of the top 53 bits used for u.
  const double scale = 1.0 / std::sqrt(spec.sparsity * static_cast<double>(spec.d_out));
  return (h & 1U) ? scale : -scale;
}

FeatureMatrix project(const RawFeatureMatrix& raw, const ProjectionSpec& spec) {
  if (spec.d_in != raw.d_in())
    throw DimensionMismatch("projection expects d_in=" + std::to_string(spec.d_in) +
                            " but features have " + std::to_string(raw.d_in()) + " columns");
  if (spec.d_out < 1) throw InvalidArgument("d_out must be at least 1");
  if (!(spec.sparsity > 0.0 && spec.sparsity <= 1.0))
    throw InvalidArgument("sparsity must lie in (0, 1]");
  check_finite(raw.values, "raw features");

  FeatureMatrix out;
  out.seed = spec.seed;
  out.ids = raw.ids;

  if (spec.identity) {
    if (spec.d_out != spec.d_in) throw InvalidArgument("identity projection needs d_out == d_in");
    out.values = raw.values;
    normalize_in_place(out.values);
    return out;
  }

  // Sparse column lists of the projection: for input column j, the output
  // rows it feeds and the signed weight.
  struct Entry {
    std::uint32_t row;
    double value;
  };
  std::vector<std::vector<Entry>> columns(spec.d_in);
  parallel_for(spec.d_in, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j)
      for (std::size_t i = 0; i < spec.d_out; ++i)
        if (const double v = projection_entry(spec, i, j); v != 0.0)
          columns[j].push_back({static_cast<std::uint32_t>(i), v});
  });

  out.values = DenseMatrix(raw.n(), spec.d_out);
  parallel_for(raw.n(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto src = raw.values.row(r);
      auto dst = out.values.row(r);
      for (std::size_t j = 0; j < spec.d_in; ++j) {
        const double x = src[j];
        if (x == 0.0) continue;
        for (const Entry& e : columns[j]) dst[e.row] += e.value * x;
      }
    }
  }, 4);
  normalize_in_place(out.values);
  return out;
}

FeatureMatrix normalize_rows(const RawFeatureMatrix& m) {
  check_finite(m.values, "raw features");
  FeatureMatrix out;
  out.values = m.values;
  out.ids = m.ids;
  normalize_in_place(out.values);
  return out;
}

RawFeatureMatrix read_evf(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(path.string() + ": bad magic, not an EVF file");
  Reader in(bytes, path);
  in.get<std::uint32_t>("magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kVersion)
    throw FormatError(path.string() + ": unsupported EVF version " + std::to_string(version));
  const auto n = in.get<std::uint32_t>("row count");
  const auto d = in.get<std::uint32_t>("column count");
  const std::uint64_t count = static_cast<std::uint64_t>(n) * d;
  if (in.remaining() < count * sizeof(float))
    throw FormatError(path.string() + ": truncated payload, expected " + std::to_string(count) +
                      " values");

  RawFeatureMatrix out;
  out.values = DenseMatrix(n, d);
  for (std::uint64_t k = 0; k < count; ++k) {
    const float v = in.get<float>("payload");
    if (!std::isfinite(v))
      throw FormatError(path.string() + ": non-finite entry at row " + std::to_string(k / d) +
                        ", column " + std::to_string(k % d));
    out.values.data[k] = static_cast<double>(v);
  }
  if (in.remaining() > 0) {
    const auto id_count = in.get<std::uint32_t>("id count");
    if (id_count != 0 && id_count != n)
      throw FormatError(path.string() + ": id count " + std::to_string(id_count) +
                        " does not match row count");
    out.ids.reserve(id_count);
    for (std::uint32_t k = 0; k < id_count; ++k) {
      const auto len = in.get<std::uint16_t>("id length");
      out.ids.push_back(in.get_string(len));
    }
    if (in.remaining() > 0) throw FormatError(path.string() + ": trailing bytes after ids");
  }
  return out;
}

void write_evf(const DenseMatrix& m, const std::vector<std::string>& ids,
               const std::filesystem::path& path) {
  if (m.rows > UINT32_MAX || m.cols > UINT32_MAX) throw InvalidArgument("matrix too large for EVF");
  if (!ids.empty() && ids.size() != m.rows)
    throw DimensionMismatch("id count does not match row count");
  std::string out;
  out.reserve(16 + m.data.size() * sizeof(float));
  out.append(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols));
  for (double v : m.data) {
    if (!std::isfinite(v)) throw InvalidArgument("cannot write non-finite value to EVF");
    put<float>(out, static_cast<float>(v));
  }
  if (!ids.empty()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ids.size()));
    for (const auto& id : ids) {
      if (id.size() > UINT16_MAX) throw InvalidArgument("id longer than 65535 bytes");
      put<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
      out += id;
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

void write_evf(const FeatureMatrix& m, const std::filesystem::path& path) {
  write_evf(m.values, m.ids, path);
}

RawFeatureMatrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || cell.find_first_not_of(" \t", end - cell.c_str()) != std::string::npos)
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": cannot parse '" + cell +
                          "' as a number");
      if (!std::isfinite(v))
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
      values.push_back(v);
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols)
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(cols) + " columns, found " + std::to_string(count));
    ++rows;
  }
  if (rows == 0) throw FormatError(path.string() + ": no rows");
  RawFeatureMatrix out;
  out.values = DenseMatrix(rows, cols, std::move(values));
  return out;
}

RawFeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char head[4] = {};
  in.read(head, 4);
  if (in.gcount() == 4 && std::memcmp(head, kMagic, 4) == 0) return read_evf(path);
  return read_csv(path);
}

DenseMatrix quantize_f32(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (double& v : out.data) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace otselect
