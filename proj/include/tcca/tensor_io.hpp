#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tcca/tensor.hpp"

namespace tcca {

/// Binary tensor file layout (all integers and floats little-endian):
///   magic "TCCA" (4 bytes), u32 version = 1, u32 mode count m,
///   m x u64 dims, then prod(dims) f64 values, first index fastest.
void write_tensor(const std::filesystem::path& path, const DenseTensor& x);
DenseTensor read_tensor(const std::filesystem::path& path);

/// CSV is accepted for 2-mode tensors; rows hold the first index.
void write_tensor_csv(const std::filesystem::path& path, const DenseTensor& x);
DenseTensor read_tensor_csv(const std::filesystem::path& path);

/// Dispatches on the ".csv" extension, otherwise reads the binary format.
DenseTensor read_tensor_auto(const std::filesystem::path& path);

/// Flat key=value config file. Blank lines and '#' comments are ignored.
/// Parse errors report the offending line number.
class KeyValueFile {
 public:
  KeyValueFile() = default;
  static KeyValueFile parse(const std::filesystem::path& path);
  static KeyValueFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  /// Throw InputError naming the key when it is missing.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);
  void set_list(const std::string& key, const std::vector<double>& values);

  /// Writes keys in insertion order via a temp file + rename.
  void write(const std::filesystem::path& path) const;

 private:
  std::string origin_ = "<memory>";
  std::vector<std::string> order_;
  std::map<std::string, std::string> entries_;
};

/// Locale-independent shortest round-trip formatting ('.' decimal point).
std::string format_double(double v);
double parse_double(const std::string& s);

/// Writes `text` to a sibling temp file and renames it over `path`, so no
/// partially written file is ever observable.
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tcca
