#include "tcca/tensor_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "tcca/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts are unsupported");

namespace tcca {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'C', 'A'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(std::istream& in, const std::filesystem::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw InputError("truncated tensor file: " + path.string());
  return v;
}

void atomic_write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("rename failed for " + path.string() + ": " + ec.message());
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const DenseTensor& x) {
  std::string out;
  out.reserve(16 + 8 * static_cast<std::size_t>(x.order() + x.size()));
  out.append(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(x.order()));
  for (Index d : x.dims()) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
  for (double v : x.values()) put<double>(out, v);
  atomic_write_bytes(path, out);
}

DenseTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open tensor file: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw InputError("bad magic in tensor file: " + path.string());
  const auto version = take<std::uint32_t>(in, path);
  if (version != kVersion)
    throw InputError("unsupported tensor file version " + std::to_string(version) + " in " +
                     path.string());
  const auto m = take<std::uint32_t>(in, path);
  if (m == 0 || m > 64) throw InputError("implausible mode count in " + path.string());
  std::vector<Index> dims(m);
  std::size_t total = 1;
  for (auto& d : dims) {
    const auto v = take<std::uint64_t>(in, path);
    if (v == 0 || v > (1ull << 32)) throw InputError("implausible dim in " + path.string());
    d = static_cast<Index>(v);
    total *= static_cast<std::size_t>(v);
  }
  std::vector<double> values(total);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(total * sizeof(double))))
    throw InputError("truncated tensor payload: " + path.string());
  return DenseTensor(std::move(dims), std::move(values));
}

void write_tensor_csv(const std::filesystem::path& path, const DenseTensor& x) {
  if (x.order() != 2) throw InputError("CSV tensors must have exactly 2 modes");
  std::string out;
  for (Index i = 0; i < x.dim(0); ++i) {
    for (Index j = 0; j < x.dim(1); ++j) {
      if (j) out += ',';
      out += format_double(x.at({i, j}));
    }
    out += '\n';
  }
  atomic_write_bytes(path, out);
}

DenseTensor read_tensor_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open CSV file: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(parse_double(trim(cell)));
      } catch (const InputError&) {
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                         trim(cell) + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("empty CSV tensor: " + path.string());
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.front().size());
  DenseTensor out({r, c});
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j)
      out[i + r * j] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

DenseTensor read_tensor_auto(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_tensor_csv(path);
  return read_tensor(path);
}

KeyValueFile KeyValueFile::parse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path.string());
}

KeyValueFile KeyValueFile::parse_text(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InputError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw InputError(origin + ":" + std::to_string(lineno) + ": empty key");
    kv.set(key, trim(t.substr(eq + 1)));
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& KeyValueFile::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    throw InputError(origin_ + ": missing required key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  try {
    return parse_double(get(key));
  } catch (const InputError&) {
    throw InputError(origin_ + ": key '" + key + "' is not a number: '" + get(key) + "'");
  }
}

long long KeyValueFile::get_int(const std::string& key) const {
  const std::string& s = get(key);
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw InputError(origin_ + ": key '" + key + "' is not an integer: '" + s + "'");
  return v;
}

std::vector<double> KeyValueFile::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(parse_double(trim(cell)));
    } catch (const InputError&) {
      throw InputError(origin_ + ": key '" + key + "' has a bad list entry '" + trim(cell) + "'");
    }
  }
  if (out.empty()) throw InputError(origin_ + ": key '" + key + "' has an empty list");
  return out;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  if (!entries_.count(key)) order_.push_back(key);
  entries_[key] = value;
}

void KeyValueFile::set_double(const std::string& key, double value) {
  set(key, format_double(value));
}

void KeyValueFile::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

void KeyValueFile::set_list(const std::string& key, const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_double(values[i]);
  }
  set(key, s);
}

void KeyValueFile::write(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& key : order_) out += key + "=" + entries_.at(key) + "\n";
  atomic_write_bytes(path, out);
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw InputError("bad number: '" + s + "'");
  return v;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
  atomic_write_bytes(path, text);
}

}  // namespace tcca
