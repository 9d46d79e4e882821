#include "urbanplan/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace urban {

namespace {

constexpr char kMagic[8] = {'U', 'P', 'C', 'K', 'P', 'T', '0', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
  put_u64(os, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  return std::bit_cast<double>(get_u64(is));
}

struct Entry {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

std::unordered_map<std::string, Entry> read_all(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  const std::uint64_t count = get_u64(is);
  std::vector<std::string> names(count);
  std::unordered_map<std::string, Entry> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    const std::uint32_t rank = get_u32(is);
    Entry e;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint64_t ext = get_u64(is);
      e.shape.push_back(static_cast<std::size_t>(ext));
      total *= static_cast<std::size_t>(ext);
    }
    e.values.resize(total);
    names[i] = name;
    entries.emplace(std::move(name), std::move(e));
  }
  for (const std::string& name : names) {
    Entry& e = entries.at(name);
    for (double& v : e.values) v = get_f64(is);
  }
  if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
  return entries;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<const Parameter*>& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot write " + path);
  os.write(kMagic, 8);
  put_u64(os, params.size());
  for (const Parameter* p : params) {
    put_u32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_u32(os, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) put_u64(os, d);
  }
  for (const Parameter* p : params) {
    for (double v : p->value.values()) put_f64(os, v);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path,
                     const std::vector<Parameter*>& params) {
  auto entries = read_all(path);
  for (Parameter* p : params) {
    auto it = entries.find(p->name);
    if (it == entries.end()) {
      throw std::runtime_error("checkpoint: parameter '" + p->name +
                               "' missing from " + path);
    }
    if (it->second.shape != p->value.shape()) {
      throw std::runtime_error("checkpoint: shape mismatch for '" + p->name + "'");
    }
    p->value = Tensor(it->second.shape, it->second.values);
    p->reset_grad();
  }
}

std::vector<std::pair<std::string, std::vector<std::size_t>>>
read_checkpoint_manifest(const std::string& path) {
  auto entries = read_all(path);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  out.reserve(entries.size());
  for (auto& [name, e] : entries) out.emplace_back(name, e.shape);
  return out;
}

}  // namespace urban
