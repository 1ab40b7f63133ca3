#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "vswno/data.hpp"

namespace vswno::data {

namespace {

constexpr char kMagic[4] = {'V', 'S', 'W', 'N'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::string get_string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      throw ContainerError(ContainerErrorKind::Truncated, std::string("truncated container while reading ") + what);
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedArray* Container::find(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

const NamedArray& Container::at(const std::string& name) const {
  if (const auto* a = find(name)) return *a;
  throw ContainerError(ContainerErrorKind::Invalid, "container has no array '" + name + "'");
}

std::vector<std::uint8_t> encode_container(const Container& c) {
  Writer w;
  w.put_bytes(kMagic, 4);
  w.put<std::uint32_t>(kContainerVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.arrays.size()));
  for (const auto& a : c.arrays) {
    if (a.name.size() > 0xFFFF) throw ContainerError(ContainerErrorKind::Invalid, "array name too long");
    if (shape_size(a.dims) != a.values.size())
      throw ContainerError(ContainerErrorKind::Invalid, "array '" + a.name + "': dims do not match value count");
    w.put<std::uint16_t>(static_cast<std::uint16_t>(a.name.size()));
    w.put_bytes(a.name.data(), a.name.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(a.dtype));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(a.dims.size()));
    for (auto d : a.dims) w.put<std::uint64_t>(d);
    if (a.dtype == DType::F32) {
      for (double v : a.values) w.put<float>(static_cast<float>(v));
    } else {
      for (double v : a.values) w.put<double>(v);
    }
  }
  const std::string meta = c.metadata.dump();
  w.put<std::uint64_t>(meta.size());
  w.put_bytes(meta.data(), meta.size());
  return std::move(w.bytes);
}

Container decode_container(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw ContainerError(ContainerErrorKind::BadMagic, "bad magic: not a VSWN container");
  r.get_string(4, "magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kContainerVersion)
    throw ContainerError(ContainerErrorKind::BadVersion, "unsupported container version " + std::to_string(version));
  const auto count = r.get<std::uint32_t>("array count");

  Container c;
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedArray a;
    const auto name_len = r.get<std::uint16_t>("name length");
    a.name = r.get_string(name_len, "array name");
    const auto dtype = r.get<std::uint8_t>("dtype");
    if (dtype > 1)
      throw ContainerError(ContainerErrorKind::UnknownDtype,
                           "array '" + a.name + "': unknown dtype code " + std::to_string(dtype));
    a.dtype = static_cast<DType>(dtype);
    const auto ndim = r.get<std::uint32_t>("ndim");
    r.need(static_cast<std::size_t>(ndim) * 8, "dims");
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const auto extent = r.get<std::uint64_t>("dims");
      a.dims.push_back(extent);
      if (extent != 0 && total > std::numeric_limits<std::size_t>::max() / extent)
        throw ContainerError(ContainerErrorKind::Truncated, "array '" + a.name + "': dims overflow");
      total *= extent;
    }
    const std::size_t width = a.dtype == DType::F32 ? 4 : 8;
    if (total != 0 && r.remaining() / width < total)
      throw ContainerError(ContainerErrorKind::Truncated, "truncated payload for array '" + a.name + "'");
    a.values.resize(total);
    for (std::size_t i = 0; i < total; ++i)
      a.values[i] = a.dtype == DType::F32 ? static_cast<double>(r.get<float>("payload")) : r.get<double>("payload");
    c.arrays.push_back(std::move(a));
  }
  const auto meta_len = r.get<std::uint64_t>("metadata length");
  const std::string meta = r.get_string(meta_len, "metadata");
  try {
    c.metadata = json::parse(meta);
  } catch (const json::exception& e) {
    throw ContainerError(ContainerErrorKind::Invalid, std::string("metadata is not valid JSON: ") + e.what());
  }
  return c;
}

void write_container(const std::string& path, const Container& c) {
  const auto bytes = encode_container(c);
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ContainerError(ContainerErrorKind::Io, "cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw ContainerError(ContainerErrorKind::Io, "write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ContainerError(ContainerErrorKind::Io, "cannot rename " + tmp + " to " + path);
  }
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError(ContainerErrorKind::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

}  // namespace vswno::data
