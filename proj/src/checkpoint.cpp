#include "eleuler/checkpoint.hpp"

#include "eleuler/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace eleuler {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

class Writer {
 public:
  template <class T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    bytes.insert(bytes.end(), raw, raw + sizeof(T));
  }
  void put_bytes(const char* p, std::size_t n) { bytes.insert(bytes.end(), p, p + n); }
  std::vector<char> bytes;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& b) : bytes_(b) {}
  template <class T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }
  const char* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint truncated");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [key, f] : fields)
    if (key == name) return true;
  return false;
}

const SpectralField& Checkpoint::field(const std::string& name) const {
  for (const auto& [key, f] : fields)
    if (key == name) return f;
  throw IoError("checkpoint has no field '" + name + "'");
}

std::vector<char> encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.put_bytes(kCheckpointMagic, 4);
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(c.dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.grid_n));
  w.put<double>(c.s);
  w.put<double>(c.time);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.fields.size()));
  for (const auto& [name, f] : c.fields) {
    if (f.dim() != c.dim || f.grid_n() != c.grid_n || f.components() != c.dim)
      throw ShapeError("checkpoint field '" + name + "' does not match the header shape");
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    for (int comp = 0; comp < f.components(); ++comp)
      for (Eigen::Index i = 0; i < f.modes(); ++i) {
        w.put<double>(f.coeffs()(i, comp).real());
        w.put<double>(f.coeffs()(i, comp).imag());
      }
  }
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(const std::vector<char>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(r.take(4), kCheckpointMagic, 4) != 0)
    throw IoError("not a checkpoint (bad magic)");
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.dim = r.get<std::uint16_t>();
  c.grid_n = static_cast<int>(r.get<std::uint32_t>());
  c.s = r.get<double>();
  c.time = r.get<double>();
  const auto count = r.get<std::uint32_t>();
  if ((c.dim != 2 && c.dim != 3) || c.grid_n < 4 || c.grid_n % 2 != 0 || c.grid_n > 4096)
    throw IoError("checkpoint header has an invalid shape");
  for (std::uint32_t f = 0; f < count; ++f) {
    const auto len = r.get<std::uint32_t>();
    std::string name(r.take(len), len);
    SpectralField field(c.dim, c.grid_n, c.dim);
    for (int comp = 0; comp < c.dim; ++comp)
      for (Eigen::Index i = 0; i < field.modes(); ++i) {
        const double re = r.get<double>();
        const double im = r.get<double>();
        field.coeffs()(i, comp) = Complex(re, im);
      }
    c.fields.emplace_back(std::move(name), std::move(field));
  }
  if (!r.done()) throw IoError("checkpoint has trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const std::vector<char> bytes = encode_checkpoint(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

bool looks_like_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char head[4] = {};
  return in.read(head, 4) && std::memcmp(head, kCheckpointMagic, 4) == 0;
}

}  // namespace eleuler
