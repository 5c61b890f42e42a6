#include "lightcorners/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "lightcorners/errors.hpp"

namespace lightcorners {
namespace {

constexpr std::array<char, 8> kMagic = {'L', 'C', 'O', 'R', 'N', 'E', 'R', 'S'};
constexpr std::uint32_t kMaxRank = 8;

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const char* data, std::size_t n) { out_.insert(out_.end(), data, data + n); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  template <typename T>
  void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail(ErrorKind::Io, "checkpoint truncated");
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const std::string& name, const Shape& shape, std::span<const double> values) {
  w.str(name);
  w.u32(static_cast<std::uint32_t>(shape.size()));
  for (int d : shape) w.u32(static_cast<std::uint32_t>(d));
  for (double v : values) w.f64(v);
}

NamedTensor read_tensor(Reader& r) {
  NamedTensor t;
  t.name = r.str();
  const auto rank = r.u32();
  if (rank == 0 || rank > kMaxRank) fail(ErrorKind::Io, "checkpoint tensor '" + t.name + "' has invalid rank");
  Shape shape(rank);
  std::size_t count = 1;
  for (auto& d : shape) {
    d = static_cast<int>(r.u32());
    if (d <= 0) fail(ErrorKind::Io, "checkpoint tensor '" + t.name + "' has a zero dimension");
    count *= static_cast<std::size_t>(d);
  }
  if (count > r.remaining() / 8) fail(ErrorKind::Io, "checkpoint truncated in tensor '" + t.name + "'");
  std::vector<double> values(count);
  for (auto& v : values) v = r.f64();
  t.tensor = Tensor::from(std::move(shape), std::move(values));
  return t;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(index_of(c.light_type)));
  w.str(c.params.architecture);
  w.u32(c.epochs);
  w.u32(static_cast<std::uint32_t>(c.params.tensors.size()));
  for (const auto& t : c.params.tensors) write_tensor(w, t.name, t.tensor.shape(), t.tensor.values());
  w.u32(static_cast<std::uint32_t>(c.schedule.start_epoch));
  w.f64(c.schedule.lr_decay);
  w.u64(c.swa.count);
  w.u32(static_cast<std::uint32_t>(c.swa.mean.size()));
  for (std::size_t i = 0; i < c.swa.mean.size(); ++i) {
    const auto& like = c.params.tensors.at(i);
    write_tensor(w, like.name, like.tensor.shape(), c.swa.mean[i]);
  }
  const auto checksum = fnv1a(w.bytes());
  w.u64(checksum);
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() + 8 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorKind::Io, "not a lightcorners checkpoint (bad magic)");
  }
  const auto body = bytes.first(bytes.size() - 8);
  Reader tail(bytes.last(8));
  if (tail.u64() != fnv1a(body)) fail(ErrorKind::Io, "checkpoint checksum mismatch");

  Reader r(body);
  r.take(kMagic.size());
  const auto version = r.u32();
  if (version != kCheckpointVersion) fail(ErrorKind::Io, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  const auto type = r.u8();
  if (type > 3) fail(ErrorKind::Io, "checkpoint has an invalid light type");
  c.light_type = static_cast<LightType>(type);
  c.params.architecture = r.str();
  c.epochs = r.u32();
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) c.params.tensors.push_back(read_tensor(r));
  c.schedule.start_epoch = static_cast<int>(r.u32());
  c.schedule.lr_decay = r.f64();
  c.swa.count = r.u64();
  const auto means = r.u32();
  if (means != 0 && means != count) fail(ErrorKind::Io, "checkpoint SWA state does not match the parameters");
  for (std::uint32_t i = 0; i < means; ++i) {
    auto t = read_tensor(r);
    if (t.name != c.params.tensors[i].name || t.tensor.shape() != c.params.tensors[i].tensor.shape()) {
      fail(ErrorKind::Io, "checkpoint SWA tensor '" + t.name + "' does not match its parameter");
    }
    c.swa.mean.emplace_back(t.tensor.values().begin(), t.tensor.values().end());
  }
  if (r.remaining() != 0) fail(ErrorKind::Io, "trailing bytes in checkpoint");
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, LightType type) {
  return dir / ("model_" + std::string(short_name(type)) + ".ckpt");
}

}  // namespace lightcorners
