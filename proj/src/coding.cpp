#include "rsuq/coding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rsuq {

void BitWriter::put(bool bit) {
  if (bits_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::put_bits(std::uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) put((value >> i) & 1u);
}

std::vector<std::uint8_t> BitWriter::finish() && { return std::move(bytes_); }

bool BitReader::get() {
  if (pos_ >= bytes_.size() * 8) throw CorruptStreamError("bit stream truncated");
  const bool bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::get_bits(int width) {
  std::uint64_t value = 0;
  for (int i = 0; i < width; ++i) value = (value << 1) | static_cast<std::uint64_t>(get());
  return value;
}

namespace {

// floor(log2(m)) and whether m is a power of two.
int floor_log2(std::uint64_t m) { return 63 - std::countl_zero(m); }

int ceil_log2(std::uint64_t m) { return m <= 1 ? 0 : floor_log2(m - 1) + 1; }

}  // namespace

GolombCode GolombCode::for_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("Golomb code: p must lie in (0, 1]");
  const double q = 1.0 - p;
  if (q == 0.0) return GolombCode(p, 1);
  auto fits = [q](double m) { return std::pow(q, m) + std::pow(q, m + 1) <= 1.0; };
  double m = std::max(1.0, std::ceil(-std::log1p(q) / std::log(q)));
  while (m > 1.0 && fits(m - 1.0)) m -= 1.0;
  while (!fits(m)) m += 1.0;
  return GolombCode(p, static_cast<std::uint64_t>(m));
}

GolombCode GolombCode::with_parameter(std::uint64_t m) {
  if (m == 0) throw std::invalid_argument("Golomb parameter must be positive");
  return GolombCode(std::nan(""), m);
}

void GolombCode::encode(BitWriter& out, std::uint64_t k) const {
  if (k == 0) throw std::invalid_argument("Golomb code: k must be >= 1");
  const std::uint64_t q = (k - 1) / m_;
  const std::uint64_t r = (k - 1) % m_;
  for (std::uint64_t i = 0; i < q; ++i) out.put(true);
  out.put(false);
  const int b = ceil_log2(m_);
  const std::uint64_t cutoff = (std::uint64_t{1} << b) - m_;
  if (r < cutoff) {
    out.put_bits(r, b - 1);
  } else {
    out.put_bits(r + cutoff, b);
  }
}

std::uint64_t GolombCode::decode(BitReader& in) const {
  std::uint64_t q = 0;
  while (in.get()) {
    ++q;
    if (q > (std::uint64_t{1} << 48) / m_) throw CorruptStreamError("Golomb quotient out of range");
  }
  const int b = ceil_log2(m_);
  const std::uint64_t cutoff = (std::uint64_t{1} << b) - m_;
  std::uint64_t r = 0;
  if (b > 0) {
    r = in.get_bits(b - 1);
    if (r >= cutoff) {
      r = ((r << 1) | static_cast<std::uint64_t>(in.get())) - cutoff;
    }
  }
  return q * m_ + r + 1;
}

std::size_t GolombCode::length(std::uint64_t k) const {
  const std::uint64_t q = (k - 1) / m_;
  const std::uint64_t r = (k - 1) % m_;
  const int b = ceil_log2(m_);
  const std::uint64_t cutoff = (std::uint64_t{1} << b) - m_;
  return static_cast<std::size_t>(q + 1 + (r < cutoff ? b - 1 : b));
}

std::string GolombCode::codeword(std::uint64_t k) const {
  BitWriter w;
  encode(w, k);
  const std::size_t n = w.bit_count();
  const auto bytes = std::move(w).finish();
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out.push_back((bytes[i / 8] >> (7 - i % 8)) & 1u ? '1' : '0');
  return out;
}

double geometric_entropy(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric_entropy: p must lie in (0, 1]");
  if (p == 1.0) return 0.0;
  return -std::log2(p) - (1.0 - p) / p * std::log2(1.0 - p);
}

GolombCode golomb_for_lattice(const Lattice& lat) {
  return GolombCode::for_probability(std::min(1.0, packing_density(lat)));
}

int coordinate_width(std::uint32_t coord_bound) {
  return ceil_log2(2 * static_cast<std::uint64_t>(coord_bound) + 1);
}

std::uint32_t coordinate_bound(std::span<const Description> descriptions) {
  std::int64_t bound = 0;
  for (const auto& d : descriptions) {
    if (d.coords.size() > 0) bound = std::max(bound, d.coords.cwiseAbs().maxCoeff());
  }
  if (bound > 0x7fffffff) throw std::invalid_argument("lattice coordinates exceed the 32-bit bound");
  return static_cast<std::uint32_t>(bound);
}

namespace {

class ByteWriter {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  std::vector<std::uint8_t> take() && { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CorruptStreamError("unexpected end of data");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

constexpr char kStreamMagic[4] = {'R', 'S', 'Q', '1'};
constexpr char kVectorMagic[4] = {'V', 'Q', 'F', '1'};

}  // namespace

std::vector<std::uint8_t> encode_header(const StreamHeader& h) {
  if (h.lattice_id.size() > 0xffff) throw std::invalid_argument("lattice id too long");
  ByteWriter w;
  w.bytes(kStreamMagic, 4);
  w.u8(h.version);
  w.u32(h.n);
  w.u16(static_cast<std::uint16_t>(h.lattice_id.size()));
  w.bytes(h.lattice_id.data(), h.lattice_id.size());
  w.f64(h.scale);
  w.f64(h.parameter);
  w.u8(static_cast<std::uint8_t>(h.mode));
  w.u64(h.seed);
  w.u64(h.count);
  w.u32(h.coord_bound);
  return std::move(w).take();
}

StreamHeader decode_header(std::span<const std::uint8_t> bytes, std::size_t* payload_offset) {
  ByteReader r(bytes);
  const auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), kStreamMagic, 4) != 0) throw CorruptStreamError("not an RSQ1 stream (bad magic)");
  StreamHeader h;
  h.version = r.u8();
  if (h.version != StreamHeader::kVersion) {
    throw CorruptStreamError("unsupported RSQ1 version " + std::to_string(h.version));
  }
  h.n = r.u32();
  if (h.n == 0) throw CorruptStreamError("RSQ1 dimension is zero");
  const auto id = r.bytes(r.u16());
  h.lattice_id.assign(id.begin(), id.end());
  h.scale = r.f64();
  h.parameter = r.f64();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw CorruptStreamError("unknown RSQ1 mode " + std::to_string(mode));
  h.mode = static_cast<StreamMode>(mode);
  h.seed = r.u64();
  h.count = r.u64();
  h.coord_bound = r.u32();
  if (h.coord_bound > 0x7fffffffu) throw CorruptStreamError("coordinate bound out of range");
  if (payload_offset) *payload_offset = r.position();
  return h;
}

std::vector<std::uint8_t> encode_stream(const StreamHeader& header, std::span<const Description> descriptions,
                                        const GolombCode& code) {
  if (header.count != descriptions.size()) throw std::invalid_argument("header count does not match descriptions");
  const int width = coordinate_width(header.coord_bound);
  const auto bound = static_cast<std::int64_t>(header.coord_bound);
  BitWriter bits;
  for (const auto& d : descriptions) {
    if (d.coords.size() != static_cast<Eigen::Index>(header.n)) {
      throw std::invalid_argument("description dimension does not match header");
    }
    code.encode(bits, d.index);
    for (Eigen::Index i = 0; i < d.coords.size(); ++i) {
      const std::int64_t c = d.coords[i];
      if (c < -bound || c > bound) {
        throw std::out_of_range("coordinate " + std::to_string(c) + " outside [-B, B] with B = " +
                                std::to_string(bound));
      }
      bits.put_bits(static_cast<std::uint64_t>(c + bound), width);
    }
  }
  std::vector<std::uint8_t> out = encode_header(header);
  const auto payload = std::move(bits).finish();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<Description> decode_payload(const StreamHeader& header, std::span<const std::uint8_t> payload,
                                        const GolombCode& code) {
  const int width = coordinate_width(header.coord_bound);
  const auto bound = static_cast<std::int64_t>(header.coord_bound);
  // Each description takes at least one bit.
  if (header.count > payload.size() * 8) throw CorruptStreamError("payload shorter than the declared count");
  BitReader bits(payload);
  std::vector<Description> out;
  out.reserve(header.count);
  for (std::uint64_t v = 0; v < header.count; ++v) {
    Description d;
    d.index = code.decode(bits);
    d.coords.resize(header.n);
    for (std::uint32_t i = 0; i < header.n; ++i) {
      const std::uint64_t raw = bits.get_bits(width);
      if (raw > 2 * static_cast<std::uint64_t>(bound)) throw CorruptStreamError("coordinate exceeds bound");
      d.coords[i] = static_cast<std::int64_t>(raw) - bound;
    }
    out.push_back(std::move(d));
  }
  if (bits.remaining() >= 8) throw CorruptStreamError("trailing bytes after payload");
  while (bits.remaining() > 0) {
    if (bits.get()) throw CorruptStreamError("nonzero padding bits");
  }
  return out;
}

DecodedStream decode_stream(std::span<const std::uint8_t> bytes, const GolombCode& code) {
  std::size_t offset = 0;
  StreamHeader header = decode_header(bytes, &offset);
  auto descriptions = decode_payload(header, bytes.subspan(offset), code);
  return {std::move(header), std::move(descriptions)};
}

std::vector<std::uint8_t> encode_vqf1(const Eigen::MatrixXd& vectors) {
  ByteWriter w;
  w.bytes(kVectorMagic, 4);
  w.u32(static_cast<std::uint32_t>(vectors.rows()));
  w.u64(static_cast<std::uint64_t>(vectors.cols()));
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) w.f64(vectors(r, c));
  }
  return std::move(w).take();
}

Eigen::MatrixXd decode_vqf1(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), kVectorMagic, 4) != 0) throw CorruptStreamError("not a VQF1 file (bad magic)");
  const std::uint32_t dim = r.u32();
  const std::uint64_t count = r.u64();
  if (dim == 0) throw CorruptStreamError("VQF1 dimension is zero");
  if (count > r.remaining() / 8 / dim || r.remaining() != count * dim * 8) {
    throw CorruptStreamError("VQF1 payload size does not match header");
  }
  Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, c) = r.f64();
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace rsuq
