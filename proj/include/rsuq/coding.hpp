#ifndef RSUQ_CODING_HPP_
#define RSUQ_CODING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsuq/lattice.hpp"
#include "rsuq/rsuq.hpp"

namespace rsuq {

/// Malformed, truncated or otherwise undecodable input.
class CorruptStreamError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// MSB-first bit packer.
class BitWriter {
 public:
  void put(bool bit);
  /// Writes the low `width` bits of value, most significant first.
  void put_bits(std::uint64_t value, int width);
  std::size_t bit_count() const { return bits_; }
  /// Pads the final byte with zeros and returns the buffer.
  std::vector<std::uint8_t> finish() &&;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  bool get();
  std::uint64_t get_bits(int width);
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() * 8 - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// Golomb code for K ~ Geom(p) on {1, 2, ...}: unary quotient
/// floor((k-1)/m) as ones closed by a zero, then the remainder in truncated
/// binary.
class GolombCode {
 public:
  /// Optimal parameter: the m with
  /// (1-p)^m + (1-p)^(m+1) <= 1 < (1-p)^(m-1) + (1-p)^m.
  static GolombCode for_probability(double p);
  static GolombCode with_parameter(std::uint64_t m);

  std::uint64_t parameter() const { return m_; }
  double probability() const { return p_; }

  void encode(BitWriter& out, std::uint64_t k) const;
  std::uint64_t decode(BitReader& in) const;
  std::size_t length(std::uint64_t k) const;
  /// Codeword as a '0'/'1' string.
  std::string codeword(std::uint64_t k) const;

 private:
  GolombCode(double p, std::uint64_t m) : p_(p), m_(m) {}
  double p_;
  std::uint64_t m_;
};

/// Entropy of Geom(p) in bits: -log p - ((1-p)/p) log(1-p).
double geometric_entropy(double p);

/// Golomb code matched to the per-dither acceptance probability, which is
/// the packing density for both ball RSUQ and Gaussian LRSUQ.
GolombCode golomb_for_lattice(const Lattice& lat);

enum class StreamMode : std::uint8_t { RsuqBall = 0, LrsuqGaussian = 1 };

/// RSQ1 container header. Fields are serialized in declaration order, all
/// multi-byte values little-endian; lattice_id carries a u16 length prefix.
struct StreamHeader {
  static constexpr std::uint8_t kVersion = 1;

  std::uint8_t version = kVersion;
  std::uint32_t n = 0;
  std::string lattice_id;
  double scale = 1.0;
  /// Ball radius for RsuqBall; noise standard deviation for LrsuqGaussian.
  double parameter = 1.0;
  StreamMode mode = StreamMode::RsuqBall;
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  /// Every integer coordinate of M lies in [-coord_bound, coord_bound].
  std::uint32_t coord_bound = 0;

  bool operator==(const StreamHeader&) const = default;
};

/// Bits per coordinate: ceil(log2(2B + 1)).
int coordinate_width(std::uint32_t coord_bound);

/// Smallest B covering every coordinate of the descriptions.
std::uint32_t coordinate_bound(std::span<const Description> descriptions);

std::vector<std::uint8_t> encode_header(const StreamHeader& header);
/// Parses the header and reports where the payload begins.
StreamHeader decode_header(std::span<const std::uint8_t> bytes, std::size_t* payload_offset);

/// Header followed by the payload: per description Golomb(K) then n
/// offset-binary coordinates (value + B). Padding only at the very end.
std::vector<std::uint8_t> encode_stream(const StreamHeader& header, std::span<const Description> descriptions,
                                        const GolombCode& code);

std::vector<Description> decode_payload(const StreamHeader& header, std::span<const std::uint8_t> payload,
                                        const GolombCode& code);

struct DecodedStream {
  StreamHeader header;
  std::vector<Description> descriptions;
};

DecodedStream decode_stream(std::span<const std::uint8_t> bytes, const GolombCode& code);

/// VQF1 vector file: "VQF1", u32 dim, u64 count, then count·dim f64, all
/// little-endian. Vectors are the columns of the matrix.
std::vector<std::uint8_t> encode_vqf1(const Eigen::MatrixXd& vectors);
Eigen::MatrixXd decode_vqf1(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace rsuq

#endif  // RSUQ_CODING_HPP_
