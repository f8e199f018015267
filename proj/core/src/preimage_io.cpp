#include "wifield/preimage_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "json_util.hpp"
#include "wifield/error.hpp"

namespace wifield {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

class Reader {
public:
  Reader(const std::string& bytes, const char* what) : bytes_(bytes), what_(what) {}

  void expect_magic(const char* magic) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
      throw ConfigError(std::string(what_) + ": bad magic, expected " + magic);
    }
    pos_ += 4;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) {
      throw ConfigError(std::string(what_) + ": trailing bytes");
    }
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw ConfigError(std::string(what_) + ": truncated file");
    }
  }
  const std::string& bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_preimage(const PreImage& img) {
  if (img.n_tone < 1 || img.n < 1 ||
      img.data.size() != static_cast<std::size_t>(img.n_tone) * static_cast<std::size_t>(img.n) * static_cast<std::size_t>(img.n)) {
    throw ConfigError("preimage: inconsistent dimensions");
  }
  std::string out = "WFLD";
  out.reserve(16 + img.data.size() * 16);
  put_u32(out, kPreImageVersion);
  put_u32(out, static_cast<std::uint32_t>(img.n_tone));
  put_u32(out, static_cast<std::uint32_t>(img.n));
  for (cplx v : img.data) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericError("preimage: non-finite entry");
    }
    put_f64(out, v.real());
    put_f64(out, v.imag());
  }
  return out;
}

PreImage decode_preimage(const std::string& bytes) {
  Reader r(bytes, "preimage");
  r.expect_magic("WFLD");
  const std::uint32_t version = r.u32();
  if (version != kPreImageVersion) {
    throw ConfigError("preimage: unsupported version " + std::to_string(version));
  }
  PreImage img;
  img.n_tone = static_cast<int>(r.u32());
  img.n = static_cast<int>(r.u32());
  if (img.n_tone < 1 || img.n < 1) {
    throw ConfigError("preimage: empty dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(img.n_tone) * static_cast<std::size_t>(img.n) * static_cast<std::size_t>(img.n);
  if (r.remaining() != count * 16) {
    throw ConfigError("preimage: payload size does not match the header");
  }
  img.data.resize(count);
  for (cplx& v : img.data) {
    const double re = r.f64();
    const double im = r.f64();
    v = {re, im};
  }
  r.expect_end();
  return img;
}

void write_preimage(const PreImage& img, const std::filesystem::path& path) {
  detail::write_text_file(path, encode_preimage(img));
}

PreImage read_preimage(const std::filesystem::path& path) { return decode_preimage(detail::read_text_file(path)); }

std::string encode_labels(const LabelGrid& labels) {
  if (labels.n < 1 || labels.labels.size() != static_cast<std::size_t>(labels.n) * static_cast<std::size_t>(labels.n)) {
    throw ConfigError("labels: inconsistent dimensions");
  }
  std::string out = "WLBL";
  put_u32(out, static_cast<std::uint32_t>(labels.n));
  out.append(labels.labels.begin(), labels.labels.end());
  return out;
}

LabelGrid decode_labels(const std::string& bytes) {
  Reader r(bytes, "labels");
  r.expect_magic("WLBL");
  LabelGrid g;
  g.n = static_cast<int>(r.u32());
  if (g.n < 1) {
    throw ConfigError("labels: empty grid");
  }
  const std::size_t count = static_cast<std::size_t>(g.n) * static_cast<std::size_t>(g.n);
  if (r.remaining() != count) {
    throw ConfigError("labels: payload size does not match the header");
  }
  g.labels.resize(count);
  for (auto& v : g.labels) {
    v = r.u8();
  }
  r.expect_end();
  return g;
}

void write_labels(const LabelGrid& labels, const std::filesystem::path& path) {
  detail::write_text_file(path, encode_labels(labels));
}

LabelGrid read_labels(const std::filesystem::path& path) { return decode_labels(detail::read_text_file(path)); }

}  // namespace wifield
