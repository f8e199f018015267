#include <doctest.h>

#include <filesystem>

#include "wifield/error.hpp"
#include "wifield/preimage_io.hpp"

using namespace wifield;

namespace {

PreImage sample_image() {
  PreImage img;
  img.n_tone = 2;
  img.n = 3;
  for (int i = 0; i < 18; ++i) {
    img.data.push_back({0.125 * i, -1.0 / (i + 1)});
  }
  return img;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("pre-image byte layout and round trip") {
    const PreImage img = sample_image();
    const std::string bytes = encode_preimage(img);
    CHECK(bytes.size() == 16 + 18 * 16);
    CHECK(bytes.substr(0, 4) == "WFLD");
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);
    CHECK(static_cast<unsigned char>(bytes[12]) == 3);
    // 0.125 as little-endian float64 at the value of tone 0, row 0, col 1.
    CHECK(static_cast<unsigned char>(bytes[16 + 16 + 7]) == 0x3f);
    CHECK(static_cast<unsigned char>(bytes[16 + 16 + 6]) == 0xc0);
    const PreImage back = decode_preimage(bytes);
    CHECK(back.n_tone == 2);
    CHECK(back.n == 3);
    CHECK(back.data == img.data);
    CHECK(back.at(1, 2, 0) == img.at(1, 2, 0));
  }

  TEST_CASE("label round trip") {
    LabelGrid l{4, {0, 1, 2, 3, 0, 0, 1, 1, 2, 2, 3, 3, 0, 0, 0, 1}};
    const std::string bytes = encode_labels(l);
    CHECK(bytes.size() == 8 + 16);
    CHECK(bytes.substr(0, 4) == "WLBL");
    const LabelGrid back = decode_labels(bytes);
    CHECK(back.n == 4);
    CHECK(back.labels == l.labels);
  }

  TEST_CASE("file round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "wifield_io_test";
    std::filesystem::create_directories(dir);
    write_preimage(sample_image(), dir / "a.wfld");
    CHECK(read_preimage(dir / "a.wfld").data == sample_image().data);
    write_labels({2, {0, 3, 1, 2}}, dir / "a.wlbl");
    CHECK(read_labels(dir / "a.wlbl").labels == std::vector<std::uint8_t>{0, 3, 1, 2});
    CHECK_THROWS_AS(read_preimage(dir / "missing.wfld"), ConfigError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("malformed input is rejected") {
    std::string bytes = encode_preimage(sample_image());
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_preimage(bad), ConfigError);
    CHECK_THROWS_AS(decode_preimage(bytes + "z"), ConfigError);
    CHECK_THROWS_AS(decode_preimage(bytes.substr(0, bytes.size() - 1)), ConfigError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(decode_preimage(bad), ConfigError);
    const std::string lb = encode_labels({2, {0, 1, 2, 3}});
    CHECK_THROWS_AS(decode_labels(lb + "x"), ConfigError);
    CHECK_THROWS_AS(decode_labels("WLBL"), ConfigError);
    PreImage wrong = sample_image();
    wrong.data.pop_back();
    CHECK_THROWS_AS(encode_preimage(wrong), ConfigError);
  }
}
