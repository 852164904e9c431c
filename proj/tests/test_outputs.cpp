#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include <drr/bench.hpp>
#include <drr/image_io.hpp>
#include <drr/report_io.hpp>

#include "fixtures.hpp"

using namespace drr;
using drr::testing::TempDir;

namespace {

Image ramp(int h, int w) {
  Image img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = 0.5 * static_cast<double>(i) - 1.0;
  return img;
}

std::uint16_t sample(const std::string& pgm, std::size_t header, std::size_t i) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(pgm[header + 2 * i]) << 8 |
                                    static_cast<unsigned char>(pgm[header + 2 * i + 1]));
}

}  // namespace

TEST(Pgm, HeaderAndScaling) {
  const auto img = ramp(2, 3);
  const auto pgm = encode_pgm16(img);
  const std::string header = "P5\n3 2\n65535\n";
  ASSERT_EQ(pgm.substr(0, header.size()), header);
  ASSERT_EQ(pgm.size(), header.size() + 12);
  EXPECT_EQ(sample(pgm, header.size(), 0), 0);
  EXPECT_EQ(sample(pgm, header.size(), 5), 65535);
  EXPECT_EQ(sample(pgm, header.size(), 1), 13107);  // 1/5 of full scale
}

TEST(Pgm, ConstantAndNonFiniteMapToZero) {
  Image img(1, 3);
  img.pixels = {2, 2, 2};
  const auto flat = encode_pgm16(img);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(sample(flat, flat.size() - 6, i), 0);
  img.pixels = {0, std::numeric_limits<double>::quiet_NaN(), 4};
  const auto nan = encode_pgm16(img);
  EXPECT_EQ(sample(nan, nan.size() - 6, 1), 0);
  EXPECT_EQ(sample(nan, nan.size() - 6, 2), 65535);
}

TEST(ImageF64, RoundTripIsExact) {
  TempDir dir("img");
  std::mt19937_64 rng(67);
  Image img(7, 5);
  for (auto& p : img.pixels) p = drr::testing::uniform(rng, -1e6, 1e6);
  img.pixels[3] = -0.0;
  img.pixels[4] = std::numeric_limits<double>::denorm_min();
  write_image_f64(img, dir / "a.f64");
  const auto back = read_image_f64(dir / "a.f64");
  EXPECT_EQ(back.height, 7);
  EXPECT_EQ(back.width, 5);
  EXPECT_EQ(std::memcmp(back.pixels.data(), img.pixels.data(), 8 * img.size()), 0);
  const auto side = nlohmann::json::parse(detail::read_file(dir / "a.f64.json"));
  EXPECT_EQ(side["height"], 7);
  EXPECT_EQ(side["width"], 5);
  EXPECT_EQ(side["dtype"], "f64");
}

TEST(ImageF64, PayloadSizeMismatchIsCorrupt) {
  TempDir dir("img");
  write_image_f64(ramp(2, 2), dir / "a.f64");
  detail::write_file(dir / "a.f64", std::string(24, '\0'));
  EXPECT_THROW(read_image_f64(dir / "a.f64"), CorruptFile);
  EXPECT_THROW(read_image_f64(dir / "missing.f64"), IoError);
}

TEST(Trace, JsonLines) {
  RegistrationTrace t;
  t.entries.push_back({0, {1, 2, 3, 4, 5, 6}, -0.5});
  t.entries.push_back({1, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, -0.9991});
  const auto text = encode_trace(t);
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["iter"], n);
    EXPECT_EQ(j["pose"].size(), 6u);
    EXPECT_EQ(j["pose"][0].get<double>(), t.entries[n].pose[0]);
    EXPECT_EQ(j["loss"].get<double>(), t.entries[n].loss);
    ++n;
  }
  EXPECT_EQ(n, 2);
  EXPECT_EQ(text.substr(0, text.find('\n')), R"({"iter":0,"pose":[1.0,2.0,3.0,4.0,5.0,6.0],"loss":-0.5})");
}

TEST(LandscapeCsv, OneAxis) {
  Landscape land{{{kShiftX, 1.0, 3}}, {}, LossKind::neg_zncc, {-0.5, -1.0, std::numeric_limits<double>::infinity()}};
  EXPECT_EQ(encode_landscape_csv(land), "bx,-1,0,1\nloss,-0.5,-1,inf\n");
}

TEST(LandscapeCsv, TwoAxes) {
  Landscape land{{{kTheta, 0.5, 3}, {kGamma, 0.25, 3}}, {}, LossKind::l2, {}};
  for (int k = 0; k < 9; ++k) land.values.push_back(k);
  EXPECT_EQ(encode_landscape_csv(land),
            "theta\\gamma,-0.5,0,0.5\n"
            "-0.25,0,1,2\n"
            "0,3,4,5\n"
            "0.25,6,7,8\n");
}

TEST(FormatReal, RoundTrips) {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 1000; ++t) {
    const double v = drr::testing::uniform(rng, -1e3, 1e3) * std::pow(10.0, drr::testing::uniform(rng, -20, 20));
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
  EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_real(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Bench, SummaryStatistics) {
  const auto t = summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(t.mean_ms, 2.5);
  EXPECT_NEAR(t.stdev_ms, std::sqrt(5.0 / 3.0), 1e-12);  // sample (n - 1) deviation
}

TEST(Bench, TimesARender) {
  const auto v = make_phantom(PhantomKind::sphere, {8, 8, 8}, {1, 1, 1}, 1.0);
  const auto t = time_render(v, {20, 0, 1.5, 0, {}}, DetectorSpec::centered_on(v, 8, 8, 1.0), 3);
  EXPECT_GT(t.mean_ms, 0.0);
  EXPECT_GE(t.stdev_ms, 0.0);
}
