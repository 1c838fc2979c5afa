#include "skyspeed/detection_io.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "skyspeed/error.hpp"

namespace skyspeed {
namespace {

const char* const kHeader =
    R"({"type":"header","fps":30.0,"width":3840,"height":2160,"source_id":"cam"})";

ErrorCode code_of(const std::string& text) {
  try {
    parse_stream(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorCode::Io;
}

std::string read_fixture(const char* name) {
  std::ifstream in(std::string(SKYSPEED_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ParseStream, HeaderOnly) {
  const auto s = parse_stream(std::string(kHeader) + "\n");
  EXPECT_TRUE(s.detections.empty());
  EXPECT_DOUBLE_EQ(s.header.frame_rate, 30.0);
  EXPECT_EQ(s.header.frame_width, 3840);
  EXPECT_EQ(s.header.frame_height, 2160);
  EXPECT_EQ(s.header.source_id, "cam");
}

TEST(ParseStream, GoldenFixture) {
  const std::string text = read_fixture("three_detections.jsonl");
  const auto s = parse_stream(text);
  ASSERT_EQ(s.detections.size(), 3u);
  EXPECT_EQ(s.header.source_id, "golden");
  EXPECT_EQ(s.detections[0].frame_index, 0);
  EXPECT_EQ(s.detections[1].category, Category::HeavyVehicle);
  EXPECT_EQ(s.detections[2].frame_index, 2);
  EXPECT_EQ(s.detections[2].bbox, (BoundingBox{101.75, 190.0, 141.25, 250.5}));
  EXPECT_DOUBLE_EQ(s.detections[0].confidence, 0.93);
  // The fixture was produced by serialize_stream.
  EXPECT_EQ(serialize_stream(s.header, s.detections), text);
}

TEST(ParseStream, InvertedBoxNamesLine) {
  const std::string text = std::string(kHeader) + "\n" +
                           R"({"type":"det","frame":1,"bbox":[10,0,10,5],"category":"car","conf":0.5})";
  try {
    parse_stream(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    ASSERT_TRUE(e.line().has_value());
    EXPECT_EQ(*e.line(), 2u);
  }
}

TEST(ParseStream, ErrorKinds) {
  const std::string h = std::string(kHeader) + "\n";
  EXPECT_EQ(code_of(""), ErrorCode::MissingHeader);
  EXPECT_EQ(code_of(R"({"type":"det","frame":1,"bbox":[0,0,1,1],"category":"car","conf":1})"),
            ErrorCode::MissingHeader);
  EXPECT_EQ(code_of(h + R"({"type":"det","frame":3,"bbox":[0,0,1,1],"category":"car","conf":1})"
                        "\n"
                        R"({"type":"det","frame":2,"bbox":[0,0,1,1],"category":"car","conf":1})"),
            ErrorCode::NonMonotonicFrames);
  EXPECT_EQ(code_of(h + "not json"), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(h + R"({"type":"det","frame":1,"bbox":[0,0,1,1],"category":"bus","conf":1})"),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(h + R"({"type":"det","frame":1.5,"bbox":[0,0,1,1],"category":"car","conf":1})"),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(h + R"({"type":"det","frame":-1,"bbox":[0,0,1,1],"category":"car","conf":1})"),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(h + R"({"type":"det","frame":1,"bbox":[0,0,1,1],"category":"car","conf":1.5})"),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(h + R"({"type":"det","frame":1,"bbox":[0,0,1],"category":"car","conf":1})"),
            ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(h + kHeader), ErrorCode::MalformedRecord);
  EXPECT_EQ(code_of(R"({"type":"header","fps":0,"width":10,"height":10,"source_id":"x"})"),
            ErrorCode::MalformedRecord);
}

TEST(ParseStream, EqualFramesAndBlankLinesAreFine) {
  const std::string text =
      std::string(kHeader) + "\r\n\n" +
      R"({"type":"det","frame":4,"bbox":[0,0,1,1],"category":"car","conf":1})" + "\n" +
      R"({"type":"det","frame":4,"bbox":[5,5,9,9],"category":"heavy","conf":0})" + "\n\n";
  EXPECT_EQ(parse_stream(text).detections.size(), 2u);
}

TEST(ParseStream, ArbitraryBytesOnlyRaiseTypedErrors) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 200);
  const std::string seed_text = read_fixture("three_detections.jsonl");
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text;
    if (trial % 2 == 0) {
      const int n = len(rng);
      for (int i = 0; i < n; ++i) text.push_back(static_cast<char>(byte(rng)));
    } else {
      // Mutate a valid stream.
      text = seed_text;
      for (int k = 0; k < 4; ++k) {
        text[std::uniform_int_distribution<std::size_t>(0, text.size() - 1)(rng)] =
            static_cast<char>(byte(rng));
      }
    }
    try {
      parse_stream(text);
    } catch (const Error& e) {
      EXPECT_TRUE(e.line().has_value() || e.code() == ErrorCode::MissingHeader);
    } catch (...) {
      FAIL() << "untyped exception on trial " << trial;
    }
  }
}

TEST(SerializeStream, Shapes) {
  StreamHeader h{25.0, 1920, 1080, "x"};
  EXPECT_EQ(serialize_stream(h, {}),
            R"({"type":"header","fps":25.0,"width":1920,"height":1080,"source_id":"x"})" "\n");
  const std::vector<Detection> one = {Detection{3, {1, 2, 3, 4}, Category::Car, 0.5}};
  const std::string text = serialize_stream(h, one);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(SerializeStream, RandomRoundTrip) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-1e4, 1e4);
  std::uniform_real_distribution<double> size(1e-6, 500.0);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::uniform_int_distribution<int> step(0, 3);
  DetectionStream s;
  s.header = {29.97, 3840, 2160, "round \"trip\" \xc3\xa9"};
  std::int64_t frame = 0;
  for (int i = 0; i < 1000; ++i) {
    frame += step(rng);
    Detection d;
    d.frame_index = frame;
    d.bbox.x_min = coord(rng);
    d.bbox.y_min = coord(rng);
    d.bbox.x_max = d.bbox.x_min + size(rng);
    d.bbox.y_max = d.bbox.y_min + size(rng);
    d.category = i % 3 == 0 ? Category::HeavyVehicle : Category::Car;
    d.confidence = conf(rng);
    s.detections.push_back(d);
  }
  EXPECT_EQ(parse_stream(serialize_stream(s.header, s.detections)), s);
}

TEST(Centroid, Arithmetic) {
  EXPECT_EQ(centroid(Detection{0, {0, 0, 10, 10}}), (ImagePoint{5, 5}));
  EXPECT_EQ(centroid(Detection{0, {2, 4, 6, 8}}), (ImagePoint{4, 6}));
  EXPECT_EQ(centroid(Detection{0, {0, 0, 1, 3}}), (ImagePoint{0.5, 1.5}));
}

}  // namespace
}  // namespace skyspeed
