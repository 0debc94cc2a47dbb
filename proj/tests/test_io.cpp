// Copyright 2026 The TriCal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cstring>

#include "support.hpp"
#include "trical/io.hpp"

using namespace trical;
using namespace trical::testing;

namespace {

PointCloud float_cloud(Rng& rng, std::size_t n) {
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = random_vec(rng, 80.0);
    pc.points.emplace_back(static_cast<float>(p.x()), static_cast<float>(p.y()), static_cast<float>(p.z()));
  }
  return pc;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("point cloud round trips through both formats") {
  Rng rng = rng_for(30);
  const PointCloud pc = float_cloud(rng, 1000);
  const auto dir = scratch_dir("io_cloud");
  for (const char* name : {"a.bin", "a.xyz"}) {
    io::save_point_cloud(dir / name, pc);
    const PointCloud back = io::load_point_cloud(dir / name);
    REQUIRE(back.size() == pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i) CHECK(back.points[i] == pc.points[i]);
  }
}

TEST_CASE("binary cloud layout is little-endian float32 triples") {
  PointCloud pc{{Vec3(1.0, -2.0, 0.5)}, "lidar"};
  const std::string bytes = io::encode_point_cloud_bin(pc);
  REQUIRE(bytes.size() == 12);
  const unsigned char one[4] = {0x00, 0x00, 0x80, 0x3f};
  CHECK(std::memcmp(bytes.data(), one, 4) == 0);
}

TEST_CASE("truncated binary cloud reports the offset") {
  Rng rng = rng_for(31);
  std::string bytes = io::encode_point_cloud_bin(float_cloud(rng, 10));
  bytes.resize(bytes.size() - 5);
  const std::string msg = error_of([&] { io::parse_point_cloud_bin(bytes); });
  CHECK(msg == "truncated point record at byte offset 108");
}

TEST_CASE("malformed xyz line reports the offset") {
  const std::string msg = error_of([] { io::parse_point_cloud_xyz("1 2 3\n4 5\n"); });
  CHECK(msg == "malformed point record at byte offset 6");
}

TEST_CASE("events round trip and reject decreasing timestamps") {
  const auto dir = scratch_dir("io_events");
  EventStream es{{{1, 2, 3, 1}, {1, 0, 0, -1}, {7, 5, 1, 1}}, 0, 0};
  io::save_events(dir / "e.csv", es);
  const EventStream back = io::load_events(dir / "e.csv");
  REQUIRE(back.events.size() == 3);
  CHECK(back.events[2].t == 7);
  CHECK(back.events[1].polarity == -1);

  const std::string msg = error_of([] { io::parse_events_csv("t_us,x,y,polarity\n5,0,0,1\n4,0,0,1\n"); });
  CHECK(msg.starts_with("non-monotone timestamps"));
  CHECK(msg.find("offset 26") != std::string::npos);
}

TEST_CASE("missing files are I/O errors that name the path") {
  try {
    io::load_point_cloud("/nonexistent/cloud.bin");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("/nonexistent/cloud.bin") != std::string::npos);
  }
}

TEST_CASE("PPM round trip at 8 bits") {
  Image img(3, 2, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = static_cast<double>(i * 13 % 256) / 255.0;
  const Image back = io::decode_ppm(io::encode_ppm(img));
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(back.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-15));
  CHECK(io::encode_ppm(img).starts_with("P6\n3 2\n255\n"));
}

TEST_CASE("depth PGM quantization") {
  DepthMap d(1, 1, 3);
  d.at(0, 0, 0) = 0.0;
  d.at(0, 0, 1) = 40.0;
  d.at(0, 0, 2) = 80.0;
  const std::string bytes = io::encode_depth_pgm(d, 80.0);
  const std::string header = "P5\n3 1\n65535\n";
  REQUIRE(bytes.size() == header.size() + 6);
  auto px = [&](int i) {
    return (static_cast<unsigned char>(bytes[header.size() + 2 * i]) << 8) |
           static_cast<unsigned char>(bytes[header.size() + 2 * i + 1]);
  };
  CHECK(px(0) == 0);
  CHECK(px(1) == 32768);
  CHECK(px(2) == 65535);
}

TEST_CASE("key=value parsing") {
  const auto kv = io::parse_key_values("# comment\na = 1\n\nb=two # trailing\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two");
  CHECK_THROWS_AS(io::parse_key_values("a=1\na=2\n"), Error);
  CHECK_THROWS_AS(io::parse_key_values("novalue\n"), Error);
}

TEST_CASE("crc32 check value") {
  CHECK(io::crc32("123456789") == 0xCBF43926u);
  CHECK(io::crc32("") == 0u);
}
