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

#include "trical/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace trical::io {
namespace {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

std::string at_offset(std::size_t off) { return " at byte offset " + std::to_string(off); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view sv, T& out) {
  while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
  while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r')) sv.remove_suffix(1);
  if (sv.empty()) return false;
  if (sv.front() == '+') sv.remove_prefix(1);
  const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), out);
  return res.ec == std::errc() && res.ptr == sv.data() + sv.size();
}

// Calls fn(line, byte offset of line start) for each line.
template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    fn(std::string_view(text).substr(pos, end - pos), pos);
    pos = end + 1;
  }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = line.find(sep, pos);
    out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

// PNM header parser: returns the offset of the first raster byte.
std::size_t parse_pnm_header(const std::string& bytes, const char* magic, int& w, int& h, int& maxval) {
  require(bytes.size() >= 2 && bytes.compare(0, 2, magic) == 0, ErrorCode::kParse,
          std::string("expected ") + magic + " header" + at_offset(0));
  std::size_t pos = 2;
  int fields[3];
  for (int& f : fields) {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    require(pos > start && std::from_chars(bytes.data() + start, bytes.data() + pos, f).ec == std::errc(),
            ErrorCode::kParse, "malformed PNM header" + at_offset(start));
  }
  require(pos < bytes.size(), ErrorCode::kParse, "truncated PNM header" + at_offset(pos));
  w = fields[0];
  h = fields[1];
  maxval = fields[2];
  return pos + 1;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

PointCloud parse_point_cloud_bin(const std::string& bytes) {
  constexpr std::size_t kRecord = 3 * sizeof(float);
  PointCloud pc;
  const std::size_t n = bytes.size() / kRecord;
  pc.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    float v[3];
    std::memcpy(v, bytes.data() + i * kRecord, kRecord);
    require(std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]), ErrorCode::kParse,
            "non-finite point" + at_offset(i * kRecord));
    pc.points.emplace_back(v[0], v[1], v[2]);
  }
  require(bytes.size() % kRecord == 0, ErrorCode::kParse, "truncated point record" + at_offset(n * kRecord));
  return pc;
}

std::string encode_point_cloud_bin(const PointCloud& pc) {
  std::string out(pc.size() * 3 * sizeof(float), '\0');
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const float v[3] = {static_cast<float>(pc.points[i].x()), static_cast<float>(pc.points[i].y()),
                        static_cast<float>(pc.points[i].z())};
    std::memcpy(out.data() + i * sizeof(v), v, sizeof(v));
  }
  return out;
}

PointCloud parse_point_cloud_xyz(const std::string& text) {
  PointCloud pc;
  for_each_line(text, [&](std::string_view line, std::size_t off) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') return;
    double v[3];
    require(tok.size() == 3 && parse_number(tok[0], v[0]) && parse_number(tok[1], v[1]) &&
                parse_number(tok[2], v[2]) && std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]),
            ErrorCode::kParse, "malformed point record" + at_offset(off));
    pc.points.emplace_back(v[0], v[1], v[2]);
  });
  return pc;
}

PointCloud load_point_cloud(const fs::path& path) {
  const std::string bytes = read_file(path);
  try {
    PointCloud pc = path.extension() == ".xyz" ? parse_point_cloud_xyz(bytes) : parse_point_cloud_bin(bytes);
    pc.frame = "lidar";
    return pc;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_point_cloud(const fs::path& path, const PointCloud& pc) {
  if (path.extension() == ".xyz") {
    std::string out;
    char buf[96];
    for (const Vec3& p : pc.points) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
      out += buf;
    }
    write_file(path, out);
  } else {
    write_file(path, encode_point_cloud_bin(pc));
  }
}

EventStream parse_events_csv(const std::string& text) {
  EventStream es;
  bool first = true;
  for_each_line(text, [&](std::string_view line, std::size_t off) {
    const std::string s = trim(std::string(line));
    const bool header = first && !s.empty() && std::isalpha(static_cast<unsigned char>(s[0]));
    first = false;
    if (s.empty() || header || s[0] == '#') return;
    const auto f = split(s, ',');
    Event e;
    long long t = 0;
    require(f.size() == 4 && parse_number(f[0], t) && parse_number(f[1], e.x) && parse_number(f[2], e.y) &&
                parse_number(f[3], e.polarity),
            ErrorCode::kParse, "malformed event record" + at_offset(off));
    e.t = t;
    require(e.polarity == 1 || e.polarity == -1, ErrorCode::kParse, "event polarity must be 1 or -1" + at_offset(off));
    require(e.x >= 0 && e.y >= 0, ErrorCode::kParse, "negative event coordinate" + at_offset(off));
    require(es.events.empty() || es.events.back().t <= e.t, ErrorCode::kParse,
            "non-monotone timestamps" + at_offset(off));
    es.events.push_back(e);
  });
  return es;
}

EventStream load_events(const fs::path& path) {
  try {
    return parse_events_csv(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_events(const fs::path& path, const EventStream& es) {
  std::string out = "t_us,x,y,polarity\n";
  for (const Event& e : es.events) {
    out += std::to_string(e.t) + ',' + std::to_string(e.x) + ',' + std::to_string(e.y) + ',' +
           std::to_string(e.polarity) + '\n';
  }
  write_file(path, out);
}

std::string encode_ppm(const Image& rgb) {
  require(rgb.channels() == 3, ErrorCode::kInvalidArgument, "encode_ppm: expected 3 channels");
  std::string out = "P6\n" + std::to_string(rgb.width()) + ' ' + std::to_string(rgb.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + rgb.plane_size() * 3);
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < rgb.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(rgb.at(c, y, x), 0.0, 1.0);
        out[header + (static_cast<std::size_t>(y) * rgb.width() + x) * 3 + c] =
            static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
  return out;
}

Image decode_ppm(const std::string& bytes) {
  int w = 0, h = 0, maxval = 0;
  const std::size_t start = parse_pnm_header(bytes, "P6", w, h, maxval);
  require(maxval == 255, ErrorCode::kParse, "PPM: only 8-bit rasters are supported");
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  require(bytes.size() - start >= need, ErrorCode::kParse, "truncated PPM raster" + at_offset(bytes.size()));
  Image img(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) =
            static_cast<unsigned char>(bytes[start + (static_cast<std::size_t>(y) * w + x) * 3 + c]) / 255.0;
  return img;
}

std::string encode_pgm16(const std::vector<std::uint16_t>& values, int width, int height) {
  require(values.size() == static_cast<std::size_t>(width) * height, ErrorCode::kInvalidArgument,
          "encode_pgm16: size mismatch");
  std::string out = "P5\n" + std::to_string(width) + ' ' + std::to_string(height) + "\n65535\n";
  for (std::uint16_t v : values) {
    out.push_back(static_cast<char>(v >> 8));  // PGM rasters are big-endian
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

std::string encode_depth_pgm(const DepthMap& depth, double z_max) {
  require(depth.channels() == 1 && z_max > 0, ErrorCode::kInvalidArgument, "encode_depth_pgm: bad input");
  std::vector<std::uint16_t> q(depth.plane_size());
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = static_cast<std::uint16_t>(std::clamp(std::round(depth.data()[i] / z_max * 65535.0), 0.0, 65535.0));
  return encode_pgm16(q, depth.width(), depth.height());
}

std::string encode_pgm_pages(const Grid& grid) {
  std::string out;
  for (int c = 0; c < grid.channels(); ++c) {
    const auto plane = grid.plane(c);
    const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
    const double span = (plane.empty() || *hi == *lo) ? 1.0 : *hi - *lo;
    std::vector<std::uint16_t> q(plane.size());
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] = static_cast<std::uint16_t>(std::round((plane[i] - *lo) / span * 65535.0));
    out += encode_pgm16(q, grid.width(), grid.height());
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  for_each_line(text, [&](std::string_view raw, std::size_t off) {
    std::string line(raw);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::kParse, "expected key=value" + at_offset(off));
    const std::string key = trim(line.substr(0, eq));
    require(!kv.contains(key), ErrorCode::kParse, "duplicate key '" + key + "'" + at_offset(off));
    kv[key] = trim(line.substr(eq + 1));
  });
  return kv;
}

std::uint32_t crc32(const std::string& bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace trical::io
