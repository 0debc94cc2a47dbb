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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "trical/dataset.hpp"

namespace trical::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

// Point clouds: `.bin` is little-endian float32 xyz triples with no header,
// `.xyz` is one "x y z" line per point. Format is chosen by extension.
PointCloud load_point_cloud(const fs::path& path);
void save_point_cloud(const fs::path& path, const PointCloud& pc);
PointCloud parse_point_cloud_bin(const std::string& bytes);
PointCloud parse_point_cloud_xyz(const std::string& text);
std::string encode_point_cloud_bin(const PointCloud& pc);

// Events: CSV `t_us,x,y,polarity`, optional header line.
EventStream load_events(const fs::path& path);
void save_events(const fs::path& path, const EventStream& es);
EventStream parse_events_csv(const std::string& text);

// 8-bit PPM (P6) for 3-channel images in [0, 1]; 16-bit PGM (P5) for single-channel.
std::string encode_ppm(const Image& rgb);
Image decode_ppm(const std::string& bytes);
std::string encode_pgm16(const std::vector<std::uint16_t>& values, int width, int height);
/// Depth quantized as round(z / z_max * 65535), clamped.
std::string encode_depth_pgm(const DepthMap& depth, double z_max);
/// Multi-page 16-bit PGM: one page per channel, each linearly rescaled to its own range.
std::string encode_pgm_pages(const Grid& grid);

/// Flat `key=value` text; '#' starts a comment. Throws on malformed lines or duplicates.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// CRC-32 (zlib polynomial).
std::uint32_t crc32(const std::string& bytes);

}  // namespace trical::io
