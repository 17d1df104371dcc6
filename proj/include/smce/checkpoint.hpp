/*
 *  Copyright 2026 The smce-detect Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "smce/network.hpp"

namespace smce {

// Byte layout (all integers little-endian):
//   "SMCE"                  4 bytes magic
//   version                 u8 (currently 1)
//   descriptor length       u32, followed by the Architecture::encode() text
//   channel count C         u32, then C f32 means and C f32 stddevs
//   parameter count P       u64, then P f32 parameters
//   CRC32                   u32 over every preceding byte
inline constexpr std::uint8_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Classifier& model);
Classifier decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Classifier& model, const std::filesystem::path& path);
Classifier load_checkpoint(const std::filesystem::path& path);

}  // namespace smce
