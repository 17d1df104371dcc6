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

#include "smce/checkpoint.hpp"

#include <algorithm>

#include "bytes.hpp"
#include "smce/error.hpp"

namespace smce {

std::vector<std::uint8_t> encode_checkpoint(const Classifier& model) {
  detail::ByteWriter w;
  w.raw("SMCE");
  w.u8(kCheckpointVersion);
  const std::string desc = model.architecture().encode();
  w.u32(static_cast<std::uint32_t>(desc.size()));
  w.raw(desc);
  const auto& norm = model.normalization();
  w.u32(static_cast<std::uint32_t>(norm.mean.size()));
  w.f32s(norm.mean);
  w.f32s(norm.stddev);
  const auto params = model.parameters();
  w.u64(params.size());
  w.f32s(params);
  const std::uint32_t crc = detail::crc32_of(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

Classifier decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 9) throw DataError("checkpoint: file too short");
  detail::ByteReader r(bytes, "checkpoint");
  if (r.raw(4) != "SMCE") throw DataError("checkpoint: bad magic");
  const std::uint8_t version = r.u8();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t desc_len = r.u32();
  if (desc_len > r.remaining()) throw DataError("checkpoint: unexpected end of data (truncated?)");
  Architecture arch;
  try {
    arch = Architecture::decode(r.raw(desc_len));
  } catch (const InputError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  const std::uint32_t channels = r.u32();
  if (channels != static_cast<std::uint32_t>(arch.input.channels)) {
    throw DataError("checkpoint: normalization channel count mismatch");
  }
  Normalization norm{std::vector<float>(channels), std::vector<float>(channels)};
  r.f32s(norm.mean);
  r.f32s(norm.stddev);
  const std::uint64_t count = r.u64();
  if (count != arch.parameter_count()) {
    throw DataError("checkpoint: parameter count does not match the architecture");
  }
  if (r.remaining() != count * 4 + 4) {
    throw DataError("checkpoint: payload length mismatch (truncated?)");
  }
  Classifier model(std::move(arch), std::move(norm));
  r.f32s(model.parameters());
  const std::size_t body = r.position();
  const std::uint32_t stored = r.u32();
  if (stored != detail::crc32_of(bytes.first(body))) {
    throw DataError("checkpoint: checksum mismatch");
  }
  return model;
}

void save_checkpoint(const Classifier& model, const std::filesystem::path& path) {
  detail::write_file(path, encode_checkpoint(model));
}

Classifier load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

}  // namespace smce
