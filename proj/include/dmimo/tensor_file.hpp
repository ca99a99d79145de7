// SPDX-License-Identifier: Apache-2.0
//
// dmimo-channel: spatially consistent D-MIMO channel simulation for industrial halls
// Copyright (C) 2026 The dmimo-channel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef DMIMO_TENSOR_FILE_HPP
#define DMIMO_TENSOR_FILE_HPP

#include "dmimo/synthesis.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>

namespace dmimo
{

// Layout (little-endian):
//   "DMCH" | u16 version | u32 M | u32 T | u32 F | M*T*F * (f32 re, f32 im) | u64 CRC-64/XZ of payload
inline constexpr char kTensorMagic[4] = {'D', 'M', 'C', 'H'};
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::size_t kTensorHeaderBytes = 4 + 2 + 3 * 4;

// Bad magic, unknown version, wrong length or checksum mismatch.
class TensorCorruptError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// File cannot be opened, written or renamed.
class TensorIoError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

std::uint64_t crc64(std::span<const unsigned char> bytes);

// Checksum of the serialized payload of `tensor`.
std::uint64_t tensor_checksum(const ChannelTensor &tensor);

void write_tensor(std::ostream &out, const ChannelTensor &tensor);
ChannelTensor read_tensor(std::istream &in);

// Writes to a temporary file next to `path` and renames it into place.
void write_tensor(const std::filesystem::path &path, const ChannelTensor &tensor);
ChannelTensor read_tensor(const std::filesystem::path &path);

// Atomic replacement of a text file.
void write_text_atomic(const std::filesystem::path &path, const std::string &content);

} // namespace dmimo

#endif
