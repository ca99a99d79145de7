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

#include "dmimo/tensor_file.hpp"

#include <boost/crc.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace dmimo
{
namespace
{
using Crc64 = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL, true, true>;

template <typename U> void put_le(unsigned char *p, U v)
{
    for (std::size_t i = 0; i < sizeof(U); ++i)
        p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
}

template <typename U> U get_le(const unsigned char *p)
{
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        v |= static_cast<U>(p[i]) << (8 * i);
    return v;
}

// Serializes `count` complex values starting at `src` into little-endian bytes.
void encode(const std::complex<float> *src, std::size_t count, unsigned char *dst)
{
    for (std::size_t i = 0; i < count; ++i)
    {
        put_le(dst + 8 * i, std::bit_cast<std::uint32_t>(src[i].real()));
        put_le(dst + 8 * i + 4, std::bit_cast<std::uint32_t>(src[i].imag()));
    }
}

constexpr std::size_t kChunk = 1 << 16; // complex values per I/O chunk
} // namespace

std::uint64_t crc64(std::span<const unsigned char> bytes)
{
    Crc64 crc;
    crc.process_bytes(bytes.data(), bytes.size());
    return crc.checksum();
}

std::uint64_t tensor_checksum(const ChannelTensor &t)
{
    Crc64 crc;
    std::vector<unsigned char> buf(8 * kChunk);
    for (std::size_t off = 0; off < t.data.size(); off += kChunk)
    {
        const std::size_t n = std::min(kChunk, t.data.size() - off);
        encode(t.data.data() + off, n, buf.data());
        crc.process_bytes(buf.data(), 8 * n);
    }
    return crc.checksum();
}

void write_tensor(std::ostream &out, const ChannelTensor &t)
{
    if (t.M > UINT32_MAX || t.T > UINT32_MAX || t.F > UINT32_MAX)
        throw std::invalid_argument("write_tensor: dimension exceeds 32 bits");
    if (t.data.size() != t.M * t.T * t.F)
        throw std::invalid_argument("write_tensor: data size does not match dimensions");
    std::array<unsigned char, kTensorHeaderBytes> hdr{};
    std::memcpy(hdr.data(), kTensorMagic, 4);
    put_le<std::uint16_t>(hdr.data() + 4, kTensorVersion);
    put_le<std::uint32_t>(hdr.data() + 6, static_cast<std::uint32_t>(t.M));
    put_le<std::uint32_t>(hdr.data() + 10, static_cast<std::uint32_t>(t.T));
    put_le<std::uint32_t>(hdr.data() + 14, static_cast<std::uint32_t>(t.F));
    out.write(reinterpret_cast<const char *>(hdr.data()), hdr.size());

    Crc64 crc;
    std::vector<unsigned char> buf(8 * kChunk);
    for (std::size_t off = 0; off < t.data.size(); off += kChunk)
    {
        const std::size_t n = std::min(kChunk, t.data.size() - off);
        encode(t.data.data() + off, n, buf.data());
        crc.process_bytes(buf.data(), 8 * n);
        out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(8 * n));
    }
    std::array<unsigned char, 8> tail{};
    put_le<std::uint64_t>(tail.data(), crc.checksum());
    out.write(reinterpret_cast<const char *>(tail.data()), tail.size());
    if (!out)
        throw TensorIoError("write_tensor: stream write failed");
}

ChannelTensor read_tensor(std::istream &in)
{
    std::array<unsigned char, kTensorHeaderBytes> hdr{};
    in.read(reinterpret_cast<char *>(hdr.data()), hdr.size());
    if (in.gcount() != static_cast<std::streamsize>(hdr.size()))
        throw TensorCorruptError("tensor file truncated inside the header");
    if (std::memcmp(hdr.data(), kTensorMagic, 4) != 0)
        throw TensorCorruptError("not a tensor file (bad magic)");
    const auto version = get_le<std::uint16_t>(hdr.data() + 4);
    if (version != kTensorVersion)
        throw TensorCorruptError("unsupported tensor format version " + std::to_string(version));
    const std::size_t M = get_le<std::uint32_t>(hdr.data() + 6);
    const std::size_t T = get_le<std::uint32_t>(hdr.data() + 10);
    const std::size_t F = get_le<std::uint32_t>(hdr.data() + 14);

    ChannelTensor t(M, T, F);
    Crc64 crc;
    std::vector<unsigned char> buf(8 * kChunk);
    for (std::size_t off = 0; off < t.data.size(); off += kChunk)
    {
        const std::size_t n = std::min(kChunk, t.data.size() - off);
        in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(8 * n));
        if (in.gcount() != static_cast<std::streamsize>(8 * n))
            throw TensorCorruptError("tensor file truncated inside the payload");
        crc.process_bytes(buf.data(), 8 * n);
        for (std::size_t i = 0; i < n; ++i)
            t.data[off + i] = {std::bit_cast<float>(get_le<std::uint32_t>(buf.data() + 8 * i)),
                               std::bit_cast<float>(get_le<std::uint32_t>(buf.data() + 8 * i + 4))};
    }
    std::array<unsigned char, 8> tail{};
    in.read(reinterpret_cast<char *>(tail.data()), tail.size());
    if (in.gcount() != 8)
        throw TensorCorruptError("tensor file truncated before the checksum");
    if (get_le<std::uint64_t>(tail.data()) != crc.checksum())
        throw TensorCorruptError("tensor checksum mismatch");
    if (in.peek() != std::char_traits<char>::eof())
        throw TensorCorruptError("trailing bytes after the tensor checksum");
    return t;
}

namespace
{
std::filesystem::path temp_sibling(const std::filesystem::path &path)
{
    auto tmp = path;
    tmp += ".tmp";
    return tmp;
}

void commit(const std::filesystem::path &tmp, const std::filesystem::path &path)
{
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
    {
        std::filesystem::remove(tmp, ec);
        throw TensorIoError("cannot move " + tmp.string() + " to " + path.string());
    }
}
} // namespace

void write_tensor(const std::filesystem::path &path, const ChannelTensor &tensor)
{
    const auto tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw TensorIoError("cannot open " + tmp.string() + " for writing");
        write_tensor(out, tensor);
        out.close();
        if (!out)
            throw TensorIoError("write to " + tmp.string() + " failed");
    }
    commit(tmp, path);
}

ChannelTensor read_tensor(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw TensorIoError("cannot open " + path.string());
    return read_tensor(in);
}

void write_text_atomic(const std::filesystem::path &path, const std::string &content)
{
    const auto tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw TensorIoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.close();
        if (!out)
            throw TensorIoError("write to " + tmp.string() + " failed");
    }
    commit(tmp, path);
}

} // namespace dmimo
