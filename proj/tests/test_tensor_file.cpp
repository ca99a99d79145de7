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

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dmimo;
namespace fs = std::filesystem;

namespace
{
ChannelTensor sample_tensor()
{
    ChannelTensor t(3, 5, 7);
    for (std::size_t i = 0; i < t.data.size(); ++i)
        t.data[i] = {static_cast<float>(i) * 0.25f, -static_cast<float>(i) * 1e-3f};
    return t;
}

fs::path temp_dir(const std::string &name)
{
    const auto d = fs::temp_directory_path() / ("dmimo_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}
} // namespace

TEST_CASE("CRC-64/XZ check value", "[tensor_file]")
{
    const std::string s = "123456789";
    CHECK(crc64({reinterpret_cast<const unsigned char *>(s.data()), s.size()}) == 0x995DC9BBDF1939FAULL);
    CHECK(crc64({}) == 0);
}

TEST_CASE("tensor stream round trip", "[tensor_file]")
{
    const auto t = sample_tensor();
    std::stringstream ss;
    write_tensor(ss, t);
    const std::string bytes = ss.str();
    CHECK(bytes.size() == kTensorHeaderBytes + t.data.size() * 8 + 8);
    CHECK(bytes.substr(0, 4) == "DMCH");
    // little-endian M after the version field
    CHECK(static_cast<unsigned char>(bytes[6]) == 3);
    CHECK(static_cast<unsigned char>(bytes[7]) == 0);

    std::stringstream in(bytes);
    const auto back = read_tensor(in);
    CHECK(back.M == 3);
    CHECK(back.T == 5);
    CHECK(back.F == 7);
    CHECK(back.data == t.data);
    CHECK(tensor_checksum(back) == tensor_checksum(t));

    auto changed = t;
    changed.data[4] += std::complex<float>(1e-6f, 0.0f);
    CHECK(tensor_checksum(changed) != tensor_checksum(t));
}

TEST_CASE("corrupted tensors are rejected", "[tensor_file]")
{
    std::stringstream ss;
    write_tensor(ss, sample_tensor());
    const std::string good = ss.str();

    auto expect_corrupt = [](const std::string &bytes) {
        std::stringstream in(bytes);
        CHECK_THROWS_AS(read_tensor(in), TensorCorruptError);
    };
    std::string bad = good;
    bad[0] = 'X';
    expect_corrupt(bad);
    bad = good;
    bad[4] = 9;
    expect_corrupt(bad);
    bad = good;
    bad[kTensorHeaderBytes + 10] ^= 0x01;
    expect_corrupt(bad);
    bad = good;
    bad[bad.size() - 1] ^= 0x80;
    expect_corrupt(bad);
    expect_corrupt(good.substr(0, good.size() - 3));
    expect_corrupt(good.substr(0, 10));
    expect_corrupt(good + "x");
    expect_corrupt("");
}

TEST_CASE("tensor files", "[tensor_file]")
{
    const auto dir = temp_dir("tensor");
    const auto t = sample_tensor();
    write_tensor(dir / "a.dmch", t);
    CHECK(read_tensor(dir / "a.dmch").data == t.data);
    // no temporary left behind
    std::size_t files = 0;
    for ([[maybe_unused]] const auto &e : fs::directory_iterator(dir))
        ++files;
    CHECK(files == 1);

    CHECK_THROWS_AS(read_tensor(dir / "missing.dmch"), TensorIoError);
    CHECK_THROWS_AS(write_tensor(dir / "no" / "such" / "dir.dmch", t), TensorIoError);

    write_text_atomic(dir / "r.json", "{}\n");
    std::ifstream in(dir / "r.json");
    std::string s;
    std::getline(in, s);
    CHECK(s == "{}");
    fs::remove_all(dir);
}
