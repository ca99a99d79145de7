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

#ifndef DMIMO_TYPES_HPP
#define DMIMO_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>

namespace dmimo
{
using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Two-state link classification. OLoS covers everything with more than half
// of the Fresnel disc obstructed.
enum class LinkState : std::uint8_t
{
    LoS = 0,
    OLoS = 1
};

inline constexpr std::string_view to_string(LinkState s)
{
    return s == LinkState::LoS ? "LOS" : "OLOS";
}

inline std::optional<LinkState> parse_link_state(std::string_view text)
{
    if (text == "LOS")
        return LinkState::LoS;
    if (text == "OLOS")
        return LinkState::OLoS;
    return std::nullopt;
}

inline constexpr std::size_t state_index(LinkState s) { return static_cast<std::size_t>(s); }

} // namespace dmimo

#endif
