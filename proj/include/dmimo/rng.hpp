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

#ifndef DMIMO_RNG_HPP
#define DMIMO_RNG_HPP

#include <cstdint>
#include <random>

namespace dmimo
{
using Rng = std::mt19937_64;

// Named substreams of the master seed. Every random quantity in a simulation
// is drawn from exactly one of these, so adding draws to one stream never
// shifts another.
enum class Stream : std::uint64_t
{
    Covariance = 1,
    TransitionRates = 2,
    Transitions = 3,
    Shadowing = 4,
    InteractingObjects = 5,
    Phases = 6,
    InitialStates = 7,
    Trajectory = 8,
    DelaySpread = 9,
};

// SplitMix64 finalizer over (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index = 0)
{
    return Rng(derive_seed(master, static_cast<std::uint64_t>(stream), index));
}

inline double uniform01(Rng &rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng &rng)
{
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

} // namespace dmimo

#endif
