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

#ifndef DMIMO_DPSS_HPP
#define DMIMO_DPSS_HPP

#include <Eigen/Dense>

#include <cstddef>

namespace dmimo
{

// First J discrete prolate spheroidal sequences of length N with time
// half-bandwidth product NW. Columns of `sequences` are unit-norm.
struct DpssSet
{
    std::size_t length = 0;
    double nw = 0.0;
    Eigen::MatrixXd sequences;     // N x J
    Eigen::VectorXd concentration; // J, fraction of energy inside [-W, W]
};

DpssSet dpss(std::size_t N, double NW, std::size_t J);

// Energy fraction of `v` inside the band [-W, W], W = NW / N, computed from
// the sinc kernel quadratic form.
double spectral_concentration(const Eigen::VectorXd &v, double NW);

} // namespace dmimo

#endif
