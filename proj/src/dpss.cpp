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

#include "dmimo/dpss.hpp"
#include "dmimo/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace dmimo
{

DpssSet dpss(std::size_t N, double NW, std::size_t J)
{
    if (N < 8)
        throw std::invalid_argument("dpss: N must be at least 8");
    if (!(NW > 0.0) || J < 1 || static_cast<double>(J) > 2.0 * NW - 1.0 + 1e-12)
        throw std::invalid_argument("dpss: need 1 <= J <= 2 NW - 1");
    if (J > N)
        throw std::invalid_argument("dpss: J exceeds N");

    const double W = NW / static_cast<double>(N);
    const auto n = static_cast<Eigen::Index>(N);
    // Commuting tridiagonal matrix; its eigenvectors are the Slepian sequences.
    Eigen::VectorXd diag(n), sub(n - 1);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const double c = 0.5 * (static_cast<double>(N) - 1.0 - 2.0 * static_cast<double>(i));
        diag[i] = c * c * std::cos(kTwoPi * W);
    }
    for (Eigen::Index i = 1; i < n; ++i)
        sub[i - 1] = 0.5 * static_cast<double>(i) * static_cast<double>(N - static_cast<std::size_t>(i));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dpss: tridiagonal eigensolver failed");

    DpssSet set;
    set.length = N;
    set.nw = NW;
    set.sequences.resize(n, static_cast<Eigen::Index>(J));
    set.concentration.resize(static_cast<Eigen::Index>(J));
    for (std::size_t j = 0; j < J; ++j)
    {
        // eigenvalues ascend; the most concentrated sequences come last
        Eigen::VectorXd v = es.eigenvectors().col(n - 1 - static_cast<Eigen::Index>(j));
        v.normalize();
        if (j % 2 == 0)
        {
            if (v.sum() < 0.0)
                v = -v;
        }
        else
        {
            // antisymmetric: make the first lobe positive
            double weighted = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                weighted += (static_cast<double>(n - 1) * 0.5 - static_cast<double>(i)) * v[i];
            if (weighted < 0.0)
                v = -v;
        }
        set.sequences.col(static_cast<Eigen::Index>(j)) = v;
        set.concentration[static_cast<Eigen::Index>(j)] = spectral_concentration(v, NW);
    }
    return set;
}

double spectral_concentration(const Eigen::VectorXd &v, double NW)
{
    const auto n = v.size();
    const double W = NW / static_cast<double>(n);
    // A(i, j) = sin(2 pi W (i - j)) / (pi (i - j)), A(i, i) = 2W; Toeplitz.
    Eigen::VectorXd kernel(n);
    kernel[0] = 2.0 * W;
    for (Eigen::Index d = 1; d < n; ++d)
        kernel[d] = std::sin(kTwoPi * W * static_cast<double>(d)) / (kPi * static_cast<double>(d));
    double q = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        double row = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            row += kernel[std::abs(i - j)] * v[j];
        q += v[i] * row;
    }
    return q / v.squaredNorm();
}

} // namespace dmimo
