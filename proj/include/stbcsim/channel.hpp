// SPDX-License-Identifier: Apache-2.0
//
// stbcsim: link-level simulator for two-antenna space-time block codes
// Copyright (C) 2026 The stbcsim authors
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

#ifndef STBCSIM_CHANNEL_HPP
#define STBCSIM_CHANNEL_HPP

#include "stcode.hpp"
#include "types.hpp"

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace stbcsim
{

/// mR x mT matrix of i.i.d. CN(0, 1) coefficients, constant over one ST block.
inline ComplexMatrix draw_channel(int mR, int mT, Rng& rng)
{
    if (mR < 1 || mT < 1)
        throw std::invalid_argument("draw_channel: antenna counts must be >= 1");
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    ComplexMatrix h(mR, mT);
    for (int r = 0; r < mR; ++r)
        for (int t = 0; t < mT; ++t)
        {
            const double re = gauss(rng);
            const double im = gauss(rng);
            h(r, t) = {re, im};
        }
    return h;
}

/// Real block expansion of H: block (r, t) is 2T x 2T and holds T copies of
/// the rotation-scaling form [[hr, -hi], [hi, hr]] on its diagonal.
inline RealMatrix expand_g(const ComplexMatrix& h, int T)
{
    const auto mR = static_cast<int>(h.rows());
    const auto mT = static_cast<int>(h.cols());
    RealMatrix g = RealMatrix::Zero(2 * mR * T, 2 * mT * T);
    for (int r = 0; r < mR; ++r)
        for (int a = 0; a < mT; ++a)
        {
            const double hr = h(r, a).real();
            const double hi = h(r, a).imag();
            for (int t = 0; t < T; ++t)
            {
                const int row = 2 * (r * T + t);
                const int col = 2 * (a * T + t);
                g(row, col) = hr;
                g(row, col + 1) = -hi;
                g(row + 1, col) = hi;
                g(row + 1, col + 1) = hr;
            }
        }
    return g;
}

/// Diagonal amplitude matrix: entries of receive antenna j's 2T-row block are sqrt(alpha_j).
inline RealMatrix build_b(std::span<const double> alphas, int T)
{
    const auto mR = static_cast<int>(alphas.size());
    RealMatrix b = RealMatrix::Zero(2 * mR * T, 2 * mR * T);
    for (int r = 0; r < mR; ++r)
    {
        if (!(alphas[r] >= 0.0))
            throw std::invalid_argument("build_b: attenuation factors must be non-negative");
        const double amp = std::sqrt(alphas[r]);
        for (int i = 0; i < 2 * T; ++i)
            b(2 * T * r + i, 2 * T * r + i) = amp;
    }
    return b;
}

inline std::vector<double> alphas_from_db(std::span<const double> alphaDb)
{
    std::vector<double> out;
    out.reserve(alphaDb.size());
    for (double db : alphaDb)
        out.push_back(db_to_linear(db));
    return out;
}

/// Geq = B G F evaluated without forming G: the stacked row pair for
/// (receive antenna r, slot t) is sqrt(alpha_r) * sum_a rot(h_ra) * F[(a, t) rows].
template <typename Out>
void equivalent_channel_into(const ComplexMatrix& h, std::span<const double> alphas, const DispersionSet& d,
                             Out& geq)
{
    const auto mR = static_cast<int>(h.rows());
    const int cols = 2 * d.Q;
    geq.setZero(2 * mR * d.T, cols);
    for (int r = 0; r < mR; ++r)
    {
        const double amp = std::sqrt(alphas[r]);
        for (int t = 0; t < d.T; ++t)
        {
            const int row = 2 * (r * d.T + t);
            for (int a = 0; a < d.mT; ++a)
            {
                const double hr = amp * h(r, a).real();
                const double hi = amp * h(r, a).imag();
                const int frow = 2 * (a * d.T + t);
                for (int c = 0; c < cols; ++c)
                {
                    const double fr = d.F(frow, c);
                    const double fi = d.F(frow + 1, c);
                    geq(row, c) += hr * fr - hi * fi;
                    geq(row + 1, c) += hi * fr + hr * fi;
                }
            }
        }
    }
}

inline RealMatrix equivalent_channel(const ComplexMatrix& h, std::span<const double> alphas, const DispersionSet& d)
{
    if (static_cast<Eigen::Index>(alphas.size()) != h.rows())
        throw std::invalid_argument("equivalent_channel: one attenuation factor per receive antenna is required");
    RealMatrix geq;
    equivalent_channel_into(h, alphas, d, geq);
    return geq;
}

/// One channel realization with all intermediate matrices kept for inspection.
struct ChannelRealization
{
    ComplexMatrix H;
    RealMatrix G;
    std::vector<double> alphas;
    RealMatrix B;
    RealMatrix Geq;

    static ChannelRealization assemble(ComplexMatrix h, std::vector<double> alphas, const DispersionSet& d)
    {
        ChannelRealization c;
        c.G = expand_g(h, d.T);
        c.B = build_b(alphas, d.T);
        c.Geq = c.B * c.G * d.F;
        c.H = std::move(h);
        c.alphas = std::move(alphas);
        return c;
    }
};

struct NoiseModel
{
    double sigma2;

    explicit NoiseModel(double variancePerRealDim) : sigma2(variancePerRealDim)
    {
        if (!(sigma2 > 0.0))
            throw std::invalid_argument("NoiseModel: variance must be positive");
    }
};

/// Per-real-dimension noise variance for a given Eb/N0.
///
/// Reference received power per antenna is 1 at alpha = 1, and eta information
/// bits are carried per channel use, so N0 = 1 / (eta * Eb/N0) and the noise
/// variance per real dimension is N0 / 2.
inline double sigma2_from_ebn0(double ebn0Db, double eta)
{
    const double n0 = 1.0 / (eta * db_to_linear(ebn0Db));
    return n0 / 2.0;
}

/// y = Geq s + w with w ~ N(0, sigma2) per real dimension.
template <typename Mat, typename Vec>
RealVector transmit(const Mat& geq, const Vec& s, double sigma2, Rng& rng)
{
    RealVector y = geq * s;
    if (sigma2 <= 0.0)
        return y;
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2));
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y(i) += gauss(rng);
    return y;
}

inline RealVector transmit(const RealMatrix& geq, const RealVector& s, const NoiseModel& noise, Rng& rng)
{
    return transmit(geq, s, noise.sigma2, rng);
}

} // namespace stbcsim

#endif
