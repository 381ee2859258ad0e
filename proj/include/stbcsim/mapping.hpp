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

#ifndef STBCSIM_MAPPING_HPP
#define STBCSIM_MAPPING_HPP

#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stbcsim
{

/// Square Gray-labeled QAM with unit average energy.
///
/// The first B/2 bits of a label select the in-phase level and the remaining
/// B/2 bits the quadrature level; each axis uses a reflected Gray code over
/// levels ordered from most negative to most positive.
class Constellation
{
public:
    explicit Constellation(int bitsPerSymbol) : bits_(bitsPerSymbol)
    {
        if (bits_ != 2 && bits_ != 4 && bits_ != 6 && bits_ != 8)
            throw std::invalid_argument("Constellation: bits per symbol must be 2, 4, 6 or 8");
        axisBits_ = bits_ / 2;
        const int m = 1 << axisBits_;
        const int order = m * m;
        const double scale = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
        levels_.resize(m);
        labelOfLevel_.resize(m);
        levelOfLabel_.resize(m);
        for (int i = 0; i < m; ++i)
        {
            levels_[i] = scale * (2 * i - (m - 1));
            const int gray = i ^ (i >> 1);
            labelOfLevel_[i] = gray;
            levelOfLabel_[gray] = i;
        }
        points_.resize(order);
        for (int label = 0; label < order; ++label)
        {
            const int iLabel = label >> axisBits_;
            const int qLabel = label & (m - 1);
            points_[label] = {levels_[levelOfLabel_[iLabel]], levels_[levelOfLabel_[qLabel]]};
        }
    }

    static Constellation from_name(std::string_view name)
    {
        if (name == "qpsk")
            return Constellation(2);
        if (name == "16qam")
            return Constellation(4);
        if (name == "64qam")
            return Constellation(6);
        if (name == "256qam")
            return Constellation(8);
        throw std::invalid_argument("unknown modulation '" + std::string(name) +
                                    "' (expected qpsk, 16qam, 64qam or 256qam)");
    }

    std::string name() const
    {
        return bits_ == 2 ? "qpsk" : std::to_string(order()) + "qam";
    }

    int bits_per_symbol() const { return bits_; }
    int order() const { return 1 << bits_; }
    int axis_bits() const { return axisBits_; }

    /// Points indexed by label; bit k of the label (k = 0 first) is (label >> (B-1-k)) & 1.
    const std::vector<Complex>& points() const { return points_; }
    /// Per-axis amplitude levels, ascending.
    const std::vector<double>& levels() const { return levels_; }
    /// Axis label (axisBits wide, MSB first) of the level with ascending index i.
    int axis_label(int levelIndex) const { return labelOfLevel_[levelIndex]; }

    Complex map(std::span<const std::uint8_t> bits) const
    {
        int label = 0;
        for (int k = 0; k < bits_; ++k)
            label = (label << 1) | (bits[k] & 1);
        return points_[label];
    }

private:
    int bits_;
    int axisBits_;
    std::vector<double> levels_;
    std::vector<int> labelOfLevel_;
    std::vector<int> levelOfLabel_;
    std::vector<Complex> points_;
};

inline std::vector<Complex> map_bits(std::span<const std::uint8_t> bits, const Constellation& c)
{
    const auto b = static_cast<std::size_t>(c.bits_per_symbol());
    if (bits.size() % b != 0)
        throw std::invalid_argument("map_bits: " + std::to_string(bits.size()) + " bits is not a multiple of " +
                                    std::to_string(b));
    std::vector<Complex> out(bits.size() / b);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = c.map(bits.subspan(i * b, b));
    return out;
}

namespace detail
{
// Max-log LLRs for the axisBits bits of one axis: (min_{c=0} d^2 - min_{c=1} d^2) / effVar.
inline void demap_axis(double x, double effVar, const Constellation& c, std::span<double> out)
{
    const int m = static_cast<int>(c.levels().size());
    const int nb = c.axis_bits();
    constexpr double inf = std::numeric_limits<double>::infinity();
    double best0[4] = {inf, inf, inf, inf};
    double best1[4] = {inf, inf, inf, inf};
    for (int i = 0; i < m; ++i)
    {
        const double d = x - c.levels()[i];
        const double d2 = d * d;
        const int label = c.axis_label(i);
        for (int k = 0; k < nb; ++k)
        {
            const bool one = ((label >> (nb - 1 - k)) & 1) != 0;
            double& slot = one ? best1[k] : best0[k];
            slot = std::min(slot, d2);
        }
    }
    for (int k = 0; k < nb; ++k)
        out[k] = (best0[k] - best1[k]) / effVar;
}

inline double prob_one(double llr) { return 1.0 / (1.0 + std::exp(-llr)); }

struct AxisMoments
{
    double mean;
    double variance;
};

inline AxisMoments soft_axis(std::span<const double> llrs, const Constellation& c)
{
    const int m = static_cast<int>(c.levels().size());
    const int nb = c.axis_bits();
    double p1[4];
    for (int k = 0; k < nb; ++k)
        p1[k] = prob_one(llrs[k]);
    double mean = 0.0;
    double power = 0.0;
    for (int i = 0; i < m; ++i)
    {
        const int label = c.axis_label(i);
        double p = 1.0;
        for (int k = 0; k < nb; ++k)
            p *= ((label >> (nb - 1 - k)) & 1) ? p1[k] : 1.0 - p1[k];
        mean += p * c.levels()[i];
        power += p * c.levels()[i] * c.levels()[i];
    }
    return {mean, std::max(0.0, power - mean * mean)};
}
} // namespace detail

/// Max-log LLRs log(P(1)/P(0)) for the B bits of one symbol estimate under a
/// complex Gaussian error of total variance effVar. Uses the per-axis split
/// of Gray square QAM, which is exact for the max-log metric.
inline void demap_llr(Complex sHat, double effVar, const Constellation& c, std::span<double> out)
{
    if (!(effVar > 0.0))
        throw std::invalid_argument("demap_llr: effective variance must be positive");
    const int nb = c.axis_bits();
    detail::demap_axis(sHat.real(), effVar, c, out.subspan(0, nb));
    detail::demap_axis(sHat.imag(), effVar, c, out.subspan(nb, nb));
}

inline std::vector<double> demap_llr(Complex sHat, double effVar, const Constellation& c)
{
    std::vector<double> out(c.bits_per_symbol());
    demap_llr(sHat, effVar, c, out);
    return out;
}

/// Posterior mean of a symbol given per-bit LLRs, with its residual variance
/// E|s - mean|^2, also split per axis.
struct SoftSymbol
{
    Complex value;
    double variance = 0.0;
    double varianceRe = 0.0;
    double varianceIm = 0.0;
};

inline SoftSymbol soft_map(std::span<const double> llrs, const Constellation& c)
{
    if (static_cast<int>(llrs.size()) != c.bits_per_symbol())
        throw std::invalid_argument("soft_map: expected one LLR per bit of the symbol");
    const int nb = c.axis_bits();
    const detail::AxisMoments re = detail::soft_axis(llrs.subspan(0, nb), c);
    const detail::AxisMoments im = detail::soft_axis(llrs.subspan(nb, nb), c);
    SoftSymbol s;
    s.value = {re.mean, im.mean};
    s.varianceRe = re.variance;
    s.varianceIm = im.variance;
    s.variance = re.variance + im.variance;
    return s;
}

/// Probability of every constellation point under independent bit posteriors.
inline std::vector<double> symbol_posteriors(std::span<const double> llrs, const Constellation& c)
{
    const int b = c.bits_per_symbol();
    std::vector<double> p(c.order());
    for (int label = 0; label < c.order(); ++label)
    {
        double prob = 1.0;
        for (int k = 0; k < b; ++k)
        {
            const double p1 = detail::prob_one(llrs[k]);
            prob *= ((label >> (b - 1 - k)) & 1) ? p1 : 1.0 - p1;
        }
        p[label] = prob;
    }
    return p;
}

} // namespace stbcsim

#endif
