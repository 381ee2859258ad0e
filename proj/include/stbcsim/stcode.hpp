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

#ifndef STBCSIM_STCODE_HPP
#define STBCSIM_STCODE_HPP

#include "types.hpp"

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stbcsim
{

enum class SchemeId
{
    Alamouti,
    Vblast,
    LinearDispersion,
    Golden
};

inline constexpr std::array<SchemeId, 4> kAllSchemes = {SchemeId::Alamouti, SchemeId::Vblast,
                                                        SchemeId::LinearDispersion, SchemeId::Golden};

/// CLI token for a scheme: alamouti | vblast | ld | golden.
inline std::string_view to_token(SchemeId id)
{
    switch (id)
    {
    case SchemeId::Alamouti: return "alamouti";
    case SchemeId::Vblast: return "vblast";
    case SchemeId::LinearDispersion: return "ld";
    case SchemeId::Golden: return "golden";
    }
    return "?";
}

inline SchemeId parse_scheme(std::string_view token)
{
    for (SchemeId id : kAllSchemes)
        if (to_token(id) == token)
            return id;
    throw std::invalid_argument("unknown scheme '" + std::string(token) +
                                "' (expected alamouti, vblast, ld or golden)");
}

/// A linear space-time block code in dispersion form.
///
/// The codeword for complex symbols s_1..s_Q is
///   X = normScale * sum_q (Re(s_q) U_q + j Im(s_q) V_q),
/// an mT x T matrix whose rows are transmit antennas and columns are symbol
/// durations. U_q and V_q carry the code's own published scale factor;
/// normScale = 1/sqrt(mT) is the extra per-antenna power normalization.
/// F maps the stacked symbol vector [s1r, s1i, ..., sQr, sQi] to the
/// stacked antenna signal [x(1,1)r, x(1,1)i, ..., x(mT,T)r, x(mT,T)i].
struct DispersionSet
{
    SchemeId scheme{};
    int mT = 2;
    int T = 1;
    int Q = 1;
    int L = 1;
    std::vector<ComplexMatrix> U;
    std::vector<ComplexMatrix> V;
    double normScale = 1.0;
    RealMatrix F;

    int stacked_symbols() const { return 2 * Q; }
    int stacked_signal() const { return 2 * mT * T; }
};

RealMatrix build_f(const DispersionSet& d);

namespace detail
{
inline ComplexMatrix zeros(int rows, int cols) { return ComplexMatrix::Zero(rows, cols); }

// Complex-linear codes: X depends on s_q only through s_q * C_q, so U_q = V_q = C_q.
inline void push_linear(DispersionSet& d, const ComplexMatrix& c)
{
    d.U.push_back(c);
    d.V.push_back(c);
}
} // namespace detail

inline DispersionSet dispersion_set(SchemeId scheme)
{
    using detail::zeros;
    const Complex j{0.0, 1.0};

    DispersionSet d;
    d.scheme = scheme;
    d.mT = 2;
    d.normScale = 1.0 / std::sqrt(static_cast<double>(d.mT));

    switch (scheme)
    {
    case SchemeId::Alamouti:
    {
        // [[s1, s2], [-s2*, s1*]]
        d.T = 2;
        d.Q = 2;
        ComplexMatrix u1 = zeros(2, 2), v1 = zeros(2, 2), u2 = zeros(2, 2), v2 = zeros(2, 2);
        u1(0, 0) = 1.0;
        u1(1, 1) = 1.0;
        v1(0, 0) = 1.0;
        v1(1, 1) = -1.0;
        u2(0, 1) = 1.0;
        u2(1, 0) = -1.0;
        v2(0, 1) = 1.0;
        v2(1, 0) = 1.0;
        d.U = {u1, u2};
        d.V = {v1, v2};
        break;
    }
    case SchemeId::Vblast:
    {
        // [s1, s2]^T
        d.T = 1;
        d.Q = 2;
        ComplexMatrix c1 = zeros(2, 1), c2 = zeros(2, 1);
        c1(0, 0) = 1.0;
        c2(1, 0) = 1.0;
        detail::push_linear(d, c1);
        detail::push_linear(d, c2);
        break;
    }
    case SchemeId::LinearDispersion:
    {
        // (1/sqrt2) [[s1 + s3, s2 - s4], [s2 + s4, s1 - s3]]
        d.T = 2;
        d.Q = 4;
        const double k = 1.0 / std::sqrt(2.0);
        ComplexMatrix c = zeros(2, 2);
        c(0, 0) = k;
        c(1, 1) = k;
        detail::push_linear(d, c);
        c = zeros(2, 2);
        c(0, 1) = k;
        c(1, 0) = k;
        detail::push_linear(d, c);
        c = zeros(2, 2);
        c(0, 0) = k;
        c(1, 1) = -k;
        detail::push_linear(d, c);
        c = zeros(2, 2);
        c(0, 1) = -k;
        c(1, 0) = k;
        detail::push_linear(d, c);
        break;
    }
    case SchemeId::Golden:
    {
        // (1/sqrt5) [[b(s1 + th s2), b(s3 + th s4)], [j bb(s3 + thb s4), bb(s1 + thb s2)]]
        d.T = 2;
        d.Q = 4;
        const double theta = (1.0 + std::sqrt(5.0)) / 2.0;
        const double thetaBar = 1.0 - theta;
        const Complex beta{1.0, 1.0 - theta};
        const Complex betaBar{1.0, 1.0 - thetaBar};
        const Complex mu = j;
        const double k = 1.0 / std::sqrt(5.0);
        ComplexMatrix c = zeros(2, 2);
        c(0, 0) = k * beta;
        c(1, 1) = k * betaBar;
        detail::push_linear(d, c);
        c = zeros(2, 2);
        c(0, 0) = k * beta * theta;
        c(1, 1) = k * betaBar * thetaBar;
        detail::push_linear(d, c);
        c = zeros(2, 2);
        c(0, 1) = k * beta;
        c(1, 0) = k * mu * betaBar;
        detail::push_linear(d, c);
        c = zeros(2, 2);
        c(0, 1) = k * beta * theta;
        c(1, 0) = k * mu * betaBar * thetaBar;
        detail::push_linear(d, c);
        break;
    }
    }
    d.L = d.Q / d.T;
    d.F = build_f(d);
    return d;
}

inline ComplexMatrix encode(const DispersionSet& d, std::span<const Complex> symbols)
{
    if (static_cast<int>(symbols.size()) != d.Q)
        throw std::invalid_argument("encode: expected " + std::to_string(d.Q) + " symbols, got " +
                                    std::to_string(symbols.size()));
    const Complex j{0.0, 1.0};
    ComplexMatrix x = ComplexMatrix::Zero(d.mT, d.T);
    for (int q = 0; q < d.Q; ++q)
        x += symbols[q].real() * d.U[q] + (j * symbols[q].imag()) * d.V[q];
    return d.normScale * x;
}

/// [s1r, s1i, ..., sQr, sQi]
inline RealVector stack_symbols(std::span<const Complex> symbols)
{
    RealVector s(2 * symbols.size());
    for (std::size_t q = 0; q < symbols.size(); ++q)
    {
        s(2 * q) = symbols[q].real();
        s(2 * q + 1) = symbols[q].imag();
    }
    return s;
}

/// Stacks a matrix row by row with interleaved real/imaginary parts, the order
/// used for both the transmit signal X (antenna, time) and the observation Y.
inline RealVector stack_matrix(const ComplexMatrix& m)
{
    RealVector v(2 * m.size());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
        {
            v(k++) = m(r, c).real();
            v(k++) = m(r, c).imag();
        }
    return v;
}

/// Real (2 mT T) x (2Q) map from stacked symbols to stacked transmit signal.
/// Each symbol/slot entry is the 2x2 block [[Ur, -Vi], [Ui, Vr]].
inline RealMatrix build_f(const DispersionSet& d)
{
    RealMatrix f = RealMatrix::Zero(2 * d.mT * d.T, 2 * d.Q);
    for (int m = 0; m < d.mT; ++m)
        for (int t = 0; t < d.T; ++t)
        {
            const int row = 2 * (m * d.T + t);
            for (int q = 0; q < d.Q; ++q)
            {
                const Complex u = d.normScale * d.U[q](m, t);
                const Complex v = d.normScale * d.V[q](m, t);
                f(row, 2 * q) = u.real();
                f(row, 2 * q + 1) = -v.imag();
                f(row + 1, 2 * q) = u.imag();
                f(row + 1, 2 * q + 1) = v.real();
            }
        }
    return f;
}

} // namespace stbcsim

#endif
