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

#ifndef STBCSIM_FEC_HPP
#define STBCSIM_FEC_HPP

#include "types.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stbcsim
{

enum class CodeRate
{
    Half,
    TwoThirds,
    ThreeQuarters
};

inline std::string_view to_token(CodeRate r)
{
    switch (r)
    {
    case CodeRate::Half: return "1/2";
    case CodeRate::TwoThirds: return "2/3";
    case CodeRate::ThreeQuarters: return "3/4";
    }
    return "?";
}

inline CodeRate parse_code_rate(std::string_view token)
{
    if (token == "1/2")
        return CodeRate::Half;
    if (token == "2/3")
        return CodeRate::TwoThirds;
    if (token == "3/4")
        return CodeRate::ThreeQuarters;
    throw std::invalid_argument("unknown code rate '" + std::string(token) + "' (expected 1/2, 2/3 or 3/4)");
}

inline double rate_value(CodeRate r)
{
    switch (r)
    {
    case CodeRate::Half: return 0.5;
    case CodeRate::TwoThirds: return 2.0 / 3.0;
    case CodeRate::ThreeQuarters: return 0.75;
    }
    return 0.0;
}

/// DVB-T puncturing: which of the two mother-code outputs survive at each
/// position of the period. Stream X is generator 133, stream Y generator 171.
struct PuncturePattern
{
    int period;
    std::array<std::uint8_t, 3> x;
    std::array<std::uint8_t, 3> y;

    bool keep(std::size_t motherIndex) const
    {
        const std::size_t step = motherIndex / 2;
        const auto phase = static_cast<std::size_t>(step % static_cast<std::size_t>(period));
        return (motherIndex % 2 == 0) ? x[phase] != 0 : y[phase] != 0;
    }
};

inline PuncturePattern puncture_pattern(CodeRate r)
{
    switch (r)
    {
    case CodeRate::Half: return {1, {1, 0, 0}, {1, 0, 0}};
    case CodeRate::TwoThirds: return {2, {1, 0, 0}, {1, 1, 0}};
    case CodeRate::ThreeQuarters: return {3, {1, 0, 1}, {1, 1, 0}};
    }
    return {1, {1, 0, 0}, {1, 0, 0}};
}

template <typename T>
std::vector<T> puncture(std::span<const T> mother, CodeRate rate)
{
    const PuncturePattern p = puncture_pattern(rate);
    std::vector<T> out;
    out.reserve(mother.size());
    for (std::size_t i = 0; i < mother.size(); ++i)
        if (p.keep(i))
            out.push_back(mother[i]);
    return out;
}

/// Re-inserts erased positions with a zero LLR.
inline std::vector<double> depuncture(std::span<const double> llrs, CodeRate rate, std::size_t motherLength)
{
    const PuncturePattern p = puncture_pattern(rate);
    std::vector<double> out(motherLength, 0.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < motherLength; ++i)
        if (p.keep(i))
        {
            if (k >= llrs.size())
                throw std::invalid_argument("depuncture: too few LLRs for the mother length");
            out[i] = llrs[k++];
        }
    if (k != llrs.size())
        throw std::invalid_argument("depuncture: LLR count does not match the mother length");
    return out;
}

/// Rate-1/2 K=7 feed-forward code (133, 171) octal, with optional DVB-T puncturing.
///
/// The shift register holds the current input in bit 6 and the six previous
/// inputs below it, so the trellis state (bits 5..0) has the newest past input
/// in bit 5. Output order per input bit is (g133, g171).
class ConvCode
{
public:
    static constexpr int kConstraintLength = 7;
    static constexpr int kMemory = 6;
    static constexpr int kStates = 64;
    static constexpr unsigned kG1 = 0133;
    static constexpr unsigned kG2 = 0171;

    explicit ConvCode(CodeRate rate = CodeRate::Half) : rate_(rate) {}

    CodeRate rate() const { return rate_; }

    static unsigned next_state(unsigned state, unsigned input) { return (input << 5) | (state >> 1); }

    /// Two output bits for a transition, packed as (c1 << 1) | c2.
    static unsigned output(unsigned state, unsigned input)
    {
        const unsigned reg = (input << 6) | state;
        const auto c1 = static_cast<unsigned>(std::popcount(reg & kG1) & 1);
        const auto c2 = static_cast<unsigned>(std::popcount(reg & kG2) & 1);
        return (c1 << 1) | c2;
    }

    static std::size_t mother_length(std::size_t infoBits) { return 2 * (infoBits + kMemory); }

    std::size_t coded_length(std::size_t infoBits) const
    {
        const PuncturePattern p = puncture_pattern(rate_);
        std::size_t n = 0;
        for (std::size_t i = 0; i < mother_length(infoBits); ++i)
            n += p.keep(i) ? 1 : 0;
        return n;
    }

    /// Unterminated rate-1/2 encoding starting from the all-zero state.
    static std::vector<std::uint8_t> encode_mother(std::span<const std::uint8_t> bits)
    {
        std::vector<std::uint8_t> out;
        out.reserve(2 * bits.size());
        unsigned state = 0;
        for (std::uint8_t b : bits)
        {
            const unsigned u = b & 1u;
            const unsigned c = output(state, u);
            out.push_back(static_cast<std::uint8_t>(c >> 1));
            out.push_back(static_cast<std::uint8_t>(c & 1u));
            state = next_state(state, u);
        }
        return out;
    }

    /// Appends six zero tail bits, encodes, and punctures to the configured rate.
    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const
    {
        std::vector<std::uint8_t> terminated(info.begin(), info.end());
        terminated.resize(info.size() + kMemory, 0);
        const std::vector<std::uint8_t> mother = encode_mother(terminated);
        return puncture<std::uint8_t>(mother, rate_);
    }

private:
    CodeRate rate_;
};

/// Fixed pseudo-random permutation over one coded frame.
/// interleave: out[i] = in[perm[i]].
class Interleaver
{
public:
    Interleaver(std::size_t length, std::uint64_t seed) : perm_(length)
    {
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        Rng rng = substream(seed, 0x696e746c76ULL, length);
        std::shuffle(perm_.begin(), perm_.end(), rng);
    }

    explicit Interleaver(std::vector<std::size_t> permutation) : perm_(std::move(permutation))
    {
        std::vector<bool> seen(perm_.size(), false);
        for (std::size_t p : perm_)
        {
            if (p >= perm_.size() || seen[p])
                throw std::invalid_argument("Interleaver: not a permutation");
            seen[p] = true;
        }
    }

    static Interleaver identity(std::size_t length)
    {
        std::vector<std::size_t> p(length);
        std::iota(p.begin(), p.end(), std::size_t{0});
        return Interleaver(std::move(p));
    }

    std::size_t size() const { return perm_.size(); }
    const std::vector<std::size_t>& permutation() const { return perm_; }

    template <typename T>
    void interleave(std::span<const T> in, std::span<T> out) const
    {
        check(in.size(), out.size());
        for (std::size_t i = 0; i < perm_.size(); ++i)
            out[i] = in[perm_[i]];
    }

    template <typename T>
    void deinterleave(std::span<const T> in, std::span<T> out) const
    {
        check(in.size(), out.size());
        for (std::size_t i = 0; i < perm_.size(); ++i)
            out[perm_[i]] = in[i];
    }

    template <typename T>
    std::vector<T> interleave(std::span<const T> in) const
    {
        std::vector<T> out(in.size());
        interleave<T>(in, std::span<T>(out));
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(std::span<const T> in) const
    {
        std::vector<T> out(in.size());
        deinterleave<T>(in, std::span<T>(out));
        return out;
    }

private:
    void check(std::size_t in, std::size_t out) const
    {
        if (in != perm_.size() || out != perm_.size())
            throw std::invalid_argument("Interleaver: frame length " + std::to_string(in) +
                                        " does not match permutation length " + std::to_string(perm_.size()));
    }

    std::vector<std::size_t> perm_;
};

struct SisoOutput
{
    std::vector<double> extrinsic; ///< coded-bit extrinsic LLRs, same layout as the input
    std::vector<double> infoLlr;   ///< a-posteriori information-bit LLRs
    std::vector<std::uint8_t> infoBits;
};

/// Max-Log-MAP soft-in/soft-out decoder for the terminated (133, 171) code.
///
/// LLRs follow log(P(1)/P(0)). Input is the punctured coded frame as
/// transmitted; erased positions are filled with zero before the trellis
/// recursions and dropped again from the extrinsic output. Path metrics are
/// kept in single precision.
class SisoDecoder
{
public:
    static constexpr double kLlrClamp = 50.0;

    explicit SisoDecoder(CodeRate rate = CodeRate::Half) : rate_(rate)
    {
        // Butterfly i covers states 2i, 2i+1 feeding next states i (input 0) and i + 32 (input 1).
        for (unsigned i = 0; i < kHalf; ++i)
            for (unsigned grp = 0; grp < 4; ++grp)
            {
                const unsigned s = 2 * i + (grp & 1u);
                const unsigned u = grp >> 1;
                const unsigned c = ConvCode::output(s, u);
                c1_[grp][i] = static_cast<float>(c >> 1);
                c2_[grp][i] = static_cast<float>(c & 1u);
                const bool b1 = (c >> 1) != 0;
                const bool b2 = (c & 1u) != 0;
                pen_[0][grp][i] = b1 ? kNegInf : 0.0f;
                pen_[1][grp][i] = b1 ? 0.0f : kNegInf;
                pen_[2][grp][i] = b2 ? kNegInf : 0.0f;
                pen_[3][grp][i] = b2 ? 0.0f : kNegInf;
            }
    }

    CodeRate rate() const { return rate_; }

    SisoOutput decode(std::span<const double> codedLlrs, std::size_t infoBits)
    {
        const std::size_t motherLen = ConvCode::mother_length(infoBits);
        const PuncturePattern p = puncture_pattern(rate_);
        mother_.assign(motherLen, 0.0f);
        std::size_t k = 0;
        for (std::size_t i = 0; i < motherLen; ++i)
            if (p.keep(i))
            {
                if (k >= codedLlrs.size())
                    throw std::invalid_argument("SisoDecoder: frame shorter than the coded length");
                mother_[i] = static_cast<float>(std::clamp(codedLlrs[k++], -kLlrClamp, kLlrClamp));
            }
        if (k != codedLlrs.size())
            throw std::invalid_argument("SisoDecoder: frame longer than the coded length");

        run_trellis(infoBits);

        SisoOutput result;
        result.extrinsic.reserve(codedLlrs.size());
        for (std::size_t i = 0; i < motherLen; ++i)
            if (p.keep(i))
                result.extrinsic.push_back(static_cast<double>(app_[i] - mother_[i]));
        result.infoLlr.resize(infoBits);
        result.infoBits.resize(infoBits);
        for (std::size_t i = 0; i < infoBits; ++i)
        {
            result.infoLlr[i] = static_cast<double>(infoApp_[i]);
            result.infoBits[i] = infoApp_[i] > 0.0f ? 1 : 0;
        }
        return result;
    }

private:
    static constexpr float kNegInf = -1e30f;
    static constexpr unsigned S = ConvCode::kStates;
    static constexpr unsigned kHalf = S / 2;
    static constexpr unsigned kLanes = 8;

    using Half = std::array<float, kHalf>;

    // Branch metrics c1 * l1 + c2 * l2 for the four transition groups of every butterfly.
    void branch_metrics(float l1, float l2, std::array<Half, 4>& g) const
    {
        for (unsigned grp = 0; grp < 4; ++grp)
            for (unsigned i = 0; i < kHalf; ++i)
                g[grp][i] = c1_[grp][i] * l1 + c2_[grp][i] * l2;
    }

    static float reduce_max(const float* acc)
    {
        float m = acc[0];
        for (unsigned j = 1; j < kLanes; ++j)
            m = std::max(m, acc[j]);
        return m;
    }

    void run_trellis(std::size_t infoBits)
    {
        const std::size_t steps = infoBits + ConvCode::kMemory;
        alpha_.resize((steps + 1) * S);
        app_.resize(2 * steps);
        infoApp_.resize(steps);
        std::fill(alpha_.begin(), alpha_.begin() + S, kNegInf);
        alpha_[0] = 0.0f;

        std::array<Half, 4> g{};
        Half ae{}, ao{};
        for (std::size_t k = 0; k < steps; ++k)
        {
            branch_metrics(mother_[2 * k], mother_[2 * k + 1], g);
            const float* a = &alpha_[k * S];
            float* an = &alpha_[(k + 1) * S];
            for (unsigned i = 0; i < kHalf; ++i)
            {
                ae[i] = a[2 * i];
                ao[i] = a[2 * i + 1];
            }
            for (unsigned i = 0; i < kHalf; ++i)
            {
                an[i] = std::max(ae[i] + g[0][i], ao[i] + g[1][i]);
                an[i + kHalf] = std::max(ae[i] + g[2][i], ao[i] + g[3][i]);
            }
            // State 0 stays reachable through the all-zero path.
            const float ref = an[0];
            for (unsigned ns = 0; ns < S; ++ns)
                an[ns] -= ref;
        }

        std::array<float, S> beta{};
        beta.fill(kNegInf);
        beta[0] = 0.0f;
        Half be{}, bo{};
        std::array<Half, 4> m{};
        for (std::size_t kk = steps; kk-- > 0;)
        {
            branch_metrics(mother_[2 * kk], mother_[2 * kk + 1], g);
            const float* a = &alpha_[kk * S];
            for (unsigned i = 0; i < kHalf; ++i)
            {
                ae[i] = a[2 * i];
                ao[i] = a[2 * i + 1];
            }
            for (unsigned i = 0; i < kHalf; ++i)
            {
                const float b0 = beta[i];
                const float b1 = beta[i + kHalf];
                m[0][i] = g[0][i] + b0;
                m[1][i] = g[1][i] + b0;
                m[2][i] = g[2][i] + b1;
                m[3][i] = g[3][i] + b1;
                be[i] = std::max(m[0][i], m[2][i]);
                bo[i] = std::max(m[1][i], m[3][i]);
                m[0][i] += ae[i];
                m[1][i] += ao[i];
                m[2][i] += ae[i];
                m[3][i] += ao[i];
            }

            // Lane-wise maxima per hypothesis: u = 0/1, c1 = 0/1, c2 = 0/1.
            // Transitions outside a hypothesis are pushed down by an additive penalty.
            float acc[6][kLanes];
            for (auto& row : acc)
                std::fill(std::begin(row), std::end(row), kNegInf);
            for (unsigned grp = 0; grp < 4; ++grp)
            {
                const unsigned uIdx = grp >> 1;
                for (unsigned i0 = 0; i0 < kHalf; i0 += kLanes)
                {
                    const float* v = &m[grp][i0];
                    const float* p10 = &pen_[0][grp][i0];
                    const float* p11 = &pen_[1][grp][i0];
                    const float* p20 = &pen_[2][grp][i0];
                    const float* p21 = &pen_[3][grp][i0];
                    float accU[kLanes], a10[kLanes], a11[kLanes], a20[kLanes], a21[kLanes];
                    for (unsigned j = 0; j < kLanes; ++j)
                    {
                        accU[j] = std::max(acc[uIdx][j], v[j]);
                        a10[j] = std::max(acc[2][j], v[j] + p10[j]);
                        a11[j] = std::max(acc[3][j], v[j] + p11[j]);
                        a20[j] = std::max(acc[4][j], v[j] + p20[j]);
                        a21[j] = std::max(acc[5][j], v[j] + p21[j]);
                    }
                    std::copy(std::begin(accU), std::end(accU), acc[uIdx]);
                    std::copy(std::begin(a10), std::end(a10), acc[2]);
                    std::copy(std::begin(a11), std::end(a11), acc[3]);
                    std::copy(std::begin(a20), std::end(a20), acc[4]);
                    std::copy(std::begin(a21), std::end(a21), acc[5]);
                }
            }
            infoApp_[kk] = reduce_max(acc[1]) - reduce_max(acc[0]);
            app_[2 * kk] = reduce_max(acc[3]) - reduce_max(acc[2]);
            app_[2 * kk + 1] = reduce_max(acc[5]) - reduce_max(acc[4]);

            // State 0 can always reach the terminating state.
            const float ref = be[0];
            for (unsigned i = 0; i < kHalf; ++i)
            {
                beta[2 * i] = be[i] - ref;
                beta[2 * i + 1] = bo[i] - ref;
            }
        }
    }

    CodeRate rate_;
    std::array<Half, 4> c1_{};
    std::array<Half, 4> c2_{};
    // Additive masks excluding transitions from the hypotheses c1 = 0, c1 = 1, c2 = 0, c2 = 1.
    std::array<std::array<Half, 4>, 4> pen_{};
    std::vector<float> mother_;
    std::vector<float> alpha_;
    std::vector<float> app_;
    std::vector<float> infoApp_;
};

} // namespace stbcsim

#endif
