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

#ifndef STBCSIM_DETECTOR_HPP
#define STBCSIM_DETECTOR_HPP

#include "fec.hpp"
#include "mapping.hpp"
#include "types.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace stbcsim
{

/// Per-stream estimates of the 2Q stacked symbol components of one channel
/// use. Even index p is the real part of symbol p/2, odd p the imaginary part.
/// sHat is bias-corrected; the raw filter output is bias[p] * sHat[p].
struct EqualizedStream
{
    std::vector<double> sHat;
    std::vector<double> bias;
    std::vector<double> effVar;
    std::vector<std::uint8_t> degenerate;

    void resize(std::size_t n)
    {
        sHat.assign(n, 0.0);
        bias.assign(n, 1.0);
        effVar.assign(n, 1.0);
        degenerate.assign(n, 0);
    }
};

enum class Stage
{
    Mmse,
    Pic
};

/// Sufficient statistics of one channel use: R = Geq^T Geq and z = Geq^T y.
/// Both detection stages only need these.
struct GramSystem
{
    StreamMatrix R;
    StreamVector z;
};

template <typename Mat, typename Vec>
GramSystem make_gram(const Mat& geq, const Vec& y)
{
    // Small fixed-bound sizes: plain loops beat the general product kernels here.
    const Eigen::Index rows = geq.rows();
    const Eigen::Index n = geq.cols();
    GramSystem g;
    g.R.resize(n, n);
    g.z.resize(n);
    for (Eigen::Index p = 0; p < n; ++p)
    {
        double zp = 0.0;
        for (Eigen::Index r = 0; r < rows; ++r)
            zp += geq(r, p) * y(r);
        g.z(p) = zp;
        for (Eigen::Index q = p; q < n; ++q)
        {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < rows; ++r)
                acc += geq(r, p) * geq(r, q);
            g.R(p, q) = acc;
            g.R(q, p) = acc;
        }
    }
    return g;
}

namespace detail
{
inline constexpr double kDegenerateNorm = 1e-14;
}

/// Linear MMSE for symbol components of variance 1/2:
///   raw_p = 1/2 g_p^T (1/2 Geq Geq^T + sigma2 I)^-1 y = [(R + 2 sigma2 I)^-1 z]_p,
/// with bias mu_p = 1 - 2 sigma2 [(R + 2 sigma2 I)^-1]_pp and unbiased error
/// variance (1 - mu_p) / (2 mu_p).
inline void mmse_from_gram(const GramSystem& g, double sigma2, EqualizedStream& out)
{
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("mmse_estimate: sigma2 must be positive");
    const Eigen::Index n = g.R.rows();
    out.resize(static_cast<std::size_t>(n));
    StreamMatrix a = g.R;
    a.diagonal().array() += 2.0 * sigma2;
    Eigen::LLT<StreamMatrix> llt(a);
    const StreamVector raw = llt.solve(g.z);
    const StreamMatrix ainv = llt.solve(StreamMatrix::Identity(n, n));
    for (Eigen::Index p = 0; p < n; ++p)
    {
        const double mu = 1.0 - 2.0 * sigma2 * ainv(p, p);
        if (g.R(p, p) <= detail::kDegenerateNorm || mu <= detail::kDegenerateNorm)
        {
            out.degenerate[p] = 1;
            out.sHat[p] = 0.0;
            out.bias[p] = 0.0;
            out.effVar[p] = 1.0;
            continue;
        }
        out.bias[p] = mu;
        out.sHat[p] = raw(p) / mu;
        out.effVar[p] = 0.5 * (1.0 - mu) / mu;
    }
}

/// Soft parallel interference cancellation followed by inverse filtering:
///   sHat_p = g_p^T (y - sum_{p' != p} g_p' s~_p') / |g_p|^2
///   effVar_p = sigma2 / |g_p|^2 + sum_{p' != p} (g_p^T g_p')^2 / |g_p|^4 v_p'
inline void pic_from_gram(const GramSystem& g, std::span<const double> soft, std::span<const double> residualVars,
                          double sigma2, EqualizedStream& out)
{
    const Eigen::Index n = g.R.rows();
    if (static_cast<Eigen::Index>(soft.size()) != n || static_cast<Eigen::Index>(residualVars.size()) != n)
        throw std::invalid_argument("pic_estimate: one soft component per stream is required");
    out.resize(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < n; ++p)
    {
        const double norm = g.R(p, p);
        if (norm <= detail::kDegenerateNorm)
        {
            out.degenerate[p] = 1;
            out.sHat[p] = 0.0;
            out.effVar[p] = 1.0;
            continue;
        }
        double acc = g.z(p);
        double iei = 0.0;
        for (Eigen::Index q = 0; q < n; ++q)
        {
            if (q == p)
                continue;
            acc -= g.R(p, q) * soft[q];
            iei += g.R(p, q) * g.R(p, q) * residualVars[q];
        }
        out.sHat[p] = acc / norm;
        out.bias[p] = 1.0;
        out.effVar[p] = sigma2 / norm + iei / (norm * norm);
    }
}

inline EqualizedStream mmse_estimate(const RealVector& y, const RealMatrix& geq, double sigma2)
{
    EqualizedStream out;
    mmse_from_gram(make_gram(geq, y), sigma2, out);
    return out;
}

inline EqualizedStream pic_estimate(const RealVector& y, const RealMatrix& geq, std::span<const double> soft,
                                    std::span<const double> residualVars, double sigma2)
{
    EqualizedStream out;
    pic_from_gram(make_gram(geq, y), soft, residualVars, sigma2, out);
    return out;
}

/// Per-stream variance of the estimate error fed to the demapper (noise plus
/// residual inter-element interference).
inline std::vector<double> effective_variance(const RealMatrix& geq, double sigma2, Stage stage,
                                              std::span<const double> residualVars = {})
{
    const RealVector zeroY = RealVector::Zero(geq.rows());
    EqualizedStream out;
    if (stage == Stage::Mmse)
    {
        mmse_from_gram(make_gram(geq, zeroY), sigma2, out);
    }
    else
    {
        const std::vector<double> soft(static_cast<std::size_t>(geq.cols()), 0.0);
        pic_from_gram(make_gram(geq, zeroY), soft, residualVars, sigma2, out);
    }
    return out.effVar;
}

/// The iterative receiver: MMSE at the first pass, soft PIC with inverse
/// filtering afterwards, exchanging extrinsic LLRs with the Max-Log-MAP decoder.
///
/// A frame is the interleaved coded bit sequence zero-padded to a whole number
/// of ST blocks; bit i of the padded sequence sits in symbol i / B. Padding
/// bits are known zeros and never reach the decoder.
class IterativeReceiver
{
public:
    IterativeReceiver(const Constellation& constellation, CodeRate rate, const Interleaver& interleaver,
                      std::size_t infoBits, int symbolsPerBlock)
        : constellation_(constellation), interleaver_(interleaver), decoder_(rate), infoBits_(infoBits),
          q_(symbolsPerBlock)
    {
        codedBits_ = ConvCode(rate).coded_length(infoBits);
        if (interleaver_.size() != codedBits_)
            throw std::invalid_argument("IterativeReceiver: interleaver length does not match the coded frame");
        const auto bitsPerBlock = static_cast<std::size_t>(constellation_.bits_per_symbol() * q_);
        blocks_ = (codedBits_ + bitsPerBlock - 1) / bitsPerBlock;
    }

    std::size_t coded_bits() const { return codedBits_; }
    std::size_t blocks() const { return blocks_; }
    std::size_t padded_bits() const
    {
        return blocks_ * static_cast<std::size_t>(constellation_.bits_per_symbol() * q_);
    }

    /// Runs nIters detection/decoding passes over one frame and returns the
    /// hard information-bit decisions after every pass.
    const std::vector<std::vector<std::uint8_t>>& detect_frame(std::span<const GramSystem> uses, double sigma2,
                                                               int nIters)
    {
        if (uses.size() != blocks_)
            throw std::invalid_argument("detect_frame: wrong number of channel uses for the frame");
        if (nIters < 1)
            throw std::invalid_argument("detect_frame: at least one iteration is required");
        const int b = constellation_.bits_per_symbol();
        const std::size_t padded = padded_bits();
        const auto streams = static_cast<std::size_t>(2 * q_);

        decisions_.assign(static_cast<std::size_t>(nIters), {});
        llrInterleaved_.assign(codedBits_, 0.0);
        llrCoded_.assign(codedBits_, 0.0);
        extInterleaved_.assign(padded, -SisoDecoder::kLlrClamp);
        soft_.assign(blocks_ * streams, 0.0);
        resid_.assign(blocks_ * streams, 0.5);

        double llr[8];
        for (int it = 0; it < nIters; ++it)
        {
            for (std::size_t u = 0; u < blocks_; ++u)
            {
                if (it == 0)
                    mmse_from_gram(uses[u], sigma2, eq_);
                else
                    pic_from_gram(uses[u], std::span<const double>(&soft_[u * streams], streams),
                                  std::span<const double>(&resid_[u * streams], streams), sigma2, eq_);
                for (int q = 0; q < q_; ++q)
                {
                    const std::size_t base = (u * static_cast<std::size_t>(q_) + static_cast<std::size_t>(q)) *
                                             static_cast<std::size_t>(b);
                    if (base >= codedBits_)
                        break;
                    const auto pr = static_cast<std::size_t>(2 * q);
                    if (eq_.degenerate[pr] || eq_.degenerate[pr + 1])
                    {
                        std::fill(llr, llr + b, 0.0);
                    }
                    else
                    {
                        const Complex sHat{eq_.sHat[pr], eq_.sHat[pr + 1]};
                        demap_llr(sHat, eq_.effVar[pr] + eq_.effVar[pr + 1], constellation_,
                                  std::span<double>(llr, static_cast<std::size_t>(b)));
                    }
                    for (int k = 0; k < b && base + static_cast<std::size_t>(k) < codedBits_; ++k)
                        llrInterleaved_[base + static_cast<std::size_t>(k)] = llr[k];
                }
            }

            interleaver_.deinterleave<double>(llrInterleaved_, llrCoded_);
            SisoOutput dec = decoder_.decode(llrCoded_, infoBits_);
            decisions_[static_cast<std::size_t>(it)] = std::move(dec.infoBits);
            if (it + 1 == nIters)
                break;

            for (double& v : dec.extrinsic)
                v = std::clamp(v, -SisoDecoder::kLlrClamp, SisoDecoder::kLlrClamp);
            interleaver_.interleave<double>(dec.extrinsic, std::span<double>(extInterleaved_.data(), codedBits_));
            for (std::size_t sym = 0; sym < blocks_ * static_cast<std::size_t>(q_); ++sym)
            {
                const SoftSymbol s = soft_map(
                    std::span<const double>(&extInterleaved_[sym * static_cast<std::size_t>(b)],
                                            static_cast<std::size_t>(b)),
                    constellation_);
                soft_[2 * sym] = s.value.real();
                soft_[2 * sym + 1] = s.value.imag();
                resid_[2 * sym] = s.varianceRe;
                resid_[2 * sym + 1] = s.varianceIm;
            }
        }
        return decisions_;
    }

private:
    Constellation constellation_;
    const Interleaver& interleaver_;
    SisoDecoder decoder_;
    std::size_t infoBits_;
    int q_;
    std::size_t codedBits_ = 0;
    std::size_t blocks_ = 0;

    EqualizedStream eq_;
    std::vector<double> llrInterleaved_;
    std::vector<double> llrCoded_;
    std::vector<double> extInterleaved_;
    std::vector<double> soft_;
    std::vector<double> resid_;
    std::vector<std::vector<std::uint8_t>> decisions_;
};

} // namespace stbcsim

#endif
