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

#ifndef STBCSIM_CAPACITY_HPP
#define STBCSIM_CAPACITY_HPP

#include "channel.hpp"
#include "stcode.hpp"
#include "types.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace stbcsim
{

struct CapacitySample
{
    double cInst;
    double gamma;
};

struct MonteCarloMean
{
    double mean = 0.0;
    double stdErr = 0.0;
    std::size_t nTrials = 0;
};

namespace detail
{
// log det(I + c * G G^T), evaluated on the smaller Gram side (Sylvester) through
// a Cholesky factor so that high SNR does not overflow.
inline double log_det_identity_plus(const RealMatrix& geq, double c)
{
    if (!geq.allFinite())
        throw std::invalid_argument("capacity: channel matrix is not finite");
    const Eigen::Index n = geq.cols();
    Eigen::MatrixXd m = c * (geq.transpose() * geq);
    m.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("capacity: factorization failed");
    double logDet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        logDet += 2.0 * std::log(llt.matrixL()(i, i));
    return logDet;
}

inline MonteCarloMean summarize(const std::vector<double>& xs)
{
    MonteCarloMean r;
    r.nTrials = xs.size();
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    r.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1)
    {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - r.mean) * (x - r.mean);
        r.stdErr = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return r;
}
} // namespace detail

/// C = 1/(2T) log2 det(I + (p0 / sigma2) Geq Geq^T) in bits per channel use.
inline double instantaneous_capacity(const RealMatrix& geq, double p0, double sigma2, int T)
{
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("instantaneous_capacity: sigma2 must be positive");
    return detail::log_det_identity_plus(geq, p0 / sigma2) / (2.0 * T * std::log(2.0));
}

/// Ergodic capacity at a given SNR (received power per antenna over N0, in dB).
/// Symbols have power 1/2 per real dimension, so p0 / sigma2 equals the linear SNR.
inline MonteCarloMean mean_capacity(SchemeId scheme, double snrDb, int mR, std::span<const double> alphas,
                                    std::size_t nTrials, Rng& rng)
{
    if (nTrials < 1)
        throw std::invalid_argument("mean_capacity: need at least one trial");
    const DispersionSet d = dispersion_set(scheme);
    const double sigma2 = 1.0 / (2.0 * db_to_linear(snrDb));
    std::vector<double> samples;
    samples.reserve(nTrials);
    for (std::size_t i = 0; i < nTrials; ++i)
    {
        const ComplexMatrix h = draw_channel(mR, d.mT, rng);
        samples.push_back(instantaneous_capacity(equivalent_channel(h, alphas, d), 0.5, sigma2, d.T));
    }
    return detail::summarize(samples);
}

/// Monte-Carlo estimate of 1/2 E[det(I + gammaX Geq Geq^T)^(-1/2)].
inline MonteCarloMean pep_determinant_bound(SchemeId scheme, double gammaX, int mR, std::span<const double> alphas,
                                            std::size_t nTrials, Rng& rng)
{
    if (!(gammaX >= 0.0))
        throw std::invalid_argument("pep_determinant_bound: gamma must be non-negative");
    if (nTrials < 1)
        throw std::invalid_argument("pep_determinant_bound: need at least one trial");
    const DispersionSet d = dispersion_set(scheme);
    std::vector<double> samples;
    samples.reserve(nTrials);
    for (std::size_t i = 0; i < nTrials; ++i)
    {
        const ComplexMatrix h = draw_channel(mR, d.mT, rng);
        const double logDet = detail::log_det_identity_plus(equivalent_channel(h, alphas, d), gammaX);
        samples.push_back(0.5 * std::exp(-0.5 * logDet));
    }
    return detail::summarize(samples);
}

} // namespace stbcsim

#endif
