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

#ifndef STBCSIM_TYPES_HPP
#define STBCSIM_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace stbcsim
{

using Complex = std::complex<double>;

// Stacked real quantities are stored row-major so that a matrix row is one
// real dimension of the stacking order [re, im, re, im, ...].
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Bounded-size types for the per-channel-use hot path: at most 3 receive
// antennas, T = 2 and Q = 4, so 12 stacked observations and 8 stacked symbols.
inline constexpr int kMaxObs = 12;
inline constexpr int kMaxStreams = 8;
using StreamMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxStreams, kMaxStreams>;
using StreamVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxStreams, 1>;

using Rng = std::mt19937_64;

namespace detail
{
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
} // namespace detail

/// Independent generator keyed by (seed, a, b). Used to give every
/// (sweep point, frame) its own stream so results do not depend on the
/// number of worker threads.
inline Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
{
    std::uint64_t k = detail::splitmix64(seed);
    k = detail::splitmix64(k ^ detail::splitmix64(a + 0x632be59bd9b4e019ULL));
    k = detail::splitmix64(k ^ detail::splitmix64(b + 0x85157af5ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return Rng(seq);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace stbcsim

#endif
