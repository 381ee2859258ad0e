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

#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

#include <stbcsim/channel.hpp>

#include <cmath>
#include <vector>

using namespace stbcsim;
using Catch::Approx;

TEST_CASE("draw_channel - unit variance circular entries")
{
    Rng rng(1);
    const int n = 100000;
    double power = 0.0, re2 = 0.0, im2 = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const Complex h = draw_channel(1, 1, rng)(0, 0);
        power += std::norm(h);
        re2 += h.real() * h.real();
        im2 += h.imag() * h.imag();
    }
    CHECK(std::abs(power / n - 1.0) < 0.02);
    CHECK(std::abs(re2 / n - 0.5) < 0.01);
    CHECK(std::abs(im2 / n - 0.5) < 0.01);
}

TEST_CASE("draw_channel - deterministic for a seed")
{
    Rng a(77), b(77);
    const ComplexMatrix h1 = draw_channel(3, 2, a);
    const ComplexMatrix h2 = draw_channel(3, 2, b);
    CHECK(h1 == h2);
    CHECK((h1.rows() == 3 && h1.cols() == 2));
    CHECK_THROWS_AS(draw_channel(0, 2, a), std::invalid_argument);
}

TEST_CASE("expand_g - rotation form")
{
    ComplexMatrix h(1, 1);
    h(0, 0) = {0.3, -1.2};
    const RealMatrix g = expand_g(h, 1);
    RealMatrix expected(2, 2);
    expected << 0.3, 1.2, -1.2, 0.3;
    CHECK((g - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expand_g - complex multiplication isomorphism")
{
    Rng rng(2);
    for (int T : {1, 2})
    {
        const ComplexMatrix h = draw_channel(3, 2, rng);
        const RealMatrix g = expand_g(h, T);
        // z holds T slots per transmit antenna; the product per slot is h * z(:, t)
        ComplexMatrix z(2, T);
        for (int a = 0; a < 2; ++a)
            for (int t = 0; t < T; ++t)
                z(a, t) = testutil::random_symbols(1, rng)[0];
        const ComplexMatrix hz = h * z;
        CHECK((g * stack_matrix(z) - stack_matrix(hz)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("expand_g - real channel gives diagonal blocks")
{
    ComplexMatrix h(2, 2);
    h << 1.0, 2.0, 3.0, 4.0;
    const RealMatrix g = expand_g(h, 2);
    for (int r = 0; r < 2; ++r)
        for (int a = 0; a < 2; ++a)
        {
            const RealMatrix blk = g.block(4 * r, 4 * a, 4, 4);
            CHECK((blk - h(r, a).real() * RealMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("build_b - attenuation layout")
{
    const std::vector<double> alphas{1.0, 0.25};
    const RealMatrix b = build_b(alphas, 2);
    RealVector expected(8);
    expected << 1, 1, 1, 1, 0.5, 0.5, 0.5, 0.5;
    CHECK((b.diagonal() - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b - RealMatrix(expected.asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

    const std::vector<double> ones{1.0, 1.0, 1.0};
    CHECK(build_b(ones, 2) == RealMatrix::Identity(12, 12));

    const std::vector<double> neg{1.0, -0.1};
    CHECK_THROWS_AS(build_b(neg, 1), std::invalid_argument);
}

TEST_CASE("build_b - minus 12 dB second antenna")
{
    const std::vector<double> db{0.0, -12.0};
    const auto alphas = alphas_from_db(db);
    const RealMatrix b = build_b(alphas, 1);
    CHECK(b(2, 2) == Approx(0.2512).margin(1e-4));
    CHECK(b(3, 3) == Approx(std::pow(10.0, -0.6)).epsilon(1e-12));
}

TEST_CASE("equivalent_channel - equals B G F")
{
    Rng rng(3);
    for (SchemeId id : kAllSchemes)
    {
        const auto d = dispersion_set(id);
        for (int mR : {2, 3})
        {
            std::vector<double> alphas{1.0, 0.3, 0.05};
            alphas.resize(static_cast<std::size_t>(mR));
            const ComplexMatrix h = draw_channel(mR, 2, rng);
            const auto full = ChannelRealization::assemble(h, alphas, d);
            const RealMatrix fast = equivalent_channel(h, alphas, d);
            CHECK((full.Geq - fast).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("channel - complex and stacked real models agree")
{
    Rng rng(4);
    for (SchemeId id : kAllSchemes)
    {
        const auto d = dispersion_set(id);
        const int mR = 3;
        const std::vector<double> alphas{1.0, 0.5, 0.125};
        const ComplexMatrix h = draw_channel(mR, 2, rng);
        const auto s = testutil::random_symbols(d.Q, rng);
        ComplexMatrix w(mR, d.T);
        for (int r = 0; r < mR; ++r)
            for (int t = 0; t < d.T; ++t)
                w(r, t) = testutil::random_symbols(1, rng)[0] * 0.1;

        // Y = A H X + W in complex arithmetic.
        ComplexMatrix a = ComplexMatrix::Zero(mR, mR);
        for (int r = 0; r < mR; ++r)
            a(r, r) = std::sqrt(alphas[static_cast<std::size_t>(r)]);
        const ComplexMatrix y = a * h * encode(d, s) + w;

        const RealMatrix geq = equivalent_channel(h, alphas, d);
        const RealVector yReal = geq * stack_symbols(s) + stack_matrix(w);
        INFO(to_token(id));
        CHECK((yReal - stack_matrix(y)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("channel - alamouti equivalent channel is orthogonal")
{
    Rng rng(5);
    const auto d = dispersion_set(SchemeId::Alamouti);
    for (int trial = 0; trial < 100; ++trial)
    {
        const ComplexMatrix h = draw_channel(2, 2, rng);
        const std::vector<double> ones{1.0, 1.0};
        const RealMatrix geq = equivalent_channel(h, ones, d);
        const double c = d.normScale * d.normScale * h.cwiseAbs2().sum();
        REQUIRE((geq.transpose() * geq - c * RealMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);

        // Unequal powers keep the design orthogonal with a weighted gain.
        const std::vector<double> unequal{1.0, 0.1};
        const RealMatrix geqU = equivalent_channel(h, unequal, d);
        const RealMatrix gram = geqU.transpose() * geqU;
        REQUIRE((gram - gram(0, 0) * RealMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("transmit - noise behaviour")
{
    Rng rng(6);
    SECTION("noiseless identity channel")
    {
        const RealMatrix eye = RealMatrix::Identity(4, 4);
        const RealVector s = testutil::random_vector(4, rng);
        CHECK((transmit(eye, s, 0.0, rng) - s).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("noise energy")
    {
        const auto d = dispersion_set(SchemeId::Golden);
        const std::vector<double> ones{1.0, 1.0};
        const RealMatrix geq = equivalent_channel(draw_channel(2, 2, rng), ones, d);
        const double sigma2 = 0.3;
        const NoiseModel noise(sigma2);
        double energy = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i)
        {
            const RealVector s = stack_symbols(testutil::random_symbols(d.Q, rng));
            energy += (transmit(geq, s, noise, rng) - geq * s).squaredNorm();
        }
        const double expected = 2.0 * 2 * d.T * sigma2;
        CHECK(std::abs(energy / n / expected - 1.0) < 0.03);
    }
    SECTION("zero attenuation leaves pure noise")
    {
        const auto d = dispersion_set(SchemeId::LinearDispersion);
        const std::vector<double> alphas{1.0, 0.0};
        const RealMatrix geq = equivalent_channel(draw_channel(2, 2, rng), alphas, d);
        CHECK(geq.bottomRows(2 * d.T).cwiseAbs().maxCoeff() == 0.0);
        const RealVector s = stack_symbols(testutil::random_symbols(d.Q, rng));
        const RealVector y = transmit(geq, s, 1e-6, rng);
        CHECK(y.tail(2 * d.T).cwiseAbs().maxCoeff() < 1e-2);
    }
    CHECK_THROWS_AS(NoiseModel(0.0), std::invalid_argument);
}

TEST_CASE("sigma2_from_ebn0 - convention")
{
    // eta = 4, Eb/N0 = 0 dB: N0 = 1/4, variance per real dimension 1/8.
    CHECK(sigma2_from_ebn0(0.0, 4.0) == Approx(0.125).epsilon(1e-15));
    CHECK(sigma2_from_ebn0(10.0, 2.0) == Approx(0.025).epsilon(1e-12));
}
