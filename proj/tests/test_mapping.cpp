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

#include <stbcsim/mapping.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace stbcsim;

namespace
{
using Bits = std::vector<std::uint8_t>;

Bits label_bits(int label, int b)
{
    Bits bits(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k)
        bits[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>((label >> (b - 1 - k)) & 1);
    return bits;
}

// Full-sum LLR over the whole 2-D constellation, complex Gaussian noise of total variance v.
std::vector<double> full_sum_llr(Complex y, double v, const Constellation& c)
{
    const int b = c.bits_per_symbol();
    std::vector<double> num(static_cast<std::size_t>(b), 0.0), den(static_cast<std::size_t>(b), 0.0);
    for (int label = 0; label < c.order(); ++label)
    {
        const double w = std::exp(-std::norm(y - c.points()[static_cast<std::size_t>(label)]) / v);
        for (int k = 0; k < b; ++k)
            ((label >> (b - 1 - k)) & 1 ? num : den)[static_cast<std::size_t>(k)] += w;
    }
    std::vector<double> llr(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k)
        llr[static_cast<std::size_t>(k)] = std::log(num[static_cast<std::size_t>(k)]) - std::log(den[static_cast<std::size_t>(k)]);
    return llr;
}

// Soft symbol by direct enumeration of the posterior over all points.
std::pair<Complex, double> enumerate_soft(const std::vector<double>& llr, const Constellation& c)
{
    Complex mean{};
    double power = 0.0;
    const int b = c.bits_per_symbol();
    for (int label = 0; label < c.order(); ++label)
    {
        double p = 1.0;
        for (int k = 0; k < b; ++k)
        {
            const double l = llr[static_cast<std::size_t>(k)];
            const double p1 = std::isinf(l) ? (l > 0 ? 1.0 : 0.0) : std::exp(l) / (1.0 + std::exp(l));
            p *= ((label >> (b - 1 - k)) & 1) ? p1 : 1.0 - p1;
        }
        const Complex s = c.points()[static_cast<std::size_t>(label)];
        mean += p * s;
        power += p * std::norm(s);
    }
    return {mean, power - std::norm(mean)};
}

const int kOrders[] = {2, 4, 6, 8};
} // namespace

TEST_CASE("map_bits - QPSK corners")
{
    const Constellation q(2);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(q.map(Bits{0, 0}) - Complex(-r, -r)) < 1e-15);
    CHECK(std::abs(q.map(Bits{1, 1}) - Complex(r, r)) < 1e-15);
    for (const Complex& p : q.points())
        CHECK(std::abs(p) == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("map_bits - unit energy and scale")
{
    const double scale[] = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(10.0), 1.0 / std::sqrt(42.0),
                            1.0 / std::sqrt(170.0)};
    for (int i = 0; i < 4; ++i)
    {
        const Constellation c(kOrders[i]);
        double e = 0.0;
        for (const Complex& p : c.points())
            e += std::norm(p);
        CHECK(e / c.order() == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(c.levels().back() == Catch::Approx(scale[i] * (std::sqrt(c.order()) - 1)).epsilon(1e-12));
    }
}

TEST_CASE("map_bits - Gray labeling")
{
    for (int b : kOrders)
    {
        const Constellation c(b);
        const double step = c.levels()[1] - c.levels()[0];
        for (int a = 0; a < c.order(); ++a)
        {
            for (int k = 0; k < b; ++k)
            {
                const int flipped = a ^ (1 << k);
                const Complex d = c.points()[static_cast<std::size_t>(a)] - c.points()[static_cast<std::size_t>(flipped)];
                // a single bit flip moves along one axis only
                CHECK((std::abs(d.real()) < 1e-12) != (std::abs(d.imag()) < 1e-12));
            }
            for (int o = 0; o < c.order(); ++o)
            {
                const Complex d = c.points()[static_cast<std::size_t>(a)] - c.points()[static_cast<std::size_t>(o)];
                if (std::abs(std::abs(d) - step) < 1e-9)
                    CHECK(std::popcount(static_cast<unsigned>(a ^ o)) == 1);
            }
        }
    }
}

TEST_CASE("map_bits - length checks")
{
    const Constellation c(4);
    CHECK_THROWS_AS(map_bits(Bits(6, 0), c), std::invalid_argument);
    CHECK(map_bits(Bits(8, 0), c).size() == 2);
    CHECK_THROWS_AS(Constellation(3), std::invalid_argument);
    CHECK_THROWS_AS(Constellation::from_name("8psk"), std::invalid_argument);
    CHECK(Constellation::from_name("64qam").bits_per_symbol() == 6);
    CHECK(Constellation(2).name() == "qpsk");
    CHECK(Constellation(8).name() == "256qam");
}

TEST_CASE("demap_llr - QPSK examples")
{
    const Constellation q(2);
    const double r = 1.0 / std::sqrt(2.0);
    const auto llr = demap_llr(Complex(r, r), 1.0, q);
    CHECK(llr[0] == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(llr[1] == Catch::Approx(2.0).epsilon(1e-12));

    for (double l : demap_llr(Complex(0.0, 0.0), 0.3, q))
        CHECK(l == 0.0);
    // For larger Gray QAM only the sign bit of each axis is equidistant from the origin.
    for (int b : {4, 6, 8})
    {
        const auto l = demap_llr(Complex(0.0, 0.0), 0.3, Constellation(b));
        CHECK(l[0] == 0.0);
        CHECK(l[static_cast<std::size_t>(b / 2)] == 0.0);
    }

    CHECK_THROWS_AS(demap_llr(Complex(0.0, 0.0), 0.0, q), std::invalid_argument);
}

TEST_CASE("demap_llr - QPSK equals the full-sum LLR")
{
    Rng rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> vdist(0.05, 3.0);
    const Constellation q(2);
    for (int trial = 0; trial < 2000; ++trial)
    {
        const Complex y(g(rng), g(rng));
        const double v = vdist(rng);
        const auto got = demap_llr(y, v, q);
        const auto ref = full_sum_llr(y, v, q);
        for (std::size_t k = 0; k < 2; ++k)
            REQUIRE(got[k] == Catch::Approx(ref[k]).margin(1e-9));
    }
}

TEST_CASE("demap_llr - higher orders within the max-log bound")
{
    Rng rng(22);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> vdist(0.01, 1.0);
    for (int b : {4, 6})
    {
        const Constellation c(b);
        const double bound = std::log(c.order() / 2.0);
        for (int trial = 0; trial < 2000; ++trial)
        {
            const Complex y(g(rng), g(rng));
            const double v = vdist(rng);
            const auto got = demap_llr(y, v, c);
            const auto ref = full_sum_llr(y, v, c);
            for (std::size_t k = 0; k < got.size(); ++k)
            {
                REQUIRE(std::abs(got[k] - ref[k]) <= bound + 1e-9);
                if (std::abs(ref[k]) > bound)
                    REQUIRE((got[k] > 0) == (ref[k] > 0));
            }
        }
    }
}

TEST_CASE("demap_llr - scale linearity in effVar")
{
    Rng rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int b : kOrders)
    {
        const Constellation c(b);
        const Complex y(g(rng), g(rng));
        const auto a = demap_llr(y, 0.4, c);
        const auto h = demap_llr(y, 0.2, c);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(h[k] == Catch::Approx(2.0 * a[k]).epsilon(1e-12));
    }
}

TEST_CASE("soft_map - limits")
{
    for (int b : kOrders)
    {
        const Constellation c(b);
        const std::vector<double> zero(static_cast<std::size_t>(b), 0.0);
        const SoftSymbol s0 = soft_map(zero, c);
        CHECK(std::abs(s0.value) < 1e-12);
        CHECK(s0.variance == Catch::Approx(1.0).epsilon(1e-12));

        const std::vector<double> big(static_cast<std::size_t>(b), 200.0);
        const SoftSymbol s1 = soft_map(big, c);
        CHECK(std::abs(s1.value - c.points().back()) < 1e-12);
        CHECK(s1.variance < 1e-12);
    }
    CHECK_THROWS_AS(soft_map(std::vector<double>(3, 0.0), Constellation(4)), std::invalid_argument);
}

TEST_CASE("soft_map - QPSK with one certain bit")
{
    const Constellation q(2);
    const double inf = std::numeric_limits<double>::infinity();
    for (double l : {-3.0, -0.5, 0.0, 0.7, 2.5})
    {
        const std::vector<double> llr{l, inf};
        const SoftSymbol s = soft_map(llr, q);
        const auto [mean, var] = enumerate_soft(llr, q);
        CHECK(std::abs(s.value - mean) < 1e-12);
        CHECK(s.variance == Catch::Approx(var).margin(1e-12));
        CHECK(s.value.imag() == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(s.value.real() == Catch::Approx(std::tanh(l / 2.0) / std::sqrt(2.0)).margin(1e-12));
    }
}

TEST_CASE("soft_map - matches posterior enumeration")
{
    Rng rng(24);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int b : kOrders)
    {
        const Constellation c(b);
        for (int trial = 0; trial < 200; ++trial)
        {
            std::vector<double> llr(static_cast<std::size_t>(b));
            for (auto& l : llr)
                l = g(rng);
            const SoftSymbol s = soft_map(llr, c);
            const auto [mean, var] = enumerate_soft(llr, c);
            REQUIRE(std::abs(s.value - mean) < 1e-12);
            REQUIRE(s.variance == Catch::Approx(var).margin(1e-12));
            REQUIRE(s.variance >= 0.0);
            REQUIRE(s.variance <= 2.0);
        }
    }
}

TEST_CASE("symbol_posteriors - normalization")
{
    Rng rng(25);
    std::normal_distribution<double> g(0.0, 4.0);
    for (int b : kOrders)
    {
        const Constellation c(b);
        for (int trial = 0; trial < 100; ++trial)
        {
            std::vector<double> llr(static_cast<std::size_t>(b));
            for (auto& l : llr)
                l = g(rng);
            double sum = 0.0;
            for (double p : symbol_posteriors(llr, c))
                sum += p;
            REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
        }
    }
}

TEST_CASE("soft_map - round trip at certainty")
{
    for (int b : kOrders)
    {
        const Constellation c(b);
        for (const Complex& p : c.points())
        {
            const SoftSymbol s = soft_map(demap_llr(p, 1e-4, c), c);
            CHECK(std::abs(s.value - p) < 1e-9);
        }
    }
}

TEST_CASE("demap_llr - QPSK calibration over AWGN")
{
    // Empirical P(bit = 1 | LLR bin) must follow the logistic law.
    Rng rng(26);
    const Constellation q(2);
    const double v = 1.0;
    std::normal_distribution<double> g(0.0, std::sqrt(v / 2.0));
    constexpr int nBins = 16;
    constexpr double lo = -8.0, hi = 8.0;
    std::vector<double> ones(nBins, 0.0), count(nBins, 0.0), predicted(nBins, 0.0);
    const std::size_t nSymbols = 500000;
    for (std::size_t i = 0; i < nSymbols; ++i)
    {
        const int label = static_cast<int>(rng() & 3u);
        const Complex y = q.points()[static_cast<std::size_t>(label)] + Complex(g(rng), g(rng));
        const auto llr = demap_llr(y, v, q);
        const Bits bits = label_bits(label, 2);
        for (std::size_t k = 0; k < 2; ++k)
        {
            const double l = llr[k];
            if (l < lo || l >= hi)
                continue;
            const int bin = static_cast<int>((l - lo) / (hi - lo) * nBins);
            ones[static_cast<std::size_t>(bin)] += bits[k];
            count[static_cast<std::size_t>(bin)] += 1.0;
            predicted[static_cast<std::size_t>(bin)] += 1.0 / (1.0 + std::exp(-l));
        }
    }
    for (int bin = 0; bin < nBins; ++bin)
    {
        const auto i = static_cast<std::size_t>(bin);
        if (count[i] < 1000)
            continue;
        CHECK(ones[i] / count[i] == Catch::Approx(predicted[i] / count[i]).margin(0.03));
    }
}
