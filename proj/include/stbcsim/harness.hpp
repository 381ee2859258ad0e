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

#ifndef STBCSIM_HARNESS_HPP
#define STBCSIM_HARNESS_HPP

#include "channel.hpp"
#include "detector.hpp"
#include "fec.hpp"
#include "mapping.hpp"
#include "stcode.hpp"
#include "types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace stbcsim
{

struct Scenario
{
    SchemeId scheme = SchemeId::Golden;
    double eta = 4.0;
    int bitsPerSymbol = 4;
    CodeRate codeRate = CodeRate::Half;
    int rxAntennas = 2;
    std::vector<double> alphaDb{0.0, 0.0};
    int iterations = 3;
    std::size_t frameInfoBits = 9600;
    std::uint64_t seed = 1;
    /// Symbol durations over which a subcarrier's channel stays constant. Codes
    /// with T below this reuse one draw for coherenceSlots / T consecutive blocks;
    /// the default gives every ST block its own draw.
    int coherenceSlots = 1;

    /// B * L * R, information bits per channel use.
    double spectral_efficiency() const
    {
        return bitsPerSymbol * dispersion_set(scheme).L * rate_value(codeRate);
    }
};

/// Receive-antenna attenuation profile with the first antenna at 0 dB and all
/// others at alpha2Db.
inline std::vector<double> alpha_profile(int rxAntennas, double alpha2Db)
{
    std::vector<double> a(static_cast<std::size_t>(rxAntennas), alpha2Db);
    a[0] = 0.0;
    return a;
}

namespace detail
{
struct TableRow
{
    int eta;
    bool alamouti;
    int bitsPerSymbol;
    CodeRate rate;
};

// Modulation and code rate per spectral efficiency; the three full-rate codes share a row.
inline constexpr TableRow kSchemeTable[] = {
    {2, true, 4, CodeRate::Half},          {2, false, 2, CodeRate::Half},
    {4, true, 6, CodeRate::TwoThirds},     {4, false, 4, CodeRate::Half},
    {6, true, 8, CodeRate::ThreeQuarters}, {6, false, 6, CodeRate::Half},
};

inline std::string valid_pairs()
{
    std::string s;
    for (int eta : {2, 4, 6})
        for (SchemeId id : kAllSchemes)
        {
            if (!s.empty())
                s += ", ";
            s += "(" + std::string(to_token(id)) + ", " + std::to_string(eta) + ")";
        }
    return s;
}
} // namespace detail

inline Scenario resolve_scenario(SchemeId scheme, int eta, int rxAntennas, std::vector<double> alphaDb)
{
    const bool alamouti = scheme == SchemeId::Alamouti;
    const detail::TableRow* row = nullptr;
    for (const auto& r : detail::kSchemeTable)
        if (r.eta == eta && r.alamouti == alamouti)
            row = &r;
    if (row == nullptr)
        throw std::invalid_argument("no configuration for (" + std::string(to_token(scheme)) + ", eta=" +
                                    std::to_string(eta) + "); valid pairs: " + detail::valid_pairs());
    if (rxAntennas < 1 || rxAntennas > 3)
        throw std::invalid_argument("rx_antennas must be 1, 2 or 3");
    if (static_cast<int>(alphaDb.size()) != rxAntennas)
        throw std::invalid_argument("alpha_db needs one entry per receive antenna (" + std::to_string(rxAntennas) +
                                    ")");
    Scenario s;
    s.scheme = scheme;
    s.eta = eta;
    s.bitsPerSymbol = row->bitsPerSymbol;
    s.codeRate = row->rate;
    s.rxAntennas = rxAntennas;
    s.alphaDb = std::move(alphaDb);
    if (std::abs(s.spectral_efficiency() - eta) > 1e-12)
        throw std::logic_error("scheme table is inconsistent with eta = B * L * R");
    return s;
}

struct StopRule
{
    std::uint64_t minFrameErrors = 100;
    std::uint64_t maxBits = 50'000'000;
};

struct SimPoint
{
    double ebn0Db = 0.0;
    std::uint64_t bitsSimulated = 0;
    std::uint64_t bitErrors = 0;
    std::uint64_t framesSimulated = 0;
    std::uint64_t frameErrors = 0;
    double ber = 0.0;
    double ciLow = 0.0;
    double ciHigh = 1.0;
    double berCi95 = 0.5;
    /// No errors were observed: ber is 0 and only ciHigh is informative.
    bool upperBoundOnly = false;
    /// Bit errors after each receiver pass; the last entry equals bitErrors.
    std::vector<std::uint64_t> bitErrorsPerIteration;
    std::vector<std::uint64_t> frameErrorsPerIteration;

    double ber_at_iteration(int iteration) const
    {
        return static_cast<double>(bitErrorsPerIteration.at(static_cast<std::size_t>(iteration - 1))) /
               static_cast<double>(bitsSimulated);
    }
};

struct Curve
{
    Scenario scenario;
    std::vector<SimPoint> points;
};

struct WilsonInterval
{
    double low;
    double high;
};

inline WilsonInterval wilson95(std::uint64_t errors, std::uint64_t trials)
{
    if (trials == 0)
        return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(errors) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// Worker count: STBCSIM_WORKERS if set, otherwise the hardware concurrency.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("STBCSIM_WORKERS"))
    {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Everything about a scenario that is shared read-only by all frames.
class LinkContext
{
public:
    explicit LinkContext(const Scenario& s)
        : scenario_(s), code_(dispersion_set(s.scheme)), constellation_(s.bitsPerSymbol), conv_(s.codeRate),
          alphas_(alphas_from_db(s.alphaDb)),
          interleaver_(ConvCode(s.codeRate).coded_length(s.frameInfoBits), s.seed)
    {
        if (static_cast<int>(s.alphaDb.size()) != s.rxAntennas)
            throw std::invalid_argument("scenario: alpha_db must have one entry per receive antenna");
        if (s.iterations < 1 || s.iterations > 8)
            throw std::invalid_argument("scenario: iterations must be in 1..8");
        if (s.frameInfoBits == 0)
            throw std::invalid_argument("scenario: frame_info_bits must be positive");
        for (double a : alphas_)
            if (!(a >= 0.0))
                throw std::invalid_argument("scenario: attenuation factors must be non-negative");
    }

    const Scenario& scenario() const { return scenario_; }
    const DispersionSet& code() const { return code_; }
    const Constellation& constellation() const { return constellation_; }
    const ConvCode& conv() const { return conv_; }
    const std::vector<double>& alphas() const { return alphas_; }
    const Interleaver& interleaver() const { return interleaver_; }

private:
    Scenario scenario_;
    DispersionSet code_;
    Constellation constellation_;
    ConvCode conv_;
    std::vector<double> alphas_;
    Interleaver interleaver_;
};

struct FrameResult
{
    std::vector<std::uint64_t> bitErrors; ///< per receiver pass
};

/// Per-worker scratch: one transmit chain and one receiver.
class FrameSimulator
{
public:
    explicit FrameSimulator(const LinkContext& ctx)
        : ctx_(ctx), receiver_(ctx.constellation(), ctx.scenario().codeRate, ctx.interleaver(),
                               ctx.scenario().frameInfoBits, ctx.code().Q)
    {
    }

    const IterativeReceiver& receiver() const { return receiver_; }

    /// info bits -> encode -> interleave -> map -> ST encode -> fading + noise -> iterative receiver.
    FrameResult run(Rng& rng, double sigma2)
    {
        const Scenario& s = ctx_.scenario();
        const DispersionSet& d = ctx_.code();
        const int b = ctx_.constellation().bits_per_symbol();

        info_.resize(s.frameInfoBits);
        std::uint64_t word = 0;
        for (std::size_t i = 0; i < info_.size(); ++i)
        {
            if (i % 64 == 0)
                word = rng();
            info_[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
        }
        const std::vector<std::uint8_t> coded = ctx_.conv().encode(info_);
        padded_.assign(receiver_.padded_bits(), 0);
        ctx_.interleaver().interleave<std::uint8_t>(coded, std::span<std::uint8_t>(padded_.data(), coded.size()));

        const std::size_t blocks = receiver_.blocks();
        uses_.resize(blocks);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxObs, kMaxStreams> geq;
        StreamVector sv(2 * d.Q);
        Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxObs, 1> y;
        std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2));
        const auto blocksPerDraw = static_cast<std::size_t>(std::max(1, s.coherenceSlots / d.T));
        ComplexMatrix h;
        for (std::size_t u = 0; u < blocks; ++u)
        {
            for (int q = 0; q < d.Q; ++q)
            {
                const std::size_t off = (u * static_cast<std::size_t>(d.Q) + static_cast<std::size_t>(q)) *
                                        static_cast<std::size_t>(b);
                const Complex sym =
                    ctx_.constellation().map(std::span<const std::uint8_t>(&padded_[off], static_cast<std::size_t>(b)));
                sv(2 * q) = sym.real();
                sv(2 * q + 1) = sym.imag();
            }
            if (u % blocksPerDraw == 0)
            {
                h = draw_channel(s.rxAntennas, d.mT, rng);
                equivalent_channel_into(h, ctx_.alphas(), d, geq);
            }
            y.noalias() = geq * sv;
            for (Eigen::Index i = 0; i < y.size(); ++i)
                y(i) += gauss(rng);
            uses_[u] = make_gram(geq, y);
        }

        const auto& decisions = receiver_.detect_frame(uses_, sigma2, s.iterations);
        FrameResult r;
        r.bitErrors.reserve(decisions.size());
        for (const auto& dec : decisions)
        {
            std::uint64_t e = 0;
            for (std::size_t i = 0; i < info_.size(); ++i)
                e += dec[i] != info_[i] ? 1 : 0;
            r.bitErrors.push_back(e);
        }
        return r;
    }

private:
    const LinkContext& ctx_;
    IterativeReceiver receiver_;
    std::vector<std::uint8_t> info_;
    std::vector<std::uint8_t> padded_;
    std::vector<GramSystem> uses_;
};

/// Simulates frames until minFrameErrors frame errors (at the last receiver
/// pass) or maxBits information bits. Frame f of sweep point pointIndex draws
/// from substream(seed, pointIndex, f), and frames are folded in index order,
/// so the result does not depend on the worker count.
inline SimPoint run_point(const Scenario& scenario, double ebn0Db, const StopRule& stop, std::size_t pointIndex = 0)
{
    if (stop.minFrameErrors < 1 || stop.maxBits < 1)
        throw std::invalid_argument("run_point: stop rule needs minFrameErrors >= 1 and maxBits >= 1");
    const LinkContext ctx(scenario);
    const double sigma2 = sigma2_from_ebn0(ebn0Db, scenario.eta);
    const auto passes = static_cast<std::size_t>(scenario.iterations);

    SimPoint pt;
    pt.ebn0Db = ebn0Db;
    pt.bitErrorsPerIteration.assign(passes, 0);
    pt.frameErrorsPerIteration.assign(passes, 0);

    const unsigned workers = worker_count();
    std::vector<FrameSimulator> sims;
    sims.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        sims.emplace_back(ctx);

    const std::size_t batch = std::max<std::size_t>(2 * workers, 1);
    std::vector<FrameResult> results(batch);
    std::uint64_t nextFrame = 0;
    bool done = false;
    while (!done)
    {
        const auto simulate = [&](unsigned w, std::atomic<std::size_t>& cursor) {
            for (std::size_t i = cursor++; i < batch; i = cursor++)
            {
                Rng rng = substream(scenario.seed, pointIndex, nextFrame + i);
                results[i] = sims[w].run(rng, sigma2);
            }
        };
        std::atomic<std::size_t> cursor{0};
        if (workers == 1)
        {
            simulate(0, cursor);
        }
        else
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w)
                pool.emplace_back(simulate, w, std::ref(cursor));
        }

        for (std::size_t i = 0; i < batch && !done; ++i)
        {
            const FrameResult& r = results[i];
            for (std::size_t it = 0; it < passes; ++it)
            {
                pt.bitErrorsPerIteration[it] += r.bitErrors[it];
                pt.frameErrorsPerIteration[it] += r.bitErrors[it] > 0 ? 1 : 0;
            }
            pt.framesSimulated += 1;
            pt.bitsSimulated += scenario.frameInfoBits;
            pt.bitErrors = pt.bitErrorsPerIteration.back();
            pt.frameErrors = pt.frameErrorsPerIteration.back();
            done = pt.frameErrors >= stop.minFrameErrors || pt.bitsSimulated >= stop.maxBits;
        }
        nextFrame += batch;
    }

    pt.ber = static_cast<double>(pt.bitErrors) / static_cast<double>(pt.bitsSimulated);
    const WilsonInterval ci = wilson95(pt.bitErrors, pt.bitsSimulated);
    pt.ciLow = ci.low;
    pt.ciHigh = ci.high;
    pt.berCi95 = 0.5 * (ci.high - ci.low);
    pt.upperBoundOnly = pt.bitErrors == 0;
    return pt;
}

inline Curve sweep(const Scenario& scenario, std::span<const double> grid, const StopRule& stop)
{
    if (grid.empty())
        throw std::invalid_argument("sweep: Eb/N0 grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("sweep: Eb/N0 grid must be strictly increasing");
    Curve c;
    c.scenario = scenario;
    for (std::size_t i = 0; i < grid.size(); ++i)
        c.points.push_back(run_point(scenario, grid[i], stop, i));
    return c;
}

/// Parses "start:step:stop" (inclusive stop) or a single value.
inline std::vector<double> parse_ebn0_grid(const std::string& spec)
{
    const auto first = spec.find(':');
    if (first == std::string::npos)
        return {std::stod(spec)};
    const auto second = spec.find(':', first + 1);
    if (second == std::string::npos)
        throw std::invalid_argument("Eb/N0 grid must be 'start:step:stop'");
    const double start = std::stod(spec.substr(0, first));
    const double step = std::stod(spec.substr(first + 1, second - first - 1));
    const double stop = std::stod(spec.substr(second + 1));
    if (!(step > 0.0) || stop < start)
        throw std::invalid_argument("Eb/N0 grid needs step > 0 and stop >= start");
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i)
        grid.push_back(start + static_cast<double>(i) * step);
    return grid;
}

struct RequiredEbn0
{
    bool reached = false;
    double value = std::numeric_limits<double>::quiet_NaN();
    /// Interval obtained by interpolating the Wilson bounds instead of the BER.
    double low = std::numeric_limits<double>::quiet_NaN();
    double high = std::numeric_limits<double>::quiet_NaN();

    double half_width() const { return 0.5 * (high - low); }
};

namespace detail
{
// First crossing of target by a log-linear interpolation of (x, ber).
inline std::optional<double> crossing(std::span<const double> x, std::span<const double> ber, double target)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (ber[i] == target)
            return x[i];
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
    {
        if (ber[i] > target && ber[i + 1] < target)
        {
            const double l0 = std::log10(ber[i]);
            const double l1 = std::log10(ber[i + 1]);
            const double t = (std::log10(target) - l0) / (l1 - l0);
            return x[i] + t * (x[i + 1] - x[i]);
        }
    }
    return std::nullopt;
}
} // namespace detail

/// Eb/N0 where the curve reaches targetBer, by linear interpolation of
/// log10(BER) between the bracketing grid points. A point without errors
/// enters with its Wilson upper bound.
inline RequiredEbn0 required_ebn0(const Curve& curve, double targetBer = 1e-4)
{
    std::vector<double> x, mid, lo, hi;
    for (const SimPoint& p : curve.points)
    {
        x.push_back(p.ebn0Db);
        mid.push_back(p.bitErrors == 0 ? p.ciHigh : p.ber);
        lo.push_back(std::max(p.ciLow, 1e-12));
        hi.push_back(p.ciHigh);
    }
    RequiredEbn0 r;
    const auto v = detail::crossing(x, mid, targetBer);
    if (!v)
        return r;
    r.reached = true;
    r.value = *v;
    // Lower BER bounds cross earlier, upper bounds later.
    r.low = detail::crossing(x, lo, targetBer).value_or(x.front());
    r.high = detail::crossing(x, hi, targetBer).value_or(x.back());
    r.low = std::min(r.low, r.value);
    r.high = std::max(r.high, r.value);
    return r;
}

/// Adaptive search for the Eb/N0 at which a scenario reaches targetBer.
///
/// A cheap stop rule walks the grid from start in fixed steps until the
/// target is bracketed and bisects the bracket; the two final bracketing
/// points are then re-simulated with the full stop rule.
struct TargetSearch
{
    double targetBer = 1e-4;
    double start = 0.0;
    double step = 1.0;
    int refinements = 1;
    double lowest = -10.0;
    double highest = 45.0;
    StopRule coarse{20, 2'000'000};
    StopRule fine{};
};

struct TargetResult
{
    Curve curve; ///< full-precision points, ascending
    RequiredEbn0 required;
};

inline TargetResult find_required_ebn0(const Scenario& scenario, const TargetSearch& search)
{
    std::size_t pointIndex = 0;
    const auto coarseBelow = [&](double x) {
        const SimPoint p = run_point(scenario, x, search.coarse, 1000 + pointIndex++);
        return p.ber < search.targetBer;
    };

    double a = search.start;
    double b = search.start;
    if (coarseBelow(a))
    {
        do
        {
            b = a;
            a -= search.step;
            if (a < search.lowest)
                throw std::runtime_error("find_required_ebn0: target reached below the search range");
        } while (coarseBelow(a));
    }
    else
    {
        do
        {
            a = b;
            b += search.step;
            if (b > search.highest)
                return {Curve{scenario, {}}, RequiredEbn0{}};
        } while (!coarseBelow(b));
    }
    for (int i = 0; i < search.refinements; ++i)
    {
        const double m = 0.5 * (a + b);
        (coarseBelow(m) ? b : a) = m;
    }

    const double width = b - a;
    TargetResult out;
    out.curve.scenario = scenario;
    const auto fine = [&](double x) {
        return run_point(scenario, x, search.fine, pointIndex++);
    };
    std::vector<SimPoint> pts{fine(a), fine(b)};
    // Re-bracket with full-precision points if the coarse estimate was off.
    for (int guard = 0; guard < 8; ++guard)
    {
        if (pts.front().ber < search.targetBer && pts.front().ebn0Db - width >= search.lowest)
            pts.insert(pts.begin(), fine(pts.front().ebn0Db - width));
        else if (pts.back().ber >= search.targetBer && pts.back().bitErrors > 0 &&
                 pts.back().ebn0Db + width <= search.highest)
            pts.push_back(fine(pts.back().ebn0Db + width));
        else
            break;
    }
    out.curve.points = std::move(pts);
    out.required = required_ebn0(out.curve, search.targetBer);
    return out;
}

} // namespace stbcsim

#endif
