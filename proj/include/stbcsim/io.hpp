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

#ifndef STBCSIM_IO_HPP
#define STBCSIM_IO_HPP

#include "capacity.hpp"
#include "harness.hpp"
#include "mapping.hpp"

#include <json.hpp>

#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace stbcsim::io
{

inline constexpr int kSchemaVersion = 1;

/// Everything a CLI run needs; a config file fills it, flags override it.
struct RunConfig
{
    std::string scheme = "golden";
    int eta = 4;
    int rx = 2;
    std::vector<double> alphaDb{0.0};
    std::string ebn0 = "0:1:10";
    int iterations = 3;
    std::uint64_t seed = 1;
    std::uint64_t minFrameErrors = 100;
    std::uint64_t maxBits = 50'000'000;
    std::size_t frameInfoBits = 9600;
    int coherenceSlots = 1;
    std::optional<std::string> modulation;
    std::optional<std::string> codeRate;
    double targetBer = 1e-4;
    std::size_t trials = 100000;
    std::string out;
};

/// Expands a single value to the alpha_1 = 0 dB profile, or checks a full list.
inline std::vector<double> expand_alpha_db(const std::vector<double>& alphaDb, int rx)
{
    if (alphaDb.size() == 1)
        return rx == 1 ? std::vector<double>{alphaDb[0]} : alpha_profile(rx, alphaDb[0]);
    if (static_cast<int>(alphaDb.size()) != rx)
        throw std::invalid_argument("alpha_db: give one value (alpha_2 = alpha_3) or one per receive antenna");
    return alphaDb;
}

/// Resolves the scheme-table configuration and applies optional overrides; eta is
/// recomputed from the final modulation and code rate.
inline Scenario to_scenario(const RunConfig& c)
{
    Scenario s = resolve_scenario(parse_scheme(c.scheme), c.eta, c.rx, expand_alpha_db(c.alphaDb, c.rx));
    if (c.modulation)
        s.bitsPerSymbol = Constellation::from_name(*c.modulation).bits_per_symbol();
    if (c.codeRate)
        s.codeRate = parse_code_rate(*c.codeRate);
    s.eta = s.spectral_efficiency();
    s.iterations = c.iterations;
    s.seed = c.seed;
    s.frameInfoBits = c.frameInfoBits;
    if (c.coherenceSlots < 1)
        throw std::invalid_argument("coherence_slots must be at least 1");
    s.coherenceSlots = c.coherenceSlots;
    return s;
}

inline StopRule to_stop_rule(const RunConfig& c) { return {c.minFrameErrors, c.maxBits}; }

inline std::string ebn0_from_json(const nlohmann::json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number())
        return std::to_string(v.get<double>());
    throw std::invalid_argument("config: ebn0 must be a 'start:step:stop' string or a number");
}

/// Applies the keys of a JSON config object on top of c. Unknown keys are errors.
inline void apply_config(const nlohmann::json& j, RunConfig& c)
{
    if (!j.is_object())
        throw std::invalid_argument("config: top level must be an object");
    for (const auto& [key, v] : j.items())
    {
        try
        {
            if (key == "scheme")
                c.scheme = v.get<std::string>();
            else if (key == "eta")
                c.eta = v.get<int>();
            else if (key == "rx" || key == "rx_antennas")
                c.rx = v.get<int>();
            else if (key == "alpha_db")
                c.alphaDb = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
            else if (key == "ebn0")
                c.ebn0 = ebn0_from_json(v);
            else if (key == "iterations")
                c.iterations = v.get<int>();
            else if (key == "seed")
                c.seed = v.get<std::uint64_t>();
            else if (key == "min_frame_errors")
                c.minFrameErrors = v.get<std::uint64_t>();
            else if (key == "max_bits")
                c.maxBits = static_cast<std::uint64_t>(v.get<double>());
            else if (key == "frame_info_bits")
                c.frameInfoBits = v.get<std::size_t>();
            else if (key == "coherence_slots")
                c.coherenceSlots = v.get<int>();
            else if (key == "modulation")
                c.modulation = v.get<std::string>();
            else if (key == "code_rate")
                c.codeRate = v.get<std::string>();
            else if (key == "target_ber")
                c.targetBer = v.get<double>();
            else if (key == "trials")
                c.trials = v.get<std::size_t>();
            else if (key == "out")
                c.out = v.get<std::string>();
            else
                throw std::invalid_argument("config: unknown key '" + key + "'");
        }
        catch (const nlohmann::json::exception& e)
        {
            throw std::invalid_argument("config: bad value for '" + key + "': " + e.what());
        }
    }
}

inline RunConfig parse_config(std::istream& in)
{
    RunConfig c;
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    apply_config(j, c);
    return c;
}

inline nlohmann::json to_json(const Scenario& s, const SimPoint& p)
{
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["scheme"] = std::string(to_token(s.scheme));
    j["eta"] = s.eta;
    j["modulation"] = Constellation(s.bitsPerSymbol).name();
    j["code_rate"] = std::string(to_token(s.codeRate));
    j["rx"] = s.rxAntennas;
    j["alpha_db"] = s.alphaDb;
    j["iterations"] = s.iterations;
    j["frame_info_bits"] = s.frameInfoBits;
    j["seed"] = s.seed;
    j["ebn0_db"] = p.ebn0Db;
    j["bits"] = p.bitsSimulated;
    j["bit_errors"] = p.bitErrors;
    j["frames"] = p.framesSimulated;
    j["frame_errors"] = p.frameErrors;
    j["ber"] = p.ber;
    j["ci95"] = p.berCi95;
    j["ci_low"] = p.ciLow;
    j["ci_high"] = p.ciHigh;
    j["upper_bound_only"] = p.upperBoundOnly;
    j["bit_errors_per_iteration"] = p.bitErrorsPerIteration;
    j["frame_errors_per_iteration"] = p.frameErrorsPerIteration;
    return j;
}

inline SimPoint point_from_json(const nlohmann::json& j)
{
    if (j.value("schema_version", 0) != kSchemaVersion)
        throw std::invalid_argument("results: unsupported schema_version");
    SimPoint p;
    p.ebn0Db = j.at("ebn0_db").get<double>();
    p.bitsSimulated = j.at("bits").get<std::uint64_t>();
    p.bitErrors = j.at("bit_errors").get<std::uint64_t>();
    p.framesSimulated = j.at("frames").get<std::uint64_t>();
    p.frameErrors = j.at("frame_errors").get<std::uint64_t>();
    p.ber = j.at("ber").get<double>();
    p.berCi95 = j.at("ci95").get<double>();
    p.ciLow = j.at("ci_low").get<double>();
    p.ciHigh = j.at("ci_high").get<double>();
    p.upperBoundOnly = j.at("upper_bound_only").get<bool>();
    p.bitErrorsPerIteration = j.at("bit_errors_per_iteration").get<std::vector<std::uint64_t>>();
    p.frameErrorsPerIteration = j.at("frame_errors_per_iteration").get<std::vector<std::uint64_t>>();
    return p;
}

/// One JSON object per line per point.
inline void write_jsonl(std::ostream& os, const Curve& c)
{
    for (const SimPoint& p : c.points)
        os << to_json(c.scenario, p).dump() << '\n';
}

inline std::vector<SimPoint> read_jsonl(std::istream& is)
{
    std::vector<SimPoint> out;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty())
            out.push_back(point_from_json(nlohmann::json::parse(line)));
    return out;
}

inline void write_csv_header(std::ostream& os)
{
    os << "scheme,eta,rx,alpha2_db,ebn0_db,bits,bit_errors,frames,frame_errors,ber,ci95\n";
}

inline void write_csv(std::ostream& os, const Curve& c, bool header = true)
{
    if (header)
        write_csv_header(os);
    const Scenario& s = c.scenario;
    const double alpha2 = s.alphaDb.size() > 1 ? s.alphaDb[1] : 0.0;
    for (const SimPoint& p : c.points)
    {
        std::ostringstream row;
        row.precision(10);
        row << to_token(s.scheme) << ',' << s.eta << ',' << s.rxAntennas << ',' << alpha2 << ',' << p.ebn0Db << ','
            << p.bitsSimulated << ',' << p.bitErrors << ',' << p.framesSimulated << ',' << p.frameErrors << ','
            << p.ber << ',' << p.berCi95 << '\n';
        os << row.str();
    }
}

inline void write_capacity_csv_header(std::ostream& os) { os << "scheme,snr_db,mean_capacity,std_err,n_trials\n"; }

inline void write_capacity_row(std::ostream& os, SchemeId scheme, double snrDb, const MonteCarloMean& m)
{
    std::ostringstream row;
    row.precision(10);
    row << to_token(scheme) << ',' << snrDb << ',' << m.mean << ',' << m.stdErr << ',' << m.nTrials << '\n';
    os << row.str();
}

} // namespace stbcsim::io

#endif
