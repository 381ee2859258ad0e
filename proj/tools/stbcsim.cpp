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

#include <stbcsim/capacity.hpp>
#include <stbcsim/harness.hpp>
#include <stbcsim/io.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace stbcsim;

namespace
{
struct Flags
{
    std::string config;
    std::string scheme;
    int eta = 0;
    int rx = 0;
    std::vector<double> alphaDb;
    std::string ebn0;
    int iterations = 0;
    std::uint64_t seed = 0;
    std::uint64_t minFrameErrors = 0;
    double maxBits = 0;
    std::size_t frameInfoBits = 0;
    std::string modulation;
    std::string codeRate;
    double targetBer = 0;
    std::size_t trials = 0;
    std::string out;
};

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "JSON config file; flags given on the command line take precedence");
    cmd->add_option("--scheme", f.scheme, "alamouti | vblast | ld | golden");
    cmd->add_option("--eta", f.eta, "spectral efficiency in bits/s/Hz (2, 4 or 6)");
    cmd->add_option("--rx", f.rx, "receive antennas");
    cmd->add_option("--alpha-db", f.alphaDb,
                    "attenuation in dB: one value sets alpha_2 = alpha_3 with alpha_1 = 0, or one per antenna")
        ->delimiter(',');
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--out", f.out, "output file");
}

void add_link(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--ebn0", f.ebn0, "Eb/N0 grid start:step:stop in dB");
    cmd->add_option("--iterations", f.iterations, "receiver iterations (1..8)");
    cmd->add_option("--min-frame-errors", f.minFrameErrors, "stop a point after this many frame errors");
    cmd->add_option("--max-bits", f.maxBits, "stop a point after this many information bits");
    cmd->add_option("--frame-info-bits", f.frameInfoBits, "information bits per frame");
    cmd->add_option("--modulation", f.modulation, "override: qpsk | 16qam | 64qam | 256qam");
    cmd->add_option("--code-rate", f.codeRate, "override: 1/2 | 2/3 | 3/4");
}

template <typename T, typename U>
void take(const CLI::App* cmd, const char* name, const T& value, U& target)
{
    if (cmd->count(name) > 0)
        target = static_cast<U>(value);
}

io::RunConfig build_config(const CLI::App* cmd, const Flags& f)
{
    io::RunConfig c;
    if (!f.config.empty())
    {
        std::ifstream in(f.config);
        if (!in)
            throw std::invalid_argument("cannot open config file '" + f.config + "'");
        c = io::parse_config(in);
    }
    take(cmd, "--scheme", f.scheme, c.scheme);
    take(cmd, "--eta", f.eta, c.eta);
    take(cmd, "--rx", f.rx, c.rx);
    take(cmd, "--alpha-db", f.alphaDb, c.alphaDb);
    take(cmd, "--seed", f.seed, c.seed);
    take(cmd, "--out", f.out, c.out);
    if (cmd->get_option_no_throw("--ebn0") != nullptr)
    {
        take(cmd, "--ebn0", f.ebn0, c.ebn0);
        take(cmd, "--iterations", f.iterations, c.iterations);
        take(cmd, "--min-frame-errors", f.minFrameErrors, c.minFrameErrors);
        take(cmd, "--max-bits", f.maxBits, c.maxBits);
        take(cmd, "--frame-info-bits", f.frameInfoBits, c.frameInfoBits);
        if (cmd->count("--modulation") > 0)
            c.modulation = f.modulation;
        if (cmd->count("--code-rate") > 0)
            c.codeRate = f.codeRate;
    }
    if (cmd->get_option_no_throw("--target-ber") != nullptr)
        take(cmd, "--target-ber", f.targetBer, c.targetBer);
    if (cmd->get_option_no_throw("--trials") != nullptr)
        take(cmd, "--trials", f.trials, c.trials);
    return c;
}

void append_jsonl(const std::string& path, const Curve& curve)
{
    if (path.empty())
        return;
    std::ofstream os(path, std::ios::app);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    io::write_jsonl(os, curve);
}

int run_sweep(const CLI::App* cmd, const Flags& f)
{
    const io::RunConfig c = build_config(cmd, f);
    const Scenario s = io::to_scenario(c);
    const std::vector<double> grid = parse_ebn0_grid(c.ebn0);
    Curve curve;
    curve.scenario = s;
    io::write_csv_header(std::cout);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        Curve one{s, {run_point(s, grid[i], io::to_stop_rule(c), i)}};
        io::write_csv(std::cout, one, false);
        std::cout.flush();
        curve.points.push_back(one.points.front());
    }
    append_jsonl(c.out, curve);
    return 0;
}

int run_required(const CLI::App* cmd, const Flags& f)
{
    const io::RunConfig c = build_config(cmd, f);
    const Scenario s = io::to_scenario(c);
    const std::vector<double> grid = parse_ebn0_grid(c.ebn0);
    TargetSearch search;
    search.targetBer = c.targetBer;
    search.start = grid.front();
    search.step = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
    search.fine = io::to_stop_rule(c);
    const TargetResult r = find_required_ebn0(s, search);
    append_jsonl(c.out, r.curve);
    std::cout << "scheme,eta,rx,alpha2_db,target_ber,required_ebn0_db,ci_low,ci_high\n";
    std::cout << to_token(s.scheme) << ',' << s.eta << ',' << s.rxAntennas << ','
              << (s.alphaDb.size() > 1 ? s.alphaDb[1] : 0.0) << ',' << c.targetBer << ',';
    if (r.required.reached)
        std::cout << r.required.value << ',' << r.required.low << ',' << r.required.high << '\n';
    else
        std::cout << "not_reached,,\n";
    return r.required.reached ? 0 : 3;
}

int run_capacity(const CLI::App* cmd, const Flags& f, const std::string& snr)
{
    const io::RunConfig c = build_config(cmd, f);
    const SchemeId scheme = parse_scheme(c.scheme);
    const std::vector<double> alphas = alphas_from_db(io::expand_alpha_db(c.alphaDb, c.rx));
    std::ofstream file;
    if (!c.out.empty())
    {
        file.open(c.out);
        if (!file)
            throw std::runtime_error("cannot open '" + c.out + "' for writing");
    }
    std::ostream& os = c.out.empty() ? std::cout : file;
    io::write_capacity_csv_header(os);
    const std::vector<double> grid = parse_ebn0_grid(snr);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        Rng rng = substream(c.seed, 0x636170, i);
        io::write_capacity_row(os, scheme, grid[i], mean_capacity(scheme, grid[i], c.rx, alphas, c.trials, rng));
    }
    return 0;
}
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"stbcsim: link-level simulator for two-antenna space-time block codes"};
    app.require_subcommand(1);

    Flags sweepFlags, reqFlags, capFlags;
    std::string snr = "0:10:20";

    CLI::App* sweepCmd = app.add_subcommand("sweep", "BER versus Eb/N0 over a grid (CSV on stdout, JSON lines to --out)");
    add_common(sweepCmd, sweepFlags);
    add_link(sweepCmd, sweepFlags);

    CLI::App* reqCmd = app.add_subcommand("required-ebn0", "Eb/N0 needed to reach a target BER");
    add_common(reqCmd, reqFlags);
    add_link(reqCmd, reqFlags);
    reqCmd->add_option("--target-ber", reqFlags.targetBer, "target BER (default 1e-4)");

    CLI::App* capCmd = app.add_subcommand("capacity", "ergodic capacity of the equivalent channel (CSV)");
    add_common(capCmd, capFlags);
    capCmd->add_option("--snr", snr, "SNR grid start:step:stop in dB");
    capCmd->add_option("--trials", capFlags.trials, "channel realizations per SNR point");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*sweepCmd)
            return run_sweep(sweepCmd, sweepFlags);
        if (*reqCmd)
            return run_required(reqCmd, reqFlags);
        return run_capacity(capCmd, capFlags, snr);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
