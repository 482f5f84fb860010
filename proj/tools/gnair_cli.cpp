// Campaign runner: GN tables and reports, split-step verification.

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "gnair/campaign.hpp"
#include "gnair/errors.hpp"
#include "gnair/units.hpp"

namespace
{

std::vector<int> parse_formats(const std::string& list)
{
    std::vector<int> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        std::size_t used = 0;
        int v = 0;
        try
        {
            v = std::stoi(item, &used);
        }
        catch (const std::exception&)
        {
            used = 0;
        }
        if (used != item.size() || item.empty())
            throw gnair::ConfigError("--formats: '" + item + "' is not an integer");
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"GN-model link budget and AIR campaigns"};
    std::string config_path;
    std::string mode = "gn", profile = "desk", shaping, formats, out;
    std::uint64_t seed = 0, samples = 0;
    std::vector<double> nlc;
    int workers = 0;
    bool quiet = false;

    app.add_option("--config", config_path, "JSON configuration")->required();
    app.add_option("--mode", mode, "gn, ssfm or both")->check(CLI::IsMember({"gn", "ssfm", "both"}));
    app.add_option("--profile", profile, "desk or full")->check(CLI::IsMember({"desk", "full"}));
    auto* seed_opt = app.add_option("--seed", seed, "RNG / scrambling seed");
    auto* samples_opt = app.add_option("--qmc-samples", samples, "QMC points per eta estimate");
    app.add_option("--out", out, "output directory");
    app.add_option("--formats", formats, "comma-separated QAM orders, e.g. 64,256,1024");
    app.add_option("--shaping", shaping, "uniform, mb or both")->check(CLI::IsMember({"uniform", "mb", "both"}));
    app.add_option("--nlc", nlc, "NLC bandwidth in GHz (repeatable, 0 = EDC)")->take_all();
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
    app.add_flag("-q,--quiet", quiet, "no progress output");
    CLI11_PARSE(app, argc, argv);

    try
    {
        gnair::CampaignOptions o;
        o.mode = mode == "gn" ? gnair::RunMode::Gn : mode == "ssfm" ? gnair::RunMode::Ssfm : gnair::RunMode::Both;
        o.profile = profile == "full" ? gnair::RunProfile::Full : gnair::RunProfile::Desk;
        if (*seed_opt)
            o.seed = seed;
        if (*samples_opt)
            o.qmc_samples = samples;
        if (!out.empty())
            o.output_dir = out;
        if (!formats.empty())
            o.formats = parse_formats(formats);
        if (!shaping.empty())
            o.shaping = shaping == "uniform" ? gnair::ShapingSelection::Uniform
                        : shaping == "mb"    ? gnair::ShapingSelection::MaxwellBoltzmann
                                             : gnair::ShapingSelection::Both;
        if (!nlc.empty())
        {
            std::vector<double> hz;
            for (double g : nlc)
                hz.push_back(g * gnair::units::GHz);
            o.nlc_bandwidths = hz;
        }
        o.workers = workers;
        o.log = quiet ? nullptr : &std::cerr;

        const gnair::SystemConfig cfg = gnair::load_config(config_path);
        const gnair::CampaignResult r = gnair::run_campaign(cfg, o);
        if (!quiet)
            for (const auto& f : r.files)
                std::cerr << "wrote " << f.string() << '\n';
        return 0;
    }
    catch (const std::exception& e)
    {
        const int code = gnair::exit_code_for(e);
        std::cerr << "gnair: " << (code == 2 ? "non-convergence: " : code == 3 ? "I/O error: " : "config error: ")
                  << e.what() << '\n';
        return code;
    }
}
