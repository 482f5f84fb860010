#include "gnair/campaign.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gnair/amplification.hpp"
#include "gnair/errors.hpp"
#include "gnair/performance.hpp"

namespace gnair
{

namespace
{

constexpr const char* report_format_version = "gnair-report/1";

namespace fs = std::filesystem;

void note(const CampaignOptions& o, const std::string& msg)
{
    if (o.log)
        *o.log << msg << std::endl;
}

std::string bandwidth_tag(double hz)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", hz / units::GHz);
    return buf;
}

std::string hex(std::uint64_t v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path)
{
    out.flush();
    if (!out)
        throw IoError("write failed for " + path.string());
}

const char* shaping_name(Shaping s) { return s == Shaping::Uniform ? "uniform" : "mb"; }

std::vector<Shaping> shapings(ShapingSelection s)
{
    switch (s)
    {
    case ShapingSelection::Uniform:
        return {Shaping::Uniform};
    case ShapingSelection::MaxwellBoltzmann:
        return {Shaping::MaxwellBoltzmann};
    default:
        return {Shaping::Uniform, Shaping::MaxwellBoltzmann};
    }
}

QmcOptions qmc_options(const SystemConfig& cfg)
{
    QmcOptions q;
    q.samples = cfg.campaign.qmc_samples;
    q.replicates = cfg.campaign.qmc_replicates;
    q.seed = cfg.campaign.rng_seed;
    return q;
}

fs::path default_cache_dir(const fs::path& out)
{
    if (const char* env = std::getenv("GNAIR_CACHE_DIR"); env && *env)
        return env;
    return out / ".cache";
}

int worker_count(int requested)
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace

SystemConfig effective_config(SystemConfig cfg, const CampaignOptions& o)
{
    auto& c = cfg.campaign;
    if (o.seed)
        c.rng_seed = *o.seed;
    if (o.qmc_samples)
        c.qmc_samples = *o.qmc_samples;
    if (o.output_dir)
        c.output_dir = *o.output_dir;
    if (o.formats)
        c.modulation_formats = *o.formats;
    if (o.shaping)
        c.shaping = *o.shaping;
    if (o.nlc_bandwidths)
        cfg.nlc.bandwidths = *o.nlc_bandwidths;
    if (o.profile == RunProfile::Desk && cfg.grid.channel_count > c.desk_channel_count)
        cfg.grid.channel_count = c.desk_channel_count;
    c.ssfm = profile_ssfm_settings(cfg, o.profile);
    validate(cfg);
    return cfg;
}

SsfmSettings profile_ssfm_settings(const SystemConfig& cfg, RunProfile profile)
{
    SsfmSettings s = cfg.campaign.ssfm;
    if (profile == RunProfile::Full)
    {
        s.channel_count = 81;
        s.symbols = 1 << 18;
        s.samples_per_symbol = 162;
        s.steps_per_span = std::max(s.steps_per_span, 1000);
    }
    return s;
}

std::vector<ReportRow> build_report(const SystemConfig& cfg, const NonlinearCoefficientTable& full,
                                    const std::vector<NonlinearCoefficientTable>& nlc, double ase_total, int workers)
{
    // Per NLC bandwidth: SNR rows from the performance layer. B_NLC = 0 means EDC (no NLC table).
    struct Base
    {
        double bandwidth;
        ChannelSnr snr;
        double frequency;
    };
    std::vector<Base> bases;
    for (std::size_t b = 0; b < cfg.nlc.bandwidths.size(); ++b)
    {
        const double bw = cfg.nlc.bandwidths[b];
        const NonlinearCoefficientTable* table = bw > 0.0 ? &nlc.at(b) : nullptr;
        const auto snr = per_channel_report(full, table, ase_total, cfg.campaign.power_policy, cfg.campaign.launch_power);
        for (std::size_t i = 0; i < snr.size(); ++i)
            bases.push_back({bw, snr[i], full.rows[i].center_frequency});
    }

    const auto& formats = cfg.campaign.modulation_formats;
    const auto shapes = shapings(cfg.campaign.shaping);
    const std::size_t per_base = formats.size() * shapes.size();
    std::vector<ReportRow> rows(bases.size() * per_base);

    auto fill = [&](std::size_t idx) {
        const Base& base = bases[idx / per_base];
        const int format = formats[(idx % per_base) / shapes.size()];
        const Shaping shape = shapes[idx % shapes.size()];
        ReportRow& r = rows[idx];
        r.channel = base.snr.channel;
        r.center_frequency = base.frequency;
        r.nlc_bandwidth = base.bandwidth;
        r.eta_full = base.snr.eta_full;
        r.eta_nlc = base.snr.eta_nlc;
        r.delta_eta = base.snr.delta_eta;
        r.launch_power = base.snr.launch_power;
        r.optimum_power = base.snr.optimum_power;
        r.ase_total = base.snr.ase_total;
        r.snr_db = base.snr.snr_db;
        r.format = format;
        r.shaping = shape;
        if (shape == Shaping::Uniform)
            r.mi = mi_separable(build_constellation(format), base.snr.snr_linear).mi_bits;
        else
        {
            const ZetaOptimum z = optimize_zeta(format, base.snr.snr_linear);
            r.zeta = z.zeta;
            r.mi = z.mi;
        }
        r.mi = std::min(r.mi, std::log2(static_cast<double>(format)));
        r.rates = air_and_code_rate(r.mi, cfg.grid.symbol_rate, format, cfg.grid.channel_spacing);
    };

    // Static striping over a bounded pool; each item writes only its own slot.
    const int n = std::min<int>(worker_count(workers), static_cast<int>(std::max<std::size_t>(rows.size(), 1)));
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < n; ++w)
            pool.emplace_back([&, w] {
                try
                {
                    for (std::size_t i = w; i < rows.size(); i += n)
                        fill(i);
                }
                catch (...)
                {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return rows;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows)
{
    out << "channel_index,center_frequency_THz,nlc_bandwidth_GHz,eta_full,eta_nlc,delta_eta,launch_power_W,"
           "launch_power_dBm,optimum_power_dBm,ase_total_W,snr_dB,format,shaping,zeta,mi_bits,air_Gbps,se,"
           "code_rate,overhead_pct\n";
    char buf[768];
    for (const auto& r : rows)
    {
        std::snprintf(buf, sizeof buf,
                      "%d,%.9f,%g,%.17g,%.17g,%.17g,%.17g,%.6f,%.6f,%.17g,%.17g,%d,%s,%.9g,%.9f,%.6f,%.9f,%.9f,%.6f\n",
                      r.channel, r.center_frequency / units::THz, r.nlc_bandwidth / units::GHz, r.eta_full, r.eta_nlc,
                      r.delta_eta, r.launch_power, watt_to_dbm(r.launch_power), watt_to_dbm(r.optimum_power),
                      r.ase_total, r.snr_db, r.format, shaping_name(r.shaping), r.zeta, r.mi, r.rates.air / 1e9,
                      r.rates.se, r.rates.code_rate, r.rates.overhead_pct);
        out << buf;
    }
}

NonlinearCoefficientTable cached_eta_table(const SystemConfig& cfg, const SpanPowerProfile& profile,
                                           double b_effective, const QmcOptions& qmc, const fs::path& cache_dir,
                                           bool* hit, int workers, double b_removed)
{
    const fs::path file = cache_dir / ("eta_" + hex(physics_hash(cfg, b_effective, qmc, b_removed)) + ".csv");
    if (hit)
        *hit = false;
    if (fs::exists(file))
    {
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw IoError("cannot read cache entry " + file.string());
        NonlinearCoefficientTable t = read_eta_csv(in, b_effective);
        t.removed_bandwidth = b_removed;
        const auto channels = cfg.grid.channel_indices();
        if (t.rows.size() == channels.size())
        {
            for (auto& r : t.rows)
                r.center_frequency = cfg.grid.carrier_frequency() + cfg.grid.center_offset(r.channel);
            if (hit)
                *hit = true;
            return t;
        }
    }
    NonlinearCoefficientTable t = compute_eta_table(cfg, profile, b_effective, qmc, workers, b_removed);
    std::error_code ec;
    fs::create_directories(cache_dir, ec);
    if (ec)
        throw IoError("cannot create cache directory " + cache_dir.string() + ": " + ec.message());
    // Write to a temporary name first so an interrupted run never leaves a truncated entry.
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out = open_output(tmp);
        write_eta_csv(out, t);
        finish(out, tmp);
    }
    fs::rename(tmp, file, ec);
    if (ec)
        throw IoError("cannot store cache entry " + file.string() + ": " + ec.message());
    return t;
}

CampaignResult run_campaign(const SystemConfig& input, const CampaignOptions& options)
{
    using clock = std::chrono::steady_clock;
    const SystemConfig cfg = effective_config(input, options);
    CampaignResult result;
    result.output_dir = cfg.campaign.output_dir;

    std::error_code ec;
    fs::create_directories(result.output_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + result.output_dir.string() + ": " + ec.message());
    const fs::path cache = options.cache_dir ? *options.cache_dir : default_cache_dir(result.output_dir);

    nlohmann::ordered_json timings = nlohmann::ordered_json::object();
    nlohmann::ordered_json cache_hits = nlohmann::ordered_json::object();
    const QmcOptions qmc = qmc_options(cfg);

    if (options.mode != RunMode::Ssfm)
    {
        const auto t0 = clock::now();
        note(options, "power profile");
        const SpanPowerProfile profile = span_power_profile(cfg);
        const double ase_total = cfg.fiber.span_count * ase_per_span(cfg, profile).variance_per_span;

        const double b_full = cfg.grid.total_bandwidth();
        bool hit = false;
        note(options, "eta table, full band");
        const NonlinearCoefficientTable full = cached_eta_table(cfg, profile, b_full, qmc, cache, &hit, options.workers);
        cache_hits["full"] = hit;
        {
            const fs::path p = result.output_dir / "eta_full.csv";
            std::ofstream out = open_output(p);
            write_eta_csv(out, full);
            finish(out, p);
            result.files.push_back(p);
        }

        std::vector<NonlinearCoefficientTable> nlc(cfg.nlc.bandwidths.size());
        for (std::size_t b = 0; b < cfg.nlc.bandwidths.size(); ++b)
        {
            const double bw = cfg.nlc.bandwidths[b];
            if (bw <= 0.0)
                continue;
            note(options, "eta table, NLC " + bandwidth_tag(bw) + " GHz");
            // residual over the full band on the full table's points, so 0 <= eta_nlc <= eta_full per channel
            const auto residual = cached_eta_table(cfg, profile, b_full, qmc, cache, &hit, options.workers, bw);
            nlc[b] = nlc_table(full, residual);
            cache_hits[bandwidth_tag(bw) + "GHz"] = hit;
            const fs::path p = result.output_dir / ("eta_nlc_" + bandwidth_tag(bw) + "GHz.csv");
            std::ofstream out = open_output(p);
            write_eta_csv(out, nlc[b]);
            finish(out, p);
            result.files.push_back(p);
        }
        const auto t1 = clock::now();

        note(options, "per-channel report");
        result.report = build_report(cfg, full, nlc, ase_total, options.workers);
        const fs::path p = result.output_dir / "gn_report.csv";
        std::ofstream out = open_output(p);
        write_report_csv(out, result.report);
        finish(out, p);
        result.files.push_back(p);
        timings["eta_tables_s"] = std::chrono::duration<double>(t1 - t0).count();
        timings["report_s"] = std::chrono::duration<double>(clock::now() - t1).count();
    }

    if (options.mode != RunMode::Gn)
    {
        const auto t0 = clock::now();
        note(options, "split-step verification");
        const SimulationConfig sim =
            make_simulation_config(cfg, cfg.campaign.ssfm, cfg.campaign.launch_power.value_or(0.0));
        result.verification = run_verification_campaign(cfg, sim, qmc, cfg.campaign.ssfm.modulation_order);
        const fs::path p = result.output_dir / "ssfm_verification.csv";
        std::ofstream out = open_output(p);
        write_verification_csv(out, *result.verification);
        finish(out, p);
        result.files.push_back(p);
        timings["ssfm_s"] = std::chrono::duration<double>(clock::now() - t0).count();
    }

    nlohmann::ordered_json meta;
    meta["format_version"] = report_format_version;
    meta["tool_version"] = GNAIR_VERSION;
    meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
    meta["mode"] = options.mode == RunMode::Gn ? "gn" : options.mode == RunMode::Ssfm ? "ssfm" : "both";
    meta["profile"] = options.profile == RunProfile::Desk ? "desk" : "full";
    meta["seed"] = cfg.campaign.rng_seed;
    meta["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
    meta["cache_dir"] = cache.string();
    meta["cache_hits"] = cache_hits;
    if (result.verification)
    {
        const auto& v = *result.verification;
        meta["ssfm"] = {{"launch_power_dBm", watt_to_dbm(v.launch_power)},
                        {"max_abs_difference_dB", v.max_abs_difference_db()},
                        {"sim_asymmetry_dB", v.sim_asymmetry_db},
                        {"gn_asymmetry_dB", v.gn_asymmetry_db},
                        {"sim_asymmetry_no_slope_dB", v.sim_asymmetry_no_slope_db},
                        {"gn_asymmetry_no_slope_dB", v.gn_asymmetry_no_slope_db}};
    }
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : result.files)
        files.push_back(f.filename().string());
    meta["files"] = files;
    meta["timings"] = timings;
    const fs::path p = result.output_dir / "metadata.json";
    std::ofstream out = open_output(p);
    out << meta.dump(2) << '\n';
    finish(out, p);
    result.files.push_back(p);
    return result;
}

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConvergenceError*>(&e))
        return 2;
    if (dynamic_cast<const IoError*>(&e))
        return 3;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e))
        return 3;
    return 1;
}

} // namespace gnair
