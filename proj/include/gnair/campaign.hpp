#ifndef GNAIR_CAMPAIGN_HPP
#define GNAIR_CAMPAIGN_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gnair/gn_engine.hpp"
#include "gnair/infotheory.hpp"
#include "gnair/ssfm.hpp"
#include "gnair/system_model.hpp"

namespace gnair
{

enum class RunMode
{
    Gn,
    Ssfm,
    Both
};

enum class RunProfile
{
    Desk,
    Full
};

/// Command-line overrides. Unset fields keep the configuration's values.
struct CampaignOptions
{
    RunMode mode = RunMode::Gn;
    RunProfile profile = RunProfile::Desk;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> qmc_samples;
    std::optional<std::string> output_dir;
    std::optional<std::vector<int>> formats;
    std::optional<ShapingSelection> shaping;
    std::optional<std::vector<double>> nlc_bandwidths; ///< Hz
    std::optional<std::filesystem::path> cache_dir;    ///< default: $GNAIR_CACHE_DIR, else <out>/.cache
    int workers = 0;                                   ///< 0 = hardware concurrency
    std::ostream* log = nullptr;
};

/// Configuration after applying the profile and overrides (validated).
SystemConfig effective_config(SystemConfig cfg, const CampaignOptions& options);

/// Simulation settings of a profile: the configured ones at desk scale, 81 ch / 2^18 / 162 sps for the full profile.
SsfmSettings profile_ssfm_settings(const SystemConfig& cfg, RunProfile profile);

/// One report line: a channel at one NLC bandwidth, format and shaping.
struct ReportRow
{
    int channel = 0;
    double center_frequency = 0.0; ///< Hz
    double nlc_bandwidth = 0.0;    ///< Hz
    double eta_full = 0.0;
    double eta_nlc = 0.0;
    double delta_eta = 0.0;
    double launch_power = 0.0; ///< W
    double optimum_power = 0.0; ///< W, infinite in the linear regime
    double ase_total = 0.0;
    double snr_db = 0.0;
    int format = 0;
    Shaping shaping = Shaping::Uniform;
    double zeta = 0.0;
    double mi = 0.0; ///< bit/symbol per polarization
    RateMetrics rates;
};

/// Report rows for every (channel, NLC, format, shaping) combination, in that nesting order.
std::vector<ReportRow> build_report(const SystemConfig& cfg, const NonlinearCoefficientTable& full,
                                    const std::vector<NonlinearCoefficientTable>& nlc, double ase_total,
                                    int workers = 0);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

/// eta table (residual table when b_removed > 0) from the cache when present (bit-exact round trip), computed
/// and stored otherwise.
NonlinearCoefficientTable cached_eta_table(const SystemConfig& cfg, const SpanPowerProfile& profile,
                                           double b_effective, const QmcOptions& qmc,
                                           const std::filesystem::path& cache_dir, bool* hit = nullptr,
                                           int workers = 0, double b_removed = 0.0);

struct CampaignResult
{
    std::filesystem::path output_dir;
    std::vector<ReportRow> report;
    std::optional<VerificationTable> verification;
    std::vector<std::filesystem::path> files;
};

/// Runs the requested engines and writes gn_report.csv, eta_*.csv, ssfm_verification.csv and metadata.json.
/// Throws ConfigError, ConvergenceError or IoError.
CampaignResult run_campaign(const SystemConfig& cfg, const CampaignOptions& options);

/// Process exit code for an exception escaping run_campaign: 1 config, 2 non-convergence, 3 I/O.
int exit_code_for(const std::exception& e);

} // namespace gnair

#endif // GNAIR_CAMPAIGN_HPP
