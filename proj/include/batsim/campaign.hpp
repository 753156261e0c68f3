#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "batsim/config.hpp"
#include "batsim/simulation.hpp"

namespace batsim {

/// One (sweep point, seed) pair of a campaign.
struct RunSpec {
  std::size_t point = 0;
  std::string scenario;  // name plus `|key=value` per sweep axis
  ScenarioConfig config;
  std::uint64_t seed = 0;
};

/// Cross product of the sweep axes times the seeds. Throws ValidationError
/// when the campaign would exceed `sim.max_runs`.
std::vector<RunSpec> expand_campaign(const ConfigDocument& doc);

/// Sweep axis value encoded in a scenario label, if present.
std::optional<std::string> scenario_axis(const std::string& scenario, const std::string& key);

struct RunRecord {
  RunSpec spec;
  enum class Status { Missing, Ok, Failed } status = Status::Missing;
  std::string error;
  RunResult result;
};

struct CampaignOptions {
  std::size_t parallel = 1;
  /// Checked before each run is started; set it to stop the campaign early.
  const std::atomic<bool>* stop = nullptr;
  std::function<void(const RunRecord&)> on_done;
};

struct CampaignResult {
  std::vector<RunRecord> records;  // in expansion order
  bool complete() const;
};

CampaignResult run_campaign(const std::vector<RunSpec>& specs, const CampaignOptions& opts);

/// Per-point aggregate row as written to aggregate.csv.
struct AggregateRow {
  std::string scenario;
  std::string family;
  std::size_t runs = 0;
  std::optional<Estimate> pdr;
  std::optional<Estimate> mean_delay_s;
  std::optional<Estimate> data_rate_bps;
  std::optional<Estimate> drops_noroute;
  std::optional<Estimate> drops_collision;
  std::optional<Estimate> drops_sensitivity;
  std::optional<Estimate> drops_queue;
};

std::string runs_csv_header();
std::string runs_csv_row(const RunResult& r);

/// Groups successful runs by (scenario, family) in first-seen order.
std::vector<AggregateRow> aggregate_campaign(const CampaignResult& result);

void write_runs_csv(std::ostream& out, const CampaignResult& result);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_hashes_csv(std::ostream& out, const CampaignResult& result);
/// Every (point, seed) pair that is missing or failed.
void write_manifest_csv(std::ostream& out, const CampaignResult& result);
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

/// Writes runs.csv, aggregate.csv, hashes.csv and manifest.csv into `dir`.
void write_campaign_outputs(const std::filesystem::path& dir, const CampaignResult& result);

enum class FigureTemplate { ElpProbing, MetricComparison, SpeedSweep, LoadSweep, StreamSweep };
FigureTemplate parse_figure(const std::string& name);
const char* to_string(FigureTemplate f);

/// Tab-separated plot table: one row per x value, mean and ci95 columns per
/// family. Throws MissingSeries when a family the template needs is absent.
void emit_summary(std::ostream& out, const std::vector<AggregateRow>& rows, FigureTemplate figure);

}  // namespace batsim
