#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "harness/protocol.hpp"
#include "harness/record.hpp"
#include "perturb/perturb.hpp"

namespace webstress::metrics {

using perturb::Mode;

struct Cell {
  std::size_t episodes = 0;
  std::size_t passed = 0;  // checkpoints
  std::size_t total = 0;
  double ckpt = 0.0;   // micro-averaged percent
  double steps = 0.0;  // mean steps used, terminal action included
};

struct AgentRow {
  std::map<Mode, Cell> modes;
  // Unweighted means over the modes present.
  double avg_ckpt = 0.0;
  double avg_steps = 0.0;
};

struct SuiteSummary {
  std::map<std::string, AgentRow> agents;
};

// Throws std::invalid_argument on an empty record set.
SuiteSummary summarize(const std::vector<harness::RunRecord>& records);

struct RetentionEntry {
  std::optional<double> ratio;  // empty when the clean ckpt% is 0 or missing
  std::optional<double> step_diff;
};

using RetentionReport = std::map<std::string, std::map<Mode, RetentionEntry>>;

// Every non-clean mode relative to the same agent's clean cell.
RetentionReport retention(const SuiteSummary& summary);

struct CalibrationEntry {
  std::size_t episodes = 0;
  std::size_t claimed = 0;  // terminal status done_claimed
  std::size_t actual = 0;   // every checkpoint passed
  std::optional<double> ratio;  // claimed / actual; empty when actual = 0
};

using CalibrationReport = std::map<std::string, std::map<Mode, CalibrationEntry>>;

CalibrationReport calibration(const std::vector<harness::RunRecord>& records);

struct RepetitionEntry {
  std::size_t trajectories = 0;
  std::size_t with_repeat = 0;
  double repeat_pct = 0.0;
  std::size_t total_repeats = 0;  // sum over maximal runs of (length - 1)
  std::size_t max_run = 0;        // longest maximal run
};

using RepetitionReport = std::map<std::string, std::map<Mode, RepetitionEntry>>;

RepetitionReport repetition(const std::vector<harness::RunRecord>& records);

// Run lengths of consecutive identical actions (type and parameters).
std::vector<std::size_t> run_lengths(const harness::RunRecord& record);

enum class Format { table, csv };
enum class Analysis { summary, retention, calibration, repetition, all };

std::optional<Format> parse_format(std::string_view s);
std::optional<Analysis> parse_analysis(std::string_view s);

// Column header used for a mode in reports.
std::string_view column_name(Mode m);

std::string emit_summary(const SuiteSummary& summary, Format format);
std::string emit_retention(const RetentionReport& report, Format format);
std::string emit_calibration(const CalibrationReport& report, Format format);
std::string emit_repetition(const RepetitionReport& report, Format format);

// Computes and emits the requested analyses over `records`. An empty record
// set yields header-only sections.
std::string emit_report(const std::vector<harness::RunRecord>& records, Analysis analysis, Format format);

std::string format_one_decimal(double v);

}  // namespace webstress::metrics
