#include "metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace webstress::metrics {

using harness::RunRecord;
using harness::TerminalStatus;

namespace {

constexpr const char* kUndefined = "n/a";

struct Row {
  std::string section;
  std::string agent;
  std::string metric;
  std::map<Mode, std::string> cells;
  std::string avg;
};

std::vector<std::string> header() {
  std::vector<std::string> h{"section", "agent", "metric"};
  for (Mode m : perturb::kAllModes) h.emplace_back(column_name(m));
  h.emplace_back("Avg");
  return h;
}

std::vector<std::string> cells_of(const Row& r, Format format) {
  std::vector<std::string> out{r.section, r.agent, r.metric};
  for (Mode m : perturb::kAllModes) {
    auto it = r.cells.find(m);
    out.push_back(it != r.cells.end() ? it->second : (format == Format::table ? "-" : ""));
  }
  out.push_back(r.avg.empty() && format == Format::table ? "-" : r.avg);
  return out;
}

std::string render(const std::vector<Row>& rows, Format format) {
  std::vector<std::vector<std::string>> lines{header()};
  for (const auto& r : rows) lines.push_back(cells_of(r, format));
  std::ostringstream out;
  if (format == Format::csv) {
    for (const auto& l : lines) {
      for (std::size_t i = 0; i < l.size(); ++i) out << (i ? "," : "") << l[i];
      out << '\n';
    }
    return out.str();
  }
  std::vector<std::size_t> width(lines.front().size(), 0);
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.size(); ++i) width[i] = std::max(width[i], l[i].size());
  }
  for (const auto& l : lines) {
    std::string line;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i) line += "  ";
      // Text columns left-aligned, numbers right-aligned.
      if (i < 3) {
        line += l[i] + std::string(width[i] - l[i].size(), ' ');
      } else {
        line += std::string(width[i] - l[i].size(), ' ') + l[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

std::string opt(const std::optional<double>& v) { return v ? format_one_decimal(*v) : kUndefined; }

std::string signed_one_decimal(double v) {
  std::string s = format_one_decimal(v);
  return v > 0 && s != "0.0" ? "+" + s : s;
}

std::vector<Row> summary_rows(const SuiteSummary& s) {
  std::vector<Row> rows;
  for (const auto& [agent, row] : s.agents) {
    Row ck{"summary", agent, "ckpt%", {}, format_one_decimal(row.avg_ckpt)};
    Row st{"summary", agent, "steps", {}, format_one_decimal(row.avg_steps)};
    for (const auto& [mode, cell] : row.modes) {
      ck.cells[mode] = format_one_decimal(cell.ckpt);
      st.cells[mode] = format_one_decimal(cell.steps);
    }
    rows.push_back(std::move(ck));
    rows.push_back(std::move(st));
  }
  return rows;
}

std::vector<Row> retention_rows(const RetentionReport& r) {
  std::vector<Row> rows;
  for (const auto& [agent, modes] : r) {
    Row ratio{"retention", agent, "retention%", {}, {}};
    Row diff{"retention", agent, "step_diff", {}, {}};
    for (const auto& [mode, e] : modes) {
      ratio.cells[mode] = e.ratio ? format_one_decimal(*e.ratio * 100.0) : kUndefined;
      diff.cells[mode] = e.step_diff ? signed_one_decimal(*e.step_diff) : kUndefined;
    }
    rows.push_back(std::move(ratio));
    rows.push_back(std::move(diff));
  }
  return rows;
}

std::vector<Row> calibration_rows(const CalibrationReport& r) {
  std::vector<Row> rows;
  for (const auto& [agent, modes] : r) {
    Row claimed{"calibration", agent, "claimed", {}, {}};
    Row actual{"calibration", agent, "actual", {}, {}};
    Row ratio{"calibration", agent, "ratio", {}, {}};
    for (const auto& [mode, e] : modes) {
      claimed.cells[mode] = std::to_string(e.claimed);
      actual.cells[mode] = std::to_string(e.actual);
      ratio.cells[mode] = opt(e.ratio);
    }
    rows.push_back(std::move(claimed));
    rows.push_back(std::move(actual));
    rows.push_back(std::move(ratio));
  }
  return rows;
}

std::vector<Row> repetition_rows(const RepetitionReport& r) {
  std::vector<Row> rows;
  for (const auto& [agent, modes] : r) {
    Row pct{"repetition", agent, "repeat%", {}, {}};
    Row total{"repetition", agent, "total_repeats", {}, {}};
    Row max{"repetition", agent, "max_run", {}, {}};
    for (const auto& [mode, e] : modes) {
      pct.cells[mode] = format_one_decimal(e.repeat_pct);
      total.cells[mode] = std::to_string(e.total_repeats);
      max.cells[mode] = std::to_string(e.max_run);
    }
    rows.push_back(std::move(pct));
    rows.push_back(std::move(total));
    rows.push_back(std::move(max));
  }
  return rows;
}

}  // namespace

std::string format_one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  std::string s = buf;
  if (s == "-0.0") s = "0.0";
  return s;
}

std::string_view column_name(Mode m) {
  switch (m) {
    case Mode::clean: return "Clean";
    case Mode::chaos: return "Chaos";
    case Mode::noise: return "Noise";
    case Mode::failure: return "Failure";
    case Mode::popup: return "Pop-Up";
    case Mode::remap_explicit: return "RemapE";
    case Mode::remap: return "Remap";
  }
  return "Clean";
}

SuiteSummary summarize(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one record");
  SuiteSummary s;
  std::map<std::string, std::map<Mode, long long>> step_sums;
  for (const auto& r : records) {
    Cell& c = s.agents[r.agent_id].modes[r.mode()];
    ++c.episodes;
    c.passed += r.passed();
    c.total += r.checkpoints.size();
    step_sums[r.agent_id][r.mode()] += r.steps_used;
  }
  for (auto& [agent, row] : s.agents) {
    double ck = 0, st = 0;
    for (auto& [mode, c] : row.modes) {
      c.ckpt = c.total ? 100.0 * static_cast<double>(c.passed) / static_cast<double>(c.total) : 0.0;
      c.steps = static_cast<double>(step_sums[agent][mode]) / static_cast<double>(c.episodes);
      ck += c.ckpt;
      st += c.steps;
    }
    row.avg_ckpt = ck / static_cast<double>(row.modes.size());
    row.avg_steps = st / static_cast<double>(row.modes.size());
  }
  return s;
}

RetentionReport retention(const SuiteSummary& summary) {
  RetentionReport out;
  for (const auto& [agent, row] : summary.agents) {
    auto clean = row.modes.find(Mode::clean);
    for (const auto& [mode, cell] : row.modes) {
      if (mode == Mode::clean) continue;
      RetentionEntry e;
      if (clean != row.modes.end()) {
        if (clean->second.ckpt > 0) e.ratio = cell.ckpt / clean->second.ckpt;
        e.step_diff = cell.steps - clean->second.steps;
      }
      out[agent][mode] = e;
    }
  }
  return out;
}

CalibrationReport calibration(const std::vector<RunRecord>& records) {
  CalibrationReport out;
  for (const auto& r : records) {
    auto& e = out[r.agent_id][r.mode()];
    ++e.episodes;
    if (r.status == TerminalStatus::done_claimed) ++e.claimed;
    if (r.all_passed()) ++e.actual;
  }
  for (auto& [agent, modes] : out) {
    for (auto& [mode, e] : modes) {
      if (e.actual > 0) e.ratio = static_cast<double>(e.claimed) / static_cast<double>(e.actual);
    }
  }
  return out;
}

std::vector<std::size_t> run_lengths(const RunRecord& record) {
  std::vector<std::size_t> runs;
  nlohmann::json prev;
  for (const auto& s : record.steps) {
    nlohmann::json id = harness::action_identity(s.action);
    if (!runs.empty() && id == prev) {
      ++runs.back();
    } else {
      runs.push_back(1);
    }
    prev = std::move(id);
  }
  return runs;
}

RepetitionReport repetition(const std::vector<RunRecord>& records) {
  RepetitionReport out;
  for (const auto& r : records) {
    auto& e = out[r.agent_id][r.mode()];
    ++e.trajectories;
    bool repeat = false;
    for (std::size_t len : run_lengths(r)) {
      if (len >= 2) repeat = true;
      e.total_repeats += len - 1;
      e.max_run = std::max(e.max_run, len);
    }
    if (repeat) ++e.with_repeat;
  }
  for (auto& [agent, modes] : out) {
    for (auto& [mode, e] : modes) {
      e.repeat_pct = e.trajectories ? 100.0 * static_cast<double>(e.with_repeat) / static_cast<double>(e.trajectories) : 0.0;
    }
  }
  return out;
}

std::optional<Format> parse_format(std::string_view s) {
  if (s == "table") return Format::table;
  if (s == "csv") return Format::csv;
  return std::nullopt;
}

std::optional<Analysis> parse_analysis(std::string_view s) {
  if (s == "summary") return Analysis::summary;
  if (s == "retention") return Analysis::retention;
  if (s == "calibration") return Analysis::calibration;
  if (s == "repetition") return Analysis::repetition;
  if (s == "all") return Analysis::all;
  return std::nullopt;
}

std::string emit_summary(const SuiteSummary& summary, Format format) { return render(summary_rows(summary), format); }
std::string emit_retention(const RetentionReport& report, Format format) {
  return render(retention_rows(report), format);
}
std::string emit_calibration(const CalibrationReport& report, Format format) {
  return render(calibration_rows(report), format);
}
std::string emit_repetition(const RepetitionReport& report, Format format) {
  return render(repetition_rows(report), format);
}

std::string emit_report(const std::vector<RunRecord>& records, Analysis analysis, Format format) {
  std::vector<Row> rows;
  const bool all = analysis == Analysis::all;
  if (!records.empty()) {
    const bool need_summary = all || analysis == Analysis::summary || analysis == Analysis::retention;
    std::optional<SuiteSummary> summary;
    if (need_summary) summary = summarize(records);
    auto append = [&rows](std::vector<Row> more) { rows.insert(rows.end(), more.begin(), more.end()); };
    if (all || analysis == Analysis::summary) append(summary_rows(*summary));
    if (all || analysis == Analysis::retention) append(retention_rows(retention(*summary)));
    if (all || analysis == Analysis::calibration) append(calibration_rows(calibration(records)));
    if (all || analysis == Analysis::repetition) append(repetition_rows(repetition(records)));
  }
  return render(rows, format);
}

}  // namespace webstress::metrics
