// Copyright 2026 The saddlelab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "saddlelab/report_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

namespace saddlelab {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += cells[i];
  }
  out.push_back('\n');
}

std::string fmt(double v) { return format_double(v); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string trial_csv(const TrialResult& result, const Objective<double>& objective) {
  std::string out;
  std::vector<std::string> header{"n"};
  for (int i = 1; i <= objective.dimension(); ++i) header.push_back("x_" + std::to_string(i));
  header.insert(header.end(), {"f", "grad_norm", "v_norm"});
  for (const auto& c : objective.critical_components()) header.push_back("dist_" + c.label);
  header.push_back("M_norm");
  append_row(out, header);
  for (const auto& row : result.rows) {
    std::vector<std::string> cells{std::to_string(row.n)};
    for (Eigen::Index i = 0; i < row.x.size(); ++i) cells.push_back(fmt(row.x[i]));
    cells.insert(cells.end(), {fmt(row.f), fmt(row.grad_norm), fmt(row.v_norm)});
    for (double d : row.distances) cells.push_back(fmt(d));
    cells.push_back(fmt(row.martingale_norm));
    append_row(out, cells);
  }
  return out;
}

std::string summary_csv(const std::vector<TrialResult>& results,
                        const Objective<double>& objective) {
  std::string out;
  std::vector<std::string> header{"trial", "classification", "component", "diverged_at",
                                  "final_grad_norm"};
  for (int i = 1; i <= objective.dimension(); ++i) header.push_back("x_" + std::to_string(i));
  append_row(out, header);
  const auto& comps = objective.critical_components();
  for (const auto& r : results) {
    std::vector<std::string> cells{
        std::to_string(r.trial_index), to_string(r.classification),
        r.component >= 0 ? comps[static_cast<std::size_t>(r.component)].label : "",
        r.diverged_at ? std::to_string(*r.diverged_at) : "", fmt(r.final_grad_norm)};
    for (Eigen::Index i = 0; i < r.final_point.size(); ++i) cells.push_back(fmt(r.final_point[i]));
    append_row(out, cells);
  }
  return out;
}

std::string rate_csv(const RateFit& fit) {
  std::string out = "bin_center,max_v_norm,fitted\n";
  for (std::size_t i = 0; i < fit.bin_centers.size(); ++i) {
    const double fitted = std::exp(fit.intercept) * std::pow(fit.bin_centers[i], fit.slope);
    append_row(out, {fmt(fit.bin_centers[i]), fmt(fit.bin_max[i]), fmt(fitted)});
  }
  return out;
}

json config_json(const RunConfigDocument& doc) {
  // parallelism changes scheduling only, never the numbers, so it stays out
  // of the report to keep reports comparable across worker counts.
  json out = json::object();
  for (const auto& [key, value] : doc.values) {
    if (key == "parallelism") continue;
    std::visit([&](const auto& v) { out[key] = v; }, value);
  }
  return out;
}

json escape_report_json(const EscapeReport& report, const RunConfigDocument& doc,
                        const Objective<double>& objective, bool passed) {
  json j;
  j["config"] = config_json(doc);
  j["seed"] = doc.seed();
  j[kTimestampField] = utc_timestamp();
  j["objective"] = objective.name();
  j["trials"] = report.trials;
  j["counts"] = {{"saddle_component", report.saddle_count},
                 {"minimum_component", report.minimum_count},
                 {"diverged", report.diverged_count},
                 {"unresolved", report.unresolved_count}};
  j["component_counts"] = report.component_counts;
  j["saddle_fraction"] = {{"estimate", report.saddle_fraction.estimate},
                          {"wilson_lower", report.saddle_fraction.lower},
                          {"wilson_upper", report.saddle_fraction.upper},
                          {"confidence", 0.95}};
  j["final_grad_norm"] = {{"median", number_or_null(report.final_gradient.median)},
                          {"lower_quartile", number_or_null(report.final_gradient.lower_quartile)},
                          {"upper_quartile", number_or_null(report.final_gradient.upper_quartile)}};
  if (report.velocity_fit) {
    j["velocity_fit"] = {{"slope", report.velocity_fit->slope},
                         {"intercept", report.velocity_fit->intercept},
                         {"band", report.velocity_fit->band},
                         {"tail_fraction", report.tail_fraction},
                         {"bins", report.velocity_fit->bin_centers.size()}};
  } else {
    j["velocity_fit"] = nullptr;
  }
  if (report.martingale) {
    const auto& m = *report.martingale;
    j["martingale"] = {{"mean_square_norm", m.mean_square_norm},
                       {"expected", m.expected},
                       {"ratio", m.ratio ? json(*m.ratio) : json(nullptr)},
                       {"trials", m.trials},
                       {"pass", m.pass}};
  } else {
    j["martingale"] = nullptr;
  }
  j["passed"] = passed;
  return j;
}

json assumption_report_json(const AssumptionReport& report, const CheckSettings& settings,
                            const NoiseOracle<double>& oracle) {
  json j;
  const auto& probe = settings.probe;
  j["box"] = {{"lo", std::vector<double>(probe.lo.data(), probe.lo.data() + probe.lo.size())},
              {"hi", std::vector<double>(probe.hi.data(), probe.hi.data() + probe.hi.size())},
              {"sample_count", probe.sample_count},
              {"seed", probe.seed}};
  j["objective"] = oracle.base().name();
  j["oracle"] = {{"model", to_string(oracle.model())}, {"magnitude", oracle.magnitude()}};
  j["smoothness_L"] = report.smoothness.lipschitz;
  j["descent_lemma_violations"] = report.smoothness.descent_violations;
  json shells = json::array();
  for (const auto& s : report.nonflat_shell_minima) {
    shells.push_back({{"radius", s.radius}, {"min_grad_norm", s.min_grad_norm}});
  }
  j["nonflat_shell_minima"] = shells;
  if (report.abc_fit) {
    const auto& f = *report.abc_fit;
    j["abc_fit"] = {{"A", f.a}, {"B", f.b}, {"abc_C", f.c},
                    {"residual", f.residual}, {"residual_in_se", f.residual_in_se},
                    {"draws_per_point", settings.abc_draws_per_point}};
  } else {
    j["abc_fit"] = nullptr;
  }
  j["excitation_b"] = report.excitation.b_hat;
  j["excitation_analytic_b"] = oracle.analytic_excitation();
  j["excitation_settings"] = {{"directions", settings.excitation_directions},
                              {"draws", settings.excitation_draws}};
  j["local_bound_C"] = report.local_bound.observed;
  j["local_bound_analytic"] = report.local_bound.analytic_bound;
  j["local_bound_gradient_max"] = report.local_bound.gradient_bound;
  json verdicts = json::object();
  for (const auto& v : report.verdicts) {
    verdicts[v.name] = {{"pass", v.pass}, {"skipped", v.skipped}, {"threshold", v.threshold}};
  }
  j["verdicts"] = verdicts;
  j["all_pass"] = report.all_pass();
  j[kTimestampField] = utc_timestamp();
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

namespace {

struct RunOutcome {
  EscapeReport report;
  bool passed = false;
};

RunOutcome run_and_write(const RunConfigDocument& doc, std::ostream& log) {
  const TrialConfig config = make_trial_config(doc);
  const fs::path dir = doc.text("output.dir");
  const auto run = run_monte_carlo(config, doc.integer("trials"),
                                   static_cast<int>(doc.integer("parallelism")),
                                   doc.number("experiment.tail_fraction"));
  const auto& r = run.report;
  const bool passed =
      r.diverged_count == 0 && r.saddle_count <= doc.integer("experiment.max_saddle_count");
  for (const auto& trial : run.trials) {
    write_text_file(dir / ("trial_" + std::to_string(trial.trial_index) + ".csv"),
                    trial_csv(trial, config.objective()));
  }
  write_text_file(dir / "summary.csv", summary_csv(run.trials, config.objective()));
  write_text_file(dir / "report.json",
                  escape_report_json(r, doc, config.objective(), passed).dump(2) + "\n");
  log << "run: " << r.trials << " trials, saddle " << r.saddle_count << ", minimum "
      << r.minimum_count << ", diverged " << r.diverged_count << ", unresolved "
      << r.unresolved_count << " -> " << (passed ? "PASS" : "FAIL") << " (" << dir.string()
      << ")\n";
  return {r, passed};
}

}  // namespace

int command_run(const RunConfigDocument& doc, std::ostream& log) {
  return run_and_write(doc, log).passed ? 0 : 1;
}

int command_check(const RunConfigDocument& doc, std::ostream& log) {
  const auto oracle = make_oracle(doc);
  const auto settings = make_check_settings(doc);
  const auto report = check_assumptions(oracle, settings);
  const fs::path dir = doc.text("output.dir");
  write_text_file(dir / "assumptions.json",
                  assumption_report_json(report, settings, oracle).dump(2) + "\n");
  for (const auto& v : report.verdicts) {
    log << "check " << v.name << ": " << (v.skipped ? "SKIP" : v.pass ? "PASS" : "FAIL") << " ("
        << v.threshold << ")\n";
  }
  return report.all_pass() ? 0 : 1;
}

int command_rate(const RunConfigDocument& doc, std::ostream& log) {
  const TrialConfig config = make_trial_config(doc);
  const auto trials = run_trials(config, doc.integer("trials"),
                                 static_cast<int>(doc.integer("parallelism")));
  const RateFit fit = fit_velocity_envelope(trials, doc.number("experiment.tail_fraction"));
  write_text_file(fs::path(doc.text("output.dir")) / "rate.csv", rate_csv(fit));
  const double limit = -config.method.schedule.exponent() + 0.15;
  const bool passed = fit.slope <= limit && fit.band < 0.1;
  log << "rate: slope " << format_double(fit.slope) << " (limit " << format_double(limit)
      << "), band " << format_double(fit.band) << " -> " << (passed ? "PASS" : "FAIL") << "\n";
  return passed ? 0 : 1;
}

int command_sweep(const RunConfigDocument& doc, const std::string& key,
                  const std::vector<std::string>& values, std::ostream& log) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one value");
  const fs::path base = doc.text("output.dir");
  std::string csv =
      "key,value,trials,saddle_count,minimum_count,diverged_count,unresolved_count,"
      "saddle_fraction,wilson_lower,wilson_upper,median_grad_norm,passed\n";
  bool all_passed = true;
  for (const auto& literal : values) {
    ConfigEntries entries(doc.values.begin(), doc.values.end());
    entries[key] = parse_value(key, literal);
    const std::string label = format_value(entries[key]);
    entries["output.dir"] = (base / (key + "=" + label)).string();
    const RunConfigDocument point = finalize(std::move(entries));
    const RunOutcome outcome = run_and_write(point, log);
    const auto& r = outcome.report;
    all_passed = all_passed && outcome.passed;
    append_row(csv, {key, label, std::to_string(r.trials), std::to_string(r.saddle_count),
                     std::to_string(r.minimum_count), std::to_string(r.diverged_count),
                     std::to_string(r.unresolved_count), fmt(r.saddle_fraction.estimate),
                     fmt(r.saddle_fraction.lower), fmt(r.saddle_fraction.upper),
                     fmt(r.final_gradient.median), outcome.passed ? "true" : "false"});
  }
  write_text_file(base / "sweep.csv", csv);
  return all_passed ? 0 : 1;
}

}  // namespace saddlelab
