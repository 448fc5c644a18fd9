#include "varisect/sweep.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "varisect/json_io.hpp"

namespace varisect {

namespace fs = std::filesystem;
using nlohmann::json;

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<Compilation> plan_matrix(const RunSettings& settings) {
  std::vector<Compilation> matrix;
  std::set<std::string> seen;
  auto add = [&](Compilation c) {
    if (seen.insert(c.display()).second) matrix.push_back(std::move(c));
  };
  for (const auto& [id, compiler] : settings.compilers) {
    for (const auto& level : compiler.levels) {
      add(Compilation(id, level));
      for (const auto& switch_set : compiler.switch_sets) {
        std::istringstream in(switch_set);
        std::vector<std::string> switches;
        std::string tok;
        while (in >> tok) switches.push_back(tok);
        add(Compilation(id, level, std::move(switches)));
      }
    }
  }
  add(settings.manifest.correctness_baseline);
  add(settings.manifest.performance_reference);
  return matrix;
}

namespace {

json record_to_json(const SweepRecord& record) {
  return json{{"compilation", record.compilation},
              {"test", record.test},
              {"score", record.score},
              {"wall_times", record.wall_times},
              {"median_time", record.median_time}};
}

SweepRecord record_from_json(const json& j) {
  SweepRecord record;
  j.at("compilation").get_to(record.compilation);
  j.at("test").get_to(record.test);
  j.at("score").get_to(record.score);
  j.at("wall_times").get_to(record.wall_times);
  record.median_time = j.value("median_time", 0.0);
  return record;
}

}  // namespace

std::vector<SweepRecord> load_sweep_records(const fs::path& records_path) {
  std::vector<SweepRecord> records;
  std::ifstream in(records_path);
  if (!in) return records;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& err) {
      throw Error("corrupt sweep record at " + records_path.string() + ":" +
                  std::to_string(number) + ": " + err.what());
    }
  }
  return records;
}

std::vector<SweepRecord> run_sweep(ToolchainBackend& backend,
                                   const std::vector<Compilation>& matrix,
                                   const SweepOptions& options,
                                   const fs::path& records_path) {
  std::vector<SweepRecord> records;
  std::set<std::string> done;
  if (options.resume) {
    records = load_sweep_records(records_path);
    for (const auto& r : records) {
      done.insert(r.compilation.display() + "\x1f" + r.test);
    }
  } else {
    fs::remove(records_path);
  }
  fs::create_directories(records_path.parent_path());
  std::ofstream out(records_path, std::ios::app);

  const ProjectManifest& manifest = backend.manifest();
  for (const auto& compilation : matrix) {
    for (const auto& spec : manifest.tests) {
      if (done.count(compilation.display() + "\x1f" + spec.name)) continue;
      SweepRecord record;
      record.compilation = compilation;
      record.test = spec.name;
      try {
        backend.baseline_output(spec);
        BuildPlan plan;
        plan.candidate = compilation;
        plan.baseline = compilation;  // whole executable under the candidate
        fs::path exe = backend.build_mixed(plan);
        // Scored run first, untimed; output capture must not perturb the
        // timing runs below.
        TestValue candidate_value = backend.run_test_executable(exe, spec);
        record.score = compare_values(backend.baseline_output(spec),
                                      candidate_value, spec.comparator);
        for (int i = 0; i < options.runs_per_timing; ++i) {
          record.wall_times.push_back(backend.time_test_executable(exe, spec));
        }
        record.median_time = median_of(record.wall_times);
      } catch (const BuildError& err) {
        record.score = TestScore::build_failure(std::string(err.what()) + "\n" +
                                                err.diagnostics());
      } catch (const RunError& err) {
        record.score = TestScore::run_failure(std::string(err.what()) + "\n" +
                                              err.diagnostics());
      }
      out << record_to_json(record).dump() << '\n';
      out.flush();
      records.push_back(std::move(record));
    }
  }
  return records;
}

SweepSummary summarize(const std::vector<SweepRecord>& records,
                       const ProjectManifest& manifest) {
  SweepSummary summary;

  // Median time of the performance reference per test; the denominator for
  // every speedup.
  std::map<std::string, double> reference_time;
  std::string reference_id = manifest.performance_reference.display();
  for (const auto& r : records) {
    if (r.compilation.display() == reference_id && r.completed()) {
      reference_time[r.test] = r.median_time;
    }
  }

  std::map<std::string, std::vector<double>> nonzero_scores;
  struct CompilerAccumulator {
    std::size_t variable = 0;
    std::size_t total = 0;
    std::map<std::string, std::vector<double>> speedups_by_compilation;
  };
  std::map<std::string, CompilerAccumulator> per_compiler;
  std::map<std::string, Compilation> compilation_by_id;

  for (const auto& r : records) {
    compilation_by_id.emplace(r.compilation.display(), r.compilation);
    if (!r.completed()) {
      summary.failures.push_back(FailureNote{
          r.compilation.display(), r.test,
          std::string(to_string(r.score.meta)) + ": " +
              (r.score.diagnostics.empty() ? "unknown" : r.score.diagnostics)});
      continue;
    }

    auto& acc = per_compiler[r.compilation.compiler_id];
    ++acc.total;
    if (r.variable()) {
      ++acc.variable;
      nonzero_scores[r.test].push_back(r.score.value);
    }

    auto ref = reference_time.find(r.test);
    if (ref == reference_time.end() || ref->second <= 0.0 ||
        r.median_time <= 0.0) {
      continue;
    }
    double speedup = r.compilation.display() == reference_id
                         ? 1.0
                         : ref->second / r.median_time;
    acc.speedups_by_compilation[r.compilation.display()].push_back(speedup);

    SeriesPoint point{r.compilation.display(), speedup, r.bitwise_equal()};
    summary.series[r.test].push_back(point);
    auto& best = summary.best[r.test];
    if (r.bitwise_equal()) {
      if (!best.fastest_bitwise_equal ||
          point.speedup > best.fastest_bitwise_equal->speedup) {
        best.fastest_bitwise_equal = point;
      }
    } else if (r.variable()) {
      if (!best.fastest_variable ||
          point.speedup > best.fastest_variable->speedup) {
        best.fastest_variable = point;
      }
    }
  }

  for (auto& [test, series] : summary.series) {
    std::stable_sort(series.begin(), series.end(),
                     [](const SeriesPoint& a, const SeriesPoint& b) {
                       if (a.speedup != b.speedup) return a.speedup < b.speedup;
                       return a.compilation_id < b.compilation_id;
                     });
  }

  for (const auto& spec : manifest.tests) {
    auto it = nonzero_scores.find(spec.name);
    if (it == nonzero_scores.end() || it->second.empty()) {
      summary.variability[spec.name] = std::nullopt;
      continue;
    }
    std::vector<double> scores = it->second;
    std::sort(scores.begin(), scores.end());
    summary.variability[spec.name] = VariabilityStats{
        scores.front(), median_of(scores), scores.back(), scores.size()};
  }

  for (const auto& [compiler_id, acc] : per_compiler) {
    CompilerSummary cs;
    cs.compiler_id = compiler_id;
    cs.variable_runs = acc.variable;
    cs.total_runs = acc.total;
    cs.variable_percent =
        acc.total == 0 ? 0.0
                       : 100.0 * static_cast<double>(acc.variable) /
                             static_cast<double>(acc.total);
    for (const auto& [compilation_id, speedups] : acc.speedups_by_compilation) {
      double sum = 0.0;
      for (double s : speedups) sum += s;
      double mean = sum / static_cast<double>(speedups.size());
      if (!cs.mean_speedup || mean > *cs.mean_speedup) {
        cs.mean_speedup = mean;
        cs.best_flags = compilation_by_id.at(compilation_id);
      }
    }
    summary.compilers.push_back(std::move(cs));
  }

  return summary;
}

namespace {

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_summary(const SweepSummary& summary, const fs::path& out_dir) {
  fs::create_directories(out_dir / "series");

  json j;
  j["series"] = json::object();
  for (const auto& [test, series] : summary.series) {
    json points = json::array();
    for (const auto& p : series) {
      points.push_back(json{{"compilation_id", p.compilation_id},
                            {"speedup", p.speedup},
                            {"bitwise_equal", p.bitwise_equal}});
    }
    j["series"][test] = std::move(points);
  }
  j["variability"] = json::object();
  for (const auto& [test, stats] : summary.variability) {
    if (stats) {
      j["variability"][test] = json{{"min", stats->min},
                                    {"median", stats->median},
                                    {"max", stats->max},
                                    {"count", stats->count}};
    } else {
      j["variability"][test] = nullptr;
    }
  }
  j["compilers"] = json::array();
  for (const auto& cs : summary.compilers) {
    json entry{{"compiler", cs.compiler_id},
               {"variable_runs", cs.variable_runs},
               {"total_runs", cs.total_runs},
               {"variable_percent", cs.variable_percent}};
    if (cs.best_flags) {
      entry["best_flags"] = cs.best_flags->display();
      entry["mean_speedup"] = *cs.mean_speedup;
    }
    j["compilers"].push_back(std::move(entry));
  }
  j["best"] = json::object();
  for (const auto& [test, best] : summary.best) {
    json entry = json::object();
    if (best.fastest_bitwise_equal) {
      entry["fastest_bitwise_equal"] =
          json{{"compilation_id", best.fastest_bitwise_equal->compilation_id},
               {"speedup", best.fastest_bitwise_equal->speedup}};
    }
    if (best.fastest_variable) {
      entry["fastest_variable"] =
          json{{"compilation_id", best.fastest_variable->compilation_id},
               {"speedup", best.fastest_variable->speedup}};
    }
    j["best"][test] = std::move(entry);
  }
  j["failures"] = json::array();
  for (const auto& f : summary.failures) {
    j["failures"].push_back(json{{"compilation_id", f.compilation_id},
                                 {"test", f.test},
                                 {"reason", f.reason}});
  }

  std::ofstream out(out_dir / "summary.json");
  out << j.dump(2) << '\n';

  for (const auto& [test, series] : summary.series) {
    std::ofstream csv(out_dir / "series" / (test + ".csv"));
    csv << "compilation_id,speedup,bitwise_equal\n";
    for (const auto& p : series) {
      csv << csv_quote(p.compilation_id) << ',' << p.speedup << ','
          << (p.bitwise_equal ? "true" : "false") << '\n';
    }
  }
}

}  // namespace varisect
