#include "affordsim/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace affordsim::eval {

Json EpisodeResult::to_json() const {
  return Json{{"episode", episode_id},
              {"success", success},
              {"gc_satisfied", gc_satisfied},
              {"gc_total", gc_total},
              {"agent_steps", agent_steps},
              {"expert_steps", expert_steps},
              {"policy", policy},
              {"reasoner", reasoner},
              {"abort", abort},
              {"scenes", scenes},
              {"setting", setting},
              {"difficulty", difficulty},
              {"task", task}};
}

EpisodeResult EpisodeResult::from_json(const Json& j) {
  try {
    EpisodeResult r;
    r.episode_id = j.at("episode").get<std::string>();
    r.success = j.at("success").get<bool>();
    r.gc_satisfied = j.at("gc_satisfied").get<int>();
    r.gc_total = j.at("gc_total").get<int>();
    r.agent_steps = j.at("agent_steps").get<int>();
    r.expert_steps = j.at("expert_steps").get<int>();
    r.policy = j.at("policy").get<std::string>();
    r.reasoner = j.at("reasoner").get<std::string>();
    r.abort = j.at("abort").get<std::string>();
    r.scenes = j.at("scenes").get<std::string>();
    r.setting = j.at("setting").get<std::string>();
    r.difficulty = j.at("difficulty").get<std::string>();
    r.task = j.at("task").get<std::string>();
    if (r.expert_steps < 1) throw EvalError("expert_steps must be >= 1");
    if (r.gc_total < 1) throw EvalError("gc_total must be >= 1");
    return r;
  } catch (const Json::exception& e) {
    throw EvalError(std::string("bad result record: ") + e.what());
  }
}

Metrics episode_metrics(const EpisodeResult& r) {
  Metrics m;
  m.sr = r.success ? 1.0 : 0.0;
  m.gc = static_cast<double>(r.gc_satisfied) / r.gc_total;
  double weight = static_cast<double>(r.expert_steps) /
                  std::max(r.expert_steps, r.agent_steps);
  m.plw_sr = m.sr * weight;
  m.plw_gc = m.gc * weight;
  return m;
}

namespace {

double percent(double mean) { return std::round(mean * 10000.0) / 100.0; }

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const std::vector<std::string> kScenesAxis = {"seen", "unseen", "all"};
const std::vector<std::string> kSettingAxis = {"static", "dynamic", "all"};
const std::vector<std::string> kDifficultyAxis = {"basic", "advanced", "all"};

struct Sums {
  int n = 0;
  double sr = 0, gc = 0, plw_sr = 0, plw_gc = 0;
  void add(const Metrics& m) {
    ++n;
    sr += m.sr;
    gc += m.gc;
    plw_sr += m.plw_sr;
    plw_gc += m.plw_gc;
  }
};

}  // namespace

SplitReport aggregate(const std::vector<EpisodeResult>& results) {
  if (results.empty()) throw EvalError("no results to aggregate");

  // (policy, reasoner) -> axis values -> sums; "all" margins included
  std::map<std::pair<std::string, std::string>,
           std::map<std::tuple<std::string, std::string, std::string>, Sums>>
      table;
  for (const auto& r : results) {
    auto m = episode_metrics(r);
    auto& cells = table[{r.policy, r.reasoner}];
    for (const auto& sc : {r.scenes, std::string("all")}) {
      for (const auto& se : {r.setting, std::string("all")}) {
        for (const auto& d : {r.difficulty, std::string("all")}) {
          cells[{sc, se, d}].add(m);
        }
      }
    }
  }

  SplitReport report;
  for (const auto& [key, cells] : table) {
    for (const auto& sc : kScenesAxis) {
      for (const auto& se : kSettingAxis) {
        for (const auto& d : kDifficultyAxis) {
          ReportCell cell;
          cell.policy = key.first;
          cell.reasoner = key.second;
          cell.scenes = sc;
          cell.setting = se;
          cell.difficulty = d;
          auto it = cells.find({sc, se, d});
          if (it != cells.end()) {
            const auto& s = it->second;
            cell.n = s.n;
            cell.gc = percent(s.gc / s.n);
            cell.plw_gc = percent(s.plw_gc / s.n);
            cell.sr = percent(s.sr / s.n);
            cell.plw_sr = percent(s.plw_sr / s.n);
          }
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

namespace {

Json cell_to_json(const ReportCell& c) {
  auto opt = [](const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
  };
  return Json{{"policy", c.policy},   {"reasoner", c.reasoner},
              {"scenes", c.scenes},   {"setting", c.setting},
              {"difficulty", c.difficulty}, {"n", c.n},
              {"gc", opt(c.gc)},      {"plw_gc", opt(c.plw_gc)},
              {"sr", opt(c.sr)},      {"plw_sr", opt(c.plw_sr)}};
}

ReportCell cell_from_json(const Json& j) {
  ReportCell c;
  c.policy = j.at("policy").get<std::string>();
  c.reasoner = j.at("reasoner").get<std::string>();
  c.scenes = j.at("scenes").get<std::string>();
  c.setting = j.at("setting").get<std::string>();
  c.difficulty = j.at("difficulty").get<std::string>();
  c.n = j.at("n").get<int>();
  auto opt = [&](const char* key) -> std::optional<double> {
    if (j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  c.gc = opt("gc");
  c.plw_gc = opt("plw_gc");
  c.sr = opt("sr");
  c.plw_sr = opt("plw_sr");
  return c;
}

}  // namespace

std::string to_json_text(const SplitReport& report) {
  Json cells = Json::array();
  for (const auto& c : report.cells) cells.push_back(cell_to_json(c));
  return Json{{"cells", cells}}.dump(2) + "\n";
}

SplitReport report_from_json(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("cells")) {
    throw EvalError("not a report file");
  }
  SplitReport report;
  try {
    for (const auto& c : j["cells"]) report.cells.push_back(cell_from_json(c));
  } catch (const Json::exception& e) {
    throw EvalError(std::string("bad report cell: ") + e.what());
  }
  return report;
}

std::string to_csv(const SplitReport& report) {
  std::ostringstream out;
  out << "policy,reasoner,scenes,setting,difficulty,n,gc,plw_gc,sr,plw_sr\n";
  for (const auto& c : report.cells) {
    out << c.policy << ',' << c.reasoner << ',' << c.scenes << ',' << c.setting
        << ',' << c.difficulty << ',' << c.n << ',';
    if (c.n > 0) {
      out << fmt2(*c.gc) << ',' << fmt2(*c.plw_gc) << ',' << fmt2(*c.sr) << ','
          << fmt2(*c.plw_sr);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string to_markdown(const SplitReport& report) {
  std::ostringstream out;
  out << "| policy | reasoner | scenes | setting | difficulty | n | GC | PLW "
         "GC | SR | PLW SR |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& c : report.cells) {
    out << "| " << c.policy << " | " << c.reasoner << " | " << c.scenes
        << " | " << c.setting << " | " << c.difficulty << " | " << c.n << " | ";
    if (c.n > 0) {
      out << fmt2(*c.gc) << " | " << fmt2(*c.plw_gc) << " | " << fmt2(*c.sr)
          << " | " << fmt2(*c.plw_sr);
    } else {
      out << "- | - | - | -";
    }
    out << " |\n";
  }
  return out.str();
}

void write_results(const std::filesystem::path& path,
                   const std::vector<EpisodeResult>& results) {
  std::ofstream out(path);
  if (!out) throw EvalError("cannot write " + path.string());
  for (const auto& r : results) out << r.to_json().dump() << "\n";
}

std::vector<EpisodeResult> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot read " + path.string());
  std::vector<EpisodeResult> results;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw EvalError("bad JSON line in " + path.string());
    results.push_back(EpisodeResult::from_json(j));
  }
  return results;
}

}  // namespace affordsim::eval
