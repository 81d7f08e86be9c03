#include "blockscope/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace blockscope {

using Json = nlohmann::ordered_json;

// --- CSV ---------------------------------------------------------------------

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(row[i]);
  }
  out << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("CSV column not found: " + name);
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  CsvTable table;
  if (!rows.empty()) {
    table.header = std::move(rows.front());
    table.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

// --- per-project tables -------------------------------------------------------

std::vector<std::string> metric_columns() {
  std::vector<std::string> cols{"block_count", "distinct_opcodes"};
  for (Category c : kAllCategories) cols.emplace_back(to_string(c));
  for (Concept c : kAllConcepts) cols.emplace_back(to_string(c));
  for (const char* name : {"N1", "N2", "n1", "n2", "halstead_length", "halstead_vocabulary", "halstead_volume",
                           "halstead_difficulty", "halstead_effort", "wmc", "icc"}) {
    cols.emplace_back(name);
  }
  return cols;
}

std::vector<double> metric_values(const MetricRecord& r) {
  std::vector<double> v{static_cast<double>(r.block_count), static_cast<double>(r.distinct_opcodes)};
  for (std::size_t n : r.category_counts) v.push_back(static_cast<double>(n));
  for (std::size_t n : r.concept_counts) v.push_back(static_cast<double>(n));
  const HalsteadMetrics& h = r.halstead;
  for (double x : {static_cast<double>(h.total_operators), static_cast<double>(h.total_operands),
                   static_cast<double>(h.unique_operators), static_cast<double>(h.unique_operands),
                   static_cast<double>(h.length), static_cast<double>(h.vocabulary), h.volume, h.difficulty, h.effort,
                   static_cast<double>(r.wmc), static_cast<double>(r.icc)}) {
    v.push_back(x);
  }
  return v;
}

namespace {

std::string age_text(const ProjectMeta& m) { return m.age ? std::to_string(*m.age) : ""; }

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricRecord>& records, const Corpus& corpus) {
  CsvRow header{"project_id", "group", "age"};
  for (auto& c : metric_columns()) header.push_back(std::move(c));
  write_csv_row(out, header);
  for (const MetricRecord& r : records) {
    const ProjectMeta& m = corpus.meta(r.project_id);
    CsvRow row{r.project_id, m.group, age_text(m)};
    for (double v : metric_values(r)) row.push_back(format_number(v));
    write_csv_row(out, row);
  }
}

void write_smells_csv(std::ostream& out, const std::vector<std::string>& ids, const std::vector<SmellCounts>& counts,
                      const Corpus& corpus) {
  CsvRow header{"project_id", "group"};
  for (SmellKind k : kAllSmells) header.emplace_back(to_string(k));
  write_csv_row(out, header);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    CsvRow row{ids[i], corpus.meta(ids[i]).group};
    for (std::size_t n : counts[i]) row.push_back(std::to_string(n));
    write_csv_row(out, row);
  }
}

void write_smells_summary_csv(std::ostream& out, const std::vector<std::string>& ids,
                              const std::vector<SmellCounts>& counts, const Corpus& corpus) {
  std::vector<GroupedSmellCounts> grouped;
  std::map<std::string, std::size_t> sizes;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    grouped.push_back({corpus.meta(ids[i]).group, counts[i]});
    ++sizes[grouped.back().group];
  }
  CsvRow header{"group", "projects"};
  for (SmellKind k : kAllSmells) header.emplace_back(to_string(k));
  write_csv_row(out, header);
  for (const auto& [group, means] : summarize_smells(grouped)) {
    CsvRow row{group, std::to_string(sizes[group])};
    for (double m : means) row.push_back(format_number(m));
    write_csv_row(out, row);
  }
}

void write_opcodes_csv(std::ostream& out, const std::vector<MetricRecord>& records) {
  write_csv_row(out, {"project_id", "opcode", "category", "count"});
  for (const MetricRecord& r : records) {
    for (const auto& [op, n] : r.opcode_counts) {
      write_csv_row(out, {r.project_id, op, std::string(to_string(block_category(op))), std::to_string(n)});
    }
  }
}

// --- report inputs --------------------------------------------------------------

namespace {

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("non-numeric value '" + s + "' in " + where);
  }
}

CsvTable require_csv(const std::filesystem::path& dir, const std::string& name) {
  if (!std::filesystem::is_regular_file(dir / name)) throw MissingUpstream(name);
  return read_csv(dir / name);
}

}  // namespace

ReportInputs read_report_inputs(const std::filesystem::path& dir, std::size_t top_k) {
  ReportInputs in;
  in.top_k = top_k;
  const CsvTable metrics = require_csv(dir, "metrics.csv");
  const CsvTable smells = require_csv(dir, "smells.csv");
  const CsvTable opcodes = require_csv(dir, "opcodes.csv");

  auto load = [&](const CsvTable& t, const std::string& file, const std::string& prefix,
                  const std::set<std::string>& skip) {
    const std::size_t id_col = t.column("project_id");
    const std::size_t group_col = t.column("group");
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (c == id_col || c == group_col || skip.contains(t.header[c])) continue;
      in.metric_order.push_back(prefix + t.header[c]);
    }
    for (const CsvRow& row : t.rows) {
      if (row.size() != t.header.size()) throw std::runtime_error("ragged row in " + file);
      ProjectValues& pv = in.projects[row[id_col]];
      pv.group = row[group_col];
      for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == id_col || c == group_col || skip.contains(t.header[c])) continue;
        pv.values[prefix + t.header[c]] = parse_double(row[c], file);
      }
    }
  };
  load(metrics, "metrics.csv", "", {"age"});
  load(smells, "smells.csv", "smell_", {});

  const std::size_t pid = opcodes.column("project_id");
  const std::size_t op = opcodes.column("opcode");
  const std::size_t cnt = opcodes.column("count");
  for (const CsvRow& row : opcodes.rows) {
    in.opcode_counts[row[pid]][row[op]] = static_cast<std::size_t>(parse_double(row[cnt], "opcodes.csv"));
  }

  if (std::filesystem::is_regular_file(dir / "assignments.csv")) {
    const CsvTable a = read_csv(dir / "assignments.csv");
    std::size_t k = 0;
    for (const std::string& h : a.header) k += h.rfind("topic_", 0) == 0 ? 1 : 0;
    in.topic_count = k;
    const std::size_t id_col = a.column("project_id");
    const std::size_t dom = a.column("dominant_topic");
    for (const CsvRow& row : a.rows) {
      in.dominant_topic[row[id_col]] = static_cast<std::size_t>(parse_double(row[dom], "assignments.csv"));
    }
  }
  return in;
}

// --- report -----------------------------------------------------------------

namespace {

// Integral values as integers, everything else rounded to 12 significant digits.
Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  if (std::floor(v) == v && std::abs(v) < 1e15) return static_cast<long long>(v);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

ReportBundle summarize_groups(const ReportInputs& in) {
  ReportBundle b;
  std::map<std::string, std::vector<std::string>> members;  // group -> project ids
  for (const auto& [id, pv] : in.projects) members[pv.group].push_back(id);
  if (in.projects.empty()) b.diagnostics.push_back("no projects in the upstream tables");

  std::vector<std::string> metrics = in.metric_order;
  std::sort(metrics.begin(), metrics.end());
  metrics.erase(std::unique(metrics.begin(), metrics.end()), metrics.end());

  auto values_of = [&](const std::string& metric, const std::string& group) {
    std::vector<double> v;
    for (const std::string& id : members.at(group)) {
      const auto& vals = in.projects.at(id).values;
      if (auto it = vals.find(metric); it != vals.end()) v.push_back(it->second);
    }
    return v;
  };

  Json& r = b.report;
  r["schema_version"] = kReportSchemaVersion;
  r["projects"] = in.projects.size();
  r["groups"] = Json::array();
  for (const auto& [group, ids] : members) r["groups"].push_back({{"name", group}, {"projects", ids.size()}});

  r["metrics"] = Json::array();
  for (const std::string& metric : metrics) {
    for (const auto& [group, ids] : members) {
      const auto v = values_of(metric, group);
      if (v.empty()) continue;
      r["metrics"].push_back({{"metric", metric},
                              {"group", group},
                              {"n", v.size()},
                              {"mean", number(mean(v))},
                              {"median", number(median(v))},
                              {"q1", number(quantile(v, 0.25))},
                              {"q3", number(quantile(v, 0.75))},
                              {"min", number(*std::min_element(v.begin(), v.end()))},
                              {"max", number(*std::max_element(v.begin(), v.end()))}});
      b.plot_data[metric][group] = filter_outliers_iqr(v);
    }
  }

  r["comparisons"] = Json::array();
  if (members.size() < 2) {
    b.diagnostics.push_back("fewer than two groups present; comparisons skipped");
  } else {
    for (const std::string& metric : metrics) {
      for (auto ga = members.begin(); ga != members.end(); ++ga) {
        for (auto gb = std::next(ga); gb != members.end(); ++gb) {
          const auto va = values_of(metric, ga->first);
          const auto vb = values_of(metric, gb->first);
          if (va.empty() || vb.empty()) continue;
          GroupComparison c = rank_sum_test(va, vb);
          c.metric = metric;
          c.group_a = ga->first;
          c.group_b = gb->first;
          r["comparisons"].push_back({{"metric", c.metric},
                                      {"group_a", c.group_a},
                                      {"group_b", c.group_b},
                                      {"n_a", c.n_a},
                                      {"n_b", c.n_b},
                                      {"median_a", number(c.median_a)},
                                      {"median_b", number(c.median_b)},
                                      {"mean_a", number(c.mean_a)},
                                      {"mean_b", number(c.mean_b)},
                                      {"U", number(c.u)},
                                      {"z", c.z ? number(*c.z) : Json(nullptr)},
                                      {"p", number(c.p)},
                                      {"method", std::string(to_string(c.method))},
                                      {"significant", c.p < 0.05}});
          b.comparisons.push_back(std::move(c));
        }
      }
    }
  }

  r["smells"] = Json::array();
  for (const auto& [group, ids] : members) {
    for (SmellKind k : kAllSmells) {
      const auto v = values_of("smell_" + std::string(to_string(k)), group);
      if (v.empty()) continue;
      r["smells"].push_back({{"group", group}, {"detector", std::string(to_string(k))}, {"mean_per_project", number(mean(v))}});
    }
  }

  r["opcodes"] = Json::array();
  for (const auto& [group, ids] : members) {
    std::vector<const std::map<std::string, std::size_t>*> hists;
    for (const std::string& id : ids) {
      if (auto it = in.opcode_counts.find(id); it != in.opcode_counts.end()) hists.push_back(&it->second);
    }
    std::size_t rank = 1;
    for (const RankedOpcode& ro : rank_opcodes(hists, std::max<std::size_t>(in.top_k, 1))) {
      r["opcodes"].push_back({{"group", group},
                              {"rank", rank++},
                              {"opcode", ro.opcode},
                              {"category", std::string(to_string(ro.category))},
                              {"count", ro.count}});
    }
  }

  if (in.topic_count) {
    Json topics;
    topics["k"] = *in.topic_count;
    topics["distribution"] = Json::array();
    for (const auto& [group, ids] : members) {
      std::vector<std::size_t> counts(*in.topic_count, 0);
      std::size_t assigned = 0;
      for (const std::string& id : ids) {
        if (auto it = in.dominant_topic.find(id); it != in.dominant_topic.end() && it->second < counts.size()) {
          ++counts[it->second];
          ++assigned;
        }
      }
      for (std::size_t t = 0; t < counts.size(); ++t) {
        topics["distribution"].push_back(
            {{"group", group},
             {"topic", t},
             {"count", counts[t]},
             {"share", number(assigned ? static_cast<double>(counts[t]) / static_cast<double>(assigned) : 0.0)}});
      }
    }
    r["topics"] = std::move(topics);
  } else {
    r["topics"] = nullptr;
    b.diagnostics.push_back("assignments.csv not found; topic distribution omitted");
  }
  r["diagnostics"] = b.diagnostics;
  return b;
}

void write_comparisons_csv(std::ostream& out, const std::vector<GroupComparison>& comparisons) {
  write_csv_row(out, {"metric", "group_a", "group_b", "U", "p", "method"});
  for (const GroupComparison& c : comparisons) {
    write_csv_row(out, {c.metric, c.group_a, c.group_b, format_number(c.u), format_number(c.p),
                        std::string(to_string(c.method))});
  }
}

void write_report(const std::filesystem::path& dir, const ReportBundle& bundle) {
  std::filesystem::create_directories(dir / "plotdata");
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    out << bundle.report.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "comparisons.csv", std::ios::binary);
    write_comparisons_csv(out, bundle.comparisons);
  }
  for (const auto& [metric, groups] : bundle.plot_data) {
    std::ofstream out(dir / "plotdata" / (metric + ".csv"), std::ios::binary);
    write_csv_row(out, {"group", "value"});
    for (const auto& [group, values] : groups) {
      for (double v : values) write_csv_row(out, {group, format_number(v)});
    }
  }
}

void print_summary(std::ostream& out, const ReportBundle& bundle) {
  char line[256];
  std::snprintf(line, sizeof line, "%-30s %-10s %-10s %12s %12s %10s %10s  %s\n", "metric", "group_a", "group_b", "mean_a",
                "mean_b", "U", "p", "method");
  out << line;
  for (const GroupComparison& c : bundle.comparisons) {
    std::snprintf(line, sizeof line, "%-30s %-10s %-10s %12.4g %12.4g %10.4g %10.4g  %s%s\n", c.metric.c_str(),
                  c.group_a.c_str(), c.group_b.c_str(), c.mean_a, c.mean_b, c.u, c.p,
                  std::string(to_string(c.method)).c_str(), c.p < 0.05 ? " *" : "");
    out << line;
  }
  for (const std::string& d : bundle.diagnostics) out << "note: " << d << '\n';
}

}  // namespace blockscope
