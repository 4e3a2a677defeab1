#include "gi/report.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gi/operators.hpp"

namespace gi {

namespace {

void count(LadderCounts& c, Classification k) {
  ++c.patches;
  c.valid += k != Classification::Invalid;
  c.compiled += k == Classification::CompiledOnly || k == Classification::Passed;
  c.passed += k == Classification::Passed;
}

int family_rank(const std::string& name) {
  const auto f = parse_family(name);
  return f ? static_cast<int>(*f) : 100;
}

}  // namespace

std::optional<double> median_of(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

RunReport aggregate_family(const std::vector<LogRow>& rows, std::string family) {
  RunReport r;
  r.family = std::move(family);
  std::set<std::string> seen;
  std::vector<double> gains;
  for (const LogRow& row : rows) {
    if (row.baseline) {
      if (!row.patch.empty()) {
        auto& s = r.improvements;
        ++s.patches;
        s.compiled += row.classification == Classification::CompiledOnly || row.classification == Classification::Passed;
        s.passed += row.classification == Classification::Passed;
        if (row.runtime && *row.runtime < *row.baseline) {
          ++s.found;
          gains.push_back(*row.baseline - *row.runtime);
        }
      }
      continue;
    }
    if (row.original) continue;
    count(r.all, row.classification);
    const std::string key = row.fingerprint ? "fp:" + *row.fingerprint : "edits:" + row.patch.edits_to_string();
    if (seen.insert(key).second) count(r.unique, row.classification);
  }
  if (!gains.empty()) r.improvements.best = *std::max_element(gains.begin(), gains.end());
  r.improvements.median = median_of(std::move(gains));
  return r;
}

std::vector<RunReport> aggregate(const std::vector<LogRow>& rows) {
  std::map<std::string, std::vector<LogRow>> by_family;
  for (const auto& row : rows) by_family[row.family].push_back(row);
  std::vector<std::string> names;
  for (const auto& [name, _] : by_family) names.push_back(name);
  std::stable_sort(names.begin(), names.end(),
                   [](const std::string& a, const std::string& b) { return family_rank(a) < family_rank(b); });
  std::vector<RunReport> out;
  for (const auto& name : names) out.push_back(aggregate_family(by_family[name], name));
  return out;
}

std::string table1_csv(const std::vector<RunReport>& reports) {
  std::string out =
      "EditCategory,UniquePatches,UniqueValid,UniqueCompiled,UniquePassed,Patches,Valid,Compiled,Passed\n";
  for (const auto& r : reports) {
    out += csv_field(r.family);
    for (std::size_t v : {r.unique.patches, r.unique.valid, r.unique.compiled, r.unique.passed, r.all.patches,
                          r.all.valid, r.all.compiled, r.all.passed}) {
      out += "," + std::to_string(v);
    }
    out += "\n";
  }
  return out;
}

std::string table2_csv(const std::vector<RunReport>& reports) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  std::string out = "EditCategory,Patches,Compiled,Passed,ImprovFound,BestImprov,Median\n";
  for (const auto& r : reports) {
    const auto& s = r.improvements;
    out += csv_field(r.family) + "," + std::to_string(s.patches) + "," + std::to_string(s.compiled) + "," +
           std::to_string(s.passed) + "," + std::to_string(s.found) + "," + opt(s.best) + "," + opt(s.median) + "\n";
  }
  return out;
}

}  // namespace gi
