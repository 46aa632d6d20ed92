// Copyright 2026 The hetfed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>

#include "hetfed/benchmark.h"
#include "hetfed/error.h"
#include "hetfed/rewriter.h"
#include "hetfed/sql/parser.h"
#include "hetfed/sqlite.h"

namespace hetfed {

bool values_equal(const Value& a, const Value& b) {
  if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
  if (const auto* sa = std::get_if<std::string>(&a)) {
    const auto* sb = std::get_if<std::string>(&b);
    return sb && *sa == *sb;
  }
  if (std::holds_alternative<std::string>(b)) return false;
  const auto* ia = std::get_if<std::int64_t>(&a);
  const auto* ib = std::get_if<std::int64_t>(&b);
  if (ia && ib) return *ia == *ib;
  double x = ia ? static_cast<double>(*ia) : std::get<double>(a);
  double y = ib ? static_cast<double>(*ib) : std::get<double>(b);
  if (x == y) return true;
  return std::fabs(x - y) <= kRealTolerance * std::max(std::fabs(x), std::fabs(y));
}

namespace {

bool rows_equal(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!values_equal(a[i], b[i])) return false;
  return true;
}

}  // namespace

bool compare_result_sets(const ResultTable& a, const ResultTable& b, bool ordered) {
  if (a.columns.size() != b.columns.size()) return false;
  if (a.rows.size() != b.rows.size()) return false;
  if (ordered) {
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      if (!rows_equal(a.rows[i], b.rows[i])) return false;
    return true;
  }
  std::vector<bool> used(b.rows.size(), false);
  for (const auto& ra : a.rows) {
    bool found = false;
    for (std::size_t j = 0; j < b.rows.size(); ++j) {
      if (used[j] || !rows_equal(ra, b.rows[j])) continue;
      used[j] = true;
      found = true;
      break;
    }
    if (!found) return false;
  }
  return true;
}

Accuracy EvalReport::overall() const {
  Accuracy a;
  for (const auto& v : verdicts) {
    ++a.total;
    a.correct += v.correct;
  }
  return a;
}

Accuracy EvalReport::bucket(const std::string& h) const {
  Accuracy a;
  for (const auto& v : verdicts) {
    if (v.hardness != h) continue;
    ++a.total;
    a.correct += v.correct;
  }
  return a;
}

namespace {

nlohmann::ordered_json accuracy_json(const Accuracy& a) {
  return {{"correct", a.correct}, {"total", a.total}, {"accuracy", a.value()}};
}

}  // namespace

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["attr"] = attr;
  j["overall"] = accuracy_json(overall());
  j["by_difficulty"] = nlohmann::ordered_json::object();
  for (const auto& b : difficulty_buckets()) j["by_difficulty"][b] = accuracy_json(bucket(b));
  j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    nlohmann::ordered_json vj{{"question_id", v.question_id},
                              {"db_id", v.db_id},
                              {"hardness", v.hardness},
                              {"correct", v.correct}};
    if (!v.error.empty()) vj["error"] = v.error;
    j["verdicts"].push_back(std::move(vj));
  }
  return j;
}

Predictions gold_predictions(const Corpus& corpus, const Manifest& manifest) {
  Predictions p;
  for (const auto& q : corpus.questions)
    if (manifest.find(q.db_id)) p[q.id] = q.query;
  return p;
}

EvalReport evaluate(const Predictions& predictions, const Corpus& corpus, const BenchmarkInstance& instance,
                    const std::string& server_origin) {
  EvalReport report;
  report.attr = instance.manifest.attr;
  for (const auto& md : instance.manifest.databases) {
    TableView view = instance.view(md.db_id);
    ExecContext ctx = instance.context(md.db_id, server_origin);
    Database gold_db = Database::open(instance.original_db(md.db_id), true);
    for (const Question* q : corpus.questions_for(md.db_id)) {
      Verdict v;
      v.question_id = q->id;
      v.db_id = q->db_id;
      sql::QueryAst gold_ast = sql::parse(q->query);
      v.hardness = q->hardness ? *q->hardness : hardness(gold_ast);
      ResultTable gold = gold_db.query(q->query);
      bool ordered = !gold_ast.root.order_by().empty();
      auto it = predictions.find(q->id);
      if (it == predictions.end()) {
        v.error = "no prediction";
      } else {
        try {
          RewrittenQuery rq = rewrite(sql::parse(it->second), view);
          FederationSession session(ctx);
          v.correct = compare_result_sets(session.execute(rq), gold, ordered);
        } catch (const Error& e) {
          v.error = e.what();
        }
      }
      report.verdicts.push_back(std::move(v));
    }
  }
  return report;
}

std::string format_report_table(const std::vector<EvalReport>& reports) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %8s %8s %8s %8s %8s\n", "ATTR", "easy", "medium", "hard", "extra", "overall");
  out += buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-6g", r.attr);
    out += buf;
    for (const auto& b : difficulty_buckets()) {
      Accuracy a = r.bucket(b);
      if (a.total == 0) {
        std::snprintf(buf, sizeof buf, " %8s", "-");
      } else {
        std::snprintf(buf, sizeof buf, " %8.3f", a.value());
      }
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %8.3f\n", r.overall().value());
    out += buf;
  }
  if (!reports.empty()) {
    Accuracy a = reports.front().overall();
    std::snprintf(buf, sizeof buf, "questions per run: %zu\n", a.total);
    out += buf;
  }
  return out;
}

}  // namespace hetfed
