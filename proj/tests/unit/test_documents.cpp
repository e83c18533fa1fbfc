#include <doctest.h>

#include <limits>

#include "htcflow/documents.hpp"
#include "htcflow/error.hpp"

using namespace htc;

namespace {

template <typename Parse, typename Build>
void roundtrip(const Json& doc, const char* format, Parse parse, Build build) {
  const std::string first = dump_document(doc);
  const auto value = parse(parse_document(first, format));
  const std::string second = dump_document(build(value));
  CHECK(second == first);
}

}  // namespace

TEST_CASE("case manifest") {
  const auto cases = enumerate_cases(CaseGrid{{10, 20.5}, {0.1, 1.0 / 3.0}, {0, 90}, {0}});
  const Json doc = case_manifest_document(cases);
  CHECK(doc["format"] == "htcflow.cases");
  CHECK(doc["version"] == 1);
  roundtrip(doc, "htcflow.cases", parse_case_manifest, case_manifest_document);
  const auto back = parse_case_manifest(doc);
  REQUIRE(back.size() == cases.size());
  CHECK(back[3].v == 1.0 / 3.0);
}

TEST_CASE("case manifest rejects gaps in ids") {
  auto cases = enumerate_cases(CaseGrid{{10, 20}, {1}});
  cases[1].case_id = 5;
  CHECK_THROWS_AS(parse_case_manifest(case_manifest_document(cases)), Error);
}

TEST_CASE("subset document") {
  GAParams p;
  p.rng_seed = 0xdeadbeefcafef00dULL;
  const NodeSubset s{3, {1, 4, 9}, 0.123456789012345678};
  roundtrip(subset_document(s, p), "htcflow.subset", parse_subset_document,
            [](const SubsetRecord& r) { return subset_document(r.subset, r.ga_params); });
  const auto r = parse_subset_document(subset_document(s, p));
  CHECK(r.subset == s);
  CHECK(r.ga_params == p);
  const NodeSubset inf{3, {1}, std::numeric_limits<double>::infinity()};
  CHECK(subset_document(inf, p)["fitness"].is_null());
}

TEST_CASE("cd documents") {
  CDAxes a;
  a.knots = {std::vector<double>{10, 20}, std::vector<double>{1, 2, 3}, std::vector<double>{0},
             std::vector<double>{0}};
  const CDGrid g(a, {1, 2, 3, 4, 5, 6.000000000000001}, 1e-3, {7, 11});
  roundtrip(cd_document(g), "htcflow.cd", parse_cd_document, cd_document);
  CHECK(parse_cd_document(cd_document(g)) == g);
  const std::vector<CDGrid> set{g, g};
  roundtrip(cd_set_document(7, set), "htcflow.cd_set", parse_cd_set_document,
            [](const std::vector<CDGrid>& v) { return cd_set_document(7, v); });
}

TEST_CASE("schedule document") {
  MeasuredBalance mb;
  mb.tasks = {{1, 10, 2.5, 2.5}, {2, 20, 4.0, {}}, {3, 400, 9.0, {}}};
  mb.schedule = pack(mb.tasks, 2);
  mb.probe_faces = {1};
  RuntimeModel m{0.5, 0.01, 1e-5, {{10, 2.5}, {20, 3.0}, {30, 3.1}}, {0.1, -0.2, 0.1}, 2};
  mb.model = m;
  const Json doc = schedule_document(mb, {9.1, 6.9});
  roundtrip(doc, "htcflow.schedule", parse_schedule_document, [](const ScheduleRecord& r) {
    MeasuredBalance b;
    b.schedule = r.schedule;
    b.tasks = r.tasks;
    b.probe_faces = r.probe_faces;
    b.model = r.model;
    return schedule_document(b, r.measured_bin_seconds);
  });
  const auto r = parse_schedule_document(doc);
  CHECK(r.schedule.bins == mb.schedule.bins);
  CHECK(r.tasks[0].measured_seconds == 2.5);
  CHECK_FALSE(r.tasks[1].measured_seconds);
  CHECK(r.model->c2 == 1e-5);
}

TEST_CASE("format and version are enforced") {
  const Json doc = case_manifest_document(enumerate_cases(CaseGrid{{1}, {1}}));
  CHECK_THROWS_AS(parse_document(dump_document(doc), "htcflow.subset"), Error);
  Json v2 = doc;
  v2["version"] = 2;
  CHECK_THROWS_AS(parse_document(dump_document(v2), "htcflow.cases"), Error);
  CHECK_THROWS_AS(parse_document("{not json", "htcflow.cases"), Error);
  CHECK_THROWS_AS(read_document("/nonexistent/file.json", "htcflow.cases"), Error);
}

TEST_CASE("dump ends with a newline") {
  const std::string s = dump_document(Json{{"format", "x"}, {"version", 1}});
  CHECK(s.back() == '\n');
}
