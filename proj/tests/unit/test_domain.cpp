#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include "htcflow/domain.hpp"
#include "htcflow/error.hpp"

using namespace htc;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected htc::Error");
  return Errc::invalid_argument;
}

Face unit_square_face() { return gen_rect_face(1, 2, 2, 1.0, 1.0, Point3::Zero()); }

}  // namespace

TEST_CASE("enumerate_cases: 7 x 5 grid gives 35 cases") {
  CaseGrid g{{10, 15, 20, 25, 30, 35, 40}, {1, 3, 5, 7, 9}};
  const auto cases = enumerate_cases(g);
  CHECK(cases.size() == 35);
  for (std::size_t i = 0; i < cases.size(); ++i) CHECK(cases[i].case_id == static_cast<CaseId>(i));
}

TEST_CASE("enumerate_cases: singleton and product order") {
  CHECK(enumerate_cases(CaseGrid{{20}, {1}}).size() == 1);
  const auto c = enumerate_cases(CaseGrid{{10, 20}, {1, 2}});
  REQUIRE(c.size() == 4);
  CHECK((c[0].t_air == 10 && c[0].v == 1));
  CHECK((c[1].t_air == 10 && c[1].v == 2));
  CHECK((c[2].t_air == 20 && c[2].v == 1));
  CHECK((c[3].t_air == 20 && c[3].v == 2));
  CHECK(c[3].case_id == 3);
}

TEST_CASE("enumerate_cases: el varies fastest") {
  const auto c = enumerate_cases(CaseGrid{{20}, {1}, {0, 90}, {-10, 10}});
  REQUIRE(c.size() == 4);
  CHECK((c[0].az == 0 && c[0].el == -10));
  CHECK((c[1].az == 0 && c[1].el == 10));
  CHECK((c[2].az == 90 && c[2].el == -10));
}

TEST_CASE("CaseGrid and LoadCase validation") {
  CHECK(code_of([] { CaseGrid{{}, {1}}.validate(); }) == Errc::invalid_argument);
  CHECK(code_of([] { CaseGrid{{20, 10}, {1}}.validate(); }) == Errc::invalid_argument);
  CHECK(code_of([] { CaseGrid{{10, 10}, {1}}.validate(); }) == Errc::invalid_argument);
  CHECK(code_of([] { LoadCase{0, 20, -1, 0, 0}.validate(); }) == Errc::invalid_argument);
  CHECK(code_of([] { LoadCase{0, 20, 1, 360, 0}.validate(); }) == Errc::invalid_argument);
  CHECK(code_of([] { LoadCase{0, 20, 1, 0, 91}.validate(); }) == Errc::invalid_argument);
  CHECK_NOTHROW(LoadCase{0, 20, 1, 359.5, -90}.validate());
}

TEST_CASE("gen_rect_face: minimal lattice, midline row, centroid") {
  const Face sq = unit_square_face();
  CHECK(sq.size() == 4);
  CHECK(sq.node(3).position.isApprox(Point3(1, 1, 0)));

  const Face row = gen_rect_face(2, 1, 3, 2.0, 1.0, Point3::Zero());
  REQUIRE(row.size() == 3);
  for (const auto& n : row.nodes()) CHECK(n.position.y() == doctest::Approx(0.5));
  CHECK(row.node(1).position.x() == doctest::Approx(1.0));

  const Face f = gen_rect_face(3, 3, 3, 2.0, 2.0, Point3(1, 1, 1));
  CHECK(f.node(4).position.isApprox(Point3(2, 2, 1)));
}

TEST_CASE("gen_rect_face: other normals keep nodes on the plane") {
  const Face fx = gen_rect_face(1, 3, 4, 0.3, 0.2, Point3(0.5, 0, 0), Axis::x);
  for (const auto& n : fx.nodes()) CHECK(n.position.x() == 0.5);
  CHECK(std::abs(fx.frame().normal.x()) == doctest::Approx(1.0));
  const Face fy = gen_rect_face(1, 3, 4, 0.3, 0.2, Point3(0, 2, 0), Axis::y);
  for (const auto& n : fy.nodes()) CHECK(n.position.y() == 2.0);
}

TEST_CASE("gen_rect_face: bad extents") {
  CHECK(code_of([] { gen_rect_face(1, 2, 2, 0.0, 1.0, Point3::Zero()); }) == Errc::invalid_argument);
  CHECK(code_of([] { gen_rect_face(1, 0, 2, 1.0, 1.0, Point3::Zero()); }) == Errc::invalid_argument);
}

TEST_CASE("Face rejects broken invariants") {
  const std::vector<Point3> square{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  CHECK(code_of([&] { Face(1, {}, square); }) == Errc::invalid_argument);
  CHECK(code_of([&] { Face(1, {{0, {0.5, 0.5, 0}}, {0, {0.2, 0.2, 0}}}, square); }) == Errc::duplicate_node);
  CHECK(code_of([&] { Face(1, {{0, {2, 0.5, 0}}}, square); }) != Errc::duplicate_node);
  CHECK(code_of([&] { Face(1, {{0, {0.5, 0.5, 0.01}}}, square); }) == Errc::off_plane);
  const std::vector<Point3> bowtie{{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(Face(1, {{0, {0.5, 0.5, 0}}}, bowtie), Error);
  // node on an edge counts as inside
  CHECK_NOTHROW(Face(1, {{0, {1, 0.5, 0}}}, square));
}

TEST_CASE("index_of") {
  const Face f = unit_square_face();
  CHECK(f.index_of(2) == 2);
  CHECK(f.index_of(99) == Face::npos);
}

TEST_CASE("CSV round trip is byte-identical") {
  const Face f = unit_square_face();
  HTCField field{1, 7, {1.0 / 3.0, 2.5, 1e-300, 123456.789}};
  const std::string a = format_htc_csv(field, f);
  CHECK(a.rfind("node_id,x,y,z,htc\n", 0) == 0);
  const HTCField back = parse_htc_csv(a, f, 7);
  CHECK(back == field);
  CHECK(format_htc_csv(back, f) == a);

  const auto dir = std::filesystem::temp_directory_path() / "htcflow_test_domain";
  std::filesystem::create_directories(dir);
  const auto path = dir / htc_file_name(1, 7);
  write_htc_csv(field, f, path);
  const HTCField from_file = read_htc_csv(path, f);
  CHECK(from_file.case_id == 7);
  CHECK(from_file == field);
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV accepts CRLF") {
  const Face f = unit_square_face();
  HTCField field{1, 0, {1, 2, 3, 4}};
  std::string text = format_htc_csv(field, f);
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(parse_htc_csv(crlf, f, 0) == field);
}

TEST_CASE("CSV errors") {
  const Face f = unit_square_face();
  HTCField field{1, 0, {1, 2, 3, 4}};
  const std::string good = format_htc_csv(field, f);
  const auto lines = [&] {
    std::vector<std::string> out;
    std::size_t p = 0;
    while (p < good.size()) {
      const auto e = good.find('\n', p);
      out.push_back(good.substr(p, e - p));
      p = e + 1;
    }
    return out;
  }();
  auto join = [](const std::vector<std::string>& ls) {
    std::string s;
    for (const auto& l : ls) s += l + "\n";
    return s;
  };

  CHECK(code_of([&] { parse_htc_csv("id,x,y,z,htc\n" + good.substr(good.find('\n') + 1), f, 0); }) ==
        Errc::malformed_header);
  auto three = lines;
  three.pop_back();
  CHECK(code_of([&] { parse_htc_csv(join(three), f, 0); }) == Errc::node_count_mismatch);
  auto nan = lines;
  nan[2] = nan[2].substr(0, nan[2].rfind(',') + 1) + "nan";
  CHECK(code_of([&] { parse_htc_csv(join(nan), f, 0); }) == Errc::non_finite_value);
  auto unknown = lines;
  unknown[1] = "42" + unknown[1].substr(unknown[1].find(','));
  CHECK(code_of([&] { parse_htc_csv(join(unknown), f, 0); }) == Errc::unknown_node);
  auto dup = lines;
  dup[2] = dup[1];
  CHECK(code_of([&] { parse_htc_csv(join(dup), f, 0); }) == Errc::duplicate_node);
  auto moved = lines;
  moved[1] = "0,0.5,0,0,1";
  CHECK(code_of([&] { parse_htc_csv(join(moved), f, 0); }) == Errc::coordinate_mismatch);
  auto short_row = lines;
  short_row[1] = "0,0,0,0";
  CHECK(code_of([&] { parse_htc_csv(join(short_row), f, 0); }) == Errc::malformed_row);
  CHECK(code_of([&] { read_htc_csv("/nonexistent/face_1_case_0.csv", f); }) != Errc::duplicate_node);
}

TEST_CASE("HTCField::validate") {
  const Face f = unit_square_face();
  CHECK(code_of([&] { HTCField{1, 0, {1, 2, 3}}.validate(f); }) == Errc::node_count_mismatch);
  CHECK(code_of([&] { HTCField{1, 0, {1, 2, 3, std::numeric_limits<double>::infinity()}}.validate(f); }) ==
        Errc::non_finite_value);
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -123.456}) {
    CHECK(parse_double(format_double17(v)) == v);
  }
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
}
