#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ks/cli.hpp"
#include "ks/json_writer.hpp"

using namespace ks;
using namespace ks::cli;
using nlohmann::json;

namespace {

std::string data_file(const char* name) { return std::string(KS_DATA_DIR) + "/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("ks_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const RunSpec& spec) {
  std::ostringstream out, err;
  const int code = run(spec, out, err);
  return {code, out.str(), err.str()};
}

RunSpec spec_for(Command c, const std::string& config, std::vector<double> lambdas = {}) {
  RunSpec s;
  s.command = c;
  s.config_path = config;
  s.lambdas = std::move(lambdas);
  return s;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("lambda ranges") {
  CHECK(parse_lambda("1.5") == std::vector<double>{1.5});
  const auto r = parse_lambda("0.5:5:0.5");
  REQUIRE(r.size() == 10);
  CHECK(r.front() == 0.5);
  CHECK(r.back() == doctest::Approx(5.0));
  CHECK(parse_lambda("1:1:0.1").size() == 1);
  CHECK_THROWS_AS(parse_lambda("1:2:0"), Error);
  CHECK_THROWS_AS(parse_lambda("2:1:0.5"), Error);
  CHECK_THROWS_AS(parse_lambda("-1"), Error);
  CHECK_THROWS_AS(parse_lambda("abc"), Error);
  CHECK_THROWS_AS(parse_lambda("1:2"), Error);
  CHECK(parse_complex("0.5,-2") == cplx(0.5, -2.0));
  CHECK(parse_vec3("1, 0, 0") == Vec3(1, 0, 0));
  CHECK_THROWS_AS(parse_vec3("1,0"), Error);
}

TEST_CASE("number formatting is fixed at 17 significant digits") {
  CHECK(io::format_number(0.1) == "0.10000000000000001");
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(std::numeric_limits<double>::infinity()) == "null");
  CHECK(io::escape("a\"b\n") == "\"a\\\"b\\n\"");
}

TEST_CASE("config documents") {
  const auto one = parse_config(R"({"points": [[0,0,0]], "coupling": {"diagonal": [1.0]}})");
  CHECK(one.config.size() == 1);
  CHECK(one.extent == FamilyExtent::Finite);
  CHECK(one.config.coupling().convention() == CouplingConvention::FourPi);

  const auto lat = parse_config(
      R"({"generator": {"lattice_line": {"count": 50, "spacing": 1.0, "weight_law": "n^4"}}})");
  CHECK(lat.config.size() == 50);
  CHECK(lat.extent == FamilyExtent::Truncated);
  CHECK(lat.config.points()[49] == Vec3(50, 0, 0));
  CHECK(lat.config.coupling().weights()[9] == doctest::Approx(1e4));

  const auto unit = parse_config(
      R"({"points": [[0,0,0],[1,0,0]], "coupling": {"matrix": [[1, [0.5, 0.1]], [[0.5, -0.1], 2]]}, "convention": "1"})");
  CHECK(unit.config.coupling().convention() == CouplingConvention::Unit);
  CHECK_FALSE(unit.config.coupling().is_diagonal());

  try {
    parse_config(R"({"points": [[0,0,0]]})");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("coupling") != std::string::npos);
  }
  try {
    parse_config("{\n  \"points\": [[0,0,0]],\n  oops\n}");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    parse_config(R"({"points": [[0,0,0],[0,0,0]], "coupling": {"diagonal": [1, 1]}})");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicatePoint);
  }
  try {
    parse_config(R"({"points": [[0,0]], "coupling": {"diagonal": [1]}})");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  try {
    parse_config(R"({"points": [[0,0,0]], "coupling": {"diagonal": [0]}})");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroWeight);
  }
}

TEST_CASE("grid resolution precedence") {
  RunSpec s;
  CHECK(resolve_grid(s, 1.0, 2.0).n_theta == 10);
  s.default_grid = "12";
  CHECK(resolve_grid(s, 1.0, 2.0).n_theta == 12);
  CHECK(resolve_grid(s, 1.0, 2.0).n_phi == 24);
  s.default_grid = "12,30";
  CHECK(resolve_grid(s, 1.0, 2.0).n_phi == 30);
  s.n_theta = 7;
  CHECK(resolve_grid(s, 1.0, 2.0).n_theta == 7);
  CHECK(resolve_grid(s, 1.0, 2.0).n_phi == 14);
  s.n_phi = 20;
  CHECK(resolve_grid(s, 1.0, 2.0).n_phi == 20);
}

TEST_CASE("validate on the three-point sample") {
  const Outcome o = invoke(spec_for(Command::Validate, data_file("three_points.json")));
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(j["separation"]["delta"] == json::array({1.0, 2.0, 0.5}));
  CHECK(j["summability"]["verdict"] == "pass");
  CHECK(j["extent"] == "finite");
}

TEST_CASE("smat on the single-point sample") {
  const Outcome o = invoke(spec_for(Command::Smat, data_file("single_point.json"), {1.0}));
  REQUIRE(o.code == 0);
  const json r = json::parse(o.out)["results"][0];
  CHECK(r["unitarity_defect"].get<double>() <= 1e-8);
  CHECK(r["det"][0].get<double>() == doctest::Approx(0.9999198).epsilon(1e-7));
  CHECK(r["det"][1].get<double>() == doctest::Approx(-0.0126646).epsilon(1e-5));
  CHECK(r.contains("cond"));
  CHECK(r["kernel_samples"].size() == 6);
}

TEST_CASE("sweep CSV on the three-point sample") {
  RunSpec s = spec_for(Command::Sweep, data_file("three_points.json"), parse_lambda("0.5:5:0.5"));
  s.format = OutputFormat::Csv;
  const Outcome o = invoke(s);
  REQUIRE(o.code == 0);
  const auto rows = parse_csv(o.out);
  REQUIRE(rows.size() == 11);
  CHECK(rows[0][0] == "lambda");
  CHECK(rows[0].back() == "cond");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][5]) > 0.0);
    CHECK(std::abs(std::stod(rows[i][4]) - 1.0) <= 1e-10);
    CHECK(std::stod(rows[i][0]) == doctest::Approx(0.5 * static_cast<double>(i)));
  }
}

TEST_CASE("output is identical for any thread count") {
  RunSpec s = spec_for(Command::Sweep, data_file("three_points.json"), parse_lambda("0.5:3:0.25"));
  s.threads = 1;
  const Outcome a = invoke(s);
  s.threads = 4;
  const Outcome b = invoke(s);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("every subcommand produces output with condition numbers") {
  for (Command c : {Command::Qmat, Command::Smat, Command::Dets, Command::Xsect, Command::Add,
                    Command::Sweep}) {
    for (OutputFormat f : {OutputFormat::Json, OutputFormat::Csv}) {
      RunSpec s = spec_for(c, data_file("three_points.json"), {1.0});
      s.format = f;
      const Outcome o = invoke(s);
      INFO(to_string(c), " ", o.err);
      CHECK(o.code == 0);
      CHECK(o.out.find("cond") != std::string::npos);
      if (f == OutputFormat::Csv) {
        CHECK(o.out.substr(0, o.out.find('\n')) == csv_columns(c));
      }
    }
  }
}

TEST_CASE("add trace matches direct assembly") {
  const Outcome o = invoke(spec_for(Command::Add, data_file("three_points.json"), {1.0}));
  REQUIRE(o.code == 0);
  const json steps = json::parse(o.out)["results"][0]["steps"];
  REQUIRE(steps.size() == 3);
  for (const auto& st : steps) {
    CHECK(st["dev_C"].get<double>() < 1e-10);
    CHECK(st["dev_kernel"].get<double>() < 1e-10);
    CHECK(st["dev_det"].get<double>() < 1e-8);
    CHECK(st["xi_d_defect"].get<double>() < 1e-12);
  }
}

TEST_CASE("qmat at an interior point") {
  RunSpec s = spec_for(Command::Qmat, data_file("single_point.json"));
  s.z = cplx(-1.0, 0.0);
  const Outcome o = invoke(s);
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(j["entries"][0][0][0].get<double>() == doctest::Approx(-1.0 / (4 * pi)));
  s.z.reset();
  CHECK(invoke(s).code == 2);
}

TEST_CASE("error objects and exit codes") {
  const Outcome missing = invoke(spec_for(Command::Validate, "/nonexistent/config.json"));
  CHECK(missing.code == 2);
  const json e = json::parse(missing.err);
  CHECK(e["error"]["kind"] == "ParseError");
  CHECK(e["error"]["category"] == "input");

  const std::string sing = write_temp(
      "singular.json", R"({"points": [[0,0,0],[1,0,0]], "coupling": {"matrix": [[1,1],[1,1]]}})");
  RunSpec s = spec_for(Command::Smat, sing, {1.0});
  s.scaled = true;
  const Outcome num = invoke(s);
  CHECK(num.code == 3);
  CHECK(json::parse(num.err)["error"]["category"] == "numerical");

  CHECK(invoke(spec_for(Command::Sweep, data_file("single_point.json"))).code == 2);
  RunSpec odd = spec_for(Command::Smat, data_file("single_point.json"), {1.0});
  odd.n_phi = 15;
  const Outcome o2 = invoke(odd);
  CHECK(o2.code == 2);
  CHECK(json::parse(o2.err)["error"]["kind"] == "OddPhiCount");
}

TEST_CASE("output file and convention override") {
  const std::string out = (std::filesystem::temp_directory_path() / "ks_test_out.json").string();
  RunSpec s = spec_for(Command::Dets, data_file("single_point.json"), {1.0});
  s.out_path = out;
  s.convention = CouplingConvention::Unit;
  const Outcome o = invoke(s);
  REQUIRE(o.code == 0);
  CHECK(o.out.empty());
  std::ifstream in(out);
  const json j = json::parse(in);
  CHECK(j["convention"] == "1");
  CHECK(std::abs(j["results"][0]["det_modulus"].get<double>() - 1.0) < 1e-12);
}
