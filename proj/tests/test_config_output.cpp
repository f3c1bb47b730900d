#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace bht;

namespace {

std::string error_text(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config_parse);
    return e.what();
  }
  return {};
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bht_test_" + name + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  const auto c = parse_config("");
  CHECK(c == LabConfig{});

  const auto d = parse_config(R"(
# comment
[velocity]
U = 0.02   ; trailing comment
beta = -2.5
K_max = 48

[source]
kappa_g = 3
gamma = 1:1.0, 2:0.5, 5:0.25

[correlation]
shape = gaussian
chi = 2
eta = 0.5

[ensemble]
n_samples = 12
seed = 18446744073709551615
mode = timedep
freeze_xi = yes

[bands]
kappas = 6, 12
)");
  CHECK(d.velocity.U == 0.02);
  CHECK(d.velocity.beta == -2.5);
  CHECK(d.velocity.k_max == 48);
  CHECK(d.source.gamma_table.at(5) == 0.25);
  CHECK(d.law.shape == CorrelationShape::gaussian);
  CHECK(d.law.eta == 0.5);
  CHECK(d.seed == 18446744073709551615ull);
  CHECK(d.mode == EnsembleMode::timedep);
  CHECK(d.freeze_xi);
  CHECK(d.kappas == std::vector<double>{6, 12});
  CHECK(d.ensemble().master_seed == d.seed);
  CHECK(d.ensemble().threads == 1);
}

TEST_CASE("config round trip is the identity") {
  LabConfig c;
  c.velocity = {0.1, -2.75, 40};
  c.source.kappa_g = 2.5;
  c.source.gamma_table = {{1, 0.1}, {2, 1.0 / 3.0}, {4, 1e-300}};
  c.law = {CorrelationShape::sech, 0.7, 1.25};
  c.n_samples = 7;
  c.seed = 123456789012345ull;
  c.threads = 3;
  c.freeze_xi = true;
  c.identical_seeds = true;
  c.full_theta = true;
  c.variance_slack = 2.5;
  c.solver.tol = 3e-14;
  c.solver.max_iter = 17;
  c.dt = 1.0 / 3000.0;
  c.t_end = 0.123;
  c.order = 2;
  c.points_per_scale = 31;
  c.series_terms = 4;
  c.kappas = {5.5, 11, 22};
  const auto back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(serialize_config(back) == serialize_config(c));
  CHECK(parse_config(serialize_config(LabConfig{})) == LabConfig{});
}

TEST_CASE("config errors carry line numbers and names") {
  const auto unknown = error_text("[velocity]\nU = 0.01\nspeed = 3\n");
  CHECK(unknown.find("line 3") != std::string::npos);
  CHECK(unknown.find("'speed'") != std::string::npos);

  CHECK(error_text("[velocity]\nU = fast\n").find("line 2") != std::string::npos);
  CHECK(error_text("[velocity]\nK_max = 1.5\n").find("'K_max'") != std::string::npos);
  CHECK(error_text("[turbulence]\n").find("[turbulence]") != std::string::npos);
  CHECK(error_text("U = 1\n").find("outside of any section") != std::string::npos);
  CHECK(error_text("[velocity]\nU = 1\nU = 2\n").find("duplicate key 'U'") != std::string::npos);
  CHECK(error_text("[velocity\n").find("line 1") != std::string::npos);
  CHECK(error_text("[velocity]\nU\n").find("line 2") != std::string::npos);
  CHECK(error_text("\n\n[correlation]\nshape = cauchy\n").find("line 4") != std::string::npos);
  CHECK(error_text("[ensemble]\nfull_theta = maybe\n").find("boolean") != std::string::npos);
  CHECK(error_text("[source]\ngamma = 1-0.5\n").find("r2:value") != std::string::npos);
  CHECK(error_text("[bands]\nkappas = ,\n").find("empty list") != std::string::npos);

  CHECK(testing::throws_kind([] { load_config("/nonexistent/bht.ini"); }, ErrorKind::io));
}

TEST_CASE("shipped configs parse") {
  for (const auto* name : {"default.ini", "quick.ini", "timedep.ini"}) {
    const auto c = load_config(std::string(BHT_CONFIG_DIR) + "/" + name);
    CHECK_NOTHROW(c.ensemble().validate());
  }
}

TEST_CASE("CSV formatting") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  for (double v : {std::numbers::pi, 1e-300, -2.5e17, 1.0 / 3.0}) CHECK(std::stod(format_double(v)) == v);

  CsvTable t({"name", "value", "flag"});
  t.row() << "x,y" << 0.5 << true;
  t.row() << "z" << 2 << false;
  CHECK(t.str() == "name,value,flag\r\n\"x,y\",0.5,1\r\nz,2,0\r\n");
  CsvTable bad({"a", "b"});
  bad.row() << 1.0;
  CHECK(testing::throws_kind([&] { (void)bad.str(); }, ErrorKind::invalid_argument));
}

TEST_CASE("atomic write replaces the whole file") {
  const auto dir = scratch_dir("atomic");
  const auto path = dir / "out.csv";
  atomic_write(path, "first version that is long\n");
  atomic_write(path, "second\n");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "second\n");
  int entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) entries += e.is_regular_file();
  CHECK(entries == 1);
  CHECK(testing::throws_kind([&] { atomic_write(dir / "missing" / "x.csv", "x"); }, ErrorKind::io));
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest JSON") {
  RunManifest m;
  m.command = "predict";
  m.seed = 42;
  m.threads = 2;
  m.files = {"predictions.csv"};
  m.verdict = "pass";
  m.started = m.finished = std::chrono::system_clock::from_time_t(0);
  const auto j = m.to_json();
  CHECK(j.at("command") == "predict");
  CHECK(j.at("seed") == 42);
  CHECK(j.at("started") == "1970-01-01T00:00:00Z");
  CHECK(j.at("version") == std::string(version));
  CHECK(nlohmann::json::parse(j.dump()) == j);
}
