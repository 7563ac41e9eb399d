#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hofid/io.hpp"

#ifndef HOFID_CLI
#error "HOFID_CLI must name the command-line binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("hofid_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args, const std::string& log = "log.txt") {
  const std::string cmd = std::string(HOFID_CLI) + " --workers 2 " + args + " >" + path(log) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& file, const std::string& text) { std::ofstream(file, std::ios::binary) << text; }

std::vector<hofid::SweepRow> rows_of(const std::string& file) {
  std::ifstream in(file);
  return hofid::read_sweep_csv(in);
}

}  // namespace

TEST_CASE("sweep writes one row per grid point and a manifest") {
  REQUIRE(run("sweep --sites 14 --lambda-min 0 --lambda-max 0.5 --lambda-step 0.01 --quiet --out " +
              path("l14.csv")) == 0);
  const auto rows = rows_of(path("l14.csv"));
  CHECK(rows.size() == 51);
  CHECK(rows.back().flag == "near_degenerate");
  const auto manifest = json::parse(slurp(path("l14.csv") + ".manifest.json"));
  CHECK(manifest["command"] == "sweep");
  CHECK(manifest["workers"] == 2);
  CHECK(manifest["model"]["boundary"] == "periodic");
  CHECK(manifest["parameters"]["sites"] == json::array({14}));
  CHECK(manifest["parameters"]["delta"] == 1e-3);
  CHECK(manifest["parameters"]["solver"]["seed"] == 1);
  CHECK(manifest["points"].size() == 51);
  CHECK(manifest["points"][0].contains("seconds"));

  SUBCASE("peaks on chi2 are empty") {
    REQUIRE(run("peaks --in " + path("l14.csv") + " --quantity chi2 --out " + path("chi2_peaks.json")) == 0);
    CHECK(json::parse(slurp(path("chi2_peaks.json"))) == json::array());
  }
  SUBCASE("plot of a sweep column") {
    REQUIRE(run("plot --in " + path("l14.csv") + " --quantity chi3_abs,chi2 --out " + path("p.svg")) == 0);
    CHECK(slurp(path("p_chi3_abs.svg")).find("<polyline") != std::string::npos);
    CHECK(slurp(path("p_chi2.svg")).find("<polyline") != std::string::npos);
    CHECK(fs::exists(path("p_chi2.svg") + ".manifest.json"));
    CHECK(run("plot --in " + path("l14.csv") + " --quantity chi5 --out " + path("bad.svg")) == 1);
  }
}

TEST_CASE("identical sweeps are byte-identical") {
  const std::string flags = "sweep --sites 8,10 --lambda-min 0.1 --lambda-max 0.3 --lambda-step 0.05 --quiet --out ";
  REQUIRE(run(flags + path("a.csv")) == 0);
  REQUIRE(run(flags + path("b.csv")) == 0);
  CHECK(slurp(path("a.csv")) == slurp(path("b.csv")));
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run("sweep --sites 13 --out " + path("odd.csv"), "odd.txt") == 1);
  CHECK(slurp(path("odd.txt")).find("even") != std::string::npos);
  CHECK(run("sweep --sites 8 --lambda-step 0.002 --out " + path("x.csv")) == 1);
  CHECK(run("sweep --method exotic --out " + path("x.csv")) == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("empty grid is a successful empty table") {
  REQUIRE(run("sweep --sites 8 --lambda-min 0.3 --lambda-max 0.2 --out " + path("empty.csv")) == 0);
  CHECK(slurp(path("empty.csv")) == std::string(hofid::kSweepHeader) + "\n");
}

TEST_CASE("peaks rejects malformed input with the line number") {
  write(path("bad.csv"), std::string(hofid::kSweepHeader) + "\n8,0.1,-3,0.5,1,0.1,0.2,0.2,0,ok\n8,0.2,oops\n");
  CHECK(run("peaks --in " + path("bad.csv") + " --out " + path("bad.json"), "bad.txt") == 1);
  CHECK(slurp(path("bad.txt")).find("line 3") != std::string::npos);
  write(path("nocol.csv"), "L,lambda,energy\n8,0.1,-3\n");
  CHECK(run("peaks --in " + path("nocol.csv") + " --out " + path("bad.json"), "nocol.txt") == 1);
  CHECK(slurp(path("nocol.txt")).find("missing column") != std::string::npos);
}

TEST_CASE("peaks finds one peak per size in a synthetic table") {
  std::ostringstream csv;
  csv << hofid::kSweepHeader << "\n";
  for (int L : {14, 16, 18}) {
    const double centre = 0.24 + 1.0 / L;
    for (int i = 0; i <= 50; ++i) {
      const double x = 0.01 * i;
      const double y = 10.0 - 100.0 * (x - centre) * (x - centre);
      csv << L << "," << hofid::format_double(x) << ",-1,0.1,1,0.1," << hofid::format_double(y) << ","
          << hofid::format_double(y) << ",0,ok\n";
    }
  }
  write(path("synthetic.csv"), csv.str());
  REQUIRE(run("peaks --in " + path("synthetic.csv") + " --quantity chi3_abs --out " + path("syn_peaks.json")) == 0);
  const auto peaks = json::parse(slurp(path("syn_peaks.json")));
  REQUIRE(peaks.size() == 3);
  CHECK(std::abs(peaks[1]["lambda_peak"].get<double>() - (0.24 + 1.0 / 16)) < 1e-12);

  REQUIRE(run("scale --in " + path("syn_peaks.json") + " --out " + path("syn_scale.json")) == 0);
  const auto scale = json::parse(slurp(path("syn_scale.json")));
  CHECK(scale["primary"] == "inv_L");
  REQUIRE(scale["fits"].size() == 2);
  CHECK(scale["fits"][0]["primary"] == true);
  CHECK(scale["fits"][1]["variable"] == "inv_L2");
  CHECK(std::abs(scale["fits"][0]["lambda_c"].get<double>() - 0.24) < 1e-12);

  REQUIRE(run("plot --in " + path("syn_scale.json") + " --out " + path("scale.svg")) == 0);
  CHECK(slurp(path("scale.svg")).find("<circle") != std::string::npos);
}

TEST_CASE("scale rejects short and duplicate peak lists") {
  write(path("two.json"), R"([{"L":14,"lambda_peak":0.3},{"L":16,"lambda_peak":0.29}])");
  CHECK(run("scale --in " + path("two.json") + " --out " + path("o.json")) == 1);
  write(path("dup.json"), R"([{"L":14,"lambda_peak":0.3},{"L":14,"lambda_peak":0.29},{"L":16,"lambda_peak":0.28}])");
  CHECK(run("scale --in " + path("dup.json") + " --out " + path("o.json")) == 1);
  write(path("garbage.json"), "{not json");
  CHECK(run("scale --in " + path("garbage.json") + " --out " + path("o.json")) == 1);
}

TEST_CASE("oracle subcommand") {
  REQUIRE(run("oracle --sites 8 --lambda 0.2 --out " + path("oracle.json"), "oracle.txt") == 0);
  const auto report = json::parse(slurp(path("oracle.json")));
  CHECK(report["all_within_tolerance"] == true);
  CHECK(report["lines"].size() == 5);
  CHECK(slurp(path("oracle.txt")).find("perturbative") != std::string::npos);
  CHECK(run("oracle --sites 8 --lambda 0.0") == 0);
  CHECK(run("oracle --sites 16 --lambda 0.2") == 1);
  CHECK(run("oracle --sites 14 --lambda 0.2") == 1);
  CHECK(run("oracle --sites 8 --lambda 0.2 --tol-chi3 1e-12") == 2);
}

TEST_CASE("plot rejects empty input") {
  write(path("empty.txt"), "");
  CHECK(run("plot --in " + path("empty.txt") + " --out " + path("e.svg")) == 1);
  write(path("header_only.csv"), std::string(hofid::kSweepHeader) + "\n");
  CHECK(run("plot --in " + path("header_only.csv") + " --out " + path("e.svg")) == 1);
}
