#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dtmfdrive/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int rc;
  std::string out;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "dtmfdrive_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const std::string& env = "") {
  const auto out = workdir() / "stdout.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" DTMFDRIVE_CLI "' " + args + " > '" +
                          out.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("encode then decode recovers the key codes") {
    REQUIRE(cli("encode --keys 2486 --hold-ms 100 --gap-ms 80 --out seq.wav").rc == 0);
    const auto buf = dtmfdrive::signal::read_wav(workdir() / "seq.wav");
    CHECK(buf.rate_hz == 8000);

    REQUIRE(cli("decode --in seq.wav --profile standard --events events.csv").rc == 0);
    const auto csv = slurp(workdir() / "events.csv");
    CHECK(csv ==
          "t_ms,event,code_hex,key\n"
          "38.250,latched,0x02,2\n133.875,released,0x02,2\n"
          "216.750,latched,0x04,4\n312.375,released,0x04,4\n"
          "395.250,latched,0x08,8\n497.250,released,0x08,8\n"
          "580.125,latched,0x06,6\n675.750,released,0x06,6\n");

    const auto r = cli("--json decode --in seq.wav");
    REQUIRE(r.rc == 0);
    const auto doc = json::parse(r.out);
    std::string codes;
    for (const auto& e : doc["events"]) {
      if (e["event"] == "latched") codes += e["code"].get<std::string>() + " ";
    }
    CHECK(codes == "0010 0100 1000 0110 ");
  }

  TEST_CASE("exit codes") {
    CHECK(cli("").rc == 1);
    CHECK(cli("frobnicate").rc == 1);
    CHECK(cli("encode --keys 2X --out x.wav").rc == 1);
    CHECK(cli("encode --keys 2 --out x.wav --rate 22050").rc == 1);
    CHECK(cli("decode --in missing.wav").rc == 2);
    std::ofstream(workdir() / "junk.wav") << "this is not audio";
    CHECK(cli("decode --in junk.wav").rc == 2);
    CHECK(cli("calc guard-time --r 390k --c 100n --vdd 5 --vtst 6").rc == 1);
    CHECK(cli("--help").rc == 0);
  }

  TEST_CASE("calc accepts engineering suffixes") {
    auto r = cli("--json calc guard-time --r 390k --c 100n --vdd 5 --vtst 2.5");
    REQUIRE(r.rc == 0);
    CHECK(json::parse(r.out)["guard_time_s"].get<double>() == doctest::Approx(0.0270327).epsilon(1e-5));
    r = cli("--json calc impedance --r 100k --c 10n --f 685");
    REQUIRE(r.rc == 0);
    CHECK(r.out.find("102") != std::string::npos);
    r = cli("--json calc parallel --r1 39k --r2 100k");
    REQUIRE(r.rc == 0);
    CHECK(r.out.find("2805") != std::string::npos);
  }

  TEST_CASE("report exits 0 when every golden row matches") {
    const auto r = cli("report --tables");
    CHECK(r.rc == 0);
    CHECK(r.out.find("Forward") != std::string::npos);
    CHECK(r.out.find("Left turn") != std::string::npos);
    const auto j = cli("--json report --tables");
    CHECK(j.rc == 0);
    CHECK(json::parse(j.out)["pass"] == true);
  }

  TEST_CASE("simulate writes the trace") {
    std::ofstream(workdir() / "s.json") << R"({"duration_ms": 300,
      "script": [{"key": "2", "press_at_ms": 0, "hold_ms": 100}]})";
    REQUIRE(cli("simulate --scenario s.json --out trace.csv").rc == 0);
    const auto trace = slurp(workdir() / "trace.csv");
    CHECK(trace.rfind("t_ms,call,key,est,latched_hex,port_hex,left,right,x,y,theta\n", 0) == 0);
    CHECK(trace.find("0x0a,fwd,fwd") != std::string::npos);
    std::ofstream(workdir() / "bad.json") << R"({"duration": 300})";
    CHECK(cli("simulate --scenario bad.json").rc == 1);
  }

  TEST_CASE("profile from the environment") {
    REQUIRE(cli("encode --keys 2 --out p.wav --freq-scale 0.95").rc == 0);
    auto r = cli("--json decode --in p.wav");
    CHECK(json::parse(r.out)["events"].empty());
    r = cli("--json decode --in p.wav", "DTMF_DRIVE_PROFILE=paper-replication");
    CHECK(json::parse(r.out)["events"].size() == 2);
    // An explicit flag wins over the environment.
    r = cli("--json decode --in p.wav --profile standard", "DTMF_DRIVE_PROFILE=paper-replication");
    CHECK(json::parse(r.out)["events"].empty());
    CHECK(cli("decode --in p.wav", "DTMF_DRIVE_PROFILE=wide").rc == 1);
  }
}
