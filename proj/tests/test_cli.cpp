// End-to-end checks of the stablesysid binary. The binary path comes from the
// SSID_CLI_BIN environment variable (set by ctest).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ssid/io.hpp"
#include "ssid/linalg.hpp"

using namespace ssid;
namespace fs = std::filesystem;

namespace {

std::string cli_bin() {
    const char* env = std::getenv("SSID_CLI_BIN");
    REQUIRE_MESSAGE(env != nullptr, "SSID_CLI_BIN must point at the stablesysid binary");
    return env;
}

struct Workdir {
    fs::path path;
    Workdir() {
        path = fs::temp_directory_path() / ("ssid_cli_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~Workdir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = cli_bin() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with the usage code") {
    CHECK(run("definitely-not-a-command") == 2);
    CHECK(run("train --in missing.sst") == 2);        // --out required
    CHECK(run("spectrum --out x.csv") == 2);          // model list required
    CHECK(run("generate lti --no-such-flag") == 2);
    CHECK(run("compress --in x --out y --basis-out z") == 2); // rank/energy missing
}

TEST_CASE("identical seeds give identical generated files") {
    Workdir dir;
    REQUIRE(run("generate lti --n 4 --seed 7 --traj 2 --steps 50 --out " + dir.file("a.ssb")) ==
            0);
    REQUIRE(run("generate lti --n 4 --seed 7 --traj 2 --steps 50 --out " + dir.file("b.ssb")) ==
            0);
    CHECK(slurp(dir.file("a.ssb")) == slurp(dir.file("b.ssb")));
}

TEST_CASE("pipeline: generate, train, spectrum, evaluate, simulate") {
    Workdir dir;
    const std::string data = dir.file("lti.sst");
    const std::string model = dir.file("m.ssm");
    REQUIRE(run("generate lti --n 3 --seed 11 --traj 2 --steps 150 --dt 0.02 --out " + data) ==
            0);
    REQUIRE(run("train --in " + data + " --out " + model +
                " --method slsi --updates 300 --seed 2") == 0);

    // model file parses and is stable by construction
    const ModelFile mf = read_model(model);
    CHECK(mf.model.provenance == Provenance::StableParameterized);
    REQUIRE(mf.params);
    CHECK(eigenvalues(mf.model.a).max_real() <= 1e-8);

    // eigenvalue report and loss history exist
    CHECK(fs::exists(model + ".eig.csv"));
    CHECK(fs::exists(model + ".loss.csv"));

    const std::string eig = dir.file("eig.csv");
    REQUIRE(run("spectrum " + model + " --out " + eig) == 0);
    std::ifstream in(eig);
    std::string header;
    std::getline(in, header);
    CHECK(header == "model,re,im,in_zoom");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 3);

    REQUIRE(run("evaluate --model " + model + " --test " + data + " --out " +
                dir.file("metrics.csv")) == 0);
    CHECK(fs::exists(dir.file("metrics.csv")));
    CHECK(fs::exists(dir.file("metrics.csv.steps.csv")));

    REQUIRE(run("simulate --model " + model + " --x0-from " + data +
                " --steps 100 --dt 0.02 --out " + dir.file("traj.sst")) == 0);
    const SnapshotSet traj = read_snapshots(dir.file("traj.sst"));
    CHECK(traj.trajectories[0].states.cols() == 101);
}

TEST_CASE("train reruns with one seed produce identical model files") {
    Workdir dir;
    const std::string data = dir.file("d.ssb");
    REQUIRE(run("generate lti --n 2 --seed 3 --traj 1 --steps 80 --out " + data) == 0);
    REQUIRE(run("train --in " + data + " --out " + dir.file("m1.ssm") +
                " --method slsi --updates 100 --seed 5") == 0);
    REQUIRE(run("train --in " + data + " --out " + dir.file("m2.ssm") +
                " --method slsi --updates 100 --seed 5") == 0);
    CHECK(slurp(dir.file("m1.ssm")) == slurp(dir.file("m2.ssm")));
    CHECK(slurp(dir.file("m1.ssm") + ".loss.csv") == slurp(dir.file("m2.ssm") + ".loss.csv"));
}

TEST_CASE("derivative methods demand derivative snapshots") {
    Workdir dir;
    const std::string data = dir.file("nd.sst");
    REQUIRE(run("generate lti --n 2 --seed 3 --traj 1 --steps 30 --out " + data) == 0);
    CHECK(run("train --in " + data + " --out " + dir.file("m.ssm") + " --method deriv-ls") == 2);

    const std::string with_d = dir.file("wd.sst");
    REQUIRE(run("generate lti --n 2 --seed 3 --traj 1 --steps 30 --derivatives --out " +
                with_d) == 0);
    CHECK(run("train --in " + with_d + " --out " + dir.file("m2.ssm") + " --method deriv-ls") ==
          0);
    const ModelFile mf = read_model(dir.file("m2.ssm"));
    CHECK(mf.model.provenance == Provenance::Unconstrained);
}

TEST_CASE("data errors exit with the data code") {
    Workdir dir;
    const std::string d2 = dir.file("d2.sst");
    const std::string d3 = dir.file("d3.sst");
    REQUIRE(run("generate lti --n 2 --seed 1 --traj 1 --steps 30 --out " + d2) == 0);
    REQUIRE(run("generate lti --n 3 --seed 1 --traj 1 --steps 30 --out " + d3) == 0);
    REQUIRE(run("train --in " + d2 + " --out " + dir.file("m2.ssm") +
                " --method slsi --updates 50") == 0);
    // model dimension does not match the test data
    CHECK(run("evaluate --model " + dir.file("m2.ssm") + " --test " + d3 + " --out " +
              dir.file("x.csv")) == 3);
    // unreadable input
    CHECK(run("train --in " + dir.file("absent.sst") + " --out " + dir.file("y.ssm")) == 3);
}

TEST_CASE("zero initial state simulates to the zero trajectory") {
    Workdir dir;
    const std::string data = dir.file("d.sst");
    const std::string model = dir.file("m.ssm");
    REQUIRE(run("generate lti --n 2 --seed 13 --traj 1 --steps 40 --out " + data) == 0);
    REQUIRE(run("train --in " + data + " --out " + model + " --method slsi --updates 50") == 0);
    REQUIRE(run("simulate --model " + model + " --x0-zero --steps 20 --dt 0.1 --out " +
                dir.file("z.sst")) == 0);
    const SnapshotSet traj = read_snapshots(dir.file("z.sst"));
    CHECK(traj.trajectories[0].states.max_abs() == 0.0);
}

TEST_CASE("config files feed options and flags override them") {
    Workdir dir;
    const std::string data = dir.file("d.sst");
    REQUIRE(run("generate lti --n 2 --seed 3 --traj 1 --steps 40 --out " + data) == 0);

    std::ofstream cfg(dir.file("run.cfg"));
    cfg << "[train]\n"
        << "in = " << data << "\n"
        << "out = " << dir.file("mc.ssm") << "\n"
        << "method = slsi\n"
        << "updates = 60\n"
        << "seed = 4\n";
    cfg.close();
    REQUIRE(run("--config " + dir.file("run.cfg") + " train") == 0);
    CHECK(fs::exists(dir.file("mc.ssm")));

    // flag wins over the file value: different seed changes the model
    REQUIRE(run("--config " + dir.file("run.cfg") + " train --out " + dir.file("mc2.ssm") +
                " --seed 9") == 0);
    CHECK(slurp(dir.file("mc.ssm")) != slurp(dir.file("mc2.ssm")));

    // unknown keys are rejected
    std::ofstream bad(dir.file("bad.cfg"));
    bad << "[train]\nnonsense_key = 1\n";
    bad.close();
    CHECK(run("--config " + dir.file("bad.cfg") + " train --in " + data + " --out " +
              dir.file("mx.ssm")) == 2);
}

} // TEST_SUITE
