#include "condense/density_table.hpp"

#include "doctest.h"
#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "condense_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(CONDENSE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write(const std::string& name, const std::string& text) {
    fs::create_directories(kRoot);
    const fs::path p = kRoot / name;
    std::ofstream(p) << text;
    return p;
}

const char* kQuick = "[chain]\niterations = 600\nburn_in = 100\nthin = 5\n[grid]\ny_points = 301\n";

} // namespace

TEST_CASE("toy fit completes and is deterministic") {
    fs::remove_all(kRoot);
    const auto cfg = write("quick.ini", kQuick);
    REQUIRE(run("simulate --n 10 --seed 4 --out " + (kRoot / "sim").string()) == 0);
    const auto data = kRoot / "sim" / "data.csv";
    CHECK(fs::exists(kRoot / "sim" / "truth.json"));

    const std::string base = "fit " + data.string() + " --config " + cfg.string() + " --seed 9 --out ";
    REQUIRE(run(base + (kRoot / "a").string()) == 0);
    REQUIRE(run(base + (kRoot / "b").string() + " --workers 2") == 0);
    for (const char* f : {"density.csv", "draws.jsonl", "manifest.json"}) {
        CAPTURE(f);
        CHECK(slurp(kRoot / "a" / f) == slurp(kRoot / "b" / f));
    }
    const auto table = condense::read_density_csv((kRoot / "a" / "density.csv").string());
    for (std::size_t m = 0; m < table.x_count(); ++m) {
        double s = 0.0;
        for (double v : table.slice(m)) s += v;
        CHECK(std::abs(s * table.cell_volume() - 1.0) < 1e-2);
    }
    const auto manifest = nlohmann::json::parse(slurp(kRoot / "a" / "manifest.json"));
    for (const char* key : {"config", "eb", "diagnostics", "config_hash", "seed", "version", "gamma_used"}) {
        CHECK(manifest.contains(key));
    }
    CHECK(manifest["status"] == "complete");
}

TEST_CASE("resume after an interrupted fit reproduces the uninterrupted outputs") {
    const auto cfg = write("resume.ini", "[chain]\niterations = 8000\nburn_in = 1000\nthin = 10\n");
    REQUIRE(run("simulate --n 400 --seed 5 --out " + (kRoot / "sim5").string()) == 0);
    const auto data = kRoot / "sim5" / "data.csv";
    const std::string base = "fit " + data.string() + " --config " + cfg.string() + " --seed 2 ";
    REQUIRE(run(base + "--out " + (kRoot / "full").string()) == 0);

    const fs::path part = kRoot / "part";
    const std::string killed =
        "timeout -s KILL 1 " + std::string(CONDENSE_CLI) + " " + base + "--checkpoint-every 250 --out " + part.string() +
        " > /dev/null 2>&1";
    (void)std::system(killed.c_str());
    REQUIRE(fs::exists(part / "manifest.json"));
    const auto before = nlohmann::json::parse(slurp(part / "manifest.json"));
    MESSAGE("status after interruption: " << before["status"]);
    REQUIRE(run(base + "--resume --checkpoint-every 250 --out " + part.string()) == 0);
    for (const char* f : {"density.csv", "draws.jsonl", "manifest.json"}) {
        CAPTURE(f);
        CHECK(slurp(kRoot / "full" / f) == slurp(part / f));
    }
    // a different seed cannot resume this run
    CHECK(run("fit " + data.string() + " --config " + cfg.string() + " --seed 3 --resume --out " + part.string()) == 4);
}

TEST_CASE("exit codes") {
    const auto cfg = write("quick.ini", kQuick);
    const auto bad = write("bad.csv", "x1,y1\n0.5,1\n0.5,oops\n");
    CHECK(run("fit " + bad.string() + " --config " + cfg.string() + " --out " + (kRoot / "e").string()) == 2);
    CHECK(run("fit " + (kRoot / "missing.csv").string() + " --out " + (kRoot / "e").string()) == 2);
    const auto flat = write("flat.csv", "x1,y1\n0.1,2\n0.5,2\n0.9,2\n");
    CHECK(run("fit " + flat.string() + " --config " + cfg.string() + " --out " + (kRoot / "e").string()) == 3);
    const auto one = write("one.csv", "x1,y1\n0.1,2\n");
    CHECK(run("eb-estimate " + one.string()) == 3);
    const auto two = write("two.csv", "x1,x2,y1\n0.1,0.2,2\n0.5,0.3,1\n0.7,0.1,0\n");
    CHECK(run("fit " + two.string() + " --config " + cfg.string() + " --out " + (kRoot / "e").string()) == 4);
    const auto unknown = write("unknown.ini", "[chain]\nspeed = 3\n");
    CHECK(run("eb-estimate " + flat.string() + " --config " + unknown.string()) == 4);
    const auto few = write("few.ini", "[chain]\niterations = 100\nburn_in = 50\n");
    CHECK(run("fit " + two.string() + " --config " + few.string() + " --out " + (kRoot / "e").string()) == 4);
    const auto dup = write("dup.ini", "[study]\nn_grid = 500, 500\n");
    CHECK(run("rate-study --config " + dup.string() + " --out " + (kRoot / "e").string()) == 4);
    const auto slow = write("slow.ini",
                            "[chain]\niterations = 100000\nburn_in = 100\ntimeout_seconds = 0.000001\n"
                            "[study]\nn_grid = 50, 60, 70\nreplicates = 1\n");
    CHECK(run("rate-study --config " + slow.string() + " --out " + (kRoot / "slow").string()) == 5);
    CHECK(fs::exists(kRoot / "slow" / "result.csv"));
    CHECK(run("frobnicate") == 2);
    CHECK(run("fit") == 2);
}

TEST_CASE("eb-estimate and metrics print JSON") {
    REQUIRE(run("simulate --n 200 --seed 6 --out " + (kRoot / "sim6").string()) == 0);
    const std::string eb = std::string(CONDENSE_CLI) + " eb-estimate " + (kRoot / "sim6" / "data.csv").string() +
                           " > " + (kRoot / "eb.json").string();
    REQUIRE(std::system(eb.c_str()) == 0);
    const auto j = nlohmann::json::parse(slurp(kRoot / "eb.json"));
    for (const char* key : {"raw", "clamped", "box", "flags"}) CHECK(j.contains(key));

    const auto a = write("ta.csv", "x1,y1,density\n0.5,0,0.5\n0.5,1,0.5\n0.5,2,0\n");
    const auto b = write("tb.csv", "x1,y1,density\n0.5,0,0\n0.5,1,0.5\n0.5,2,0.5\n");
    const std::string met = std::string(CONDENSE_CLI) + " metrics " + a.string() + " " + b.string() + " > " +
                            (kRoot / "m.json").string();
    REQUIRE(std::system(met.c_str()) == 0);
    const auto m = nlohmann::json::parse(slurp(kRoot / "m.json"));
    CHECK(m["l1"].get<double>() == doctest::Approx(1.0));
    CHECK(m["kl"] == "inf");
}
