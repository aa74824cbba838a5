#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("sdcd_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = {}) {
    TempDir io("io");
    const std::string out_path = io.file("out.txt");
    const std::string err_path = io.file("err.txt");
    const std::string command = env_prefix + SDCD_CLI_PATH + " " + args + " >" + out_path +
                                " 2>" + err_path;
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

void write_minimal_spec(const std::string& path, unsigned days = 1) {
    std::ofstream spec(path);
    spec << R"({
        "rng_seed": 21, "layout_seed": 4,
        "stops": 2, "lines": 1, "stops_per_line": 2,
        "headway_s": 1800, "days": )"
         << days << R"(, "noise_std_s": 5.0,
        "start_date": "2021-06-01"
    })";
}

}  // namespace

TEST_CASE("synth writes all three files, even for a two-stop city") {
    TempDir tmp("synth");
    write_minimal_spec(tmp.file("city.json"));
    const auto result =
        run_cli("synth --spec " + tmp.file("city.json") + " --out " + tmp.file("out"));
    CHECK(result.exit_code == 0);
    for (const char* name : {"snapshots.csv", "schedule.csv", "ground_truth.json"}) {
        INFO(name);
        CHECK(fs::file_size(tmp.file("out/"s + name)) > 0);
    }
}

TEST_CASE("synth snapshot timestamps span the requested days") {
    TempDir tmp("days");
    write_minimal_spec(tmp.file("city.json"), 4);
    const auto result =
        run_cli("synth --spec " + tmp.file("city.json") + " --out " + tmp.file("out"));
    REQUIRE(result.exit_code == 0);
    std::ifstream in(tmp.file("out/snapshots.csv"));
    std::string line;
    std::getline(in, line);  // header
    std::set<std::string> dates;
    while (std::getline(in, line)) {
        dates.insert(line.substr(0, 10));
    }
    CHECK(dates.size() == 4);
    CHECK(*dates.begin() == "2021-06-01");
    CHECK(*dates.rbegin() == "2021-06-04");
}

TEST_CASE("repeating a seeded synth reproduces the bytes") {
    TempDir tmp("seeded");
    write_minimal_spec(tmp.file("city.json"));
    REQUIRE(run_cli("synth --spec " + tmp.file("city.json") + " --out " + tmp.file("a") +
                    " --seed 99")
                .exit_code == 0);
    REQUIRE(run_cli("synth --spec " + tmp.file("city.json") + " --out " + tmp.file("b") +
                    " --seed 99")
                .exit_code == 0);
    REQUIRE(run_cli("synth --spec " + tmp.file("city.json") + " --out " + tmp.file("c") +
                    " --seed 100")
                .exit_code == 0);
    CHECK(slurp(tmp.file("a/snapshots.csv")) == slurp(tmp.file("b/snapshots.csv")));
    CHECK(slurp(tmp.file("a/snapshots.csv")) != slurp(tmp.file("c/snapshots.csv")));
}

TEST_CASE("run on a synthetic city writes artifacts and reports stats") {
    TempDir tmp("run");
    write_minimal_spec(tmp.file("city.json"), 2);
    const auto result = run_cli("run --spec " + tmp.file("city.json") +
                                " --mode edge --signal delay --detector adwin --out " +
                                tmp.file("out"));
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(tmp.file("out/detections.csv")));
    CHECK(fs::exists(tmp.file("out/summary.csv")));
    CHECK(fs::exists(tmp.file("out/summary.json")));
    CHECK(fs::exists(tmp.file("out/detections.geojson")));
    CHECK(fs::exists(tmp.file("out/run_stats.json")));
    CHECK(result.out.find("records:") != std::string::npos);
    CHECK(result.out.find("detectors created:") != std::string::npos);

    // bin keying through the flag surface
    const auto bin = run_cli("run --spec " + tmp.file("city.json") +
                             " --mode bin --signal delta --detector kswin --out " +
                             tmp.file("bin_out"));
    CHECK(bin.exit_code == 0);
    CHECK(fs::exists(tmp.file("bin_out/run_stats.json")));
    CHECK(slurp(tmp.file("bin_out/run_stats.json")).find("\"mode\": \"bin\"") !=
          std::string::npos);
}

TEST_CASE("evening slice of a morning-only perturbation is clean") {
    TempDir tmp("slice");
    {
        std::ofstream spec(tmp.file("city.json"));
        spec << R"({
            "rng_seed": 31, "layout_seed": 6,
            "lines": [["A", "B", "C", "A"]],
            "headway_s": 300, "days": 3, "noise_std_s": 10.0,
            "start_date": "2021-06-01",
            "perturbations": [{"prev": "B", "curr": "C", "kind": "HOURLY",
                               "start": "2021-06-01T08:00:00Z",
                               "end": "2021-06-03T09:00:00Z",
                               "added_delay_s": 150}]
        })";
    }
    REQUIRE(run_cli("run --spec " + tmp.file("city.json") +
                    " --signal delta --detector adwin --out " + tmp.file("out"))
                .exit_code == 0);

    // the morning burst is detected at all
    const auto full = run_cli("summarize --detections " + tmp.file("out/detections.csv"));
    REQUIRE(full.exit_code == 0);
    bool any_detection = false;
    {
        std::istringstream rows(full.out);
        std::string row;
        std::getline(rows, row);  // header
        while (std::getline(rows, row)) {
            if (row.find(",0,0,", row.find(',')) == std::string::npos) any_detection = true;
        }
    }
    CHECK(any_detection);

    // one geojson feature per detection row
    const std::string detections = slurp(tmp.file("out/detections.csv"));
    const auto detection_rows =
        std::count(detections.begin(), detections.end(), '\n') - 1;  // header
    REQUIRE(detection_rows > 0);
    const std::string geojson = slurp(tmp.file("out/detections.geojson"));
    std::ptrdiff_t features = 0;
    for (std::size_t at = geojson.find("\"Feature\""); at != std::string::npos;
         at = geojson.find("\"Feature\"", at + 1)) {
        ++features;
    }
    CHECK(features == detection_rows);

    // 16:00-20:00 never sees the 08:00-09:00 perturbation
    const auto evening = run_cli("summarize --detections " + tmp.file("out/detections.csv") +
                                 " --from-hour 16 --to-hour 20");
    REQUIRE(evening.exit_code == 0);
    std::istringstream rows(evening.out);
    std::string row;
    std::getline(rows, row);
    CHECK(row == "signal,date,records,increases,reductions,median_s,std_s");
    while (std::getline(rows, row)) {
        INFO(row);
        // every remaining row reports zero detections
        CHECK(row.find(",0,0,") != std::string::npos);
    }
}

TEST_CASE("replayed run equals the synthetic run it came from") {
    TempDir tmp("replay");
    write_minimal_spec(tmp.file("city.json"), 2);
    REQUIRE(run_cli("synth --spec " + tmp.file("city.json") + " --out " + tmp.file("data"))
                .exit_code == 0);
    const auto direct = run_cli("run --spec " + tmp.file("city.json") +
                                " --detector adwin --out " + tmp.file("direct"));
    REQUIRE(direct.exit_code == 0);
    const auto replayed = run_cli("run --source " + tmp.file("data/snapshots.csv") +
                                  " --schedule " + tmp.file("data/schedule.csv") +
                                  " --detector adwin --out " + tmp.file("replayed"));
    REQUIRE(replayed.exit_code == 0);
    CHECK(slurp(tmp.file("direct/detections.csv")) == slurp(tmp.file("replayed/detections.csv")));
    CHECK(slurp(tmp.file("direct/summary.csv")) == slurp(tmp.file("replayed/summary.csv")));
}

TEST_CASE("summarize re-derives the run summary exactly") {
    TempDir tmp("summ");
    write_minimal_spec(tmp.file("city.json"), 2);
    REQUIRE(run_cli("run --spec " + tmp.file("city.json") + " --out " + tmp.file("out"))
                .exit_code == 0);
    const auto result =
        run_cli("summarize --detections " + tmp.file("out/detections.csv"));
    CHECK(result.exit_code == 0);
    CHECK(result.out == slurp(tmp.file("out/summary.csv")));
}

TEST_CASE("summarize of an empty detections file prints the header only") {
    TempDir tmp("empty");
    {
        std::ofstream det(tmp.file("detections.csv"));
        det << "seq,event_time,date,hour,key,curr_stop,prev_stop,detector,signal,value_s,"
               "pre_mean_s,post_mean_s,direction,course,lat,lon\n";
    }
    const auto result = run_cli("summarize --detections " + tmp.file("detections.csv"));
    CHECK(result.exit_code == 0);
    CHECK(result.out == "signal,date,records,increases,reductions,median_s,std_s\n");
}

TEST_CASE("missing schedule file fails with the path in the message") {
    TempDir tmp("missing");
    write_minimal_spec(tmp.file("city.json"));
    REQUIRE(run_cli("synth --spec " + tmp.file("city.json") + " --out " + tmp.file("data"))
                .exit_code == 0);
    const auto result = run_cli("run --source " + tmp.file("data/snapshots.csv") +
                                " --schedule " + tmp.file("nope.csv") + " --out " +
                                tmp.file("out"));
    CHECK(result.exit_code == 3);
    CHECK(result.err.find(tmp.file("nope.csv")) != std::string::npos);
}

TEST_CASE("config errors exit with code 2") {
    TempDir tmp("badcfg");
    write_minimal_spec(tmp.file("city.json"));
    // no source at all
    CHECK(run_cli("run --out " + tmp.file("out")).exit_code == 2);
    // bad enum value is a parse error
    CHECK(run_cli("run --spec " + tmp.file("city.json") + " --mode diagonal --out " +
                  tmp.file("out"))
              .exit_code == 2);
    // out dir missing entirely
    CHECK(run_cli("run --spec " + tmp.file("city.json")).exit_code == 2);
    // bad confidence
    CHECK(run_cli("run --spec " + tmp.file("city.json") + " --confidence 7 --out " +
                  tmp.file("out"))
              .exit_code == 2);
}

TEST_CASE("SDCD_OUT provides the output directory when --out is absent") {
    TempDir tmp("envout");
    write_minimal_spec(tmp.file("city.json"));
    const auto result = run_cli("run --spec " + tmp.file("city.json"),
                                "SDCD_OUT=" + tmp.file("envdir") + " ");
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(tmp.file("envdir/detections.csv")));
}

TEST_CASE("matrix mode writes six runs into subdirectories") {
    TempDir tmp("matrix");
    write_minimal_spec(tmp.file("city.json"), 2);
    const auto result = run_cli("run --spec " + tmp.file("city.json") + " --matrix --out " +
                                tmp.file("out") + " --workers 2");
    REQUIRE(result.exit_code == 0);
    for (const char* combo : {"adwin_delay", "adwin_delta", "kswin_delay", "kswin_delta",
                              "hddm_delay", "hddm_delta"}) {
        INFO(combo);
        CHECK(fs::exists(tmp.file("out/"s + combo + "/detections.csv")));
        CHECK(fs::exists(tmp.file("out/"s + combo + "/run_stats.json")));
    }
}
