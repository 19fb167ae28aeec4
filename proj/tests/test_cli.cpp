#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "cyclecast/io_util.hpp"
#include "cyclecast/series.hpp"

using namespace cyclecast;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Fresh working directory per scenario so runs cannot interfere.
fs::path scenario_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "cyclecast_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs the real binary through the shell inside `dir`; `env_prefix` can set
// variables for the child (e.g. "CYCLECAST_SEED=9 ").
CmdResult run_cli(const fs::path& dir, const std::string& args,
                  const std::string& env_prefix = "") {
    const std::string cmd = "cd '" + dir.string() + "' && " + env_prefix + "'" +
                            CYCLECAST_BIN_PATH + "' " + args +
                            " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());

    CmdResult result;
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (fs::exists(dir / "stdout.txt")) result.out = read_file((dir / "stdout.txt").string());
    if (fs::exists(dir / "stderr.txt")) result.err = read_file((dir / "stderr.txt").string());
    return result;
}

std::vector<std::string> data_lines(const std::string& csv) {
    auto lines = split(csv, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    REQUIRE(!lines.empty());
    return std::vector<std::string>(lines.begin() + 1, lines.end());
}

}  // namespace

TEST_CASE("gen writes a bounded series and prints channel statistics") {
    const auto dir = scenario_dir("gen_basic");
    const auto res = run_cli(dir, "gen --case 1 --n 120 --seed 7 --out s.csv");
    REQUIRE(res.code == 0);

    const auto series = series_from_csv(read_file((dir / "s.csv").string()));
    REQUIRE(series.size() == 120);
    for (const auto& rec : series.records) {
        CHECK(rec.cycle_length >= 28);
        CHECK(rec.cycle_length <= 30);
        CHECK(rec.period_length == 5);
    }
    CHECK(res.out.find("mean=") != std::string::npos);
    CHECK(res.out.find("120 cycles") != std::string::npos);
}

TEST_CASE("gen rejects invalid configs without writing") {
    const auto dir = scenario_dir("gen_invalid");
    CHECK(run_cli(dir, "gen --case 1 --n 0 --out s.csv").code == 1);
    CHECK(!fs::exists(dir / "s.csv"));

    CHECK(run_cli(dir, "gen --case 9 --n 10 --out s.csv").code == 1);
    CHECK(!fs::exists(dir / "s.csv"));
}

TEST_CASE("gen is byte-deterministic and honors the seed precedence") {
    const auto dir = scenario_dir("gen_determinism");
    REQUIRE(run_cli(dir, "gen --case 2 --n 60 --seed 11 --out a.csv").code == 0);
    REQUIRE(run_cli(dir, "gen --case 2 --n 60 --seed 11 --out b.csv").code == 0);
    const auto a = read_file((dir / "a.csv").string());
    CHECK(a == read_file((dir / "b.csv").string()));

    // Environment fallback: CYCLECAST_SEED substitutes for a missing --seed.
    REQUIRE(run_cli(dir, "gen --case 2 --n 60 --out env.csv",
                    "CYCLECAST_SEED=11 ").code == 0);
    CHECK(read_file((dir / "env.csv").string()) == a);

    // An explicit flag wins over the environment.
    REQUIRE(run_cli(dir, "gen --case 2 --n 60 --seed 11 --out flag.csv",
                    "CYCLECAST_SEED=99 ").code == 0);
    CHECK(read_file((dir / "flag.csv").string()) == a);

    // A different seed actually changes the data.
    REQUIRE(run_cli(dir, "gen --case 2 --n 60 --seed 12 --out c.csv").code == 0);
    CHECK(read_file((dir / "c.csv").string()) != a);
}

TEST_CASE("eval compares the full model set and leaves sidecars") {
    const auto dir = scenario_dir("eval_full");
    REQUIRE(run_cli(dir, "gen --case 1 --n 80 --seed 3 --out s.csv").code == 0);
    const auto series_before = read_file((dir / "s.csv").string());

    const auto res = run_cli(
        dir,
        "eval --in s.csv --out m.csv --models ols,huber,lasso,omp,arima,lstm "
        "--horizon 14 --epochs 6 --seed 3");
    REQUIRE(res.code == 0);

    const auto rows = data_lines(read_file((dir / "m.csv").string()));
    CHECK(rows.size() == 12);  // 6 models x 2 channels
    for (const auto& row : rows) {
        CHECK(split(row, ',').size() == 7);
    }
    CHECK(res.out.find("model") != std::string::npos);

    // Input series untouched.
    CHECK(read_file((dir / "s.csv").string()) == series_before);

    // Predictions sidecar: every model contributes horizon rows per channel.
    const auto pred = read_file((dir / "m_predictions.csv").string());
    CHECK(split(pred, '\n')[0] == "model,channel,step,actual,predicted");
    CHECK(data_lines(pred).size() == 6 * 2 * 14);

    // Loss sidecar rows follow the configured epochs.
    const auto loss = read_file((dir / "m_loss.csv").string());
    CHECK(split(loss, '\n')[0] == "epoch,loss");
    CHECK(data_lines(loss).size() == 6);

    // Run echo records the resolved configuration.
    const auto run_echo = read_file((dir / "m_run.txt").string());
    CHECK(run_echo.find("models=ols,huber,lasso,omp,arima,lstm") !=
          std::string::npos);
    CHECK(run_echo.find("epochs=6") != std::string::npos);
}

TEST_CASE("eval runs are byte-identical") {
    const auto dir = scenario_dir("eval_determinism");
    REQUIRE(run_cli(dir, "gen --case 3 --n 70 --seed 21 --out s.csv").code == 0);

    const std::string flags =
        "eval --in s.csv --out %OUT% --models ols,lasso,lstm --horizon 10 "
        "--epochs 5 --seed 21";
    auto with_out = [&](const std::string& name) {
        std::string cmd = flags;
        cmd.replace(cmd.find("%OUT%"), 5, name);
        return cmd;
    };
    REQUIRE(run_cli(dir, with_out("m1.csv")).code == 0);
    REQUIRE(run_cli(dir, with_out("m2.csv")).code == 0);

    CHECK(read_file((dir / "m1.csv").string()) ==
          read_file((dir / "m2.csv").string()));
    CHECK(read_file((dir / "m1_predictions.csv").string()) ==
          read_file((dir / "m2_predictions.csv").string()));
    CHECK(read_file((dir / "m1_loss.csv").string()) ==
          read_file((dir / "m2_loss.csv").string()));
}

TEST_CASE("eval validation failures exit 1 with a message") {
    const auto dir = scenario_dir("eval_validation");
    REQUIRE(run_cli(dir, "gen --case 1 --n 120 --seed 4 --out s.csv").code == 0);

    const auto horizon = run_cli(dir, "eval --in s.csv --out m.csv --horizon 1000");
    CHECK(horizon.code == 1);
    CHECK(horizon.err.find("horizon") != std::string::npos);
    CHECK(!fs::exists(dir / "m.csv"));

    CHECK(run_cli(dir, "eval --in s.csv --out m.csv --models prophet").code == 1);
    CHECK(run_cli(dir, "eval --in s.csv --out m.csv --P 2").code == 1);
    CHECK(run_cli(dir, "eval --in s.csv --out m.csv --lr 2.0").code == 1);

    // Malformed CSV names the offending row.
    write_file_atomic((dir / "bad.csv").string(),
                      "index,cycle_length,period_length,period_start_day\n"
                      "0,29,5,1\n"
                      "1,notanumber,5,1\n");
    const auto bad = run_cli(dir, "eval --in bad.csv --out m.csv");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("row 2") != std::string::npos);
}

TEST_CASE("eval emits the loss curve for a single LSTM run") {
    const auto dir = scenario_dir("eval_lstm_only");
    REQUIRE(run_cli(dir, "gen --case 1 --n 60 --seed 5 --out s.csv").code == 0);

    const auto res = run_cli(
        dir, "eval --in s.csv --out m.csv --models lstm --epochs 7 --seed 5");
    REQUIRE(res.code == 0);
    CHECK(data_lines(read_file((dir / "m.csv").string())).size() == 2);
    CHECK(data_lines(read_file((dir / "m_loss.csv").string())).size() == 7);
}

TEST_CASE("eval saves fitted parameters on request") {
    const auto dir = scenario_dir("eval_save_fits");
    REQUIRE(run_cli(dir, "gen --case 1 --n 50 --seed 6 --out s.csv").code == 0);

    REQUIRE(run_cli(dir,
                    "eval --in s.csv --out m.csv --models ols,arima "
                    "--horizon 8 --save-fits")
                .code == 0);
    const auto params = read_file((dir / "m_params.txt").string());
    CHECK(params.find("# fit ols model") != std::string::npos);
    CHECK(params.find("# fit arima cycle") != std::string::npos);
    CHECK(params.find("# fit arima period") != std::string::npos);

    const auto no_fits = scenario_dir("eval_no_fits");
    REQUIRE(run_cli(no_fits, "gen --case 1 --n 50 --seed 6 --out s.csv").code == 0);
    REQUIRE(run_cli(no_fits,
                    "eval --in s.csv --out m.csv --models ols --horizon 8")
                .code == 0);
    CHECK(!fs::exists(no_fits / "m_params.txt"));
}

TEST_CASE("report preserves table rows and orders sections as given") {
    const auto dir = scenario_dir("report_sections");
    for (int case_id = 1; case_id <= 3; ++case_id) {
        const std::string n = std::to_string(case_id);
        REQUIRE(run_cli(dir, "gen --case " + n + " --n 40 --seed 8 --out s" + n +
                                 ".csv --config-out g" + n + ".txt")
                    .code == 0);
        REQUIRE(run_cli(dir, "eval --in s" + n + ".csv --out m" + n +
                                 ".csv --models ols,arima --horizon 6")
                    .code == 0);
    }

    const auto res = run_cli(dir,
                             "report --in m1.csv --in m2.csv --in m3.csv "
                             "--out report.md --gen-config g1.txt --series s1.csv");
    REQUIRE(res.code == 0);
    const auto doc = read_file((dir / "report.md").string());

    const auto pos1 = doc.find("### m1.csv");
    const auto pos2 = doc.find("### m2.csv");
    const auto pos3 = doc.find("### m3.csv");
    REQUIRE(pos1 != std::string::npos);
    REQUIRE(pos2 != std::string::npos);
    REQUIRE(pos3 != std::string::npos);
    CHECK(pos1 < pos2);
    CHECK(pos2 < pos3);

    // Row counts preserved: each section renders 4 data rows (2 models x 2
    // channels), plus one header and one separator line per table.
    std::size_t table_rows = 0;
    for (const auto& line : split(doc, '\n')) {
        if (!line.empty() && line[0] == '|' &&
            line.find("---") == std::string::npos &&
            line.find("| model |") == std::string::npos) {
            ++table_rows;
        }
    }
    CHECK(table_rows == 12);

    CHECK(doc.find("cycle_bounds") != std::string::npos);  // config echo
    CHECK(doc.find("Series summary") != std::string::npos);
    CHECK(doc.find("Run configuration") != std::string::npos);

    CHECK(run_cli(dir, "report --out r.md").code == 1);  // no inputs
    CHECK(run_cli(dir, "report --in missing.csv --out r.md").code == 1);
}

TEST_CASE("plotdata emits histograms, boxplot, and pass-through curves") {
    const auto dir = scenario_dir("plotdata");
    REQUIRE(run_cli(dir, "gen --case 1 --n 120 --seed 9 --out s.csv").code == 0);
    REQUIRE(run_cli(dir,
                    "eval --in s.csv --out m.csv --models lstm --epochs 5 "
                    "--horizon 6 --seed 9")
                .code == 0);

    REQUIRE(run_cli(dir,
                    "plotdata --series s.csv --predictions m_predictions.csv "
                    "--loss m_loss.csv --out-dir plots")
                .code == 0);

    const auto hist = read_file((dir / "plots/cycle_histogram.csv").string());
    long total = 0;
    for (const auto& row : data_lines(hist)) {
        const auto fields = split(row, ',');
        REQUIRE(fields.size() == 3);
        const long left = std::stol(fields[0]);
        const long count = std::stol(fields[2]);
        CHECK(left >= 28);
        CHECK(left <= 30);
        CHECK(count > 0);
        total += count;
    }
    CHECK(total == 120);

    const auto box = read_file((dir / "plots/boxplot.csv").string());
    CHECK(split(box, '\n')[0] == "channel,min,q1,median,q3,max");
    // Case 1 period lengths are constant 5: the five-number summary collapses.
    for (const auto& row : data_lines(box)) {
        const auto fields = split(row, ',');
        if (fields[0] == "period") {
            CHECK(fields[1] == "5");
            CHECK(fields[2] == "5");
            CHECK(fields[3] == "5");
            CHECK(fields[4] == "5");
            CHECK(fields[5] == "5");
        }
    }

    CHECK(data_lines(read_file((dir / "plots/loss_curve.csv").string())).size() ==
          5);
    CHECK(read_file((dir / "plots/actual_vs_predicted.csv").string()) ==
          read_file((dir / "m_predictions.csv").string()));

    CHECK(run_cli(dir, "plotdata --out-dir plots").code == 1);
    CHECK(run_cli(dir, "plotdata --series nope.csv --out-dir plots").code == 1);
}

TEST_CASE("write failures exit 2") {
    const auto dir = scenario_dir("io_failure");
    const auto res = run_cli(
        dir, "gen --case 1 --n 10 --out /nonexistent_dir_zz/s.csv");
    CHECK(res.code == 2);
    CHECK(res.err.find("error") != std::string::npos);
}
