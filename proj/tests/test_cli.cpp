#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dhaz/csv.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
    if (const char* p = std::getenv("DHAZ_CLI")) return p;
    for (const char* guess : {"../tools/dhaz", "build/tools/dhaz", "tools/dhaz"})
        if (fs::exists(guess)) return fs::absolute(guess).string();
    FAIL("dhaz binary not found; set DHAZ_CLI");
    return "";
}

int run(const std::string& args) {
    std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path work_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("dhaz_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path toy_csv(const fs::path& dir) {
    fs::path p = dir / "toy.csv";
    std::ofstream out(p);
    out << "time,status,x\n2,1,1.0\n1,0,0.0\n3,1,-1.0\n";
    return p;
}

} // namespace

TEST_CASE("augment writes the long format and a manifest") {
    fs::path dir = work_dir("augment");
    fs::path input = toy_csv(dir);
    int rc = run("augment --time time --status status --out " + (dir / "out").string() + " " +
                 input.string());
    REQUIRE(rc == 0);

    dhaz::CsvTable table = dhaz::read_csv((dir / "out" / "augmented.csv").string());
    REQUIRE(table.header == std::vector<std::string>{"obj", "timeInt", "y", "x"});
    REQUIRE(table.rows.size() == 5); // recoded toy data expands to 2+1+2 rows
    REQUIRE(fs::exists(dir / "out" / "run.json"));
}

TEST_CASE("usage errors exit with code 2") {
    fs::path dir = work_dir("usage");
    fs::path input = toy_csv(dir);
    REQUIRE(run("augment --status status " + input.string()) == 2); // missing --time
    REQUIRE(run("augment --time time --status status " + (dir / "nope.csv").string()) == 2);
    REQUIRE(run("fit --time time --status status --formula \"y ~ time(dummies) + banana\" " +
                input.string()) == 2);
    REQUIRE(run("tree --time time --status status --criterion WAIC " + input.string()) == 2);
    REQUIRE(run("nonsense") == 2);
}

TEST_CASE("simulate then fit recovers a sensible model") {
    fs::path dir = work_dir("simfit");
    int rc = run("simulate --n 800 --k 6 --baseline -1.2 --covariate x=normal:0,1 --coef x=0.7"
                 " --censoring uniform --seed 11 --out " +
                 dir.string());
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(dir / "sim.csv"));

    fs::path out = dir / "fit";
    rc = run("fit --time time --status status --formula \"y ~ time(dummies) + x\" --out " +
             out.string() + " " + (dir / "sim.csv").string());
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(out / "model.json"));
    REQUIRE(fs::exists(out / "wald.csv"));
    REQUIRE(fs::exists(out / "baseline.csv"));

    dhaz::CsvTable wald = dhaz::read_csv((out / "wald.csv").string());
    bool found_x = false;
    for (const auto& row : wald.rows) {
        if (row[0] == "x") {
            found_x = true;
            double est = std::stod(row[1]);
            REQUIRE(est > 0.3);
            REQUIRE(est < 1.1);
        }
    }
    REQUIRE(found_x);
}

TEST_CASE("simulate is byte-deterministic per seed") {
    fs::path a = work_dir("sima"), b = work_dir("simb");
    std::string spec = "simulate --n 200 --k 5 --baseline -1 --covariate z=uniform:0,2 "
                       "--coef z=-0.4 --censoring geometric:0.2 --seed 7 --out ";
    REQUIRE(run(spec + a.string()) == 0);
    REQUIRE(run(spec + b.string()) == 0);
    REQUIRE(slurp(a / "sim.csv") == slurp(b / "sim.csv"));
}

TEST_CASE("tree tuning writes outputs and repeats exactly") {
    fs::path dir = work_dir("tree");
    REQUIRE(run("simulate --n 400 --k 5 --baseline -1 --covariate x=normal:0,1 "
                "--covariate g=bernoulli:0.4 --coef x=0.6 --coef g=-0.9 --seed 3 --out " +
                dir.string()) == 0);

    fs::path out1 = dir / "t1", out2 = dir / "t2";
    std::string cmd = "tree --time time --status status --criterion BIC --grid 20:200:20 --out ";
    REQUIRE(run(cmd + out1.string() + " " + (dir / "sim.csv").string()) == 0);
    REQUIRE(run(cmd + out2.string() + " " + (dir / "sim.csv").string()) == 0);
    REQUIRE(fs::exists(out1 / "tree.json"));
    REQUIRE(fs::exists(out1 / "tree.txt"));
    REQUIRE(fs::exists(out1 / "tuning.csv"));
    REQUIRE(slurp(out1 / "tree.json") == slurp(out2 / "tree.json"));
    REQUIRE(slurp(out1 / "tuning.csv") == slurp(out2 / "tuning.csv"));

    dhaz::CsvTable tuning = dhaz::read_csv((out1 / "tuning.csv").string());
    REQUIRE(tuning.header[0] == "min_node_size");
    REQUIRE(tuning.rows.size() == 10);
}

TEST_CASE("diagnose consumes a fitted model") {
    fs::path dir = work_dir("diag");
    REQUIRE(run("simulate --n 600 --k 6 --baseline -1.3 --covariate x=normal:0,1 "
                "--covariate w=uniform:0,4 --coef x=0.8 --seed 5 --out " +
                dir.string()) == 0);
    fs::path fit_out = dir / "fit";
    // model omits w on purpose: the residual trend probes it
    REQUIRE(run("fit --time time --status status --formula \"y ~ time(dummies) + x\" --out " +
                fit_out.string() + " " + (dir / "sim.csv").string()) == 0);

    fs::path diag_out = dir / "diag";
    REQUIRE(run("diagnose --time time --status status --model " +
                (fit_out / "model.json").string() + " --residual-vs w --out " +
                diag_out.string() + " " + (dir / "sim.csv").string()) == 0);
    dhaz::CsvTable cal = dhaz::read_csv((diag_out / "calibration.csv").string());
    REQUIRE(cal.header == std::vector<std::string>{"group", "n", "mean_fitted", "empirical"});
    REQUIRE(cal.rows.size() >= 8);
    REQUIRE(fs::exists(diag_out / "residuals.csv"));
    REQUIRE(fs::exists(diag_out / "trend.csv"));

    // schema mismatch: different data file
    fs::path other = work_dir("diag_other");
    REQUIRE(run("simulate --n 100 --k 4 --baseline -1 --covariate q=normal:0,1 --seed 9 --out " +
                other.string()) == 0);
    REQUIRE(run("diagnose --time time --status status --model " +
                (fit_out / "model.json").string() + " --out " + (other / "d").string() + " " +
                (other / "sim.csv").string()) == 2);
}

TEST_CASE("horizon override changes the recode boundary") {
    fs::path dir = work_dir("horizon");
    fs::path input = toy_csv(dir);
    // with k=8 the (3, event) record sits below the horizon and keeps its row
    int rc = run("augment --time time --status status --horizon 8 --out " +
                 (dir / "out").string() + " " + input.string());
    REQUIRE(rc == 0);
    dhaz::CsvTable table = dhaz::read_csv((dir / "out" / "augmented.csv").string());
    REQUIRE(table.rows.size() == 6); // 2 + 1 + 3, nothing recoded
    REQUIRE(run("augment --time time --status status --horizon 2 --out " +
                (dir / "o2").string() + " " + input.string()) == 2); // below max time
}

TEST_CASE("intercept-only fit reproduces the event-rate hazard") {
    fs::path dir = work_dir("intercept");
    fs::path input = toy_csv(dir);
    fs::path out = dir / "fit";
    REQUIRE(run("fit --time time --status status --formula \"y ~ 1\" --out " + out.string() +
                " " + input.string()) == 0);
    std::string model = slurp(out / "model.json");
    REQUIRE(model.find("\"type\": \"parametric\"") != std::string::npos);
    // one event over five person-periods: logit(0.2)
    REQUIRE(model.find("-1.386") != std::string::npos);
}
